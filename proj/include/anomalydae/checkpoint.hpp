#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "anomalydae/errors.hpp"
#include "anomalydae/io.hpp"
#include "anomalydae/model.hpp"
#include "anomalydae/training.hpp"

namespace anomalydae {

// Checkpoint text format, version 1. Every real is written as a C99 hex
// float, so a load reproduces the saved bits exactly.
//
//   anomalydae-checkpoint 1
//   hp <key> <value>              (one line per hyperparameter)
//   adam_t <steps>
//   tensor <group> <name> <rows> <cols>
//   <row of cols hex floats>      (rows lines)
//   ...
//   end
//
// Groups are "param", "adam_m" and "adam_v"; each holds all eight tensors
// in ModelParams order.

struct Checkpoint {
  HyperParams hp;
  ModelParams params;
  AdamState adam;
};

namespace detail {

inline std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_hex(const std::string& s, const std::string& src, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError(src, line, "malformed real '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  auto out = io::open_out(path);
  using detail::hex;
  const HyperParams& hp = c.hp;
  out << "anomalydae-checkpoint 1\n";
  out << "hp alpha " << hex(hp.alpha) << '\n';
  out << "hp eta " << hex(hp.eta) << '\n';
  out << "hp theta " << hex(hp.theta) << '\n';
  out << "hp embed_dim " << hp.embed_dim << '\n';
  out << "hp hidden_dim " << hp.hidden() << '\n';
  out << "hp learning_rate " << hex(hp.learning_rate) << '\n';
  out << "hp iterations " << hp.iterations << '\n';
  out << "hp encoder_activation " << hp.encoder_activation.name() << '\n';
  out << "hp encoder_slope " << hex(hp.encoder_activation.slope) << '\n';
  out << "hp attention_activation " << hp.attention_activation.name() << '\n';
  out << "hp attention_slope " << hex(hp.attention_activation.slope) << '\n';
  out << "hp self_attention " << (hp.self_attention ? 1 : 0) << '\n';
  out << "hp normalize_attributes " << (hp.normalize_attributes ? 1 : 0) << '\n';
  out << "hp seed " << hp.seed << '\n';
  out << "adam_t " << c.adam.t << '\n';

  auto dump = [&](const char* group, const ModelParams& p) {
    const auto ts = p.tensors();
    for (std::size_t i = 0; i < ModelParams::count; ++i) {
      const Matrix& m = *ts[i];
      out << "tensor " << group << ' ' << ModelParams::names[i] << ' ' << m.rows() << ' ' << m.cols() << '\n';
      for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t col = 0; col < m.cols(); ++col) out << (col ? " " : "") << hex(m(r, col));
        out << '\n';
      }
    }
  };
  dump("param", c.params);
  dump("adam_m", c.adam.m);
  dump("adam_v", c.adam.v);
  out << "end\n";
  if (!out) throw IoError("write failed: " + path.string());
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
  auto in = io::open_in(path);
  const std::string src = path.string();
  std::size_t lineno = 0;
  std::string line;
  auto next = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw ParseError(src, lineno, "unexpected end of file");
    ++lineno;
    return std::istringstream(line);
  };

  {
    auto s = next();
    std::string magic;
    int version = 0;
    s >> magic >> version;
    if (magic != "anomalydae-checkpoint") throw ParseError(src, lineno, "not a checkpoint file");
    if (version != 1) throw ParseError(src, lineno, "unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint c;
  HyperParams& hp = c.hp;
  std::string encoder_name = "tanh", attention_name = "leaky-relu";
  double encoder_slope = 0.0, attention_slope = 0.2;
  for (;;) {
    auto s = next();
    std::string tag, key, value;
    s >> tag;
    if (tag == "adam_t") {
      s >> c.adam.t;
      if (!s) throw ParseError(src, lineno, "malformed adam_t");
      break;
    }
    if (tag != "hp") throw ParseError(src, lineno, "expected 'hp' or 'adam_t'");
    s >> key >> value;
    auto real = [&] { return detail::parse_hex(value, src, lineno); };
    auto count = [&]() -> std::size_t {
      auto v = io::parse_index(value);
      if (!v) throw ParseError(src, lineno, "malformed count '" + value + "'");
      return static_cast<std::size_t>(*v);
    };
    if (key == "alpha") hp.alpha = real();
    else if (key == "eta") hp.eta = real();
    else if (key == "theta") hp.theta = real();
    else if (key == "embed_dim") hp.embed_dim = count();
    else if (key == "hidden_dim") hp.hidden_dim = count();
    else if (key == "learning_rate") hp.learning_rate = real();
    else if (key == "iterations") hp.iterations = count();
    else if (key == "encoder_activation") encoder_name = value;
    else if (key == "encoder_slope") encoder_slope = real();
    else if (key == "attention_activation") attention_name = value;
    else if (key == "attention_slope") attention_slope = real();
    else if (key == "self_attention") hp.self_attention = count() != 0;
    else if (key == "normalize_attributes") hp.normalize_attributes = count() != 0;
    else if (key == "seed") hp.seed = count();
    else throw ParseError(src, lineno, "unknown hyperparameter '" + key + "'");
  }
  try {
    hp.encoder_activation = Activation::parse(encoder_name);
    hp.encoder_activation.slope = encoder_slope;
    hp.attention_activation = Activation::parse(attention_name);
    hp.attention_activation.slope = attention_slope;
  } catch (const ConfigError& e) {
    throw ParseError(src, lineno, e.what());
  }

  auto load = [&](const char* group, ModelParams& p) {
    auto ts = p.tensors();
    for (std::size_t i = 0; i < ModelParams::count; ++i) {
      auto s = next();
      std::string tag, g, name;
      std::size_t rows = 0, cols = 0;
      s >> tag >> g >> name >> rows >> cols;
      if (!s || tag != "tensor" || g != group || name != ModelParams::names[i]) {
        throw ParseError(src, lineno, "expected tensor " + std::string(group) + " " + std::string(ModelParams::names[i]));
      }
      Matrix m(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        auto row = next();
        std::string tok;
        for (std::size_t col = 0; col < cols; ++col) {
          if (!(row >> tok)) throw ParseError(src, lineno, "short tensor row");
          m(r, col) = detail::parse_hex(tok, src, lineno);
        }
        if (row >> tok) throw ParseError(src, lineno, "long tensor row");
      }
      *ts[i] = std::move(m);
    }
  };
  load("param", c.params);
  load("adam_m", c.adam.m);
  load("adam_v", c.adam.v);
  if (next().str() != "end") throw ParseError(src, lineno, "expected 'end'");
  return c;
}

}  // namespace anomalydae
