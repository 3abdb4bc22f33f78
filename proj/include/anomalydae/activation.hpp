#pragma once

#include <cmath>
#include <cstdlib>
#include <string>
#include <string_view>

#include "anomalydae/errors.hpp"
#include "anomalydae/matrix.hpp"

namespace anomalydae {

/// Elementwise nonlinearity selector. `slope` is only meaningful for leaky relu.
struct Activation {
  enum class Kind { identity, relu, leaky_relu, tanh, sigmoid };

  Kind kind = Kind::relu;
  double slope = 0.2;

  static Activation relu() { return {Kind::relu, 0.0}; }
  static Activation leaky_relu(double slope = 0.2) { return {Kind::leaky_relu, slope}; }
  static Activation tanh() { return {Kind::tanh, 0.0}; }
  static Activation sigmoid() { return {Kind::sigmoid, 0.0}; }
  static Activation identity() { return {Kind::identity, 0.0}; }

  double apply(double x) const {
    switch (kind) {
      case Kind::identity: return x;
      case Kind::relu: return x > 0.0 ? x : 0.0;
      case Kind::leaky_relu: return x > 0.0 ? x : slope * x;
      case Kind::tanh: return std::tanh(x);
      case Kind::sigmoid: return sigmoid_value(x);
    }
    return x;
  }

  /// Derivative at input x, given y = apply(x).
  double derivative(double x, double y) const {
    switch (kind) {
      case Kind::identity: return 1.0;
      case Kind::relu: return x > 0.0 ? 1.0 : 0.0;
      case Kind::leaky_relu: return x > 0.0 ? 1.0 : slope;
      case Kind::tanh: return 1.0 - y * y;
      case Kind::sigmoid: return y * (1.0 - y);
    }
    return 1.0;
  }

  Matrix apply(const Matrix& m) const {
    Matrix out = m;
    for (auto& v : out.values()) v = apply(v);
    return out;
  }

  /// Canonical text form, e.g. "relu" or "leaky-relu:0.2".
  std::string name() const {
    switch (kind) {
      case Kind::identity: return "identity";
      case Kind::relu: return "relu";
      case Kind::leaky_relu: {
        std::string s = std::to_string(slope);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return "leaky-relu:" + s;
      }
      case Kind::tanh: return "tanh";
      case Kind::sigmoid: return "sigmoid";
    }
    return "?";
  }

  static Activation parse(std::string_view text) {
    if (text == "relu") return relu();
    if (text == "tanh") return tanh();
    if (text == "sigmoid") return sigmoid();
    if (text == "identity") return identity();
    if (text == "leaky-relu") return leaky_relu();
    constexpr std::string_view prefix = "leaky-relu:";
    if (text.starts_with(prefix)) {
      std::string num(text.substr(prefix.size()));
      char* end = nullptr;
      const double s = std::strtod(num.c_str(), &end);
      if (num.empty() || end != num.c_str() + num.size() || !std::isfinite(s)) {
        throw ConfigError("bad leaky-relu slope '" + num + "'");
      }
      return leaky_relu(s);
    }
    throw ConfigError("unknown activation '" + std::string(text) + "'");
  }

  static double sigmoid_value(double x) {
    // Branches keep exp() from overflowing for large |x|.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  }

  friend bool operator==(const Activation&, const Activation&) = default;
};

}  // namespace anomalydae
