#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "anomalydae/activation.hpp"
#include "anomalydae/errors.hpp"
#include "anomalydae/io.hpp"
#include "anomalydae/model.hpp"
#include "anomalydae/synthetic.hpp"

namespace anomalydae {

/// Flat key-value run configuration shared by every CLI command.
///
/// File syntax is one `key = value` per line; '#' starts a comment. Unknown
/// keys are rejected. Relative paths resolve against `out`.
class RunConfig {
 public:
  RunConfig() {
    for (const auto& [key, value] : defaults()) values_[key] = value;
  }

  static const std::vector<std::pair<std::string, std::string>>& defaults() {
    static const std::vector<std::pair<std::string, std::string>> d = {
        // synthetic data
        {"modules", "5"},
        {"nodes_per_module", "60"},
        {"p_in", "0.8"},
        {"p_out", "0.02"},
        {"attr_dim", "32"},
        {"mean_spread", "1"},
        {"data_seed", "auto"},
        // anomaly injection
        {"clique_count", "5"},
        {"clique_size", "6"},
        {"candidate_pool", "50"},
        {"attribute_anomalies", "30"},
        {"injection_seed", "auto"},
        // model and training
        {"alpha", "0.7"},
        {"eta", "5"},
        {"theta", "40"},
        {"embed_dim", "128"},
        {"hidden_dim", "0"},
        {"learning_rate", "0.001"},
        {"iterations", "100"},
        {"encoder_activation", "tanh"},
        {"attention_activation", "leaky-relu:0.2"},
        {"self_attention", "true"},
        {"normalize_attributes", "false"},
        {"seed", "0"},
        // scoring, evaluation, sweeps
        {"top_k", "0"},
        {"precision_k", ""},
        {"sweep_axis", "alpha"},
        {"sweep_values", "0,0.1,0.3,0.5,0.7,0.9,1"},
        {"threads", "0"},
        // paths
        {"out", "."},
        {"edges", "edges.tsv"},
        {"attributes", "attributes.csv"},
        {"labels", "labels.txt"},
        {"checkpoint", "checkpoint.txt"},
        {"resume", ""},
        {"history", "history.csv"},
        {"scores", "scores.csv"},
        {"predictions", "predictions.txt"},
        {"report", "eval.json"},
        {"roc", "roc.csv"},
        {"sweep_output", "sweep.csv"},
    };
    return d;
  }

  static bool known(std::string_view key) {
    for (const auto& [k, v] : defaults())
      if (k == key) return true;
    return false;
  }

  void set(const std::string& key, const std::string& value) {
    if (!known(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
  }

  /// Applies a "key=value" override.
  void set_assignment(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
    set(std::string(io::trim(assignment.substr(0, eq))), std::string(io::trim(assignment.substr(eq + 1))));
  }

  void load_file(const std::filesystem::path& path) {
    auto in = io::open_in(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view t = io::trim(line);
      if (t.empty() || t.front() == '#') continue;
      try {
        set_assignment(t);
      } catch (const ConfigError& e) {
        throw ParseError(path.string(), lineno, e.what());
      }
    }
  }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const {
    auto v = io::parse_real(get(key));
    if (!v) throw ConfigError("config key '" + key + "' expects a real number, got '" + get(key) + "'");
    return *v;
  }

  std::uint64_t count(const std::string& key) const {
    auto v = io::parse_index(io::trim(get(key)));
    if (!v) throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + get(key) + "'");
    return *v;
  }

  bool flag(const std::string& key) const {
    const auto& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "' expects true/false, got '" + v + "'");
  }

  std::vector<double> real_list(const std::string& key) const {
    std::vector<double> out;
    if (io::trim(get(key)).empty()) return out;
    for (auto cell : io::split(get(key), ',')) {
      auto v = io::parse_real(cell);
      if (!v) throw ConfigError("config key '" + key + "' has malformed entry '" + std::string(cell) + "'");
      out.push_back(*v);
    }
    return out;
  }

  std::filesystem::path path(const std::string& key) const {
    std::filesystem::path p = get(key);
    if (p.is_absolute() || key == "out") return p;
    return std::filesystem::path(get("out")) / p;
  }

  std::uint64_t seed() const { return count("seed"); }

  std::uint64_t derived_seed(const std::string& key, std::uint64_t offset) const {
    return get(key) == "auto" ? seed() + offset : count(key);
  }

  SyntheticSpec synthetic() const {
    SyntheticSpec s;
    s.module_count = count("modules");
    s.nodes_per_module = count("nodes_per_module");
    s.p_in = real("p_in");
    s.p_out = real("p_out");
    s.attr_dim = count("attr_dim");
    s.mean_spread = real("mean_spread");
    s.seed = derived_seed("data_seed", 0);
    return s;
  }

  InjectionSpec injection() const {
    InjectionSpec s;
    s.clique_count = count("clique_count");
    s.clique_size = count("clique_size");
    s.candidate_pool = count("candidate_pool");
    s.seed = derived_seed("injection_seed", 1);
    return s;
  }

  HyperParams hyper_params() const {
    HyperParams hp;
    hp.alpha = real("alpha");
    hp.eta = real("eta");
    hp.theta = real("theta");
    hp.embed_dim = count("embed_dim");
    hp.hidden_dim = count("hidden_dim");
    hp.learning_rate = real("learning_rate");
    hp.iterations = count("iterations");
    hp.encoder_activation = Activation::parse(get("encoder_activation"));
    hp.attention_activation = Activation::parse(get("attention_activation"));
    hp.self_attention = flag("self_attention");
    hp.normalize_attributes = flag("normalize_attributes");
    hp.seed = seed();
    return hp;
  }

  /// Parses every typed key so that errors surface before any work starts.
  void validate() const {
    synthetic();
    const auto inj = injection();
    if (inj.clique_size < 2) throw ConfigError("clique_size must be >= 2");
    if (inj.candidate_pool < 1) throw ConfigError("candidate_pool must be >= 1");
    count("attribute_anomalies");
    hyper_params().validate();
    count("top_k");
    real_list("precision_k");
    real_list("sweep_values");
    count("threads");
    const auto& axis = get("sweep_axis");
    if (axis != "alpha" && axis != "embed_dim") throw ConfigError("sweep_axis must be 'alpha' or 'embed_dim'");
  }

  /// Resolved configuration: every key, in declaration order.
  std::string to_string() const {
    std::ostringstream os;
    for (const auto& [key, unused] : defaults()) {
      std::string v = values_.at(key);
      if (key == "data_seed" && v == "auto") v = std::to_string(derived_seed(key, 0));
      if (key == "injection_seed" && v == "auto") v = std::to_string(derived_seed(key, 1));
      os << key << " = " << v << '\n';
    }
    return os.str();
  }

  void write_file(const std::filesystem::path& path) const {
    auto out = io::open_out(path);
    out << to_string();
    if (!out) throw IoError("write failed: " + path.string());
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace anomalydae
