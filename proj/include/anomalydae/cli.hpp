#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "anomalydae/checkpoint.hpp"
#include "anomalydae/config.hpp"
#include "anomalydae/errors.hpp"
#include "anomalydae/evaluation.hpp"
#include "anomalydae/io.hpp"
#include "anomalydae/model.hpp"
#include "anomalydae/network.hpp"
#include "anomalydae/synthetic.hpp"
#include "anomalydae/training.hpp"

namespace anomalydae::cli {

enum ExitCode : int { ok = 0, usage = 1, validation = 2, numeric = 3 };

inline int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::numeric_failure ? numeric : validation;
}

inline AttributedNetwork load_dataset(const RunConfig& cfg, bool with_labels) {
  std::optional<std::filesystem::path> labels;
  if (with_labels) labels = cfg.path("labels");
  return load_network(cfg.path("edges"), cfg.path("attributes"), labels);
}

/// Synthetic graph plus clique and attribute-swap anomalies.
inline AttributedNetwork build_benchmark(const RunConfig& cfg) {
  const auto inj = cfg.injection();
  AttributedNetwork net = generate_synthetic(cfg.synthetic());
  net = inject_structural_anomalies(std::move(net), inj);
  return inject_attribute_anomalies(std::move(net), cfg.count("attribute_anomalies"), inj);
}

inline void cmd_generate(const RunConfig& cfg, std::ostream& out) {
  const AttributedNetwork net = build_benchmark(cfg);
  write_network(net, cfg.path("edges"), cfg.path("attributes"), cfg.path("labels"));
  cfg.write_file(cfg.path("out") / "resolved_generate.conf");
  std::size_t anomalies = 0;
  for (int l : *net.labels()) anomalies += static_cast<std::size_t>(l);
  out << "generated " << net.node_count() << " nodes, " << net.edge_count() << " edges, " << net.attribute_dim()
      << " attributes, " << anomalies << " anomalies\n";
}

inline void write_history(const TrainHistory& history, std::size_t first_iteration, const std::filesystem::path& path) {
  auto f = io::open_out(path);
  f << "iteration,total,structure,attribute\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& r = history[i];
    f << first_iteration + i << ',' << io::format_real(r.total) << ',' << io::format_real(r.structure) << ','
      << io::format_real(r.attribute) << '\n';
  }
  if (!f) throw IoError("write failed: " + path.string());
}

inline void cmd_train(const RunConfig& cfg, std::ostream& out) {
  const HyperParams hp = cfg.hyper_params();
  hp.validate();
  const AttributedNetwork net = load_dataset(cfg, false);
  const ModelInputs in = make_inputs(net, hp);

  TrainState state;
  if (const auto& resume = cfg.get("resume"); !resume.empty()) {
    Checkpoint c = read_checkpoint(cfg.path("resume"));
    state.params = std::move(c.params);
    state.adam = std::move(c.adam);
  } else {
    state = initial_state(in, hp);
  }
  const std::size_t first = state.adam.t;
  continue_training(in, hp, state, hp.iterations);

  write_checkpoint({hp, state.params, state.adam}, cfg.path("checkpoint"));
  write_history(state.history, first, cfg.path("history"));
  cfg.write_file(cfg.path("out") / "resolved_train.conf");
  out << "trained " << state.history.size() << " iterations (adam step " << state.adam.t << ")";
  if (!state.history.empty()) {
    out << ", loss " << io::format_real(state.history.front().total) << " -> "
        << io::format_real(state.history.back().total);
  }
  out << '\n';
}

inline void cmd_score(const RunConfig& cfg, std::ostream& out) {
  const Checkpoint c = read_checkpoint(cfg.path("checkpoint"));
  const AttributedNetwork net = load_dataset(cfg, false);
  const ModelInputs in = make_inputs(net, c.hp);
  c.params.check_shapes(in.node_count(), in.attribute_dim(), c.hp.embed_dim, c.hp.hidden());
  const Evaluation e = evaluate(in, c.params, c.hp);
  if (!std::all_of(e.scores.begin(), e.scores.end(), [](double s) { return std::isfinite(s); })) {
    throw NumericError("non-finite anomaly score");
  }
  write_scores(e.scores, cfg.path("scores"));
  out << "scored " << e.scores.size() << " nodes, loss " << io::format_real(e.loss) << '\n';
  if (const auto k = cfg.count("top_k"); k > 0) {
    const ScoreReport r = make_score_report(e.scores, TopKRule{k});
    write_labels(r.labels, cfg.path("predictions"));
    std::size_t flagged = 0;
    for (int l : r.labels) flagged += static_cast<std::size_t>(l);
    out << "threshold " << io::format_real(r.threshold) << ", " << flagged << " nodes flagged\n";
  }
  cfg.write_file(cfg.path("out") / "resolved_score.conf");
}

inline std::vector<std::size_t> precision_ks(const RunConfig& cfg) {
  std::vector<std::size_t> ks;
  for (double v : cfg.real_list("precision_k")) {
    if (v < 1 || v != std::floor(v)) throw ConfigError("precision_k entries must be positive integers");
    ks.push_back(static_cast<std::size_t>(v));
  }
  return ks;
}

inline void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const auto scores = read_scores(cfg.path("scores"));
  const auto labels = read_labels(cfg.path("labels"));
  const EvalReport r = evaluate_scores(scores, labels, precision_ks(cfg));
  write_report_lines(r, out);

  auto summary = io::open_out(cfg.path("report"));
  summary << report_json(r).dump(2) << '\n';
  auto roc = io::open_out(cfg.path("roc"));
  roc << "fpr,tpr,threshold\n";
  for (const auto& p : roc_curve(scores, labels)) {
    roc << io::format_real(p.false_positive_rate) << ',' << io::format_real(p.true_positive_rate) << ','
        << io::format_real(p.threshold) << '\n';
  }
}

struct SweepPoint {
  double value = 0.0;
  double auc = 0.0;
  double final_loss = 0.0;
};

/// Retrains once per sweep value with the configured seed. Points may run on
/// worker threads; results keep the order of `values`.
inline std::vector<SweepPoint> run_sweep(const AttributedNetwork& net, const HyperParams& base, const std::string& axis,
                                         const std::vector<double>& values, std::size_t threads) {
  if (!net.labels()) throw ConfigError("sweep needs ground-truth labels");
  std::vector<HyperParams> configs;
  for (double v : values) {
    HyperParams hp = base;
    if (axis == "alpha") {
      hp.alpha = v;
    } else if (axis == "embed_dim") {
      if (v < 2 || v != std::floor(v)) throw ConfigError("embed_dim sweep values must be integers >= 2");
      hp.embed_dim = static_cast<std::size_t>(v);
    } else {
      throw ConfigError("unknown sweep axis '" + axis + "'");
    }
    hp.validate();
    configs.push_back(hp);
  }

  std::vector<SweepPoint> points(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  auto run_one = [&](std::size_t i) {
    try {
      const ModelInputs in = make_inputs(net, configs[i]);
      TrainState s = initial_state(in, configs[i]);
      continue_training(in, configs[i], s, configs[i].iterations);
      const Evaluation e = evaluate(in, s.params, configs[i]);
      points[i] = {values[i], auc(e.scores, *net.labels()), e.loss};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, values.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < values.size(); ++i) run_one(i);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next == values.size()) return;
            i = next++;
          }
          run_one(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return points;
}

inline void cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const auto axis = cfg.get("sweep_axis");
  const auto values = cfg.real_list("sweep_values");
  if (values.empty()) throw ConfigError("sweep_values is empty");
  const AttributedNetwork net = load_dataset(cfg, true);
  const auto points = run_sweep(net, cfg.hyper_params(), axis, values, cfg.count("threads"));

  auto f = io::open_out(cfg.path("sweep_output"));
  f << axis << ",auc,final_loss\n";
  out << axis << "\tauc\n";
  for (const auto& p : points) {
    f << io::format_real(p.value) << ',' << io::format_real(p.auc) << ',' << io::format_real(p.final_loss) << '\n';
    out << io::format_real(p.value) << '\t' << io::format_real(p.auc) << '\n';
  }
  cfg.write_file(cfg.path("out") / "resolved_sweep.conf");
}

/// Entry point shared by the executable and the tests. Returns the process
/// exit code: 0 success, 1 usage, 2 validation, 3 numeric failure.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"AnomalyDAE: dual-autoencoder anomaly detection on attributed networks", "anomalydae"};
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::vector<std::string> sets;
    std::optional<std::string> checkpoint, scores, labels, axis, values;
  } opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Flat key = value config file");
    sub->add_option("--seed", opt.seed, "Overrides the 'seed' key");
    sub->add_option("--out", opt.out_dir, "Output directory; relative paths resolve against it");
    sub->add_option("--set", opt.sets, "Config override key=value (repeatable)");
  };
  auto* gen = app.add_subcommand("generate", "Write a synthetic benchmark with injected anomalies");
  auto* trn = app.add_subcommand("train", "Train on a dataset and write a checkpoint and loss history");
  auto* scr = app.add_subcommand("score", "Score every node with a trained checkpoint");
  auto* evl = app.add_subcommand("eval", "Evaluate a score file against ground-truth labels");
  auto* swp = app.add_subcommand("sweep", "Retrain over a range of alpha or embed_dim values and report AUC");
  for (auto* sub : {gen, trn, scr, evl, swp}) common(sub);
  scr->add_option("--checkpoint", opt.checkpoint, "Checkpoint to score with");
  evl->add_option("--scores", opt.scores, "Score file (node_id,score)");
  evl->add_option("--labels", opt.labels, "Label file (one 0/1 per line)");
  swp->add_option("--axis", opt.axis, "alpha or embed_dim");
  swp->add_option("--values", opt.values, "Comma-separated sweep values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    RunConfig cfg;
    if (!opt.config.empty()) cfg.load_file(opt.config);
    for (const auto& s : opt.sets) cfg.set_assignment(s);
    if (opt.seed) cfg.set("seed", std::to_string(*opt.seed));
    if (opt.out_dir) cfg.set("out", *opt.out_dir);
    if (opt.checkpoint) cfg.set("checkpoint", *opt.checkpoint);
    if (opt.scores) cfg.set("scores", *opt.scores);
    if (opt.labels) cfg.set("labels", *opt.labels);
    if (opt.axis) cfg.set("sweep_axis", *opt.axis);
    if (opt.values) cfg.set("sweep_values", *opt.values);
    cfg.validate();

    if (*gen) cmd_generate(cfg, out);
    else if (*trn) cmd_train(cfg, out);
    else if (*scr) cmd_score(cfg, out);
    else if (*evl) cmd_eval(cfg, out);
    else if (*swp) cmd_sweep(cfg, out);
    return ok;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return validation;
  }
}

}  // namespace anomalydae::cli
