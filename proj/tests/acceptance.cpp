// Acceptance suite: runs every acceptance criterion and prints one PASS/FAIL
// line per criterion. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "anomalydae/anomalydae.hpp"
#include "anomalydae/cli.hpp"
#include "support.hpp"

using namespace anomalydae;
using testing_support::random_matrix;
using testing_support::random_network;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ModelParams random_params(std::size_t m, std::size_t n, const HyperParams& hp, std::mt19937_64& rng) {
  std::vector<Matrix> v;
  for (auto [r, c] : ModelParams::shapes(m, n, hp.embed_dim, hp.hidden())) v.push_back(random_matrix(r, c, rng, -0.5, 0.5));
  return ModelParams::from_vector(std::move(v));
}

void gradient_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  std::string where;
  const int networks = 6;
  for (int k = 0; k < networks; ++k) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(8, 16)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(4, 8)(rng);
    HyperParams hp;
    hp.embed_dim = k % 2 ? 8 : 4;
    hp.seed = static_cast<std::uint64_t>(k);
    const auto net = random_network(m, n, 0.3, rng);
    const ModelInputs in = make_inputs(net, hp);
    GradCheckOptions opt;
    opt.seed = static_cast<std::uint64_t>(k);
    const auto r = finite_difference_check(
        [&](Tape& tape, std::span<const Var> v) {
          return record_forward(tape, in, ParamVars::from_span(v), hp).loss.total;
        },
        random_params(m, n, hp, rng).to_vector(), opt);
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      where = fmt("network %d (M=%zu N=%zu D=%zu) at %s[%zu]: analytic %.3g, numeric %.3g", k + 1, m, n, hp.embed_dim,
                  std::string(ModelParams::names[r.worst_block]).c_str(), r.worst_index, r.worst_analytic,
                  r.worst_numeric);
    }
  }
  const double secs = seconds_since(t0);
  report(1, "gradient correctness", worst < 1e-4 && secs < 30.0,
         fmt("max relative error %.3g over %d networks, %.1f s; worst %s", worst, networks, secs, where.c_str()));
}

void decomposition_identity() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t m = 3 + k % 18, n = 2 + k % 7;
    HyperParams hp;
    hp.embed_dim = 2 + 2 * (k % 4);
    hp.alpha = std::uniform_real_distribution<double>(0, 1)(rng);
    const auto net = random_network(m, n, 0.3, rng);
    const Evaluation e = evaluate(make_inputs(net, hp), random_params(m, n, hp, rng), hp);
    const double sum = std::accumulate(e.scores.begin(), e.scores.end(), 0.0);
    worst = std::max(worst, std::abs(sum - e.loss));
  }
  report(2, "score/loss decomposition", worst <= 1e-9, fmt("max |sum S_i - loss| = %.3g over 100 instances", worst));
}

void attention_stochasticity() {
  std::mt19937_64 rng(303);
  double worst_sum = 0.0;
  std::size_t off_mask = 0, graphs = 0;
  for (int k = 0; k < 40; ++k) {
    const std::size_t m = 2 + k % 15, n = 3;
    Matrix x = random_matrix(m, n, rng);
    AttributedNetwork net;
    switch (k % 4) {
      case 0: net = testing_support::star(m, std::move(x)); break;
      case 1: net = testing_support::path(m, std::move(x)); break;
      case 2: net = testing_support::clique(m, std::move(x)); break;
      default: net = random_network(m, n, 0.25, rng); break;
    }
    HyperParams hp;
    hp.embed_dim = 4;
    const Matrix g = attention_weights(make_inputs(net, hp), random_params(m, n, hp, rng), hp);
    for (std::size_t i = 0; i < m; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j && !net.has_edge(i, j) && g(i, j) != 0.0) ++off_mask;
        sum += g(i, j);
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
    ++graphs;
  }
  report(3, "attention stochasticity", worst_sum <= 1e-12 && off_mask == 0,
         fmt("max |row sum - 1| = %.3g, %zu off-neighborhood nonzeros, %zu graphs", worst_sum, off_mask, graphs));
}

void permutation_equivariance() {
  std::mt19937_64 rng(404);
  const std::size_t m = 20, n = 6;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    HyperParams hp;
    hp.embed_dim = 8;
    const auto net = random_network(m, n, 0.2, rng);
    const ModelParams p = random_params(m, n, hp, rng);
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix x(m, n);
    ModelParams pp = p;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) x(perm[i], j) = net.attributes()(i, j);
      for (std::size_t k = 0; k < p.w_a1.cols(); ++k) pp.w_a1(perm[i], k) = p.w_a1(i, k);
    }
    AttributedNetwork permuted(std::move(x));
    for (auto [i, j] : net.edges()) permuted.add_edge(perm[i], perm[j]);
    const Evaluation a = evaluate(make_inputs(net, hp), p, hp);
    const Evaluation b = evaluate(make_inputs(permuted, hp), pp, hp);
    for (std::size_t i = 0; i < m; ++i) {
      worst = std::max(worst, std::abs(a.scores[i] - b.scores[perm[i]]));
      for (std::size_t k = 0; k < hp.embed_dim; ++k) worst = std::max(worst, std::abs(a.z_v(i, k) - b.z_v(perm[i], k)));
      for (std::size_t j = 0; j < m; ++j)
        worst = std::max(worst, std::abs(a.a_hat(i, j) - b.a_hat(perm[i], perm[j])));
      for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(a.x_hat(i, j) - b.x_hat(perm[i], j)));
    }
  }
  report(4, "permutation equivariance", worst < 1e-9, fmt("max abs deviation %.3g at M = 20", worst));
}

// --- synthetic benchmark runs shared by criteria 5, 6, 7 --------------------

struct BenchmarkRun {
  double auc = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  bool finite = true;
  double seconds = 0.0;
};

RunConfig benchmark_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.set("seed", std::to_string(seed));
  cfg.set("embed_dim", "32");
  return cfg;
}

BenchmarkRun run_benchmark(std::uint64_t seed, double alpha) {
  const auto t0 = Clock::now();
  const RunConfig cfg = benchmark_config(seed);
  const AttributedNetwork net = cli::build_benchmark(cfg);
  HyperParams hp = cfg.hyper_params();
  hp.alpha = alpha;
  BenchmarkRun r;
  TrainState s;
  try {
    s = train(net, hp, [&](std::size_t, const LossRecord& l) {
      r.finite = r.finite && std::isfinite(l.total) && std::isfinite(l.structure) && std::isfinite(l.attribute);
    });
  } catch (const NumericError&) {
    r.finite = false;
    return r;
  }
  const Evaluation e = evaluate(make_inputs(net, hp), s.params, hp);
  r.initial_loss = s.history.front().total;
  r.final_loss = e.loss;
  r.finite = r.finite && std::isfinite(e.loss);
  r.auc = auc(e.scores, *net.labels());
  r.seconds = seconds_since(t0);
  return r;
}

constexpr double kAucFloor = 0.75;
const std::vector<std::uint64_t> kSeeds = {0, 1, 2, 3, 4};
const std::vector<double> kAlphas = {0.0, 0.3, 0.5, 0.7, 0.9, 1.0};

void benchmark_criteria() {
  std::map<double, std::vector<BenchmarkRun>> runs;
  for (double alpha : kAlphas)
    for (auto seed : kSeeds) runs[alpha].push_back(run_benchmark(seed, alpha));
  auto mean_auc = [&](double alpha) {
    double s = 0.0;
    for (const auto& r : runs[alpha]) s += r.auc;
    return s / static_cast<double>(runs[alpha].size());
  };

  {
    const auto& rs = runs[0.7];
    double slowest = 0.0;
    std::ostringstream per_seed;
    for (const auto& r : rs) {
      slowest = std::max(slowest, r.seconds);
      per_seed << (per_seed.tellp() ? " " : "") << fmt("%.4f", r.auc);
    }
    const double m = mean_auc(0.7);
    report(5, "end-to-end detection", m >= kAucFloor && slowest < 120.0,
           fmt("mean AUC %.4f (floor %.2f), per seed [%s], slowest run %.1f s", m, kAucFloor, per_seed.str().c_str(),
               slowest));
  }
  {
    double best_interior = -1.0, best_alpha = 0.0;
    for (double a : {0.3, 0.5, 0.7, 0.9}) {
      if (mean_auc(a) > best_interior) {
        best_interior = mean_auc(a);
        best_alpha = a;
      }
    }
    const double lo = mean_auc(0.0), hi = mean_auc(1.0);
    report(6, "alpha-sensitivity shape", lo < best_interior && hi < best_interior,
           fmt("mean AUC alpha=0: %.4f, alpha=1: %.4f, best interior alpha=%.1f: %.4f", lo, hi, best_alpha,
               best_interior));
  }
  {
    bool pass = true;
    double worst_ratio = 0.0;
    for (const auto& r : runs[0.7]) {
      const double ratio = r.final_loss / r.initial_loss;
      worst_ratio = std::max(worst_ratio, r.finite ? ratio : INFINITY);
      pass = pass && r.finite && ratio < 0.5;
    }
    report(7, "training stability", pass, fmt("worst final/initial loss ratio %.4f over %zu seeds", worst_ratio,
                                              runs[0.7].size()));
  }
}

void auc_oracle() {
  std::mt19937_64 rng(808);
  std::size_t cases = 0, mismatches = 0;
  for (std::size_t m = 2; m <= 10; ++m) {
    for (int trial = 0; trial < 150; ++trial) {
      std::vector<double> s(m);
      std::vector<int> y(m);
      const int levels = 1 + trial % 6;
      for (std::size_t i = 0; i < m; ++i) {
        s[i] = static_cast<double>(std::uniform_int_distribution<int>(0, levels)(rng)) * 0.1;
        y[i] = static_cast<int>(rng() % 2);
      }
      if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
      if (std::count(y.begin(), y.end(), 0) == 0) y[m - 1] = 0;
      ++cases;
      if (auc(s, y) != testing_support::brute_force_auc(s, y)) ++mismatches;
    }
  }
  report(8, "AUC oracle equivalence", mismatches == 0 && cases >= 1000,
         fmt("%zu mismatches in %zu cases with M <= 10", mismatches, cases));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void determinism() {
  const auto dir = testing_support::scratch_dir("acceptance_determinism");
  RunConfig cfg = benchmark_config(7);
  cfg.set("out", dir.string());
  cfg.set("threads", "1");
  std::ostringstream sink;
  cli::cmd_generate(cfg, sink);
  cli::cmd_train(cfg, sink);
  const std::string first = slurp(cfg.path("checkpoint"));
  cli::cmd_train(cfg, sink);
  const std::string second = slurp(cfg.path("checkpoint"));
  report(9, "determinism", !first.empty() && first == second,
         fmt("two cmd_train runs, checkpoints of %zu and %zu bytes, %s", first.size(), second.size(),
             first == second ? "identical" : "different"));
}

}  // namespace

int main() {
  gradient_correctness();
  decomposition_identity();
  attention_stochasticity();
  permutation_equivariance();
  benchmark_criteria();
  auc_oracle();
  determinism();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
