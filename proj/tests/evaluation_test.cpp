#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "anomalydae/evaluation.hpp"
#include "support.hpp"

using namespace anomalydae;
using testing_support::brute_force_auc;

TEST(Auc, PerfectRanking) { EXPECT_EQ(auc({0.1, 0.9, 0.2, 0.8}, {0, 1, 0, 1}), 1.0); }

TEST(Auc, AllTied) { EXPECT_EQ(auc({3, 3, 3, 3, 3}, {0, 1, 0, 1, 1}), 0.5); }

TEST(Auc, HandExample) { EXPECT_DOUBLE_EQ(auc({1, 2, 3, 4}, {0, 0, 1, 0}), 2.0 / 3.0); }

TEST(Auc, UndefinedForSingleClass) {
  EXPECT_THROW(auc({1, 2}, {0, 0}), UndefinedMetricError);
  EXPECT_THROW(auc({1, 2}, {1, 1}), UndefinedMetricError);
  EXPECT_THROW(auc({1, 2}, {0, 1, 1}), ShapeError);
}

TEST(Auc, MatchesBruteForceOnRandomTies) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 30;
    std::uniform_int_distribution<int> level(0, 4);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = level(rng);
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_DOUBLE_EQ(auc(s, y), brute_force_auc(s, y));
  }
}

TEST(Auc, InvariantUnderMonotoneTransformAndComplementsUnderNegation) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + trial % 20;
    std::vector<double> s(n), t(n), neg(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(normal(rng) * 3) / 3;
      t[i] = std::exp(2 * s[i]) + 5;
      neg[i] = -s[i];
      y[i] = i % 3 == 0;
    }
    EXPECT_EQ(auc(s, y), auc(t, y));
    EXPECT_NEAR(auc(s, y) + auc(neg, y), 1.0, 1e-15);
  }
}

TEST(PrecisionAtK, Examples) {
  EXPECT_EQ(precision_at_k({5, 4, 3}, {0, 1, 1}, 2), 0.5);
  EXPECT_DOUBLE_EQ(precision_at_k({5, 4, 3, 1}, {0, 1, 1, 0}, 4), 0.5);
  EXPECT_EQ(precision_at_k({0.1, 0.9, 0.8}, {0, 1, 1}, 2), 1.0);
  EXPECT_THROW(precision_at_k({1, 2}, {0, 1}, 0), ConfigError);
  EXPECT_THROW(precision_at_k({1, 2}, {0, 1}, 3), ConfigError);
}

TEST(PrecisionAtK, TiesGoToLowerIndex) {
  EXPECT_EQ(precision_at_k({1, 1, 1}, {1, 0, 0}, 1), 1.0);
  EXPECT_EQ(precision_at_k({1, 1, 1}, {0, 1, 0}, 1), 0.0);
}

TEST(Roc, CurveEndpointsAndMonotonicity) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8, 0.4};
  const std::vector<int> y{0, 0, 1, 1, 1};
  const auto pts = roc_curve(s, y);
  ASSERT_GE(pts.size(), 2u);
  EXPECT_EQ(pts.front().false_positive_rate, 0.0);
  EXPECT_EQ(pts.front().true_positive_rate, 0.0);
  EXPECT_EQ(pts.back().false_positive_rate, 1.0);
  EXPECT_EQ(pts.back().true_positive_rate, 1.0);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GE(pts[i].false_positive_rate, pts[i - 1].false_positive_rate);
    EXPECT_GE(pts[i].true_positive_rate, pts[i - 1].true_positive_rate);
    area += (pts[i].false_positive_rate - pts[i - 1].false_positive_rate) *
            (pts[i].true_positive_rate + pts[i - 1].true_positive_rate) / 2;
  }
  EXPECT_NEAR(area, auc(s, y), 1e-12);
}

TEST(Report, CountsAndPrecisionEntries) {
  const EvalReport r = evaluate_scores({0.9, 0.1, 0.8, 0.3}, {1, 0, 1, 0}, {1, 3, 10});
  EXPECT_EQ(r.auc, 1.0);
  EXPECT_EQ(r.positives + r.negatives, 4u);
  EXPECT_EQ(r.positives, 2u);
  EXPECT_EQ(r.precision_at_k.size(), 3u);
  EXPECT_EQ(r.precision_at_k.at(2), 1.0);
  EXPECT_DOUBLE_EQ(r.precision_at_k.at(3), 2.0 / 3.0);

  std::ostringstream lines;
  write_report_lines(r, lines);
  EXPECT_EQ(lines.str(), "auc\t1\nprecision@1\t1\nprecision@2\t1\nprecision@3\t0.6666666666666666\npositives\t2\nnegatives\t2\n");
  const auto j = report_json(r);
  EXPECT_EQ(j["auc"], 1.0);
  EXPECT_EQ(j["precision_at_k"]["2"], 1.0);
  EXPECT_EQ(j["negatives"], 2);
}

TEST(ScoreFile, RoundTripsAndValidatesIds) {
  const auto dir = testing_support::scratch_dir("scores");
  const std::vector<double> s{0.1 + 0.2, -3.5, 1e-310, 12345.678};
  write_scores(s, dir / "s.csv");
  EXPECT_EQ(read_scores(dir / "s.csv"), s);
  std::ofstream(dir / "bad.csv") << "node_id,score\n0,1\n2,3\n";
  EXPECT_THROW(read_scores(dir / "bad.csv"), ParseError);
  std::ofstream(dir / "bad2.csv") << "node_id,score\n0,abc\n";
  EXPECT_THROW(read_scores(dir / "bad2.csv"), ParseError);
}
