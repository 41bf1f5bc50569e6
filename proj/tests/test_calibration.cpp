#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "rankcal/calibration.hpp"
#include "rankcal/errors.hpp"
#include "support.hpp"

using namespace rankcal;

namespace {

const std::vector<double> kConf = {0.6, 0.7, 0.9, 0.95};
const bool kCorrect[] = {false, true, true, true};

// Pair enumeration: (a, b) is the top-2 set when both outrank every other
// class under the order (higher probability, then lower index).
bool brute_force_top2(const std::vector<double>& p, std::size_t c1, std::size_t c2) {
  auto outranks = [&](std::size_t x, std::size_t y) { return p[x] > p[y] || (p[x] == p[y] && x < y); };
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = 0; b < p.size(); ++b) {
      if (a == b) continue;
      bool top = true;
      for (std::size_t k = 0; k < p.size() && top; ++k) {
        if (k == a || k == b) continue;
        top = outranks(a, k) && outranks(b, k);
      }
      if (top) return (a == c1 && b == c2) || (a == c2 && b == c1);
    }
  return false;
}

std::vector<PredictionRow> golden_rows() {
  // Top-1 confidences 0.6, 0.7, 0.9, 0.95; the first row is wrong.
  return {{"a", 1, {0.6, 0.4}}, {"b", 0, {0.7, 0.3}}, {"c", 1, {0.1, 0.9}}, {"d", 0, {0.95, 0.05}}};
}

}  // namespace

TEST(EqualWidth, BoundaryConvention) {
  EXPECT_EQ(equal_width_bin(0.5, 2), 0u);
  EXPECT_EQ(equal_width_bin(0.0, 2), 0u);
  EXPECT_EQ(equal_width_bin(1.0, 2), 1u);
  EXPECT_EQ(equal_width_bin(0.500001, 2), 1u);
  // Every m/M lands in bin m (1-based), i.e. index m - 1.
  for (std::size_t bins : {3u, 7u, 10u, 15u})
    for (std::size_t m = 1; m <= bins; ++m)
      EXPECT_EQ(equal_width_bin(static_cast<double>(m) / static_cast<double>(bins), bins), m - 1);
}

TEST(EqualWidth, GoldenFourSamples) {
  const auto bins = bin_equal_width(kConf, kCorrect, 2);
  EXPECT_EQ(bins[0].count, 0u);
  EXPECT_EQ(bins[1].count, 4u);
  EXPECT_DOUBLE_EQ(bins[1].acc, 0.75);
  EXPECT_NEAR(bins[1].conf, 0.7875, 1e-15);
  EXPECT_NEAR(ece(bins, 4), 0.0375, 1e-9);
  EXPECT_NEAR(mce(bins), 0.0375, 1e-9);
}

TEST(EqualWidth, SingleBinIsOverallAverage) {
  Rng rng(1);
  std::vector<double> conf(50);
  std::unique_ptr<bool[]> correct(new bool[50]);
  double cs = 0.0, as = 0.0;
  for (int i = 0; i < 50; ++i) {
    conf[i] = rng.uniform01();
    correct[i] = rng.uniform01() < 0.5;
    cs += conf[i];
    as += correct[i];
  }
  const auto bins = bin_equal_width(conf, std::span<const bool>(correct.get(), 50), 1);
  EXPECT_NEAR(bins[0].conf, cs / 50, 1e-12);
  EXPECT_NEAR(bins[0].acc, as / 50, 1e-12);
}

TEST(EqualMass, GoldenFourSamples) {
  const auto bins = bin_equal_mass(kConf, kCorrect, 2);
  EXPECT_DOUBLE_EQ(bins[0].acc, 0.5);
  EXPECT_NEAR(bins[0].conf, 0.65, 1e-15);
  EXPECT_DOUBLE_EQ(bins[1].acc, 1.0);
  EXPECT_NEAR(bins[1].conf, 0.925, 1e-15);
  EXPECT_NEAR(aece(kConf, kCorrect, 2), 0.1125, 1e-9);
}

TEST(EqualMass, RemainderGoesToEarlierGroups) {
  const std::vector<double> conf = {0.1, 0.2, 0.3, 0.4, 0.5};
  const bool correct[] = {true, true, true, true, true};
  const auto bins = bin_equal_mass(conf, correct, 2);
  EXPECT_EQ(bins[0].count, 3u);
  EXPECT_EQ(bins[1].count, 2u);
}

TEST(EqualMass, MoreBinsThanSamplesLeavesTrailingBinsEmpty) {
  const auto bins = bin_equal_mass(kConf, kCorrect, 6);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(bins[k].count, k < 4 ? 1u : 0u);
  EXPECT_DOUBLE_EQ(bins[3].conf, 0.95);
  // Singleton groups: each sample is its own bin.
  EXPECT_NEAR(ece(bins, 4), (0.6 + 0.3 + 0.1 + 0.05) / 4.0, 1e-12);
}

TEST(EqualMass, EqualConfidencesGiveEqualGroupConfidence) {
  const std::vector<double> conf(9, 0.7);
  const bool correct[] = {true, false, true, true, false, true, false, true, true};
  for (const auto& b : bin_equal_mass(conf, correct, 3)) EXPECT_DOUBLE_EQ(b.conf, 0.7);
}

TEST(EqualMass, GroupsPartitionSortedOrder) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(60);
    const std::size_t m = 1 + rng.uniform_index(n);
    std::vector<double> conf(n);
    std::unique_ptr<bool[]> correct(new bool[n]);
    for (std::size_t i = 0; i < n; ++i) {
      conf[i] = static_cast<double>(rng.uniform_index(10)) / 10.0;
      correct[i] = rng.uniform01() < 0.5;
    }
    const auto bins = bin_equal_mass(conf, std::span<const bool>(correct.get(), n), m);
    std::size_t total = 0;
    for (std::size_t k = 0; k < m; ++k) {
      total += bins[k].count;
      EXPECT_TRUE(bins[k].count == n / m || bins[k].count == n / m + 1);
      if (k > 0) {
        EXPECT_GE(bins[k - 1].count, bins[k].count);
        EXPECT_LE(bins[k - 1].hi, bins[k].lo);
      }
    }
    EXPECT_EQ(total, n);
  }
}

TEST(Metrics, CalibratedAndExtremeCases) {
  std::vector<BinStats> calibrated(3);
  calibrated[0] = {0, 0.0, 0.3, 2, 0.2, 0.2};
  calibrated[1] = {1, 0.3, 0.6, 3, 0.5, 0.5};
  EXPECT_EQ(ece(calibrated, 5), 0.0);
  EXPECT_EQ(mce(calibrated), 0.0);
  std::vector<BinStats> one = {{0, 0.0, 1.0, 4, 1.0, 0.5}};
  EXPECT_DOUBLE_EQ(ece(one, 4), 0.5);
  std::vector<BinStats> gaps = {{0, 0, 0, 1, 0.05, 0.0}, {1, 0, 0, 1, 0.30, 0.0}, {2, 0, 0, 1, 0.10, 0.0}};
  EXPECT_DOUBLE_EQ(mce(gaps), 0.30);
  const std::vector<double> ones(8, 1.0);
  const bool all[] = {true, true, true, true, true, true, true, true};
  EXPECT_EQ(aece(ones, all, 4), 0.0);
}

TEST(Metrics, EceMatchesDirectSumOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(200), m = 1 + rng.uniform_index(20);
    std::vector<double> conf(n);
    std::unique_ptr<bool[]> correct(new bool[n]);
    for (std::size_t i = 0; i < n; ++i) {
      conf[i] = rng.uniform01();
      correct[i] = rng.uniform01() < conf[i];
    }
    // Bin membership by the literal interval test.
    double expected = 0.0;
    for (std::size_t b = 1; b <= m; ++b) {
      const double lo = static_cast<double>(b - 1) / static_cast<double>(m), hi = static_cast<double>(b) / static_cast<double>(m);
      double cs = 0.0, as = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool in = (conf[i] > lo && conf[i] <= hi) || (b == 1 && conf[i] == 0.0);
        if (!in) continue;
        ++count;
        cs += conf[i];
        as += correct[i];
      }
      if (count) expected += static_cast<double>(count) / static_cast<double>(n) * std::abs(as / count - cs / count);
    }
    const auto bins = bin_equal_width(conf, std::span<const bool>(correct.get(), n), m);
    EXPECT_NEAR(ece(bins, n), expected, 1e-12);
  }
}

TEST(Metrics, BernoulliCalibratedStreamHasSmallEce) {
  Rng rng(2024);
  const std::size_t n = 10000;
  std::vector<double> conf(n);
  std::unique_ptr<bool[]> correct(new bool[n]);
  for (std::size_t i = 0; i < n; ++i) {
    conf[i] = rng.uniform01();
    correct[i] = rng.uniform01() < conf[i];
  }
  const std::span<const bool> c(correct.get(), n);
  EXPECT_LT(ece(bin_equal_width(conf, c, 15), n), 0.03);
  EXPECT_LT(aece(conf, c, 15), 0.03);
}

TEST(Metrics, BoundedAndMceDominatesEce) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(100), m = 1 + rng.uniform_index(15);
    std::vector<double> conf(n);
    std::unique_ptr<bool[]> correct(new bool[n]);
    for (std::size_t i = 0; i < n; ++i) {
      conf[i] = rng.uniform01();
      correct[i] = rng.uniform01() < 0.5;
    }
    const auto bins = bin_equal_width(conf, std::span<const bool>(correct.get(), n), m);
    const double e = ece(bins, n), worst = mce(bins);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);
    EXPECT_LE(e, worst + 1e-15);
  }
}

TEST(Metrics, Rejections) {
  EXPECT_THROW(bin_equal_width(kConf, kCorrect, 0), InvalidInput);
  const std::vector<double> bad = {1.5};
  const bool one[] = {true};
  EXPECT_THROW(bin_equal_width(bad, one, 2), InvalidInput);
  EXPECT_THROW(parse_binning("quantile"), InvalidInput);
}

TEST(Accuracy, Examples) {
  EXPECT_DOUBLE_EQ(accuracy(golden_rows()), 0.75);
  std::vector<PredictionRow> half = {{"a", 0, {1, 0}}, {"b", 1, {0, 1}}, {"c", 0, {0, 1}}, {"d", 1, {1, 0}}};
  EXPECT_DOUBLE_EQ(accuracy(half), 0.5);
  half[2].label = 1;
  half[3].label = 0;
  EXPECT_DOUBLE_EQ(accuracy(half), 1.0);
}

TEST(Report, GoldenScalarsAndCsvRoundTrip) {
  const auto report = reliability_report(golden_rows(), 2, BinningMode::equal_width);
  EXPECT_NEAR(report.ece, 0.0375, 1e-9);
  EXPECT_NEAR(report.mce, 0.0375, 1e-9);
  EXPECT_NEAR(report.aece, 0.1125, 1e-9);
  EXPECT_DOUBLE_EQ(report.acc, 0.75);
  EXPECT_EQ(summary_line(report), "acc=0.7500 ece=0.0375 aece=0.1125 mce=0.0375");
  const auto parsed = parse_reliability_csv(format_reliability_csv(report));
  ASSERT_EQ(parsed.table.size(), 2u);
  EXPECT_EQ(parsed.table[1].count, 4u);
  EXPECT_NEAR(parsed.ece, 0.0375, 1e-12);
  EXPECT_NEAR(parsed.aece, 0.1125, 1e-12);
  const auto mass = reliability_report(golden_rows(), 2, BinningMode::equal_mass);
  EXPECT_NEAR(mass.binned_ece, 0.1125, 1e-9);
  EXPECT_NEAR(mass.mce, 0.15, 1e-9);
}

TEST(Top2, Examples) {
  EXPECT_TRUE(top2_match(std::vector<double>{0.0, 0.5, 0.5, 0.0}, {1, 2}));
  EXPECT_TRUE(top2_match(std::vector<double>{0.0, 0.5, 0.5, 0.0}, {2, 1}));
  // One-hot on class 2: the runner-up tie resolves to class 0.
  EXPECT_FALSE(top2_match(std::vector<double>{0.0, 0.0, 1.0, 0.0}, {2, 3}));
  EXPECT_TRUE(top2_match(std::vector<double>{0.0, 0.0, 1.0, 0.0}, {2, 0}));
}

TEST(Top2, MatchesPairEnumerationOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(7);
    std::vector<double> p(k);
    if (trial % 2) {
      p = support::random_simplex(rng, k);
    } else {
      for (double& v : p) v = static_cast<double>(rng.uniform_index(4));
    }
    const std::size_t c1 = rng.uniform_index(k);
    const std::size_t c2 = (c1 + 1 + rng.uniform_index(k - 1)) % k;
    ASSERT_EQ(top2_match(p, {c1, c2}), brute_force_top2(p, c1, c2));
  }
}

TEST(CompoundEval, OracleFixtureScoresOne) {
  std::vector<PredictionRow> rows;
  std::vector<ClassPair> pairs = {{1, 2}, {3, 6}, {1, 2}, {4, 5}};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::vector<double> p(7, 0.0);
    p[pairs[i].first] = 0.5;
    p[pairs[i].second] = 0.5;
    rows.push_back({"r" + std::to_string(i), std::nullopt, p});
  }
  const auto result = compound_top2_eval(rows, pairs);
  EXPECT_EQ(result.overall_match_rate, 1.0);
  ASSERT_EQ(result.classes.size(), 3u);
  EXPECT_EQ(result.classes[0].count, 2u);
  EXPECT_DOUBLE_EQ(result.classes[0].mean_confidence[1], 0.5);
  const auto heat = format_heatmap_csv(result);
  EXPECT_EQ(heat.substr(0, heat.find('\n')), "compound_class,basic_class,mean_confidence");
  EXPECT_NE(heat.find("1+2,1,0.500000000"), std::string::npos);
  EXPECT_NE(format_match_table(result).find("3+6,1,1,1.0000"), std::string::npos);
}

TEST(CompoundEval, UniformOutputsFollowTieBreak) {
  const std::vector<ClassPair> pairs = {{0, 1}, {1, 2}, {1, 0}, {3, 4}};
  std::vector<PredictionRow> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) rows.push_back({"u", std::nullopt, std::vector<double>(7, 1.0 / 7.0)});
  double expected = 0.0;
  for (const auto& [a, b] : pairs) expected += brute_force_top2(rows[0].probs, a, b);
  expected /= static_cast<double>(pairs.size());
  const auto result = compound_top2_eval(rows, pairs);
  EXPECT_DOUBLE_EQ(result.overall_match_rate, expected);
  EXPECT_DOUBLE_EQ(result.overall_match_rate, 0.5);
}

#include "oracle_model.hpp"
#include "rankcal/trainer.hpp"

TEST(CompoundEval, HalfDetectorModelMatchesEveryCompoundSample) {
  ToyGenConfig toy;
  const auto set = generate_compound_set_total(toy, default_compound_pairs(), 220);
  const auto model = support::half_detector_model(toy);
  const auto rows = predict_batch(model, set.samples(Split::compound));
  const auto result = compound_top2_eval(rows, set.constituents(Split::compound));
  EXPECT_EQ(result.overall_match_rate, 1.0);
  // Without noise the two constituents split the mass evenly.
  ToyGenConfig clean = toy;
  clean.sigma = 0.0;
  const auto clean_set = generate_compound_set_total(clean, default_compound_pairs(), 11);
  const auto clean_rows = predict_batch(model, clean_set.samples(Split::compound));
  for (std::size_t i = 0; i < clean_rows.size(); ++i) {
    const auto [a, b] = clean_set.constituents(Split::compound)[i];
    EXPECT_NEAR(clean_rows[i].probs[a], 0.5, 1e-6);
    EXPECT_NEAR(clean_rows[i].probs[b], 0.5, 1e-6);
  }
  // The same model classifies clean faces.
  const auto faces = generate_toy_dataset(toy);
  EXPECT_EQ(accuracy(predict_batch(model, faces.samples(Split::fer_eval))), 1.0);
}
