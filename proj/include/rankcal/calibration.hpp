#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankcal/dataset.hpp"
#include "rankcal/predictions.hpp"

namespace rankcal {

struct BinStats {
  std::size_t index = 0;  // 0-based
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double acc = 0.0;   // 0 when empty
  double conf = 0.0;  // 0 when empty
  bool empty() const noexcept { return count == 0; }
  double gap() const noexcept { return acc > conf ? acc - conf : conf - acc; }
};

enum class BinningMode { equal_width, equal_mass };

const char* binning_tag(BinningMode mode);
BinningMode parse_binning(const std::string& tag);  // "width" or "mass"

// Bin m (1-based) covers ((m-1)/M, m/M]; a confidence of exactly 0 goes to
// the first bin.
std::size_t equal_width_bin(double confidence, std::size_t bins);

std::vector<BinStats> bin_equal_width(std::span<const double> confidences, std::span<const bool> correct,
                                      std::size_t bins);
// Sorted by confidence (stable in the input order) and cut into `bins`
// contiguous groups whose sizes differ by at most one, larger groups first.
// lo/hi are the smallest and largest confidence in each group. With fewer
// samples than bins the trailing groups stay empty.
std::vector<BinStats> bin_equal_mass(std::span<const double> confidences, std::span<const bool> correct,
                                     std::size_t bins);

double ece(std::span<const BinStats> bins, std::size_t n);
double mce(std::span<const BinStats> bins);
double aece(std::span<const double> confidences, std::span<const bool> correct, std::size_t bins);

// Top-1 confidence and correctness per labeled row.
struct ConfidenceData {
  std::vector<double> confidence;
  std::vector<bool> correct;
};
ConfidenceData confidence_data(std::span<const PredictionRow> rows);

double accuracy(std::span<const PredictionRow> rows);

struct CalibrationReport {
  BinningMode mode = BinningMode::equal_width;
  std::size_t bins = 15;
  std::vector<BinStats> table;  // bins of the selected mode
  double ece = 0.0;             // equal-width bins
  double aece = 0.0;            // equal-mass bins
  double mce = 0.0;             // over the non-empty bins of `table`
  double binned_ece = 0.0;      // ECE over `table`
  double acc = 0.0;
  std::size_t n = 0;
};

CalibrationReport reliability_report(std::span<const PredictionRow> rows, std::size_t bins, BinningMode mode);

// `bin,lo,hi,count,acc,conf,gap` rows followed by `ece=`, `aece=`, `mce=`,
// `acc=`, `binned_ece=` footer lines.
std::string format_reliability_csv(const CalibrationReport& report);
void write_reliability_csv(const std::filesystem::path& path, const CalibrationReport& report);

// Bin table and footer scalars read back from a reliability CSV.
struct ReliabilityCsv {
  std::vector<BinStats> table;
  double ece = 0.0;
  double aece = 0.0;
  double mce = 0.0;
  double acc = 0.0;
  double binned_ece = 0.0;
};
ReliabilityCsv parse_reliability_csv(const std::string& text);

// One-line summary `acc=... ece=... aece=... mce=...`, four decimals.
std::string summary_line(const CalibrationReport& report);

struct CompoundClass {
  ClassPair constituents;
  std::size_t count = 0;
  std::size_t matches = 0;
  double match_rate = 0.0;
  std::vector<double> mean_confidence;  // heatmap row over basic classes
};

struct CompoundEvalResult {
  std::vector<CompoundClass> classes;  // in order of first appearance
  std::vector<bool> sample_match;
  double overall_match_rate = 0.0;
};

// A sample matches when its two highest-confidence classes (lowest index on
// ties) are exactly its two constituents, in either order.
bool top2_match(std::span<const double> probs, ClassPair constituents);

CompoundEvalResult compound_top2_eval(std::span<const PredictionRow> rows, std::span<const ClassPair> constituents);

// Long format `compound_class,basic_class,mean_confidence`; compound classes
// are written as `c1+c2`.
std::string format_heatmap_csv(const CompoundEvalResult& result);
// `compound_class,count,matches,match_rate`
std::string format_match_table(const CompoundEvalResult& result);

}  // namespace rankcal
