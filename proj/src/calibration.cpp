#include "rankcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "rankcal/errors.hpp"

namespace rankcal {

namespace {

void check_inputs(std::span<const double> confidences, std::span<const bool> correct, std::size_t bins) {
  if (bins == 0) throw InvalidInput("bin count must be positive");
  if (confidences.size() != correct.size()) throw InvalidInput("confidences and correctness differ in length");
  for (double c : confidences) {
    if (!(c >= 0.0 && c <= 1.0)) throw InvalidInput("confidence outside [0, 1]");
  }
}

void finish_bin(BinStats& bin, double acc_sum, double conf_sum) {
  if (bin.count == 0) return;
  bin.acc = acc_sum / static_cast<double>(bin.count);
  bin.conf = conf_sum / static_cast<double>(bin.count);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

const char* binning_tag(BinningMode mode) { return mode == BinningMode::equal_width ? "width" : "mass"; }

BinningMode parse_binning(const std::string& tag) {
  if (tag == "width") return BinningMode::equal_width;
  if (tag == "mass") return BinningMode::equal_mass;
  throw InvalidInput("binning mode must be 'width' or 'mass'");
}

std::size_t equal_width_bin(double confidence, std::size_t bins) {
  if (confidence <= 0.0) return 0;
  const auto m_total = static_cast<double>(bins);
  auto m = static_cast<std::size_t>(std::clamp(std::ceil(confidence * m_total) - 1.0, 0.0, m_total - 1.0));
  // Re-check against the same boundaries the bins report, m/M.
  while (m > 0 && confidence <= static_cast<double>(m) / m_total) --m;
  while (m + 1 < bins && confidence > static_cast<double>(m + 1) / m_total) ++m;
  return m;
}

std::vector<BinStats> bin_equal_width(std::span<const double> confidences, std::span<const bool> correct,
                                      std::size_t bins) {
  check_inputs(confidences, correct, bins);
  std::vector<BinStats> out(bins);
  std::vector<double> acc_sum(bins, 0.0);
  std::vector<double> conf_sum(bins, 0.0);
  for (std::size_t m = 0; m < bins; ++m) {
    out[m].index = m;
    out[m].lo = static_cast<double>(m) / static_cast<double>(bins);
    out[m].hi = static_cast<double>(m + 1) / static_cast<double>(bins);
  }
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const std::size_t m = equal_width_bin(confidences[i], bins);
    out[m].count += 1;
    acc_sum[m] += correct[i] ? 1.0 : 0.0;
    conf_sum[m] += confidences[i];
  }
  for (std::size_t m = 0; m < bins; ++m) finish_bin(out[m], acc_sum[m], conf_sum[m]);
  return out;
}

std::vector<BinStats> bin_equal_mass(std::span<const double> confidences, std::span<const bool> correct,
                                     std::size_t bins) {
  check_inputs(confidences, correct, bins);
  const std::size_t n = confidences.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return confidences[a] < confidences[b]; });
  std::vector<BinStats> out(bins);
  const std::size_t base = n / bins;
  const std::size_t extra = n % bins;
  std::size_t pos = 0;
  for (std::size_t m = 0; m < bins; ++m) {
    BinStats& bin = out[m];
    bin.index = m;
    bin.count = base + (m < extra ? 1 : 0);
    double acc_sum = 0.0;
    double conf_sum = 0.0;
    for (std::size_t k = 0; k < bin.count; ++k) {
      const std::size_t i = order[pos + k];
      acc_sum += correct[i] ? 1.0 : 0.0;
      conf_sum += confidences[i];
    }
    if (bin.count > 0) {
      bin.lo = confidences[order[pos]];
      bin.hi = confidences[order[pos + bin.count - 1]];
    }
    finish_bin(bin, acc_sum, conf_sum);
    pos += bin.count;
  }
  return out;
}

double ece(std::span<const BinStats> bins, std::size_t n) {
  if (n == 0) throw InvalidInput("ece: no samples");
  std::size_t total = 0;
  double sum = 0.0;
  for (const auto& b : bins) {
    total += b.count;
    if (!b.empty()) sum += static_cast<double>(b.count) / static_cast<double>(n) * b.gap();
  }
  if (total != n) throw InvalidInput("ece: bin counts do not sum to n");
  return sum;
}

double mce(std::span<const BinStats> bins) {
  double worst = 0.0;
  bool any = false;
  for (const auto& b : bins) {
    if (b.empty()) continue;
    any = true;
    worst = std::max(worst, b.gap());
  }
  if (!any) throw InvalidInput("mce: every bin is empty");
  return worst;
}

double aece(std::span<const double> confidences, std::span<const bool> correct, std::size_t bins) {
  const auto table = bin_equal_mass(confidences, correct, bins);
  return ece(table, confidences.size());
}

ConfidenceData confidence_data(std::span<const PredictionRow> rows) {
  ConfidenceData out;
  out.confidence.reserve(rows.size());
  out.correct.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.label) throw InvalidInput("calibration needs labeled prediction rows (row " + row.id + ")");
    const std::size_t top = argmax_tiebreak(row.probs);
    out.confidence.push_back(row.probs[top]);
    out.correct.push_back(top == *row.label);
  }
  return out;
}

double accuracy(std::span<const PredictionRow> rows) {
  if (rows.empty()) throw InvalidInput("accuracy: no predictions");
  const auto data = confidence_data(rows);
  const auto hits = std::count(data.correct.begin(), data.correct.end(), true);
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

CalibrationReport reliability_report(std::span<const PredictionRow> rows, std::size_t bins, BinningMode mode) {
  if (rows.empty()) throw InvalidInput("reliability report: no predictions");
  if (bins == 0) throw InvalidInput("bin count must be positive");
  const auto data = confidence_data(rows);
  // std::vector<bool> has no contiguous storage; copy for span access.
  const std::unique_ptr<bool[]> flags(new bool[data.correct.size()]);
  std::copy(data.correct.begin(), data.correct.end(), flags.get());
  const std::span<const bool> correct(flags.get(), data.correct.size());

  CalibrationReport report;
  report.mode = mode;
  report.bins = bins;
  report.n = rows.size();
  const auto width = bin_equal_width(data.confidence, correct, bins);
  const auto mass = bin_equal_mass(data.confidence, correct, bins);
  report.ece = ece(width, report.n);
  report.aece = ece(mass, report.n);
  report.table = mode == BinningMode::equal_width ? width : mass;
  report.binned_ece = ece(report.table, report.n);
  report.mce = mce(report.table);
  report.acc = accuracy(rows);
  return report;
}

std::string format_reliability_csv(const CalibrationReport& report) {
  std::string out = "bin,lo,hi,count,acc,conf,gap\n";
  for (const auto& b : report.table) {
    out += std::to_string(b.index + 1) + ',' + fixed(b.lo, 12) + ',' + fixed(b.hi, 12) + ',' +
           std::to_string(b.count) + ',' + fixed(b.acc, 12) + ',' + fixed(b.conf, 12) + ',' + fixed(b.gap(), 12) +
           '\n';
  }
  out += "ece=" + fixed(report.ece, 12) + '\n';
  out += "aece=" + fixed(report.aece, 12) + '\n';
  out += "mce=" + fixed(report.mce, 12) + '\n';
  out += "acc=" + fixed(report.acc, 12) + '\n';
  out += "binned_ece=" + fixed(report.binned_ece, 12) + '\n';
  return out;
}

void write_reliability_csv(const std::filesystem::path& path, const CalibrationReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_reliability_csv(report);
}

ReliabilityCsv parse_reliability_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "bin,lo,hi,count,acc,conf,gap") {
    throw FormatError("reliability csv: bad header", 1);
  }
  ReliabilityCsv out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      const std::string key = line.substr(0, eq);
      const double value = std::stod(line.substr(eq + 1));
      if (key == "ece") out.ece = value;
      else if (key == "aece") out.aece = value;
      else if (key == "mce") out.mce = value;
      else if (key == "acc") out.acc = value;
      else if (key == "binned_ece") out.binned_ece = value;
      else throw FormatError("reliability csv: unknown footer key " + key, row);
      continue;
    }
    std::istringstream fields(line);
    std::string f;
    std::vector<std::string> parts;
    while (std::getline(fields, f, ',')) parts.push_back(f);
    if (parts.size() != 7) throw FormatError("reliability csv: expected 7 fields", row);
    BinStats b;
    b.index = std::stoul(parts[0]) - 1;
    b.lo = std::stod(parts[1]);
    b.hi = std::stod(parts[2]);
    b.count = std::stoul(parts[3]);
    b.acc = std::stod(parts[4]);
    b.conf = std::stod(parts[5]);
    out.table.push_back(b);
  }
  return out;
}

std::string summary_line(const CalibrationReport& report) {
  return "acc=" + fixed(report.acc, 4) + " ece=" + fixed(report.ece, 4) + " aece=" + fixed(report.aece, 4) +
         " mce=" + fixed(report.mce, 4);
}

bool top2_match(std::span<const double> probs, ClassPair constituents) {
  const auto top = top_k(probs, 2);
  const auto [c1, c2] = constituents;
  return (top[0].index == c1 && top[1].index == c2) || (top[0].index == c2 && top[1].index == c1);
}

CompoundEvalResult compound_top2_eval(std::span<const PredictionRow> rows, std::span<const ClassPair> constituents) {
  if (rows.size() != constituents.size()) throw InvalidInput("compound eval: every row needs a constituent pair");
  if (rows.empty()) throw InvalidInput("compound eval: no rows");
  const std::size_t classes = rows.front().probs.size();
  CompoundEvalResult out;
  std::size_t total_matches = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto pair = constituents[i];
    if (pair.first == pair.second || pair.first >= classes || pair.second >= classes) {
      throw InvalidInput("compound eval: row " + rows[i].id + " lacks two distinct constituents");
    }
    if (rows[i].probs.size() != classes) throw InvalidInput("compound eval: inconsistent class count");
    auto it = std::find_if(out.classes.begin(), out.classes.end(),
                           [&](const CompoundClass& c) { return c.constituents == pair; });
    if (it == out.classes.end()) {
      out.classes.push_back({pair, 0, 0, 0.0, std::vector<double>(classes, 0.0)});
      it = std::prev(out.classes.end());
    }
    const bool match = top2_match(rows[i].probs, pair);
    out.sample_match.push_back(match);
    it->count += 1;
    it->matches += match ? 1 : 0;
    total_matches += match ? 1 : 0;
    for (std::size_t c = 0; c < classes; ++c) it->mean_confidence[c] += rows[i].probs[c];
  }
  for (auto& c : out.classes) {
    const auto n = static_cast<double>(c.count);
    c.match_rate = static_cast<double>(c.matches) / n;
    for (double& v : c.mean_confidence) v /= n;
  }
  out.overall_match_rate = static_cast<double>(total_matches) / static_cast<double>(rows.size());
  return out;
}

std::string format_heatmap_csv(const CompoundEvalResult& result) {
  std::string out = "compound_class,basic_class,mean_confidence\n";
  for (const auto& c : result.classes) {
    const std::string name = std::to_string(c.constituents.first) + '+' + std::to_string(c.constituents.second);
    for (std::size_t k = 0; k < c.mean_confidence.size(); ++k) {
      out += name + ',' + std::to_string(k) + ',' + fixed(c.mean_confidence[k], 9) + '\n';
    }
  }
  return out;
}

std::string format_match_table(const CompoundEvalResult& result) {
  std::string out = "compound_class,count,matches,match_rate\n";
  for (const auto& c : result.classes) {
    out += std::to_string(c.constituents.first) + '+' + std::to_string(c.constituents.second) + ',' +
           std::to_string(c.count) + ',' + std::to_string(c.matches) + ',' + fixed(c.match_rate, 4) + '\n';
  }
  return out;
}

}  // namespace rankcal
