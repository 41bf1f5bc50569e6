#include "rankcal/predictions.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rankcal/errors.hpp"

namespace rankcal {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

void check_row(const PredictionRow& row, std::size_t classes, std::size_t row_number) {
  const std::string where = "predictions row " + std::to_string(row_number);
  if (row.probs.size() != classes) throw FormatError(where + ": wrong number of probabilities", row_number);
  for (double p : row.probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw FormatError(where + ": probability outside [0, 1]", row_number);
  }
  const double sum = std::accumulate(row.probs.begin(), row.probs.end(), 0.0);
  if (std::abs(sum - 1.0) > kPredictionSumTolerance) {
    throw FormatError(where + ": probabilities sum to " + std::to_string(sum), row_number);
  }
  if (row.label && *row.label >= classes) throw FormatError(where + ": label out of range", row_number);
}

}  // namespace

std::string format_predictions(const std::vector<PredictionRow>& rows) {
  if (rows.empty()) throw InvalidInput("no prediction rows to write");
  const std::size_t classes = rows.front().probs.size();
  std::string out = "id,label";
  for (std::size_t c = 0; c < classes; ++c) out += ",p" + std::to_string(c);
  out += '\n';
  char buf[64];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // Row numbers count the header as row 1.
    check_row(rows[i], classes, i + 2);
    if (rows[i].id.find(',') != std::string::npos) throw InvalidInput("prediction ids may not contain commas");
    out += rows[i].id;
    out += ',';
    if (rows[i].label) out += std::to_string(*rows[i].label);
    for (double p : rows[i].probs) {
      std::snprintf(buf, sizeof buf, ",%.9f", p);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<PredictionRow> parse_predictions(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("predictions: empty file", 1);
  const auto header = split_fields(line);
  if (header.size() < 4 || header[0] != "id" || header[1] != "label") {
    throw FormatError("predictions: bad header", 1);
  }
  const std::size_t classes = header.size() - 2;
  for (std::size_t c = 0; c < classes; ++c) {
    if (header[c + 2] != "p" + std::to_string(c)) throw FormatError("predictions: bad header", 1);
  }
  std::vector<PredictionRow> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    const std::string where = "predictions row " + std::to_string(row_number);
    if (f.size() != classes + 2) throw FormatError(where + ": expected " + std::to_string(classes + 2) + " fields", row_number);
    PredictionRow row;
    row.id = f[0];
    if (!f[1].empty()) {
      std::size_t label = 0;
      auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), label);
      if (ec != std::errc() || ptr != f[1].data() + f[1].size()) throw FormatError(where + ": bad label", row_number);
      row.label = label;
    }
    row.probs.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      const std::string& s = f[c + 2];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), row.probs[c]);
      if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError(where + ": bad probability", row_number);
    }
    check_row(row, classes, row_number);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRow>& rows) {
  const std::string text = format_predictions(rows);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    auto rows = parse_predictions(buf.str());
    if (rows.empty()) throw DataError(path.string() + ": no prediction rows");
    return rows;
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

}  // namespace rankcal
