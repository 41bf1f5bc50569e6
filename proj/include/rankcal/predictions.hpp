#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rankcal/numcore.hpp"

namespace rankcal {

struct PredictionRow {
  std::string id;
  std::optional<std::size_t> label;  // empty for unlabeled rows
  ProbVector probs;
};

inline constexpr double kPredictionSumTolerance = 1e-6;

// CSV with header `id,label,p0,...,p{C-1}`; probabilities written with nine
// digits after the decimal point. Rows must sum to 1 within 1e-6.
std::string format_predictions(const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> parse_predictions(const std::string& text);

void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_predictions(const std::filesystem::path& path);

}  // namespace rankcal
