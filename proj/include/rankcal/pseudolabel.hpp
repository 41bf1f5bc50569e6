#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rankcal/augment.hpp"
#include "rankcal/image.hpp"
#include "rankcal/numcore.hpp"

namespace rankcal {

struct PseudoLabelConfig {
  // Per-class interpolation weight between the two augmented views. A single
  // entry applies to every class.
  std::vector<double> lambda_c = {0.5};
  double beta = 0.97;
  double tau0 = 0.95;

  double lambda_for(std::size_t c) const;
  bool uniform_lambda() const;
  void validate() const;
};

// Per-class confidence thresholds for one epoch.
struct ThresholdState {
  std::size_t epoch = 0;
  double beta = 0.97;
  double tau0 = 0.95;
  std::vector<double> thresholds;
  std::vector<double> mean_confidence;  // 0 for classes without correct predictions
  std::vector<std::size_t> correct_counts;
};

// Threshold for one class given the mean top-1 confidence of its correctly
// predicted samples: beta / (1 + e^-t) * mean.
double scheduled_threshold(double beta, std::size_t epoch, double mean_confidence);

// Class c collects samples predicted as c whose label is c; an empty
// collection falls back to tau0.
ThresholdState compute_class_thresholds(std::span<const ProbVector> predictions,
                                        std::span<const std::size_t> labels, std::size_t epoch,
                                        std::size_t classes, const PseudoLabelConfig& config);

ProbVector aggregate_probs(std::span<const double> p_a, std::span<const double> p_b,
                           const PseudoLabelConfig& config);

struct AggregatedPrediction {
  ProbVector probs;
  std::optional<std::size_t> label;
  bool accepted() const noexcept { return label.has_value(); }
};

// Keep classes whose probability strictly exceeds their threshold and take
// the argmax over them (lowest index on ties).
AggregatedPrediction assign_pseudo_label(std::span<const double> probs, const ThresholdState& thresholds);

// Maps a batch of images to one probability vector each.
using BatchPredictor = std::function<std::vector<ProbVector>(std::span<const ImageTensor>)>;

struct PseudoLabeledSample {
  std::size_t index;  // position in the input batch
  ImageTensor view_a;
  ImageTensor view_b;
  AggregatedPrediction prediction;
};

// Two independent weak augmentations per image, both scored by `predict`,
// aggregated and thresholded. Each sample's augmentation seed is drawn from
// `rng` up front in batch order, so results do not depend on how the batch
// is scheduled.
std::vector<PseudoLabeledSample> pseudo_label_batch(std::span<const ImageTensor> batch,
                                                    const BatchPredictor& predict,
                                                    const ThresholdState& thresholds, Rng& rng,
                                                    const PseudoLabelConfig& config,
                                                    const WeakAugment& aug = {});

}  // namespace rankcal
