#include "rankcal/pseudolabel.hpp"

#include <cmath>
#include <numeric>

#include "rankcal/errors.hpp"

namespace rankcal {

double PseudoLabelConfig::lambda_for(std::size_t c) const {
  return lambda_c.size() == 1 ? lambda_c.front() : lambda_c.at(c);
}

bool PseudoLabelConfig::uniform_lambda() const {
  for (double l : lambda_c) {
    if (l != lambda_c.front()) return false;
  }
  return true;
}

void PseudoLabelConfig::validate() const {
  if (lambda_c.empty()) throw InvalidInput("lambda_c needs at least one value");
  for (double l : lambda_c) {
    if (!(l >= 0.0 && l <= 1.0)) throw InvalidInput("lambda_c values must lie in [0, 1]");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInput("beta must lie in (0, 1)");
  if (!(tau0 >= 0.0 && tau0 <= 1.0)) throw InvalidInput("tau0 must lie in [0, 1]");
}

double scheduled_threshold(double beta, std::size_t epoch, double mean_confidence) {
  return beta / (1.0 + std::exp(-static_cast<double>(epoch))) * mean_confidence;
}

ThresholdState compute_class_thresholds(std::span<const ProbVector> predictions,
                                        std::span<const std::size_t> labels, std::size_t epoch,
                                        std::size_t classes, const PseudoLabelConfig& config) {
  config.validate();
  if (predictions.empty()) throw InvalidInput("threshold computation needs a non-empty dataset");
  if (predictions.size() != labels.size()) throw InvalidInput("predictions and labels differ in length");
  ThresholdState state;
  state.epoch = epoch;
  state.beta = config.beta;
  state.tau0 = config.tau0;
  std::vector<double> sums(classes, 0.0);
  state.correct_counts.assign(classes, 0);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != classes) throw InvalidInput("prediction length differs from class count");
    if (labels[i] >= classes) throw InvalidInput("label out of range");
    const std::size_t predicted = argmax_tiebreak(predictions[i]);
    if (predicted != labels[i]) continue;
    sums[predicted] += predictions[i][predicted];
    state.correct_counts[predicted] += 1;
  }
  state.thresholds.resize(classes);
  state.mean_confidence.assign(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    if (state.correct_counts[c] == 0) {
      state.thresholds[c] = config.tau0;
      continue;
    }
    state.mean_confidence[c] = sums[c] / static_cast<double>(state.correct_counts[c]);
    state.thresholds[c] = scheduled_threshold(config.beta, epoch, state.mean_confidence[c]);
  }
  return state;
}

ProbVector aggregate_probs(std::span<const double> p_a, std::span<const double> p_b,
                           const PseudoLabelConfig& config) {
  if (p_a.size() != p_b.size()) throw InvalidInput("aggregate_probs: length mismatch");
  if (config.lambda_c.size() != 1 && config.lambda_c.size() != p_a.size()) {
    throw InvalidInput("aggregate_probs: lambda_c length differs from class count");
  }
  ProbVector out(p_a.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double l = config.lambda_for(c);
    out[c] = l * p_a[c] + (1.0 - l) * p_b[c];
  }
  if (!config.uniform_lambda()) {
    const double sum = std::accumulate(out.begin(), out.end(), 0.0);
    if (sum > 0.0) {
      for (double& v : out) v /= sum;
    }
  }
  return out;
}

AggregatedPrediction assign_pseudo_label(std::span<const double> probs, const ThresholdState& thresholds) {
  if (probs.size() != thresholds.thresholds.size()) throw InvalidInput("assign_pseudo_label: length mismatch");
  AggregatedPrediction out;
  out.probs.assign(probs.begin(), probs.end());
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (!(probs[c] > thresholds.thresholds[c])) continue;
    if (!best || probs[c] > probs[*best]) best = c;
  }
  out.label = best;
  return out;
}

std::vector<PseudoLabeledSample> pseudo_label_batch(std::span<const ImageTensor> batch,
                                                    const BatchPredictor& predict,
                                                    const ThresholdState& thresholds, Rng& rng,
                                                    const PseudoLabelConfig& config, const WeakAugment& aug) {
  std::vector<std::uint64_t> seeds(batch.size());
  for (auto& s : seeds) s = rng.next_u64();

  std::vector<ImageTensor> views_a(batch.size());
  std::vector<ImageTensor> views_b(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Rng local(seeds[i]);
    views_a[i] = weak_augment(batch[i], aug, local);
    views_b[i] = weak_augment(batch[i], aug, local);
  }
  const auto probs_a = predict(views_a);
  const auto probs_b = predict(views_b);
  if (probs_a.size() != batch.size() || probs_b.size() != batch.size()) {
    throw InvalidInput("pseudo_label_batch: predictor returned the wrong number of rows");
  }

  std::vector<PseudoLabeledSample> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto merged = aggregate_probs(probs_a[i], probs_b[i], config);
    out.push_back({i, std::move(views_a[i]), std::move(views_b[i]), assign_pseudo_label(merged, thresholds)});
  }
  return out;
}

}  // namespace rankcal
