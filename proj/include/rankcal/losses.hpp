#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rankcal/numcore.hpp"

namespace rankcal {

struct FocalConfig {
  double gamma = 2.0;
  double alpha = 0.25;
  void validate() const;
};

// Loss value with its gradient with respect to the logits.
struct LossBundle {
  double value = 0.0;
  std::vector<double> grad;
};

// -alpha * (1 - p_t)^gamma * ln p_t, p = softmax(logits).
LossBundle focal_loss(std::span<const double> logits, std::size_t target, const FocalConfig& config);
// Sum over classes of soft_target[c] times the per-class focal term.
LossBundle focal_loss(std::span<const double> logits, std::span<const double> soft_target,
                      const FocalConfig& config);

enum class RankMode {
  // Confidences at the parents' classes: p_syn[c1] vs p_fer[c1], p_syn[c2] vs p_fr[c2].
  label_indexed,
  // Top-1 confidences of each vector.
  top1,
};

struct RankingInputs {
  std::span<const double> logits_syn;
  std::span<const double> logits_fer;  // first parent
  std::span<const double> logits_fr;   // second parent
  std::size_t c1 = 0;
  std::size_t c2 = 0;
  double margin = 0.2;
  RankMode mode = RankMode::label_indexed;
};

struct RankingBundle {
  double value = 0.0;
  std::vector<double> grad_syn;
  std::vector<double> grad_fer;
  std::vector<double> grad_fr;
};

// Two hinge terms max(0, p_syn - p_ref + margin), one per parent. The
// subgradient at the kink is 0.
RankingBundle ranking_loss(const RankingInputs& in);
// Value only, from probabilities.
double ranking_loss_value(std::span<const double> p_syn, std::span<const double> p_fer,
                          std::span<const double> p_fr, std::size_t c1, std::size_t c2, double margin,
                          RankMode mode);

enum class Group { fer, fr, syn };

struct GroupRef {
  Group group = Group::fer;
  std::size_t index = 0;
};

// One blend triple: synthetic sample plus the two parents it was cut from.
struct RankTerm {
  std::size_t syn = 0;
  GroupRef first;   // receives grad_fer
  GroupRef second;  // receives grad_fr
  RankingBundle bundle;
};

struct ObjectiveTerms {
  std::vector<LossBundle> fer;  // hard-label focal, one per FER sample
  std::vector<LossBundle> fr;   // hard pseudo-label focal, accepted FR samples
  std::vector<LossBundle> syn;  // soft-label focal, synthetic samples
  std::vector<RankTerm> rank;
};

struct ObjectiveConfig {
  double w_rank = 1.0;
  bool syn_focal = true;
  bool fr_focal = true;
};

struct ObjectiveResult {
  double value = 0.0;
  double focal_fer = 0.0;
  double focal_fr = 0.0;
  double focal_syn = 0.0;
  double rank = 0.0;
  // Gradients with respect to each group's logits, one row per sample.
  Matrix grad_fer;
  Matrix grad_fr;
  Matrix grad_syn;
};

// Mean FER focal + mean FR focal + mean synthetic focal + w_rank * mean
// ranking loss. Disabled or empty groups contribute nothing.
ObjectiveResult total_loss(const ObjectiveTerms& terms, const ObjectiveConfig& config, std::size_t classes);

}  // namespace rankcal
