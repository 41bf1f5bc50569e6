#include "rankcal/losses.hpp"

#include <cmath>
#include <numeric>

#include "rankcal/errors.hpp"

namespace rankcal {

void FocalConfig::validate() const {
  if (!(gamma >= 0.0)) throw InvalidInput("focal gamma must be non-negative");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("focal alpha must lie in (0, 1]");
}

namespace {

struct FocalTerm {
  double value;
  double scale;  // d value / d z_j = scale * (onehot_t - p)_j
};

FocalTerm focal_term(double log_p, const FocalConfig& config) {
  const double p = std::exp(log_p);
  const double q = 1.0 - p;
  const double weight = config.gamma == 0.0 ? 1.0 : std::pow(q, config.gamma);
  // gamma * q^(gamma-1) * p * ln p, which vanishes as q -> 0 for gamma >= 1.
  double slope = 0.0;
  if (config.gamma != 0.0 && q > 0.0) slope = config.gamma * std::pow(q, config.gamma - 1.0) * p * log_p;
  return {-config.alpha * weight * log_p, config.alpha * (slope - weight)};
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

// Gradient of p[k] with respect to the logits, scaled by s, added into g.
void add_prob_grad(std::span<const double> p, std::size_t k, double s, std::vector<double>& g) {
  for (std::size_t j = 0; j < p.size(); ++j) g[j] += s * p[k] * ((j == k ? 1.0 : 0.0) - p[j]);
}

}  // namespace

LossBundle focal_loss(std::span<const double> logits, std::size_t target, const FocalConfig& config) {
  config.validate();
  if (target >= logits.size()) throw InvalidInput("focal_loss: target index out of range");
  const auto log_p = log_softmax(logits);
  const auto term = focal_term(log_p[target], config);
  LossBundle out{term.value, std::vector<double>(logits.size())};
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out.grad[j] = term.scale * ((j == target ? 1.0 : 0.0) - std::exp(log_p[j]));
  }
  return out;
}

LossBundle focal_loss(std::span<const double> logits, std::span<const double> soft_target,
                      const FocalConfig& config) {
  config.validate();
  if (soft_target.size() != logits.size()) throw InvalidInput("focal_loss: soft target length mismatch");
  const double total = std::accumulate(soft_target.begin(), soft_target.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("focal_loss: soft target must sum to 1");
  const auto log_p = log_softmax(logits);
  LossBundle out{0.0, std::vector<double>(logits.size(), 0.0)};
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (soft_target[c] == 0.0) continue;
    const auto term = focal_term(log_p[c], config);
    out.value += soft_target[c] * term.value;
    for (std::size_t j = 0; j < logits.size(); ++j) {
      out.grad[j] += soft_target[c] * term.scale * ((j == c ? 1.0 : 0.0) - std::exp(log_p[j]));
    }
  }
  return out;
}

namespace {

struct HingeChoice {
  std::size_t syn_index;
  std::size_t ref_index;
};

HingeChoice pick(std::span<const double> p_syn, std::span<const double> p_ref, std::size_t c, RankMode mode) {
  if (mode == RankMode::label_indexed) return {c, c};
  return {argmax_tiebreak(p_syn), argmax_tiebreak(p_ref)};
}

void check_ranking_shapes(std::size_t n_syn, std::size_t n_fer, std::size_t n_fr, std::size_t c1, std::size_t c2) {
  if (n_syn == 0 || n_syn != n_fer || n_syn != n_fr) throw InvalidInput("ranking_loss: vector lengths differ");
  if (c1 == c2) throw InvalidInput("ranking_loss: parent classes must differ");
  if (c1 >= n_syn || c2 >= n_syn) throw InvalidInput("ranking_loss: class index out of range");
}

}  // namespace

double ranking_loss_value(std::span<const double> p_syn, std::span<const double> p_fer,
                          std::span<const double> p_fr, std::size_t c1, std::size_t c2, double margin,
                          RankMode mode) {
  check_ranking_shapes(p_syn.size(), p_fer.size(), p_fr.size(), c1, c2);
  const auto h1 = pick(p_syn, p_fer, c1, mode);
  const auto h2 = pick(p_syn, p_fr, c2, mode);
  const double v1 = p_syn[h1.syn_index] - p_fer[h1.ref_index] + margin;
  const double v2 = p_syn[h2.syn_index] - p_fr[h2.ref_index] + margin;
  return (v1 > 0.0 ? v1 : 0.0) + (v2 > 0.0 ? v2 : 0.0);
}

RankingBundle ranking_loss(const RankingInputs& in) {
  check_ranking_shapes(in.logits_syn.size(), in.logits_fer.size(), in.logits_fr.size(), in.c1, in.c2);
  const auto p_syn = softmax(in.logits_syn);
  const auto p_fer = softmax(in.logits_fer);
  const auto p_fr = softmax(in.logits_fr);
  const std::size_t n = p_syn.size();
  RankingBundle out{0.0, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};

  const auto h1 = pick(p_syn, p_fer, in.c1, in.mode);
  const double v1 = p_syn[h1.syn_index] - p_fer[h1.ref_index] + in.margin;
  if (v1 > 0.0) {
    out.value += v1;
    add_prob_grad(p_syn, h1.syn_index, 1.0, out.grad_syn);
    add_prob_grad(p_fer, h1.ref_index, -1.0, out.grad_fer);
  }
  const auto h2 = pick(p_syn, p_fr, in.c2, in.mode);
  const double v2 = p_syn[h2.syn_index] - p_fr[h2.ref_index] + in.margin;
  if (v2 > 0.0) {
    out.value += v2;
    add_prob_grad(p_syn, h2.syn_index, 1.0, out.grad_syn);
    add_prob_grad(p_fr, h2.ref_index, -1.0, out.grad_fr);
  }
  return out;
}

ObjectiveResult total_loss(const ObjectiveTerms& terms, const ObjectiveConfig& config, std::size_t classes) {
  if (terms.fer.empty()) throw InvalidInput("total_loss: at least one FER term is required");
  if (!(config.w_rank >= 0.0)) throw InvalidInput("total_loss: w_rank must be non-negative");
  ObjectiveResult out;
  out.grad_fer = Matrix(terms.fer.size(), classes);
  out.grad_fr = Matrix(terms.fr.size(), classes);
  out.grad_syn = Matrix(terms.syn.size(), classes);

  auto group_matrix = [&](Group g) -> Matrix& {
    switch (g) {
      case Group::fer: return out.grad_fer;
      case Group::fr: return out.grad_fr;
      case Group::syn: return out.grad_syn;
    }
    return out.grad_fer;
  };
  // Fixed index order keeps the reduction deterministic.
  auto mean_into = [&](const std::vector<LossBundle>& bundles, Group g) {
    if (bundles.empty()) return 0.0;
    const double w = 1.0 / static_cast<double>(bundles.size());
    Matrix& grad = group_matrix(g);
    double sum = 0.0;
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      if (bundles[i].grad.size() != classes) throw InvalidInput("total_loss: gradient length mismatch");
      sum += bundles[i].value;
      for (std::size_t j = 0; j < classes; ++j) grad(i, j) += w * bundles[i].grad[j];
    }
    return sum * w;
  };

  out.focal_fer = mean_into(terms.fer, Group::fer);
  if (config.fr_focal) out.focal_fr = mean_into(terms.fr, Group::fr);
  if (config.syn_focal) out.focal_syn = mean_into(terms.syn, Group::syn);

  if (!terms.rank.empty()) {
    const double w = config.w_rank / static_cast<double>(terms.rank.size());
    double sum = 0.0;
    for (const auto& t : terms.rank) {
      sum += t.bundle.value;
      if (w == 0.0) continue;
      Matrix& gs = out.grad_syn;
      Matrix& g1 = group_matrix(t.first.group);
      Matrix& g2 = group_matrix(t.second.group);
      if (t.syn >= gs.rows() || t.first.index >= g1.rows() || t.second.index >= g2.rows()) {
        throw InvalidInput("total_loss: ranking term refers to a missing sample");
      }
      for (std::size_t j = 0; j < classes; ++j) {
        gs(t.syn, j) += w * t.bundle.grad_syn[j];
        g1(t.first.index, j) += w * t.bundle.grad_fer[j];
        g2(t.second.index, j) += w * t.bundle.grad_fr[j];
      }
    }
    out.rank = sum / static_cast<double>(terms.rank.size());
  }
  out.value = out.focal_fer + out.focal_fr + out.focal_syn + config.w_rank * out.rank;
  return out;
}

}  // namespace rankcal
