#include "rankcal/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rankcal/errors.hpp"

namespace rankcal {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("log_sum_exp: empty vector");
  const double hi = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

ProbVector softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidInput("softmax: empty logits");
  const double hi = *std::max_element(logits.begin(), logits.end());
  ProbVector out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - hi);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

std::size_t argmax_tiebreak(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("argmax: empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::vector<RankedEntry> top_k(std::span<const double> v, std::size_t k) {
  if (k == 0 || k > v.size()) throw InvalidInput("top_k: k out of range");
  std::vector<RankedEntry> entries(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) entries[i] = {i, v[i]};
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end(),
                    [](const RankedEntry& a, const RankedEntry& b) {
                      if (a.value != b.value) return a.value > b.value;
                      return a.index < b.index;
                    });
  entries.resize(k);
  return entries;
}

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) {
  if (!(lo < hi)) throw InvalidInput("rng uniform: require lo < hi");
  double x = lo + (hi - lo) * uniform01();
  // Rounding can land exactly on hi for wide ranges.
  return x < hi ? x : std::nextafter(hi, lo);
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw InvalidInput("rng uniform_index: n must be positive");
  auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  return std::min(i, n - 1);
}

double Rng::normal() {
  double u1 = uniform01();
  double u2 = uniform01();
  // Map u1 into (0, 1] so the log stays finite.
  u1 = 1.0 - u1;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

AdamState AdamState::for_size(std::size_t n, double lr) {
  AdamState s;
  s.first_moment.assign(n, 0.0);
  s.second_moment.assign(n, 0.0);
  s.lr = lr;
  return s;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw InvalidInput("adam_step: shape mismatch between params, grads and moments");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(state.beta1, t);
  const double corr2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * grads[i];
    v = state.beta2 * v + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = m / corr1;
    const double v_hat = v / corr2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace rankcal
