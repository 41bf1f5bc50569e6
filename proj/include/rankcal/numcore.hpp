#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rankcal {

// Length-C probability distribution over emotion classes.
using ProbVector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

ProbVector softmax(std::span<const double> logits);

// log(sum(exp(v))) computed with max subtraction.
double log_sum_exp(std::span<const double> v);

// Index of the maximum; ties resolve to the lowest index.
std::size_t argmax_tiebreak(std::span<const double> v);

struct RankedEntry {
  std::size_t index;
  double value;
  bool operator==(const RankedEntry&) const = default;
};

// The k largest entries in non-increasing order, ties by ascending index.
std::vector<RankedEntry> top_k(std::span<const double> v, std::size_t k);

// SplitMix64 generator. The output sequence is a pure function of the seed
// and identical on every platform; sampling helpers below are written out
// explicitly instead of using <random> distributions, whose outputs are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  // Uniform on [lo, hi). Throws InvalidInput unless lo < hi.
  double uniform(double lo, double hi);
  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);
  // Standard normal via Box-Muller (one draw pair per call).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

struct AdamState {
  std::size_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_size(std::size_t n, double lr);
};

// Bias-corrected Adam update, in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace rankcal
