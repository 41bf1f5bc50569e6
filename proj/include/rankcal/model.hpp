#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rankcal/image.hpp"
#include "rankcal/kernels.hpp"
#include "rankcal/model_file.hpp"
#include "rankcal/numcore.hpp"

namespace rankcal {

struct ModelDims {
  std::size_t input = 256;
  std::size_t hidden = 64;
  std::size_t classes = 7;
  bool operator==(const ModelDims&) const = default;
};

// Two-layer perceptron: logits = relu(x W1 + b1) W2 + b2.
// Parameters live in one flat vector laid out W1 (input x hidden, row-major),
// b1, W2 (hidden x classes), b2, the same order as the model file.
class MlpModel {
 public:
  MlpModel() = default;
  explicit MlpModel(ModelDims dims);  // all parameters zero

  const ModelDims& dims() const noexcept { return dims_; }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  std::span<const double> w1() const { return params().subspan(0, w1_size()); }
  std::span<const double> b1() const { return params().subspan(w1_size(), dims_.hidden); }
  std::span<const double> w2() const { return params().subspan(w1_size() + dims_.hidden, w2_size()); }
  std::span<const double> b2() const { return params().subspan(w1_size() + dims_.hidden + w2_size(), dims_.classes); }

  double& w1(std::size_t i, std::size_t j) { return params_[i * dims_.hidden + j]; }
  double& b1(std::size_t j) { return params_[w1_size() + j]; }
  double& w2(std::size_t j, std::size_t c) { return params_[w1_size() + dims_.hidden + j * dims_.classes + c]; }
  double& b2(std::size_t c) { return params_[w1_size() + dims_.hidden + w2_size() + c]; }

  static std::size_t param_count(const ModelDims& d) {
    return d.input * d.hidden + d.hidden + d.hidden * d.classes + d.classes;
  }

  bool operator==(const MlpModel&) const = default;

 private:
  std::size_t w1_size() const { return dims_.input * dims_.hidden; }
  std::size_t w2_size() const { return dims_.hidden * dims_.classes; }

  ModelDims dims_;
  std::vector<double> params_;
};

// Weights ~ U(-s, s), s = sqrt(6 / (fan_in + fan_out)); biases zero.
MlpModel init_model(const ModelDims& dims, Rng& rng);

struct ForwardPass {
  Matrix input;   // n x input
  Matrix hidden;  // n x hidden, after the rectifier
  Matrix logits;  // n x classes
};

Matrix images_to_batch(std::span<const ImageTensor> images);

ForwardPass forward(const MlpModel& model, const Matrix& batch, kernels::Exec exec = kernels::Exec::parallel);
std::vector<ProbVector> probabilities(const Matrix& logits);
std::vector<ProbVector> predict_probs(const MlpModel& model, std::span<const ImageTensor> images,
                                      kernels::Exec exec = kernels::Exec::parallel);

// Gradient of sum_i <grad_logits_i, logits_i> with respect to the
// parameters, in the flat parameter layout. The rectifier's subgradient at 0
// is 0.
std::vector<double> backward(const MlpModel& model, const ForwardPass& pass, const Matrix& grad_logits,
                             kernels::Exec exec = kernels::Exec::parallel);

// Weights are narrowed to float32 on the way out.
ModelFile to_model_file(const MlpModel& model);
MlpModel from_model_file(const ModelFile& file);

}  // namespace rankcal
