#include "rankcal/model.hpp"

#include <cmath>

#include "rankcal/errors.hpp"

namespace rankcal {

MlpModel::MlpModel(ModelDims dims) : dims_(dims), params_(param_count(dims), 0.0) {
  if (dims.input == 0 || dims.hidden == 0 || dims.classes == 0) throw InvalidInput("model dimensions must be positive");
}

MlpModel init_model(const ModelDims& dims, Rng& rng) {
  MlpModel model(dims);
  const double s1 = std::sqrt(6.0 / static_cast<double>(dims.input + dims.hidden));
  const double s2 = std::sqrt(6.0 / static_cast<double>(dims.hidden + dims.classes));
  for (std::size_t i = 0; i < dims.input; ++i) {
    for (std::size_t j = 0; j < dims.hidden; ++j) model.w1(i, j) = rng.uniform(-s1, s1);
  }
  for (std::size_t j = 0; j < dims.hidden; ++j) {
    for (std::size_t c = 0; c < dims.classes; ++c) model.w2(j, c) = rng.uniform(-s2, s2);
  }
  return model;
}

Matrix images_to_batch(std::span<const ImageTensor> images) {
  if (images.empty()) return {};
  const std::size_t d = images.front().size();
  Matrix batch(images.size(), d);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].size() != d) throw InvalidInput("images in a batch differ in size");
    std::copy(images[i].pixels().begin(), images[i].pixels().end(), batch.row(i).begin());
  }
  return batch;
}

namespace {

Matrix as_matrix(std::span<const double> values, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data().begin());
  return m;
}

void add_bias(Matrix& m, std::span<const double> bias) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    for (std::size_t j = 0; j < bias.size(); ++j) row[j] += bias[j];
  }
}

void column_sums(const Matrix& m, std::span<double> out) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += m(i, j);
  }
}

}  // namespace

ForwardPass forward(const MlpModel& model, const Matrix& batch, kernels::Exec exec) {
  const auto& d = model.dims();
  if (batch.cols() != d.input && batch.rows() > 0) {
    throw InvalidInput("forward: input width " + std::to_string(batch.cols()) + " does not match model input " +
                       std::to_string(d.input));
  }
  ForwardPass pass;
  pass.input = batch;
  if (batch.rows() == 0) {
    pass.hidden = Matrix(0, d.hidden);
    pass.logits = Matrix(0, d.classes);
    return pass;
  }
  kernels::matmul(batch, as_matrix(model.w1(), d.input, d.hidden), pass.hidden, exec);
  add_bias(pass.hidden, model.b1());
  for (double& h : pass.hidden.data()) h = h > 0.0 ? h : 0.0;
  kernels::matmul(pass.hidden, as_matrix(model.w2(), d.hidden, d.classes), pass.logits, exec);
  add_bias(pass.logits, model.b2());
  return pass;
}

std::vector<ProbVector> probabilities(const Matrix& logits) {
  std::vector<ProbVector> out;
  out.reserve(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) out.push_back(softmax(logits.row(i)));
  return out;
}

std::vector<ProbVector> predict_probs(const MlpModel& model, std::span<const ImageTensor> images,
                                      kernels::Exec exec) {
  if (images.empty()) return {};
  return probabilities(forward(model, images_to_batch(images), exec).logits);
}

std::vector<double> backward(const MlpModel& model, const ForwardPass& pass, const Matrix& grad_logits,
                             kernels::Exec exec) {
  const auto& d = model.dims();
  if (grad_logits.rows() != pass.logits.rows() || grad_logits.cols() != d.classes) {
    throw InvalidInput("backward: upstream gradient shape does not match the forward pass");
  }
  std::vector<double> grad(MlpModel::param_count(d), 0.0);
  if (grad_logits.rows() == 0) return grad;
  const std::size_t w1_size = d.input * d.hidden;
  const std::size_t w2_at = w1_size + d.hidden;
  const std::size_t b2_at = w2_at + d.hidden * d.classes;

  Matrix grad_w2;
  kernels::matmul_at_b(pass.hidden, grad_logits, grad_w2, exec);
  std::copy(grad_w2.data().begin(), grad_w2.data().end(), grad.begin() + static_cast<std::ptrdiff_t>(w2_at));
  column_sums(grad_logits, std::span<double>(grad).subspan(b2_at, d.classes));

  Matrix grad_hidden;
  kernels::matmul_a_bt(grad_logits, as_matrix(model.w2(), d.hidden, d.classes), grad_hidden, exec);
  for (std::size_t i = 0; i < grad_hidden.size(); ++i) {
    if (!(pass.hidden.data()[i] > 0.0)) grad_hidden.data()[i] = 0.0;
  }
  column_sums(grad_hidden, std::span<double>(grad).subspan(w1_size, d.hidden));

  Matrix grad_w1;
  kernels::matmul_at_b(pass.input, grad_hidden, grad_w1, exec);
  std::copy(grad_w1.data().begin(), grad_w1.data().end(), grad.begin());
  return grad;
}

ModelFile to_model_file(const MlpModel& model) {
  ModelFile file;
  file.input = static_cast<std::uint32_t>(model.dims().input);
  file.hidden = static_cast<std::uint32_t>(model.dims().hidden);
  file.classes = static_cast<std::uint32_t>(model.dims().classes);
  file.weights.reserve(model.params().size());
  for (double w : model.params()) file.weights.push_back(static_cast<float>(w));
  return file;
}

MlpModel from_model_file(const ModelFile& file) {
  MlpModel model({file.input, file.hidden, file.classes});
  if (file.weights.size() != model.params().size()) throw InvalidInput("model file weight count mismatch");
  for (std::size_t i = 0; i < file.weights.size(); ++i) {
    if (!std::isfinite(file.weights[i])) throw DataError("model file holds a non-finite weight");
    model.params()[i] = file.weights[i];
  }
  return model;
}

}  // namespace rankcal
