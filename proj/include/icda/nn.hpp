#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icda/matrix.hpp"

namespace icda {

enum class Activation { relu, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Fully connected layer computing act(x * W^T + b). weight is (out x in).
struct DenseLayer {
  Matrix weight;
  std::vector<double> bias;
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Feed-forward classifier whose last layer is the class head. The head grows
// as increments add classes; class_domains tags every head row with the
// domain it was introduced in.
struct Model {
  std::vector<DenseLayer> layers;
  std::vector<int> class_domains;
  std::uint64_t rng_seed = 0;

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t head_classes() const { return layers.back().out_dim(); }

  // Throws ShapeError when layer dimensions do not chain or the domain tags
  // disagree with the head size.
  void validate() const;

  friend bool operator==(const Model&, const Model&) = default;
};

// Builds input -> hidden... (relu) -> head (identity) with an empty head.
// Hidden weights are uniform in +-sqrt(6/fan_in), biases zero.
Model make_model(std::size_t input_dim, std::span<const std::size_t> hidden, std::uint64_t seed);

struct ForwardCache {
  // inputs[i] is the input to layer i; pre[i] its pre-activation.
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre;

  std::size_t batch() const { return inputs.empty() ? 0 : inputs.front().rows(); }
};

struct ForwardResult {
  Matrix logits;
  ForwardCache cache;
};

ForwardResult forward(const Model& model, const Matrix& batch);

// Logits only, without keeping the cache.
Matrix logits(const Model& model, const Matrix& batch);

// Softmax of logits_row[begin, end) / tau computed with max subtraction.
std::vector<double> softmax_temp(std::span<const double> logits_row, double tau, std::size_t begin,
                                 std::size_t end);
inline std::vector<double> softmax_temp(std::span<const double> logits_row, double tau) {
  return softmax_temp(logits_row, tau, 0, logits_row.size());
}

// Appends n_new head rows. Existing parameters are copied untouched; new
// rows are uniform in +-sqrt(6/fan_in) from `seed`, new biases are zero.
Model expand_head(const Model& model, std::size_t n_new, int domain, std::uint64_t seed);

struct Gradients {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
};

Gradients zero_gradients_like(const Model& model);

// Backpropagates dL/dlogits through the cached forward pass. dL_dlogits is
// expected to already carry the batch-mean factor of the loss, so the result
// is the exact gradient of that (batch-averaged) loss.
Gradients backward(const Model& model, const ForwardCache& cache, const Matrix& dL_dlogits);

struct AdadeltaState {
  double rho = 0.95;
  double epsilon = 1e-6;
  std::vector<Matrix> sq_grad_w;
  std::vector<std::vector<double>> sq_grad_b;
  std::vector<Matrix> sq_update_w;
  std::vector<std::vector<double>> sq_update_b;

  friend bool operator==(const AdadeltaState&, const AdadeltaState&) = default;
};

AdadeltaState make_adadelta_state(const Model& model, double rho = 0.95, double epsilon = 1e-6);

// One ADADELTA update in place. Throws NumericError naming the parameter
// (e.g. "layers[1].weight[3,0]") when a gradient is not finite; in that
// case neither the model nor the state is modified.
void adadelta_step(Model& model, const Gradients& grads, AdadeltaState& state);

}  // namespace icda
