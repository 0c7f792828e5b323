#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "h2fed/rng.hpp"

namespace h2fed {

// One-hidden-layer perceptron with ReLU and a softmax head. The flat
// parameter layout is W1 (input x hidden, row-major), b1, W2
// (hidden x output, row-major), b2.
struct ModelArchitecture {
  int input_dim = 784;
  int hidden_dim = 40;
  int output_dim = 10;

  bool valid() const { return input_dim >= 1 && hidden_dim >= 1 && output_dim >= 1; }
  std::size_t param_count() const {
    return static_cast<std::size_t>(input_dim) * hidden_dim + hidden_dim +
           static_cast<std::size_t>(hidden_dim) * output_dim + output_dim;
  }
  // Size the model would occupy serialized at 4 bytes per weight; reported
  // in run headers.
  std::size_t model_size_bytes() const { return param_count() * 4; }

  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return static_cast<std::size_t>(input_dim) * hidden_dim; }
  std::size_t w2_offset() const { return b1_offset() + hidden_dim; }
  std::size_t b2_offset() const { return w2_offset() + static_cast<std::size_t>(hidden_dim) * output_dim; }

  friend bool operator==(const ModelArchitecture&, const ModelArchitecture&) = default;
};

struct ParamVector {
  ModelArchitecture arch;
  std::vector<double> values;

  ParamVector() = default;
  explicit ParamVector(const ModelArchitecture& a) : arch(a), values(a.param_count(), 0.0) {}

  std::size_t size() const { return values.size(); }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }

  std::span<double> w1() { return {values.data() + arch.w1_offset(), arch.b1_offset()}; }
  std::span<double> b1() { return {values.data() + arch.b1_offset(), static_cast<std::size_t>(arch.hidden_dim)}; }
  std::span<double> w2() { return {values.data() + arch.w2_offset(), static_cast<std::size_t>(arch.hidden_dim) * arch.output_dim}; }
  std::span<double> b2() { return {values.data() + arch.b2_offset(), static_cast<std::size_t>(arch.output_dim)}; }
  std::span<const double> w1() const { return {values.data() + arch.w1_offset(), arch.b1_offset()}; }
  std::span<const double> b1() const { return {values.data() + arch.b1_offset(), static_cast<std::size_t>(arch.hidden_dim)}; }
  std::span<const double> w2() const { return {values.data() + arch.w2_offset(), static_cast<std::size_t>(arch.hidden_dim) * arch.output_dim}; }
  std::span<const double> b2() const { return {values.data() + arch.b2_offset(), static_cast<std::size_t>(arch.output_dim)}; }

  bool same_layout(const ParamVector& o) const { return arch == o.arch; }
  bool all_finite() const;
};

// Row-major feature matrix plus class labels, rows == labels.size().
struct Batch {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> inputs;  // rows x cols
  std::vector<int> labels;

  std::span<const double> row(std::size_t r) const { return {inputs.data() + r * cols, cols}; }
};

// mu1 pins toward the roadside (RSU) model, mu2 toward the cloud model.
// (0, 0) degenerates to the plain local loss.
struct ProximalSpec {
  double mu1 = 0.0;
  double mu2 = 0.0;
};

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

ParamVector init_params(const ModelArchitecture& arch, std::uint64_t seed);

// Class probabilities, rows x output_dim, each row a softmax simplex point.
std::vector<double> forward(const ParamVector& params, const Batch& batch);

// Mean cross-entropy over the batch plus the two quadratic proximal
// penalties; grad is the exact analytic gradient of that total.
LossGrad loss_and_grad(const ParamVector& params, const Batch& batch,
                       const ParamVector& anchor_rsu, const ParamVector& anchor_cloud,
                       const ProximalSpec& prox);

// One shuffled pass over the shard in mini-batches of batch_size,
// params <- params - lr * grad after each batch. The trailing partial
// batch is included.
struct LabeledDataset;
ParamVector sgd_epoch(const ParamVector& params, const LabeledDataset& ds,
                      std::span<const std::uint32_t> shard_indices,
                      const ParamVector& anchor_rsu, const ParamVector& anchor_cloud,
                      const ProximalSpec& prox, double lr, std::size_t batch_size,
                      Rng& rng);

// Fraction of argmax predictions matching labels; argmax ties break to the
// lowest class index.
double evaluate(const ParamVector& params, const Batch& test);

// Streaming variant used by the round loop: evaluates directly from a
// dataset without materializing one giant batch.
double evaluate(const ParamVector& params, const LabeledDataset& test);

}  // namespace h2fed
