#include "h2fed/model.hpp"

#include <algorithm>
#include <cmath>
#include <format>

#include "h2fed/data.hpp"
#include "h2fed/errors.hpp"
#include "h2fed/kernels.hpp"

namespace h2fed {

namespace {

void check_layout(const ParamVector& a, const ParamVector& b, const char* what) {
  if (!a.same_layout(b)) {
    throw ConfigError(std::format("parameter layout mismatch in {}", what));
  }
}

void check_batch(const ModelArchitecture& arch, const Batch& batch) {
  if (batch.rows == 0 || batch.rows != batch.labels.size() ||
      batch.cols != static_cast<std::size_t>(arch.input_dim) ||
      batch.inputs.size() != batch.rows * batch.cols) {
    throw ConfigError("batch dimensions do not match model architecture");
  }
  for (int y : batch.labels) {
    if (y < 0 || y >= arch.output_dim) {
      throw ConfigError(std::format("label {} outside [0, {})", y, arch.output_dim));
    }
  }
}

struct Scratch {
  std::vector<double> a1, z2, p, dz2, da1;
  explicit Scratch(const ModelArchitecture& arch)
      : a1(arch.hidden_dim), z2(arch.output_dim), p(arch.output_dim),
        dz2(arch.output_dim), da1(arch.hidden_dim) {}
};

// Hidden activations and logits for one example.
void hidden_and_logits(const ParamVector& params, std::span<const double> x, Scratch& s) {
  const auto& arch = params.arch;
  const auto b1 = params.b1();
  const auto b2 = params.b2();
  std::copy(b1.begin(), b1.end(), s.a1.begin());
  kernels::gemv_t(params.w1().data(), x.data(), s.a1.data(), arch.input_dim, arch.hidden_dim);
  kernels::relu(s.a1.data(), s.a1.size());
  std::copy(b2.begin(), b2.end(), s.z2.begin());
  kernels::gemv_t(params.w2().data(), s.a1.data(), s.z2.data(), arch.hidden_dim, arch.output_dim);
}

// Returns log(sum(exp(z))) and fills p with softmax(z).
double softmax_row(std::span<const double> z, std::span<double> p) {
  const double m = *std::max_element(z.begin(), z.end());
  double denom = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    p[c] = std::exp(z[c] - m);
    denom += p[c];
  }
  const double inv = 1.0 / denom;
  for (std::size_t c = 0; c < z.size(); ++c) p[c] *= inv;
  return m + std::log(denom);
}

int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(v.size()); ++c) {
    if (v[c] > v[best]) best = c;
  }
  return best;
}

}  // namespace

bool ParamVector::all_finite() const {
  return kernels::all_finite(values.data(), values.size());
}

ParamVector init_params(const ModelArchitecture& arch, std::uint64_t seed) {
  if (!arch.valid()) throw ConfigError("model architecture dimensions must be >= 1");
  ParamVector p(arch);
  Rng rng(mix_seed({seed, 0x1a17u}));
  const double l1 = std::sqrt(6.0 / (arch.input_dim + arch.hidden_dim));
  for (double& w : p.w1()) w = rng.uniform(-l1, l1);
  const double l2 = std::sqrt(6.0 / (arch.hidden_dim + arch.output_dim));
  for (double& w : p.w2()) w = rng.uniform(-l2, l2);
  // biases stay zero
  return p;
}

std::vector<double> forward(const ParamVector& params, const Batch& batch) {
  check_batch(params.arch, batch);
  const auto& arch = params.arch;
  std::vector<double> probs(batch.rows * arch.output_dim);
  Scratch s(arch);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    hidden_and_logits(params, batch.row(r), s);
    softmax_row(s.z2, {probs.data() + r * arch.output_dim, static_cast<std::size_t>(arch.output_dim)});
  }
  return probs;
}

LossGrad loss_and_grad(const ParamVector& params, const Batch& batch,
                       const ParamVector& anchor_rsu, const ParamVector& anchor_cloud,
                       const ProximalSpec& prox) {
  check_layout(params, anchor_rsu, "loss_and_grad (rsu anchor)");
  check_layout(params, anchor_cloud, "loss_and_grad (cloud anchor)");
  check_batch(params.arch, batch);
  if (prox.mu1 < 0.0 || prox.mu2 < 0.0) throw ConfigError("proximal weights must be >= 0");

  const auto& arch = params.arch;
  LossGrad out;
  out.grad = ParamVector(arch);
  Scratch s(arch);

  double ce_sum = 0.0;
  auto g_w1 = out.grad.w1();
  auto g_b1 = out.grad.b1();
  auto g_w2 = out.grad.w2();
  auto g_b2 = out.grad.b2();

  for (std::size_t r = 0; r < batch.rows; ++r) {
    const auto x = batch.row(r);
    hidden_and_logits(params, x, s);
    const double lse = softmax_row(s.z2, s.p);
    const int y = batch.labels[r];
    ce_sum += lse - s.z2[y];

    // d(loss)/d(logits) = p - onehot(y); the 1/B factor is applied once at
    // the end.
    std::copy(s.p.begin(), s.p.end(), s.dz2.begin());
    s.dz2[y] -= 1.0;

    kernels::axpy(1.0, s.dz2.data(), g_b2.data(), s.dz2.size());
    kernels::ger(g_w2.data(), s.a1.data(), s.dz2.data(), arch.hidden_dim, arch.output_dim);

    std::fill(s.da1.begin(), s.da1.end(), 0.0);
    kernels::gemv_n(params.w2().data(), s.dz2.data(), s.da1.data(), arch.hidden_dim, arch.output_dim);
    kernels::relu_backward(s.a1.data(), s.da1.data(), s.da1.size());

    kernels::axpy(1.0, s.da1.data(), g_b1.data(), s.da1.size());
    kernels::ger(g_w1.data(), x.data(), s.da1.data(), arch.input_dim, arch.hidden_dim);
  }

  const double inv_b = 1.0 / static_cast<double>(batch.rows);
  kernels::scal(inv_b, out.grad.data(), out.grad.size());
  out.loss = ce_sum * inv_b;

  const std::size_t n = params.size();
  if (prox.mu1 > 0.0) {
    out.loss += 0.5 * prox.mu1 * kernels::sq_dist(params.data(), anchor_rsu.data(), n);
    kernels::axpy(prox.mu1, params.data(), out.grad.data(), n);
    kernels::axpy(-prox.mu1, anchor_rsu.data(), out.grad.data(), n);
  }
  if (prox.mu2 > 0.0) {
    out.loss += 0.5 * prox.mu2 * kernels::sq_dist(params.data(), anchor_cloud.data(), n);
    kernels::axpy(prox.mu2, params.data(), out.grad.data(), n);
    kernels::axpy(-prox.mu2, anchor_cloud.data(), out.grad.data(), n);
  }
  return out;
}

ParamVector sgd_epoch(const ParamVector& params, const LabeledDataset& ds,
                      std::span<const std::uint32_t> shard_indices,
                      const ParamVector& anchor_rsu, const ParamVector& anchor_cloud,
                      const ProximalSpec& prox, double lr, std::size_t batch_size,
                      Rng& rng) {
  if (shard_indices.empty()) throw ConfigError("sgd_epoch: agent shard is empty");
  if (batch_size == 0) throw ConfigError("sgd_epoch: batch_size must be >= 1");
  if (lr < 0.0) throw ConfigError("sgd_epoch: learning rate must be >= 0");

  std::vector<std::uint32_t> order(shard_indices.begin(), shard_indices.end());
  rng.shuffle(order);

  ParamVector cur = params;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Batch b = ds.make_batch({order.data() + start, end - start});
    LossGrad lg = loss_and_grad(cur, b, anchor_rsu, anchor_cloud, prox);
    kernels::axpy(-lr, lg.grad.data(), cur.data(), cur.size());
  }
  return cur;
}

double evaluate(const ParamVector& params, const Batch& test) {
  check_batch(params.arch, test);
  Scratch s(params.arch);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < test.rows; ++r) {
    hidden_and_logits(params, test.row(r), s);
    if (argmax_lowest(s.z2) == test.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.rows);
}

double evaluate(const ParamVector& params, const LabeledDataset& test) {
  if (test.size() == 0) throw ConfigError("evaluate: empty test set");
  if (test.feature_dim != static_cast<std::size_t>(params.arch.input_dim)) {
    throw ConfigError("evaluate: test feature dim does not match model input dim");
  }
  Scratch s(params.arch);
  std::vector<double> x(test.feature_dim);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < test.size(); ++r) {
    const float* src = test.features.data() + r * test.feature_dim;
    for (std::size_t c = 0; c < test.feature_dim; ++c) x[c] = src[c];
    hidden_and_logits(params, x, s);
    if (argmax_lowest(s.z2) == test.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace h2fed
