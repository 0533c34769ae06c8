#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pcr/rng.hpp"

namespace pcr::nn {

// Network math runs in 32-bit floats; define PCR_NN_FLOAT64 for a 64-bit
// test build (gradient checks tighten accordingly).
#ifdef PCR_NN_FLOAT64
using scalar = double;
#else
using scalar = float;
#endif

// Row-major 2D tensor.
struct Tensor2 {
  std::size_t rows = 0, cols = 0;
  std::vector<scalar> data;

  Tensor2() = default;
  Tensor2(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, scalar(0)) {}

  scalar& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  scalar at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return data.size(); }
  void set_zero() { std::fill(data.begin(), data.end(), scalar(0)); }
};

// One dense layer's parameters with matching gradient and Adam moment slots.
struct Param {
  Tensor2 w;               // in x out
  std::vector<scalar> b;   // out
  Tensor2 gw;
  std::vector<scalar> gb;
  Tensor2 mw, vw;
  std::vector<scalar> mb, vb;

  std::size_t fan_in() const { return w.rows; }
  std::size_t fan_out() const { return w.cols; }
};

// Named parameter collection. Iteration order is the sorted name order,
// which fixes the checkpoint blob layout.
class ParamStore {
 public:
  Param& add(const std::string& name, std::size_t in, std::size_t out);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  void zero_grads();

  std::map<std::string, Param>& entries() { return params_; }
  const std::map<std::string, Param>& entries() const { return params_; }

 private:
  std::map<std::string, Param> params_;
};

struct AdamState {
  std::int64_t step = 0;  // completed update count
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay_rate = 0.7;
  std::int64_t decay_every = 3000000;

  // lr * decay_rate^floor(t / decay_every) for step counter t.
  double effective_lr(std::int64_t t) const;
};

// y = x*W + b. Rows are processed independently so the result for a row
// depends only on that row's content (max-pool permutation invariance must
// be bit-exact).
Tensor2 dense_forward(const Tensor2& x, const Tensor2& w, const std::vector<scalar>& b);

// dx = dy*W^T (skipped when dx == nullptr); gw += x^T*dy; gb += colsum(dy).
void dense_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dy,
                    Tensor2* dx, Tensor2& gw, std::vector<scalar>& gb);

Tensor2 relu_forward(const Tensor2& x);
Tensor2 relu_backward(const Tensor2& x, const Tensor2& dy);

// Column-wise max over rows plus the attaining row index (lowest on ties).
void maxpool_points(const Tensor2& features, std::vector<scalar>& pooled,
                    std::vector<std::uint32_t>& argmax);
Tensor2 maxpool_backward(const std::vector<std::uint32_t>& argmax,
                         const std::vector<scalar>& dy, std::size_t n_rows);

// Inverted dropout: zero with probability p_drop, scale survivors by
// 1/(1-p_drop). Inference (training=false) passes through and keeps all.
Tensor2 dropout_forward(const Tensor2& x, double p_drop, Rng& rng, bool training,
                        std::vector<std::uint8_t>& mask);
Tensor2 dropout_backward(const std::vector<std::uint8_t>& mask, double p_drop,
                         const Tensor2& dy);

// Bias-corrected Adam over every parameter; gradients are zeroed afterwards.
void adam_step(ParamStore& params, AdamState& state);

struct LayerSpec {
  std::string name;
  std::size_t in = 0;
  std::size_t out = 0;
  double weight_scale = 1.0;  // extra factor on top of He-uniform
};

// He-uniform weights (bound sqrt(6/fan_in)), zero biases. Layers are drawn
// in list order; a fixed seed reproduces the store exactly.
ParamStore init_params(const std::vector<LayerSpec>& layers, Rng& rng);

}  // namespace pcr::nn
