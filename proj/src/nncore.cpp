#include "pcr/nncore.hpp"

#include <Eigen/Core>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace pcr::nn {

namespace {

using MatMap = Eigen::Map<Eigen::Matrix<scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMap = Eigen::Map<const Eigen::Matrix<scalar, 1, Eigen::Dynamic>>;
using RowMap = Eigen::Map<Eigen::Matrix<scalar, 1, Eigen::Dynamic>>;

void check_shape(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("nncore shape mismatch: ") + what);
}

#ifndef NDEBUG
void debug_check_finite(const Tensor2& t) {
  for (scalar v : t.data) assert(std::isfinite(static_cast<double>(v)));
}
#else
void debug_check_finite(const Tensor2&) {}
#endif

}  // namespace

Param& ParamStore::add(const std::string& name, std::size_t in, std::size_t out) {
  if (params_.count(name)) throw std::invalid_argument("duplicate parameter name " + name);
  Param p;
  p.w = Tensor2(in, out);
  p.b.assign(out, scalar(0));
  p.gw = Tensor2(in, out);
  p.gb.assign(out, scalar(0));
  p.mw = Tensor2(in, out);
  p.vw = Tensor2(in, out);
  p.mb.assign(out, scalar(0));
  p.vb.assign(out, scalar(0));
  return params_.emplace(name, std::move(p)).first->second;
}

Param& ParamStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("unknown parameter " + name);
  return it->second;
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("unknown parameter " + name);
  return it->second;
}

bool ParamStore::contains(const std::string& name) const { return params_.count(name) != 0; }

void ParamStore::zero_grads() {
  for (auto& [name, p] : params_) {
    p.gw.set_zero();
    std::fill(p.gb.begin(), p.gb.end(), scalar(0));
  }
}

double AdamState::effective_lr(std::int64_t t) const {
  const auto k = decay_every > 0 ? t / decay_every : 0;
  return lr * std::pow(decay_rate, static_cast<double>(k));
}

Tensor2 dense_forward(const Tensor2& x, const Tensor2& w, const std::vector<scalar>& b) {
  check_shape(x.cols == w.rows, "dense_forward x/W");
  check_shape(b.size() == w.cols, "dense_forward W/b");
  Tensor2 y(x.rows, w.cols);
  ConstMatMap wm(w.data.data(), static_cast<Eigen::Index>(w.rows),
                 static_cast<Eigen::Index>(w.cols));
  ConstRowMap bm(b.data(), static_cast<Eigen::Index>(b.size()));
  for (std::size_t r = 0; r < x.rows; ++r) {
    ConstRowMap xr(&x.data[r * x.cols], static_cast<Eigen::Index>(x.cols));
    RowMap yr(&y.data[r * y.cols], static_cast<Eigen::Index>(y.cols));
    yr = xr * wm + bm;
  }
  debug_check_finite(y);
  return y;
}

void dense_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dy,
                    Tensor2* dx, Tensor2& gw, std::vector<scalar>& gb) {
  check_shape(x.cols == w.rows && dy.cols == w.cols && dy.rows == x.rows, "dense_backward");
  check_shape(gw.rows == w.rows && gw.cols == w.cols && gb.size() == w.cols,
              "dense_backward grad slots");
  ConstMatMap xm(x.data.data(), static_cast<Eigen::Index>(x.rows),
                 static_cast<Eigen::Index>(x.cols));
  ConstMatMap wm(w.data.data(), static_cast<Eigen::Index>(w.rows),
                 static_cast<Eigen::Index>(w.cols));
  ConstMatMap dym(dy.data.data(), static_cast<Eigen::Index>(dy.rows),
                  static_cast<Eigen::Index>(dy.cols));
  if (dx != nullptr) {
    *dx = Tensor2(x.rows, x.cols);
    MatMap dxm(dx->data.data(), static_cast<Eigen::Index>(x.rows),
               static_cast<Eigen::Index>(x.cols));
    dxm.noalias() = dym * wm.transpose();
  }
  MatMap gwm(gw.data.data(), static_cast<Eigen::Index>(gw.rows),
             static_cast<Eigen::Index>(gw.cols));
  gwm.noalias() += xm.transpose() * dym;
  RowMap gbm(gb.data(), static_cast<Eigen::Index>(gb.size()));
  gbm.noalias() += dym.colwise().sum();
}

Tensor2 relu_forward(const Tensor2& x) {
  Tensor2 y = x;
  for (auto& v : y.data) {
    if (v < scalar(0)) v = scalar(0);
  }
  return y;
}

Tensor2 relu_backward(const Tensor2& x, const Tensor2& dy) {
  check_shape(x.rows == dy.rows && x.cols == dy.cols, "relu_backward");
  Tensor2 dx(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    dx.data[i] = x.data[i] > scalar(0) ? dy.data[i] : scalar(0);
  }
  return dx;
}

void maxpool_points(const Tensor2& features, std::vector<scalar>& pooled,
                    std::vector<std::uint32_t>& argmax) {
  check_shape(features.rows >= 1, "maxpool_points needs at least one row");
  pooled.assign(features.cols, scalar(0));
  argmax.assign(features.cols, 0);
  for (std::size_t c = 0; c < features.cols; ++c) pooled[c] = features.at(0, c);
  for (std::size_t r = 1; r < features.rows; ++r) {
    const scalar* row = &features.data[r * features.cols];
    for (std::size_t c = 0; c < features.cols; ++c) {
      if (row[c] > pooled[c]) {
        pooled[c] = row[c];
        argmax[c] = static_cast<std::uint32_t>(r);
      }
    }
  }
}

Tensor2 maxpool_backward(const std::vector<std::uint32_t>& argmax,
                         const std::vector<scalar>& dy, std::size_t n_rows) {
  check_shape(argmax.size() == dy.size(), "maxpool_backward");
  Tensor2 dx(n_rows, dy.size());
  for (std::size_t c = 0; c < dy.size(); ++c) {
    dx.at(argmax[c], c) += dy[c];
  }
  return dx;
}

Tensor2 dropout_forward(const Tensor2& x, double p_drop, Rng& rng, bool training,
                        std::vector<std::uint8_t>& mask) {
  if (p_drop < 0.0 || p_drop >= 1.0) throw std::invalid_argument("dropout p must be in [0,1)");
  if (!training || p_drop == 0.0) {
    mask.assign(x.data.size(), 1);
    return x;
  }
  const scalar keep_scale = static_cast<scalar>(1.0 / (1.0 - p_drop));
  mask.assign(x.data.size(), 0);
  Tensor2 y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    if (rng.uniform() >= p_drop) {
      mask[i] = 1;
      y.data[i] = x.data[i] * keep_scale;
    }
  }
  return y;
}

Tensor2 dropout_backward(const std::vector<std::uint8_t>& mask, double p_drop,
                         const Tensor2& dy) {
  check_shape(mask.size() == dy.data.size(), "dropout_backward");
  const scalar keep_scale = static_cast<scalar>(1.0 / (1.0 - p_drop));
  Tensor2 dx(dy.rows, dy.cols);
  for (std::size_t i = 0; i < dy.data.size(); ++i) {
    dx.data[i] = mask[i] ? dy.data[i] * keep_scale : scalar(0);
  }
  return dx;
}

namespace {

void adam_update(std::vector<scalar>& theta, std::vector<scalar>& g,
                 std::vector<scalar>& m, std::vector<scalar>& v,
                 const AdamState& s, double lr_eff, double bc1, double bc2) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double gi = static_cast<double>(g[i]);
    const double mi = s.beta1 * static_cast<double>(m[i]) + (1.0 - s.beta1) * gi;
    const double vi = s.beta2 * static_cast<double>(v[i]) + (1.0 - s.beta2) * gi * gi;
    m[i] = static_cast<scalar>(mi);
    v[i] = static_cast<scalar>(vi);
    const double m_hat = mi / bc1;
    const double v_hat = vi / bc2;
    theta[i] -= static_cast<scalar>(lr_eff * m_hat / (std::sqrt(v_hat) + s.eps));
    g[i] = scalar(0);
  }
}

}  // namespace

void adam_step(ParamStore& params, AdamState& state) {
  state.step += 1;
  const auto t = state.step;
  const double lr_eff = state.effective_lr(t);
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(t));
  for (auto& [name, p] : params.entries()) {
    adam_update(p.w.data, p.gw.data, p.mw.data, p.vw.data, state, lr_eff, bc1, bc2);
    adam_update(p.b, p.gb, p.mb, p.vb, state, lr_eff, bc1, bc2);
  }
}

ParamStore init_params(const std::vector<LayerSpec>& layers, Rng& rng) {
  ParamStore store;
  for (const auto& spec : layers) {
    Param& p = store.add(spec.name, spec.in, spec.out);
    const double bound =
        std::sqrt(6.0 / static_cast<double>(spec.in)) * spec.weight_scale;
    for (auto& w : p.w.data) {
      w = static_cast<scalar>(rng.uniform(-bound, bound));
    }
  }
  return store;
}

}  // namespace pcr::nn
