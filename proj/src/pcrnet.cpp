#include "pcr/pcrnet.hpp"

#include <chrono>
#include <stdexcept>

namespace pcr {

namespace {

constexpr double kFinalLayerScale = 0.01;

std::string head_name(std::size_t i) { return "head." + std::to_string(i); }

std::size_t scaled(std::size_t w, std::size_t divisor) {
  return std::max<std::size_t>(1, w / std::max<std::size_t>(1, divisor));
}

nn::Tensor2 concat_features(const GlobalFeature& a, const GlobalFeature& b) {
  nn::Tensor2 x(1, a.values.size() + b.values.size());
  std::copy(a.values.begin(), a.values.end(), x.data.begin());
  std::copy(b.values.begin(), b.values.end(),
            x.data.begin() + static_cast<std::ptrdiff_t>(a.values.size()));
  return x;
}

Pose7 row_to_pose(const nn::Tensor2& y) {
  Pose7 pose;
  for (int k = 0; k < 3; ++k) pose.t[k] = static_cast<double>(y.at(0, k));
  for (int k = 0; k < 4; ++k) pose.q_raw[k] = static_cast<double>(y.at(0, 3 + k));
  return pose;
}

}  // namespace

std::string variant_name(ModelVariant v) {
  return v == ModelVariant::kSingleShot ? "single_shot" : "iterative";
}

ModelVariant parse_variant(const std::string& name) {
  if (name == "single_shot") return ModelVariant::kSingleShot;
  if (name == "iterative") return ModelVariant::kIterative;
  throw std::invalid_argument("unknown model variant: " + name);
}

std::vector<nn::LayerSpec> ModelConfig::layer_specs() const {
  std::vector<nn::LayerSpec> specs = encoder.layer_specs();
  std::size_t in = 2 * encoder.feature_size();
  for (std::size_t i = 0; i < head.hidden.size(); ++i) {
    specs.push_back({head_name(i), in, head.hidden[i], 1.0});
    in = head.hidden[i];
  }
  specs.push_back({"head.out", in, 7, kFinalLayerScale});
  return specs;
}

ModelConfig make_single_shot_config(std::size_t width_divisor) {
  ModelConfig cfg;
  cfg.variant = ModelVariant::kSingleShot;
  cfg.encoder.widths = {scaled(64, width_divisor), scaled(64, width_divisor),
                        scaled(64, width_divisor), scaled(128, width_divisor),
                        scaled(1024, width_divisor)};
  cfg.head.hidden = {scaled(1024, width_divisor), scaled(1024, width_divisor),
                     scaled(512, width_divisor), scaled(512, width_divisor),
                     scaled(256, width_divisor)};
  cfg.head.dropout = 0.0;
  return cfg;
}

ModelConfig make_iterative_config(double dropout, std::size_t width_divisor) {
  ModelConfig cfg;
  cfg.variant = ModelVariant::kIterative;
  cfg.encoder.widths = {scaled(64, width_divisor), scaled(64, width_divisor),
                        scaled(64, width_divisor), scaled(128, width_divisor),
                        scaled(1024, width_divisor)};
  cfg.head.hidden = {scaled(1024, width_divisor), scaled(512, width_divisor),
                     scaled(256, width_divisor)};
  cfg.head.dropout = dropout;
  return cfg;
}

Pose7 head_forward(const nn::ParamStore& params, const HeadConfig& config,
                   const GlobalFeature& feat_s, const GlobalFeature& feat_t,
                   bool training, Rng* rng, HeadCache* cache) {
  if (feat_s.values.size() != feat_t.values.size()) {
    throw std::invalid_argument("head_forward: feature sizes differ");
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre_act.clear();
    cache->dropout_mask.clear();
    cache->dropout_active = false;
  }

  nn::Tensor2 x = concat_features(feat_s, feat_t);
  for (std::size_t i = 0; i < config.hidden.size(); ++i) {
    const nn::Param& p = params.get(head_name(i));
    if (p.fan_in() != x.cols || p.fan_out() != config.hidden[i]) {
      throw std::invalid_argument("head_forward: parameter shape mismatch at " + head_name(i));
    }
    nn::Tensor2 pre = nn::dense_forward(x, p.w, p.b);
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->pre_act.push_back(pre);
    }
    x = nn::relu_forward(pre);
  }

  const bool use_dropout = training && config.dropout > 0.0;
  if (use_dropout) {
    if (rng == nullptr) throw std::invalid_argument("head_forward: dropout needs an rng");
    std::vector<std::uint8_t> mask;
    x = nn::dropout_forward(x, config.dropout, *rng, true, mask);
    if (cache) {
      cache->dropout_mask = std::move(mask);
      cache->dropout_active = true;
    }
  }

  const nn::Param& out = params.get("head.out");
  if (out.fan_in() != x.cols || out.fan_out() != 7) {
    throw std::invalid_argument("head_forward: output layer shape mismatch");
  }
  nn::Tensor2 y = nn::dense_forward(x, out.w, out.b);
  if (cache) cache->inputs.push_back(std::move(x));
  return row_to_pose(y);
}

std::pair<std::vector<nn::scalar>, std::vector<nn::scalar>> head_backward(
    nn::ParamStore& params, const HeadConfig& config, const HeadCache& cache,
    const std::array<double, 7>& dpose) {
  if (cache.inputs.size() != config.hidden.size() + 1) {
    throw std::invalid_argument("head_backward: cache does not match config");
  }
  nn::Tensor2 dy(1, 7);
  for (int k = 0; k < 7; ++k) dy.at(0, k) = static_cast<nn::scalar>(dpose[k]);

  nn::Param& out = params.get("head.out");
  nn::Tensor2 d;
  nn::dense_backward(cache.inputs.back(), out.w, dy, &d, out.gw, out.gb);

  if (cache.dropout_active) {
    d = nn::dropout_backward(cache.dropout_mask, config.dropout, d);
  }

  for (std::size_t i = config.hidden.size(); i-- > 0;) {
    nn::Param& p = params.get(head_name(i));
    const nn::Tensor2 d_pre = nn::relu_backward(cache.pre_act[i], d);
    nn::dense_backward(cache.inputs[i], p.w, d_pre, &d, p.gw, p.gb);
  }

  const std::size_t half = d.cols / 2;
  std::vector<nn::scalar> dfeat_s(d.data.begin(), d.data.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<nn::scalar> dfeat_t(d.data.begin() + static_cast<std::ptrdiff_t>(half), d.data.end());
  return {std::move(dfeat_s), std::move(dfeat_t)};
}

nn::Tensor2 pose_apply_forward(const Pose7& pose, const nn::Tensor2& points, PoseCache* cache) {
  if (points.cols != 3) throw std::invalid_argument("pose_apply_forward: points must be N x 3");
  PoseCache local;
  PoseCache& c = cache ? *cache : local;
  c.raw_norm = pose.q_raw.norm();
  c.degenerate = c.raw_norm < 1e-12;
  if (c.degenerate) {
    c.q << 1, 0, 0, 0;
  } else {
    c.q = pose.q_raw / c.raw_norm;
  }
  c.rotation = quat_to_rotmat(Quaternion{c.q[0], c.q[1], c.q[2], c.q[3]});
  c.translation = pose.t;

  nn::Tensor2 out(points.rows, 3);
  for (std::size_t r = 0; r < points.rows; ++r) {
    const Eigen::Vector3d p(points.at(r, 0), points.at(r, 1), points.at(r, 2));
    const Eigen::Vector3d y = c.rotation * p + c.translation;
    for (int k = 0; k < 3; ++k) out.at(r, k) = static_cast<nn::scalar>(y[k]);
  }
  return out;
}

nn::Tensor2 pose_apply_backward(const PoseCache& cache, const nn::Tensor2& points_in,
                                const nn::Tensor2& d_out, std::array<double, 7>& dpose) {
  if (points_in.rows != d_out.rows || points_in.cols != 3 || d_out.cols != 3) {
    throw std::invalid_argument("pose_apply_backward: shape mismatch");
  }
  Eigen::Vector3d dt = Eigen::Vector3d::Zero();
  Eigen::Matrix3d dr = Eigen::Matrix3d::Zero();
  nn::Tensor2 d_in(points_in.rows, 3);
  for (std::size_t r = 0; r < points_in.rows; ++r) {
    const Eigen::Vector3d g(d_out.at(r, 0), d_out.at(r, 1), d_out.at(r, 2));
    const Eigen::Vector3d p(points_in.at(r, 0), points_in.at(r, 1), points_in.at(r, 2));
    dt += g;
    dr += g * p.transpose();
    const Eigen::Vector3d dp = cache.rotation.transpose() * g;
    for (int k = 0; k < 3; ++k) d_in.at(r, k) = static_cast<nn::scalar>(dp[k]);
  }

  Eigen::Vector4d dq_raw = Eigen::Vector4d::Zero();
  if (!cache.degenerate) {
    const double w = cache.q[0], x = cache.q[1], y = cache.q[2], z = cache.q[3];
    Eigen::Matrix3d dRdw, dRdx, dRdy, dRdz;
    dRdw << 0, -z, y, z, 0, -x, -y, x, 0;
    dRdx << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
    dRdy << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
    dRdz << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
    Eigen::Vector4d dq_unit;
    dq_unit[0] = 2.0 * dRdw.cwiseProduct(dr).sum();
    dq_unit[1] = 2.0 * dRdx.cwiseProduct(dr).sum();
    dq_unit[2] = 2.0 * dRdy.cwiseProduct(dr).sum();
    dq_unit[3] = 2.0 * dRdz.cwiseProduct(dr).sum();
    // q = q_raw / |q_raw|: project out the radial component.
    dq_raw = (dq_unit - cache.q * cache.q.dot(dq_unit)) / cache.raw_norm;
  }

  dpose = {dt[0], dt[1], dt[2], dq_raw[0], dq_raw[1], dq_raw[2], dq_raw[3]};
  return d_in;
}

RegistrationResult register_single_shot(const nn::ParamStore& params,
                                        const ModelConfig& config,
                                        const PointCloud& source, const PointCloud& tmpl) {
  const auto t_start = std::chrono::steady_clock::now();
  const GlobalFeature feat_s = encode(params, config.encoder, source);
  const GlobalFeature feat_t = encode(params, config.encoder, tmpl);
  const Pose7 pose = head_forward(params, config.head, feat_s, feat_t, false, nullptr);

  RegistrationResult result;
  result.transform = pose7_to_transform(pose);
  result.per_iteration = {result.transform};
  result.iterations_used = 1;
  result.converged = true;
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

RegistrationResult register_iterative(const nn::ParamStore& params, const ModelConfig& config,
                                      const PointCloud& source, const PointCloud& tmpl,
                                      int max_iter, double eps) {
  if (max_iter < 1) throw std::invalid_argument("register_iterative: max_iter must be >= 1");
  if (eps <= 0.0) throw std::invalid_argument("register_iterative: eps must be positive");

  const auto t_start = std::chrono::steady_clock::now();
  const GlobalFeature feat_t = encode(params, config.encoder, tmpl);

  RegistrationResult result;
  PointCloud current = source;
  RigidTransform cumulative;
  for (int iter = 0; iter < max_iter; ++iter) {
    const GlobalFeature feat_s = encode(params, config.encoder, current);
    const Pose7 pose = head_forward(params, config.head, feat_s, feat_t, false, nullptr);
    const RigidTransform step = pose7_to_transform(pose);

    current = apply_transform(step, current);
    const RigidTransform prev = cumulative;
    cumulative = compose(step, cumulative);
    result.per_iteration.push_back(step);
    if (convergence_delta(cumulative, prev) < eps) {
      result.converged = true;
      break;
    }
  }

  result.transform = cumulative;
  result.iterations_used = static_cast<int>(result.per_iteration.size());
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

nn::Tensor2 train_forward_iterative(const nn::ParamStore& params, const ModelConfig& config,
                                    const nn::Tensor2& source, const nn::Tensor2& tmpl,
                                    int n_iter, Rng& rng, TrainForwardCache& cache) {
  if (n_iter < 1) throw std::invalid_argument("train_forward_iterative: n_iter must be >= 1");
  cache.iterations.clear();
  cache.feat_template = encode(params, config.encoder, tmpl, &cache.encode_template);

  nn::Tensor2 points = source;
  for (int i = 0; i < n_iter; ++i) {
    TrainIterationCache it;
    const GlobalFeature feat_s = encode(params, config.encoder, points, &it.encode_source);
    it.pose7 = head_forward(params, config.head, feat_s, cache.feat_template, true, &rng,
                            &it.head);
    points = pose_apply_forward(it.pose7, points, &it.pose);
    cache.iterations.push_back(std::move(it));
  }
  return points;
}

void train_backward_iterative(nn::ParamStore& params, const ModelConfig& config,
                              const TrainForwardCache& cache, const nn::Tensor2& d_est) {
  std::vector<nn::scalar> dfeat_t_acc(config.encoder.feature_size(), nn::scalar(0));
  nn::Tensor2 d_cur = d_est;
  for (std::size_t i = cache.iterations.size(); i-- > 0;) {
    const TrainIterationCache& it = cache.iterations[i];
    const nn::Tensor2& points_in = it.encode_source.inputs.front();

    std::array<double, 7> dpose{};
    nn::Tensor2 d_prev = pose_apply_backward(it.pose, points_in, d_cur, dpose);

    auto [dfeat_s, dfeat_t] = head_backward(params, config.head, it.head, dpose);
    for (std::size_t k = 0; k < dfeat_t_acc.size(); ++k) dfeat_t_acc[k] += dfeat_t[k];

    const nn::Tensor2 d_enc = encode_backward(params, config.encoder, it.encode_source, dfeat_s);
    for (std::size_t k = 0; k < d_prev.data.size(); ++k) d_prev.data[k] += d_enc.data[k];
    d_cur = std::move(d_prev);
  }
  encode_backward(params, config.encoder, cache.encode_template, dfeat_t_acc);
}

}  // namespace pcr
