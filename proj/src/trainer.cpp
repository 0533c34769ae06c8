#include "pcr/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pcr/checkpoint.hpp"
#include "pcr/losses.hpp"
#include "pcr/meshio.hpp"

namespace pcr {

namespace {

[[noreturn]] void config_fail(const std::string& key, const std::string& why) {
  throw std::runtime_error("config key '" + key + "': " + why);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) config_fail(key, "bad number '" + value + "'");
    return v;
  } catch (const std::logic_error&) {
    config_fail(key, "bad number '" + value + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) config_fail(key, "bad integer '" + value + "'");
    return v;
  } catch (const std::logic_error&) {
    config_fail(key, "bad integer '" + value + "'");
  }
}

void apply_preset(TrainConfig& cfg, const std::string& name) {
  if (name == "paper") {
    cfg.width_divisor = 1;
    cfg.points = 1024;
    cfg.epochs = 300;
  } else if (name == "tiny") {
    cfg.width_divisor = 8;
    cfg.points = 128;
    cfg.epochs = 50;
  } else {
    config_fail("preset", "unknown preset '" + name + "' (paper|tiny)");
  }
}

void apply_key(TrainConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "preset") {
    apply_preset(cfg, value);
  } else if (key == "scope") {
    if (value != "one-model" && value != "one-category" && value != "multi-category") {
      config_fail(key, "expected one-model|one-category|multi-category");
    }
    cfg.scope = value;
  } else if (key == "variant") {
    parse_variant(value);  // validates
    cfg.variant = value;
  } else if (key == "loss") {
    if (value != "emd" && value != "chamfer") config_fail(key, "expected emd|chamfer");
    cfg.loss = value;
  } else if (key == "points") {
    cfg.points = to_u64(key, value);
  } else if (key == "batch") {
    cfg.batch = to_u64(key, value);
  } else if (key == "epochs") {
    cfg.epochs = to_u64(key, value);
  } else if (key == "steps_per_epoch") {
    cfg.steps_per_epoch = to_u64(key, value);
  } else if (key == "lr") {
    cfg.lr = to_double(key, value);
  } else if (key == "decay_rate") {
    cfg.decay_rate = to_double(key, value);
  } else if (key == "decay_every") {
    cfg.decay_every = static_cast<std::int64_t>(to_u64(key, value));
  } else if (key == "noise_lo") {
    cfg.noise_lo = to_double(key, value);
  } else if (key == "noise_hi") {
    cfg.noise_hi = to_double(key, value);
  } else if (key == "unroll") {
    cfg.unroll = to_u64(key, value);
  } else if (key == "angle_range_deg") {
    cfg.angle_range_deg = to_double(key, value);
  } else if (key == "trans_range") {
    cfg.trans_range = to_double(key, value);
  } else if (key == "dropout") {
    cfg.dropout = to_double(key, value);
  } else if (key == "seed") {
    cfg.seed = to_u64(key, value);
  } else if (key == "width_divisor") {
    cfg.width_divisor = to_u64(key, value);
  } else if (key == "checkpoint_every") {
    cfg.checkpoint_every = to_u64(key, value);
  } else {
    throw std::runtime_error("unknown config key '" + key + "'");
  }
}

void validate(const TrainConfig& cfg) {
  if (cfg.batch < 1) config_fail("batch", "must be >= 1");
  if (cfg.points < 1) config_fail("points", "must be >= 1");
  if (cfg.noise_lo < 0 || cfg.noise_hi < cfg.noise_lo) {
    config_fail("noise_lo/noise_hi", "need 0 <= noise_lo <= noise_hi");
  }
  if (cfg.angle_range_deg < 0) config_fail("angle_range_deg", "must be >= 0");
  if (cfg.trans_range < 0) config_fail("trans_range", "must be >= 0");
  if (cfg.dropout < 0 || cfg.dropout >= 1) config_fail("dropout", "must be in [0, 1)");
  if (cfg.width_divisor < 1) config_fail("width_divisor", "must be >= 1");
  if (cfg.checkpoint_every < 1) config_fail("checkpoint_every", "must be >= 1");
}

PointCloud tensor_to_cloud(const nn::Tensor2& t) {
  PointCloud cloud;
  cloud.points.reserve(t.rows);
  for (std::size_t r = 0; r < t.rows; ++r) {
    cloud.points.emplace_back(t.at(r, 0), t.at(r, 1), t.at(r, 2));
  }
  return cloud;
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"scope", c.scope},
          {"variant", c.variant},
          {"loss", c.loss},
          {"points", c.points},
          {"batch", c.batch},
          {"epochs", c.epochs},
          {"steps_per_epoch", c.steps_per_epoch},
          {"lr", c.lr},
          {"decay_rate", c.decay_rate},
          {"decay_every", c.decay_every},
          {"noise_lo", c.noise_lo},
          {"noise_hi", c.noise_hi},
          {"unroll", c.unroll},
          {"angle_range_deg", c.angle_range_deg},
          {"trans_range", c.trans_range},
          {"dropout", c.dropout},
          {"seed", c.seed},
          {"width_divisor", c.width_divisor},
          {"checkpoint_every", c.checkpoint_every}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.scope = j.value("scope", c.scope);
  c.variant = j.value("variant", c.variant);
  c.loss = j.value("loss", c.loss);
  c.points = j.value("points", c.points);
  c.batch = j.value("batch", c.batch);
  c.epochs = j.value("epochs", c.epochs);
  c.steps_per_epoch = j.value("steps_per_epoch", c.steps_per_epoch);
  c.lr = j.value("lr", c.lr);
  c.decay_rate = j.value("decay_rate", c.decay_rate);
  c.decay_every = j.value("decay_every", c.decay_every);
  c.noise_lo = j.value("noise_lo", c.noise_lo);
  c.noise_hi = j.value("noise_hi", c.noise_hi);
  c.unroll = j.value("unroll", c.unroll);
  c.angle_range_deg = j.value("angle_range_deg", c.angle_range_deg);
  c.trans_range = j.value("trans_range", c.trans_range);
  c.dropout = j.value("dropout", c.dropout);
  c.seed = j.value("seed", c.seed);
  c.width_divisor = j.value("width_divisor", c.width_divisor);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  return c;
}

}  // namespace

std::size_t TrainConfig::effective_unroll() const {
  if (unroll > 0) return unroll;
  return variant == "single_shot" ? 1 : 8;
}

ModelConfig TrainConfig::model_config() const {
  if (parse_variant(variant) == ModelVariant::kSingleShot) {
    return make_single_shot_config(width_divisor);
  }
  return make_iterative_config(dropout, width_divisor);
}

TrainConfig parse_train_config(std::istream& in) {
  TrainConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t start = line.find_first_not_of(" \t\r\n");
    if (start == std::string::npos || line[start] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    auto trim = [](std::string s) {
      const std::size_t a = s.find_first_not_of(" \t\r\n");
      if (a == std::string::npos) return std::string();
      const std::size_t b = s.find_last_not_of(" \t\r\n");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key or value");
    }
    apply_key(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse_train_config(in);
}

TrainSample make_sample(const PointCloud& tmpl, Rng& rng, const TrainConfig& config) {
  TrainSample sample;
  sample.template_cloud = tmpl;
  sample.gt = random_transform(rng, config.angle_range_deg, config.trans_range);
  sample.sigma = config.noise_hi > config.noise_lo
                     ? rng.uniform(config.noise_lo, config.noise_hi)
                     : config.noise_lo;
  sample.source = add_gaussian_noise(apply_transform(sample.gt, tmpl), sample.sigma, rng);
  return sample;
}

Model init_model(const TrainConfig& config) {
  validate(config);
  Model model;
  model.train_config = config;
  model.config = config.model_config();
  Rng rng(mix_seed(config.seed, 0));
  model.params = nn::init_params(model.config.layer_specs(), rng);
  model.adam.lr = config.lr;
  model.adam.decay_rate = config.decay_rate;
  model.adam.decay_every = config.decay_every;
  return model;
}

void save_model(const Model& model, const std::string& path) {
  nlohmann::json extra;
  extra["variant"] = variant_name(model.config.variant);
  extra["encoder_widths"] = model.config.encoder.widths;
  extra["head_hidden"] = model.config.head.hidden;
  extra["head_dropout"] = model.config.head.dropout;
  extra["epochs_done"] = model.epochs_done;
  extra["train_config"] = config_to_json(model.train_config);
  nn::save_checkpoint(path, model.params, model.adam, extra);
}

Model load_model(const std::string& path) {
  nn::Checkpoint ckpt = nn::load_checkpoint(path);
  Model model;
  model.config.variant = parse_variant(ckpt.manifest.at("variant").get<std::string>());
  model.config.encoder.widths =
      ckpt.manifest.at("encoder_widths").get<std::vector<std::size_t>>();
  model.config.head.hidden = ckpt.manifest.at("head_hidden").get<std::vector<std::size_t>>();
  model.config.head.dropout = ckpt.manifest.value("head_dropout", 0.0);
  model.epochs_done = ckpt.manifest.value("epochs_done", std::size_t{0});
  if (ckpt.manifest.contains("train_config")) {
    model.train_config = config_from_json(ckpt.manifest.at("train_config"));
  }
  model.adam = ckpt.adam;
  model.params = std::move(ckpt.params);

  // The stored layers must match the declared architecture exactly.
  for (const auto& spec : model.config.layer_specs()) {
    if (!model.params.contains(spec.name)) {
      throw std::runtime_error(path + ": checkpoint is missing layer " + spec.name);
    }
    const nn::Param& p = model.params.get(spec.name);
    if (p.fan_in() != spec.in || p.fan_out() != spec.out) {
      throw std::runtime_error(path + ": layer " + spec.name +
                               " shape does not match the declared head");
    }
  }
  return model;
}

std::vector<EpochStats> train(Model& model, const std::vector<PointCloud>& templates,
                              const ProgressSink& sink, const std::string& checkpoint_path) {
  const TrainConfig& cfg = model.train_config;
  if (templates.empty()) throw std::invalid_argument("train: empty template set");
  for (const auto& t : templates) {
    if (t.empty()) throw std::invalid_argument("train: empty template cloud");
  }

  const std::size_t steps_per_epoch =
      cfg.steps_per_epoch > 0 ? cfg.steps_per_epoch
                              : (templates.size() + cfg.batch - 1) / cfg.batch;
  const int unroll = static_cast<int>(cfg.effective_unroll());
  const double inv_batch = 1.0 / static_cast<double>(cfg.batch);

  std::vector<EpochStats> history;
  std::vector<std::size_t> order(templates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = model.epochs_done + 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, epoch));
    rng.shuffle(order);
    std::size_t cursor = 0;
    double epoch_loss = 0.0;

    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      model.params.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < cfg.batch; ++b) {
        if (cursor == order.size()) {
          rng.shuffle(order);
          cursor = 0;
        }
        const PointCloud& tmpl = templates[order[cursor++]];
        const TrainSample sample = make_sample(tmpl, rng, cfg);

        const nn::Tensor2 src = cloud_to_tensor(sample.source);
        const nn::Tensor2 tpl = cloud_to_tensor(sample.template_cloud);
        TrainForwardCache cache;
        const nn::Tensor2 est =
            train_forward_iterative(model.params, model.config, src, tpl, unroll, rng, cache);

        const PointCloud est_cloud = tensor_to_cloud(est);
        const LossValue lv = cfg.loss == "chamfer" ? chamfer(est_cloud, sample.template_cloud)
                                                   : emd(est_cloud, sample.template_cloud);
        if (!std::isfinite(lv.value)) {
          throw std::runtime_error("non-finite loss at optimizer step " +
                                   std::to_string(model.adam.step + 1) + " (epoch " +
                                   std::to_string(epoch) + ")");
        }
        batch_loss += lv.value;

        nn::Tensor2 d_est(est.rows, 3);
        for (std::size_t r = 0; r < est.rows; ++r) {
          for (int k = 0; k < 3; ++k) {
            d_est.at(r, k) = static_cast<nn::scalar>(lv.dest_cloud_grad[r][k] * inv_batch);
          }
        }
        train_backward_iterative(model.params, model.config, cache, d_est);
      }
      nn::adam_step(model.params, model.adam);
      epoch_loss += batch_loss * inv_batch;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = epoch_loss / static_cast<double>(steps_per_epoch);
    stats.lr = model.adam.effective_lr(model.adam.step);
    history.push_back(stats);
    model.epochs_done = epoch;
    if (sink) sink(stats);

    if (!checkpoint_path.empty() &&
        (epoch % cfg.checkpoint_every == 0 || epoch == cfg.epochs)) {
      save_model(model, checkpoint_path);
    }
  }
  return history;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path,
                       bool append) {
  const bool exists = append && std::filesystem::exists(path) &&
                      std::filesystem::file_size(path) > 0;
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  if (!exists) out << "epoch,mean_loss,lr\n";
  char buf[96];
  for (const auto& s : history) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g\n", s.epoch, s.mean_loss, s.lr);
    out << buf;
  }
}

}  // namespace pcr
