#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcr/pcrnet.hpp"

namespace pcr {

// Flat key-value training configuration. The "preset" key seeds a bundle of
// values ("paper" or "tiny"); explicit keys after it override.
struct TrainConfig {
  std::string scope = "one-model";  // one-model | one-category | multi-category
  std::string variant = "iterative";
  std::string loss = "emd";  // emd | chamfer
  std::size_t points = 1024;
  std::size_t batch = 32;
  std::size_t epochs = 300;
  std::size_t steps_per_epoch = 0;  // 0: ceil(#templates / batch)
  double lr = 1e-3;
  double decay_rate = 0.7;
  std::int64_t decay_every = 3000000;
  double noise_lo = 0.0;
  double noise_hi = 0.0;
  std::size_t unroll = 0;  // 0: 8 for iterative, 1 for single_shot
  double angle_range_deg = 45.0;
  double trans_range = 1.0;
  double dropout = 0.5;
  std::uint64_t seed = 0;
  std::size_t width_divisor = 1;
  std::size_t checkpoint_every = 50;

  std::size_t effective_unroll() const;
  ModelConfig model_config() const;
};

// Throws on an unknown key or unparsable value, naming the key.
TrainConfig parse_train_config(std::istream& in);
TrainConfig load_train_config(const std::string& path);

struct TrainSample {
  PointCloud template_cloud;
  PointCloud source;  // add_gaussian_noise(apply_transform(gt, template), sigma)
  RigidTransform gt;
  double sigma = 0.0;
};

// Draws gt from random_transform and a per-sample sigma uniform in the
// configured noise range; noise is applied to the source only.
TrainSample make_sample(const PointCloud& tmpl, Rng& rng, const TrainConfig& config);

// Trainable model: network parameters plus everything needed to resume.
struct Model {
  ModelConfig config;
  nn::ParamStore params;
  nn::AdamState adam;
  std::size_t epochs_done = 0;
  TrainConfig train_config;
};

Model init_model(const TrainConfig& config);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);  // verifies the stored head shape

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
};

using ProgressSink = std::function<void(const EpochStats&)>;

// Runs the remaining epochs (model.epochs_done .. config.epochs). Each epoch
// reseeds from (seed, epoch) so a resumed run is bit-identical to an
// uninterrupted one. checkpoint_path may be empty to skip periodic saves.
// Throws if the loss turns non-finite, naming the step.
std::vector<EpochStats> train(Model& model, const std::vector<PointCloud>& templates,
                              const ProgressSink& sink, const std::string& checkpoint_path);

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path,
                       bool append);

}  // namespace pcr
