#include <doctest.h>

#include <sstream>

#include "pcr/trainer.hpp"
#include "testing_util.hpp"

using namespace pcr;

namespace {

// Small but trainable setup: one template, modest widths, short epochs.
TrainConfig smoke_config() {
  TrainConfig cfg;
  cfg.variant = "iterative";
  cfg.width_divisor = 16;
  cfg.points = 16;
  cfg.batch = 2;
  cfg.epochs = 2;
  cfg.steps_per_epoch = 2;
  cfg.unroll = 2;
  cfg.noise_lo = 0.0;
  cfg.noise_hi = 0.0;
  cfg.angle_range_deg = 10.0;
  cfg.trans_range = 0.1;
  cfg.dropout = 0.0;
  cfg.seed = 5;
  return cfg;
}

std::vector<PointCloud> one_template(std::size_t points, std::uint64_t seed) {
  Rng rng(seed);
  return {normalize_unit_box(testutil::random_cloud(rng, points))};
}

}  // namespace

TEST_CASE("config parsing: defaults, presets, overrides") {
  std::istringstream empty("");
  const TrainConfig defaults = parse_train_config(empty);
  CHECK(defaults.points == 1024);
  CHECK(defaults.batch == 32);
  CHECK(defaults.epochs == 300);
  CHECK(defaults.lr == 1e-3);
  CHECK(defaults.decay_rate == 0.7);
  CHECK(defaults.decay_every == 3000000);
  CHECK(defaults.angle_range_deg == 45.0);
  CHECK(defaults.trans_range == 1.0);
  CHECK(defaults.effective_unroll() == 8);

  std::istringstream tiny("preset = tiny\n");
  const TrainConfig t = parse_train_config(tiny);
  CHECK(t.width_divisor == 8);
  CHECK(t.points == 128);
  CHECK(t.epochs == 50);

  std::istringstream overridden("preset = tiny\npoints = 64\nvariant = single_shot\n");
  const TrainConfig o = parse_train_config(overridden);
  CHECK(o.points == 64);
  CHECK(o.effective_unroll() == 1);

  std::istringstream comments("# comment\n\nseed = 9\n");
  CHECK(parse_train_config(comments).seed == 9);
}

TEST_CASE("config parsing rejects unknown keys and bad values by name") {
  std::istringstream unknown("bogus_key = 3\n");
  CHECK_THROWS_WITH_AS(parse_train_config(unknown), doctest::Contains("bogus_key"),
                       std::runtime_error);

  std::istringstream bad_value("batch = banana\n");
  CHECK_THROWS_WITH_AS(parse_train_config(bad_value), doctest::Contains("batch"),
                       std::runtime_error);

  std::istringstream bad_loss("loss = l2\n");
  CHECK_THROWS_WITH_AS(parse_train_config(bad_loss), doctest::Contains("loss"),
                       std::runtime_error);

  std::istringstream bad_noise("noise_lo = 0.5\nnoise_hi = 0.1\n");
  CHECK_THROWS_AS(parse_train_config(bad_noise), std::runtime_error);
}

TEST_CASE("make_sample construction contract") {
  TrainConfig cfg = smoke_config();
  const std::vector<PointCloud> templates = one_template(12, 3);

  Rng rng(7);
  const TrainSample sample = make_sample(templates[0], rng, cfg);
  // No noise: the source is exactly the transformed template.
  const PointCloud expected = apply_transform(sample.gt, templates[0]);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK((sample.source.points[i] - expected.points[i]).norm() == 0.0);
  }
  CHECK(sample.sigma == 0.0);

  Rng r1(9), r2(9);
  const TrainSample a = make_sample(templates[0], r1, cfg);
  const TrainSample b = make_sample(templates[0], r2, cfg);
  CHECK((a.gt.homogeneous() - b.gt.homogeneous()).norm() == 0.0);
  for (std::size_t i = 0; i < a.source.size(); ++i) {
    CHECK((a.source.points[i] - b.source.points[i]).norm() == 0.0);
  }

  cfg.noise_lo = 0.01;
  cfg.noise_hi = 0.04;
  Rng r3(11);
  const TrainSample noisy = make_sample(templates[0], r3, cfg);
  CHECK(noisy.sigma >= 0.01);
  CHECK(noisy.sigma <= 0.04);
}

TEST_CASE("init_model is deterministic and matches the config") {
  const TrainConfig cfg = smoke_config();
  const Model a = init_model(cfg);
  const Model b = init_model(cfg);
  for (const auto& [name, p] : a.params.entries()) {
    CHECK(p.w.data == b.params.get(name).w.data);
  }
  CHECK(a.config.variant == ModelVariant::kIterative);
  CHECK(a.adam.lr == cfg.lr);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  TrainConfig cfg = smoke_config();
  cfg.lr = 0.0;
  Model model = init_model(cfg);
  const Model before = model;
  train(model, one_template(cfg.points, 3), nullptr, "");
  for (const auto& [name, p] : model.params.entries()) {
    CHECK(p.w.data == before.params.get(name).w.data);
    CHECK(p.b == before.params.get(name).b);
  }
}

TEST_CASE("training history is finite, deterministic, and loss decreases") {
  TrainConfig cfg = smoke_config();
  cfg.epochs = 10;
  cfg.steps_per_epoch = 4;
  cfg.batch = 4;
  const std::vector<PointCloud> templates = one_template(cfg.points, 3);

  Model m1 = init_model(cfg);
  const auto h1 = train(m1, templates, nullptr, "");
  Model m2 = init_model(cfg);
  const auto h2 = train(m2, templates, nullptr, "");

  REQUIRE(h1.size() == 10);
  for (std::size_t i = 0; i < h1.size(); ++i) {
    CHECK(std::isfinite(h1[i].mean_loss));
    CHECK(h1[i].mean_loss == h2[i].mean_loss);  // bit-deterministic
    CHECK(h1[i].epoch == i + 1);
  }
  // The overfit direction: later epochs beat the first.
  CHECK(h1.back().mean_loss < h1.front().mean_loss);
}

TEST_CASE("model save/load round trip and resume correctness") {
  testutil::TempDir dir("trainer");
  TrainConfig cfg = smoke_config();
  cfg.epochs = 4;
  cfg.checkpoint_every = 2;
  const std::vector<PointCloud> templates = one_template(cfg.points, 3);

  // Uninterrupted run.
  Model straight = init_model(cfg);
  train(straight, templates, nullptr, "");

  // Interrupted at epoch 2, then resumed from the checkpoint file.
  TrainConfig half = cfg;
  half.epochs = 2;
  Model first = init_model(half);
  train(first, templates, nullptr, dir.file("half.ckpt"));
  Model resumed = load_model(dir.file("half.ckpt"));
  CHECK(resumed.epochs_done == 2);
  resumed.train_config.epochs = 4;
  train(resumed, templates, nullptr, "");

  for (const auto& [name, p] : straight.params.entries()) {
    const nn::Param& q = resumed.params.get(name);
    CHECK(p.w.data == q.w.data);
    CHECK(p.b == q.b);
    CHECK(p.mw.data == q.mw.data);
    CHECK(p.vw.data == q.vw.data);
  }
  CHECK(straight.adam.step == resumed.adam.step);

  // Variant tag survives and the head shape is verified on load.
  save_model(straight, dir.file("full.ckpt"));
  const Model loaded = load_model(dir.file("full.ckpt"));
  CHECK(loaded.config.variant == ModelVariant::kIterative);
  CHECK(loaded.config.head.hidden == straight.config.head.hidden);
}

TEST_CASE("history csv format and append") {
  testutil::TempDir dir("history");
  std::vector<EpochStats> history = {{1, 0.5, 1e-3}, {2, 0.25, 1e-3}};
  write_history_csv(history, dir.file("h.csv"), false);
  std::ifstream in(dir.file("h.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,mean_loss,lr");
  std::getline(in, line);
  CHECK(line == "1,0.5,0.001");

  write_history_csv({{3, 0.1, 1e-3}}, dir.file("h.csv"), true);
  std::ifstream in2(dir.file("h.csv"));
  int lines = 0;
  while (std::getline(in2, line)) ++lines;
  CHECK(lines == 4);  // header + 3 rows, no duplicate header
}

TEST_CASE("train rejects an empty template set") {
  const TrainConfig cfg = smoke_config();
  Model model = init_model(cfg);
  CHECK_THROWS_AS(train(model, {}, nullptr, ""), std::invalid_argument);
}
