// Command line front end for the pcr toolkit. Talks to the core exclusively
// through the C API in pcr/pcr.h. Exit codes: 0 ok, 2 usage/config errors,
// 1 runtime failures.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcr/pcr.h"

namespace {

int exit_code_for(pcr_status status) {
  switch (status) {
    case PCR_OK:
      return 0;
    case PCR_ERROR_INVALID_ARGUMENT:
    case PCR_ERROR_IO:
    case PCR_ERROR_CONFIG:
      return 2;
    default:
      return 1;
  }
}

int report_failure(pcr_status status) {
  std::fprintf(stderr, "error: %s\n", pcr_last_error());
  return exit_code_for(status);
}

std::uint64_t seed_or_env(const CLI::Option* opt, std::uint64_t value) {
  if (opt->count() > 0) return value;
  if (const char* env = std::getenv("PCR_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return value;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void print_transform(const pcr_transform& t) {
  for (int i = 0; i < 4; ++i) {
    std::printf("%.16g %.16g %.16g %.16g\n", t.m[i * 4 + 0], t.m[i * 4 + 1], t.m[i * 4 + 2],
                t.m[i * 4 + 3]);
  }
}

struct CloudGuard {
  pcr_cloud* ptr = nullptr;
  ~CloudGuard() { pcr_cloud_free(ptr); }
};

struct ModelGuard {
  pcr_model* ptr = nullptr;
  ~ModelGuard() { pcr_model_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcr: point cloud registration toolkit"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "Sample a point cloud from an OFF mesh");
  std::string sample_off, sample_out;
  std::uint32_t sample_points = 1024;
  std::uint64_t sample_seed = 0;
  sample->add_option("--off", sample_off, "input OFF mesh")->required();
  sample->add_option("--points", sample_points, "points per cloud");
  auto* sample_seed_opt = sample->add_option("--seed", sample_seed, "sampling seed");
  sample->add_option("--out", sample_out, "output cloud (.xyz for ASCII, else binary)")
      ->required();

  // train
  auto* train = app.add_subcommand("train", "Train a PCRNet model");
  std::string train_config, train_data, train_out, train_history, train_resume;
  train->add_option("--config", train_config, "key-value config file")->required();
  train->add_option("--data", train_data, "directory of template clouds")->required();
  train->add_option("--out", train_out, "output checkpoint")->required();
  train->add_option("--history", train_history, "history CSV (default <out>.history.csv)");
  train->add_option("--resume", train_resume, "checkpoint to continue from");

  // register
  auto* reg = app.add_subcommand("register", "Register a source cloud onto a template");
  std::string reg_method, reg_ckpt, reg_source, reg_template, reg_gt;
  int reg_max_iter = 0;
  double reg_eps = 1e-7;
  reg->add_option("--method", reg_method, "pcrnet | pcrnet-iter | icp")->required();
  reg->add_option("--ckpt", reg_ckpt, "model checkpoint (pcrnet methods)");
  reg->add_option("--source", reg_source, "source cloud file")->required();
  reg->add_option("--template", reg_template, "template cloud file")->required();
  auto* reg_max_iter_opt =
      reg->add_option("--max-iter", reg_max_iter, "iteration cap (default 20, icp 100)");
  reg->add_option("--eps", reg_eps, "convergence threshold");
  reg->add_option("--gt", reg_gt, "ground-truth transform file; prints errors");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Run the evaluation protocol");
  std::string bench_methods, bench_templates, bench_out;
  std::vector<std::string> bench_ckpts;
  std::uint32_t bench_pairs = 100;
  double bench_sigma = 0.0, bench_eps = 1e-7;
  double bench_angle = 45.0, bench_trans = 1.0;
  std::uint64_t bench_seed = 0;
  int bench_threads = 1, bench_max_iter = 20, bench_icp_max_iter = 100;
  std::uint32_t bench_divisor = 1;
  bool bench_no_timing = false;
  bench->add_option("--methods", bench_methods, "comma list: icp,pcrnet,pcrnet-iter")
      ->required();
  bench->add_option("--templates", bench_templates, "directory of template clouds")
      ->required();
  bench->add_option("--pairs", bench_pairs, "number of test pairs");
  bench->add_option("--noise-sigma", bench_sigma, "gaussian noise sigma on sources");
  bench->add_option("--angle-range", bench_angle, "euler angle range, degrees");
  bench->add_option("--trans-range", bench_trans, "translation range");
  auto* bench_seed_opt = bench->add_option("--seed", bench_seed, "pair generation seed");
  bench->add_option("--out", bench_out, "output directory for CSV reports")->required();
  bench->add_option("--ckpt", bench_ckpts, "checkpoint(s); matched to methods by variant");
  bench->add_option("--threads", bench_threads, "worker threads (1 for determinism)");
  bench->add_option("--max-iter", bench_max_iter, "pcrnet-iter iteration cap");
  bench->add_option("--icp-max-iter", bench_icp_max_iter, "icp iteration cap");
  bench->add_option("--eps", bench_eps, "convergence threshold");
  bench->add_option("--width-divisor", bench_divisor,
                    "width divisor for untrained fallback models");
  bench->add_flag("--no-timing", bench_no_timing, "write zeros in time columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sample->parsed()) {
    CloudGuard cloud;
    pcr_status status = pcr_cloud_from_off(sample_off.c_str(), sample_points,
                                           seed_or_env(sample_seed_opt, sample_seed),
                                           &cloud.ptr);
    if (status != PCR_OK) return report_failure(status);
    status = pcr_cloud_save(cloud.ptr, sample_out.c_str(), ends_with(sample_out, ".xyz") ? 0 : 1);
    if (status != PCR_OK) return report_failure(status);
    std::fprintf(stderr, "wrote %u points to %s\n", pcr_cloud_size(cloud.ptr),
                 sample_out.c_str());
    return 0;
  }

  if (train->parsed()) {
    if (train_history.empty()) train_history = train_out + ".history.csv";
    auto progress = [](std::uint64_t epoch, double loss, double lr, void*) {
      std::fprintf(stderr, "epoch %" PRIu64 "  loss %.6g  lr %.3g\n", epoch, loss, lr);
    };
    const pcr_status status =
        pcr_train(train_config.c_str(), train_data.c_str(), train_out.c_str(),
                  train_history.c_str(), train_resume.empty() ? nullptr : train_resume.c_str(),
                  progress, nullptr);
    if (status != PCR_OK) return report_failure(status);
    std::fprintf(stderr, "checkpoint written to %s\n", train_out.c_str());
    return 0;
  }

  if (reg->parsed()) {
    CloudGuard source, tmpl;
    pcr_status status = pcr_cloud_load(reg_source.c_str(), &source.ptr);
    if (status != PCR_OK) return report_failure(status);
    status = pcr_cloud_load(reg_template.c_str(), &tmpl.ptr);
    if (status != PCR_OK) return report_failure(status);

    pcr_register_options opts;
    pcr_register_options_init(&opts);
    opts.epsilon = reg_eps;

    pcr_result result;
    if (reg_method == "icp") {
      opts.max_iterations = reg_max_iter_opt->count() > 0 ? reg_max_iter : 100;
      status = pcr_register_icp(source.ptr, tmpl.ptr, &opts, &result);
      if (status != PCR_OK) return report_failure(status);
    } else if (reg_method == "pcrnet" || reg_method == "pcrnet-iter") {
      if (reg_ckpt.empty()) {
        std::fprintf(stderr, "error: --ckpt is required for method %s\n", reg_method.c_str());
        return 2;
      }
      ModelGuard model;
      status = pcr_model_load(reg_ckpt.c_str(), &model.ptr);
      if (status != PCR_OK) return report_failure(status);
      const std::string variant = pcr_model_variant(model.ptr);
      const std::string wanted = reg_method == "pcrnet" ? "single_shot" : "iterative";
      if (variant != wanted) {
        std::fprintf(stderr, "error: method %s needs a %s checkpoint, got %s\n",
                     reg_method.c_str(), wanted.c_str(), variant.c_str());
        return 2;
      }
      opts.max_iterations = reg_max_iter_opt->count() > 0 ? reg_max_iter : 20;
      status = pcr_register_model(model.ptr, source.ptr, tmpl.ptr, &opts, &result);
      if (status != PCR_OK) return report_failure(status);
    } else {
      std::fprintf(stderr, "error: unknown method '%s'\n", reg_method.c_str());
      return 2;
    }

    print_transform(result.transform);
    std::printf("iterations %d\nconverged %d\ntime_ms %.3f\n", result.iterations,
                result.converged, result.seconds * 1000.0);
    if (!reg_gt.empty()) {
      pcr_transform gt;
      status = pcr_transform_read(reg_gt.c_str(), &gt);
      if (status != PCR_OK) return report_failure(status);
      std::printf("rot_err_deg %.9g\ntrans_err %.9g\n",
                  pcr_rotation_error_deg(&result.transform, &gt),
                  pcr_translation_error(&result.transform, &gt));
    }
    return 0;
  }

  if (bench->parsed()) {
    std::string ckpt_single, ckpt_iter;
    for (const auto& path : bench_ckpts) {
      ModelGuard model;
      const pcr_status status = pcr_model_load(path.c_str(), &model.ptr);
      if (status != PCR_OK) return report_failure(status);
      const std::string variant = pcr_model_variant(model.ptr);
      std::string& slot = variant == "single_shot" ? ckpt_single : ckpt_iter;
      if (!slot.empty()) {
        std::fprintf(stderr, "error: two checkpoints with variant %s\n", variant.c_str());
        return 2;
      }
      slot = path;
    }

    pcr_benchmark_options opts;
    pcr_benchmark_options_init(&opts);
    opts.methods = bench_methods.c_str();
    opts.template_dir = bench_templates.c_str();
    opts.checkpoint_single_shot = ckpt_single.empty() ? nullptr : ckpt_single.c_str();
    opts.checkpoint_iterative = ckpt_iter.empty() ? nullptr : ckpt_iter.c_str();
    opts.pairs = bench_pairs;
    opts.noise_sigma = bench_sigma;
    opts.angle_range_deg = bench_angle;
    opts.trans_range = bench_trans;
    opts.seed = seed_or_env(bench_seed_opt, bench_seed);
    opts.threads = bench_threads;
    opts.max_iterations = bench_max_iter;
    opts.icp_max_iterations = bench_icp_max_iter;
    opts.epsilon = bench_eps;
    opts.untrained_width_divisor = bench_divisor;
    opts.measure_time = bench_no_timing ? 0 : 1;

    const pcr_status status = pcr_benchmark(&opts, bench_out.c_str());
    if (status != PCR_OK) return report_failure(status);
    std::fprintf(stderr, "reports written to %s\n", bench_out.c_str());
    return 0;
  }

  return 2;
}
