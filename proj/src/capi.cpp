#include "pcr/pcr.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "pcr/evalkit.hpp"
#include "pcr/icp.hpp"
#include "pcr/meshio.hpp"
#include "pcr/trainer.hpp"

struct pcr_cloud {
  pcr::PointCloud cloud;
};

struct pcr_model {
  pcr::Model model;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

pcr_status fail(pcr_status code, const std::string& message) {
  set_error(message);
  return code;
}

// Maps exceptions onto a caller-chosen default; invalid_argument always
// reports PCR_ERROR_INVALID_ARGUMENT.
template <typename Fn>
pcr_status guarded(pcr_status on_error, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    return fail(PCR_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(on_error, e.what());
  }
}

pcr::RigidTransform from_c(const pcr_transform& t) {
  pcr::RigidTransform out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.rotation(i, j) = t.m[i * 4 + j];
    out.translation[i] = t.m[i * 4 + 3];
  }
  return out;
}

pcr_transform to_c(const pcr::RigidTransform& t) {
  pcr_transform out;
  const Eigen::Matrix4d h = t.homogeneous();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out.m[i * 4 + j] = h(i, j);
  }
  return out;
}

pcr_result to_c(const pcr::RegistrationResult& r) {
  pcr_result out;
  out.transform = to_c(r.transform);
  out.iterations = r.iterations_used;
  out.converged = r.converged ? 1 : 0;
  out.seconds = r.elapsed_seconds;
  return out;
}

std::vector<std::string> list_cloud_files(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".xyz" || ext == ".pcrc") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string item = s.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

extern "C" {

const char* pcr_version(void) { return "0.1.0"; }

const char* pcr_last_error(void) { return g_last_error.c_str(); }

pcr_status pcr_cloud_load(const char* path, pcr_cloud** out) {
  if (!path || !out) return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  if (!std::filesystem::exists(path)) {
    return fail(PCR_ERROR_IO, std::string("no such file: ") + path);
  }
  return guarded(PCR_ERROR_PARSE, [&] {
    *out = new pcr_cloud{pcr::load_cloud(path)};
    return PCR_OK;
  });
}

pcr_status pcr_cloud_save(const pcr_cloud* cloud, const char* path, int binary) {
  if (!cloud || !path) return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded(PCR_ERROR_IO, [&] {
    pcr::save_cloud(cloud->cloud, path, binary != 0);
    return PCR_OK;
  });
}

pcr_status pcr_cloud_from_off(const char* off_path, uint32_t n_points, uint64_t seed,
                              pcr_cloud** out) {
  if (!off_path || !out) return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  if (n_points == 0) return fail(PCR_ERROR_INVALID_ARGUMENT, "n_points must be positive");
  *out = nullptr;
  if (!std::filesystem::exists(off_path)) {
    return fail(PCR_ERROR_IO, std::string("no such file: ") + off_path);
  }
  return guarded(PCR_ERROR_PARSE, [&] {
    const pcr::Mesh mesh = pcr::parse_off_file(off_path);
    pcr::Rng rng(seed);
    *out = new pcr_cloud{pcr::sample_mesh(mesh, n_points, rng)};
    return PCR_OK;
  });
}

uint32_t pcr_cloud_size(const pcr_cloud* cloud) {
  return cloud ? static_cast<uint32_t>(cloud->cloud.size()) : 0;
}

pcr_status pcr_cloud_points(const pcr_cloud* cloud, double* xyz) {
  if (!cloud || !xyz) return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  for (std::size_t i = 0; i < cloud->cloud.size(); ++i) {
    for (int k = 0; k < 3; ++k) xyz[i * 3 + k] = cloud->cloud.points[i][k];
  }
  return PCR_OK;
}

void pcr_cloud_free(pcr_cloud* cloud) { delete cloud; }

void pcr_transform_identity(pcr_transform* t) {
  if (t) *t = to_c(pcr::RigidTransform::identity());
}

pcr_status pcr_transform_read(const char* path, pcr_transform* t) {
  if (!path || !t) return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  if (!std::filesystem::exists(path)) {
    return fail(PCR_ERROR_IO, std::string("no such file: ") + path);
  }
  return guarded(PCR_ERROR_PARSE, [&] {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    *t = to_c(pcr::transform_from_text(text));
    return PCR_OK;
  });
}

pcr_status pcr_transform_write(const pcr_transform* t, const char* path) {
  if (!t || !path) return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded(PCR_ERROR_IO, [&] {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(std::string("cannot open ") + path);
    out << pcr::transform_to_text(from_c(*t));
    return PCR_OK;
  });
}

double pcr_rotation_error_deg(const pcr_transform* est, const pcr_transform* gt) {
  return pcr::rotation_error_deg(from_c(*est), from_c(*gt));
}

double pcr_translation_error(const pcr_transform* est, const pcr_transform* gt) {
  return pcr::translation_error(from_c(*est), from_c(*gt));
}

pcr_status pcr_model_load(const char* path, pcr_model** out) {
  if (!path || !out) return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  if (!std::filesystem::exists(path)) {
    return fail(PCR_ERROR_IO, std::string("no such file: ") + path);
  }
  return guarded(PCR_ERROR_PARSE, [&] {
    *out = new pcr_model{pcr::load_model(path)};
    return PCR_OK;
  });
}

const char* pcr_model_variant(const pcr_model* model) {
  static thread_local std::string name;
  if (!model) return "";
  name = pcr::variant_name(model->model.config.variant);
  return name.c_str();
}

pcr_status pcr_model_init(const char* variant, uint32_t width_divisor, uint64_t seed,
                          pcr_model** out) {
  if (!variant || !out) return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded(PCR_ERROR_RUNTIME, [&] {
    pcr::TrainConfig cfg;
    cfg.variant = variant;
    pcr::parse_variant(variant);
    cfg.width_divisor = width_divisor == 0 ? 1 : width_divisor;
    cfg.seed = seed;
    *out = new pcr_model{pcr::init_model(cfg)};
    return PCR_OK;
  });
}

void pcr_model_free(pcr_model* model) { delete model; }

void pcr_register_options_init(pcr_register_options* opts) {
  if (!opts) return;
  opts->max_iterations = 20;
  opts->epsilon = 1e-7;
}

pcr_status pcr_register_icp(const pcr_cloud* source, const pcr_cloud* tmpl,
                            const pcr_register_options* opts, pcr_result* out) {
  if (!source || !tmpl || !out) return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  pcr_register_options defaults;
  pcr_register_options_init(&defaults);
  defaults.max_iterations = 100;
  const pcr_register_options& o = opts ? *opts : defaults;
  return guarded(PCR_ERROR_RUNTIME, [&] {
    *out = to_c(pcr::icp_register(source->cloud, tmpl->cloud, o.max_iterations, o.epsilon));
    return PCR_OK;
  });
}

pcr_status pcr_register_model(const pcr_model* model, const pcr_cloud* source,
                              const pcr_cloud* tmpl, const pcr_register_options* opts,
                              pcr_result* out) {
  if (!model || !source || !tmpl || !out) {
    return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  }
  pcr_register_options defaults;
  pcr_register_options_init(&defaults);
  const pcr_register_options& o = opts ? *opts : defaults;
  return guarded(PCR_ERROR_RUNTIME, [&] {
    const pcr::Model& m = model->model;
    pcr::RegistrationResult result;
    if (m.config.variant == pcr::ModelVariant::kSingleShot) {
      result = pcr::register_single_shot(m.params, m.config, source->cloud, tmpl->cloud);
    } else {
      result = pcr::register_iterative(m.params, m.config, source->cloud, tmpl->cloud,
                                       o.max_iterations, o.epsilon);
    }
    *out = to_c(result);
    return PCR_OK;
  });
}

pcr_status pcr_train(const char* config_path, const char* data_dir,
                     const char* out_checkpoint, const char* history_csv,
                     const char* resume_checkpoint, pcr_progress_fn progress, void* user) {
  if (!config_path || !data_dir || !out_checkpoint) {
    return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  }
  if (!std::filesystem::exists(config_path)) {
    return fail(PCR_ERROR_IO, std::string("no such file: ") + config_path);
  }
  if (!std::filesystem::is_directory(data_dir)) {
    return fail(PCR_ERROR_IO, std::string("not a directory: ") + data_dir);
  }

  pcr::TrainConfig cfg;
  try {
    cfg = pcr::load_train_config(config_path);
  } catch (const std::exception& e) {
    return fail(PCR_ERROR_CONFIG, e.what());
  }

  return guarded(PCR_ERROR_RUNTIME, [&] {
    const std::vector<std::string> paths = list_cloud_files(data_dir);
    if (paths.empty()) {
      throw std::invalid_argument(std::string("no cloud files (.xyz/.pcrc) in ") + data_dir);
    }
    std::vector<pcr::PointCloud> templates;
    templates.reserve(paths.size());
    for (const auto& p : paths) templates.push_back(pcr::load_cloud(p));

    pcr::Model model;
    bool resuming = false;
    if (resume_checkpoint && std::strlen(resume_checkpoint) > 0) {
      model = pcr::load_model(resume_checkpoint);
      // The stored run config governs a resume; only the epoch target moves.
      model.train_config.epochs = cfg.epochs;
      resuming = true;
    } else {
      model = pcr::init_model(cfg);
    }

    pcr::ProgressSink sink;
    if (progress) {
      sink = [progress, user](const pcr::EpochStats& s) {
        progress(s.epoch, s.mean_loss, s.lr, user);
      };
    }
    const std::vector<pcr::EpochStats> history =
        pcr::train(model, templates, sink, out_checkpoint);
    pcr::save_model(model, out_checkpoint);
    if (history_csv && std::strlen(history_csv) > 0) {
      pcr::write_history_csv(history, history_csv, resuming);
    }
    return PCR_OK;
  });
}

void pcr_benchmark_options_init(pcr_benchmark_options* opts) {
  if (!opts) return;
  opts->methods = "icp";
  opts->template_dir = nullptr;
  opts->checkpoint_single_shot = nullptr;
  opts->checkpoint_iterative = nullptr;
  opts->pairs = 100;
  opts->noise_sigma = 0.0;
  opts->angle_range_deg = 45.0;
  opts->trans_range = 1.0;
  opts->seed = 0;
  opts->threads = 1;
  opts->max_iterations = 20;
  opts->icp_max_iterations = 100;
  opts->epsilon = 1e-7;
  opts->untrained_width_divisor = 1;
  opts->measure_time = 1;
}

pcr_status pcr_benchmark(const pcr_benchmark_options* opts, const char* out_dir) {
  if (!opts || !out_dir || !opts->methods || !opts->template_dir) {
    return fail(PCR_ERROR_INVALID_ARGUMENT, "null argument");
  }
  if (!std::filesystem::is_directory(opts->template_dir)) {
    return fail(PCR_ERROR_IO, std::string("not a directory: ") + opts->template_dir);
  }

  return guarded(PCR_ERROR_RUNTIME, [&] {
    const std::vector<std::string> paths = list_cloud_files(opts->template_dir);
    if (paths.empty()) {
      throw std::invalid_argument(std::string("no cloud files (.xyz/.pcrc) in ") +
                                  opts->template_dir);
    }
    std::vector<pcr::PointCloud> templates;
    for (const auto& p : paths) templates.push_back(pcr::load_cloud(p));

    auto load_or_init = [&](const char* ckpt, const char* variant) {
      if (ckpt && std::strlen(ckpt) > 0) {
        pcr::Model m = pcr::load_model(ckpt);
        if (pcr::variant_name(m.config.variant) != variant) {
          throw std::invalid_argument(std::string(ckpt) + ": checkpoint variant is " +
                                      pcr::variant_name(m.config.variant) + ", expected " +
                                      variant);
        }
        return m;
      }
      pcr::TrainConfig cfg;
      cfg.variant = variant;
      cfg.width_divisor = opts->untrained_width_divisor == 0 ? 1 : opts->untrained_width_divisor;
      cfg.seed = opts->seed;
      return pcr::init_model(cfg);
    };

    std::vector<pcr::Method> methods;
    std::vector<std::shared_ptr<pcr::Model>> owned;
    for (const std::string& name : split_csv(opts->methods)) {
      if (name == "icp") {
        const int max_iter = opts->icp_max_iterations;
        const double eps = opts->epsilon;
        methods.push_back({name, [max_iter, eps](const pcr::PointCloud& s,
                                                 const pcr::PointCloud& t) {
                             return pcr::icp_register(s, t, max_iter, eps);
                           }});
      } else if (name == "pcrnet") {
        auto m = std::make_shared<pcr::Model>(load_or_init(opts->checkpoint_single_shot,
                                                           "single_shot"));
        owned.push_back(m);
        methods.push_back({name, [m](const pcr::PointCloud& s, const pcr::PointCloud& t) {
                             return pcr::register_single_shot(m->params, m->config, s, t);
                           }});
      } else if (name == "pcrnet-iter") {
        auto m = std::make_shared<pcr::Model>(load_or_init(opts->checkpoint_iterative,
                                                           "iterative"));
        owned.push_back(m);
        const int max_iter = opts->max_iterations;
        const double eps = opts->epsilon;
        methods.push_back(
            {name, [m, max_iter, eps](const pcr::PointCloud& s, const pcr::PointCloud& t) {
               return pcr::register_iterative(m->params, m->config, s, t, max_iter, eps);
             }});
      } else {
        throw std::invalid_argument("unknown method '" + name +
                                    "' (expected icp, pcrnet or pcrnet-iter)");
      }
    }
    if (methods.empty()) throw std::invalid_argument("empty method list");

    pcr::Rng rng(opts->seed);
    const std::vector<pcr::TestPair> pairs = pcr::generate_pairs(
        templates, opts->pairs, opts->angle_range_deg, opts->trans_range, opts->noise_sigma,
        rng);

    pcr::BenchmarkSettings settings;
    settings.threads = opts->threads;
    settings.measure_time = opts->measure_time != 0;
    const pcr::BenchmarkReport report = pcr::run_benchmark(methods, pairs, settings);
    pcr::write_report_csv(report, out_dir);
    return PCR_OK;
  });
}

}  // extern "C"
