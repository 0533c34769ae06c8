#include "pcr/evalkit.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pcr/meshio.hpp"

namespace pcr {

SuccessCurve success_curve(const std::vector<double>& errors_deg) {
  if (errors_deg.empty()) throw std::invalid_argument("success_curve: empty error list");
  SuccessCurve curve;
  curve.thresholds.reserve(181);
  curve.ratio.reserve(181);
  const double inv_n = 1.0 / static_cast<double>(errors_deg.size());
  for (int theta = 0; theta <= 180; ++theta) {
    std::size_t below = 0;
    for (double e : errors_deg) {
      if (e < static_cast<double>(theta)) ++below;
    }
    curve.thresholds.push_back(static_cast<double>(theta));
    curve.ratio.push_back(static_cast<double>(below) * inv_n);
  }
  return curve;
}

double auc(const SuccessCurve& curve) {
  if (curve.thresholds.size() < 2) throw std::invalid_argument("auc: malformed curve");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.thresholds.size(); ++i) {
    const double dx = curve.thresholds[i] - curve.thresholds[i - 1];
    area += 0.5 * (curve.ratio[i] + curve.ratio[i - 1]) * dx;
  }
  return area / 180.0;
}

std::vector<TestPair> generate_pairs(const std::vector<PointCloud>& templates,
                                     std::size_t count, double angle_range_deg,
                                     double trans_range, double noise_sigma, Rng& rng) {
  if (templates.empty()) throw std::invalid_argument("generate_pairs: no templates");
  std::vector<TestPair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    TestPair pair;
    pair.tmpl = templates[templates.size() == 1 ? 0 : rng.index(templates.size())];
    const RigidTransform generating = random_transform(rng, angle_range_deg, trans_range);
    pair.source = add_gaussian_noise(apply_transform(generating, pair.tmpl), noise_sigma, rng);
    pair.gt = generating.inverse();
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

namespace {

// Violations of the per-iteration composition contract abort the run; they
// are bugs in a method, not registration failures.
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

EvalRecord evaluate_one(const Method& method, const TestPair& pair, std::size_t pair_id,
                        bool measure_time) {
  EvalRecord rec;
  rec.method = method.name;
  rec.pair_id = pair_id;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const RegistrationResult result = method.run(pair.source, pair.tmpl);
    const auto t1 = std::chrono::steady_clock::now();

    const RigidTransform replay = compose_chain(result.per_iteration);
    if ((replay.homogeneous() - result.transform.homogeneous()).norm() > 1e-9) {
      throw ConsistencyError("method " + method.name +
                             " violated the per-iteration composition rule");
    }

    rec.rot_err_deg = rotation_error_deg(result.transform, pair.gt);
    rec.trans_err = translation_error(result.transform, pair.gt);
    rec.time_ms =
        measure_time ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
    rec.iterations = result.iterations_used;
    rec.converged = result.converged;
  } catch (const ConsistencyError&) {
    throw;
  } catch (const std::exception&) {
    // Failed registrations count as maximal error so AUC reflects robustness.
    const auto t1 = std::chrono::steady_clock::now();
    rec.rot_err_deg = 180.0;
    rec.trans_err = translation_error(RigidTransform::identity(), pair.gt);
    rec.time_ms =
        measure_time ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
    rec.iterations = 0;
    rec.converged = false;
  }
  return rec;
}

void mean_std(const std::vector<double>& xs, double& mean, double& stddev) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  stddev = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
}

}  // namespace

BenchmarkReport run_benchmark(const std::vector<Method>& methods,
                              const std::vector<TestPair>& pairs,
                              const BenchmarkSettings& settings) {
  if (methods.empty()) throw std::invalid_argument("run_benchmark: no methods");
  if (pairs.empty()) throw std::invalid_argument("run_benchmark: no pairs");

  BenchmarkReport report;
  for (const auto& method : methods) {
    std::vector<EvalRecord> records(pairs.size());
    const int threads = std::max(1, settings.threads);
    if (threads == 1) {
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        records[i] = evaluate_one(method, pairs[i], i, settings.measure_time);
      }
    } else {
      std::vector<std::thread> pool;
      std::atomic<std::size_t> next{0};
      std::exception_ptr error;
      std::mutex error_mutex;
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pairs.size()) return;
            try {
              records[i] = evaluate_one(method, pairs[i], i, settings.measure_time);
            } catch (...) {
              std::lock_guard<std::mutex> lock(error_mutex);
              if (!error) error = std::current_exception();
              return;
            }
          }
        });
      }
      for (auto& th : pool) th.join();
      if (error) std::rethrow_exception(error);
    }

    std::vector<double> rot, trans, time_ms;
    for (const auto& rec : records) {
      rot.push_back(rec.rot_err_deg);
      trans.push_back(rec.trans_err);
      time_ms.push_back(rec.time_ms);
    }
    MethodSummary summary;
    summary.method = method.name;
    mean_std(rot, summary.rot_mean, summary.rot_std);
    mean_std(trans, summary.trans_mean, summary.trans_std);
    mean_std(time_ms, summary.time_mean_ms, summary.time_std_ms);
    const SuccessCurve curve = success_curve(rot);
    summary.auc = auc(curve);

    report.records.insert(report.records.end(), records.begin(), records.end());
    report.summaries.push_back(summary);
    report.curves.emplace_back(method.name, curve);
  }
  return report;
}

void write_report_csv(const BenchmarkReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  char buf[256];
  {
    std::ofstream out(out_dir + "/details.csv");
    if (!out) throw std::runtime_error("cannot write " + out_dir + "/details.csv");
    out << "method,pair_id,rot_err_deg,trans_err,time_ms,iters,converged\n";
    for (const auto& r : report.records) {
      std::snprintf(buf, sizeof(buf), "%s,%zu,%.9g,%.9g,%.3f,%d,%d\n", r.method.c_str(),
                    r.pair_id, r.rot_err_deg, r.trans_err, r.time_ms, r.iterations,
                    r.converged ? 1 : 0);
      out << buf;
    }
  }
  {
    std::ofstream out(out_dir + "/summary.csv");
    if (!out) throw std::runtime_error("cannot write " + out_dir + "/summary.csv");
    out << "method,rot_mean,rot_std,trans_mean,trans_std,time_mean_ms,time_std_ms,auc\n";
    for (const auto& s : report.summaries) {
      std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g,%.3f,%.3f,%.9g\n",
                    s.method.c_str(), s.rot_mean, s.rot_std, s.trans_mean, s.trans_std,
                    s.time_mean_ms, s.time_std_ms, s.auc);
      out << buf;
    }
  }
  for (const auto& [name, curve] : report.curves) {
    std::ofstream out(out_dir + "/curve_" + name + ".csv");
    if (!out) throw std::runtime_error("cannot write curve CSV for " + name);
    out << "threshold_deg,success_ratio\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.0f,%.9g\n", curve.thresholds[i], curve.ratio[i]);
      out << buf;
    }
  }
}

}  // namespace pcr
