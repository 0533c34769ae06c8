#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pcr/registration.hpp"

namespace pcr {

struct EvalRecord {
  std::string method;
  std::size_t pair_id = 0;
  double rot_err_deg = 0.0;
  double trans_err = 0.0;
  double time_ms = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Success ratio over a 1-degree threshold grid 0..180: ratio(theta) is the
// fraction of errors strictly below theta.
struct SuccessCurve {
  std::vector<double> thresholds;
  std::vector<double> ratio;
};

SuccessCurve success_curve(const std::vector<double>& errors_deg);

// Trapezoidal area under the curve over [0, 180], divided by 180.
double auc(const SuccessCurve& curve);

struct TestPair {
  PointCloud source;
  PointCloud tmpl;
  // The transform a perfect registration of source onto tmpl returns, i.e.
  // the inverse of the transform that generated the source.
  RigidTransform gt;
};

// Random template choice, random transform applied to the template plus
// fixed-sigma noise to form the source.
std::vector<TestPair> generate_pairs(const std::vector<PointCloud>& templates,
                                     std::size_t count, double angle_range_deg,
                                     double trans_range, double noise_sigma, Rng& rng);

using RegisterFn = std::function<RegistrationResult(const PointCloud&, const PointCloud&)>;

struct Method {
  std::string name;
  RegisterFn run;
};

struct MethodSummary {
  std::string method;
  double rot_mean = 0.0, rot_std = 0.0;
  double trans_mean = 0.0, trans_std = 0.0;
  double time_mean_ms = 0.0, time_std_ms = 0.0;
  double auc = 0.0;
};

struct BenchmarkReport {
  std::vector<EvalRecord> records;  // method-major, pair order within
  std::vector<MethodSummary> summaries;
  std::vector<std::pair<std::string, SuccessCurve>> curves;
};

struct BenchmarkSettings {
  int threads = 1;
  bool measure_time = true;  // false writes 0 for deterministic reports
};

// Every method sees the identical pair list. A method that throws on a pair
// is recorded as a 180-degree failure rather than aborting the run. The
// composition of each result's per-iteration chain is checked against its
// transform.
BenchmarkReport run_benchmark(const std::vector<Method>& methods,
                              const std::vector<TestPair>& pairs,
                              const BenchmarkSettings& settings);

// details.csv, summary.csv and curve_<method>.csv under out_dir.
void write_report_csv(const BenchmarkReport& report, const std::string& out_dir);

}  // namespace pcr
