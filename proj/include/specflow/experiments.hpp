#pragma once

// Named experiment runners behind the CLI: each consumes a config, writes
// CSV/JSON artifacts under <out>/<experiment>/, and returns a structured
// report with one line per check.

#include <cstdint>
#include <string>
#include <vector>

#include "specflow/io.hpp"

namespace specflow::cli {

struct ExperimentConfig {
  std::string experiment = "all";
  std::string out_dir = "out";
  int threads = 0;          // 0 = all cores
  std::uint64_t seed = 1;

  // winding (n = 1)
  std::vector<int> winding_m = {-3, -2, -1, 0, 1, 2, 3};
  double winding_theta = 0.9;
  int winding_K = 10;
  int winding_samples = 96;

  // contact sweep (n = 3). The operator-level 1-form amplitude is
  // amplitude_scale * r per sweep unit; the default factor 3 pushes the top
  // of the sweep deep enough into the asymptotic regime for slope fitting
  // while the cutoff stays tractable.
  std::vector<double> contact_r = {4, 6, 8, 12, 16};
  std::vector<double> contact_theta = {0.31, 0.17, 0.47};
  double contact_amplitude_scale = 3.5;
  int contact_K = 0;        // 0 = auto from the operator amplitude, stability-raised
  int contact_samples = 64;

  // estimator check
  std::vector<double> estimator_contact_r = {4, 8};
  int estimator_samples = 48;
  double est_t = 0, est_R = 0, est_q = 0;  // 0 = parameter rule

  // heat checks
  std::vector<double> heat_free_t = {1e-2, 1e-3};
  int heat_free_K1 = 125;
  int heat_free_K3 = 125;
  double heat_contact_amplitude = 1.0;
  int heat_contact_K = 36;
  int heat_pointwise_per_axis = 16;

  static ExperimentConfig from_json(const io::json& j);
  io::json to_json() const;
};

struct RunReport {
  bool ok = true;
  std::vector<std::string> lines;
  io::json summary;

  void check(bool cond, const std::string& label);
  void note(const std::string& label);
};

RunReport run_winding(const ExperimentConfig& cfg);
RunReport run_contact_sweep(const ExperimentConfig& cfg);
RunReport run_estimator_check(const ExperimentConfig& cfg);
RunReport run_heat_checks(const ExperimentConfig& cfg);
RunReport run_chs_checks(const ExperimentConfig& cfg);
RunReport run_all(const ExperimentConfig& cfg);

// Auto cutoff for the contact family at operator amplitude r.
int contact_cutoff(const ExperimentConfig& cfg, double r);

// Independent Poisson-summation value of the free heat trace on T^n
// (spinor rank included): rank * (4 pi t)^{-n/2} * sum_m e^{-|m|^2/(4t)}.
double poisson_free_trace(int n, double t);

}  // namespace specflow::cli
