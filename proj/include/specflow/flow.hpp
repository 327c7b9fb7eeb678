#pragma once

// Spectral flow along a linear family A_s = A0 + s*(hol_inc, osc_inc),
// s in [0,1]: exact signed crossing counting by eigenvalue-branch tracking,
// and the heat-mollified estimator with its |f - integral| <= n certificate.

#include <cstdint>
#include <string>
#include <vector>

#include "specflow/dirac.hpp"

namespace specflow::flow {

struct PathSpec {
  Connection a0;
  std::vector<double> hol_increment;   // theta increment; A_s holonomy = theta0 + s*inc
  forms::TrigPolyForm osc_increment;   // zero-mean anti-hermitian 1-form (zero form allowed)
  int samples = 64;                    // base grid intervals
  int K = 8;
  double gap = 1e-8;                   // declared endpoint spectral gap

  PathSpec(Connection a0_, std::vector<double> hol_inc, forms::TrigPolyForm osc_inc);
  Connection at(double s) const;
  // d/ds of the connection 1-form: i*hol_inc_j dx_j + osc_increment.
  forms::TrigPolyForm velocity() const;
  // Block layout shared by every sample (conserved axes from the union of
  // the base and increment supports).
  dirac::DiracBlocks blocks_at(double s) const;
};

struct CrossingRecord {
  double s_star = 0;           // refined to 1e-10
  int sign = 0;                // +1 negative->positive, -1 otherwise
  int multiplicity = 1;        // branches crossing together within tolerance
  double slope = 0;            // <zeta, cl(velocity) zeta> at the crossing
  double lambda_at = 0;        // residual |lambda(s_star)|
  std::uint32_t block = 0;
  std::string branch;
};

struct SpectralFlowResult {
  long f = 0;
  std::vector<CrossingRecord> crossings;   // grouped, sorted by s
  std::vector<CrossingRecord> touches;     // tangential dips, contribute 0
  double endpoint_gap0 = 0, endpoint_gap1 = 0;
  double trusted_window = 0;
  double max_residual = 0;
  int refinement_events = 0;
  // per-sample diagnostics on the base grid
  std::vector<double> sample_s, sample_lambda_min;
};

// Crossing tolerance: |lambda| < 1e-8 counts as "at zero" during refinement;
// signs are read outside a 1e-6 exclusion band.
inline constexpr double kCrossingTol = 1e-8;
inline constexpr double kSignBand = 1e-6;
inline constexpr double kOverlapMargin = 0.1;
inline constexpr int kMaxRefineDepth = 6;

SpectralFlowResult exact_flow(const PathSpec& path);

// Phi(lambda) = integral_0^lambda e^{-p^2 t} dp, odd and strictly increasing.
double mollifier_phi(double lambda, double t);

struct EstimatorParams {
  double t = 0;
  double R = 1;
  double q = 0;
  double rmax = 1;
  double lambda_cut = 0;   // effective truncation min(R t^{-1/2}, trusted window)
  double T = 0;            // Phi(lambda_cut)
  bool clamped = false;    // lambda_cut was limited by the trusted window
  bool fallback = false;   // rmax < e parameter fallback was taken
};

// t = rmax^{-(1+q)}, R = ln rmax with q in (0, 1/(n+1)), default 1/(2(n+1)).
// rmax < e falls back to t = 1/(2 rmax), R = 1. The truncation is clamped to
// the trusted window and the clamp is reported.
EstimatorParams choose_params(double rmax, int n, double trusted_window, double q = -1);

// Mollified flow density at one sample:
//   (1/2T) * sum_{|lambda| <= lambda_cut} <zeta, cl(velocity) zeta> e^{-lambda^2 t},
// accumulated in ascending-|lambda| order. `truncate=false` sums every
// eigenvalue of the truncated operator instead (diagnostics only).
double flow_density(const dirac::EigenSystem& eig, const forms::TrigPolyForm& velocity,
                    const EstimatorParams& params, bool truncate = true);

struct EstimatorResult {
  double value = 0;          // Simpson integral of the density over [0,1]
  int n_max = 0;             // max_s n_s, counted with the same truncation
  EstimatorParams params;
  std::vector<double> sample_s, sample_wp, sample_lambda_min;
  std::vector<int> sample_ns;
};

EstimatorResult estimator_flow(const PathSpec& path, const EstimatorParams& params);

// r(A_s) maximum over the sample grid (drives choose_params).
double path_rmax(const PathSpec& path, int grid_per_axis);

struct EtaDifference {
  double value = 0;       // eta(A1) - eta(A0) = 2*(prediction - f)
  double prediction = 0;
  long f = 0;
};
EtaDifference eta_difference(const PathSpec& path);

}  // namespace specflow::flow
