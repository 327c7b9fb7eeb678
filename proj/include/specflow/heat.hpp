#pragma once

// Heat-trace diagnostics from certified eigensums: integrated trace, kernel
// diagonal, eigenvalue counting, and the weighted Clifford trace compared
// against the index-density integrand from the forms side.

#include <Eigen/Dense>
#include <vector>

#include "specflow/dirac.hpp"

namespace specflow::heat {

// Largest admitted tail weight for a truncated heat sum.
inline constexpr double kTruncationCert = 1e-16;

// Smallest t for which the first excluded eigenvalue beyond `window`
// contributes at most kTruncationCert.
double min_admissible_t(double window);

struct HeatProbe {
  std::vector<double> t_grid;                 // log-spaced
  std::vector<std::vector<double>> x_grid;    // uniform sample points on T^n
};
HeatProbe make_probe(int n, double t_lo, double t_hi, int t_count, int per_axis = 16);
std::vector<std::vector<double>> uniform_points(int n, int per_axis);

// sum over the trusted window of e^{-lambda^2 t}, ascending-|lambda| order.
// Rejects t below min_admissible_t(window) and reports that minimum.
double heat_trace(const dirac::EigenSystem& eig, double t);

// Kernel diagonal E(t;x,x) = sum zeta(x) zeta(x)^dagger e^{-lambda^2 t}
// over the trusted window; hermitian positive semidefinite.
Eigen::MatrixXcd diag_kernel(const dirac::EigenSystem& eig, double t,
                             const std::vector<double>& x);

// Number of eigenvalues with |lambda_zeta| < lambda (strict).
long count_eigs(const dirac::EigenSystem& eig, double lambda);

struct WeightedTraceResult {
  double p_lambda = 0;   // truncated weighted sum of <zeta, cl(ahat) zeta> e^{-lambda^2 t}
  double density = 0;    // sqrt(pi) (1/2 pi i)^{(n+1)/2} t^{-1/2} * integral of tr(ahat ^ exp F)
  double residual = 0;   // p_lambda - density
};

// Weighted Clifford trace over |lambda_zeta| < lambda versus the flat-torus
// index density (A-hat form = 1). r_value is the connection's curvature scale;
// the precondition r*t <= 1 is enforced.
WeightedTraceResult weighted_cl_trace(const dirac::EigenSystem& eig,
                                      const forms::TrigPolyForm& ahat, double t, double lambda,
                                      double r_value);

struct PointwiseDensity {
  double lhs = 0;  // tr(cl(ahat)|_x E(t;x,x))
  double rhs = 0;  // sqrt(pi) t^{-1/2} (1/2 pi i)^{(n+1)/2} * top-density at x
};
PointwiseDensity pointwise_density_check(const dirac::EigenSystem& eig,
                                         const forms::TrigPolyForm& ahat, double t,
                                         const std::vector<double>& x);

}  // namespace specflow::heat
