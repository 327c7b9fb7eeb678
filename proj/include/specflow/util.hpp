#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace specflow {

// Thrown on contract violations (bad arguments, schema errors).
struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a numerical certificate fails (residuals, cutoff stability).
struct CertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace util {

// Global worker cap for parallel_for; 0 means hardware_concurrency().
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, count). Results must be written to preallocated
// per-index slots so the outcome is independent of scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// Gauss-Legendre nodes/weights on [0,1], exact for polynomials of
// degree <= 2*npoints - 1.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_legendre_01(int npoints);

std::vector<double> log_grid(double lo, double hi, int count);
std::vector<double> lin_grid(double lo, double hi, int count);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace util
}  // namespace specflow
