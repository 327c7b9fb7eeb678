#pragma once

#include <Eigen/Dense>
#include <vector>

#include "specflow/forms.hpp"

namespace specflow {

// A unitary connection in the gauge seen by the operator: a constant harmonic
// part (holonomy vector theta, entering as i*theta_j dx_j) plus a zero-mean
// oscillatory 1-form with anti-hermitian fiber values.
struct Connection {
  int n = 1;
  int fiber = 1;
  std::vector<double> hol;        // length n
  forms::TrigPolyForm osc;        // degree 1, zero-mean, anti-hermitian fiber

  Connection() = default;
  Connection(int n_, std::vector<double> hol_, forms::TrigPolyForm osc_);
  static Connection flat(int n, std::vector<double> hol);

  // Full 1-form i*theta_j dx_j + osc (fiber identity on the harmonic part).
  forms::TrigPolyForm one_form() const;

  // Curvature 2-form F = d a + a ^ a of the stored 1-form.
  forms::TrigPolyForm curvature() const;

  friend Connection operator+(const Connection& a, const Connection& b);
  Connection scaled(double s) const;  // scales hol and osc
};

// Difference a1 - a0 as a 1-form (the path velocity for linear paths).
forms::TrigPolyForm connection_difference(const Connection& a1, const Connection& a0);

// The T^3 perturbation i*(cos(2 pi x3) dx1 + sin(2 pi x3) dx2) at a given
// amplitude; its a ^ da integral is nonzero, so it drives genuinely nonzero
// asymptotic spectral flow.
forms::TrigPolyForm contact_one_form(double amplitude);

}  // namespace specflow
