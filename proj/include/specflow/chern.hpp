#pragma once

// Relative Chern-Simons form, A-hat genus form, and the index-density
// integrals built from them.

#include "specflow/connection.hpp"
#include "specflow/forms.hpp"

namespace specflow::forms {

// A 2-form whose fiber values are real antisymmetric d x d matrices
// (curvature viewed as a matrix of 2-forms). d need not equal n.
struct CurvatureInput {
  TrigPolyForm r2;
  explicit CurvatureInput(TrigPolyForm f);
  static CurvatureInput zero(int n, int d);
  int dim() const { return r2.dim(); }
  int fiber() const { return r2.fiber(); }
};

// Relative Chern-Simons form of an ordered pair of connections:
//   integral over s in [0,1] of tr(ahat ^ exp(F(s))),
// ahat = a1 - a0, F(s) the curvature of a0 + s*ahat. The integrand is
// polynomial in s, so fixed-order Gauss-Legendre evaluates the s-integral
// exactly. Only odd-degree components are nonzero.
MixedForm chs(const Connection& a0, const Connection& a1);

// j^{-1/2} with j = det(sinh(R/2)/(R/2)), computed through the nilpotent
// series exp(-tr(log(I + N))/2). 0-form component is exactly 1; nonzero
// components sit in degrees 0, 4, 8, ...
MixedForm ahat_form(const CurvatureInput& r2);

struct PredictionResult {
  double value = 0;
  double imag_residual = 0;  // relative magnitude of the discarded imaginary part
};

// (1/2 pi i)^{(n+1)/2} * integral of (ahat_form(R) ^ chs(a0, a1)) over T^n.
// The result is real up to rounding; the imaginary residual must stay below
// 1e-9 relative.
PredictionResult prediction(const Connection& a0, const Connection& a1, const CurvatureInput& r2);
double prediction_value(const Connection& a0, const Connection& a1);  // flat R

// Leading-order law for a path a0 -> a0 + r*a at large r:
//   r^{(n+1)/2} (1/4 pi i)^{(n+1)/2} (1/((n+1)/2)!) * integral of a ^ (da)^{(n-1)/2},
// a an imaginary-valued (u(1)) 1-form.
double leading_order(const TrigPolyForm& a, double r);

}  // namespace specflow::forms
