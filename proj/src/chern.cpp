#include "specflow/chern.hpp"

#include <cmath>

namespace specflow::forms {

namespace {

// (1/(2 pi i))^m as an exact integer power.
Complex inv_two_pi_i_pow(int m) {
  const Complex base = Complex(0, -1) / (2.0 * M_PI);  // 1/(2 pi i) = -i/(2 pi)
  Complex acc(1, 0);
  for (int i = 0; i < m; ++i) acc *= base;
  return acc;
}

Complex inv_four_pi_i_pow(int m) {
  const Complex base = Complex(0, -1) / (4.0 * M_PI);
  Complex acc(1, 0);
  for (int i = 0; i < m; ++i) acc *= base;
  return acc;
}

}  // namespace

CurvatureInput::CurvatureInput(TrigPolyForm f) : r2(std::move(f)) {
  if (r2.degree() != 2) throw ContractViolation("CurvatureInput: need a 2-form");
  for (const auto& [key, c] : r2.terms()) {
    if ((c + c.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw ContractViolation("CurvatureInput: fiber values must be antisymmetric");
  }
}

CurvatureInput CurvatureInput::zero(int n, int d) {
  return CurvatureInput(TrigPolyForm::zero(n, 2, d));
}

MixedForm chs(const Connection& a0, const Connection& a1) {
  if (a0.n != a1.n || a0.fiber != a1.fiber) throw ContractViolation("chs: shape mismatch");
  const int n = a0.n;
  const int fiber = a0.fiber;

  const TrigPolyForm base = a0.one_form();
  TrigPolyForm ahat = a1.one_form();
  ahat -= base;

  // F(s) = F0 + s * (d ahat + [a0, ahat]) + s^2 * ahat ^ ahat
  TrigPolyForm f0 = ext_d(base);
  TrigPolyForm d_cov = ext_d(ahat);
  TrigPolyForm quad = wedge(ahat, ahat);
  if (fiber > 1) {
    f0 += wedge(base, base);
    d_cov += wedge(base, ahat);
    d_cov += wedge(ahat, base);
  }

  // Polynomial degree in s of tr(ahat ^ exp(F(s))) is at most n + 1; this
  // node count integrates degree <= 2*g - 1 >= n + 1 exactly.
  const int g = (n + 3) / 2 + 1;
  const auto quad_rule = util::gauss_legendre_01(g);

  MixedForm acc(n, 1);
  for (int i = 0; i < g; ++i) {
    const double s = quad_rule.nodes[i];
    TrigPolyForm fs = f0;
    {
      TrigPolyForm t = d_cov;
      t *= Complex(s, 0);
      fs += t;
    }
    if (!quad.is_zero()) {
      TrigPolyForm t = quad;
      t *= Complex(s * s, 0);
      fs += t;
    }
    MixedForm integrand = wedge(exp_form_mixed([&] {
                                  MixedForm m(n, fiber);
                                  m.set_component(fs);
                                  return m;
                                }()),
                                ahat);
    // tr(ahat ^ exp F) = tr(exp F ^ ahat); the trace makes the order immaterial.
    MixedForm traced = integrand.fiber_trace();
    traced *= Complex(quad_rule.weights[i], 0);
    acc += traced;
  }
  acc.prune();
  return acc;
}

MixedForm ahat_form(const CurvatureInput& input) {
  const int n = input.dim();
  const int d = input.fiber();

  // M = R/2, a degree-2 form with d x d fiber.
  TrigPolyForm m = input.r2;
  m *= Complex(0.5, 0);

  // S = sinh(M)/M = I + M^2/3! + M^4/5! + ...   (even powers only)
  MixedForm s = MixedForm::identity(n, d);
  if (!m.is_zero()) {
    MixedForm m2(n, d);
    m2.set_component(wedge(m, m));
    MixedForm power = m2;
    double fact = 6.0;  // 3!
    for (int j = 1; 4 * j <= n; ++j) {
      MixedForm term = power;
      term *= Complex(1.0 / fact, 0);
      s += term;
      if (4 * (j + 1) > n) break;
      power = wedge(power, m2);
      if (power.is_zero()) break;
      fact *= (2 * j + 2) * (2 * j + 3);
    }
  }

  // N = S - I has components only in degrees 4, 8, ...
  MixedForm nf = s;
  nf.component(0) = TrigPolyForm::zero(n, 0, d);

  // L = tr log(I + N) = tr(N) - tr(N^2)/2 + tr(N^3)/3 - ...
  MixedForm log_tr(n, 1);
  {
    MixedForm power = nf;
    double sign = 1.0;
    for (int p = 1; 4 * p <= n; ++p) {
      MixedForm term = power.fiber_trace();
      term *= Complex(sign / p, 0);
      log_tr += term;
      if (4 * (p + 1) > n) break;
      power = wedge(power, nf);
      if (power.is_zero()) break;
      sign = -sign;
    }
  }

  // Omega = exp(-L/2); scalar fiber, terminating series.
  log_tr *= Complex(-0.5, 0);
  MixedForm omega = MixedForm::identity(n, 1);
  {
    MixedForm power = log_tr;
    double fact = 1.0;
    for (int q = 1; 4 * q <= n; ++q) {
      fact *= q;
      MixedForm term = power;
      term *= Complex(1.0 / fact, 0);
      omega += term;
      if (4 * (q + 1) > n) break;
      power = wedge(power, log_tr);
      if (power.is_zero()) break;
    }
  }
  omega.prune();
  return omega;
}

PredictionResult prediction(const Connection& a0, const Connection& a1, const CurvatureInput& r2) {
  const int n = a0.n;
  const MixedForm density = wedge(ahat_form(r2), chs(a0, a1));
  const Complex z = integrate_top_scalar(density.component(n));
  const Complex scaled = inv_two_pi_i_pow((n + 1) / 2) * z;
  PredictionResult out;
  out.value = scaled.real();
  out.imag_residual = std::abs(scaled.imag()) / std::max(1.0, std::abs(scaled.real()));
  if (out.imag_residual > 1e-9)
    throw CertificateError("prediction: imaginary residual above 1e-9 relative");
  return out;
}

double prediction_value(const Connection& a0, const Connection& a1) {
  const int n = a0.n;
  if (n == 1) {
    // No 2-forms on T^1; the A-hat factor is identically 1.
    const Complex z = integrate_top_scalar(chs(a0, a1).component(1));
    const Complex scaled = inv_two_pi_i_pow(1) * z;
    if (std::abs(scaled.imag()) > 1e-9 * std::max(1.0, std::abs(scaled.real())))
      throw CertificateError("prediction: imaginary residual above 1e-9 relative");
    return scaled.real();
  }
  return prediction(a0, a1, CurvatureInput::zero(n, n)).value;
}

double leading_order(const TrigPolyForm& a, double r) {
  if (a.fiber() != 1) throw ContractViolation("leading_order: u(1) 1-form required");
  if (a.degree() != 1) throw ContractViolation("leading_order: need a 1-form");
  if (!a.is_anti_hermitian(1e-10))
    throw ContractViolation("leading_order: form must be imaginary-valued (u(1))");
  const int n = a.dim();
  const int half = (n + 1) / 2;

  TrigPolyForm da = ext_d(a);
  TrigPolyForm acc = a;
  for (int j = 0; j < (n - 1) / 2; ++j) acc = wedge(acc, da);
  const Complex integral = integrate_top_scalar(acc);

  double fact = 1.0;
  for (int j = 2; j <= half; ++j) fact *= j;
  const Complex value = std::pow(r, half) * inv_four_pi_i_pow(half) / fact * integral;
  if (std::abs(value.imag()) > 1e-9 * std::max(1.0, std::abs(value.real())))
    throw CertificateError("leading_order: imaginary residual above tolerance");
  return value.real();
}

}  // namespace specflow::forms
