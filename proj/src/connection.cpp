#include "specflow/connection.hpp"

namespace specflow {

using forms::Complex;
using forms::Mat;
using forms::Momentum;
using forms::TrigPolyForm;

Connection::Connection(int n_, std::vector<double> hol_, forms::TrigPolyForm osc_)
    : n(n_), fiber(osc_.fiber()), hol(std::move(hol_)), osc(std::move(osc_)) {
  if (static_cast<int>(hol.size()) != n) throw ContractViolation("Connection: hol length != n");
  if (n % 2 == 0) throw ContractViolation("Connection: n must be odd");
  if (osc.dim() != n || osc.degree() != 1) throw ContractViolation("Connection: osc must be a 1-form on T^n");
  if (!osc.is_zero_mean()) throw ContractViolation("Connection: osc must have zero mean");
  if (!osc.is_anti_hermitian(1e-10)) throw ContractViolation("Connection: osc must be anti-hermitian");
}

Connection Connection::flat(int n, std::vector<double> hol) {
  return Connection(n, std::move(hol), forms::TrigPolyForm::zero(n, 1, 1));
}

TrigPolyForm Connection::one_form() const {
  TrigPolyForm a = osc;
  if (a.is_zero() && a.fiber() != fiber) a = TrigPolyForm::zero(n, 1, fiber);
  for (int j = 0; j < n; ++j) {
    if (hol[j] == 0.0) continue;
    a.add_term(Momentum(n, 0), forms::IndexMask{1} << j,
               Mat(Complex(0, hol[j]) * Mat::Identity(fiber, fiber)));
  }
  return a;
}

TrigPolyForm Connection::curvature() const {
  const TrigPolyForm a = one_form();
  TrigPolyForm F = ext_d(a);
  if (fiber > 1) F += wedge(a, a);
  return F;
}

Connection operator+(const Connection& a, const Connection& b) {
  if (a.n != b.n || a.fiber != b.fiber) throw ContractViolation("Connection sum: shape mismatch");
  std::vector<double> hol(a.hol);
  for (int j = 0; j < a.n; ++j) hol[j] += b.hol[j];
  forms::TrigPolyForm osc = a.osc;
  if (osc.is_zero())
    osc = b.osc;
  else if (!b.osc.is_zero())
    osc += b.osc;
  return Connection(a.n, std::move(hol), std::move(osc));
}

Connection Connection::scaled(double s) const {
  std::vector<double> h(hol);
  for (auto& v : h) v *= s;
  forms::TrigPolyForm o = osc;
  o *= Complex(s, 0);
  return Connection(n, std::move(h), std::move(o));
}

forms::TrigPolyForm connection_difference(const Connection& a1, const Connection& a0) {
  if (a1.n != a0.n || a1.fiber != a0.fiber) throw ContractViolation("connection_difference: shape mismatch");
  TrigPolyForm d = a1.one_form();
  d -= a0.one_form();
  return d;
}

forms::TrigPolyForm contact_one_form(double amplitude) {
  TrigPolyForm a(3, 1, 1);
  const Complex half_i(0, 0.5 * amplitude);
  // i*cos(2 pi x3) dx1 = (i/2)(e^{2 pi i x3} + e^{-2 pi i x3}) dx1
  a.add_term({0, 0, 1}, std::vector<int>{0}, half_i);
  a.add_term({0, 0, -1}, std::vector<int>{0}, half_i);
  // i*sin(2 pi x3) dx2 = (1/2)(e^{2 pi i x3} - e^{-2 pi i x3}) dx2
  a.add_term({0, 0, 1}, std::vector<int>{1}, Complex(0.5 * amplitude, 0));
  a.add_term({0, 0, -1}, std::vector<int>{1}, Complex(-0.5 * amplitude, 0));
  return a;
}

}  // namespace specflow
