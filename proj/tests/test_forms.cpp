#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "specflow/chern.hpp"
#include "specflow/forms.hpp"

using namespace specflow;
using namespace specflow::forms;
using specflow::testing::grid_integral_top;
using specflow::testing::random_form;
using specflow::testing::random_u_one_form;

namespace {

TrigPolyForm dx(int n, int axis) {
  TrigPolyForm f(n, 1, 1);
  f.add_term(Momentum(n, 0), std::vector<int>{axis}, Complex(1, 0));
  return f;
}

}  // namespace

TEST_CASE("wedge basics: nilpotency and antisymmetry of coordinate forms") {
  const auto dx1 = dx(3, 0), dx2 = dx(3, 1);
  CHECK(wedge(dx1, dx1).is_zero());
  const auto w12 = wedge(dx1, dx2);
  const auto w21 = wedge(dx2, dx1);
  TrigPolyForm sum = w12;
  sum += w21;
  CHECK(sum.is_zero());
  CHECK(w12.term_count() == 1);
}

TEST_CASE("contact form: integral of a ^ da is -2*pi (hand expansion + grid oracle)") {
  // a = cos(2 pi x3) dx1 + sin(2 pi x3) dx2 (real-valued variant)
  TrigPolyForm a(3, 1, 1);
  a.add_term({0, 0, 1}, std::vector<int>{0}, Complex(0.5, 0));
  a.add_term({0, 0, -1}, std::vector<int>{0}, Complex(0.5, 0));
  a.add_term({0, 0, 1}, std::vector<int>{1}, Complex(0, -0.5));
  a.add_term({0, 0, -1}, std::vector<int>{1}, Complex(0, 0.5));

  const TrigPolyForm ada = wedge(a, ext_d(a));
  const Complex integral = integrate_top_scalar(ada);
  // Pointwise hand expansion: (a ^ da)_{123} = cos*(-2 pi cos) - sin*(2 pi sin) = -2 pi.
  CHECK(integral.real() == doctest::Approx(-2.0 * M_PI).epsilon(1e-12));
  CHECK(std::abs(integral.imag()) < 1e-12);
  // Independent route: average the pointwise top coefficient over a grid.
  const Complex oracle = grid_integral_top(ada, 8);
  CHECK(std::abs(integral - oracle) < 1e-10);
}

TEST_CASE("exterior derivative: trivial cases and d o d = 0") {
  TrigPolyForm c(3, 0, 1);
  c.add_term({0, 0, 0}, std::vector<int>{}, Complex(2.5, 0));
  CHECK(ext_d(c).is_zero());

  TrigPolyForm e(3, 0, 1);
  e.add_term({1, 0, 0}, std::vector<int>{}, Complex(1, 0));
  const TrigPolyForm de = ext_d(e);
  CHECK(de.term_count() == 1);
  const Mat coef = de.coefficient({1, 0, 0}, IndexMask{1});
  CHECK(std::abs(coef(0, 0) - Complex(0, 2 * M_PI)) < 1e-12);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    const int deg = trial % 2;
    const TrigPolyForm f = random_form(rng, 3, deg, 1, 2, 5);
    CHECK(ext_d(ext_d(f)).is_zero());
  }
  for (int trial = 0; trial < 4; ++trial) {
    const TrigPolyForm f = random_form(rng, 5, 2, 1, 1, 5);
    CHECK(ext_d(ext_d(f)).is_zero());
  }
}

TEST_CASE("Leibniz rule d(a^b) = da^b + (-1)^deg a^db on random forms") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const int da = trial % 3, db = (trial / 2) % 2;
    const TrigPolyForm a = random_form(rng, 5, da, 1, 1, 4);
    const TrigPolyForm b = random_form(rng, 5, db, 1, 1, 4);
    TrigPolyForm lhs = ext_d(wedge(a, b));
    TrigPolyForm rhs = wedge(ext_d(a), b);
    TrigPolyForm second = wedge(a, ext_d(b));
    second *= Complex(da % 2 == 0 ? 1.0 : -1.0, 0);
    rhs += second;
    lhs -= rhs;
    CHECK(lhs.max_abs() < 1e-10);
  }
}

TEST_CASE("graded commutativity for scalar-fiber forms") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int da = trial % 3, db = (trial / 3) % 3;
    const TrigPolyForm a = random_form(rng, 5, da, 1, 1, 4);
    const TrigPolyForm b = random_form(rng, 5, db, 1, 1, 4);
    TrigPolyForm lhs = wedge(a, b);
    TrigPolyForm rhs = wedge(b, a);
    rhs *= Complex((da * db) % 2 == 0 ? 1.0 : -1.0, 0);
    lhs -= rhs;
    CHECK(lhs.is_zero());
  }
}

TEST_CASE("Stokes on the closed torus: integrate_top(d b) = 0 exactly") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 8; ++trial) {
    const TrigPolyForm b = random_form(rng, 3, 2, 1, 3, 8);
    const Complex integral = integrate_top_scalar(ext_d(b));
    CHECK(std::abs(integral) < 1e-13);
  }
}

TEST_CASE("top-degree integration: unit volume and oscillatory mean zero") {
  TrigPolyForm vol(3, 3, 1);
  vol.add_term({0, 0, 0}, std::vector<int>{0, 1, 2}, Complex(1, 0));
  CHECK(std::abs(integrate_top_scalar(vol) - Complex(1, 0)) < 1e-15);

  TrigPolyForm osc(3, 3, 1);
  osc.add_term({1, 0, 0}, std::vector<int>{0, 1, 2}, Complex(1, 0));
  CHECK(std::abs(integrate_top_scalar(osc)) < 1e-15);

  CHECK_THROWS_AS((void)integrate_top(dx(3, 0)), ContractViolation);
}

TEST_CASE("exp_form: zero input, nilpotency at n=3, three-term series at n=5") {
  const MixedForm e0 = exp_form(TrigPolyForm::zero(3, 2, 1));
  CHECK(e0.component(0).coefficient(Momentum(3, 0), 0)(0, 0) == Complex(1, 0));
  for (int d = 1; d <= 3; ++d) CHECK(e0.component(d).is_zero());

  std::mt19937_64 rng(15);
  const TrigPolyForm f3 = random_form(rng, 3, 2, 1, 2, 4);
  const MixedForm e3 = exp_form(f3);
  TrigPolyForm diff = e3.component(2);
  diff -= f3;
  CHECK(diff.is_zero());  // F^2 has degree 4 > 3

  const TrigPolyForm f5 = random_form(rng, 5, 2, 1, 1, 4);
  const MixedForm e5 = exp_form(f5);
  // Direct series oracle: 1 + F + F^F/2.
  TrigPolyForm q = wedge(f5, f5);
  q *= Complex(0.5, 0);
  TrigPolyForm d4 = e5.component(4);
  d4 -= q;
  CHECK(d4.max_abs() < 1e-12);
  TrigPolyForm d2 = e5.component(2);
  d2 -= f5;
  CHECK(d2.is_zero());
}

TEST_CASE("chs: coincident endpoints vanish; n=1 winding value") {
  const Connection a0 = Connection::flat(1, {0.3});
  const MixedForm zero = chs(a0, a0);
  CHECK(zero.is_zero());

  const int m = 3;
  const Connection a1 = Connection::flat(1, {0.3 + 2 * M_PI * m});
  const MixedForm c = chs(a0, a1);
  const Complex top = integrate_top_scalar(c.component(1));
  CHECK(std::abs(top - Complex(0, 2 * M_PI * m)) < 1e-10);
  const double pred = prediction_value(a0, a1);
  CHECK(pred == doctest::Approx(double(m)).epsilon(1e-12));
}

TEST_CASE("chs path independence against a closed form (abelian and matrix fibers)") {
  std::mt19937_64 rng(16);
  for (int fiber : {1, 2}) {
    for (int trial = 0; trial < 3; ++trial) {
      const int n = 3;
      auto conn = [&](double scale_hol, int seed_shift) {
        TrigPolyForm osc = random_u_one_form(rng, n, fiber, 1, 3);
        std::vector<double> hol(n, 0.0);
        for (int j = 0; j < n; ++j) hol[j] = 0.2 * scale_hol * (j + 1 + seed_shift);
        return Connection(n, hol, osc);
      };
      const Connection a0 = conn(1.0, 0);
      const Connection amid = conn(-0.5, 1);
      const Connection a1 = conn(0.7, 2);

      // mu: a random closed 2-form (exact plus a constant harmonic part).
      TrigPolyForm mu = ext_d(random_form(rng, n, 1, 1, 1, 4));
      mu.add_term(Momentum(n, 0), std::vector<int>{0, 1}, Complex(0.4, 0));

      const auto pair_with = [&](const MixedForm& cs) {
        return integrate_top_scalar(wedge(MixedForm([&] {
                                            MixedForm m(n, 1);
                                            m.set_component(mu);
                                            return m;
                                          }()),
                                          cs.component(1))
                                        .component(n));
      };
      const Complex straight = pair_with(chs(a0, a1));
      Complex detour = pair_with(chs(a0, amid));
      detour += pair_with(chs(amid, a1));
      CHECK(std::abs(straight - detour) <= 1e-10 * std::max(1.0, std::abs(straight)));
    }
  }
}

TEST_CASE("ahat_form: flat input, vanishing low components, series oracle at degree 4") {
  const MixedForm flat = ahat_form(CurvatureInput::zero(3, 3));
  CHECK(flat.component(0).coefficient(Momentum(3, 0), 0)(0, 0) == Complex(1, 0));
  for (int d = 1; d <= 3; ++d) CHECK(flat.component(d).is_zero());

  // Random constant antisymmetric 4x4 fiber on T^5.
  std::mt19937_64 rng(17);
  Mat antisym = specflow::testing::random_matrix(rng, 4);
  antisym = (antisym - antisym.transpose()).eval();
  antisym = antisym.real().cast<Complex>();
  TrigPolyForm r2(5, 2, 4);
  r2.add_term(Momentum(5, 0), std::vector<int>{0, 1}, antisym);
  r2.add_term(Momentum(5, 0), std::vector<int>{2, 3}, Mat(0.7 * antisym));

  const MixedForm omega = ahat_form(CurvatureInput(r2));
  CHECK(omega.component(0).coefficient(Momentum(5, 0), 0)(0, 0) == Complex(1, 0));
  CHECK(omega.component(1).is_zero());
  CHECK(omega.component(2).is_zero());
  CHECK(omega.component(3).is_zero());

  // Brute-force oracle: j = det(I + M^2/6 + ...) via Leibniz determinant of the
  // matrix of forms, then (1+x)^{-1/2} binomial series. Degree 4 keeps only
  // j_4 = tr(M^2)/6 and Omega_4 = -j_4/2 = -tr(M^2)/12 with M = R/2.
  TrigPolyForm m = r2;
  m *= Complex(0.5, 0);
  TrigPolyForm m2 = wedge(m, m);
  TrigPolyForm tr_m2 = m2.fiber_trace();
  TrigPolyForm oracle4 = tr_m2;
  oracle4 *= Complex(-1.0 / 12.0, 0);
  TrigPolyForm diff = omega.component(4);
  diff -= oracle4;
  CHECK(diff.max_abs() < 1e-12);
}

TEST_CASE("ahat_form full series against binomial oracle on T^9") {
  // Exercises degree-8 terms: exp(tr log) route vs det + (1+x)^{-1/2} route.
  std::mt19937_64 rng(18);
  Mat a = specflow::testing::random_matrix(rng, 2);
  a = (a - a.transpose()).eval();
  a = a.real().cast<Complex>();
  TrigPolyForm r2(9, 2, 2);
  r2.add_term(Momentum(9, 0), std::vector<int>{0, 1}, a);
  r2.add_term(Momentum(9, 0), std::vector<int>{2, 3}, Mat(-0.3 * a));
  r2.add_term(Momentum(9, 0), std::vector<int>{4, 5}, Mat(0.9 * a));

  const MixedForm omega = ahat_form(CurvatureInput(r2));

  // Oracle: S = sinh(M)/M termwise, det via 2x2 Leibniz, then binomial.
  TrigPolyForm m = r2;
  m *= Complex(0.5, 0);
  const TrigPolyForm m2 = wedge(m, m);
  const TrigPolyForm m4 = wedge(m2, m2);
  // S = I + M^2/6 + M^4/120
  auto entry = [&](const TrigPolyForm& f, int r, int c) {
    TrigPolyForm out(9, f.degree(), 1);
    for (const auto& [key, mat] : f.terms()) {
      Mat v(1, 1);
      v(0, 0) = mat(r, c);
      out.add_term(key.k, key.mask, v);
    }
    out.prune();
    return out;
  };
  MixedForm s00(9, 1), s01(9, 1), s10(9, 1), s11(9, 1);
  s00.component(0) = TrigPolyForm::identity(9, 1);
  s11.component(0) = TrigPolyForm::identity(9, 1);
  for (auto [form, w] : {std::pair<const TrigPolyForm*, double>{&m2, 1.0 / 6.0},
                         std::pair<const TrigPolyForm*, double>{&m4, 1.0 / 120.0}}) {
    for (auto [mf, r, c] : {std::tuple<MixedForm*, int, int>{&s00, 0, 0},
                            std::tuple<MixedForm*, int, int>{&s01, 0, 1},
                            std::tuple<MixedForm*, int, int>{&s10, 1, 0},
                            std::tuple<MixedForm*, int, int>{&s11, 1, 1}}) {
      TrigPolyForm e = entry(*form, r, c);
      e *= Complex(w, 0);
      mf->component(e.degree()) += e;
    }
  }
  // det = s00 s11 - s01 s10 ; x = det - 1 ; Omega = 1 - x/2 + 3/8 x^2
  MixedForm det = wedge(s00, s11);
  MixedForm off = wedge(s01, s10);
  off *= Complex(-1, 0);
  det += off;
  MixedForm x = det;
  x.component(0) = TrigPolyForm::zero(9, 0, 1);
  MixedForm oracle = MixedForm::identity(9, 1);
  MixedForm xh = x;
  xh *= Complex(-0.5, 0);
  oracle += xh;
  MixedForm x2 = wedge(x, x);
  x2 *= Complex(3.0 / 8.0, 0);
  oracle += x2;

  for (int d = 0; d <= 9; ++d) {
    TrigPolyForm diff = omega.component(d);
    diff -= oracle.component(d);
    CHECK(diff.max_abs() < 1e-12);
  }
}

TEST_CASE("prediction: trivial, antisymmetric, and matching the leading-order law") {
  const Connection a0 = Connection::flat(3, {0.31, 0.17, 0.47});
  CHECK(prediction_value(a0, a0) == 0.0);

  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 3; ++trial) {
    const Connection c0(3, {0.1, 0.2, -0.3}, random_u_one_form(rng, 3, 1, 1, 3));
    const Connection c1(3, {-0.4, 0.05, 0.6}, random_u_one_form(rng, 3, 1, 1, 3));
    const double ab = prediction_value(c0, c1);
    const double ba = prediction_value(c1, c0);
    CHECK(std::abs(ab + ba) <= 1e-10 * std::max(1.0, std::abs(ab)));
  }

  // Path with increment r * (i a_contact) on the operator side carries half
  // that on the base-connection side; leading_order at amplitude 2 matches
  // the exact integral at every r when the base curvature vanishes.
  for (double r : {1.0, 4.0, 16.0}) {
    Connection a1(3, a0.hol, contact_one_form(r));
    const double pred = prediction_value(a0, a1);
    const double lead = leading_order(contact_one_form(2.0), r);
    CHECK(pred == doctest::Approx(lead).epsilon(1e-12));
    CHECK(pred == doctest::Approx(-r * r / (4.0 * M_PI)).epsilon(1e-12));
  }
  // Same identity in base-side normalization.
  for (double r : {2.0, 8.0}) {
    Connection a1(3, a0.hol, contact_one_form(0.5 * r));
    const double pred = prediction_value(a0, a1);
    const double lead = leading_order(contact_one_form(1.0), r);
    CHECK(pred == doctest::Approx(lead).epsilon(1e-12));
    CHECK(lead == doctest::Approx(-r * r / (16.0 * M_PI)).epsilon(1e-12));
  }
}

TEST_CASE("leading_order: closed perturbation, homogeneity, frozen contact value") {
  TrigPolyForm closed(3, 1, 1);
  closed.add_term({0, 1, 0}, std::vector<int>{1}, Complex(0, 0.5));
  closed.add_term({0, -1, 0}, std::vector<int>{1}, Complex(0, 0.5));
  // da = 0 for a 1-form f(x2) dx2
  CHECK(leading_order(closed, 3.0) == 0.0);

  const TrigPolyForm a = contact_one_form(1.0);
  const double l1 = leading_order(a, 3.0);
  const double l2 = leading_order(a, 6.0);
  CHECK(l2 / l1 == doctest::Approx(4.0).epsilon(1e-12));  // 2^{(n+1)/2}
  CHECK(l1 == doctest::Approx(-9.0 / (16.0 * M_PI)).epsilon(1e-12));

  TrigPolyForm not_u1(3, 1, 1);
  not_u1.add_term({0, 0, 1}, std::vector<int>{0}, Complex(1, 0));
  CHECK_THROWS_AS((void)leading_order(not_u1, 2.0), ContractViolation);
}

TEST_CASE("wedge beyond top degree returns the zero form") {
  std::mt19937_64 rng(20);
  const TrigPolyForm a = random_form(rng, 3, 2, 1, 1, 3);
  const TrigPolyForm b = random_form(rng, 3, 2, 1, 1, 3);
  CHECK(wedge(a, b).is_zero());
}

TEST_CASE("chs rejects fiber-size mismatches") {
  std::mt19937_64 rng(21);
  const Connection scalar(3, {0.1, 0.2, 0.3}, random_u_one_form(rng, 3, 1, 1, 2));
  const Connection matrix(3, {0.1, 0.2, 0.3}, random_u_one_form(rng, 3, 2, 1, 2));
  CHECK_THROWS_AS((void)chs(scalar, matrix), ContractViolation);
}
