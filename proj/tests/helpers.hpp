#pragma once

// Shared generators and independent oracles for the test suites.

#include <random>

#include "specflow/forms.hpp"

namespace specflow::testing {

using forms::Complex;
using forms::Mat;
using forms::Momentum;
using forms::TrigPolyForm;

inline Momentum random_momentum(std::mt19937_64& rng, int n, int support) {
  std::uniform_int_distribution<int> d(-support, support);
  Momentum k(n);
  for (int j = 0; j < n; ++j) k[j] = d(rng);
  return k;
}

inline Mat random_matrix(std::mt19937_64& rng, int fiber) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(fiber, fiber);
  for (int r = 0; r < fiber; ++r)
    for (int c = 0; c < fiber; ++c) m(r, c) = Complex(g(rng), g(rng));
  return m;
}

inline TrigPolyForm random_form(std::mt19937_64& rng, int n, int degree, int fiber = 1,
                                int support = 2, int nterms = 6) {
  TrigPolyForm f(n, degree, fiber);
  std::vector<int> axes(n);
  for (int j = 0; j < n; ++j) axes[j] = j;
  for (int t = 0; t < nterms; ++t) {
    std::shuffle(axes.begin(), axes.end(), rng);
    std::vector<int> idx(axes.begin(), axes.begin() + degree);
    f.add_term(random_momentum(rng, n, support), forms::indices_to_mask(idx, n),
               random_matrix(rng, fiber));
  }
  f.prune();
  return f;
}

// Zero-mean 1-form with anti-hermitian fiber symmetry c(-k) = -c(k)^dagger.
inline TrigPolyForm random_u_one_form(std::mt19937_64& rng, int n, int fiber = 1, int support = 1,
                                      int nterms = 3) {
  TrigPolyForm f(n, 1, fiber);
  std::uniform_int_distribution<int> axis(0, n - 1);
  for (int t = 0; t < nterms; ++t) {
    Momentum k = random_momentum(rng, n, support);
    bool zero = true;
    for (int v : k) zero = zero && v == 0;
    if (zero) k[0] = 1;
    const int j = axis(rng);
    const Mat c = random_matrix(rng, fiber);
    Momentum mk(k);
    for (auto& v : mk) v = -v;
    f.add_term(k, forms::IndexMask{1} << j, c);
    f.add_term(mk, forms::IndexMask{1} << j, Mat(-c.adjoint()));
  }
  f.prune();
  return f;
}

// Integral of a top-degree scalar form by averaging its pointwise coefficient
// over a uniform grid; exact for trig polynomials below the Nyquist limit.
// Independent of the sparse zero-mode lookup used by integrate_top.
inline Complex grid_integral_top(const TrigPolyForm& f, int per_axis) {
  const int n = f.dim();
  const forms::IndexMask full = (forms::IndexMask{1} << n) - 1;
  std::size_t total = 1;
  for (int j = 0; j < n; ++j) total *= static_cast<std::size_t>(per_axis);
  Complex acc(0, 0);
  std::vector<double> x(n);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    for (int j = n - 1; j >= 0; --j) {
      x[j] = static_cast<double>(rest % per_axis) / per_axis;
      rest /= per_axis;
    }
    acc += f.eval_coefficient(full, x)(0, 0);
  }
  return acc / static_cast<double>(total);
}

}  // namespace specflow::testing
