#pragma once

// Exterior algebra of matrix-valued trigonometric-polynomial differential
// forms on the unit torus T^n. Coefficients are stored sparsely, keyed by
// (Fourier momentum, increasing index tuple); all operations are exact up to
// double rounding, there is no grid and no quadrature error.
//
// Conventions: side length 1, volume 1, coordinates x in [0,1)^n, orientation
// dx_1 ^ ... ^ dx_n > 0, Fourier phases e^{2 pi i k.x}. Axis indices are
// 0-based internally and 1-based in serialized documents.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "specflow/util.hpp"

namespace specflow::forms {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;

// Fourier index; the physical wave-vector is 2*pi*k.
using Momentum = std::vector<int>;

// Coefficients smaller than this (entrywise max-abs) are dropped after each
// operation.
inline constexpr double kPruneTol = 1e-14;

// Index tuple as a bitmask: bit j set means dx_{j+1} is present.
using IndexMask = std::uint32_t;

int mask_degree(IndexMask m);
// Sign of dx_A ^ dx_B relative to the merged increasing tuple; A, B disjoint.
int wedge_sign(IndexMask a, IndexMask b);
// Sign of dx_j ^ dx_I relative to the increasing tuple I + {j}; j not in I.
int insert_sign(int axis, IndexMask I);
std::vector<int> mask_to_indices(IndexMask m);   // 0-based, ascending
IndexMask indices_to_mask(const std::vector<int>& idx, int n);

struct TermKey {
  Momentum k;
  IndexMask mask = 0;
  friend bool operator<(const TermKey& a, const TermKey& b) {
    if (a.k != b.k) return a.k < b.k;
    return a.mask < b.mask;
  }
  friend bool operator==(const TermKey& a, const TermKey& b) {
    return a.k == b.k && a.mask == b.mask;
  }
};

// A homogeneous degree-p form with finite Fourier support and m x m
// matrix-valued coefficients (m = 1 for scalar / u(1) forms).
class TrigPolyForm {
 public:
  TrigPolyForm() = default;
  TrigPolyForm(int n, int degree, int fiber = 1);

  static TrigPolyForm zero(int n, int degree, int fiber = 1) { return {n, degree, fiber}; }
  // Constant 0-form equal to the fiber identity.
  static TrigPolyForm identity(int n, int fiber = 1);

  int dim() const { return n_; }
  int degree() const { return degree_; }
  int fiber() const { return fiber_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }

  const std::map<TermKey, Mat>& terms() const { return terms_; }

  // Accumulates c * e^{2 pi i k.x} dx_I; degree(mask) must match.
  void add_term(const Momentum& k, IndexMask mask, const Mat& c);
  void add_term(const Momentum& k, const std::vector<int>& indices0, const Mat& c);
  // Scalar-fiber convenience.
  void add_term(const Momentum& k, const std::vector<int>& indices0, Complex c);

  Mat coefficient(const Momentum& k, IndexMask mask) const;  // zero matrix if absent

  TrigPolyForm& operator+=(const TrigPolyForm& rhs);
  TrigPolyForm& operator-=(const TrigPolyForm& rhs);
  TrigPolyForm& operator*=(Complex s);
  friend TrigPolyForm operator+(TrigPolyForm a, const TrigPolyForm& b) { return a += b; }
  friend TrigPolyForm operator-(TrigPolyForm a, const TrigPolyForm& b) { return a -= b; }
  friend TrigPolyForm operator*(Complex s, TrigPolyForm a) { return a *= s; }

  void prune(double tol = kPruneTol);

  // Largest coefficient entry (max-abs over all terms).
  double max_abs() const;
  // Largest Fourier index magnitude over the support.
  int support_radius() const;

  // Pointwise coefficient functions: value of the dx_I coefficient at x.
  Mat eval_coefficient(IndexMask mask, const std::vector<double>& x) const;

  // c(-k, I) == conj(c(k, I)) within tol.
  bool is_real_valued(double tol = 1e-12) const;
  // c(-k, I) == -c(k, I)^dagger within tol (u(m)-valued forms).
  bool is_anti_hermitian(double tol = 1e-12) const;
  // No zero-momentum term.
  bool is_zero_mean() const;

  TrigPolyForm fiber_trace() const;      // m x m -> 1 x 1
  TrigPolyForm fiber_adjoint() const;    // c(k) -> c(-k)^dagger  (pointwise adjoint)

 private:
  int n_ = 0;
  int degree_ = 0;
  int fiber_ = 1;
  std::map<TermKey, Mat> terms_;
};

// Graded sum with one homogeneous component per degree 0..n.
class MixedForm {
 public:
  MixedForm() = default;
  MixedForm(int n, int fiber = 1);
  static MixedForm identity(int n, int fiber = 1);

  int dim() const { return n_; }
  int fiber() const { return fiber_; }

  const TrigPolyForm& component(int degree) const;
  TrigPolyForm& component(int degree);

  MixedForm& operator+=(const MixedForm& rhs);
  MixedForm& operator*=(Complex s);
  friend MixedForm operator*(Complex s, MixedForm a) { return a *= s; }

  void set_component(TrigPolyForm f);
  void prune(double tol = kPruneTol);
  double max_abs() const;
  MixedForm fiber_trace() const;
  bool is_zero() const;

 private:
  int n_ = 0;
  int fiber_ = 1;
  std::vector<TrigPolyForm> comps_;
};

// --- Core operations -------------------------------------------------------

// Exterior product. Matching n required; fiber sizes must agree or one side
// must be scalar. Degrees adding beyond n give the (clamped) zero form.
TrigPolyForm wedge(const TrigPolyForm& a, const TrigPolyForm& b);
MixedForm wedge(const MixedForm& a, const MixedForm& b);
MixedForm wedge(const MixedForm& a, const TrigPolyForm& b);

// Exterior derivative; top-degree input maps to the zero form.
TrigPolyForm ext_d(const TrigPolyForm& a);

// Integral over T^n of a top-degree form: vol * (zero-momentum coefficient of
// the dx_1...dx_n component), vol = 1. Fiber matrix for m > 1.
Mat integrate_top(const TrigPolyForm& a);
Complex integrate_top_scalar(const TrigPolyForm& a);

// exp(F) = sum_j F^{^j} / j! truncated at degree n; F even degree >= 2.
MixedForm exp_form(const TrigPolyForm& F);
MixedForm exp_form_mixed(const MixedForm& F);  // even components, no 0-form part

// Pointwise evaluation of the full form at x: one coefficient matrix per
// index tuple. Used by sup-norm estimates and density checks.
std::map<IndexMask, Mat> eval_at(const TrigPolyForm& a, const std::vector<double>& x);

}  // namespace specflow::forms
