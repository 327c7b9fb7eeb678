#include "specflow/forms.hpp"

#include <bit>
#include <cmath>

namespace specflow::forms {

int mask_degree(IndexMask m) { return std::popcount(m); }

int wedge_sign(IndexMask a, IndexMask b) {
  int inversions = 0;
  for (IndexMask bb = b; bb; bb &= bb - 1) {
    const int j = std::countr_zero(bb);
    inversions += std::popcount(a >> (j + 1));
  }
  return (inversions & 1) ? -1 : 1;
}

int insert_sign(int axis, IndexMask I) {
  const IndexMask below = I & ((IndexMask{1} << axis) - 1);
  return (std::popcount(below) & 1) ? -1 : 1;
}

std::vector<int> mask_to_indices(IndexMask m) {
  std::vector<int> out;
  for (IndexMask mm = m; mm; mm &= mm - 1) out.push_back(std::countr_zero(mm));
  return out;
}

IndexMask indices_to_mask(const std::vector<int>& idx, int n) {
  IndexMask m = 0;
  for (int j : idx) {
    if (j < 0 || j >= n) throw ContractViolation("index out of range for dimension");
    const IndexMask bit = IndexMask{1} << j;
    if (m & bit) throw ContractViolation("repeated index in tuple");
    m |= bit;
  }
  return m;
}

TrigPolyForm::TrigPolyForm(int n, int degree, int fiber) : n_(n), degree_(degree), fiber_(fiber) {
  if (n < 1 || degree < 0 || degree > n || fiber < 1)
    throw ContractViolation("TrigPolyForm: bad (n, degree, fiber)");
}

TrigPolyForm TrigPolyForm::identity(int n, int fiber) {
  TrigPolyForm f(n, 0, fiber);
  f.add_term(Momentum(n, 0), IndexMask{0}, Mat::Identity(fiber, fiber));
  return f;
}

void TrigPolyForm::add_term(const Momentum& k, IndexMask mask, const Mat& c) {
  if (static_cast<int>(k.size()) != n_) throw ContractViolation("momentum length != n");
  if (mask_degree(mask) != degree_) throw ContractViolation("index tuple degree mismatch");
  if (mask >> n_) throw ContractViolation("index tuple exceeds dimension");
  if (c.rows() != fiber_ || c.cols() != fiber_) throw ContractViolation("fiber size mismatch");
  auto it = terms_.find(TermKey{k, mask});
  if (it == terms_.end())
    terms_.emplace(TermKey{k, mask}, c);
  else
    it->second += c;
}

void TrigPolyForm::add_term(const Momentum& k, const std::vector<int>& indices0, const Mat& c) {
  add_term(k, indices_to_mask(indices0, n_), c);
}

void TrigPolyForm::add_term(const Momentum& k, const std::vector<int>& indices0, Complex c) {
  Mat m(1, 1);
  m(0, 0) = c;
  add_term(k, indices_to_mask(indices0, n_), m);
}

Mat TrigPolyForm::coefficient(const Momentum& k, IndexMask mask) const {
  auto it = terms_.find(TermKey{k, mask});
  if (it == terms_.end()) return Mat::Zero(fiber_, fiber_);
  return it->second;
}

TrigPolyForm& TrigPolyForm::operator+=(const TrigPolyForm& rhs) {
  if (rhs.is_zero()) return *this;
  if (n_ != rhs.n_ || degree_ != rhs.degree_ || fiber_ != rhs.fiber_)
    throw ContractViolation("form sum: shape mismatch");
  for (const auto& [key, c] : rhs.terms_) {
    auto it = terms_.find(key);
    if (it == terms_.end())
      terms_.emplace(key, c);
    else
      it->second += c;
  }
  prune();
  return *this;
}

TrigPolyForm& TrigPolyForm::operator-=(const TrigPolyForm& rhs) {
  if (rhs.is_zero()) return *this;
  if (n_ != rhs.n_ || degree_ != rhs.degree_ || fiber_ != rhs.fiber_)
    throw ContractViolation("form difference: shape mismatch");
  for (const auto& [key, c] : rhs.terms_) {
    auto it = terms_.find(key);
    if (it == terms_.end())
      terms_.emplace(key, Mat(-c));
    else
      it->second -= c;
  }
  prune();
  return *this;
}

TrigPolyForm& TrigPolyForm::operator*=(Complex s) {
  for (auto& [key, c] : terms_) c *= s;
  prune();
  return *this;
}

void TrigPolyForm::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second.cwiseAbs().maxCoeff() < tol)
      it = terms_.erase(it);
    else
      ++it;
  }
}

double TrigPolyForm::max_abs() const {
  double m = 0;
  for (const auto& [key, c] : terms_) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

int TrigPolyForm::support_radius() const {
  int r = 0;
  for (const auto& [key, c] : terms_)
    for (int kj : key.k) r = std::max(r, std::abs(kj));
  return r;
}

Mat TrigPolyForm::eval_coefficient(IndexMask mask, const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != n_) throw ContractViolation("eval: point dimension mismatch");
  Mat acc = Mat::Zero(fiber_, fiber_);
  for (const auto& [key, c] : terms_) {
    if (key.mask != mask) continue;
    double phase = 0;
    for (int j = 0; j < n_; ++j) phase += key.k[j] * x[j];
    acc += std::exp(Complex(0, 2.0 * M_PI * phase)) * c;
  }
  return acc;
}

namespace {
Momentum negate(const Momentum& k) {
  Momentum out(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) out[i] = -k[i];
  return out;
}
}  // namespace

bool TrigPolyForm::is_real_valued(double tol) const {
  for (const auto& [key, c] : terms_) {
    const Mat other = coefficient(negate(key.k), key.mask);
    if ((other - c.conjugate()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

bool TrigPolyForm::is_anti_hermitian(double tol) const {
  for (const auto& [key, c] : terms_) {
    const Mat other = coefficient(negate(key.k), key.mask);
    if ((other + c.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

bool TrigPolyForm::is_zero_mean() const {
  for (const auto& [key, c] : terms_) {
    bool all_zero = true;
    for (int kj : key.k) all_zero = all_zero && kj == 0;
    if (all_zero) return false;
  }
  return true;
}

TrigPolyForm TrigPolyForm::fiber_trace() const {
  TrigPolyForm out(n_, degree_, 1);
  for (const auto& [key, c] : terms_) {
    Mat t(1, 1);
    t(0, 0) = c.trace();
    out.add_term(key.k, key.mask, t);
  }
  out.prune();
  return out;
}

TrigPolyForm TrigPolyForm::fiber_adjoint() const {
  TrigPolyForm out(n_, degree_, fiber_);
  for (const auto& [key, c] : terms_) out.add_term(negate(key.k), key.mask, c.adjoint());
  out.prune();
  return out;
}

MixedForm::MixedForm(int n, int fiber) : n_(n), fiber_(fiber) {
  if (n < 1 || fiber < 1) throw ContractViolation("MixedForm: bad (n, fiber)");
  comps_.reserve(n + 1);
  for (int d = 0; d <= n; ++d) comps_.emplace_back(n, d, fiber);
}

MixedForm MixedForm::identity(int n, int fiber) {
  MixedForm f(n, fiber);
  f.comps_[0] = TrigPolyForm::identity(n, fiber);
  return f;
}

const TrigPolyForm& MixedForm::component(int degree) const {
  if (degree < 0 || degree > n_) throw ContractViolation("component degree out of range");
  return comps_[degree];
}

TrigPolyForm& MixedForm::component(int degree) {
  if (degree < 0 || degree > n_) throw ContractViolation("component degree out of range");
  return comps_[degree];
}

MixedForm& MixedForm::operator+=(const MixedForm& rhs) {
  if (n_ != rhs.n_ || fiber_ != rhs.fiber_) throw ContractViolation("mixed sum: shape mismatch");
  for (int d = 0; d <= n_; ++d) comps_[d] += rhs.comps_[d];
  return *this;
}

MixedForm& MixedForm::operator*=(Complex s) {
  for (auto& c : comps_) c *= s;
  return *this;
}

void MixedForm::set_component(TrigPolyForm f) {
  if (f.dim() != n_ || f.fiber() != fiber_) throw ContractViolation("set_component: shape mismatch");
  comps_[f.degree()] = std::move(f);
}

void MixedForm::prune(double tol) {
  for (auto& c : comps_) c.prune(tol);
}

double MixedForm::max_abs() const {
  double m = 0;
  for (const auto& c : comps_) m = std::max(m, c.max_abs());
  return m;
}

MixedForm MixedForm::fiber_trace() const {
  MixedForm out(n_, 1);
  for (int d = 0; d <= n_; ++d) out.comps_[d] = comps_[d].fiber_trace();
  return out;
}

bool MixedForm::is_zero() const {
  for (const auto& c : comps_)
    if (!c.is_zero()) return false;
  return true;
}

TrigPolyForm wedge(const TrigPolyForm& a, const TrigPolyForm& b) {
  if (a.dim() != b.dim()) throw ContractViolation("wedge: dimension mismatch");
  const int n = a.dim();
  const int fa = a.fiber(), fb = b.fiber();
  int fiber;
  if (fa == fb)
    fiber = fa;
  else if (fa == 1)
    fiber = fb;
  else if (fb == 1)
    fiber = fa;
  else
    throw ContractViolation("wedge: incompatible fiber sizes");

  const int deg = a.degree() + b.degree();
  if (deg > n) return TrigPolyForm::zero(n, n, fiber);  // vanishes above top degree

  TrigPolyForm out(n, deg, fiber);
  for (const auto& [ka, ca] : a.terms()) {
    for (const auto& [kb, cb] : b.terms()) {
      if (ka.mask & kb.mask) continue;  // repeated dx
      const int sign = wedge_sign(ka.mask, kb.mask);
      Momentum k(n);
      for (int j = 0; j < n; ++j) k[j] = ka.k[j] + kb.k[j];
      Mat prod;
      if (fa == fb)
        prod = ca * cb;
      else if (fa == 1)
        prod = ca(0, 0) * cb;
      else
        prod = cb(0, 0) * ca;
      out.add_term(k, ka.mask | kb.mask, Mat(double(sign) * prod));
    }
  }
  out.prune();
  return out;
}

MixedForm wedge(const MixedForm& a, const MixedForm& b) {
  if (a.dim() != b.dim()) throw ContractViolation("wedge: dimension mismatch");
  const int n = a.dim();
  const int fiber = (a.fiber() == b.fiber()) ? a.fiber() : std::max(a.fiber(), b.fiber());
  MixedForm out(n, fiber);
  for (int da = 0; da <= n; ++da) {
    if (a.component(da).is_zero()) continue;
    for (int db = 0; db + da <= n; ++db) {
      if (b.component(db).is_zero()) continue;
      out.component(da + db) += wedge(a.component(da), b.component(db));
    }
  }
  return out;
}

MixedForm wedge(const MixedForm& a, const TrigPolyForm& b) {
  MixedForm bm(b.dim(), b.fiber());
  bm.set_component(b);
  return wedge(a, bm);
}

TrigPolyForm ext_d(const TrigPolyForm& a) {
  const int n = a.dim();
  if (a.degree() >= n) return TrigPolyForm::zero(n, n, a.fiber());
  TrigPolyForm out(n, a.degree() + 1, a.fiber());
  const Complex two_pi_i(0, 2.0 * M_PI);
  for (const auto& [key, c] : a.terms()) {
    for (int j = 0; j < n; ++j) {
      if (key.k[j] == 0) continue;
      if (key.mask & (IndexMask{1} << j)) continue;  // dx_j ^ dx_I = 0
      const int sign = insert_sign(j, key.mask);
      out.add_term(key.k, key.mask | (IndexMask{1} << j),
                   Mat((double(sign) * two_pi_i * double(key.k[j])) * c));
    }
  }
  out.prune();
  return out;
}

Mat integrate_top(const TrigPolyForm& a) {
  const int n = a.dim();
  if (a.degree() != n) throw ContractViolation("integrate_top: degree != n");
  const IndexMask full = (n == 32) ? ~IndexMask{0} : ((IndexMask{1} << n) - 1);
  return a.coefficient(Momentum(n, 0), full);
}

Complex integrate_top_scalar(const TrigPolyForm& a) {
  if (a.fiber() != 1) throw ContractViolation("integrate_top_scalar: fiber must be 1");
  return integrate_top(a)(0, 0);
}

MixedForm exp_form(const TrigPolyForm& F) {
  if (F.degree() < 2 || F.degree() % 2 != 0)
    throw ContractViolation("exp_form: need even degree >= 2");
  MixedForm Fm(F.dim(), F.fiber());
  Fm.set_component(F);
  return exp_form_mixed(Fm);
}

MixedForm exp_form_mixed(const MixedForm& F) {
  const int n = F.dim();
  if (!F.component(0).is_zero()) throw ContractViolation("exp_form_mixed: 0-form part must vanish");
  for (int d = 1; d <= n; d += 2)
    if (!F.component(d).is_zero()) throw ContractViolation("exp_form_mixed: odd components present");
  MixedForm out = MixedForm::identity(n, F.fiber());
  MixedForm power = F;
  double factorial = 1.0;
  for (int j = 1; 2 * j <= n; ++j) {
    factorial *= j;
    MixedForm term = power;
    term *= Complex(1.0 / factorial, 0);
    out += term;
    if (2 * (j + 1) > n) break;
    power = wedge(power, F);
    if (power.is_zero()) break;
  }
  return out;
}

std::map<IndexMask, Mat> eval_at(const TrigPolyForm& a, const std::vector<double>& x) {
  std::map<IndexMask, Mat> out;
  for (const auto& [key, c] : a.terms()) {
    double phase = 0;
    for (int j = 0; j < a.dim(); ++j) phase += key.k[j] * x[j];
    const Complex ph = std::exp(Complex(0, 2.0 * M_PI * phase));
    auto it = out.find(key.mask);
    if (it == out.end())
      out.emplace(key.mask, Mat(ph * c));
    else
      it->second += ph * c;
  }
  return out;
}

}  // namespace specflow::forms
