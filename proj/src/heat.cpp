#include "specflow/heat.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "specflow/chern.hpp"
#include "specflow/util.hpp"

namespace specflow::heat {

using dirac::BlockEig;
using dirac::DiracBlocks;
using dirac::EigenSystem;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using forms::Complex;
using forms::TrigPolyForm;

double min_admissible_t(double window) {
  return -std::log(kTruncationCert) / (window * window);
}

std::vector<std::vector<double>> uniform_points(int n, int per_axis) {
  std::size_t total = 1;
  for (int j = 0; j < n; ++j) total *= static_cast<std::size_t>(per_axis);
  std::vector<std::vector<double>> pts(total, std::vector<double>(n, 0.0));
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    for (int j = n - 1; j >= 0; --j) {
      pts[p][j] = static_cast<double>(rest % per_axis) / per_axis;
      rest /= per_axis;
    }
  }
  return pts;
}

HeatProbe make_probe(int n, double t_lo, double t_hi, int t_count, int per_axis) {
  HeatProbe probe;
  probe.t_grid = util::log_grid(t_lo, t_hi, t_count);
  probe.x_grid = uniform_points(n, per_axis);
  return probe;
}

namespace {

void check_admissible(const EigenSystem& eig, double t) {
  const double tmin = min_admissible_t(eig.trusted_window);
  if (t < tmin)
    throw ContractViolation("heat: t below certified-truncation minimum " + std::to_string(tmin));
}

// Indices of the merged spectrum in ascending |lambda| order (deterministic).
std::vector<std::size_t> abs_order(const EigenSystem& eig) {
  std::vector<std::size_t> idx(eig.values.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double aa = std::abs(eig.values[a]), ab = std::abs(eig.values[b]);
    if (aa != ab) return aa < ab;
    if (eig.value_block[a] != eig.value_block[b]) return eig.value_block[a] < eig.value_block[b];
    return eig.value_index[a] < eig.value_index[b];
  });
  return idx;
}

// Pointwise section value of a stored eigenvector at x.
VectorXcd eigenvector_at(const DiracBlocks& desc, std::size_t block, const VectorXcd& v,
                         const std::vector<double>& x) {
  const int cell = desc.rep.spinor_dim() * desc.fiber;
  const int nfree = static_cast<int>(desc.free_axes.size());
  std::size_t nmom = 1;
  for (int a = 0; a < nfree; ++a) nmom *= static_cast<std::size_t>(2 * desc.K + 1);
  const forms::Momentum label = desc.label_of(block);

  double base_phase = 0;
  for (int axis : desc.conserved_axes) base_phase += label[axis] * x[axis];

  VectorXcd out = VectorXcd::Zero(cell);
  std::vector<int> pos(nfree, 0);
  for (std::size_t m = 0; m < nmom; ++m) {
    std::size_t rest = m;
    for (int a = nfree - 1; a >= 0; --a) {
      pos[a] = static_cast<int>(rest % (2 * desc.K + 1)) - desc.K;
      rest /= (2 * desc.K + 1);
    }
    double phase = base_phase;
    for (int a = 0; a < nfree; ++a) phase += pos[a] * x[desc.free_axes[a]];
    const Complex ph = std::exp(Complex(0, 2.0 * M_PI * phase));
    out += ph * v.segment(m * cell, cell);
  }
  return out;
}

Complex inv_two_pi_i_pow(int m) {
  const Complex base = Complex(0, -1) / (2.0 * M_PI);
  Complex acc(1, 0);
  for (int i = 0; i < m; ++i) acc *= base;
  return acc;
}

// tr(ahat ^ exp F) for the system's own connection, as a mixed form.
forms::MixedForm density_form(const DiracBlocks& desc, const TrigPolyForm& ahat) {
  const TrigPolyForm F = desc.conn.curvature();
  forms::MixedForm expf = F.is_zero() ? forms::MixedForm::identity(desc.n, desc.fiber)
                                      : forms::exp_form(F);
  return wedge(expf, ahat).fiber_trace();
}

}  // namespace

double heat_trace(const dirac::EigenSystem& eig, double t) {
  check_admissible(eig, t);
  const auto order = abs_order(eig);
  double acc = 0;
  for (std::size_t i : order) acc += std::exp(-eig.values[i] * eig.values[i] * t);
  return acc;
}

Eigen::MatrixXcd diag_kernel(const dirac::EigenSystem& eig, double t,
                             const std::vector<double>& x) {
  check_admissible(eig, t);
  if (eig.blocks.empty())
    throw ContractViolation("diag_kernel: eigenvectors were not stored");
  const int cell = eig.desc.rep.spinor_dim() * eig.desc.fiber;
  MatrixXcd acc = MatrixXcd::Zero(cell, cell);
  const auto order = abs_order(eig);
  for (std::size_t i : order) {
    const std::uint32_t b = eig.value_block[i];
    const BlockEig& be = eig.blocks[b];
    const auto pos = std::lower_bound(be.kept.begin(), be.kept.end(),
                                      static_cast<int>(eig.value_index[i]));
    if (pos == be.kept.end() || *pos != static_cast<int>(eig.value_index[i]))
      throw ContractViolation("diag_kernel: eigenvector missing inside trusted window");
    const VectorXcd zx = eigenvector_at(eig.desc, b, be.vectors.col(pos - be.kept.begin()), x);
    acc += std::exp(-eig.values[i] * eig.values[i] * t) * (zx * zx.adjoint());
  }
  return acc;
}

long count_eigs(const dirac::EigenSystem& eig, double lambda) {
  if (lambda > eig.trusted_window + 1e-12)
    throw ContractViolation("count_eigs: lambda beyond trusted window");
  long c = 0;
  for (double v : eig.values)
    if (std::abs(v) < lambda) ++c;
  return c;
}

WeightedTraceResult weighted_cl_trace(const dirac::EigenSystem& eig,
                                      const forms::TrigPolyForm& ahat, double t, double lambda,
                                      double r_value) {
  if (r_value * t > 1.0 + 1e-12)
    throw ContractViolation("weighted_cl_trace: precondition r*t <= 1 violated");
  if (lambda > eig.trusted_window + 1e-12)
    throw ContractViolation("weighted_cl_trace: lambda beyond trusted window");
  if (eig.blocks.empty())
    throw ContractViolation("weighted_cl_trace: eigenvectors were not stored");

  WeightedTraceResult out;
  const auto order = abs_order(eig);
  for (std::size_t i : order) {
    const double v = eig.values[i];
    if (std::abs(v) >= lambda) continue;
    const std::uint32_t b = eig.value_block[i];
    const BlockEig& be = eig.blocks[b];
    const auto pos = std::lower_bound(be.kept.begin(), be.kept.end(),
                                      static_cast<int>(eig.value_index[i]));
    if (pos == be.kept.end() || *pos != static_cast<int>(eig.value_index[i]))
      throw ContractViolation("weighted_cl_trace: eigenvector missing below lambda");
    const VectorXcd vec = be.vectors.col(pos - be.kept.begin());
    out.p_lambda += dirac::cl_pairing(eig.desc, b, vec, ahat) * std::exp(-v * v * t);
  }

  const int n = eig.desc.n;
  const forms::MixedForm dens = density_form(eig.desc, ahat);
  const Complex integral = forms::integrate_top_scalar(dens.component(n));
  const Complex scaled =
      std::sqrt(M_PI) * inv_two_pi_i_pow((n + 1) / 2) / std::sqrt(t) * integral;
  out.density = scaled.real();
  if (std::abs(scaled.imag()) > 1e-9 * std::max(1.0, std::abs(scaled.real())))
    throw CertificateError("weighted_cl_trace: density has an imaginary residue");
  out.residual = out.p_lambda - out.density;
  return out;
}

PointwiseDensity pointwise_density_check(const dirac::EigenSystem& eig,
                                         const forms::TrigPolyForm& ahat, double t,
                                         const std::vector<double>& x) {
  PointwiseDensity out;
  const int n = eig.desc.n;
  const int sd = eig.desc.rep.spinor_dim();
  const int fiber = eig.desc.fiber;

  // cl(ahat)|_x, spinor (x) fiber.
  MatrixXcd cl_at = MatrixXcd::Zero(sd * fiber, sd * fiber);
  for (const auto& [key, c] : ahat.terms()) {
    const int axis = forms::mask_to_indices(key.mask)[0];
    double phase = 0;
    for (int j = 0; j < n; ++j) phase += key.k[j] * x[j];
    const Complex ph = std::exp(Complex(0, 2.0 * M_PI * phase));
    const MatrixXcd& g = eig.desc.rep.gamma[axis];
    for (int s = 0; s < sd; ++s)
      for (int u = 0; u < sd; ++u)
        for (int f1 = 0; f1 < fiber; ++f1)
          for (int f2 = 0; f2 < fiber; ++f2) {
            const Complex cv = (ahat.fiber() == fiber) ? c(f1, f2)
                                                       : (f1 == f2 ? c(0, 0) : Complex(0, 0));
            cl_at(s * fiber + f1, u * fiber + f2) += ph * g(s, u) * cv;
          }
  }
  const MatrixXcd kernel = diag_kernel(eig, t, x);
  const Complex lhs = (cl_at * kernel).trace();
  out.lhs = lhs.real();

  const forms::MixedForm dens = density_form(eig.desc, ahat);
  const forms::IndexMask full = (forms::IndexMask{1} << n) - 1;
  const Complex top = dens.component(n).eval_coefficient(full, x)(0, 0);
  const Complex rhs = std::sqrt(M_PI) / std::sqrt(t) * inv_two_pi_i_pow((n + 1) / 2) * top;
  out.rhs = rhs.real();
  return out;
}

}  // namespace specflow::heat
