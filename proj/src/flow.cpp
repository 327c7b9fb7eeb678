#include "specflow/flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "specflow/chern.hpp"
#include "specflow/util.hpp"

namespace specflow::flow {

using dirac::BlockEig;
using dirac::DiracBlocks;
using dirac::EigenSystem;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using forms::Complex;
using forms::TrigPolyForm;

PathSpec::PathSpec(Connection a0_, std::vector<double> hol_inc, forms::TrigPolyForm osc_inc)
    : a0(std::move(a0_)), hol_increment(std::move(hol_inc)), osc_increment(std::move(osc_inc)) {
  if (static_cast<int>(hol_increment.size()) != a0.n)
    throw ContractViolation("PathSpec: hol increment length != n");
  if (osc_increment.dim() != a0.n || osc_increment.degree() != 1)
    throw ContractViolation("PathSpec: osc increment must be a 1-form on T^n");
  if (!osc_increment.is_zero_mean() || !osc_increment.is_anti_hermitian(1e-10))
    throw ContractViolation("PathSpec: osc increment must be zero-mean anti-hermitian");
}

Connection PathSpec::at(double s) const {
  std::vector<double> hol(a0.hol);
  for (int j = 0; j < a0.n; ++j) hol[j] += s * hol_increment[j];
  TrigPolyForm osc = a0.osc;
  if (!osc_increment.is_zero()) {
    TrigPolyForm inc = osc_increment;
    inc *= Complex(s, 0);
    if (osc.is_zero())
      osc = inc;
    else
      osc += inc;
  }
  return Connection(a0.n, std::move(hol), std::move(osc));
}

TrigPolyForm PathSpec::velocity() const {
  TrigPolyForm v = osc_increment;
  for (int j = 0; j < a0.n; ++j) {
    if (hol_increment[j] == 0.0) continue;
    forms::Mat c(v.fiber(), v.fiber());
    c = Complex(0, hol_increment[j]) * forms::Mat::Identity(v.fiber(), v.fiber());
    v.add_term(forms::Momentum(a0.n, 0), forms::IndexMask{1} << j, c);
  }
  return v;
}

dirac::DiracBlocks PathSpec::blocks_at(double s) const {
  std::vector<bool> moves(a0.n, false);
  auto mark = [&](const TrigPolyForm& f) {
    for (const auto& [key, c] : f.terms())
      for (int j = 0; j < a0.n; ++j)
        if (key.k[j] != 0) moves[j] = true;
  };
  mark(a0.osc);
  mark(osc_increment);
  std::vector<int> free_axes;
  for (int j = 0; j < a0.n; ++j)
    if (moves[j]) free_axes.push_back(j);
  return dirac::assemble_with_axes(at(s), K, dirac::CliffordRep::standard(a0.n), free_axes);
}

double mollifier_phi(double lambda, double t) {
  if (t <= 0) throw ContractViolation("mollifier_phi: t must be positive");
  // integral_0^lambda e^{-p^2 t} dp = (1/2) sqrt(pi/t) erf(lambda sqrt(t))
  return 0.5 * std::sqrt(M_PI / t) * std::erf(lambda * std::sqrt(t));
}

EstimatorParams choose_params(double rmax, int n, double trusted_window, double q) {
  EstimatorParams p;
  p.rmax = std::max(1.0, rmax);
  p.q = (q > 0) ? q : 1.0 / (2.0 * (n + 1));
  if (p.q >= 1.0 / (n + 1)) throw ContractViolation("choose_params: need q in (0, 1/(n+1))");
  if (p.rmax >= std::exp(1.0)) {
    p.t = std::pow(p.rmax, -(1.0 + p.q));
    p.R = std::log(p.rmax);
  } else {
    p.t = 1.0 / (2.0 * p.rmax);
    p.R = 1.0;
    p.fallback = true;
  }
  const double cut = p.R / std::sqrt(p.t);
  p.lambda_cut = cut;
  if (cut > trusted_window) {
    p.lambda_cut = trusted_window;
    p.clamped = true;
  }
  p.T = mollifier_phi(p.lambda_cut, p.t);
  if (p.rmax * p.t > 1.0 + 1e-12)
    throw ContractViolation("choose_params: rmax * t exceeds 1");
  return p;
}

// --- exact flow -------------------------------------------------------------

namespace {

// Rigorous sup-norm bound for cl(b) with b a 1-form. For a scalar
// anti-hermitian b the pointwise values are i*(real vector) and the
// anticommutation relations give |cl(b)(x)| = |vector|_2, so the per-axis
// coefficient sums aggregate euclideanly; otherwise plain triangle sum.
double cl_sup_bound(const TrigPolyForm& b) {
  if (b.is_zero()) return 0.0;
  if (b.fiber() == 1 && b.is_anti_hermitian(1e-10)) {
    std::vector<double> per_axis(static_cast<std::size_t>(b.dim()), 0.0);
    for (const auto& [key, c] : b.terms())
      per_axis[forms::mask_to_indices(key.mask)[0]] += std::abs(c(0, 0));
    double acc = 0;
    for (double v : per_axis) acc += v * v;
    return std::sqrt(acc);
  }
  double acc = 0;
  for (const auto& [key, c] : b.terms())
    acc += c.rows() == 1 ? std::abs(c(0, 0)) : c.operatorNorm();
  return acc;
}

// Upper bound on the eigenvalue speed |lambda'| along the path.
double velocity_speed_bound(const TrigPolyForm& vel) {
  return std::max(cl_sup_bound(vel), 1e-12);
}

struct Match {
  std::vector<int> to;        // row -> column
  std::vector<double> score;  // chosen overlap per row
  std::vector<double> margin; // best - second best per row
};

Match greedy_match(const MatrixXcd& va, const MatrixXcd& vb) {
  const int dim = static_cast<int>(va.cols());
  const MatrixXd overlap = (va.adjoint() * vb).cwiseAbs();
  Match m;
  m.to.assign(dim, -1);
  m.score.assign(dim, 0.0);
  m.margin.assign(dim, 1.0);

  std::vector<std::tuple<double, int, int>> entries;
  entries.reserve(dim * dim);
  for (int i = 0; i < dim; ++i)
    for (int l = 0; l < dim; ++l) entries.emplace_back(overlap(i, l), i, l);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  std::vector<char> row_used(dim, 0), col_used(dim, 0);
  int assigned = 0;
  for (const auto& [val, i, l] : entries) {
    if (row_used[i] || col_used[l]) continue;
    row_used[i] = col_used[l] = 1;
    m.to[i] = l;
    m.score[i] = val;
    ++assigned;
    if (assigned == dim) break;
  }
  for (int i = 0; i < dim; ++i) {
    double best = 0, second = 0;
    for (int l = 0; l < dim; ++l) {
      const double v = overlap(i, l);
      if (v > best) {
        second = best;
        best = v;
      } else if (v > second) {
        second = v;
      }
    }
    m.margin[i] = best - second;
  }
  return m;
}

struct BlockOutcome {
  std::vector<CrossingRecord> crossings;
  std::vector<CrossingRecord> touches;
  int refinements = 0;
  double max_raw_residual = 0;
  double max_abs_value = 0;
  std::vector<double> sample_lambda_min;  // per base sample
};

class BlockTracker {
 public:
  BlockTracker(const PathSpec& path, std::size_t block, const TrigPolyForm& vel, double vmax)
      : path_(path), block_(block), vel_(vel), vmax_(vmax) {}

  BlockOutcome run() {
    const int N = path_.samples;

    // Whole-path exclusion: |lambda| >= (diagonal floor) - |cl(osc)| for every
    // s, so a block whose floor clears the relevance margin never hosts a
    // crossing or a dip and needs no eigensolves at all. Its reported
    // lambda-min column is that lower bound.
    {
      const double floor_bound = path_floor() - osc_sup_bound();
      const double relevance = 4.0 * vmax_ * 1.5 / N + 10.0 * kSignBand;
      if (floor_bound > relevance) {
        out_.sample_lambda_min.assign(N + 1, floor_bound);
        return std::move(out_);
      }
    }

    out_.sample_lambda_min.assign(N + 1, 0.0);

    // Screening pass, eigenvalues only: an interval whose endpoint spectra
    // stay farther from zero than the Lipschitz reach vmax*ds cannot host a
    // crossing or a dip, so no branch bookkeeping is needed there.
    std::vector<double> nodes(N + 1);
    std::vector<double> node_min(N + 1);
    for (int i = 0; i <= N; ++i) {
      double s = static_cast<double>(i) / N;
      Eigen::VectorXd vals = values_at(s);
      if (i > 0 && i < N) {
        for (int attempt = 1; attempt < 5 && vals.cwiseAbs().minCoeff() < kSignBand; ++attempt) {
          s = static_cast<double>(i) / N + (1e-3 / N) * std::pow(4.0, attempt - 1);
          vals = values_at(s);
        }
        if (vals.cwiseAbs().minCoeff() < kSignBand) {
          std::ostringstream msg;
          msg << "exact_flow: block " << block_ << " keeps an eigenvalue inside the sign band near s=" << s;
          throw CertificateError(msg.str());
        }
      }
      nodes[i] = s;
      node_min[i] = vals.cwiseAbs().minCoeff();
      out_.sample_lambda_min[i] = node_min[i];
    }

    BlockEig ea;
    bool have_ea = false;
    for (int i = 0; i < N; ++i) {
      const double reach = vmax_ * (nodes[i + 1] - nodes[i]);
      const double relevance = 4.0 * reach + 10.0 * kSignBand;
      if (std::min(node_min[i], node_min[i + 1]) > relevance) {
        have_ea = false;
        continue;
      }
      if (!have_ea) ea = solve(nodes[i]);
      BlockEig eb = solve(nodes[i + 1]);
      process_interval(nodes[i], ea, nodes[i + 1], eb, 0);
      ea = std::move(eb);
      have_ea = true;
    }
    return std::move(out_);
  }

 private:
  const PathSpec& path_;
  std::size_t block_;
  const TrigPolyForm& vel_;
  double vmax_;
  BlockOutcome out_;

  static double min_abs(const BlockEig& e) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < e.values.size(); ++i) m = std::min(m, std::abs(e.values[i]));
    return m;
  }

  BlockEig solve(double s) {
    const DiracBlocks desc = path_.blocks_at(s);
    BlockEig e = dirac::eig_block(desc, block_, true);
    out_.max_raw_residual = std::max(out_.max_raw_residual, e.residual);
    for (int i = 0; i < e.values.size(); ++i)
      out_.max_abs_value = std::max(out_.max_abs_value, std::abs(e.values[i]));
    return e;
  }

  Eigen::VectorXd values_at(double s) {
    return dirac::eig_block_values(path_.blocks_at(s), block_);
  }

  // Minimum over internal momenta and s in [0,1] of |2 pi k + theta(s)|:
  // point-to-segment distances on the holonomy line.
  double path_floor() const {
    const DiracBlocks desc = path_.blocks_at(0.0);
    const forms::Momentum label = desc.label_of(block_);
    const int n = desc.n;
    std::vector<double> d(n);
    double dd = 0;
    for (int j = 0; j < n; ++j) {
      d[j] = path_.hol_increment[j];
      dd += d[j] * d[j];
    }
    const int nf = static_cast<int>(desc.free_axes.size());
    std::size_t nmom = 1;
    for (int a = 0; a < nf; ++a) nmom *= static_cast<std::size_t>(2 * desc.K + 1);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> pos(nf, 0);
    std::vector<double> p(n);
    for (std::size_t m = 0; m < nmom; ++m) {
      std::size_t rest = m;
      for (int a = nf - 1; a >= 0; --a) {
        pos[a] = static_cast<int>(rest % (2 * desc.K + 1)) - desc.K;
        rest /= (2 * desc.K + 1);
      }
      double pd = 0, pp = 0;
      for (int j = 0; j < n; ++j) p[j] = 2.0 * M_PI * label[j] + path_.a0.hol[j];
      for (int a = 0; a < nf; ++a) p[desc.free_axes[a]] += 2.0 * M_PI * pos[a];
      for (int j = 0; j < n; ++j) {
        pd += p[j] * d[j];
        pp += p[j] * p[j];
      }
      const double t = dd > 0 ? std::clamp(-pd / dd, 0.0, 1.0) : 0.0;
      double dist2 = 0;
      for (int j = 0; j < n; ++j) {
        const double v = p[j] + t * d[j];
        dist2 += v * v;
      }
      best = std::min(best, std::sqrt(dist2));
    }
    return best;
  }

  // sup_s |cl(osc(s))| along the linear path: convex in s, so the endpoints
  // dominate.
  double osc_sup_bound() const {
    return std::max(cl_sup_bound(path_.at(0.0).osc), cl_sup_bound(path_.at(1.0).osc));
  }

  // Interior grid nodes need sign-readable eigenvalues: a sample landing on a
  // crossing is nudged forward deterministically until outside the band.
  double solve_node(double s, double span, BlockEig& out) {
    double cur = s;
    for (int attempt = 0; attempt < 5; ++attempt) {
      out = solve(cur);
      if (min_abs(out) >= kSignBand) return cur;
      cur = s + span * 1e-3 * std::pow(4.0, attempt);
    }
    std::ostringstream msg;
    msg << "exact_flow: block " << block_ << " keeps an eigenvalue inside the sign band near s="
        << s << " (persistently tangent path?)";
    throw CertificateError(msg.str());
  }

  void process_interval(double sa, const BlockEig& ea, double sb, const BlockEig& eb, int depth) {
    const double reach = vmax_ * (sb - sa);
    const Match match = greedy_match(ea.vectors, eb.vectors);

    // Matching must be unambiguous near zero; away from zero a sign change is
    // impossible (eigenvalue motion is vmax-Lipschitz), so ambiguity there is
    // irrelevant to the count.
    const double relevance = 4.0 * reach + 10.0 * kSignBand;
    bool ambiguous = false;
    for (int i = 0; i < ea.values.size() && !ambiguous; ++i) {
      const int l = match.to[i];
      if (l < 0) continue;
      const double near = std::min(std::abs(ea.values[i]), std::abs(eb.values[l]));
      if (near > relevance) continue;
      if (match.margin[i] < kOverlapMargin || match.score[i] < 0.5) ambiguous = true;
    }
    if (ambiguous) {
      if (depth >= kMaxRefineDepth) {
        std::ostringstream msg;
        msg << "exact_flow: ambiguous branch matching in block " << block_ << " on ["
            << sa << ", " << sb << "] after " << depth << " refinements";
        throw CertificateError(msg.str());
      }
      ++out_.refinements;
      subdivide(sa, ea, sb, eb, depth);
      return;
    }

    for (int i = 0; i < ea.values.size(); ++i) {
      const int l = match.to[i];
      if (l < 0) continue;
      const double la = ea.values[i];
      const double lb = eb.values[l];
      const bool sign_change = (la < 0) != (lb < 0);
      if (sign_change) {
        record_crossing(sa, la, ea.vectors.col(i), sb, lb, depth);
      } else if (std::min(std::abs(la), std::abs(lb)) <= 0.5 * reach && depth < kMaxRefineDepth) {
        // A dip through zero inside the interval cannot be excluded; probe.
        probe_dip(sa, la, ea.vectors.col(i), sb, lb, depth);
      }
    }
  }

  void subdivide(double sa, const BlockEig& ea, double sb, const BlockEig& eb, int depth) {
    const double h = (sb - sa) / 4.0;
    std::vector<double> s{sa, sa + h, sa + 2 * h, sa + 3 * h, sb};
    std::vector<BlockEig> es(5);
    for (int i = 1; i <= 3; ++i) s[i] = solve_node(s[i], h, es[i]);
    process_interval(s[0], ea, s[1], es[1], depth + 1);
    process_interval(s[1], es[1], s[2], es[2], depth + 1);
    process_interval(s[2], es[2], s[3], es[3], depth + 1);
    process_interval(s[3], es[3], s[4], eb, depth + 1);
  }

  // Bisect the bracketed sign change to 1e-10 in s, tracking the branch by
  // eigenvector overlap against the incoming side.
  void record_crossing(double sa, double la, const VectorXcd& va_in, double sb, double lb,
                       int depth) {
    double lo = sa, hi = sb;
    double llo = la;
    VectorXcd vref = va_in;
    double lambda_at = std::min(std::abs(la), std::abs(lb));
    while (hi - lo > 1e-10) {
      const double sm = 0.5 * (lo + hi);
      const BlockEig em = solve(sm);
      // branch continuation: best overlap with the reference vector
      int best = 0;
      double best_ov = -1;
      const VectorXcd tmp = em.vectors.adjoint() * vref;
      for (int i = 0; i < em.values.size(); ++i) {
        const double ov = std::abs(tmp[i]);
        if (ov > best_ov) {
          best_ov = ov;
          best = i;
        }
      }
      const double lm = em.values[best];
      lambda_at = std::min(lambda_at, std::abs(lm));
      vref = em.vectors.col(best);
      if ((lm < 0) == (llo < 0)) {
        lo = sm;
        llo = lm;
      } else {
        hi = sm;
      }
    }
    CrossingRecord rec;
    rec.s_star = 0.5 * (lo + hi);
    rec.sign = lb > 0 ? +1 : -1;
    rec.lambda_at = lambda_at;
    rec.block = static_cast<std::uint32_t>(block_);
    {
      const DiracBlocks desc = path_.blocks_at(rec.s_star);
      rec.slope = dirac::cl_pairing(desc, block_, vref, vel_);
    }
    std::ostringstream label;
    label << "block " << block_ << " [";
    const forms::Momentum mlabel = path_.blocks_at(0.0).label_of(block_);
    for (std::size_t j = 0; j < mlabel.size(); ++j) label << (j ? "," : "") << mlabel[j];
    label << "]";
    rec.branch = label.str();
    out_.crossings.push_back(std::move(rec));
  }

  // Same-sign endpoints with a possible interior zero: evaluate the midpoint
  // and either split into two genuine crossings or log a tangential touch.
  void probe_dip(double sa, double la, const VectorXcd& va_in, double sb, double lb, int depth) {
    const double sm = 0.5 * (sa + sb);
    const BlockEig em = solve(sm);
    int best = 0;
    double best_ov = -1;
    const VectorXcd tmp = em.vectors.adjoint() * va_in;
    for (int i = 0; i < em.values.size(); ++i) {
      const double ov = std::abs(tmp[i]);
      if (ov > best_ov) {
        best_ov = ov;
        best = i;
      }
    }
    const double lm = em.values[best];
    const VectorXcd vm = em.vectors.col(best);
    if ((lm < 0) != (la < 0)) {
      record_crossing(sa, la, va_in, sm, lm, depth);
      record_crossing(sm, lm, vm, sb, lb, depth);
      return;
    }
    if (std::abs(lm) < std::min(std::abs(la), std::abs(lb))) {
      if (std::abs(lm) < kCrossingTol) {
        CrossingRecord rec;
        rec.s_star = sm;
        rec.sign = 0;
        rec.lambda_at = std::abs(lm);
        rec.block = static_cast<std::uint32_t>(block_);
        rec.branch = "tangential";
        out_.touches.push_back(rec);
        return;
      }
      if (depth < kMaxRefineDepth && (sb - sa) * vmax_ > std::abs(lm)) {
        probe_dip(sa, la, va_in, sm, lm, depth + 1);
        probe_dip(sm, lm, vm, sb, lb, depth + 1);
      }
    }
  }
};

}  // namespace

SpectralFlowResult exact_flow(const PathSpec& path) {
  SpectralFlowResult res;
  const TrigPolyForm vel = path.velocity();
  const double vmax = velocity_speed_bound(vel);

  const DiracBlocks layout = path.blocks_at(0.0);
  res.trusted_window = layout.trusted_window();

  // Endpoint gap precondition.
  {
    const EigenSystem e0 = dirac::eig(path.blocks_at(0.0), dirac::VectorPolicy::None);
    const EigenSystem e1 = dirac::eig(path.blocks_at(1.0), dirac::VectorPolicy::None);
    res.endpoint_gap0 = e0.min_abs_eigenvalue;
    res.endpoint_gap1 = e1.min_abs_eigenvalue;
    if (res.endpoint_gap0 < path.gap || res.endpoint_gap1 < path.gap)
      throw ContractViolation("exact_flow: an endpoint operator has an eigenvalue inside the declared gap");
  }

  const std::size_t nb = layout.block_count;
  std::vector<BlockOutcome> outcomes(nb);
  util::parallel_for(nb, [&](std::size_t b) {
    BlockTracker tracker(path, b, vel, vmax);
    outcomes[b] = tracker.run();
  });

  res.sample_s.resize(path.samples + 1);
  res.sample_lambda_min.assign(path.samples + 1, std::numeric_limits<double>::infinity());
  for (int i = 0; i <= path.samples; ++i) res.sample_s[i] = static_cast<double>(i) / path.samples;

  std::vector<CrossingRecord> raw;
  double max_raw_resid = 0, max_abs = 1;
  for (const auto& oc : outcomes) {
    raw.insert(raw.end(), oc.crossings.begin(), oc.crossings.end());
    res.touches.insert(res.touches.end(), oc.touches.begin(), oc.touches.end());
    res.refinement_events += oc.refinements;
    max_raw_resid = std::max(max_raw_resid, oc.max_raw_residual);
    max_abs = std::max(max_abs, oc.max_abs_value);
    for (int i = 0; i <= path.samples; ++i)
      res.sample_lambda_min[i] = std::min(res.sample_lambda_min[i], oc.sample_lambda_min[i]);
  }
  res.max_residual = max_raw_resid / max_abs;

  std::sort(raw.begin(), raw.end(), [](const CrossingRecord& a, const CrossingRecord& b) {
    if (a.s_star != b.s_star) return a.s_star < b.s_star;
    return a.block < b.block;
  });

  // Group simultaneous same-sign crossings into one multiplicity-k record.
  for (std::size_t i = 0; i < raw.size();) {
    CrossingRecord group = raw[i];
    std::size_t j = i + 1;
    while (j < raw.size() && raw[j].s_star - raw[i].s_star <= 1e-8 && raw[j].sign == group.sign) {
      ++group.multiplicity;
      ++j;
    }
    res.crossings.push_back(group);
    res.f += static_cast<long>(group.sign) * group.multiplicity;
    i = j;
  }
  return res;
}

// --- estimator --------------------------------------------------------------

double flow_density(const dirac::EigenSystem& eig, const forms::TrigPolyForm& velocity,
                    const EstimatorParams& params, bool truncate) {
  struct Item {
    double abs_lambda;
    double lambda;
    std::uint32_t block, index;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    const double v = eig.values[i];
    if (truncate && std::abs(v) > params.lambda_cut) continue;
    items.push_back(Item{std::abs(v), v, eig.value_block[i], eig.value_index[i]});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tie(a.abs_lambda, a.block, a.index) < std::tie(b.abs_lambda, b.block, b.index);
  });

  double acc = 0;
  for (const auto& it : items) {
    const dirac::BlockEig& be = eig.blocks.at(it.block);
    const auto pos = std::lower_bound(be.kept.begin(), be.kept.end(), static_cast<int>(it.index));
    if (pos == be.kept.end() || *pos != static_cast<int>(it.index))
      throw ContractViolation("flow_density: eigenvector unavailable for truncation window");
    const Eigen::VectorXcd v = be.vectors.col(pos - be.kept.begin());
    const double pairing = dirac::cl_pairing(eig.desc, it.block, v, velocity);
    acc += pairing * std::exp(-it.lambda * it.lambda * params.t);
  }
  return acc / (2.0 * params.T);
}

EstimatorResult estimator_flow(const PathSpec& path, const EstimatorParams& params) {
  if (params.lambda_cut > path.blocks_at(0.0).trusted_window() + 1e-12)
    throw ContractViolation("estimator_flow: truncation exceeds the trusted window");
  EstimatorResult res;
  res.params = params;

  int N = path.samples;
  if (N % 2 != 0) ++N;  // composite Simpson needs an even interval count
  const TrigPolyForm vel = path.velocity();

  res.sample_s.resize(N + 1);
  res.sample_wp.assign(N + 1, 0.0);
  res.sample_ns.assign(N + 1, 0);
  res.sample_lambda_min.assign(N + 1, 0.0);

  util::parallel_for(static_cast<std::size_t>(N + 1), [&](std::size_t i) {
    const double s = static_cast<double>(i) / N;
    const dirac::EigenSystem es =
        dirac::eig(path.blocks_at(s), dirac::VectorPolicy::Window, params.lambda_cut);
    res.sample_s[i] = s;
    res.sample_wp[i] = flow_density(es, vel, params, true);
    int ns = 0;
    for (double v : es.values)
      if (std::abs(v) <= params.lambda_cut) ++ns;
    res.sample_ns[i] = ns;
    res.sample_lambda_min[i] = es.min_abs_eigenvalue;
  });

  // Composite Simpson on the uniform grid.
  const double h = 1.0 / N;
  double integral = res.sample_wp[0] + res.sample_wp[N];
  for (int i = 1; i < N; ++i) integral += res.sample_wp[i] * (i % 2 ? 4.0 : 2.0);
  res.value = integral * h / 3.0;
  res.n_max = *std::max_element(res.sample_ns.begin(), res.sample_ns.end());
  return res;
}

double path_rmax(const PathSpec& path, int grid_per_axis) {
  double rmax = 1.0;
  for (int i = 0; i <= path.samples; ++i) {
    const double s = static_cast<double>(i) / path.samples;
    rmax = std::max(rmax, dirac::r_of_A(path.at(s), grid_per_axis));
  }
  return rmax;
}

EtaDifference eta_difference(const PathSpec& path) {
  EtaDifference out;
  out.prediction = forms::prediction_value(path.at(0.0), path.at(1.0));
  out.f = exact_flow(path).f;
  out.value = 2.0 * (out.prediction - out.f);
  return out;
}

}  // namespace specflow::flow
