// Acceptance suite: runs each shipped criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "specflow/chern.hpp"
#include "specflow/experiments.hpp"
#include "specflow/flow.hpp"
#include "specflow/heat.hpp"
#include "specflow/util.hpp"

using namespace specflow;

namespace {

int failures = 0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void report(int id, const std::string& name, bool pass, double seconds,
            const std::string& detail = "") {
  std::printf("[%d] %-34s %s  (%.1fs)%s%s\n", id, name.c_str(), pass ? "PASS" : "FAIL", seconds,
              detail.empty() ? "" : "  ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename F>
void criterion(int id, const std::string& name, F&& fn) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    detail = fn(pass);
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(id, name, pass, secs, detail);
}

cli::ExperimentConfig base_config() {
  cli::ExperimentConfig cfg;
  cfg.out_dir = (std::filesystem::temp_directory_path() / "specflow_acceptance").string();
  return cfg;
}

}  // namespace

int main() {
  const cli::ExperimentConfig cfg = base_config();

  // 1. Winding oracle: exact_flow = prediction = m for m in {-3..3}.
  criterion(1, "winding oracle (exactness)", [&](bool& pass) {
    cli::RunReport rep = cli::run_winding(cfg);
    pass = rep.ok;
    return std::string("m in {-3..3}, exact flow, prediction, and |estimate-m|<=n");
  });

  // 2. Estimator certificate on every shipped path.
  criterion(2, "estimator certificate |f-int| <= n", [&](bool& pass) {
    cli::RunReport rep = cli::run_estimator_check(cfg);
    pass = rep.ok;
    return std::string("winding m in {-3..3} and contact r in {4,8}");
  });

  // 3. Asymptotic slope of the contact sweep.
  criterion(3, "contact sweep slope in [1.8,2.2]", [&](bool& pass) {
    cli::RunReport rep = cli::run_contact_sweep(cfg);
    pass = rep.ok;
    const double slope = rep.summary.value("slope_top3", 0.0);
    return "fitted slope " + num(slope);
  });

  // 4. Mollifier tail bound, 1e-12 slack.
  criterion(4, "mollifier bound", [&](bool& pass) {
    pass = true;
    for (double R : {1.0, 2.0, 3.0})
      for (double t : {1e-2, 1e-4}) {
        const double lhs = std::abs(std::sqrt(t) * flow::mollifier_phi(R / std::sqrt(t), t) -
                                    std::sqrt(M_PI / 4.0));
        const double rhs = std::exp(-R * R) / (2.0 * R) + 1e-12;
        pass = pass && lhs <= rhs;
      }
    return std::string("R in {1,2,3}, t in {1e-2,1e-4}");
  });

  // 5. Counting: closed form at n=1; Weyl-scaled boundedness on T^3.
  criterion(5, "eigenvalue-count boundedness", [&](bool& pass) {
    pass = true;
    const dirac::EigenSystem s1 =
        dirac::eig(dirac::assemble(Connection::flat(1, {0.0}), 40), dirac::VectorPolicy::None);
    for (double lam : util::lin_grid(1.0, 50.0, 40)) {
      const long closed = 2 * static_cast<long>(std::floor(lam / (2 * M_PI))) + 1;
      pass = pass && heat::count_eigs(s1, lam) == closed;
    }
    double kappa_hat = 0;
    const std::vector<Connection> conns = {
        Connection::flat(3, {0.31, 0.17, 0.47}),
        Connection::flat(3, {3.31, 4.17, 0.47}),
        Connection(3, {0.31, 0.17, 0.47}, contact_one_form(2.0))};
    for (const auto& conn : conns) {
      const double r_val = dirac::r_of_A(conn, 16);
      const dirac::EigenSystem sys =
          dirac::eig(dirac::assemble(conn, 10), dirac::VectorPolicy::None);
      for (double lam : util::lin_grid(1.0, sys.trusted_window, 24)) {
        const double ratio =
            heat::count_eigs(sys, lam) / std::pow(lam + std::sqrt(r_val), 3.0);
        kappa_hat = std::max(kappa_hat, ratio);
      }
    }
    pass = pass && kappa_hat < 0.5;
    return "n=1 exact; T^3 fitted kappa = " + num(kappa_hat);
  });

  // 6. Free-torus heat traces against Poisson summation, 1e-6 relative.
  criterion(6, "heat-trace oracle", [&](bool& pass) {
    pass = true;
    double worst = 0;
    for (int n : {1, 3}) {
      const int K = 125;
      const dirac::EigenSystem sys = dirac::eig(
          dirac::assemble(Connection::flat(n, std::vector<double>(n, 0.0)), K),
          dirac::VectorPolicy::None);
      for (double t : {1e-2, 1e-3}) {
        const double trace = heat::heat_trace(sys, t);
        const double oracle = cli::poisson_free_trace(n, t);
        const double rel = std::abs(trace - oracle) / oracle;
        worst = std::max(worst, rel);
        pass = pass && rel < 1e-6;
      }
    }
    return "worst relative error " + num(worst);
  });

  // 7. Density convergence for the n=1 closed-form case.
  criterion(7, "density convergence (n=1)", [&](bool& pass) {
    const Connection flat1 = Connection::flat(1, {0.37});
    const dirac::EigenSystem sys =
        dirac::eig(dirac::assemble(flat1, 30), dirac::VectorPolicy::All);
    forms::TrigPolyForm ahat(1, 1, 1);
    ahat.add_term(forms::Momentum{0}, std::vector<int>{0}, forms::Complex(0, 1.0));
    std::vector<double> ts = {0.08, 0.05, 0.032, 0.02};
    std::vector<double> scaled, log_t, log_r;
    for (double t : ts) {
      const auto wt = heat::weighted_cl_trace(sys, ahat, t, 40.0, 1.0);
      scaled.push_back(std::abs(wt.residual) * std::sqrt(t));
      log_t.push_back(std::log(t));
      log_r.push_back(std::log(std::max(1e-300, std::abs(wt.residual))));
    }
    pass = true;
    for (std::size_t i = 1; i < scaled.size(); ++i) pass = pass && scaled[i] < scaled[i - 1];
    const double slope = util::fit_slope(log_t, log_r);
    return "monotone over 4-point log grid; residual-vs-t slope " + num(slope) +
           " (candidates +1/2, -1/2; logged, not asserted)";
  });

  // 8. Algebra suite.
  criterion(8, "forms algebra suite", [&](bool& pass) {
    cli::RunReport rep = cli::run_chs_checks(cfg);
    pass = rep.ok;
    return std::string("d^2, Leibniz, graded comm., Stokes, chs, A-hat, antisymmetry");
  });

  // 9. Numerical certificates.
  criterion(9, "numerical certificates", [&](bool& pass) {
    pass = true;
    // residual and orthogonality certificates on a shipped connection
    const Connection contact(3, {0.31, 0.17, 0.47}, contact_one_form(4.0));
    const dirac::EigenSystem sys =
        dirac::eig(dirac::assemble(contact, 9), dirac::VectorPolicy::None);
    pass = pass && sys.max_residual <= 1e-9 && sys.max_orthogonality <= 1e-9;
    // trusted-window stability under K -> K+4
    const double stab = dirac::cutoff_stability(contact, 9);
    pass = pass && stab <= 1e-8;
    // Weitzenboeck residual and its negative control
    const double wb = dirac::weitzenbock_residual(contact, 8, 6);
    pass = pass && wb <= 1e-8;
    dirac::CliffordRep flipped = dirac::CliffordRep::standard(3);
    flipped.gamma[1] = -flipped.gamma[1];
    const double wb_bad = dirac::weitzenbock_residual(contact, 8, 6, 7, flipped);
    pass = pass && wb_bad > 1e-2;
    return "residual " + num(sys.max_residual) + ", stability " + num(stab) + ", weitzenbock " +
           num(wb) + ", negative control " + num(wb_bad);
  });

  std::printf("%s (%d criterion failures)\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
              failures);
  return failures == 0 ? 0 : 1;
}
