#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "specflow/dirac.hpp"

using namespace specflow;
using namespace specflow::dirac;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using forms::Complex;
using forms::Momentum;
using forms::TrigPolyForm;

TEST_CASE("Clifford relations and anti-hermiticity") {
  for (int n : {1, 3}) {
    const CliffordRep rep = CliffordRep::standard(n);
    const int sd = rep.spinor_dim();
    for (int j = 0; j < n; ++j) {
      CHECK((rep.gamma[j] + rep.gamma[j].adjoint()).cwiseAbs().maxCoeff() < 1e-15);
      for (int k = 0; k < n; ++k) {
        const MatrixXcd anti = rep.gamma[j] * rep.gamma[k] + rep.gamma[k] * rep.gamma[j];
        const MatrixXcd expect = (j == k) ? MatrixXcd(-2.0 * MatrixXcd::Identity(sd, sd))
                                          : MatrixXcd(MatrixXcd::Zero(sd, sd));
        CHECK((anti - expect).cwiseAbs().maxCoeff() < 1e-15);
      }
    }
  }
}

TEST_CASE("free n=1 spectrum at K=2 is {-4pi,-2pi,0,2pi,4pi}, multiplicity 1") {
  const Connection conn = Connection::flat(1, {0.0});
  const DiracBlocks blocks = assemble(conn, 2);
  REQUIRE(blocks.block_count == 5);
  std::vector<double> all;
  for (std::size_t b = 0; b < blocks.block_count; ++b) {
    const BlockEig be = eig_block(blocks, b, false);
    for (int i = 0; i < be.values.size(); ++i) all.push_back(be.values[i]);
  }
  std::sort(all.begin(), all.end());
  REQUIRE(all.size() == 5);
  for (int k = -2; k <= 2; ++k)
    CHECK(all[k + 2] == doctest::Approx(2.0 * M_PI * k).epsilon(1e-14));

  // the window-merged view keeps only |lambda| <= pi K / 2
  const EigenSystem sys = eig(blocks, VectorPolicy::None);
  CHECK(sys.values.size() == 1);
  CHECK(sys.values[0] == doctest::Approx(0.0));
}

TEST_CASE("sigma.v block: theta=(3,4,0) gives eigenvalues -5, 5 at k=0") {
  const Connection conn = Connection::flat(3, {3.0, 4.0, 0.0});
  const DiracBlocks blocks = assemble(conn, 2);
  // all directions conserved; find the k = 0 block
  const std::size_t zero_block = [&] {
    for (std::size_t b = 0; b < blocks.block_count; ++b) {
      const Momentum label = blocks.label_of(b);
      if (label == Momentum{0, 0, 0}) return b;
    }
    return std::size_t{0};
  }();
  const BlockEig be = eig_block(blocks, zero_block);
  REQUIRE(be.values.size() == 2);
  CHECK(be.values[0] == doctest::Approx(-5.0).epsilon(1e-12));
  CHECK(be.values[1] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("contact osc conserves (x1, x2): block layout and tridiagonal cells") {
  const Connection conn(3, {0.31, 0.17, 0.47}, contact_one_form(1.0));
  const DiracBlocks blocks = assemble(conn, 3);
  CHECK(blocks.conserved_axes == std::vector<int>{0, 1});
  CHECK(blocks.free_axes == std::vector<int>{2});
  CHECK(blocks.block_count == 49);
  CHECK(blocks.block_dim == 2 * 7);
  MatrixXcd H;
  blocks.build_block(0, H);
  // hopping only one k3 step: 2x2 cells beyond the first off-diagonal vanish
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      if (std::abs(i - j) > 1) CHECK(H.block(2 * i, 2 * j, 2, 2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eig certificates: random osc reconstruction and orthogonality") {
  std::mt19937_64 rng(31);
  const Connection conn(3, {0.3, -0.2, 0.11},
                        specflow::testing::random_u_one_form(rng, 3, 1, 1, 4));
  const DiracBlocks blocks = assemble(conn, 3);
  const EigenSystem sys = eig(blocks, VectorPolicy::All);
  CHECK(sys.max_residual <= 1e-9);
  CHECK(sys.max_orthogonality <= 1e-9);

  // reconstruction oracle on one block
  MatrixXcd H;
  blocks.build_block(0, H);
  const BlockEig be = eig_block(blocks, 0);
  const MatrixXcd recon =
      be.vectors * be.values.asDiagonal() * be.vectors.adjoint();
  CHECK((recon - H).cwiseAbs().maxCoeff() / std::max(1.0, H.cwiseAbs().maxCoeff()) < 1e-10);
}

TEST_CASE("spectrum symmetry for osc = 0 with generic holonomy (n=3)") {
  const Connection conn = Connection::flat(3, {0.41, -0.73, 0.29});
  const EigenSystem sys = eig(assemble(conn, 4), VectorPolicy::None);
  // merged spectrum comes in +/- pairs
  const auto& v = sys.values;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double target = -v[i];
    bool found = false;
    for (std::size_t j = 0; j < v.size() && !found; ++j) found = std::abs(v[j] - target) < 1e-10;
    CHECK(found);
  }
}

TEST_CASE("gauge covariance: 2pi holonomy shifts leave interior spectrum unchanged") {
  const std::vector<double> theta = {0.31, 0.17, 0.47};
  const int K = 8;
  const double interior = M_PI * K;  // |lambda| <= pi K
  const Connection base(3, theta, contact_one_form(1.0));

  for (int axis : {0, 2}) {
    std::vector<double> shifted = theta;
    shifted[axis] += 2.0 * M_PI;
    const Connection moved(3, shifted, contact_one_form(1.0));
    const EigenSystem sa = eig(assemble(base, K), VectorPolicy::None);
    const EigenSystem sb = eig(assemble(moved, K), VectorPolicy::None);
    // compare interior eigenvalues by nearest-neighbour distance
    double worst = 0;
    for (double v : sa.values) {
      if (std::abs(v) > interior) continue;
      double best = 1e300;
      for (double w : sb.values) best = std::min(best, std::abs(w - v));
      worst = std::max(worst, best);
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("cutoff stability of the contact operator") {
  const Connection conn(3, {0.31, 0.17, 0.47}, contact_one_form(2.0));
  CHECK(cutoff_stability(conn, 8) < 1e-8);
}

TEST_CASE("weitzenbock identity: flat, contact, and the negative control") {
  const Connection flat1 = Connection::flat(1, {0.7});
  CHECK(weitzenbock_residual(flat1, 8, 4) < 1e-10);

  const Connection flat3 = Connection::flat(3, {0.3, 0.1, -0.2});
  CHECK(weitzenbock_residual(flat3, 6, 4) < 1e-10);

  const Connection contact(3, {0.31, 0.17, 0.47}, contact_one_form(1.0));
  CHECK(weitzenbock_residual(contact, 8, 6) < 1e-8);

  CliffordRep flipped = CliffordRep::standard(3);
  flipped.gamma[2] = -flipped.gamma[2];
  CHECK(weitzenbock_residual(contact, 8, 6, 7, flipped) > 1e-2);
}

TEST_CASE("r_of_A: flat connection, scalar solver cases, refinement oracle") {
  CHECK(r_of_A(Connection::flat(3, {0.3, 0.4, 0.5}), 8) == 1.0);

  // constant |F| = c with vanishing derivatives: r = c
  CHECK(r_from_norms({{3.7, 0.0}}) == doctest::Approx(3.7).epsilon(1e-9));
  CHECK(r_from_norms({{0.5, 0.0}}) == 1.0);

  const Connection c2(3, {0.31, 0.17, 0.47}, contact_one_form(2.0));
  const double r16 = r_of_A(c2, 16);
  const double r32 = r_of_A(c2, 32);
  CHECK(std::abs(r16 - r32) <= 1e-6 * r16);

  const Connection c4(3, {0.31, 0.17, 0.47}, contact_one_form(4.0));
  const double r4 = r_of_A(c4, 16);
  CHECK(r4 > r16);
  CHECK(r4 < 2.5 * r16);  // doubling the amplitude at most roughly doubles |F|
}

TEST_CASE("cl_pairing: zero form, constant n=1 value, trace identities") {
  const Connection conn1 = Connection::flat(1, {0.37});
  const DiracBlocks b1 = assemble(conn1, 4);
  const BlockEig e1 = eig_block(b1, 0);

  const TrigPolyForm zero_form = TrigPolyForm::zero(1, 1, 1);
  CHECK(cl_pairing(b1, 0, e1.vectors.col(0), zero_form) == 0.0);

  // b = i c dx1 on a normalized eigenvector: the frozen convention
  // cl(dx1) = -i makes the pairing +c |v|^2 (the sign that reproduces the
  // winding cross-check downstream).
  TrigPolyForm b(1, 1, 1);
  const double cval = 1.3;
  b.add_term(Momentum{0}, std::vector<int>{0}, Complex(0, cval));
  for (int i = 0; i < e1.values.size(); ++i)
    CHECK(cl_pairing(b1, 0, e1.vectors.col(i), b) == doctest::Approx(cval).epsilon(1e-12));

  // trace identity: sum over an eigenbasis equals (2K+1) * c for n=1. An
  // oscillatory term makes the x-axis momentum non-conserved, so the whole
  // momentum range lives in one block.
  TrigPolyForm osc1(1, 1, 1);
  osc1.add_term(Momentum{1}, std::vector<int>{0}, Complex(0, 0.2));
  osc1.add_term(Momentum{-1}, std::vector<int>{0}, Complex(0, 0.2));
  const DiracBlocks b1o = assemble(Connection(1, {0.37}, osc1), 4);
  REQUIRE(b1o.block_count == 1);
  REQUIRE(b1o.block_dim == 9);
  const BlockEig e1o = eig_block(b1o, 0);
  double acc = 0;
  for (int i = 0; i < e1o.values.size(); ++i) acc += cl_pairing(b1o, 0, e1o.vectors.col(i), b);
  CHECK(acc == doctest::Approx(9 * cval).epsilon(1e-10));

  // ... and 0 for n=3 (traceless sigmas), including oscillatory terms.
  std::mt19937_64 rng(41);
  const Connection conn3(3, {0.3, -0.1, 0.2}, specflow::testing::random_u_one_form(rng, 3, 1, 1, 3));
  const DiracBlocks b3 = assemble(conn3, 2);
  const BlockEig e3 = eig_block(b3, 0);
  TrigPolyForm vel = specflow::testing::random_u_one_form(rng, 3, 1, 1, 3);
  vel.add_term(Momentum{0, 0, 0}, std::vector<int>{1}, Complex(0, 0.7));
  double acc3 = 0;
  for (int i = 0; i < e3.values.size(); ++i) acc3 += cl_pairing(b3, 0, e3.vectors.col(i), vel);
  CHECK(std::abs(acc3) < 1e-9);
}

TEST_CASE("assemble rejects aliasing oscillation support") {
  std::mt19937_64 rng(43);
  const TrigPolyForm wide = specflow::testing::random_u_one_form(rng, 3, 1, 3, 2);
  const Connection conn(3, {0.1, 0.1, 0.1}, wide);
  CHECK_THROWS_AS((void)assemble(conn, 2), ContractViolation);
}

TEST_CASE("eig residual failure is hard and names the block") {
  const Connection conn = Connection::flat(3, {0.3, 0.4, 0.5});
  try {
    (void)eig(assemble(conn, 2), VectorPolicy::None, -1.0, /*residual_tol=*/1e-30);
    // a residual of exactly zero can legitimately pass; diagonal blocks do
  } catch (const CertificateError& e) {
    CHECK(std::string(e.what()).find("block") != std::string::npos);
  }

  std::mt19937_64 rng(44);
  const Connection osc(3, {0.3, 0.4, 0.5}, specflow::testing::random_u_one_form(rng, 3, 1, 1, 3));
  CHECK_THROWS_AS((void)eig(assemble(osc, 3), VectorPolicy::None, -1.0, 1e-30), CertificateError);
}
