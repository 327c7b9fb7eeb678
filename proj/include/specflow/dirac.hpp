#pragma once

// Twisted Dirac operator on T^n (n in {1,3}) in a truncated Fourier basis.
// Directions on which the oscillatory part of the connection does not depend
// carry conserved momenta; the operator splits into one dense hermitian block
// per conserved-momentum label.

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "specflow/connection.hpp"
#include "specflow/forms.hpp"

namespace specflow::dirac {

using forms::Complex;
using forms::Momentum;

// Constant Clifford matrices cl(dx_j): anti-hermitian, with
// c_j c_k + c_k c_j = -2 delta_jk (so D^2 has positive symbol).
//
// The overall sign is not a free choice here: it is pinned so that the n=1
// winding cross-check gives flow = +m for a holonomy increment of 2*pi*m, and
// the n=3 member of the family is normalized the same way (the complex volume
// element i^{(n+1)/2} c_1...c_n acts as +1). Flipping every gamma flips the
// sign of all computed flows.
struct CliffordRep {
  int n = 1;
  std::vector<Eigen::MatrixXcd> gamma;
  static CliffordRep standard(int n);
  int spinor_dim() const { return gamma.empty() ? 1 : static_cast<int>(gamma[0].rows()); }
};

// Block-diagonal description of the assembled operator. Matrices are built on
// demand, one block at a time; nothing large is materialized here.
struct DiracBlocks {
  int n = 1;
  int K = 0;
  int fiber = 1;
  Connection conn;
  CliffordRep rep;
  std::vector<int> conserved_axes;  // ascending
  std::vector<int> free_axes;       // ascending
  std::size_t block_count = 1;
  int block_dim = 1;                // spinor * fiber * (2K+1)^{#free}

  double trusted_window() const { return M_PI * K / 2.0; }
  Momentum label_of(std::size_t block) const;  // conserved components, 0 elsewhere
  void build_block(std::size_t block, Eigen::MatrixXcd& H) const;
};

DiracBlocks assemble(const Connection& conn, int K);
DiracBlocks assemble(const Connection& conn, int K, const CliffordRep& rep);
// Layout with a caller-fixed set of free axes (must contain every direction
// the osc support moves); lets all samples of a path share one block layout.
DiracBlocks assemble_with_axes(const Connection& conn, int K, const CliffordRep& rep,
                               const std::vector<int>& free_axes);

enum class VectorPolicy { None, Window, All };

struct BlockEig {
  Eigen::VectorXd values;     // ascending, all block eigenvalues
  Eigen::MatrixXcd vectors;   // columns; subset per policy (col i <-> kept index i)
  std::vector<int> kept;      // eigen indices whose vectors are stored
  double residual = 0;        // max_i |H v_i - lambda_i v_i|_2  (raw, unnormalized)
  double orthogonality = 0;   // max entry of |V^dagger V - I|
};

struct EigenSystem {
  DiracBlocks desc;
  std::vector<BlockEig> blocks;        // empty under VectorPolicy::None
  std::vector<double> values;          // merged spectrum, |lambda| <= trusted window, ascending
  std::vector<std::uint32_t> value_block;  // owning block per merged value
  std::vector<std::uint32_t> value_index;  // index within the owning block
  double trusted_window = 0;
  double max_residual = 0;             // relative to max(1, |lambda|_max)
  double max_orthogonality = 0;
  double min_abs_eigenvalue = 0;       // over the merged window spectrum
};

// Full decomposition with residual and orthogonality certificates. A residual
// above `residual_tol` (after normalization) is a hard failure naming the
// block. `vector_window` restricts stored vectors under VectorPolicy::Window;
// a negative value means the trusted window.
EigenSystem eig(const DiracBlocks& blocks, VectorPolicy policy = VectorPolicy::All,
                double vector_window = -1.0, double residual_tol = 1e-9);

// Decomposition of a single block (used by crossing refinement).
BlockEig eig_block(const DiracBlocks& blocks, std::size_t block, bool keep_vectors = true);

// Eigenvalues only, no certificates; screening use.
Eigen::VectorXd eig_block_values(const DiracBlocks& blocks, std::size_t block);

// <v, cl(b) v> for a block-local eigenvector; b a degree-1 form whose modes
// act within the block (modes with nonzero conserved-direction momentum
// contribute nothing to a same-block pairing and are skipped). The result is
// real up to rounding; an imaginary part above tolerance throws.
double cl_pairing(const DiracBlocks& blocks, std::size_t block, const Eigen::VectorXcd& v,
                  const forms::TrigPolyForm& b, double imag_tol = 1e-10);

// Max over random trial sections psi of |D^2 psi - (lap psi + cl(F) psi)| / |psi|,
// exact Fourier arithmetic, flat metric. An override rep is accepted so the
// sign conventions can be negative-controlled.
double weitzenbock_residual(const Connection& conn, int K, int trials, std::uint64_t seed = 7);
double weitzenbock_residual(const Connection& conn, int K, int trials, std::uint64_t seed,
                            const CliffordRep& rep);

// Curvature scale r(A): infimum r >= 1 with
//   r^{-1} |F| + r^{-3/2} |grad F| + ... + r^{-n/2} |grad^{(n-1)/2} F| <= 1
// sup-norms sampled on a uniform grid (grid points per axis) from exact
// Fourier derivatives; bisection to 1e-10.
double r_of_A(const Connection& conn, int grid_per_axis);

// Scalar solver behind r_of_A: samples[p][j] is the j-th derivative-level
// norm at sample point p.
double r_from_norms(const std::vector<std::vector<double>>& samples);

// Max change of eigenvalues inside |lambda| <= trusted_window(K) when the
// cutoff is raised K -> K+4. Returns +inf if the window counts disagree.
double cutoff_stability(const Connection& conn, int K);

// Sections of the spinor bundle as finite Fourier data; used by the
// Weitzenboeck check and available to tests.
using Section = std::map<Momentum, Eigen::VectorXcd>;
Section apply_dirac(const Connection& conn, const CliffordRep& rep, const Section& psi);
Section apply_connection_laplacian(const Connection& conn, const Section& psi);
Section apply_cl_2form(const forms::TrigPolyForm& F, const CliffordRep& rep, const Section& psi);
double section_norm(const Section& psi);

}  // namespace specflow::dirac
