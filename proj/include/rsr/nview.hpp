#pragma once

#include "rsr/core.hpp"
#include "rsr/estimators.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rsr::nview {

using Eigen::Matrix3d;

struct BlockObservation {
  int i = 0;
  int j = 0;
  Matrix3d e = Matrix3d::Zero();
  double lambda = 1.0;
};

// 3n x 3n symmetric block matrix of scaled pairwise essential matrices.
// Unobserved blocks are zero-filled in `entries`; `observed` marks the block
// mask (diagonal blocks are structurally zero and never observed).
struct NViewEssential {
  int n = 0;
  Matrix entries;                               // 3n x 3n
  std::vector<std::vector<char>> observed;      // n x n, symmetric, false diagonal
  std::vector<std::vector<double>> scales;      // applied lambda per block

  int observed_block_count() const;  // ordered off-diagonal count |Omega|
  bool is_observed(int i, int j) const { return observed[i][j] != 0; }
};

// Stacks lambda_ij * E_ij into the symmetric 3n x 3n matrix. If both (i, j)
// and (j, i) are supplied their scaled blocks must be mutual transposes within
// 1e-9. Throws on indices out of range or inconsistent pairs.
NViewEssential assemble(const std::vector<BlockObservation>& blocks, int n);

// lambda = <block, reference> / ||reference||_F^2.
double scale_against_reference(const Matrix3d& block, const Matrix3d& reference);

struct SvtOptions {
  double mu = 0.0;        // soft-threshold level; 0 selects 5 * ||P_Omega(M)||_2
  int max_iters = 2000;
  double tol = 1e-4;      // relative residual on the observed entries
  double delta = 0.0;     // step size; 0 selects n^2 / (10 |Omega|)
};

struct SvtResult {
  Matrix completed;
  int iterations = 0;
  double observed_residual = 0.0;  // relative, at exit
  bool converged = false;
};

// Singular value thresholding for the nuclear-norm completion of the observed
// blocks: Y <- Y + delta * P_Omega(M_obs - shrink(Y)). Throws when the
// observed residual grows for 50 consecutive iterations (step size too large).
SvtResult svt_complete(const NViewEssential& e, const SvtOptions& opts = {});

// Nearest matrix with singular values (1, 1, 0): U diag(1,1,0) V^T.
Matrix3d project_essential(const Matrix3d& m);

enum class Completion { ZeroFill, Svt };

struct ScreenOptions {
  Method method = Method::Ste;
  int d = 6;
  double outlier_frac = 0.2;
  Completion completion = Completion::ZeroFill;
  double ste_gamma = 1.0 / 3.0;  // fixed for screening
  int max_iters = 300;
  double tol = 1e-12;
  double fms_p = 1.0;
  double ransac_threshold = 0.05;
  int ransac_max_iters = 1000;
  std::uint64_t seed = 0;
  SvtOptions svt;
};

struct ScreeningReport {
  Vector column_distances;          // natural column order, 3n entries
  std::vector<int> flagged_columns; // descending by distance, ceil(frac * 3n) of them
  std::vector<int> removed_cameras; // ascending camera indices
  double flagged_unflagged_ratio = 0.0;  // max flagged / max unflagged distance

  std::vector<double> sorted_distances() const;  // descending copy
};

// Treats the (completed, column-centered) n-view matrix as a D = N = 3n
// dataset, recovers a d-subspace, and flags the top outlier_frac columns by
// distance; a camera is removed when any of its three columns is flagged.
ScreeningReport screen(const NViewEssential& e, const ScreenOptions& opts = {});

}  // namespace rsr::nview
