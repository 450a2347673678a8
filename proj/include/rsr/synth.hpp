#pragma once

#include "rsr/core.hpp"
#include "rsr/epipolar.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rsr::synth {

// Generalized haystack model: n_in inliers ~ N(0, Sigma_in / d) supported on a
// planted d-subspace, n_out outliers ~ N(0, Sigma_out / D). The defaults
// (identity covariances) give the standard haystack model.
struct HaystackConfig {
  int ambient_dim = 10;  // D
  int subspace_dim = 3;  // d
  int n_in = 0;
  int n_out = 0;
  // Inlier covariance expressed in the planted basis coordinates (d x d SPD);
  // empty means identity.
  Matrix sigma_in;
  // Outlier covariance (D x D SPD); empty means identity.
  Matrix sigma_out;
  std::uint64_t seed = 0;
  std::optional<Subspace> planted_basis;  // default: QR of a Gaussian matrix
};

struct SyntheticScene {
  DataMatrix data;
  Subspace truth;
  std::vector<char> inlier_mask;  // aligned with data columns
};

SyntheticScene gen_haystack(const HaystackConfig& cfg);

// Synthetic two-view correspondences: inliers satisfy the epipolar constraint
// of a hidden pose exactly (3D points in front of both cameras, projected with
// the fixed calibration diag(1000, 1000, 1), both images covering
// [0, 1000]^2); outliers draw both image points uniformly from the window.
epi::CorrespondenceSet gen_epipolar(int n_pairs, double outlier_frac, std::uint64_t seed);

// Fixed synthetic calibration used by gen_epipolar.
epi::Matrix3d synthetic_calibration();

// Ground-truth fundamental matrix K^-T [t]x R K^-1 for a scene generated by
// gen_epipolar (unit Frobenius norm, convention b^T F a = 0).
epi::Matrix3d truth_fundamental(const epi::PoseTruth& truth);

}  // namespace rsr::synth
