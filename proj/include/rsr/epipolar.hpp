#pragma once

#include "rsr/core.hpp"
#include "rsr/estimators.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace rsr::epi {

using Eigen::Matrix3d;
using Eigen::Vector3d;

struct PoseTruth {
  Matrix3d rotation;     // camera a -> camera b
  Vector3d translation;  // unit direction
};

// Paired homogeneous image points (third coordinate exactly 1) for two views.
struct CorrespondenceSet {
  Eigen::Matrix3Xd pts_a;
  Eigen::Matrix3Xd pts_b;
  std::optional<PoseTruth> truth;
  std::vector<char> inlier_mask;  // empty when unknown

  int size() const { return static_cast<int>(pts_a.cols()); }
  void validate() const;  // throws on shape mismatch, N < 8, or bad third row
};

// Hartley-style whitening transform built from the per-axis mean and
// population standard deviation of the first two coordinate rows.
struct NormalizingTransform {
  Matrix3d t;
  double mu1 = 0, mu2 = 0, sigma1 = 1, sigma2 = 1;
};

struct NormalizeResult {
  Eigen::Matrix3Xd points;
  NormalizingTransform transform;
};

// Shifts/scales so rows 1-2 are zero-mean, unit-std. Throws when an axis is
// degenerate (zero spread).
NormalizeResult normalize(const Eigen::Matrix3Xd& pts);

// Kernel lift: column i = vec(a_i b_i^T), column-major, 9 x N.
Matrix lift(const Eigen::Matrix3Xd& pts_a, const Eigen::Matrix3Xd& pts_b);

// Inverse of the column-major vec used by lift().
Matrix3d unvec3(const Eigen::Matrix<double, 9, 1>& v);

// Rank-2, unit-Frobenius fundamental matrix in the convention b^T F a = 0.
struct FundamentalEstimate {
  Matrix3d f;
  Method method = Method::Ste;
  std::vector<char> inlier_mask;   // Sampson distance below threshold
  double max_inlier_residual = 0;  // diagnostic: |b^T F a| over mask
};

struct EstimateFOptions {
  Method method = Method::Ste;
  // STE gamma candidates; a single entry skips the tuning pass. Default grid
  // is {1/2, 1/4, 1/6, 1/8, 1/10}.
  std::vector<double> gamma_grid = {0.5, 0.25, 1.0 / 6.0, 0.125, 0.1};
  int max_iters = 200;
  double tol = 1e-10;
  double fms_p = 1.0;
  int ransac_max_iters = 1000;
  double ransac_threshold = 0.75;   // Sampson, pixels
  double confidence = 0.99;
  std::uint64_t seed = 0;
  double sampson_inlier_threshold = 0.75;  // pixels, for the reported mask
};

// Full-data methods: normalize both views, lift, center, recover the
// 8-subspace in R^9, reshape its orthogonal complement, project to rank 2,
// denormalize, and scale to unit Frobenius norm. RANSAC runs the vanilla
// 8-point loop with per-sample normalization instead.
FundamentalEstimate estimate_f(const CorrespondenceSet& corr, const EstimateFOptions& opts = {});

double sampson_distance(const Matrix3d& f, const Vector3d& a, const Vector3d& b);

struct PoseEstimate {
  Matrix3d rotation;
  Vector3d translation;  // unit norm
  bool cheirality_ok = true;
};

// Relative pose from F via E = Kb^T F Ka, the four-fold SVD factorization, and
// a midpoint-triangulation cheirality vote over the masked inliers (all points
// when the mask is empty). Flags the result when every candidate leaves more
// than half the points behind a camera.
PoseEstimate decompose_pose(const FundamentalEstimate& f, const CorrespondenceSet& corr,
                            const Matrix3d& calib_a, const Matrix3d& calib_b);

// Geodesic rotation distance acos((tr(Rt^T Re) - 1) / 2), in degrees. Both
// inputs must be proper rotations within 1e-6.
double rotation_error(const Matrix3d& r_est, const Matrix3d& r_true);

struct DirectionAlignment {
  Matrix3d r_align;
  std::vector<double> errors_deg;  // acos |t_true . R t_est| per pair
};

// Aligns the estimated unit directions to the references by the
// proper-rotation Procrustes solution and reports per-pair angular errors.
DirectionAlignment direction_errors(const std::vector<Vector3d>& t_est,
                                    const std::vector<Vector3d>& t_true);

// Mean over integer thresholds tau = 1..max_threshold of the fraction of
// errors strictly below tau.
double maa(const std::vector<double>& errors_deg, int max_threshold = 10);

}  // namespace rsr::epi
