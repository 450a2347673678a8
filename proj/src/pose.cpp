#include "rsr/epipolar.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace rsr::epi {

namespace {

// Midpoint of the closest approach between the two viewing rays, in the frame
// of camera a. Returns false when the rays are near parallel.
bool midpoint_triangulate(const Vector3d& dir_a, const Vector3d& center_b,
                          const Vector3d& dir_b, Vector3d& point) {
  const double aa = dir_a.dot(dir_a);
  const double ab = dir_a.dot(dir_b);
  const double bb = dir_b.dot(dir_b);
  const double det = aa * bb - ab * ab;
  if (std::abs(det) < 1e-14 * aa * bb) return false;
  const double ca = dir_a.dot(center_b);
  const double cb = dir_b.dot(center_b);
  const double s = (bb * ca - ab * cb) / det;
  const double u = (ab * ca - aa * cb) / det;
  point = 0.5 * (s * dir_a + center_b + u * dir_b);
  return true;
}

int cheirality_votes(const Eigen::Matrix3d& rotation, const Vector3d& translation,
                     const Eigen::Matrix3Xd& rays_a, const Eigen::Matrix3Xd& rays_b) {
  const Vector3d center_b = -rotation.transpose() * translation;
  int votes = 0;
  for (int j = 0; j < rays_a.cols(); ++j) {
    const Vector3d dir_b = rotation.transpose() * rays_b.col(j);
    Vector3d x;
    if (!midpoint_triangulate(rays_a.col(j), center_b, dir_b, x)) continue;
    const double depth_a = x.z();
    const double depth_b = (rotation * x + translation).z();
    if (depth_a > 0.0 && depth_b > 0.0) ++votes;
  }
  return votes;
}

}  // namespace

PoseEstimate decompose_pose(const FundamentalEstimate& f, const CorrespondenceSet& corr,
                            const Matrix3d& calib_a, const Matrix3d& calib_b) {
  if (std::abs(calib_a.determinant()) < 1e-12 || std::abs(calib_b.determinant()) < 1e-12) {
    throw std::invalid_argument("decompose_pose: calibration matrices must be invertible");
  }
  const Matrix3d essential = calib_b.transpose() * f.f * calib_a;

  Eigen::JacobiSVD<Matrix3d> svd(essential, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (sv[1] <= 1e-12 * std::max(sv[0], 1e-300) || sv[0] == 0.0) {
    throw std::invalid_argument("decompose_pose: degenerate matrix (rank below 2)");
  }
  Matrix3d u = svd.matrixU();
  Matrix3d v = svd.matrixV();
  if (u.determinant() < 0.0) u = -u;
  if (v.determinant() < 0.0) v = -v;

  Matrix3d w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Matrix3d r1 = u * w * v.transpose();
  const Matrix3d r2 = u * w.transpose() * v.transpose();
  const Vector3d t = u.col(2);

  // Rays of the points that vote: the estimate's inliers, or everything when
  // the mask is empty.
  std::vector<int> voters;
  bool any_mask = false;
  for (char m : f.inlier_mask) any_mask = any_mask || (m != 0);
  for (int j = 0; j < corr.size(); ++j) {
    if (!any_mask || (j < static_cast<int>(f.inlier_mask.size()) && f.inlier_mask[j])) {
      voters.push_back(j);
    }
  }
  const Matrix3d ka_inv = calib_a.inverse();
  const Matrix3d kb_inv = calib_b.inverse();
  Eigen::Matrix3Xd rays_a(3, voters.size()), rays_b(3, voters.size());
  for (std::size_t k = 0; k < voters.size(); ++k) {
    rays_a.col(k) = ka_inv * corr.pts_a.col(voters[k]);
    rays_b.col(k) = kb_inv * corr.pts_b.col(voters[k]);
  }

  const Matrix3d rotations[2] = {r1, r2};
  const double signs[2] = {1.0, -1.0};
  PoseEstimate best;
  int best_votes = -1;
  for (const Matrix3d& r : rotations) {
    for (double s : signs) {
      const Vector3d cand_t = s * t;
      const int votes = cheirality_votes(r, cand_t, rays_a, rays_b);
      if (votes > best_votes) {
        best_votes = votes;
        best.rotation = r;
        best.translation = cand_t;
      }
    }
  }
  best.cheirality_ok = 2 * best_votes > static_cast<int>(voters.size());
  return best;
}

}  // namespace rsr::epi
