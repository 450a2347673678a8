#include "rsr/epipolar.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace rsr::epi {

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

void require_rotation(const Matrix3d& r, const char* name) {
  const double ortho = (r.transpose() * r - Matrix3d::Identity()).norm();
  if (ortho > 1e-6 || std::abs(r.determinant() - 1.0) > 1e-6) {
    throw std::invalid_argument(std::string("rotation_error: ") + name +
                                " is not a proper rotation");
  }
}

}  // namespace

double rotation_error(const Matrix3d& r_est, const Matrix3d& r_true) {
  require_rotation(r_est, "estimate");
  require_rotation(r_true, "reference");
  const double c = 0.5 * ((r_true.transpose() * r_est).trace() - 1.0);
  return std::acos(std::clamp(c, -1.0, 1.0)) * kRadToDeg;
}

DirectionAlignment direction_errors(const std::vector<Vector3d>& t_est,
                                    const std::vector<Vector3d>& t_true) {
  if (t_est.empty() || t_est.size() != t_true.size()) {
    throw std::invalid_argument("direction_errors: lists must be non-empty and equal length");
  }

  // Proper-rotation Procrustes: maximize sum t_true . (R t_est) =
  // tr(R sum t_est t_true^T).
  Matrix3d cross = Matrix3d::Zero();
  for (std::size_t i = 0; i < t_est.size(); ++i) {
    cross += t_est[i] * t_true[i].transpose();
  }
  Eigen::JacobiSVD<Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d(1.0, 1.0, (svd.matrixV() * svd.matrixU().transpose()).determinant());
  const Matrix3d r_align = svd.matrixV() * d.asDiagonal() * svd.matrixU().transpose();

  DirectionAlignment out;
  out.r_align = r_align;
  out.errors_deg.reserve(t_est.size());
  for (std::size_t i = 0; i < t_est.size(); ++i) {
    const Vector3d a = t_true[i].normalized();
    const Vector3d b = r_align * t_est[i].normalized();
    const double c = std::abs(a.dot(b));
    if (c < 0.7) {
      out.errors_deg.push_back(std::acos(c) * kRadToDeg);
    } else {
      // Sine route for small angles (acos near 1 loses half the digits); the
      // absolute-value convention folds angles past 90 degrees back.
      const double s = std::min(a.cross(b).norm(), 1.0);
      out.errors_deg.push_back(std::asin(s) * kRadToDeg);
    }
  }
  return out;
}

double maa(const std::vector<double>& errors_deg, int max_threshold) {
  if (errors_deg.empty()) throw std::invalid_argument("maa: empty error list");
  if (max_threshold < 1) throw std::invalid_argument("maa: threshold must be >= 1");
  for (double e : errors_deg) {
    if (!(e >= 0.0)) throw std::invalid_argument("maa: errors must be nonnegative");
  }
  double total = 0.0;
  for (int tau = 1; tau <= max_threshold; ++tau) {
    long below = 0;
    for (double e : errors_deg) {
      if (e < static_cast<double>(tau)) ++below;
    }
    total += static_cast<double>(below) / static_cast<double>(errors_deg.size());
  }
  return total / static_cast<double>(max_threshold);
}

}  // namespace rsr::epi
