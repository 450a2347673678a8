#include "rsr/synth.hpp"

#include "rsr/rng.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numeric>

namespace rsr::synth {

namespace {

Matrix cholesky_or_throw(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string("gen_haystack: ") + what +
                                " is not symmetric positive definite");
  }
  return llt.matrixL();
}

Vector gaussian_vector(Rng& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

epi::Vector3d random_unit_vector(Rng& rng) {
  epi::Vector3d v;
  do {
    v = epi::Vector3d(rng.normal(), rng.normal(), rng.normal());
  } while (v.norm() < 1e-12);
  return v.normalized();
}

}  // namespace

SyntheticScene gen_haystack(const HaystackConfig& cfg) {
  const int D = cfg.ambient_dim;
  const int d = cfg.subspace_dim;
  if (d < 1 || d >= D) throw std::invalid_argument("gen_haystack: need 1 <= d < D");
  if (cfg.n_in < 0 || cfg.n_out < 0 || cfg.n_in + cfg.n_out < 1) {
    throw std::invalid_argument("gen_haystack: need a positive total point count");
  }

  Rng rng(cfg.seed);

  Subspace basis = [&] {
    if (cfg.planted_basis.has_value()) {
      if (cfg.planted_basis->ambient_dim() != D || cfg.planted_basis->dim() != d) {
        throw std::invalid_argument("gen_haystack: planted basis has the wrong shape");
      }
      return *cfg.planted_basis;
    }
    Matrix g(D, d);
    for (int j = 0; j < d; ++j) g.col(j) = gaussian_vector(rng, D);
    return Subspace::from_span(g);
  }();

  Matrix in_chol;
  if (cfg.sigma_in.size() == 0) {
    in_chol = Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d));
  } else {
    if (cfg.sigma_in.rows() != d || cfg.sigma_in.cols() != d) {
      throw std::invalid_argument("gen_haystack: sigma_in must be d x d");
    }
    in_chol = cholesky_or_throw(cfg.sigma_in / d, "sigma_in");
  }

  Matrix out_chol;
  if (cfg.sigma_out.size() == 0) {
    out_chol = Matrix::Identity(D, D) / std::sqrt(static_cast<double>(D));
  } else {
    if (cfg.sigma_out.rows() != D || cfg.sigma_out.cols() != D) {
      throw std::invalid_argument("gen_haystack: sigma_out must be D x D");
    }
    out_chol = cholesky_or_throw(cfg.sigma_out / D, "sigma_out");
  }

  const int total = cfg.n_in + cfg.n_out;
  Matrix points(D, total);
  std::vector<char> mask(total, 0);
  for (int j = 0; j < cfg.n_in; ++j) {
    points.col(j) = basis.basis() * (in_chol * gaussian_vector(rng, d));
    mask[j] = 1;
  }
  for (int j = 0; j < cfg.n_out; ++j) {
    points.col(cfg.n_in + j) = out_chol * gaussian_vector(rng, D);
  }

  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  Matrix shuffled(D, total);
  std::vector<char> shuffled_mask(total);
  for (int j = 0; j < total; ++j) {
    shuffled.col(j) = points.col(order[j]);
    shuffled_mask[j] = mask[order[j]];
  }

  return SyntheticScene{DataMatrix(std::move(shuffled)), std::move(basis),
                        std::move(shuffled_mask)};
}

epi::Matrix3d synthetic_calibration() {
  epi::Matrix3d k = epi::Matrix3d::Identity();
  k(0, 0) = 1000.0;
  k(1, 1) = 1000.0;
  return k;
}

epi::Matrix3d truth_fundamental(const epi::PoseTruth& truth) {
  epi::Matrix3d tx;
  const epi::Vector3d& t = truth.translation;
  tx << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;
  const epi::Matrix3d e = tx * truth.rotation;
  const epi::Matrix3d k_inv = synthetic_calibration().inverse();
  epi::Matrix3d f = k_inv.transpose() * e * k_inv;
  return f / f.norm();
}

epi::CorrespondenceSet gen_epipolar(int n_pairs, double outlier_frac, std::uint64_t seed) {
  if (n_pairs < 1) throw std::invalid_argument("gen_epipolar: need at least one pair");
  if (!(outlier_frac >= 0.0 && outlier_frac <= 1.0)) {
    throw std::invalid_argument("gen_epipolar: outlier fraction must lie in [0, 1]");
  }

  Rng rng(seed);
  const epi::Matrix3d k = synthetic_calibration();
  const epi::Matrix3d k_inv = k.inverse();

  constexpr double kWindow = 1000.0;
  constexpr double kDepthLo = 4.0;
  constexpr double kDepthHi = 8.0;

  // Verged pose: camera b sits on the unit sphere and looks at the scene
  // centroid, with a random roll. Keeps both windows on the scene so outliers
  // are not separable by range, and keeps the mean correspondence pair nearly
  // epipolar-consistent.
  const epi::Vector3d scene_center =
      0.5 * (kDepthLo + kDepthHi) * (k_inv * epi::Vector3d(kWindow / 2, kWindow / 2, 1.0));
  const epi::Vector3d center_b = random_unit_vector(rng);
  const epi::Vector3d forward = (scene_center - center_b).normalized();
  epi::Vector3d up(0, 1, 0);
  if (std::abs(forward.dot(up)) > 0.95) up = epi::Vector3d(1, 0, 0);
  const epi::Vector3d right = forward.cross(up).normalized();
  const epi::Vector3d down = forward.cross(right).normalized();
  epi::Matrix3d look;
  look.row(0) = right.transpose();
  look.row(1) = down.transpose();
  look.row(2) = forward.transpose();
  const double roll = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  epi::Matrix3d roll_mat;
  roll_mat << std::cos(roll), -std::sin(roll), 0, std::sin(roll), std::cos(roll), 0, 0, 0, 1;
  const epi::Matrix3d rotation = roll_mat * look;
  const epi::Vector3d translation = -rotation * center_b;  // unit norm

  const int n_out = static_cast<int>(std::lround(outlier_frac * n_pairs));
  const int n_in = n_pairs - n_out;

  Eigen::Matrix3Xd pts_a(3, n_pairs), pts_b(3, n_pairs);
  std::vector<char> mask(n_pairs, 0);

  for (int j = 0; j < n_in; ++j) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      const double u = rng.uniform(0.0, kWindow);
      const double v = rng.uniform(0.0, kWindow);
      const double depth = rng.uniform(kDepthLo, kDepthHi);
      const epi::Vector3d world = depth * (k_inv * epi::Vector3d(u, v, 1.0));
      const epi::Vector3d in_b = rotation * world + translation;
      if (in_b.z() < 0.5) continue;
      const epi::Vector3d pix_b = k * in_b;
      const double ub = pix_b.x() / pix_b.z();
      const double vb = pix_b.y() / pix_b.z();
      if (ub < 0.0 || ub > kWindow || vb < 0.0 || vb > kWindow) continue;
      pts_a.col(j) = epi::Vector3d(u, v, 1.0);
      pts_b.col(j) = epi::Vector3d(ub, vb, 1.0);
      mask[j] = 1;
      placed = true;
    }
    if (!placed) throw std::runtime_error("gen_epipolar: could not place an inlier pair");
  }
  for (int j = n_in; j < n_pairs; ++j) {
    pts_a.col(j) = epi::Vector3d(rng.uniform(0.0, kWindow), rng.uniform(0.0, kWindow), 1.0);
    pts_b.col(j) = epi::Vector3d(rng.uniform(0.0, kWindow), rng.uniform(0.0, kWindow), 1.0);
  }

  std::vector<int> order(n_pairs);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  epi::CorrespondenceSet out;
  out.pts_a.resize(3, n_pairs);
  out.pts_b.resize(3, n_pairs);
  out.inlier_mask.resize(n_pairs);
  for (int j = 0; j < n_pairs; ++j) {
    out.pts_a.col(j) = pts_a.col(order[j]);
    out.pts_b.col(j) = pts_b.col(order[j]);
    out.inlier_mask[j] = mask[order[j]];
  }
  out.truth = epi::PoseTruth{rotation, translation};
  return out;
}

}  // namespace rsr::synth
