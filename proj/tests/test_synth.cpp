#include "rsr/synth.hpp"
#include "rsr/rng.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cstring>

using namespace rsr;

TEST_SUITE("synth") {

TEST_CASE("haystack without outliers lies inside the planted subspace") {
  synth::HaystackConfig cfg;
  cfg.ambient_dim = 8;
  cfg.subspace_dim = 3;
  cfg.n_in = 50;
  cfg.n_out = 0;
  cfg.seed = 2;
  const auto scene = synth::gen_haystack(cfg);
  const Vector dist = scene.truth.distances(scene.data.entries());
  CHECK(dist.maxCoeff() < 1e-12);
  int mask_count = 0;
  for (char m : scene.inlier_mask) mask_count += (m != 0);
  CHECK(mask_count == 50);
}

TEST_CASE("haystack at the high-dimensional benchmark shape") {
  synth::HaystackConfig cfg;
  cfg.ambient_dim = 27;
  cfg.subspace_dim = 26;
  cfg.n_in = 280;
  cfg.n_out = 120;
  cfg.seed = 9;
  const auto scene = synth::gen_haystack(cfg);
  CHECK(scene.data.dim() == 27);
  CHECK(scene.data.num_points() == 400);
  CHECK(scene.truth.dim() == 26);
}

TEST_CASE("haystack inlier sample covariance approaches sigma_in/d (law of large numbers)") {
  synth::HaystackConfig cfg;
  cfg.ambient_dim = 6;
  cfg.subspace_dim = 2;
  cfg.n_in = 1000000;
  cfg.n_out = 0;
  cfg.seed = 31;
  cfg.sigma_in = Matrix(2, 2);
  cfg.sigma_in << 3.0, 0.5, 0.5, 1.0;
  const auto scene = synth::gen_haystack(cfg);
  const Matrix& pts = scene.data.entries();
  const Matrix sample_cov = pts * pts.transpose() / pts.cols();
  const Matrix expected =
      scene.truth.basis() * (cfg.sigma_in / 2) * scene.truth.basis().transpose();
  CHECK((sample_cov - expected).norm() / expected.norm() < 0.02);
}

TEST_CASE("haystack rejects a rank-deficient inlier covariance") {
  synth::HaystackConfig cfg;
  cfg.ambient_dim = 5;
  cfg.subspace_dim = 2;
  cfg.n_in = 10;
  cfg.n_out = 0;
  cfg.sigma_in = Matrix::Zero(2, 2);
  cfg.sigma_in(0, 0) = 1.0;  // rank 1
  CHECK_THROWS_AS(synth::gen_haystack(cfg), std::invalid_argument);
}

TEST_CASE("haystack is bit-identical per seed") {
  synth::HaystackConfig cfg;
  cfg.ambient_dim = 7;
  cfg.subspace_dim = 2;
  cfg.n_in = 30;
  cfg.n_out = 20;
  cfg.seed = 77;
  const auto a = synth::gen_haystack(cfg);
  const auto b = synth::gen_haystack(cfg);
  CHECK(std::memcmp(a.data.entries().data(), b.data.entries().data(),
                    sizeof(double) * 7 * 50) == 0);
  CHECK(a.inlier_mask == b.inlier_mask);
}

TEST_CASE("epipolar inliers satisfy the ground-truth constraint exactly") {
  const auto corr = synth::gen_epipolar(200, 0.0, 5);
  const auto f = synth::truth_fundamental(*corr.truth);
  double max_resid = 0.0;
  for (int j = 0; j < corr.size(); ++j) {
    max_resid = std::max(max_resid, std::abs(corr.pts_b.col(j).dot(f * corr.pts_a.col(j))));
  }
  CHECK(max_resid < 1e-9);
  CHECK(corr.truth->translation.norm() == doctest::Approx(1.0));
}

TEST_CASE("epipolar with outlier fraction one flags nothing as inlier") {
  const auto corr = synth::gen_epipolar(50, 1.0, 3);
  int inliers = 0;
  for (char m : corr.inlier_mask) inliers += (m != 0);
  CHECK(inliers == 0);
}

TEST_CASE("epipolar benchmark scale: 400 pairs, 30% outliers, window bounds") {
  const auto corr = synth::gen_epipolar(400, 0.3, 7);
  CHECK(corr.size() == 400);
  int inliers = 0;
  for (char m : corr.inlier_mask) inliers += (m != 0);
  CHECK(inliers == 280);
  CHECK(corr.pts_a.row(0).maxCoeff() <= 1000.0);
  CHECK(corr.pts_a.row(0).minCoeff() >= 0.0);
  CHECK(corr.pts_b.row(1).maxCoeff() <= 1000.0);
  for (int j = 0; j < 400; ++j) {
    CHECK(corr.pts_a(2, j) == 1.0);
    CHECK(corr.pts_b(2, j) == 1.0);
  }
}

TEST_CASE("epipolar determinism per seed") {
  const auto a = synth::gen_epipolar(60, 0.4, 19);
  const auto b = synth::gen_epipolar(60, 0.4, 19);
  CHECK(std::memcmp(a.pts_a.data(), b.pts_a.data(), sizeof(double) * 3 * 60) == 0);
  CHECK(std::memcmp(a.pts_b.data(), b.pts_b.data(), sizeof(double) * 3 * 60) == 0);
}

TEST_CASE("lifted inliers are orthogonal to the vectorized truth after normalization") {
  const auto corr = synth::gen_epipolar(120, 0.25, 11);
  const auto na = epi::normalize(corr.pts_a);
  const auto nb = epi::normalize(corr.pts_b);
  const Matrix lifted = epi::lift(na.points, nb.points);

  // Truth in normalized coordinates: b^T F a = 0 becomes
  // (T_b^-T F T_a^-1) between normalized points; lift pairs a with b, so the
  // orthogonal direction is the transpose reshaped.
  const auto f = synth::truth_fundamental(*corr.truth);
  const epi::Matrix3d g =
      (nb.transform.t.inverse().transpose() * f * na.transform.t.inverse()).transpose();
  Eigen::Matrix<double, 9, 1> gv = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(g.data());
  gv.normalize();
  for (int j = 0; j < corr.size(); ++j) {
    if (!corr.inlier_mask[j]) continue;
    CHECK(std::abs(gv.dot(lifted.col(j)) / lifted.col(j).norm()) < 1e-8);
  }
}

}  // TEST_SUITE
