#include "rsr/epipolar.hpp"
#include "rsr/rng.hpp"
#include "rsr/synth.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace rsr;
using epi::Matrix3d;
using epi::Vector3d;

namespace {

constexpr double kDegPerRad = 180.0 / 3.14159265358979323846;

// Quaternion-based geodesic rotation distance, independent of the trace
// formula under test.
double quaternion_rotation_error_deg(const Matrix3d& r1, const Matrix3d& r2) {
  const Eigen::Quaterniond q1(r1), q2(r2);
  const double dot = std::min(1.0, std::abs(q1.dot(q2)));
  return 2.0 * std::acos(dot) * kDegPerRad;
}

double alignment_cost(const Matrix3d& r, const std::vector<Vector3d>& est,
                      const std::vector<Vector3d>& truth) {
  double cost = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) cost += (truth[i] - r * est[i]).squaredNorm();
  return cost;
}

Matrix3d axis_angle(const Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace

TEST_SUITE("epipolar") {

TEST_CASE("normalize: already-whitened points get the identity transform") {
  Eigen::Matrix3Xd pts(3, 4);
  pts << 1, -1, 1, -1, 1, 1, -1, -1, 1, 1, 1, 1;
  const auto r = epi::normalize(pts);
  CHECK((r.transform.t - Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("normalize: direct statistics oracle on a 2x2 grid") {
  Eigen::Matrix3Xd pts(3, 4);
  pts << 0, 2, 0, 2, 0, 0, 2, 2, 1, 1, 1, 1;
  const auto r = epi::normalize(pts);
  CHECK(r.transform.mu1 == doctest::Approx(1.0));
  CHECK(r.transform.mu2 == doctest::Approx(1.0));
  CHECK(r.transform.sigma1 == doctest::Approx(1.0));  // population convention
  CHECK(r.transform.sigma2 == doctest::Approx(1.0));
  CHECK(r.points.row(0).mean() == doctest::Approx(0.0));
  CHECK(r.points.row(0).array().square().mean() == doctest::Approx(1.0));
}

TEST_CASE("normalize rejects a collinear axis") {
  Eigen::Matrix3Xd pts(3, 3);
  pts << 1, 2, 3, 5, 5, 5, 1, 1, 1;  // constant y
  CHECK_THROWS_AS(epi::normalize(pts), std::invalid_argument);
}

TEST_CASE("normalize round trip preserves the epipolar constraint on clean data") {
  const auto corr = synth::gen_epipolar(100, 0.0, 13);
  const auto na = epi::normalize(corr.pts_a);
  const auto nb = epi::normalize(corr.pts_b);
  const auto f = synth::truth_fundamental(*corr.truth);
  // Push the truth through the transforms and back.
  const Matrix3d f_norm = nb.transform.t.inverse().transpose() * f * na.transform.t.inverse();
  const Matrix3d back = nb.transform.t.transpose() * f_norm * na.transform.t;
  for (int j = 0; j < corr.size(); ++j) {
    CHECK(std::abs(corr.pts_b.col(j).dot(back * corr.pts_a.col(j))) < 1e-8);
  }
}

TEST_CASE("lift: the homogeneous origin pair maps to a single unit entry") {
  Eigen::Matrix3Xd a(3, 8), b(3, 8);
  a.setZero();
  b.setZero();
  a.row(2).setOnes();
  b.row(2).setOnes();
  const Matrix lifted = epi::lift(a, b);
  CHECK(lifted(8, 0) == doctest::Approx(1.0));
  CHECK(lifted.col(0).norm() == doctest::Approx(1.0));
}

TEST_CASE("lift: vec convention round trip") {
  Rng rng(3);
  const Matrix m = test::gaussian_matrix(rng, 3, 3);
  Eigen::Matrix<double, 9, 1> v = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(m.data());
  CHECK((epi::unvec3(v) - m).norm() == doctest::Approx(0.0));
}

TEST_CASE("lift: clean scene has numerical rank 8") {
  const auto corr = synth::gen_epipolar(300, 0.0, 17);
  const auto na = epi::normalize(corr.pts_a);
  const auto nb = epi::normalize(corr.pts_b);
  const Matrix lifted = epi::lift(na.points, nb.points);
  Eigen::JacobiSVD<Matrix> svd(lifted);
  const Vector& sv = svd.singularValues();
  CHECK(sv[8] / sv[7] < 1e-6);
}

TEST_CASE("estimate_f: every method nails a clean synthetic scene") {
  const auto corr = synth::gen_epipolar(200, 0.0, 23);
  const auto na = epi::normalize(corr.pts_a);
  const auto nb = epi::normalize(corr.pts_b);
  for (Method m : {Method::Ste, Method::Tme, Method::Fms, Method::Sfms, Method::Ransac}) {
    epi::EstimateFOptions opts;
    opts.method = m;
    opts.seed = 3;
    const epi::FundamentalEstimate f = epi::estimate_f(corr, opts);
    // Residuals measured in normalized coordinates.
    const Matrix3d f_norm = nb.transform.t.inverse().transpose() * f.f * na.transform.t.inverse();
    double max_resid = 0.0;
    for (int j = 0; j < corr.size(); ++j) {
      max_resid = std::max(max_resid, std::abs((nb.points.col(j).transpose() * f_norm *
                                                na.points.col(j))(0, 0))) ;
    }
    CAPTURE(method_name(m));
    CHECK(max_resid / f_norm.norm() < 1e-6);
    CHECK(std::abs(f.f.norm() - 1.0) < 1e-12);
    CHECK(std::abs(f.f.determinant()) < 1e-9);
  }
}

TEST_CASE("estimate_f projects to rank 2 exactly") {
  const auto corr = synth::gen_epipolar(150, 0.2, 29);
  epi::EstimateFOptions opts;
  opts.method = Method::Ste;
  const epi::FundamentalEstimate f = epi::estimate_f(corr, opts);
  Eigen::JacobiSVD<Matrix3d> svd(f.f);
  CHECK(svd.singularValues()[2] < 1e-12);
}

TEST_CASE("estimate_f: 30% outliers still give sub-degree rotation error") {
  const auto corr = synth::gen_epipolar(400, 0.3, 31);
  epi::EstimateFOptions opts;
  opts.method = Method::Ste;
  const epi::FundamentalEstimate f = epi::estimate_f(corr, opts);
  const Matrix3d k = synth::synthetic_calibration();
  const epi::PoseEstimate pose = epi::decompose_pose(f, corr, k, k);
  CHECK(epi::rotation_error(pose.rotation, corr.truth->rotation) < 1.0);
}

TEST_CASE("estimate_f: RANSAC survives a low-consensus first sample at half outliers") {
  // Regression: the adaptive budget must not collapse when the first sample's
  // consensus is tiny (eps^8 underflows the naive log(1 - x) form).
  const auto corr = synth::gen_epipolar(400, 0.5, rsr::Rng::derive(4000, 4, 1));
  epi::EstimateFOptions opts;
  opts.method = Method::Ransac;
  opts.seed = rsr::Rng::derive(4100, 4001, 4);
  const epi::FundamentalEstimate f = epi::estimate_f(corr, opts);
  const Matrix3d k = synth::synthetic_calibration();
  const epi::PoseEstimate pose = epi::decompose_pose(f, corr, k, k);
  CHECK(epi::rotation_error(pose.rotation, corr.truth->rotation) < 1.0);
}

TEST_CASE("estimate_f rejects degenerate correspondence sets") {
  // All pairs identical: the lifted matrix has rank 1.
  Eigen::Matrix3Xd a(3, 10), b(3, 10);
  for (int j = 0; j < 10; ++j) {
    a.col(j) = Vector3d(100.0 + (j % 2), 200.0 + ((j / 2) % 2), 1.0);
    b.col(j) = Vector3d(300.0 + (j % 2), 400.0 + ((j / 2) % 2), 1.0);
  }
  epi::CorrespondenceSet corr;
  corr.pts_a = a;
  corr.pts_b = b;
  epi::EstimateFOptions opts;
  opts.method = Method::Tme;
  CHECK_THROWS_AS(epi::estimate_f(corr, opts), std::exception);
}

TEST_CASE("estimate_f is invariant to uniform pixel rescaling (up to sign)") {
  // F transforms contravariantly under a pixel rescale W, so the scaled
  // estimate is compared after mapping back: W^T F2 W annihilates the scale.
  const auto corr = synth::gen_epipolar(250, 0.2, 37);
  epi::CorrespondenceSet scaled = corr;
  scaled.pts_a.topRows(2) *= 2.0;
  scaled.pts_b.topRows(2) *= 2.0;
  Matrix3d w = Matrix3d::Identity();
  w(0, 0) = w(1, 1) = 2.0;
  for (Method m : {Method::Ste, Method::Tme, Method::Fms, Method::Sfms}) {
    epi::EstimateFOptions opts;
    opts.method = m;
    const Matrix3d f1 = epi::estimate_f(corr, opts).f;
    Matrix3d f2 = w.transpose() * epi::estimate_f(scaled, opts).f * w;
    f2 /= f2.norm();
    CAPTURE(method_name(m));
    CHECK(std::min((f1 - f2).norm(), (f1 + f2).norm()) < 1e-8);
  }
}

TEST_CASE("decompose_pose round trip on a clean scene") {
  const auto corr = synth::gen_epipolar(120, 0.0, 41);
  epi::EstimateFOptions opts;
  opts.method = Method::Ste;
  const epi::FundamentalEstimate f = epi::estimate_f(corr, opts);
  const Matrix3d k = synth::synthetic_calibration();
  const epi::PoseEstimate pose = epi::decompose_pose(f, corr, k, k);
  CHECK(pose.cheirality_ok);
  CHECK(epi::rotation_error(pose.rotation, corr.truth->rotation) < 1e-6 * kDegPerRad);
  CHECK(std::abs(pose.translation.dot(corr.truth->translation)) > 1.0 - 1e-9);
}

TEST_CASE("decompose_pose: closed-form pose with rotation about z") {
  // Camera b rotated about z and shifted along x; points spread in depth.
  const double theta = 0.35;
  const Matrix3d rot = axis_angle(Vector3d(0, 0, 1), theta);
  const Vector3d t(1, 0, 0);
  const Matrix3d k = synth::synthetic_calibration();
  Rng rng(43);
  Eigen::Matrix3Xd a(3, 60), b(3, 60);
  for (int j = 0; j < 60; ++j) {
    const Vector3d world(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(4.0, 9.0));
    Vector3d pa = k * world;
    Vector3d pb = k * (rot * world + t);
    a.col(j) = pa / pa.z();
    b.col(j) = pb / pb.z();
    a(2, j) = 1.0;
    b(2, j) = 1.0;
  }
  epi::CorrespondenceSet corr;
  corr.pts_a = a;
  corr.pts_b = b;
  epi::EstimateFOptions opts;
  opts.method = Method::Tme;
  const epi::FundamentalEstimate f = epi::estimate_f(corr, opts);
  const epi::PoseEstimate pose = epi::decompose_pose(f, corr, k, k);
  CHECK(epi::rotation_error(pose.rotation, rot) < 1e-5 * kDegPerRad);
  CHECK(std::abs(pose.translation.dot(t.normalized())) > 1.0 - 1e-8);
}

TEST_CASE("decompose_pose rejects the zero matrix") {
  const auto corr = synth::gen_epipolar(50, 0.0, 47);
  epi::FundamentalEstimate f;
  f.f = Matrix3d::Zero();
  const Matrix3d k = synth::synthetic_calibration();
  CHECK_THROWS_AS(epi::decompose_pose(f, corr, k, k), std::invalid_argument);
}

TEST_CASE("rotation_error: identical rotations") {
  Rng rng(51);
  const Matrix3d r = test::random_rotation(rng);
  CHECK(epi::rotation_error(r, r) == doctest::Approx(0.0));
}

TEST_CASE("rotation_error: a 30-degree twist about any axis") {
  Rng rng(53);
  for (int trial = 0; trial < 4; ++trial) {
    const Matrix3d base = test::random_rotation(rng);
    const Matrix3d twisted = axis_angle(test::random_unit3(rng), 30.0 / kDegPerRad) * base;
    CHECK(epi::rotation_error(twisted, base) == doctest::Approx(30.0).epsilon(1e-9));
  }
}

TEST_CASE("rotation_error matches the quaternion oracle") {
  Rng rng(57);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix3d r1 = test::random_rotation(rng);
    const Matrix3d r2 = test::random_rotation(rng);
    CHECK(std::abs(epi::rotation_error(r1, r2) - quaternion_rotation_error_deg(r1, r2)) < 1e-9);
  }
}

TEST_CASE("rotation_error rejects non-rotations") {
  Matrix3d bad = Matrix3d::Identity();
  bad(0, 0) = 1.5;
  CHECK_THROWS_AS(epi::rotation_error(bad, Matrix3d::Identity()), std::invalid_argument);
}

TEST_CASE("direction_errors: identical lists align with the identity") {
  Rng rng(61);
  std::vector<Vector3d> t;
  for (int i = 0; i < 6; ++i) t.push_back(test::random_unit3(rng));
  const auto r = epi::direction_errors(t, t);
  CHECK((r.r_align - Matrix3d::Identity()).norm() < 1e-9);
  for (double e : r.errors_deg) CHECK(e < 1e-6);
}

TEST_CASE("direction_errors: a global rotation is gauged away") {
  Rng rng(63);
  const Matrix3d q = test::random_rotation(rng);
  std::vector<Vector3d> truth, est;
  for (int i = 0; i < 8; ++i) {
    truth.push_back(test::random_unit3(rng));
    est.push_back(q * truth.back());
  }
  const auto r = epi::direction_errors(est, truth);
  for (double e : r.errors_deg) CHECK(e < 1e-6);
}

TEST_CASE("direction_errors: alignment matches a grid-search oracle") {
  Rng rng(67);
  std::vector<Vector3d> truth, est;
  const Matrix3d q = test::random_rotation(rng);
  for (int i = 0; i < 10; ++i) {
    truth.push_back(test::random_unit3(rng));
    Vector3d noisy = q * truth.back() + 0.05 * Vector3d(rng.normal(), rng.normal(), rng.normal());
    est.push_back(noisy.normalized());
  }
  const auto r = epi::direction_errors(est, truth);

  // Oracle: coarse random search over SO(3) followed by a local axis-angle
  // grid refinement around the best candidate.
  Matrix3d best = Matrix3d::Identity();
  double best_cost = alignment_cost(best, est, truth);
  for (int trial = 0; trial < 20000; ++trial) {
    const Matrix3d cand = test::random_rotation(rng);
    const double c = alignment_cost(cand, est, truth);
    if (c < best_cost) {
      best_cost = c;
      best = cand;
    }
  }
  for (double step : {0.02, 0.004, 0.0008, 0.00016}) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {-1.0, 1.0}) {
          const Matrix3d cand = axis_angle(Vector3d::Unit(axis), sign * step) * best;
          const double c = alignment_cost(cand, est, truth);
          if (c < best_cost) {
            best_cost = c;
            best = cand;
            improved = true;
          }
        }
      }
    }
  }
  // The closed-form solution should not lose to the searched one, and the
  // per-pair errors under both alignments should agree to 0.1 degrees.
  CHECK(alignment_cost(r.r_align, est, truth) <= best_cost + 1e-9);
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double oracle_err =
        std::acos(std::clamp(std::abs(truth[i].dot(best * est[i])), 0.0, 1.0)) * kDegPerRad;
    CHECK(std::abs(r.errors_deg[i] - oracle_err) < 0.1);
  }
}

TEST_CASE("direction_errors rejects empty input") {
  CHECK_THROWS_AS(epi::direction_errors({}, {}), std::invalid_argument);
}

TEST_CASE("maa: exact hand-computed values") {
  CHECK(epi::maa({0.0, 0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(epi::maa({11.0, 50.0, 170.0}) == doctest::Approx(0.0));
  CHECK(epi::maa({0.5, 5.5, 50.0}) == doctest::Approx(0.5));
}

TEST_CASE("maa is monotone in the threshold") {
  Rng rng(71);
  std::vector<double> errors;
  for (int i = 0; i < 40; ++i) errors.push_back(rng.uniform(0.0, 25.0));
  double prev = 0.0;
  for (int t = 1; t <= 25; ++t) {
    const double value = epi::maa(errors, t);
    CHECK(value >= prev - 1e-12);
    prev = value;
  }
}

TEST_CASE("maa rejects empty and negative input") {
  CHECK_THROWS_AS(epi::maa({}), std::invalid_argument);
  CHECK_THROWS_AS(epi::maa({-1.0}), std::invalid_argument);
}

}  // TEST_SUITE
