#include "rsr/diagnostics.hpp"
#include "rsr/estimators.hpp"
#include "rsr/rng.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace rsr;

namespace {

synth::SyntheticScene haystack(int ambient, int d, int n_in, int n_out, std::uint64_t seed) {
  synth::HaystackConfig cfg;
  cfg.ambient_dim = ambient;
  cfg.subspace_dim = d;
  cfg.n_in = n_in;
  cfg.n_out = n_out;
  cfg.seed = seed;
  return synth::gen_haystack(cfg);
}

ScatterEstimate identity_scatter(int n) {
  return ScatterEstimate::from_matrix(Matrix::Identity(n, n));
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("ds_snr: balanced case is one") {
  CHECK(diag::ds_snr(100, 100, 5, 10) == doctest::Approx(1.0));
}

TEST_CASE("ds_snr: the 8-of-9 threshold") {
  // Inlier fraction 8/9 with d=8, D=9 sits exactly at the threshold.
  CHECK(diag::ds_snr(8, 1, 8, 9) == doctest::Approx(1.0));
}

TEST_CASE("ds_snr: direct arithmetic") {
  CHECK(diag::ds_snr(450, 1400, 3, 10) == doctest::Approx(0.75));
}

TEST_CASE("ds_snr: pure inliers report infinity") {
  CHECK(std::isinf(diag::ds_snr(50, 0, 2, 5)));
}

TEST_CASE("kappa1 of the isotropic scatter is one") {
  Rng rng(3);
  const Subspace l_star = Subspace::from_span(test::gaussian_matrix(rng, 8, 3));
  CHECK(diag::kappa1(identity_scatter(8), l_star) == doctest::Approx(1.0));
}

TEST_CASE("kappa1 grows as the scatter concentrates on the subspace") {
  Rng rng(5);
  const int ambient = 6, d = 2;
  const Subspace l_star = Subspace::from_span(test::gaussian_matrix(rng, ambient, d));
  auto concentrated = [&](double eps) {
    const Matrix m = l_star.projector() / d + eps * Matrix::Identity(ambient, ambient) / ambient;
    return diag::kappa1(ScatterEstimate::from_matrix(m), l_star);
  };
  const double at_1e3 = concentrated(1e-3);
  const double at_1e4 = concentrated(1e-4);
  CHECK(at_1e3 > 100.0);
  CHECK(at_1e4 > at_1e3);
}

TEST_CASE("kappa1 is invariant to the basis choice") {
  Rng rng(9);
  const int ambient = 7, d = 3;
  const Subspace l_star = Subspace::from_span(test::gaussian_matrix(rng, ambient, d));
  const Matrix g = test::gaussian_matrix(rng, ambient, ambient + 2);
  const ScatterEstimate s = ScatterEstimate::from_matrix(g * g.transpose());
  const double base = diag::kappa1(s, l_star);
  const Matrix q = test::random_orthogonal(rng, d);
  const double rebased = diag::kappa1(s, Subspace(l_star.basis() * q));
  CHECK(std::abs(base - rebased) < 1e-10 * std::max(1.0, base));
}

TEST_CASE("kappa1 reports infinity when the scatter image is exactly the subspace") {
  Rng rng(13);
  const Subspace l_star = Subspace::from_span(test::gaussian_matrix(rng, 5, 2));
  Spectrum s;
  s.eigenvalues = Vector::Zero(5);
  s.eigenvalues[0] = 0.6;
  s.eigenvalues[1] = 0.4;
  Matrix vecs(5, 5);
  vecs.leftCols(2) = l_star.basis();
  vecs.rightCols(3) = orthonormal_complement(l_star.basis());
  s.eigenvectors = vecs;
  CHECK(std::isinf(diag::kappa1(ScatterEstimate::from_spectrum(std::move(s)), l_star)));
}

TEST_CASE("scene_stats: isotropic initial scatter gives kappa2 = 1") {
  const auto scene = haystack(8, 3, 60, 40, 21);
  const diag::SceneStats stats = diag::scene_stats(scene, identity_scatter(8), 0.5);
  CHECK(stats.kappa2 == doctest::Approx(1.0));
  CHECK(stats.ds_snr == doctest::Approx(diag::ds_snr(60, 40, 3, 8)));
  CHECK(std::isfinite(stats.assumption3_rhs_c1));
  CHECK(stats.alignment_a > 0.0);
  CHECK(stats.stability_s > 0.0);
}

TEST_CASE("scene_stats: kappa_in of spherical inliers approaches one") {
  const auto scene = haystack(8, 3, 20000, 50, 23);
  const diag::SceneStats stats = diag::scene_stats(scene, identity_scatter(8), 0.5);
  CHECK(stats.kappa_in == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("scene_stats: stability bounds on haystack samples") {
  const auto scene = haystack(10, 3, 400, 600, 25);
  const diag::SceneStats stats = diag::scene_stats(scene, identity_scatter(10), 0.5);
  const int n = scene.data.num_points();
  // Upper bound: the summed projectors have trace N, so the bottom-average is
  // at most N / (D - d); the isotropic lower bound uses the outlier condition
  // number (1 here).
  CHECK(stats.stability_s <= static_cast<double>(n) / (10 - 3) + 1e-9);
  CHECK(stats.stability_s >= 0.5 * n / 10.0);  // asymptotically n / (D kappa)
}

TEST_CASE("scene_stats invariants: basis re-choice and global rescale") {
  auto scene = haystack(9, 3, 80, 70, 27);
  Rng rng(1);
  const ScatterEstimate s0 = identity_scatter(9);
  const diag::SceneStats base = diag::scene_stats(scene, s0, 0.5);

  const Matrix q = test::random_orthogonal(rng, 3);
  synth::SyntheticScene rebased{DataMatrix(scene.data.entries()),
                                Subspace(scene.truth.basis() * q), scene.inlier_mask};
  const diag::SceneStats rb = diag::scene_stats(rebased, s0, 0.5);
  CHECK(std::abs(base.kappa1 - rb.kappa1) < 1e-9 * std::max(1.0, base.kappa1));
  CHECK(std::abs(base.kappa2 - rb.kappa2) < 1e-9);
  CHECK(std::abs(base.alignment_a - rb.alignment_a) < 1e-9 * base.alignment_a);
  CHECK(std::abs(base.stability_s - rb.stability_s) < 1e-9 * base.stability_s);

  synth::SyntheticScene scaled{DataMatrix(4.0 * scene.data.entries()), scene.truth,
                               scene.inlier_mask};
  const diag::SceneStats sc = diag::scene_stats(scaled, s0, 0.5);
  CHECK(std::abs(base.alignment_a - sc.alignment_a) < 1e-9 * base.alignment_a);
  CHECK(std::abs(base.stability_s - sc.stability_s) < 1e-9 * base.stability_s);
}

TEST_CASE("assumption-2 verdict matches the direct inequality") {
  const auto scene = haystack(10, 3, 450, 1400, 29);
  const diag::SceneStats stats = diag::scene_stats(scene, identity_scatter(10), 0.5);
  CHECK(stats.ds_snr == doctest::Approx(0.75));
  CHECK((0.5 < stats.ds_snr) == true);   // gamma = 0.5 admissible
  CHECK((0.9 < stats.ds_snr) == false);  // gamma = 0.9 is not
}

TEST_CASE("assumption1 spot check passes on generic inliers") {
  const auto scene = haystack(8, 3, 120, 40, 31);
  CHECK(diag::assumption1_spot_check(scene, 2, 50, 7));
}

}  // TEST_SUITE
