#include "rsr/diagnostics.hpp"

#include "rsr/estimators.hpp"
#include "rsr/rng.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace rsr::diag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Blocks {
  Matrix star_star;  // U*^T S U*
  Matrix star_perp;
  Matrix perp_perp;
};

Blocks split_blocks(const ScatterEstimate& sigma0, const Subspace& l_star) {
  if (sigma0.dim() != l_star.ambient_dim()) {
    throw std::invalid_argument("diagnostics: scatter and subspace dimensions differ");
  }
  const Matrix& u = l_star.basis();
  const Matrix perp = orthonormal_complement(u);
  Blocks b;
  b.star_star = u.transpose() * sigma0.matrix() * u;
  b.star_perp = u.transpose() * sigma0.matrix() * perp;
  b.perp_perp = perp.transpose() * sigma0.matrix() * perp;
  return b;
}

}  // namespace

double ds_snr(int n1, int n0, int d, int ambient_dim) {
  if (d < 1 || d >= ambient_dim) throw std::invalid_argument("ds_snr: need 1 <= d < D");
  if (n1 < 0 || n0 < 0) throw std::invalid_argument("ds_snr: negative counts");
  if (n0 == 0) return kInf;  // pure inliers
  return (static_cast<double>(n1) / d) / (static_cast<double>(n0) / (ambient_dim - d));
}

double kappa1(const ScatterEstimate& sigma0, const Subspace& l_star) {
  const Blocks b = split_blocks(sigma0, l_star);
  const Spectrum perp_spec = sym_evd(b.perp_perp);
  const double perp_top = perp_spec.eigenvalues[0];
  const double perp_bottom = perp_spec.eigenvalues[perp_spec.dim() - 1];

  if (perp_top < 1e-14) {
    // The scatter has no energy outside L*; if the cross blocks vanish too,
    // its image is exactly the subspace and the initialization is already done.
    if (b.star_perp.norm() < 1e-12) return kInf;
    throw std::invalid_argument("kappa1: singular perp block");
  }
  if (perp_bottom < 1e-14 * perp_top) {
    throw std::invalid_argument("kappa1: singular perp block");
  }

  const Matrix schur =
      b.star_star - b.star_perp * b.perp_perp.ldlt().solve(b.star_perp.transpose());
  const Spectrum schur_spec = sym_evd(0.5 * (schur + schur.transpose()));
  const double numerator = schur_spec.eigenvalues[schur_spec.dim() - 1];  // sigma_d
  return numerator / perp_top;
}

double kappa2(const ScatterEstimate& sigma0, const Subspace& l_star) {
  const Blocks b = split_blocks(sigma0, l_star);
  const double perp_top = sym_evd(b.perp_perp).eigenvalues[0];
  const double sigma_min = sigma0.spectrum().eigenvalues[sigma0.dim() - 1];
  if (sigma_min <= 0.0) return kInf;
  return perp_top / sigma_min;
}

SceneStats scene_stats(const synth::SyntheticScene& scene, const ScatterEstimate& sigma0,
                       double gamma) {
  const int ambient = scene.data.dim();
  const int d = scene.truth.dim();
  const Matrix& pts = scene.data.entries();

  int n1 = 0;
  for (char m : scene.inlier_mask) n1 += (m != 0);
  const int n0 = scene.data.num_points() - n1;
  if (n1 < d) throw std::invalid_argument("scene_stats: need at least d inliers");
  if (n0 < 1) throw std::invalid_argument("scene_stats: need at least one outlier");

  SceneStats out;
  out.ds_snr = ds_snr(n1, n0, d, ambient);
  out.kappa1 = kappa1(sigma0, scene.truth);
  out.kappa2 = kappa2(sigma0, scene.truth);

  // kappa_in: condition number of the TME shape of the projected inliers.
  if (d == 1) {
    out.kappa_in = 1.0;
  } else {
    Matrix projected(d, n1);
    int k = 0;
    for (int j = 0; j < scene.data.num_points(); ++j) {
      if (scene.inlier_mask[j]) projected.col(k++) = scene.truth.basis().transpose() * pts.col(j);
    }
    const CenterResult centered = center(projected);
    const Spectrum s = tme(centered.data, std::max(1, d - 1)).scatter->spectrum();
    out.kappa_in = s.eigenvalues[0] / std::max(s.eigenvalues[d - 1], 1e-300);
  }

  // Alignment of outliers and stability statistics.
  const Matrix perp = orthonormal_complement(scene.truth.basis());
  Matrix align_sum = Matrix::Zero(ambient, ambient);
  int excluded = 0;
  Matrix stab_sum = Matrix::Zero(ambient, ambient);
  for (int j = 0; j < scene.data.num_points(); ++j) {
    const Vector x = pts.col(j);
    stab_sum += x * x.transpose() / x.squaredNorm();
    if (!scene.inlier_mask[j]) {
      const double off = (perp.transpose() * x).squaredNorm();
      if (off < 1e-24) {
        ++excluded;  // outlier lying inside L*
        continue;
      }
      align_sum += x * x.transpose() / off;
    }
  }
  if (excluded > 0) {
    std::cerr << "scene_stats: excluded " << excluded
              << " outlier(s) lying inside the planted subspace from the alignment statistic\n";
  }
  out.alignment_a = sym_evd(align_sum).eigenvalues[0];
  out.stability_s = sym_evd(stab_sum).eigenvalues.tail(ambient - d).mean();

  // Eq. 4 right-hand side with C = 1; +infinity when Assumption 2 fails (the
  // middle term's denominator crosses zero).
  const double margin =
      static_cast<double>(n1) / d - gamma * static_cast<double>(n0) / (ambient - d);
  if (margin <= 0.0 || out.stability_s <= 0.0) {
    out.assumption3_rhs_c1 = kInf;
  } else {
    const double a = out.alignment_a;
    out.assumption3_rhs_c1 =
        (d * out.kappa_in * a / n1) *
        (out.kappa_in + a / margin +
         (out.kappa2 * a / (gamma * out.stability_s)) * (1.0 + out.kappa_in));
  }
  return out;
}

bool assumption1_spot_check(const synth::SyntheticScene& scene, int k, int trials,
                            std::uint64_t seed, double tol) {
  const int d = scene.truth.dim();
  if (k < 1 || k > d) throw std::invalid_argument("assumption1_spot_check: need 1 <= k <= d");

  std::vector<int> inliers;
  for (int j = 0; j < scene.data.num_points(); ++j) {
    if (scene.inlier_mask[j]) inliers.push_back(j);
  }
  const int n1 = static_cast<int>(inliers.size());
  if (n1 < k) return true;
  const double cap = static_cast<double>(n1) * k / d;

  Rng rng(seed);
  const Matrix& pts = scene.data.entries();
  for (int t = 0; t < trials; ++t) {
    Matrix sample(scene.data.dim(), k);
    for (int j = 0; j < k; ++j) {
      sample.col(j) = pts.col(inliers[rng.uniform_index(n1)]);
    }
    Subspace span = [&]() -> Subspace {
      try {
        return Subspace::from_span(sample);
      } catch (const std::invalid_argument&) {
        return Subspace::from_span(sample.leftCols(1));  // degenerate draw, test anyway
      }
    }();
    if (span.dim() != k) continue;
    const Vector dist = span.distances(pts);
    long contained = 0;
    for (int idx : inliers) {
      if (dist[idx] <= tol * std::max(1.0, pts.col(idx).norm())) ++contained;
    }
    if (static_cast<double>(contained) > cap) return false;
  }
  return true;
}

}  // namespace rsr::diag
