#include "rsr/epipolar.hpp"

#include "rsr/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rsr::epi {

namespace {

// Deterministic sign: F is defined up to sign, so the largest-magnitude entry
// is made positive (ties by lowest index, column-major).
Matrix3d canonical_sign(Matrix3d f) {
  int best = 0;
  double best_abs = std::abs(f.data()[0]);
  for (int i = 1; i < 9; ++i) {
    if (std::abs(f.data()[i]) > best_abs) {
      best_abs = std::abs(f.data()[i]);
      best = i;
    }
  }
  if (f.data()[best] < 0.0) f = -f;
  return f;
}

Matrix3d rank2_project(const Matrix3d& m) {
  Eigen::JacobiSVD<Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svd.singularValues();
  s[2] = 0.0;
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

// Smallest right-singular direction of the centered lifted matrix, i.e. the
// orthogonal complement of the recovered 8-subspace in R^9.
Eigen::Matrix<double, 9, 1> complement_of(const Subspace& subspace) {
  return orthonormal_complement(subspace.basis());
}

// 8-point solve on an already-normalized correspondence block: the left null
// direction of the lifted columns.
Matrix3d eight_point(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
  const Matrix lifted = lift(a, b);
  Eigen::JacobiSVD<Matrix> svd(lifted, Eigen::ComputeFullU);
  const Eigen::Matrix<double, 9, 1> g = svd.matrixU().col(8);
  return rank2_project(unvec3(g));
}

struct PixelFundamental {
  Matrix3d f;  // b^T F a = 0 convention, unit Frobenius
};

PixelFundamental finish(const Matrix3d& normalized_g, const NormalizingTransform& ta,
                        const NormalizingTransform& tb) {
  // The lifted columns are vec(a b^T), so the recovered complement G satisfies
  // a^T G b = 0 in normalized coordinates; T_a^T G T_b moves it back to pixels
  // and a transpose lands in the b^T F a = 0 convention.
  const Matrix3d pixel_g = ta.t.transpose() * normalized_g * tb.t;
  Matrix3d f = pixel_g.transpose();
  f /= f.norm();
  return PixelFundamental{canonical_sign(f)};
}

}  // namespace

void CorrespondenceSet::validate() const {
  if (pts_a.cols() != pts_b.cols()) {
    throw std::invalid_argument("CorrespondenceSet: views have different point counts");
  }
  if (pts_a.cols() < 8) throw std::invalid_argument("CorrespondenceSet: need at least 8 pairs");
  for (int j = 0; j < pts_a.cols(); ++j) {
    if (pts_a(2, j) != 1.0 || pts_b(2, j) != 1.0) {
      throw std::invalid_argument("CorrespondenceSet: third coordinate must be exactly 1");
    }
  }
  if (!inlier_mask.empty() && static_cast<int>(inlier_mask.size()) != size()) {
    throw std::invalid_argument("CorrespondenceSet: mask length mismatch");
  }
}

NormalizeResult normalize(const Eigen::Matrix3Xd& pts) {
  const int n = static_cast<int>(pts.cols());
  if (n < 1) throw std::invalid_argument("normalize: empty point set");
  const double mu1 = pts.row(0).mean();
  const double mu2 = pts.row(1).mean();
  // Population standard deviation (divide by N).
  const double sigma1 = std::sqrt((pts.row(0).array() - mu1).square().sum() / n);
  const double sigma2 = std::sqrt((pts.row(1).array() - mu2).square().sum() / n);
  if (sigma1 < 1e-12 || sigma2 < 1e-12) {
    throw std::invalid_argument("normalize: degenerate axis (zero spread)");
  }

  NormalizingTransform nt;
  nt.mu1 = mu1;
  nt.mu2 = mu2;
  nt.sigma1 = sigma1;
  nt.sigma2 = sigma2;
  nt.t << 1.0 / sigma1, 0, -mu1 / sigma1, 0, 1.0 / sigma2, -mu2 / sigma2, 0, 0, 1;

  NormalizeResult out;
  out.transform = nt;
  out.points.resize(3, n);
  for (int j = 0; j < n; ++j) out.points.col(j) = nt.t * pts.col(j);
  return out;
}

Matrix lift(const Eigen::Matrix3Xd& pts_a, const Eigen::Matrix3Xd& pts_b) {
  if (pts_a.cols() != pts_b.cols()) throw std::invalid_argument("lift: size mismatch");
  const int n = static_cast<int>(pts_a.cols());
  Matrix out(9, n);
  for (int j = 0; j < n; ++j) {
    const Matrix3d outer = pts_a.col(j) * pts_b.col(j).transpose();
    out.col(j) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(outer.data());
  }
  return out;
}

Matrix3d unvec3(const Eigen::Matrix<double, 9, 1>& v) {
  return Eigen::Map<const Matrix3d>(v.data());
}

double sampson_distance(const Matrix3d& f, const Vector3d& a, const Vector3d& b) {
  const Vector3d fa = f * a;
  const Vector3d ftb = f.transpose() * b;
  const double value = b.dot(fa);
  const double denom = fa[0] * fa[0] + fa[1] * fa[1] + ftb[0] * ftb[0] + ftb[1] * ftb[1];
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(value * value / denom);
}

namespace {

FundamentalEstimate ransac_fundamental(const CorrespondenceSet& corr,
                                       const EstimateFOptions& opts) {
  const int n = corr.size();
  Rng rng(opts.seed);
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);

  Matrix3d best_f = Matrix3d::Zero();
  int best_count = -1;
  std::vector<char> best_mask;
  int budget = opts.ransac_max_iters;

  Eigen::Matrix3Xd sample_a(3, 8), sample_b(3, 8);
  for (int iter = 1; iter <= budget; ++iter) {
    for (int j = 0; j < 8; ++j) {
      const int pick = j + static_cast<int>(rng.uniform_index(n - j));
      std::swap(indices[j], indices[pick]);
      sample_a.col(j) = corr.pts_a.col(indices[j]);
      sample_b.col(j) = corr.pts_b.col(indices[j]);
    }

    // Per-sample normalization of the 8 chosen points.
    Matrix3d f;
    try {
      const NormalizeResult na = normalize(sample_a);
      const NormalizeResult nb = normalize(sample_b);
      const Matrix3d g = eight_point(na.points, nb.points);
      f = finish(g, na.transform, nb.transform).f;
    } catch (const std::invalid_argument&) {
      continue;  // degenerate sample, redraw (still charged)
    }

    int count = 0;
    std::vector<char> mask(n, 0);
    for (int j = 0; j < n; ++j) {
      if (sampson_distance(f, corr.pts_a.col(j), corr.pts_b.col(j)) < opts.ransac_threshold) {
        mask[j] = 1;
        ++count;
      }
    }
    if (count > best_count) {
      best_count = count;
      best_f = f;
      best_mask = std::move(mask);
      const double eps = static_cast<double>(count) / n;
      const double success = std::pow(eps, 8);
      int needed = opts.ransac_max_iters;
      if (success >= 1.0) {
        needed = 1;
      } else if (success > 0.0) {
        // log1p: 1 - success rounds to 1 for tiny success and would zero the
        // denominator.
        const double raw = std::log(1.0 - opts.confidence) / std::log1p(-success);
        if (raw > 0.0 && raw < static_cast<double>(opts.ransac_max_iters)) {
          needed = std::max(1, static_cast<int>(std::ceil(raw)));
        }
      }
      budget = std::min(opts.ransac_max_iters, needed);
    }
  }

  if (best_count < 8) {
    throw std::runtime_error("estimate_f: RANSAC found no valid model");
  }

  // Refit on the consensus set.
  Eigen::Matrix3Xd in_a(3, best_count), in_b(3, best_count);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    if (best_mask[j]) {
      in_a.col(k) = corr.pts_a.col(j);
      in_b.col(k) = corr.pts_b.col(j);
      ++k;
    }
  }
  try {
    const NormalizeResult na = normalize(in_a);
    const NormalizeResult nb = normalize(in_b);
    const Matrix lifted = lift(na.points, nb.points);
    Eigen::JacobiSVD<Matrix> svd(lifted, Eigen::ComputeFullU);
    const Matrix3d g = rank2_project(unvec3(svd.matrixU().col(8)));
    best_f = finish(g, na.transform, nb.transform).f;
  } catch (const std::invalid_argument&) {
    // Keep the best sample model if the consensus refit is degenerate.
  }

  FundamentalEstimate out;
  out.f = best_f;
  out.method = Method::Ransac;
  return out;
}

}  // namespace

FundamentalEstimate estimate_f(const CorrespondenceSet& corr, const EstimateFOptions& opts) {
  corr.validate();

  FundamentalEstimate out;
  out.method = opts.method;

  if (opts.method == Method::Ransac) {
    out = ransac_fundamental(corr, opts);
  } else {
    const NormalizeResult na = normalize(corr.pts_a);
    const NormalizeResult nb = normalize(corr.pts_b);
    // The lifted columns carry the epipolar structure through the origin (the
    // ninth coordinate is identically one), so the scatter estimators run on
    // them directly; subtracting the sample mean would zero that coordinate
    // and pin the recovered complement to e9.
    const DataMatrix lifted(lift(na.points, nb.points));

    {
      const Spectrum s = sym_evd(lifted.entries() * lifted.entries().transpose() /
                                 lifted.num_points());
      const double top = std::max(s.eigenvalues[0], 1e-300);
      if (std::sqrt(std::max(0.0, s.eigenvalues[7]) / top) < 1e-10) {
        throw std::runtime_error(
            "estimate_f: degenerate correspondences (lifted rank below 8)");
      }
    }

    Eigen::Matrix<double, 9, 1> g;
    switch (opts.method) {
      case Method::Ste: {
        SteConfig cfg;
        cfg.d = 8;
        cfg.max_iters = opts.max_iters;
        cfg.tol = opts.tol;
        cfg.check_centering = false;
        if (opts.gamma_grid.size() == 1) {
          cfg.gamma = opts.gamma_grid.front();
          g = complement_of(ste(lifted, cfg).subspace);
        } else {
          const GammaSelection sel = tune_gamma(lifted, 8, opts.gamma_grid, cfg);
          g = complement_of(sel.results[sel.best_index].subspace);
        }
        break;
      }
      case Method::Tme: {
        TmeConfig cfg;
        cfg.d = 8;
        cfg.max_iters = opts.max_iters;
        cfg.tol = opts.tol;
        cfg.check_centering = false;
        g = complement_of(tme(lifted, cfg).subspace);
        break;
      }
      case Method::Fms:
      case Method::Sfms: {
        FmsConfig cfg;
        cfg.d = 8;
        cfg.p = opts.fms_p;
        cfg.spherical = opts.method == Method::Sfms;
        cfg.max_iters = opts.max_iters;
        cfg.check_centering = false;
        g = complement_of(fms(lifted, cfg).subspace);
        break;
      }
      default:
        throw std::logic_error("estimate_f: unreachable");
    }

    const Matrix3d projected = rank2_project(unvec3(g));
    out.f = finish(projected, na.transform, nb.transform).f;
  }

  out.inlier_mask.assign(corr.size(), 0);
  double max_resid = 0.0;
  for (int j = 0; j < corr.size(); ++j) {
    if (sampson_distance(out.f, corr.pts_a.col(j), corr.pts_b.col(j)) <
        opts.sampson_inlier_threshold) {
      out.inlier_mask[j] = 1;
      max_resid = std::max(max_resid,
                           std::abs(corr.pts_b.col(j).dot(out.f * corr.pts_a.col(j))));
    }
  }
  out.max_inlier_residual = max_resid;
  return out;
}

}  // namespace rsr::epi
