#include "rsr/nview.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rsr::nview {

int NViewEssential::observed_block_count() const {
  int count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) count += (observed[i][j] != 0);
  }
  return count;
}

NViewEssential assemble(const std::vector<BlockObservation>& blocks, int n) {
  if (n < 2) throw std::invalid_argument("assemble: need at least two cameras");

  NViewEssential out;
  out.n = n;
  out.entries = Matrix::Zero(3 * n, 3 * n);
  out.observed.assign(n, std::vector<char>(n, 0));
  out.scales.assign(n, std::vector<double>(n, 1.0));

  for (const BlockObservation& b : blocks) {
    if (b.i < 0 || b.j < 0 || b.i >= n || b.j >= n) {
      throw std::invalid_argument("assemble: block index out of range");
    }
    if (b.i == b.j) throw std::invalid_argument("assemble: diagonal blocks must stay zero");

    const Matrix3d scaled = b.lambda * b.e;
    if (out.observed[b.i][b.j]) {
      if ((out.entries.block<3, 3>(3 * b.i, 3 * b.j) - scaled).norm() > 1e-9) {
        throw std::invalid_argument("assemble: duplicate block disagrees");
      }
      continue;
    }
    if (out.observed[b.j][b.i]) {
      // The symmetric twin was already placed; the new block must transpose to it.
      if ((out.entries.block<3, 3>(3 * b.j, 3 * b.i) - scaled.transpose()).norm() > 1e-9) {
        throw std::invalid_argument("assemble: inconsistent symmetric pair");
      }
    }
    out.entries.block<3, 3>(3 * b.i, 3 * b.j) = scaled;
    out.entries.block<3, 3>(3 * b.j, 3 * b.i) = scaled.transpose();
    out.observed[b.i][b.j] = 1;
    out.observed[b.j][b.i] = 1;
    out.scales[b.i][b.j] = b.lambda;
    out.scales[b.j][b.i] = b.lambda;
  }
  return out;
}

double scale_against_reference(const Matrix3d& block, const Matrix3d& reference) {
  const double ref_sq = reference.squaredNorm();
  if (ref_sq <= 0.0) throw std::invalid_argument("scale_against_reference: zero reference");
  return (block.array() * reference.array()).sum() / ref_sq;
}

namespace {

// Soft-threshold of the singular values.
Matrix shrink(const Matrix& y, double mu) {
  Eigen::JacobiSVD<Matrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i) s[i] = std::max(0.0, s[i] - mu);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

// Constraint-set projection: the observed blocks plus the structurally zero
// diagonal blocks (an n-view essential matrix has zero diagonal by
// definition, which pins the 180 entries nuclear-norm shrinkage would
// otherwise underfill).
void project_observed(const NViewEssential& e, Matrix& m) {
  for (int i = 0; i < e.n; ++i) {
    for (int j = 0; j < e.n; ++j) {
      if (i != j && !e.is_observed(i, j)) m.block<3, 3>(3 * i, 3 * j).setZero();
    }
  }
}

}  // namespace

SvtResult svt_complete(const NViewEssential& e, const SvtOptions& opts) {
  const int omega = e.observed_block_count();
  if (omega < 1) throw std::invalid_argument("svt_complete: empty observation set");
  if (opts.max_iters < 1) throw std::invalid_argument("svt_complete: max_iters >= 1");

  Matrix observed = e.entries;
  project_observed(e, observed);  // the unobserved blocks are already zero
  const double observed_norm = observed.norm();
  if (observed_norm <= 0.0) throw std::invalid_argument("svt_complete: observations are all zero");

  const double delta =
      opts.delta > 0.0 ? opts.delta
                       : static_cast<double>(e.n) * e.n / (10.0 * static_cast<double>(omega));
  const double mu = opts.mu > 0.0
                        ? opts.mu
                        : 5.0 * Eigen::JacobiSVD<Matrix>(observed).singularValues()[0];

  SvtResult out;
  Matrix y = Matrix::Zero(observed.rows(), observed.cols());
  double previous_residual = std::numeric_limits<double>::infinity();
  int growing = 0;

  for (int k = 1; k <= opts.max_iters; ++k) {
    out.completed = shrink(y, mu);
    Matrix residual = observed - out.completed;
    project_observed(e, residual);
    out.observed_residual = residual.norm() / observed_norm;
    out.iterations = k;

    if (out.observed_residual < opts.tol) {
      out.converged = true;
      return out;
    }
    if (out.observed_residual > previous_residual) {
      if (++growing >= 50) {
        throw std::runtime_error(
            "svt_complete: diverging (observed residual grew for 50 consecutive iterations); "
            "reduce the step size");
      }
    } else {
      growing = 0;
    }
    previous_residual = out.observed_residual;
    y += delta * residual;
  }
  return out;
}

Matrix3d project_essential(const Matrix3d& m) {
  Eigen::JacobiSVD<Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal() *
         svd.matrixV().transpose();
}

std::vector<double> ScreeningReport::sorted_distances() const {
  std::vector<double> out(column_distances.data(),
                          column_distances.data() + column_distances.size());
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

ScreeningReport screen(const NViewEssential& e, const ScreenOptions& opts) {
  if (e.n < 4) throw std::invalid_argument("screen: need at least four cameras");
  if (opts.d < 1 || opts.d >= 3 * e.n - 1) throw std::invalid_argument("screen: bad d");
  if (!(opts.outlier_frac > 0.0 && opts.outlier_frac < 1.0)) {
    throw std::invalid_argument("screen: outlier fraction must lie in (0, 1)");
  }

  Matrix filled = e.entries;  // zero-filled by construction
  if (opts.completion == Completion::Svt) {
    const Matrix completed = svt_complete(e, opts.svt).completed;
    for (int i = 0; i < e.n; ++i) {
      for (int j = 0; j < e.n; ++j) {
        if (i != j && !e.is_observed(i, j)) {
          filled.block<3, 3>(3 * i, 3 * j) =
              project_essential(completed.block<3, 3>(3 * i, 3 * j));
        }
      }
    }
  }

  const CenterResult centered = center(filled);
  Subspace subspace = [&] {
    switch (opts.method) {
      case Method::Ste: {
        SteConfig cfg;
        cfg.d = opts.d;
        cfg.gamma = opts.ste_gamma;
        cfg.max_iters = opts.max_iters;
        cfg.tol = opts.tol;
        return ste(centered.data, cfg).subspace;
      }
      case Method::Tme: {
        TmeConfig cfg;
        cfg.d = opts.d;
        cfg.max_iters = opts.max_iters;
        cfg.tol = opts.tol;
        return tme(centered.data, cfg).subspace;
      }
      case Method::Fms:
      case Method::Sfms: {
        FmsConfig cfg;
        cfg.d = opts.d;
        cfg.p = opts.fms_p;
        cfg.spherical = opts.method == Method::Sfms;
        cfg.max_iters = opts.max_iters;
        return fms(centered.data, cfg).subspace;
      }
      case Method::Ransac: {
        RansacConfig cfg;
        cfg.d = opts.d;
        cfg.inlier_threshold = opts.ransac_threshold;
        cfg.max_iters = opts.ransac_max_iters;
        cfg.seed = opts.seed;
        return ransac_subspace(centered.data, cfg).subspace;
      }
    }
    throw std::logic_error("screen: unreachable");
  }();

  ScreeningReport report;
  report.column_distances = subspace.distances(centered.data.entries());

  const int total = 3 * e.n;
  const int flag_count = static_cast<int>(std::ceil(opts.outlier_frac * total));
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return report.column_distances[a] > report.column_distances[b];
  });
  report.flagged_columns.assign(order.begin(), order.begin() + flag_count);

  std::vector<char> camera_flag(e.n, 0);
  for (int col : report.flagged_columns) camera_flag[col / 3] = 1;
  for (int i = 0; i < e.n; ++i) {
    if (camera_flag[i]) report.removed_cameras.push_back(i);
  }

  const double max_flagged = report.column_distances[order.front()];
  const double max_unflagged =
      flag_count < total ? report.column_distances[order[flag_count]] : 0.0;
  report.flagged_unflagged_ratio = max_flagged / std::max(max_unflagged, 1e-300);
  return report;
}

}  // namespace rsr::nview
