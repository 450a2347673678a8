#include "rsr/estimators.hpp"
#include "rsr/rng.hpp"

#include "estimators_common.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numeric>

namespace rsr {

namespace {

// Expected iteration count ceil(log(1-confidence) / log(1 - eps^d)), clamped
// to [1, cap]. log1p keeps the denominator finite when eps^d drops below
// machine epsilon (1 - eps^d would round to 1 and the ratio to -inf).
int adaptive_budget(double inlier_ratio, int d, double confidence, int cap) {
  const double success = std::pow(inlier_ratio, d);
  if (success >= 1.0) return 1;
  if (success <= 0.0) return cap;
  const double needed = std::log(1.0 - confidence) / std::log1p(-success);
  if (!(needed > 0.0)) return 1;
  if (needed >= static_cast<double>(cap)) return cap;
  return std::max(1, static_cast<int>(std::ceil(needed)));
}

// Orthonormal basis of the best-fit rank-d column space, or empty when the
// sample is rank-deficient.
Matrix fit_basis(const Matrix& sample, int d) {
  Eigen::JacobiSVD<Matrix> svd(sample, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  if (sv.size() < d || sv[d - 1] <= 1e-12 * std::max(sv[0], 1e-300)) return Matrix();
  return svd.matrixU().leftCols(d);
}

}  // namespace

EstimatorResult ransac_subspace(const DataMatrix& x, const RansacConfig& cfg,
                                const Subspace* truth) {
  const int ambient = x.dim();
  const int n = x.num_points();
  if (cfg.d < 1 || cfg.d >= ambient) throw std::invalid_argument("ransac: need 1 <= d < D");
  if (n <= cfg.d) throw std::invalid_argument("ransac: need more points than d");
  if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
    throw std::invalid_argument("ransac: confidence must lie in (0, 1)");
  }
  if (cfg.max_iters < 1) throw std::invalid_argument("ransac: max_iters >= 1 required");

  auto prepared = detail::prepare_centered(x, "ransac", cfg.check_centering);
  const Matrix& data = prepared.x;
  const int count = static_cast<int>(data.cols());

  Rng rng(cfg.seed);
  std::vector<int> indices(count);
  std::iota(indices.begin(), indices.end(), 0);

  EstimatorResult result;
  result.dropped_columns = prepared.dropped;

  Matrix best_basis;
  std::vector<char> best_mask;
  int best_count = -1;
  int budget = cfg.max_iters;
  double current_angle = 2.0 * std::atan(1.0) * 2.0;  // pi/2 until a model exists

  Matrix sample(ambient, cfg.d);
  for (int iter = 1; iter <= budget; ++iter) {
    // Partial Fisher-Yates draw of d distinct columns.
    for (int j = 0; j < cfg.d; ++j) {
      const int pick = j + static_cast<int>(rng.uniform_index(count - j));
      std::swap(indices[j], indices[pick]);
      sample.col(j) = data.col(indices[j]);
    }

    result.iterations = iter;
    const Matrix basis = fit_basis(sample, cfg.d);
    if (basis.size() == 0) {
      // Degenerate sample: redraw, still charged against the budget.
      result.step_norms.push_back(best_count < 0 ? 0.0 : static_cast<double>(best_count) / count);
      if (truth != nullptr) result.angles.push_back(current_angle);
      continue;
    }

    const Matrix proj = basis.transpose() * data;
    int consensus = 0;
    std::vector<char> mask(count, 0);
    for (int j = 0; j < count; ++j) {
      const double dist_sq =
          std::max(0.0, data.col(j).squaredNorm() - proj.col(j).squaredNorm());
      if (std::sqrt(dist_sq) < cfg.inlier_threshold) {
        mask[j] = 1;
        ++consensus;
      }
    }
    if (consensus > best_count) {
      best_count = consensus;
      best_basis = basis;
      best_mask = std::move(mask);
      budget = std::min(cfg.max_iters,
                        adaptive_budget(static_cast<double>(consensus) / count, cfg.d,
                                        cfg.confidence, cfg.max_iters));
      if (truth != nullptr) current_angle = principal_angle(Subspace(best_basis), *truth);
    }
    result.step_norms.push_back(static_cast<double>(best_count) / count);
    if (truth != nullptr) result.angles.push_back(current_angle);
  }

  if (best_count < 0) {
    throw std::runtime_error("ransac: no non-degenerate sample found within the budget");
  }

  // Refit on the full consensus set.
  if (best_count > cfg.d) {
    Matrix inliers(ambient, best_count);
    int k = 0;
    for (int j = 0; j < count; ++j) {
      if (best_mask[j]) inliers.col(k++) = data.col(j);
    }
    const Matrix refit = fit_basis(inliers, cfg.d);
    if (refit.size() != 0) best_basis = refit;
  }

  result.subspace = Subspace(best_basis);
  result.converged = true;
  return result;
}

}  // namespace rsr
