#include "rsr/estimators.hpp"

#include "estimators_common.hpp"

#include <cmath>

namespace rsr {

EstimatorResult fms(const DataMatrix& x, const FmsConfig& cfg, const Subspace* truth) {
  const int ambient = x.dim();
  if (cfg.d < 1 || cfg.d >= ambient) throw std::invalid_argument("fms: need 1 <= d < D");
  if (!(cfg.p >= 0.0 && cfg.p < 2.0)) throw std::invalid_argument("fms: p must lie in [0, 2)");
  if (!(cfg.delta > 0.0)) throw std::invalid_argument("fms: delta must be positive");
  if (cfg.max_iters < 1 || !(cfg.tol > 0.0)) {
    throw std::invalid_argument("fms: max_iters >= 1 and tol > 0 required");
  }

  auto prepared =
      detail::prepare_centered(x, cfg.spherical ? "sfms" : "fms", cfg.check_centering);
  Matrix data = std::move(prepared.x);
  if (cfg.spherical) {
    for (int j = 0; j < data.cols(); ++j) data.col(j) /= data.col(j).norm();
  }

  EstimatorResult result;
  result.dropped_columns = prepared.dropped;

  const double exponent = (2.0 - cfg.p) / 2.0;
  Subspace current = ScatterEstimate::from_matrix(detail::gram_outer(data)).top_subspace(cfg.d);

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Matrix proj = current.basis().transpose() * data;
    Vector w(data.cols());
    for (int j = 0; j < data.cols(); ++j) {
      const double dist_sq =
          std::max(0.0, data.col(j).squaredNorm() - proj.col(j).squaredNorm());
      w[j] = 1.0 / std::pow(std::max(dist_sq, cfg.delta), exponent);
    }
    const Matrix xw = data * w.cwiseSqrt().asDiagonal();
    Subspace next = ScatterEstimate::from_matrix(detail::gram_outer(xw)).top_subspace(cfg.d);

    const double change = principal_angle(current, next);
    result.step_norms.push_back(change);
    result.iterations = k;
    current = std::move(next);
    if (truth != nullptr) result.angles.push_back(principal_angle(current, *truth));

    if (change < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.subspace = std::move(current);
  return result;
}

}  // namespace rsr
