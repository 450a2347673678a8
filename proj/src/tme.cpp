#include "rsr/estimators.hpp"

#include "estimators_common.hpp"

#include <algorithm>
#include <cmath>

namespace rsr {

EstimatorResult tme(const DataMatrix& x, int d, int max_iters, double tol,
                    const Subspace* truth) {
  TmeConfig cfg;
  cfg.d = d;
  cfg.max_iters = max_iters;
  cfg.tol = tol;
  return tme(x, cfg, truth);
}

EstimatorResult tme(const DataMatrix& x, const TmeConfig& cfg, const Subspace* truth) {
  const int ambient = x.dim();
  const int d = cfg.d;
  const int max_iters = cfg.max_iters;
  const double tol = cfg.tol;
  const double mahalanobis_floor = cfg.mahalanobis_floor;
  if (d < 1 || d >= ambient) throw std::invalid_argument("tme: need 1 <= d < D");
  if (max_iters < 1 || !(tol > 0.0)) {
    throw std::invalid_argument("tme: max_iters >= 1 and tol > 0 required");
  }
  auto prepared = detail::prepare_centered(x, "tme", cfg.check_centering);
  const Matrix& data = prepared.x;

  Matrix sigma = Matrix::Identity(ambient, ambient) / ambient;
  Spectrum spec;
  spec.eigenvalues = Vector::Constant(ambient, 1.0 / ambient);
  spec.eigenvectors = Matrix::Identity(ambient, ambient);

  EstimatorResult result;
  result.dropped_columns = prepared.dropped;

  // Divergence guard: the fixed-point residual of a convergent run keeps
  // setting new lows; 50 straight iterations without one flags the run.
  double best_residual = std::numeric_limits<double>::infinity();
  Matrix best_sigma = sigma;
  Spectrum best_spec = spec;
  int stale = 0;
  bool diverged = false;

  for (int k = 1; k <= max_iters; ++k) {
    const Vector q = mahalanobis_quadforms(spec, data, mahalanobis_floor);
    const Matrix xw = data * q.cwiseInverse().cwiseSqrt().asDiagonal();
    Matrix z = detail::gram_outer(xw);
    z /= z.trace();

    const double residual = (z - sigma).norm();  // ||T(Sigma) - Sigma||_F
    result.step_norms.push_back(residual);
    result.iterations = k;

    if (residual < best_residual) {
      best_residual = residual;
      best_sigma = sigma;
      best_spec = spec;
      stale = 0;
    } else {
      ++stale;
    }

    sigma = std::move(z);
    spec = sym_evd(sigma);
    if (truth != nullptr) {
      result.angles.push_back(principal_angle(Subspace(spec.eigenvectors.leftCols(d)), *truth));
    }

    if (residual < tol) {
      result.converged = true;
      break;
    }
    if (stale >= 50) {
      diverged = true;
      break;
    }
  }

  if (diverged) {
    sigma = best_sigma;
    spec = best_spec;
    result.converged = false;
  }

  result.subspace = Subspace(spec.eigenvectors.leftCols(d));
  Spectrum clamped = spec;
  for (int j = 0; j < clamped.dim(); ++j) {
    clamped.eigenvalues[j] = std::max(clamped.eigenvalues[j], 0.0);
  }
  result.scatter = ScatterEstimate::from_spectrum(std::move(clamped));
  return result;
}

}  // namespace rsr
