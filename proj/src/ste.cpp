#include "rsr/estimators.hpp"

#include "estimators_common.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsr {

namespace {

// Shields rank-deficient iterates: pure-inlier data drives the bottom
// eigenvalues of Z to rounding noise, occasionally slightly negative.
double floor_sigma0(double sigma0, double top) {
  return std::max(sigma0, 1e-18 * std::max(top, 0.0));
}

Vector quadforms_for_scatter(const ScatterEstimate& s, const Matrix& x, int d, double floor_value) {
  const Spectrum& spec = s.spectrum();
  const int dim = spec.dim();
  // Detect the STE structure so only the top d eigenpairs are touched.
  const double bottom = spec.eigenvalues[dim - 1];
  bool structured = true;
  for (int j = d; j < dim; ++j) {
    if (std::abs(spec.eigenvalues[j] - bottom) > 1e-12 * std::max(1.0, spec.eigenvalues[0])) {
      structured = false;
      break;
    }
  }
  if (structured) {
    return detail::structured_quadforms(spec.eigenvectors.leftCols(d),
                                        spec.eigenvalues.head(d), bottom, x, floor_value);
  }
  return mahalanobis_quadforms(spec, x, floor_value);
}

struct StructuredState {
  Matrix basis;     // D x d, orthonormal
  Vector top_vals;  // descending, trace-normalized
  double beta = 0.0;
};

// Frobenius norm of (U1 A1 U1^T + b1 (I - U1 U1^T)) - (U2 A2 U2^T + b2 (I - U2 U2^T))
// in O(D d^2) through the d x d overlap matrix.
double structured_step_norm(const StructuredState& s1, const StructuredState& s2, int ambient) {
  const Vector a1 = s1.top_vals.array() - s1.beta;
  const Vector a2 = s2.top_vals.array() - s2.beta;
  const double c = s1.beta - s2.beta;
  const Matrix overlap = s1.basis.transpose() * s2.basis;  // d x d
  const double cross = (overlap * a2.asDiagonal() * overlap.transpose() * a1.asDiagonal()).trace();
  double sq = a1.squaredNorm() + a2.squaredNorm() - 2.0 * cross;
  sq += 2.0 * c * (a1.sum() - a2.sum());
  sq += c * c * static_cast<double>(ambient);
  return std::sqrt(std::max(0.0, sq));
}

// Warm-started block subspace iteration with Rayleigh-Ritz extraction for the
// top eigenpairs of X_w X_w^T, applied implicitly (O(N D b) per sweep).
void top_eigenpairs(const Matrix& xw, int wanted, Matrix& block, Vector& ritz_vals,
                    int max_sweeps = 200, double rel_tol = 1e-11) {
  const int dim = static_cast<int>(xw.rows());
  const int b = static_cast<int>(block.cols());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Matrix g = xw * (xw.transpose() * block);  // Z * Q
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, b);
    g = xw * (xw.transpose() * q);
    const Matrix small = q.transpose() * g;  // b x b, symmetric up to rounding
    const Spectrum ritz = sym_evd(0.5 * (small + small.transpose()), 1e-6);
    block = q * ritz.eigenvectors;
    ritz_vals = ritz.eigenvalues;
    const Matrix resid = g * ritz.eigenvectors - block * ritz.eigenvalues.asDiagonal();
    double worst = 0.0;
    for (int j = 0; j < wanted; ++j) worst = std::max(worst, resid.col(j).norm());
    if (worst <= rel_tol * std::max(ritz_vals[0], 1e-300)) return;
  }
}

void maybe_record_angle(std::vector<double>& angles, const Matrix& basis, const Subspace* truth) {
  if (truth == nullptr) return;
  angles.push_back(principal_angle(Subspace(basis), *truth));
}

EstimatorResult ste_dense(const Matrix& x, const SteConfig& cfg, const Subspace* truth,
                          int dropped) {
  const int ambient = static_cast<int>(x.rows());
  const int d = cfg.d;

  Matrix sigma;
  std::optional<ScatterEstimate> init;
  if (cfg.init == SteInit::ScaledIdentity) {
    sigma = Matrix::Identity(ambient, ambient) / ambient;
    Spectrum s;
    s.eigenvalues = Vector::Constant(ambient, 1.0 / ambient);
    s.eigenvectors = Matrix::Identity(ambient, ambient);
    init = ScatterEstimate::from_spectrum(std::move(s));
  } else if (cfg.init == SteInit::Tme) {
    TmeConfig tme_cfg;
    tme_cfg.d = d;
    tme_cfg.check_centering = false;  // x already passed the entry guard
    init = tme(DataMatrix(x), tme_cfg).scatter;
    sigma = init->matrix();
  } else {
    if (!cfg.init_scatter.has_value()) {
      throw std::invalid_argument("ste: init == Given requires init_scatter");
    }
    init = cfg.init_scatter;
    sigma = init->matrix();
  }

  EstimatorResult result;
  result.dropped_columns = dropped;

  bool structured = false;
  StructuredState state;
  Spectrum final_spec = init->spectrum();

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Vector q = structured
                         ? detail::structured_quadforms(state.basis, state.top_vals, state.beta, x,
                                                        cfg.mahalanobis_floor)
                         : quadforms_for_scatter(*init, x, d, cfg.mahalanobis_floor);
    const Matrix xw = x * q.cwiseInverse().cwiseSqrt().asDiagonal();
    const Matrix z = detail::gram_outer(xw);
    const Spectrum zs = sym_evd(z);

    const double sigma0 =
        floor_sigma0(zs.eigenvalues.tail(ambient - d).mean(), zs.eigenvalues[0]);
    Vector vals(ambient);
    vals.head(d) = zs.eigenvalues.head(d);
    vals.tail(ambient - d).setConstant(cfg.gamma * sigma0);
    vals /= vals.sum();

    Matrix sigma_next = zs.eigenvectors * vals.asDiagonal() * zs.eigenvectors.transpose();
    sigma_next = 0.5 * (sigma_next + sigma_next.transpose());

    const double step = (sigma_next - sigma).norm();
    result.step_norms.push_back(step);
    maybe_record_angle(result.angles, zs.eigenvectors.leftCols(d), truth);
    result.iterations = k;

    sigma = std::move(sigma_next);
    state.basis = zs.eigenvectors.leftCols(d);
    state.top_vals = vals.head(d);
    state.beta = vals[d];
    structured = true;
    final_spec.eigenvalues = vals;
    final_spec.eigenvectors = zs.eigenvectors;

    if (step < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.subspace = Subspace(final_spec.eigenvectors.leftCols(d));
  if (cfg.compute_scatter) {
    result.scatter = ScatterEstimate::from_spectrum(std::move(final_spec));
  }
  return result;
}

EstimatorResult ste_topd(const Matrix& x, const SteConfig& cfg, const Subspace* truth,
                         int dropped) {
  const int ambient = static_cast<int>(x.rows());
  const int d = cfg.d;
  const int block_size = std::min(ambient, d + 2);

  std::optional<ScatterEstimate> init;
  StructuredState state;
  bool structured = false;
  Matrix block;  // persisted warm start for the inner eigensolver

  if (cfg.init == SteInit::ScaledIdentity) {
    state.basis = Matrix::Identity(ambient, d);
    state.top_vals = Vector::Constant(d, 1.0 / ambient);
    state.beta = 1.0 / ambient;
    structured = true;
    block = Matrix::Identity(ambient, block_size);
  } else {
    if (cfg.init == SteInit::Tme) {
      TmeConfig tme_cfg;
      tme_cfg.d = d;
      tme_cfg.check_centering = false;
      init = tme(DataMatrix(x), tme_cfg).scatter;
    } else {
      if (!cfg.init_scatter.has_value()) {
        throw std::invalid_argument("ste: init == Given requires init_scatter");
      }
      init = cfg.init_scatter;
    }
    block = init->spectrum().eigenvectors.leftCols(block_size);
  }

  Vector col_sq(x.cols());
  for (int j = 0; j < x.cols(); ++j) col_sq[j] = x.col(j).squaredNorm();

  EstimatorResult result;
  result.dropped_columns = dropped;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Vector q = structured
                         ? detail::structured_quadforms(state.basis, state.top_vals, state.beta, x,
                                                        cfg.mahalanobis_floor)
                         : quadforms_for_scatter(*init, x, d, cfg.mahalanobis_floor);
    const Matrix xw = x * q.cwiseInverse().cwiseSqrt().asDiagonal();

    Vector ritz_vals;
    top_eigenpairs(xw, d, block, ritz_vals);

    const double trace_z = (col_sq.array() / q.array()).sum();
    const double top_sum = ritz_vals.head(d).sum();
    const double sigma0 =
        floor_sigma0((trace_z - top_sum) / (ambient - d), ritz_vals[0]);

    StructuredState next;
    next.basis = block.leftCols(d);
    const double norm = top_sum + (ambient - d) * cfg.gamma * sigma0;
    next.top_vals = ritz_vals.head(d) / norm;
    next.beta = cfg.gamma * sigma0 / norm;

    double step;
    if (structured) {
      step = structured_step_norm(next, state, ambient);
    } else {
      // First step from a general initializer: expand against the dense matrix.
      const Matrix& s0 = init->matrix();
      const Vector a = next.top_vals.array() - next.beta;
      const double norm_next_sq =
          next.top_vals.squaredNorm() + (ambient - d) * next.beta * next.beta;
      const Matrix overlap = next.basis.transpose() * (s0 * next.basis);
      const double inner = (a.asDiagonal() * overlap).trace() + next.beta * s0.trace();
      step = std::sqrt(std::max(0.0, norm_next_sq - 2.0 * inner + s0.squaredNorm()));
    }
    result.step_norms.push_back(step);
    maybe_record_angle(result.angles, next.basis, truth);
    result.iterations = k;

    state = std::move(next);
    structured = true;

    if (step < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.subspace = Subspace(state.basis);
  if (cfg.compute_scatter) {
    Spectrum s;
    s.eigenvalues.resize(ambient);
    s.eigenvalues.head(d) = state.top_vals;
    s.eigenvalues.tail(ambient - d).setConstant(std::min(state.beta, state.top_vals[d - 1]));
    s.eigenvectors.resize(ambient, ambient);
    s.eigenvectors.leftCols(d) = state.basis;
    s.eigenvectors.rightCols(ambient - d) = orthonormal_complement(state.basis);
    result.scatter = ScatterEstimate::from_spectrum(std::move(s));
  }
  return result;
}

}  // namespace

Vector mahalanobis_quadforms(const Spectrum& s, const Matrix& x, double floor_value) {
  const Matrix proj = s.eigenvectors.transpose() * x;  // D x N
  Vector q(x.cols());
  for (int i = 0; i < x.cols(); ++i) {
    double value = 0.0;
    for (int j = 0; j < s.dim(); ++j) {
      if (s.eigenvalues[j] > 0.0) value += proj(j, i) * proj(j, i) / s.eigenvalues[j];
    }
    q[i] = std::max(value, floor_value);
  }
  return q;
}

EstimatorResult ste(const DataMatrix& x, const SteConfig& cfg, const Subspace* truth) {
  if (cfg.d < 1 || cfg.d >= x.dim()) {
    throw std::invalid_argument("ste: need 1 <= d < D");
  }
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) {
    throw std::invalid_argument("ste: gamma must lie in (0, 1]");
  }
  if (cfg.max_iters < 1 || !(cfg.tol > 0.0)) {
    throw std::invalid_argument("ste: max_iters >= 1 and tol > 0 required");
  }
  if (cfg.init == SteInit::Given &&
      (!cfg.init_scatter.has_value() || cfg.init_scatter->dim() != x.dim())) {
    throw std::invalid_argument("ste: init == Given requires a scatter of matching dimension");
  }
  auto prepared = detail::prepare_centered(x, "ste", cfg.check_centering);

  const bool use_topd = cfg.engine == SteEigEngine::TopD ||
                        (cfg.engine == SteEigEngine::Auto && x.dim() >= 64 && 4 * cfg.d <= x.dim());
  return use_topd ? ste_topd(prepared.x, cfg, truth, prepared.dropped)
                  : ste_dense(prepared.x, cfg, truth, prepared.dropped);
}

Vector ste_weights(const ScatterEstimate& scatter, const DataMatrix& x, int d, double gamma,
                   double mahalanobis_floor) {
  const int ambient = scatter.dim();
  if (d < 1 || d >= ambient) throw std::invalid_argument("ste_weights: need 1 <= d < D");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("ste_weights: bad gamma");
  const Spectrum& spec = scatter.spectrum();
  const double bottom = spec.eigenvalues[ambient - 1];
  for (int j = d; j < ambient; ++j) {
    if (std::abs(spec.eigenvalues[j] - bottom) > 1e-9 * std::max(1.0, spec.eigenvalues[0])) {
      throw std::invalid_argument(
          "ste_weights: scatter lacks the STE structure (equal bottom eigenvalues)");
    }
  }
  // The scatter's shared bottom eigenvalue is already gamma times the
  // pre-shrink bottom average, so the formal beta coincides with it and the
  // weights reduce to the reciprocal Mahalanobis forms.
  const Vector q = detail::structured_quadforms(spec.eigenvectors.leftCols(d),
                                                spec.eigenvalues.head(d), bottom, x.entries(),
                                                mahalanobis_floor);
  return q.cwiseInverse();
}

GammaSelection tune_gamma(const DataMatrix& x, int d, const std::vector<double>& gammas,
                          const SteConfig& base, const Subspace* truth) {
  if (gammas.empty()) throw std::invalid_argument("tune_gamma: empty gamma list");
  for (double g : gammas) {
    if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("tune_gamma: gamma outside (0, 1]");
  }

  GammaSelection sel;
  sel.gammas = gammas;
  std::vector<Vector> dists;
  dists.reserve(gammas.size());
  std::vector<double> pooled;
  for (double g : gammas) {
    SteConfig cfg = base;
    cfg.gamma = g;
    cfg.d = d;
    EstimatorResult r = ste(x, cfg, truth);
    dists.push_back(r.subspace.distances(x.entries()));
    const Vector& dv = dists.back();
    pooled.insert(pooled.end(), dv.data(), dv.data() + dv.size());
    sel.results.push_back(std::move(r));
  }

  std::sort(pooled.begin(), pooled.end());
  const std::size_t m = pooled.size();
  const double zeta =
      (m % 2 == 1) ? pooled[m / 2] : 0.5 * (pooled[m / 2 - 1] + pooled[m / 2]);

  std::size_t best = 0;
  long best_count = -1;
  for (std::size_t j = 0; j < dists.size(); ++j) {
    const long count = (dists[j].array() < zeta).count();
    if (count > best_count) {  // strict: ties keep the earliest gamma
      best_count = count;
      best = j;
    }
  }
  sel.best_index = best;
  sel.gamma_star = gammas[best];
  return sel;
}

Method parse_method(const std::string& name) {
  if (name == "ste") return Method::Ste;
  if (name == "tme") return Method::Tme;
  if (name == "fms") return Method::Fms;
  if (name == "sfms") return Method::Sfms;
  if (name == "ransac") return Method::Ransac;
  throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Ste: return "ste";
    case Method::Tme: return "tme";
    case Method::Fms: return "fms";
    case Method::Sfms: return "sfms";
    case Method::Ransac: return "ransac";
  }
  throw std::logic_error("method_name: unreachable");
}

}  // namespace rsr
