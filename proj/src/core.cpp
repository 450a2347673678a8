#include "rsr/core.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace rsr {

namespace {

// Largest-magnitude entry made positive; ties resolved to the lowest index.
void fix_sign(Eigen::Ref<Vector> v) {
  int best = 0;
  double best_abs = std::abs(v[0]);
  for (int i = 1; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (v[best] < 0.0) v = -v;
}

}  // namespace

Spectrum sym_evd(const Matrix& m, double symmetry_tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument("sym_evd: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale) {
    throw std::invalid_argument("sym_evd: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sym_evd: eigendecomposition failed");
  }

  const int n = static_cast<int>(m.rows());
  Spectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  // Eigen returns ascending order; flip to descending.
  for (int j = 0; j < n; ++j) {
    out.eigenvalues[j] = solver.eigenvalues()[n - 1 - j];
    out.eigenvectors.col(j) = solver.eigenvectors().col(n - 1 - j);
    fix_sign(out.eigenvectors.col(j));
  }
  return out;
}

DataMatrix::DataMatrix(Matrix points) : entries_(std::move(points)) {
  if (entries_.cols() < 1) throw std::invalid_argument("DataMatrix: need at least one point");
  if (entries_.rows() < 2) throw std::invalid_argument("DataMatrix: ambient dimension must be >= 2");
}

bool DataMatrix::plausibly_centered() const {
  const double sum_norm = entries_.rowwise().sum().norm();
  double max_col = 0.0;
  for (int j = 0; j < entries_.cols(); ++j) max_col = std::max(max_col, entries_.col(j).norm());
  const double slack = 2.0 * std::sqrt(static_cast<double>(entries_.cols())) * max_col;
  return sum_norm <= slack + 1e-12;
}

CenterResult center(const Matrix& raw) {
  if (raw.size() == 0) throw std::invalid_argument("center: empty dataset");
  const Vector mean = raw.rowwise().mean();
  Matrix shifted = raw.colwise() - mean;
  return CenterResult{DataMatrix(std::move(shifted)), mean};
}

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  const int d = static_cast<int>(basis_.cols());
  const int D = static_cast<int>(basis_.rows());
  if (d < 1 || d > D - 1) {
    throw std::invalid_argument("Subspace: dimension must satisfy 1 <= d <= D-1");
  }
  const Matrix gram = basis_.transpose() * basis_;
  if ((gram - Matrix::Identity(d, d)).norm() > 1e-10) {
    throw std::invalid_argument("Subspace: basis is not semi-orthogonal");
  }
}

Subspace Subspace::from_span(const Matrix& vectors) {
  const int d = static_cast<int>(vectors.cols());
  Eigen::HouseholderQR<Matrix> qr(vectors);
  Matrix q = qr.householderQ() * Matrix::Identity(vectors.rows(), d);
  // Deterministic orientation: align each basis vector with a positive
  // R-diagonal, then apply the shared sign convention.
  const Matrix r = qr.matrixQR().topRows(d).template triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    if (std::abs(r(j, j)) < 1e-12 * std::max(1.0, vectors.col(j).norm())) {
      throw std::invalid_argument("Subspace::from_span: vectors are not linearly independent");
    }
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return Subspace(std::move(q));
}

Vector Subspace::distances(const Matrix& points) const {
  // Residual-vector form: the norm-difference shortcut cannot resolve
  // distances below sqrt(eps) times the point norm.
  const Matrix residual = points - basis_ * (basis_.transpose() * points);
  Vector out(points.cols());
  for (int j = 0; j < points.cols(); ++j) out[j] = residual.col(j).norm();
  return out;
}

double principal_angle(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim() || a.ambient_dim() != b.ambient_dim()) {
    throw std::invalid_argument("principal_angle: subspace dimensions do not match");
  }
  // Largest principal angle: cos = sigma_min(Ua^T Ub), sin = sigma_max of the
  // residual (I - Ua Ua^T) Ub. acos loses half the digits near zero, so small
  // angles go through the sine route.
  const Matrix overlap = a.basis().transpose() * b.basis();
  Eigen::JacobiSVD<Matrix> svd(overlap);
  const double cos_angle = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  if (cos_angle < 0.7) return std::acos(cos_angle);

  const Matrix resid = b.basis() - a.basis() * overlap;
  Eigen::JacobiSVD<Matrix> svd_resid(resid);
  const double sin_angle = std::clamp(svd_resid.singularValues().maxCoeff(), 0.0, 1.0);
  return std::asin(sin_angle);
}

Matrix orthonormal_complement(const Matrix& basis) {
  const int D = static_cast<int>(basis.rows());
  const int d = static_cast<int>(basis.cols());
  if (d >= D) throw std::invalid_argument("orthonormal_complement: basis already spans the space");
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix q = qr.householderQ() * Matrix::Identity(D, D);
  return q.rightCols(D - d);
}

ScatterEstimate ScatterEstimate::from_matrix(const Matrix& sym) {
  if (sym.rows() != sym.cols() || sym.rows() == 0) {
    throw std::invalid_argument("ScatterEstimate: matrix must be square");
  }
  Matrix m = 0.5 * (sym + sym.transpose());
  const double trace = m.trace();
  if (!(trace > 0.0)) throw std::invalid_argument("ScatterEstimate: trace must be positive");
  m /= trace;
  Spectrum s = sym_evd(m);
  const double floor_tol = -1e-10 * std::max(1.0, s.eigenvalues[0]);
  for (int j = 0; j < s.dim(); ++j) {
    if (s.eigenvalues[j] < floor_tol) {
      throw std::invalid_argument("ScatterEstimate: matrix is not positive semidefinite");
    }
    s.eigenvalues[j] = std::max(s.eigenvalues[j], 0.0);
  }
  return ScatterEstimate(std::move(m), std::move(s));
}

ScatterEstimate ScatterEstimate::from_spectrum(Spectrum s) {
  if (s.eigenvalues.size() == 0 || s.eigenvalues.size() != s.eigenvectors.cols() ||
      s.eigenvectors.rows() != s.eigenvectors.cols()) {
    throw std::invalid_argument("ScatterEstimate: malformed spectrum");
  }
  for (int j = 0; j < s.dim(); ++j) {
    if (s.eigenvalues[j] < 0.0) {
      throw std::invalid_argument("ScatterEstimate: eigenvalues must be nonnegative");
    }
    if (j > 0 && s.eigenvalues[j] > s.eigenvalues[j - 1]) {
      throw std::invalid_argument("ScatterEstimate: eigenvalues must be descending");
    }
  }
  const double total = s.eigenvalues.sum();
  if (!(total > 0.0)) throw std::invalid_argument("ScatterEstimate: spectrum sums to zero");
  s.eigenvalues /= total;
  Matrix m = s.reconstruct();
  m = 0.5 * (m + m.transpose());
  return ScatterEstimate(std::move(m), std::move(s));
}

Subspace ScatterEstimate::top_subspace(int d) const {
  if (d < 1 || d >= dim()) throw std::invalid_argument("top_subspace: invalid dimension");
  return Subspace(spectrum_.eigenvectors.leftCols(d));
}

}  // namespace rsr
