#pragma once

#include "rsr/estimators.hpp"

#include <iostream>
#include <limits>

namespace rsr::detail {

struct PreparedData {
  Matrix x;
  int dropped = 0;
};

// Validates the centering guard and drops exactly-zero columns (they carry no
// subspace information and turn the Mahalanobis forms into 0/0).
inline PreparedData prepare_centered(const DataMatrix& input, const char* who,
                                     bool check_centering = true) {
  if (check_centering && !input.plausibly_centered()) {
    throw std::invalid_argument(std::string(who) + ": input data is not centered");
  }
  const Matrix& raw = input.entries();
  int zeros = 0;
  for (int j = 0; j < raw.cols(); ++j) {
    if (raw.col(j).norm() == 0.0) ++zeros;
  }
  if (zeros == 0) return PreparedData{raw, 0};

  std::cerr << who << ": dropping " << zeros << " zero column(s)\n";
  Matrix kept(raw.rows(), raw.cols() - zeros);
  int k = 0;
  for (int j = 0; j < raw.cols(); ++j) {
    if (raw.col(j).norm() != 0.0) kept.col(k++) = raw.col(j);
  }
  return PreparedData{std::move(kept), zeros};
}

// a * a^T through a symmetric rank update.
inline Matrix gram_outer(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  Matrix z = Matrix::Zero(n, n);
  z.selfadjointView<Eigen::Lower>().rankUpdate(a);
  return z.selfadjointView<Eigen::Lower>();
}

// Quadratic forms through an STE-structured scatter: top-d eigenpairs
// (basis, top_vals) plus a shared bottom eigenvalue beta on the complement.
//
// The off-subspace residual ||x||^2 - ||U^T x||^2 of a point lying on the
// subspace is pure cancellation noise of order eps * ||x||^2. Once the shared
// bottom eigenvalue collapses (exact-recovery regime), dividing that noise by
// beta would feed O(1) random weights back into the iteration, so residuals
// below the resolution floor count as zero.
inline Vector structured_quadforms(const Matrix& basis, const Vector& top_vals, double beta,
                                   const Matrix& x, double floor_value) {
  constexpr double kResidFloor = 64.0 * std::numeric_limits<double>::epsilon();
  const Matrix proj = basis.transpose() * x;  // d x N
  const int n = static_cast<int>(x.cols());
  Vector q(n);
  for (int i = 0; i < n; ++i) {
    double inside = 0.0;
    double energy = 0.0;
    for (int j = 0; j < top_vals.size(); ++j) {
      const double c2 = proj(j, i) * proj(j, i);
      energy += c2;
      if (top_vals[j] > 0.0) inside += c2 / top_vals[j];
    }
    const double norm_sq = x.col(i).squaredNorm();
    double resid = norm_sq - energy;
    if (resid < kResidFloor * norm_sq) resid = 0.0;
    double value = inside;
    if (resid > 0.0) value += (beta > 0.0) ? resid / beta : std::numeric_limits<double>::infinity();
    q[i] = std::max(value, floor_value);
  }
  return q;
}

}  // namespace rsr::detail
