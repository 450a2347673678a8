#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>

namespace rsr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
// descending order. Eigenvector signs follow a fixed convention (the entry of
// largest magnitude is positive, ties broken by lowest index) so repeated runs
// are bit-identical.
struct Spectrum {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // column j pairs with eigenvalues[j]

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  Matrix reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
  }
};

// Symmetric EVD. Throws std::invalid_argument if the input is not square or
// deviates from symmetry by more than symmetry_tol (relative to the largest
// entry magnitude).
Spectrum sym_evd(const Matrix& m, double symmetry_tol = 1e-9);

// Centered D x N point cloud; columns are data points.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix points);

  const Matrix& entries() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  int num_points() const { return static_cast<int>(entries_.cols()); }

  // Sanity guard used by estimator entry points. A zero-mean sample of N
  // points has a column sum of order sqrt(N) times the typical column norm;
  // data whose sum is far above that scale was never centered.
  bool plausibly_centered() const;

 private:
  Matrix entries_;
};

struct CenterResult {
  DataMatrix data;
  Vector mean;
};

// Subtracts the column mean. Throws on an empty input. The result's columns
// sum to zero within 1e-9 times the largest column norm.
CenterResult center(const Matrix& raw);

// d-dimensional linear subspace of R^D held as a semi-orthogonal basis.
class Subspace {
 public:
  // Empty placeholder (dim 0); any validated instance comes from the
  // explicit constructor or from_span.
  Subspace() = default;

  explicit Subspace(Matrix basis);

  // Orthonormalizes the given spanning vectors (QR). Requires full column rank.
  static Subspace from_span(const Matrix& vectors);

  const Matrix& basis() const { return basis_; }
  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }

  Matrix projector() const { return basis_ * basis_.transpose(); }

  // Euclidean distance of each column of points to the subspace.
  Vector distances(const Matrix& points) const;

 private:
  Matrix basis_;
};

// Largest principal angle between two equi-dimensional subspaces, computed as
// acos of the smallest singular value of U_a^T U_b. Zero iff the subspaces are
// equal; invariant to the choice of orthonormal basis.
double principal_angle(const Subspace& a, const Subspace& b);

// Orthonormal basis of the orthogonal complement of span(basis); D x (D-d).
Matrix orthonormal_complement(const Matrix& basis);

// Symmetric positive semidefinite D x D shape matrix with unit trace and a
// cached spectrum.
class ScatterEstimate {
 public:
  // Symmetrizes, validates positive semidefiniteness, and normalizes the trace
  // to one.
  static ScatterEstimate from_matrix(const Matrix& sym);

  // Builds the matrix from a descending, nonnegative spectrum; eigenvalues are
  // rescaled to sum to one.
  static ScatterEstimate from_spectrum(Spectrum s);

  const Matrix& matrix() const { return matrix_; }
  const Spectrum& spectrum() const { return spectrum_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  // Span of the top d eigenvectors.
  Subspace top_subspace(int d) const;

 private:
  ScatterEstimate(Matrix m, Spectrum s) : matrix_(std::move(m)), spectrum_(std::move(s)) {}

  Matrix matrix_;
  Spectrum spectrum_;
};

}  // namespace rsr
