#pragma once

#include "rsr/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rsr {

// Shared output of the subspace estimators.
//
// step_norms holds one entry per iteration: the Frobenius step
// ||Sigma^(k) - Sigma^(k-1)|| for the scatter-based methods, the subspace
// angle change for FMS, and the best consensus fraction for RANSAC. angles
// holds the per-iteration principal angle to the ground-truth subspace when
// one was supplied, else stays empty.
struct EstimatorResult {
  Subspace subspace;
  std::optional<ScatterEstimate> scatter;  // absent for RANSAC and FMS
  int iterations = 0;
  std::vector<double> step_norms;
  std::vector<double> angles;
  bool converged = false;
  int dropped_columns = 0;
};

enum class SteInit { ScaledIdentity, Tme, Given };

// Choice of eigensolver inside the iteration. TopD tracks only the leading d
// eigenpairs by warm-started subspace iteration, which keeps the per-iteration
// cost at O(NDd); Auto switches to it for large ambient dimensions.
enum class SteEigEngine { Auto, Dense, TopD };

struct SteConfig {
  int d = 1;
  double gamma = 0.5;            // shrinkage in (0, 1]
  int max_iters = 200;
  double tol = 1e-10;            // Frobenius stopping threshold
  double mahalanobis_floor = 1e-15;
  SteInit init = SteInit::ScaledIdentity;
  std::optional<ScatterEstimate> init_scatter;  // used when init == Given
  SteEigEngine engine = SteEigEngine::Auto;
  bool compute_scatter = true;   // skip the final dense reconstruction (timing runs)
  // The scatter iteration models data whose population mean is the origin.
  // Kernel-lifted correspondences carry their structure through the origin by
  // construction and legitimately fail a sample-mean test, so callers that
  // know better may disable the guard.
  bool check_centering = true;
};

// Subspace-constrained Tyler's estimator. Each iteration forms the weighted
// covariance Z = sum_i x_i x_i^T / max(x_i^T Sigma^-1 x_i, floor), averages
// the bottom D-d eigenvalues of Z, shrinks them by gamma, and renormalizes to
// unit trace. Requires centered input; exactly-zero columns are dropped with
// a warning.
EstimatorResult ste(const DataMatrix& x, const SteConfig& cfg, const Subspace* truth = nullptr);

// The STE formal weights w_i = 1 / (sum_{j<=d} sigma_j^-1 (x_i.u_j)^2
// + beta^-1 (x_i.(I - UU^T)x_i)), beta = gamma * mean of the bottom D-d
// eigenvalues. scatter must have the STE structure (equal bottom eigenvalues).
// The trace-normalized, shrunk weighted covariance sum_i w_i x_i x_i^T equals
// the next ste() iterate.
Vector ste_weights(const ScatterEstimate& scatter, const DataMatrix& x, int d, double gamma,
                   double mahalanobis_floor = 1e-15);

struct GammaSelection {
  double gamma_star = 0.0;
  std::size_t best_index = 0;
  std::vector<double> gammas;
  std::vector<EstimatorResult> results;  // one per gamma, same order
};

// Runs STE once per candidate gamma, pools all point-to-subspace distances,
// thresholds at their median, and returns the gamma whose subspace claims the
// most points below the threshold. Ties go to the earliest gamma in the list.
GammaSelection tune_gamma(const DataMatrix& x, int d, const std::vector<double>& gammas,
                          const SteConfig& base = SteConfig{}, const Subspace* truth = nullptr);

struct TmeConfig {
  int d = 1;  // dimension of the reported top-eigenvector subspace
  int max_iters = 500;
  double tol = 1e-11;
  double mahalanobis_floor = 1e-15;
  bool check_centering = true;
};

// Tyler's M-estimator: fixed-point iteration of the trace-normalized weighted
// covariance with weights 1 / (x^T Sigma^-1 x). Returns the full scatter; the
// requested top-d eigenvector subspace; step_norms carry the fixed-point
// residuals. If the residual fails to improve for 50 consecutive iterations
// the best iterate is returned flagged non-converged.
EstimatorResult tme(const DataMatrix& x, const TmeConfig& cfg, const Subspace* truth = nullptr);
EstimatorResult tme(const DataMatrix& x, int d, int max_iters = 500, double tol = 1e-11,
                    const Subspace* truth = nullptr);

struct FmsConfig {
  int d = 1;
  double p = 1.0;        // l_p energy exponent, 0 <= p < 2
  double delta = 1e-10;  // residual regularizer
  bool spherical = false;
  int max_iters = 100;
  double tol = 1e-10;    // stop when the subspace angle change drops below
  bool check_centering = true;
};

// Fast median subspace IRLS: starting from the PCA subspace, reweights by
// max(dist^2, delta)^-(2-p)/2 and takes the top-d eigenvectors of the
// weighted covariance. spherical = true first scales every column to unit
// norm (SFMS).
EstimatorResult fms(const DataMatrix& x, const FmsConfig& cfg, const Subspace* truth = nullptr);

struct RansacConfig {
  int d = 1;
  double inlier_threshold = 0.05;
  int max_iters = 1000;
  double confidence = 0.99;
  std::uint64_t seed = 0;
  bool check_centering = true;
};

// Consensus-maximal subspace over random d-column samples. The iteration
// budget adapts as ceil(log(1-confidence) / log(1 - eps^d)) for the current
// best inlier ratio eps, capped at max_iters; degenerate samples are redrawn
// and counted. The winner is refit by SVD on its consensus set.
EstimatorResult ransac_subspace(const DataMatrix& x, const RansacConfig& cfg,
                                const Subspace* truth = nullptr);

// Mahalanobis quadratic forms x_i^T Sigma^-1 x_i evaluated through the
// spectrum (nonpositive eigenvalues are skipped, the result is floored).
Vector mahalanobis_quadforms(const Spectrum& s, const Matrix& x, double floor_value);

// Names accepted anywhere a method can be selected.
enum class Method { Ste, Tme, Fms, Sfms, Ransac };
Method parse_method(const std::string& name);
std::string method_name(Method m);

}  // namespace rsr
