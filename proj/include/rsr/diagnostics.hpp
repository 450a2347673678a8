#pragma once

#include "rsr/core.hpp"
#include "rsr/synth.hpp"

#include <cstdint>

namespace rsr::diag {

// Theory statistics of a scene, all computable from data; the Assumption-3
// right-hand side is reported with C = 1 (the constant is not available), so
// callers compare ratios rather than pass/fail.
struct SceneStats {
  double ds_snr = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa_in = 0.0;
  double alignment_a = 0.0;    // ||sum_out x x^T / ||U_perp^T x||^2||_2
  double stability_s = 0.0;    // mean of the bottom D-d eigenvalues of sum x x^T / ||x||^2
  double assumption3_rhs_c1 = 0.0;
};

// Dimension-scaled SNR (n1/d) / (n0/(D-d)); +infinity for a pure-inlier scene.
double ds_snr(int n1, int n0, int d, int ambient_dim);

// Conditioning of an initial scatter against the planted subspace:
// sigma_d(Schur complement of the L*-block) / sigma_1(perp block). Returns
// +infinity when im(sigma0) equals the subspace exactly; throws when the perp
// block is singular otherwise.
double kappa1(const ScatterEstimate& sigma0, const Subspace& l_star);

double kappa2(const ScatterEstimate& sigma0, const Subspace& l_star);

// Populates every statistic; kappa_in runs TME on the inliers projected into
// subspace coordinates. gamma enters only the Assumption-3 right-hand side.
SceneStats scene_stats(const synth::SyntheticScene& scene, const ScatterEstimate& sigma0,
                       double gamma = 0.5);

// Randomized spot check of the inlier general-position assumption: samples
// k-subsets of inliers, spans them, and looks for a k-subspace holding more
// than n1*k/d points. Returns false when a violation is found. Heuristic only.
bool assumption1_spot_check(const synth::SyntheticScene& scene, int k, int trials,
                            std::uint64_t seed, double tol = 1e-9);

}  // namespace rsr::diag
