#pragma once

#include "rsr/estimators.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rsr::cli {

struct SynthHaystackArgs {
  int ambient_dim = 10;
  int subspace_dim = 3;
  int n_points = 400;
  double outlier_frac = 0.3;
  std::uint64_t seed = 0;
  std::string out;
};

struct SynthEpipolarArgs {
  int n_pairs = 400;
  double outlier_frac = 0.3;
  std::uint64_t seed = 0;
  std::string out;
  std::string pose_out;  // optional ground-truth pose JSON
};

struct BenchArgs {
  std::string kind = "haystack";  // or "epipolar"
  std::vector<std::string> methods = {"ste", "tme", "fms", "sfms", "ransac"};
  std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5};
  int seeds = 10;
  int ambient_dim = 27;
  int subspace_dim = 26;
  int n_points = 400;
  std::vector<double> gamma_grid;  // empty selects the default 5-point grid
  int max_iters = 100;
  double tol = 1e-10;
  double ransac_threshold = 0.05;
  int ransac_max_iters = 1000;
  std::uint64_t seed = 0;  // master seed
  std::string out;
  std::string format = "csv";  // or "json"
};

struct BenchRow {
  std::string method;
  double fraction = 0.0;
  int seed_index = 0;
  double metric = 0.0;  // principal angle (rad) for haystack, e_R (deg) for epipolar
  double wall_ms = 0.0;
  int iterations = 0;
};

struct FundamentalArgs {
  std::string in;
  std::string method = "ste";
  std::vector<double> gamma_grid;
  int max_iters = 200;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  std::string truth;  // optional pose JSON
  std::string out;
};

struct ScreenArgs {
  std::string in;
  std::string method = "ste";
  std::string completion = "zero";  // or "svt"
  double outlier_frac = 0.2;
  double gamma = 1.0 / 3.0;
  std::uint64_t seed = 0;
  std::string out;
};

void run_synth_haystack(const SynthHaystackArgs& args);
void run_synth_epipolar(const SynthEpipolarArgs& args);

std::vector<BenchRow> run_bench(const BenchArgs& args);
void write_bench(const std::string& path, const std::string& format,
                 const std::vector<BenchRow>& rows);

void run_fundamental(const FundamentalArgs& args);
void run_screen(const ScreenArgs& args);

// Parallelism cap: STE_RSR_THREADS when set, hardware concurrency otherwise.
int worker_count();

}  // namespace rsr::cli
