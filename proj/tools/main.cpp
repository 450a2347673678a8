#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Robust subspace recovery toolkit"};
  app.require_subcommand(1);

  // synth
  CLI::App* synth = app.add_subcommand("synth", "generate synthetic data");
  synth->require_subcommand(1);

  rsr::cli::SynthHaystackArgs hay;
  CLI::App* synth_hay = synth->add_subcommand("haystack", "haystack inlier/outlier scene");
  synth_hay->add_option("--D", hay.ambient_dim, "ambient dimension")->required();
  synth_hay->add_option("--d", hay.subspace_dim, "subspace dimension")->required();
  synth_hay->add_option("--N", hay.n_points, "total point count")->required();
  synth_hay->add_option("--outlier-frac", hay.outlier_frac, "outlier fraction");
  synth_hay->add_option("--seed", hay.seed, "RNG seed");
  synth_hay->add_option("--out", hay.out, "output scene JSON")->required();

  rsr::cli::SynthEpipolarArgs epi_args;
  CLI::App* synth_epi = synth->add_subcommand("epipolar", "two-view correspondences");
  synth_epi->add_option("--n", epi_args.n_pairs, "pair count")->required();
  synth_epi->add_option("--outlier-frac", epi_args.outlier_frac, "outlier fraction");
  synth_epi->add_option("--seed", epi_args.seed, "RNG seed");
  synth_epi->add_option("--out", epi_args.out, "output correspondence CSV")->required();
  synth_epi->add_option("--pose-out", epi_args.pose_out, "ground-truth pose JSON");

  // bench
  rsr::cli::BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "estimator comparison sweep");
  bench_cmd->add_option("--kind", bench.kind, "haystack or epipolar");
  bench_cmd->add_option("--methods,--method", bench.methods, "methods to run")->delimiter(',');
  bench_cmd->add_option("--fractions", bench.fractions, "outlier fractions")->delimiter(',');
  bench_cmd->add_option("--seeds", bench.seeds, "trials per (method, fraction)");
  bench_cmd->add_option("--D", bench.ambient_dim, "ambient dimension (haystack)");
  bench_cmd->add_option("--d", bench.subspace_dim, "subspace dimension (haystack)");
  bench_cmd->add_option("--N", bench.n_points, "points per trial");
  bench_cmd->add_option("--gamma-grid,--gamma", bench.gamma_grid, "STE gamma candidates")
      ->delimiter(',');
  bench_cmd->add_option("--max-iters", bench.max_iters, "iteration cap");
  bench_cmd->add_option("--tol", bench.tol, "stopping tolerance");
  bench_cmd->add_option("--seed", bench.seed, "master seed");
  bench_cmd->add_option("--out", bench.out, "output table path")->required();
  bench_cmd->add_option("--format", bench.format, "csv or json");

  // fundamental
  rsr::cli::FundamentalArgs fund;
  CLI::App* fund_cmd = app.add_subcommand("fundamental", "fundamental matrix from a CSV");
  fund_cmd->add_option("--in", fund.in, "correspondence CSV")->required();
  fund_cmd->add_option("--method", fund.method, "ste|tme|fms|sfms|ransac");
  fund_cmd->add_option("--gamma-grid", fund.gamma_grid, "STE gamma candidates")->delimiter(',');
  fund_cmd->add_option("--gamma", [&fund](const CLI::results_t& res) {
    fund.gamma_grid = {std::stod(res[0])};
    return true;
  }, "single STE gamma");
  fund_cmd->add_option("--max-iters", fund.max_iters, "iteration cap");
  fund_cmd->add_option("--tol", fund.tol, "stopping tolerance");
  fund_cmd->add_option("--seed", fund.seed, "RANSAC seed");
  fund_cmd->add_option("--truth", fund.truth, "ground-truth pose JSON");
  fund_cmd->add_option("--out", fund.out, "output report JSON")->required();

  // screen
  rsr::cli::ScreenArgs screen;
  CLI::App* screen_cmd = app.add_subcommand("screen", "n-view camera screening");
  screen_cmd->add_option("--in", screen.in, "n-view block JSON")->required();
  screen_cmd->add_option("--method", screen.method, "ste|tme|fms|sfms|ransac");
  screen_cmd->add_option("--completion", screen.completion, "zero or svt");
  screen_cmd->add_option("--outlier-frac", screen.outlier_frac, "flagged column fraction");
  screen_cmd->add_option("--gamma", screen.gamma, "STE gamma");
  screen_cmd->add_option("--seed", screen.seed, "RANSAC seed");
  screen_cmd->add_option("--out", screen.out, "output report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  try {
    if (synth_hay->parsed()) rsr::cli::run_synth_haystack(hay);
    if (synth_epi->parsed()) rsr::cli::run_synth_epipolar(epi_args);
    if (bench_cmd->parsed()) {
      rsr::cli::write_bench(bench.out, bench.format, rsr::cli::run_bench(bench));
    }
    if (fund_cmd->parsed()) rsr::cli::run_fundamental(fund);
    if (screen_cmd->parsed()) rsr::cli::run_screen(screen);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
