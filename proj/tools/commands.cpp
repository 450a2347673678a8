#include "commands.hpp"

#include "rsr/diagnostics.hpp"
#include "rsr/io.hpp"
#include "rsr/rng.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <thread>

namespace rsr::cli {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<double> default_gamma_grid() {
  return {0.5, 0.25, 1.0 / 6.0, 0.125, 0.1};
}

// Runs fn(0..count-1) on up to worker_count() threads; output slots are
// preassigned so parallel and serial runs produce identical tables.
void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct HaystackTrial {
  double metric = 0.0;
  double wall_ms = 0.0;
  int iterations = 0;
};

HaystackTrial run_haystack_trial(const BenchArgs& args, Method method, double fraction,
                                 std::uint64_t scene_seed, std::uint64_t method_seed) {
  synth::HaystackConfig cfg;
  cfg.ambient_dim = args.ambient_dim;
  cfg.subspace_dim = args.subspace_dim;
  const int n_out = static_cast<int>(std::lround(fraction * args.n_points));
  cfg.n_out = n_out;
  cfg.n_in = args.n_points - n_out;
  cfg.seed = scene_seed;
  const synth::SyntheticScene scene = synth::gen_haystack(cfg);

  const std::vector<double> grid =
      args.gamma_grid.empty() ? default_gamma_grid() : args.gamma_grid;

  HaystackTrial out;
  const auto t0 = Clock::now();
  Subspace estimate = [&]() -> Subspace {
    switch (method) {
      case Method::Ste: {
        SteConfig cfg_ste;
        cfg_ste.d = args.subspace_dim;
        cfg_ste.max_iters = args.max_iters;
        cfg_ste.tol = args.tol;
        const GammaSelection sel =
            tune_gamma(scene.data, args.subspace_dim, grid, cfg_ste);
        for (const EstimatorResult& r : sel.results) out.iterations += r.iterations;
        return sel.results[sel.best_index].subspace;
      }
      case Method::Tme: {
        TmeConfig cfg_tme;
        cfg_tme.d = args.subspace_dim;
        cfg_tme.max_iters = args.max_iters;
        cfg_tme.tol = args.tol;
        EstimatorResult r = tme(scene.data, cfg_tme);
        out.iterations = r.iterations;
        return r.subspace;
      }
      case Method::Fms:
      case Method::Sfms: {
        FmsConfig cfg_fms;
        cfg_fms.d = args.subspace_dim;
        cfg_fms.spherical = method == Method::Sfms;
        cfg_fms.max_iters = args.max_iters;
        cfg_fms.tol = args.tol;
        EstimatorResult r = fms(scene.data, cfg_fms);
        out.iterations = r.iterations;
        return r.subspace;
      }
      case Method::Ransac: {
        RansacConfig cfg_r;
        cfg_r.d = args.subspace_dim;
        cfg_r.inlier_threshold = args.ransac_threshold;
        cfg_r.max_iters = args.ransac_max_iters;
        cfg_r.seed = method_seed;
        EstimatorResult r = ransac_subspace(scene.data, cfg_r);
        out.iterations = r.iterations;
        return r.subspace;
      }
    }
    throw std::logic_error("unreachable");
  }();
  out.wall_ms = ms_since(t0);
  out.metric = principal_angle(estimate, scene.truth);
  return out;
}

HaystackTrial run_epipolar_trial(const BenchArgs& args, Method method, double fraction,
                                 std::uint64_t scene_seed, std::uint64_t method_seed) {
  const epi::CorrespondenceSet corr = synth::gen_epipolar(args.n_points, fraction, scene_seed);

  epi::EstimateFOptions opts;
  opts.method = method;
  if (!args.gamma_grid.empty()) opts.gamma_grid = args.gamma_grid;
  opts.max_iters = args.max_iters;
  opts.tol = args.tol;
  opts.ransac_max_iters = args.ransac_max_iters;
  opts.seed = method_seed;

  HaystackTrial out;
  const auto t0 = Clock::now();
  try {
    const epi::FundamentalEstimate f = estimate_f(corr, opts);
    out.wall_ms = ms_since(t0);
    const epi::Matrix3d k = synth::synthetic_calibration();
    const epi::PoseEstimate pose = epi::decompose_pose(f, corr, k, k);
    out.metric = epi::rotation_error(pose.rotation, corr.truth->rotation);
  } catch (const std::exception&) {
    out.wall_ms = ms_since(t0);
    out.metric = 180.0;  // failed estimate scores as maximal error
  }
  return out;
}

}  // namespace

int worker_count() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("STE_RSR_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) return static_cast<int>(std::min<long>(cap, hw));
  }
  return static_cast<int>(hw);
}

void run_synth_haystack(const SynthHaystackArgs& args) {
  synth::HaystackConfig cfg;
  cfg.ambient_dim = args.ambient_dim;
  cfg.subspace_dim = args.subspace_dim;
  const int n_out = static_cast<int>(std::lround(args.outlier_frac * args.n_points));
  cfg.n_out = n_out;
  cfg.n_in = args.n_points - n_out;
  cfg.seed = args.seed;
  io::write_scene(args.out, synth::gen_haystack(cfg));
}

void run_synth_epipolar(const SynthEpipolarArgs& args) {
  const epi::CorrespondenceSet corr =
      synth::gen_epipolar(args.n_pairs, args.outlier_frac, args.seed);
  io::write_correspondences(args.out, corr);
  if (!args.pose_out.empty()) io::write_pose(args.pose_out, *corr.truth);
}

std::vector<BenchRow> run_bench(const BenchArgs& args) {
  if (args.kind != "haystack" && args.kind != "epipolar") {
    throw std::invalid_argument("bench: kind must be haystack or epipolar");
  }
  std::vector<Method> methods;
  for (const std::string& name : args.methods) methods.push_back(parse_method(name));
  if (methods.empty()) throw std::invalid_argument("bench: no methods selected");
  if (args.fractions.empty()) throw std::invalid_argument("bench: no fractions given");
  if (args.seeds < 1) throw std::invalid_argument("bench: seeds must be >= 1");

  struct Trial {
    int method_index;
    int fraction_index;
    int seed_index;
  };
  std::vector<Trial> trials;
  for (std::size_t fi = 0; fi < args.fractions.size(); ++fi) {
    for (int si = 0; si < args.seeds; ++si) {
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        trials.push_back({static_cast<int>(mi), static_cast<int>(fi), si});
      }
    }
  }

  std::vector<BenchRow> rows(trials.size());
  parallel_for(static_cast<int>(trials.size()), [&](int t) {
    const Trial& trial = trials[t];
    const double fraction = args.fractions[trial.fraction_index];
    const Method method = methods[trial.method_index];
    const std::uint64_t scene_seed =
        Rng::derive(args.seed, trial.fraction_index, trial.seed_index);
    const std::uint64_t method_seed =
        Rng::derive(args.seed ^ 0x5157ull, trial.fraction_index * 1000 + trial.seed_index,
                    trial.method_index);

    const HaystackTrial r = args.kind == "haystack"
                                ? run_haystack_trial(args, method, fraction, scene_seed,
                                                     method_seed)
                                : run_epipolar_trial(args, method, fraction, scene_seed,
                                                     method_seed);
    rows[t] = BenchRow{method_name(method), fraction, trial.seed_index, r.metric, r.wall_ms,
                       r.iterations};
  });
  return rows;
}

void write_bench(const std::string& path, const std::string& format,
                 const std::vector<BenchRow>& rows) {
  if (format == "csv") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << std::setprecision(17);
    out << "method,fraction,seed,metric,wall_ms,iterations\n";
    for (const BenchRow& r : rows) {
      out << r.method << ',' << r.fraction << ',' << r.seed_index << ',' << r.metric << ','
          << r.wall_ms << ',' << r.iterations << '\n';
    }
  } else if (format == "json") {
    nlohmann::json j;
    j["schema_version"] = io::kSchemaVersion;
    nlohmann::json arr = nlohmann::json::array();
    for (const BenchRow& r : rows) {
      arr.push_back({{"method", r.method},
                     {"fraction", r.fraction},
                     {"seed", r.seed_index},
                     {"metric", r.metric},
                     {"wall_ms", r.wall_ms},
                     {"iterations", r.iterations}});
    }
    j["rows"] = std::move(arr);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
  } else {
    throw std::invalid_argument("bench: format must be csv or json");
  }
}

void run_fundamental(const FundamentalArgs& args) {
  epi::CorrespondenceSet corr = io::read_correspondences(args.in);

  epi::EstimateFOptions opts;
  opts.method = parse_method(args.method);
  if (!args.gamma_grid.empty()) opts.gamma_grid = args.gamma_grid;
  opts.max_iters = args.max_iters;
  opts.tol = args.tol;
  opts.seed = args.seed;

  io::FundamentalReport report;
  report.estimate = estimate_f(corr, opts);
  report.det = report.estimate.f.determinant();
  for (char m : report.estimate.inlier_mask) report.inlier_count += (m != 0);

  if (!args.truth.empty()) {
    const epi::PoseTruth truth = io::read_pose(args.truth);
    corr.truth = truth;
    const epi::Matrix3d k = synth::synthetic_calibration();
    const epi::PoseEstimate pose = epi::decompose_pose(report.estimate, corr, k, k);
    report.has_truth = true;
    report.rotation_error_deg = epi::rotation_error(pose.rotation, truth.rotation);
    // Single-pair direction error: no gauge alignment to fit, compare directly.
    const double c = std::abs(truth.translation.normalized().dot(pose.translation.normalized()));
    report.direction_error_deg = std::acos(std::clamp(c, 0.0, 1.0)) * 180.0 / 3.14159265358979323846;
    report.maa_10 = epi::maa({report.rotation_error_deg});
  }
  io::write_fundamental_report(args.out, report);
}

void run_screen(const ScreenArgs& args) {
  const nview::NViewEssential e = io::read_nview(args.in);

  nview::ScreenOptions opts;
  opts.method = parse_method(args.method);
  opts.outlier_frac = args.outlier_frac;
  opts.ste_gamma = args.gamma;
  opts.seed = args.seed;
  if (args.completion == "zero") {
    opts.completion = nview::Completion::ZeroFill;
  } else if (args.completion == "svt") {
    opts.completion = nview::Completion::Svt;
  } else {
    throw std::invalid_argument("screen: completion must be zero or svt");
  }

  io::write_screening_report(args.out, nview::screen(e, opts));
}

}  // namespace rsr::cli
