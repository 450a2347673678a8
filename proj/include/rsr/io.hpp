#pragma once

#include "rsr/epipolar.hpp"
#include "rsr/nview.hpp"
#include "rsr/synth.hpp"

#include <string>

namespace rsr::io {

inline constexpr int kSchemaVersion = 1;

// Correspondence CSV: header "x1,y1,x2,y2[,is_inlier]", one row per pair,
// full-precision doubles.
void write_correspondences(const std::string& path, const epi::CorrespondenceSet& corr);
epi::CorrespondenceSet read_correspondences(const std::string& path);

// Pose ground truth JSON: {"R": [9 floats row-major], "t": [3 floats]}.
void write_pose(const std::string& path, const epi::PoseTruth& pose);
epi::PoseTruth read_pose(const std::string& path);

// Haystack scene JSON (schema_version, dims, seed-free payload).
void write_scene(const std::string& path, const synth::SyntheticScene& scene);
synth::SyntheticScene read_scene(const std::string& path);

// n-view block list JSON: {"n": int, "blocks": [{"i", "j", "E" (9 row-major),
// "lambda"}]}.
void write_nview(const std::string& path, const nview::NViewEssential& e);
nview::NViewEssential read_nview(const std::string& path);

void write_screening_report(const std::string& path, const nview::ScreeningReport& report);

struct FundamentalReport {
  epi::FundamentalEstimate estimate;
  double det = 0.0;
  int inlier_count = 0;
  // Present when the input carried ground truth.
  bool has_truth = false;
  double rotation_error_deg = 0.0;
  double direction_error_deg = 0.0;
  double maa_10 = 0.0;
};

void write_fundamental_report(const std::string& path, const FundamentalReport& report);

}  // namespace rsr::io
