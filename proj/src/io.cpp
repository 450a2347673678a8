#include "rsr/io.hpp"

#include <json.hpp>

#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rsr::io {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

json matrix3_to_json(const Eigen::Matrix3d& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));  // row-major
  }
  return out;
}

Eigen::Matrix3d matrix3_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 9) {
    throw std::runtime_error(std::string("expected 9-element array for ") + what);
  }
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = j[3 * r + c].get<double>();
  }
  return m;
}

}  // namespace

void write_correspondences(const std::string& path, const epi::CorrespondenceSet& corr) {
  std::ofstream out = open_out(path);
  out << std::setprecision(17);
  const bool with_mask = !corr.inlier_mask.empty();
  out << (with_mask ? "x1,y1,x2,y2,is_inlier\n" : "x1,y1,x2,y2\n");
  for (int j = 0; j < corr.size(); ++j) {
    out << corr.pts_a(0, j) << ',' << corr.pts_a(1, j) << ',' << corr.pts_b(0, j) << ','
        << corr.pts_b(1, j);
    if (with_mask) out << ',' << static_cast<int>(corr.inlier_mask[j]);
    out << '\n';
  }
}

epi::CorrespondenceSet read_correspondences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty correspondence file: " + path);
  bool with_mask;
  if (header == "x1,y1,x2,y2,is_inlier") {
    with_mask = true;
  } else if (header == "x1,y1,x2,y2") {
    with_mask = false;
  } else {
    throw std::runtime_error("bad correspondence header in " + path + ": " + header);
  }

  std::vector<std::array<double, 4>> rows;
  std::vector<char> mask;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::array<double, 4> row{};
    char comma;
    for (int k = 0; k < 4; ++k) {
      if (!(ss >> row[k])) {
        throw std::runtime_error("parse error in " + path + " line " + std::to_string(line_no));
      }
      if (k < 3 && !(ss >> comma && comma == ',')) {
        throw std::runtime_error("parse error in " + path + " line " + std::to_string(line_no));
      }
    }
    if (with_mask) {
      int flag;
      if (!(ss >> comma && comma == ',' && ss >> flag)) {
        throw std::runtime_error("parse error in " + path + " line " + std::to_string(line_no));
      }
      mask.push_back(flag != 0);
    }
    rows.push_back(row);
  }

  epi::CorrespondenceSet corr;
  corr.pts_a.resize(3, rows.size());
  corr.pts_b.resize(3, rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    corr.pts_a.col(j) << rows[j][0], rows[j][1], 1.0;
    corr.pts_b.col(j) << rows[j][2], rows[j][3], 1.0;
  }
  corr.inlier_mask = std::move(mask);
  return corr;
}

void write_pose(const std::string& path, const epi::PoseTruth& pose) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["R"] = matrix3_to_json(pose.rotation);
  j["t"] = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
  open_out(path) << j.dump(2) << '\n';
}

epi::PoseTruth read_pose(const std::string& path) {
  const json j = load_json(path);
  epi::PoseTruth pose;
  pose.rotation = matrix3_from_json(j.at("R"), "R");
  const auto& t = j.at("t");
  if (!t.is_array() || t.size() != 3) throw std::runtime_error("expected 3-element t in " + path);
  pose.translation = epi::Vector3d(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
  return pose;
}

void write_scene(const std::string& path, const synth::SyntheticScene& scene) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["D"] = scene.data.dim();
  j["d"] = scene.truth.dim();
  j["N"] = scene.data.num_points();
  json basis = json::array();
  for (int c = 0; c < scene.truth.dim(); ++c) {
    for (int r = 0; r < scene.truth.ambient_dim(); ++r) {
      basis.push_back(scene.truth.basis()(r, c));  // column-major
    }
  }
  j["truth_basis"] = std::move(basis);
  json pts = json::array();
  for (int col = 0; col < scene.data.num_points(); ++col) {
    json p = json::array();
    for (int r = 0; r < scene.data.dim(); ++r) p.push_back(scene.data.entries()(r, col));
    pts.push_back(std::move(p));
  }
  j["points"] = std::move(pts);
  json mask = json::array();
  for (char m : scene.inlier_mask) mask.push_back(static_cast<int>(m));
  j["inlier_mask"] = std::move(mask);
  open_out(path) << j.dump() << '\n';
}

synth::SyntheticScene read_scene(const std::string& path) {
  const json j = load_json(path);
  const int ambient = j.at("D").get<int>();
  const int d = j.at("d").get<int>();
  const int n = j.at("N").get<int>();

  Matrix basis(ambient, d);
  const auto& jb = j.at("truth_basis");
  if (static_cast<int>(jb.size()) != ambient * d) {
    throw std::runtime_error("bad truth_basis size in " + path);
  }
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < ambient; ++r) basis(r, c) = jb[c * ambient + r].get<double>();
  }

  Matrix pts(ambient, n);
  const auto& jpts = j.at("points");
  if (static_cast<int>(jpts.size()) != n) throw std::runtime_error("bad point count in " + path);
  for (int col = 0; col < n; ++col) {
    for (int r = 0; r < ambient; ++r) pts(r, col) = jpts[col][r].get<double>();
  }

  std::vector<char> mask;
  for (const auto& m : j.at("inlier_mask")) mask.push_back(m.get<int>() != 0);

  return synth::SyntheticScene{DataMatrix(std::move(pts)), Subspace(std::move(basis)),
                               std::move(mask)};
}

void write_nview(const std::string& path, const nview::NViewEssential& e) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = e.n;
  json blocks = json::array();
  for (int i = 0; i < e.n; ++i) {
    for (int k = i + 1; k < e.n; ++k) {
      if (!e.is_observed(i, k)) continue;
      json b;
      b["i"] = i;
      b["j"] = k;
      // The stored block already carries its scale; emit lambda = 1 so a
      // round trip reassembles identically.
      b["E"] = matrix3_to_json(e.entries.block<3, 3>(3 * i, 3 * k));
      b["lambda"] = 1.0;
      blocks.push_back(std::move(b));
    }
  }
  j["blocks"] = std::move(blocks);
  open_out(path) << j.dump() << '\n';
}

nview::NViewEssential read_nview(const std::string& path) {
  const json j = load_json(path);
  const int n = j.at("n").get<int>();
  std::vector<nview::BlockObservation> blocks;
  for (const auto& jb : j.at("blocks")) {
    nview::BlockObservation b;
    b.i = jb.at("i").get<int>();
    b.j = jb.at("j").get<int>();
    b.e = matrix3_from_json(jb.at("E"), "E");
    b.lambda = jb.value("lambda", 1.0);
    blocks.push_back(std::move(b));
  }
  return nview::assemble(blocks, n);
}

void write_screening_report(const std::string& path, const nview::ScreeningReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["column_distances"] = std::vector<double>(
      report.column_distances.data(),
      report.column_distances.data() + report.column_distances.size());
  j["sorted_distances"] = report.sorted_distances();
  j["flagged_columns"] = report.flagged_columns;
  j["removed_cameras"] = report.removed_cameras;
  j["flagged_unflagged_ratio"] = report.flagged_unflagged_ratio;
  open_out(path) << j.dump(2) << '\n';
}

void write_fundamental_report(const std::string& path, const FundamentalReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["method"] = method_name(report.estimate.method);
  j["F"] = matrix3_to_json(report.estimate.f);
  j["det"] = report.det;
  j["frobenius_norm"] = report.estimate.f.norm();
  j["inlier_count"] = report.inlier_count;
  j["max_inlier_residual"] = report.estimate.max_inlier_residual;
  if (report.has_truth) {
    j["e_R"] = report.rotation_error_deg;
    j["e_T"] = report.direction_error_deg;
    j["mAA"] = report.maa_10;
  }
  open_out(path) << j.dump(2) << '\n';
}

}  // namespace rsr::io
