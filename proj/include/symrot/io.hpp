// Copyright 2026 The symrot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "symrot/bingham2d.hpp"
#include "symrot/fitting.hpp"
#include "symrot/symrep.hpp"
#include "symrot/toyfield.hpp"

namespace symrot {

using nlohmann::json;

namespace io_detail {

template <int N>
Eigen::Matrix<double, N, 1> read_vector(const json& j, const std::string& field) {
  if (!j.contains(field)) {
    throw std::invalid_argument("JSON: missing field '" + field + "'");
  }
  const json& arr = j.at(field);
  if (!arr.is_array() || arr.size() != N) {
    throw std::invalid_argument("JSON: field '" + field + "' must be an array of " +
                                std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    if (!arr[i].is_number()) {
      throw std::invalid_argument("JSON: field '" + field + "' must contain only numbers");
    }
    out[i] = arr[i].get<double>();
    if (!std::isfinite(out[i])) {
      throw std::invalid_argument("JSON: field '" + field + "' contains a non-finite value");
    }
  }
  return out;
}

inline json vector_to_array(const double* data, int n) {
  json arr = json::array();
  for (int i = 0; i < n; ++i) arr.push_back(data[i]);
  return arr;
}

}  // namespace io_detail

inline json rotation_to_json(const Matrix3d& R) {
  json arr = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) arr.push_back(R(r, c));
  return json{{"matrix", arr}};
}

inline Matrix3d rotation_from_json(const json& j) {
  const auto m = io_detail::read_vector<9>(j, "matrix");
  Matrix3d R;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R(r, c) = m[3 * r + c];
  if ((R.transpose() * R - Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-8 ||
      R.determinant() < 0) {
    throw std::invalid_argument("JSON: field 'matrix' is not a rotation matrix");
  }
  return R;
}

inline json pair_to_json(const GraspRotationPaird& pair) {
  return json{{"primary", rotation_to_json(pair.primary)},
              {"flipped", rotation_to_json(pair.flipped)}};
}

inline json distribution_to_json(const Bingham2Dd& dist) {
  const Vector6d a = triu_pack(dist.parameter());
  json frame = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) frame.push_back(dist.frame()(r, c));
  return json{{"A", io_detail::vector_to_array(a.data(), 6)},
              {"frame", frame},
              {"lambda", io_detail::vector_to_array(dist.lambda().data(), 3)},
              {"logC", dist.log_norm_const()}};
}

/// Rebuilds the distribution from the packed parameter; the cached fields in
/// the JSON are informational output and are recomputed on load.
inline Bingham2Dd distribution_from_json(const json& j,
                                         const NormConstPland& plan = NormConstPland{}) {
  const Vector6d a = io_detail::read_vector<6>(j, "A");
  return Bingham2Dd::analyze(triu_unpack(a), plan);
}

inline json rep_to_json(const PlanarSymRepd& rep) {
  return json{{"a", io_detail::vector_to_array(rep.a.data(), 6)},
              {"x", io_detail::vector_to_array(rep.x.data(), 3)}};
}

inline PlanarSymRepd rep_from_json(const json& j) {
  PlanarSymRepd rep;
  rep.a = io_detail::read_vector<6>(j, "a");
  rep.x = io_detail::read_vector<3>(j, "x");
  return rep;
}

inline json fit_report_to_json(const FitReportd& report) {
  return json{{"dist", distribution_to_json(report.dist)},
              {"iters", report.iters},
              {"final_grad_norm", report.final_grad_norm},
              {"nll_per_sample", report.nll_per_sample},
              {"converged", report.converged}};
}

inline json consistency_report_to_json(const ConsistencyReport& report) {
  return json{{"axis_alignment", report.axis_alignment},
              {"neighbor_coherence", report.neighbor_coherence},
              {"intermediate_fraction", report.intermediate_fraction},
              {"box_confidence", report.box_confidence},
              {"cylinder_center_confidence", report.cylinder_center_confidence}};
}

inline SceneConfig scene_config_from_json(const json& j) {
  SceneConfig cfg;
  if (j.contains("half_extent")) cfg.half_extent = j.at("half_extent").get<double>();
  if (j.contains("grid")) {
    cfg.nx = j.at("grid").value("nx", cfg.nx);
    cfg.ny = j.at("grid").value("ny", cfg.ny);
  }
  if (j.contains("box")) {
    const json& b = j.at("box");
    if (b.contains("center")) {
      const auto c = io_detail::read_vector<2>(b, "center");
      cfg.box_center = {c[0], c[1]};
    }
    cfg.box_length_x = b.value("length_x", cfg.box_length_x);
    cfg.box_width_y = b.value("width_y", cfg.box_width_y);
  }
  if (j.contains("cylinder")) {
    cfg.has_cylinder = true;
    const json& c = j.at("cylinder");
    if (c.contains("center")) {
      const auto cc = io_detail::read_vector<2>(c, "center");
      cfg.cylinder_center = {cc[0], cc[1]};
    }
    cfg.cylinder_radius = c.value("radius", cfg.cylinder_radius);
    cfg.cylinder_core_frac = c.value("core_frac", cfg.cylinder_core_frac);
  }
  return cfg;
}

inline json scene_config_to_json(const SceneConfig& cfg) {
  json j{{"half_extent", cfg.half_extent},
         {"grid", {{"nx", cfg.nx}, {"ny", cfg.ny}}},
         {"box",
          {{"center", json::array({cfg.box_center.x(), cfg.box_center.y()})},
           {"length_x", cfg.box_length_x},
           {"width_y", cfg.box_width_y}}}};
  if (cfg.has_cylinder) {
    j["cylinder"] = {{"center", json::array({cfg.cylinder_center.x(), cfg.cylinder_center.y()})},
                     {"radius", cfg.cylinder_radius},
                     {"core_frac", cfg.cylinder_core_frac}};
  }
  return j;
}

inline void write_samples_csv(std::ostream& os, const SampleSetd& samples) {
  os << "x,y,z\n";
  char line[128];
  for (const auto& p : samples.points) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", p.x(), p.y(), p.z());
    os << line;
  }
}

/// Reads a "x,y,z" CSV of unit vectors. The resulting set carries no frame.
inline SampleSetd read_samples_csv(std::istream& is) {
  SampleSetd samples;
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,z", 0) != 0) {
    throw std::invalid_argument("samples CSV: expected header 'x,y,z'");
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    Vector3d p;
    std::istringstream ss(line);
    std::string tok;
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(ss, tok, ',')) {
        throw std::invalid_argument("samples CSV: line " + std::to_string(lineno) +
                                    ": expected 3 comma-separated values");
      }
      try {
        p[k] = std::stod(tok);
      } catch (const std::exception&) {
        throw std::invalid_argument("samples CSV: line " + std::to_string(lineno) +
                                    ": not a number: '" + tok + "'");
      }
    }
    if (!p.allFinite() || std::abs(p.norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("samples CSV: line " + std::to_string(lineno) +
                                  ": not a unit vector");
    }
    samples.points.push_back(p);
  }
  return samples;
}

}  // namespace symrot
