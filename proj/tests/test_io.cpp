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

#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "symrot/io.hpp"

using namespace symrot;

namespace {
const NormConstPland g_plan;
}

TEST_SUITE_BEGIN("io");

TEST_CASE("distribution JSON round-trip") {
  SplitMix64 rng(3);
  const Matrix3d A = oracles::random_bingham_parameter(Vector3d(-40, -7, 0), rng);
  const Bingham2Dd dist = Bingham2Dd::analyze(A, g_plan);
  const json j = distribution_to_json(dist);
  CHECK(j.contains("A"));
  CHECK(j.contains("frame"));
  CHECK(j.contains("lambda"));
  CHECK(j.contains("logC"));

  const Bingham2Dd back = distribution_from_json(j, g_plan);
  CHECK((back.parameter() - dist.parameter()).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((back.lambda() - dist.lambda()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(back.log_norm_const() == doctest::Approx(dist.log_norm_const()).epsilon(1e-12));
}

TEST_CASE("distribution JSON validation names the offending field") {
  CHECK_THROWS_WITH_AS(distribution_from_json(json::object(), g_plan),
                       doctest::Contains("'A'"), std::invalid_argument);
  json short_a{{"A", {1, 2, 3}}};
  CHECK_THROWS_WITH_AS(distribution_from_json(short_a, g_plan), doctest::Contains("'A'"),
                       std::invalid_argument);
  json bad_entry{{"A", {1, 2, 3, "x", 5, 6}}};
  CHECK_THROWS_WITH_AS(distribution_from_json(bad_entry, g_plan), doctest::Contains("'A'"),
                       std::invalid_argument);
}

TEST_CASE("representation and rotation JSON round-trips") {
  PlanarSymRepd rep;
  rep.a << -3, 0.5, 0.25, -1, 0, 0;
  rep.x << 0.2, -0.4, 0.8;
  const PlanarSymRepd back = rep_from_json(rep_to_json(rep));
  CHECK(oracles::exact_equal(back.a, rep.a));
  CHECK(oracles::exact_equal(back.x, rep.x));

  SplitMix64 rng(5);
  const Matrix3d R = oracles::random_rotation(rng);
  const Matrix3d R_back = rotation_from_json(rotation_to_json(R));
  CHECK((R - R_back).cwiseAbs().maxCoeff() <= 1e-15);

  json not_rot{{"matrix", {2, 0, 0, 0, 1, 0, 0, 0, 1}}};
  CHECK_THROWS_AS(rotation_from_json(not_rot), std::invalid_argument);
}

TEST_CASE("grasp pair JSON carries both rotations") {
  SplitMix64 rng(7);
  const Matrix3d R = oracles::random_rotation(rng);
  const GraspRotationPaird pair{R, flip_rotation(R)};
  const json j = pair_to_json(pair);
  CHECK((rotation_from_json(j.at("primary")) - R).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((rotation_from_json(j.at("flipped")) - flip_rotation(R)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("samples CSV round-trips bit-exactly") {
  const Bingham2Dd dist = Bingham2Dd::analyze(Matrix3d(Vector3d(-20, -5, 0).asDiagonal()), g_plan);
  const SampleSetd samples = dist.sample(500, 11);
  std::ostringstream os;
  write_samples_csv(os, samples);
  std::istringstream is(os.str());
  const SampleSetd back = read_samples_csv(is);
  REQUIRE(back.points.size() == samples.points.size());
  for (std::size_t i = 0; i < samples.points.size(); ++i) {
    CHECK(oracles::exact_equal(back.points[i], samples.points[i]));
  }
  CHECK_FALSE(back.frame.has_value());
}

TEST_CASE("samples CSV rejects malformed input") {
  std::istringstream bad_header("a,b,c\n1,0,0\n");
  CHECK_THROWS_AS(read_samples_csv(bad_header), std::invalid_argument);
  std::istringstream bad_row("x,y,z\n1,0\n");
  CHECK_THROWS_WITH_AS(read_samples_csv(bad_row), doctest::Contains("line 2"),
                       std::invalid_argument);
  std::istringstream not_unit("x,y,z\n1,1,0\n");
  CHECK_THROWS_AS(read_samples_csv(not_unit), std::invalid_argument);
  std::istringstream not_number("x,y,z\n1,zero,0\n");
  CHECK_THROWS_AS(read_samples_csv(not_number), std::invalid_argument);
}

TEST_CASE("scene config JSON parsing and defaults") {
  const json j = json::parse(R"({
    "half_extent": 0.2,
    "grid": {"nx": 41, "ny": 21},
    "box": {"center": [0.01, -0.02], "length_x": 0.1, "width_y": 0.05},
    "cylinder": {"center": [0.0, 0.12], "radius": 0.03, "core_frac": 0.5}
  })");
  const SceneConfig cfg = scene_config_from_json(j);
  CHECK(cfg.half_extent == 0.2);
  CHECK(cfg.nx == 41);
  CHECK(cfg.ny == 21);
  CHECK(cfg.box_center.x() == 0.01);
  CHECK(cfg.box_length_x == 0.1);
  CHECK(cfg.has_cylinder);
  CHECK(cfg.cylinder_radius == 0.03);

  const SceneConfig defaults = scene_config_from_json(json::object());
  CHECK(defaults.nx == SceneConfig{}.nx);
  CHECK_FALSE(defaults.has_cylinder);

  const SceneConfig back = scene_config_from_json(scene_config_to_json(cfg));
  CHECK(back.has_cylinder);
  CHECK(back.cylinder_core_frac == cfg.cylinder_core_frac);
}

TEST_CASE("fit and consistency report JSON fields") {
  const Bingham2Dd dist = Bingham2Dd::analyze(Matrix3d(Vector3d(-30, -6, 0).asDiagonal()), g_plan);
  const FitReportd fr{dist, 12, 1e-8, -0.5, true, {1.0, 0.5}};
  const json j = fit_report_to_json(fr);
  CHECK(j.at("iters") == 12);
  CHECK(j.at("converged") == true);
  CHECK(j.at("dist").contains("lambda"));

  ConsistencyReport cr;
  cr.axis_alignment = 0.99;
  cr.intermediate_fraction = 0.01;
  const json cj = consistency_report_to_json(cr);
  CHECK(cj.at("axis_alignment") == 0.99);
  CHECK(cj.at("intermediate_fraction") == 0.01);
  CHECK(cj.contains("neighbor_coherence"));
  CHECK(cj.contains("box_confidence"));
  CHECK(cj.contains("cylinder_center_confidence"));
}

TEST_SUITE_END();
