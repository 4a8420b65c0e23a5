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
#include "symrot/toyfield.hpp"

using namespace symrot;

namespace {

SceneConfig small_box_scene() {
  SceneConfig cfg;
  cfg.nx = 31;
  cfg.ny = 31;
  return cfg;
}

std::vector<CellField> constant_field(const FieldScene& scene, const Vector3d& e_z,
                                      double confidence = 0.0) {
  std::vector<CellField> fields(scene.cells.size());
  for (auto& f : fields) f = {e_z, confidence};
  return fields;
}

}  // namespace

TEST_SUITE_BEGIN("toyfield");

TEST_CASE("gen_scene labels box, cylinder core and empty cells") {
  SceneConfig cfg = small_box_scene();
  cfg.has_cylinder = true;
  const FieldScene scene = gen_scene(cfg);
  REQUIRE(scene.cells.size() == std::size_t(31 * 31));

  std::size_t n_box = 0, n_cyl = 0, n_empty = 0;
  for (const auto& cell : scene.cells) {
    const bool in_box = std::abs(cell.center.x()) <= cfg.box_length_x / 2 &&
                        std::abs(cell.center.y()) <= cfg.box_width_y / 2;
    const bool in_core = (cell.center - cfg.cylinder_center).norm() <=
                         cfg.cylinder_core_frac * cfg.cylinder_radius;
    switch (cell.label) {
      case CellLabel::kBoxPair: CHECK(in_box); ++n_box; break;
      case CellLabel::kCylinderYawFree: CHECK(in_core); ++n_cyl; break;
      case CellLabel::kEmpty: CHECK_FALSE(in_box); CHECK_FALSE(in_core); ++n_empty; break;
    }
  }
  CHECK(n_box > 0);
  CHECK(n_cyl > 0);
  CHECK(n_empty > 0);
  CHECK(scene.labeled_count() == n_box + n_cyl);
}

TEST_CASE("gen_scene is deterministic and rejects overlap") {
  const FieldScene a = gen_scene(small_box_scene());
  const FieldScene b = gen_scene(small_box_scene());
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].label == b.cells[i].label);
    CHECK(oracles::exact_equal(a.cells[i].center, b.cells[i].center));
  }

  SceneConfig bad = small_box_scene();
  bad.has_cylinder = true;
  bad.cylinder_center = {0.0, 0.0};
  CHECK_THROWS_AS(gen_scene(bad), std::invalid_argument);
}

TEST_CASE("box ground truths are the expected symmetric pair") {
  for (double sign : {1.0, -1.0}) {
    const Matrix3d R = grasp_rotation_from_ez(Vector3d(0.0, sign, 0.0));
    CHECK(R.col(0).isApprox(Vector3d(0, 0, -1), 0.0));
    CHECK(R.col(2).isApprox(Vector3d(0, sign, 0), 0.0));
    CHECK((R.transpose() * R - Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-15));
  }
  const Matrix3d plus = grasp_rotation_from_ez(Vector3d(0, 1, 0));
  const Matrix3d minus = grasp_rotation_from_ez(Vector3d(0, -1, 0));
  CHECK((flip_rotation(plus) - minus).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("consistency metrics on synthetic fields") {
  const FieldScene scene = gen_scene(small_box_scene());

  const ConsistencyReport perfect =
      consistency_from_fields(scene, constant_field(scene, Vector3d(0, 1, 0)));
  CHECK(perfect.axis_alignment == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(perfect.neighbor_coherence == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(perfect.intermediate_fraction == 0.0);

  // Sign-invariance: the flipped field scores identically.
  const ConsistencyReport flipped =
      consistency_from_fields(scene, constant_field(scene, Vector3d(0, -1, 0)));
  CHECK(flipped.axis_alignment == perfect.axis_alignment);
  CHECK(flipped.neighbor_coherence == perfect.neighbor_coherence);
  CHECK(flipped.intermediate_fraction == perfect.intermediate_fraction);

  // A field orthogonal to the box axis is entirely intermediate.
  const ConsistencyReport ortho =
      consistency_from_fields(scene, constant_field(scene, Vector3d(1, 0, 0)));
  CHECK(ortho.intermediate_fraction == 1.0);
  CHECK(ortho.axis_alignment <= 1e-12);

  // Counting semantics: exactly one box cell off-axis.
  std::vector<CellField> one_off = constant_field(scene, Vector3d(0, 1, 0));
  std::size_t n_box = 0, first_box = 0;
  for (std::size_t i = 0; i < scene.cells.size(); ++i) {
    if (scene.cells[i].label == CellLabel::kBoxPair) {
      if (n_box == 0) first_box = i;
      ++n_box;
    }
  }
  one_off[first_box].e_z = Vector3d(1, 0, 0);
  const ConsistencyReport counted = consistency_from_fields(scene, one_off);
  CHECK(counted.intermediate_fraction == doctest::Approx(1.0 / double(n_box)).epsilon(1e-12));
}

TEST_CASE("training is deterministic given the seed") {
  SceneConfig cfg = small_box_scene();
  cfg.nx = cfg.ny = 15;
  const FieldScene scene = gen_scene(cfg);
  const TinyModel m1 = train_toy(scene, RepKind::kRotMat, 50, 42);
  const TinyModel m2 = train_toy(scene, RepKind::kRotMat, 50, 42);
  CHECK(oracles::exact_equal(m1.w1, m2.w1));
  CHECK(oracles::exact_equal(m1.w3, m2.w3));
  CHECK(oracles::exact_equal(m1.b3, m2.b3));
  const TinyModel m3 = train_toy(scene, RepKind::kRotMat, 50, 43);
  CHECK_FALSE(oracles::exact_equal(m1.w3, m3.w3));
}

TEST_CASE("baseline regression sanity: converges to a consistent axis field") {
  const FieldScene scene = gen_scene(small_box_scene());
  const TinyModel model = train_toy(scene, RepKind::kRotMat, 1500, 1);
  const ConsistencyReport report = evaluate_field(model, scene);
  CHECK(report.axis_alignment >= 0.98);
  CHECK(report.intermediate_fraction <= 0.01);
}

TEST_CASE("ours beats the uniform-Bingham loss floor after training") {
  SceneConfig cfg = small_box_scene();
  cfg.nx = cfg.ny = 21;
  const FieldScene scene = gen_scene(cfg);
  const TinyModel model = train_toy(scene, RepKind::kOurs, 800, 1);
  const NormConstPland plan;
  double total = 0.0;
  std::size_t n = 0;
  const Matrix3d R_gt = grasp_rotation_from_ez(Vector3d(0, 1, 0));
  for (const auto& cell : scene.cells) {
    if (cell.label != CellLabel::kBoxPair) continue;
    const Eigen::VectorXd out = model.forward(cell.center / scene.config.half_extent);
    PlanarSymRepd rep;
    rep.a = out.head<6>();
    rep.x = out.tail<3>();
    total += rep_loss(rep, R_gt, plan);
    ++n;
  }
  CHECK(total / double(n) <= std::log(oracles::kFourPi));
}

TEST_CASE("quaternion baseline trains to a valid consistent field") {
  SceneConfig cfg = small_box_scene();
  cfg.nx = cfg.ny = 21;
  const FieldScene scene = gen_scene(cfg);
  const TinyModel model = train_toy(scene, RepKind::kQuat, 1500, 1);
  const ConsistencyReport report = evaluate_field(model, scene);
  CHECK(report.axis_alignment >= 0.9);
}

TEST_CASE("confidence structure: box cells more confident than cylinder core") {
  SceneConfig cfg = small_box_scene();
  cfg.has_cylinder = true;
  const FieldScene scene = gen_scene(cfg);
  const TinyModel model = train_toy(scene, RepKind::kOurs, 400, 1);
  const ConsistencyReport report = evaluate_field(model, scene);
  CHECK(report.box_confidence > report.cylinder_center_confidence);
  CHECK(report.cylinder_center_confidence >= 0.0);
}

TEST_CASE("field CSV dump covers every cell with the documented header") {
  SceneConfig cfg = small_box_scene();
  cfg.nx = cfg.ny = 9;
  const FieldScene scene = gen_scene(cfg);
  const TinyModel model = train_toy(scene, RepKind::kRotMat, 20, 7);
  std::ostringstream os;
  dump_field_csv(model, scene, os);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "cx,cy,ezx,ezy,ezz,confidence");
  std::size_t rows = 0;
  while (std::getline(is, line)) rows += !line.empty();
  CHECK(rows == scene.cells.size());
}

TEST_CASE("train_toy validation") {
  SceneConfig cfg = small_box_scene();
  cfg.box_length_x = 1e-6;  // no cell lands on the box
  cfg.box_width_y = 1e-6;
  const FieldScene empty_scene = gen_scene(cfg);
  CHECK_THROWS_AS(train_toy(empty_scene, RepKind::kOurs, 10, 1), std::invalid_argument);
  const FieldScene scene = gen_scene(small_box_scene());
  CHECK_THROWS_AS(train_toy(scene, RepKind::kOurs, 0, 1), std::invalid_argument);
}

TEST_SUITE_END();
