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
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "symrot/bingham2d.hpp"
#include "symrot/rng.hpp"
#include "symrot/symrep.hpp"

namespace symrot {

/// Planar workspace with a long box and optionally a flat cylinder, sampled
/// on a regular grid of cell centers (top-down view; all lengths in meters).
struct SceneConfig {
  double half_extent = 0.15;
  int nx = 61;
  int ny = 61;
  Eigen::Vector2d box_center{0.0, 0.0};
  double box_length_x = 0.2;
  double box_width_y = 0.06;
  bool has_cylinder = false;
  Eigen::Vector2d cylinder_center{0.0, 0.09};
  double cylinder_radius = 0.035;
  /// Cells within core_frac * radius of the cylinder axis get the yaw-free
  /// label; the outer annulus stays unlabeled.
  double cylinder_core_frac = 0.6;
};

enum class CellLabel {
  kEmpty,
  /// Symmetric pair: e_z = +/- y-hat, e_x = -z-hat (top-down approach).
  kBoxPair,
  /// Any yaw about z-hat is a valid grasp.
  kCylinderYawFree,
};

struct FieldCell {
  Eigen::Vector2d center;
  int ix;
  int iy;
  CellLabel label;
};

struct FieldScene {
  SceneConfig config;
  std::vector<FieldCell> cells;  // all nx*ny cells, row-major (iy outer)

  std::size_t labeled_count() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.label != CellLabel::kEmpty;
    return n;
  }
};

inline FieldScene gen_scene(const SceneConfig& config) {
  if (config.nx < 1 || config.ny < 1 || !(config.half_extent > 0)) {
    throw std::invalid_argument("scene: grid resolution and extent must be positive");
  }
  if (!(config.box_length_x > 0) || !(config.box_width_y > 0)) {
    throw std::invalid_argument("scene: box dimensions must be positive");
  }
  if (config.has_cylinder) {
    if (!(config.cylinder_radius > 0) ||
        !(config.cylinder_core_frac > 0 && config.cylinder_core_frac <= 1)) {
      throw std::invalid_argument("scene: cylinder radius/core_frac out of range");
    }
    const double dx = std::max(
        std::abs(config.cylinder_center.x() - config.box_center.x()) - config.box_length_x / 2,
        0.0);
    const double dy = std::max(
        std::abs(config.cylinder_center.y() - config.box_center.y()) - config.box_width_y / 2,
        0.0);
    if (std::hypot(dx, dy) < config.cylinder_radius) {
      throw std::invalid_argument("scene: box and cylinder overlap");
    }
  }

  FieldScene scene;
  scene.config = config;
  scene.cells.reserve(std::size_t(config.nx) * config.ny);
  const double h = config.half_extent;
  for (int iy = 0; iy < config.ny; ++iy) {
    for (int ix = 0; ix < config.nx; ++ix) {
      FieldCell cell;
      cell.ix = ix;
      cell.iy = iy;
      cell.center = {(ix + 0.5) / config.nx * 2 * h - h, (iy + 0.5) / config.ny * 2 * h - h};
      cell.label = CellLabel::kEmpty;
      if (std::abs(cell.center.x() - config.box_center.x()) <= config.box_length_x / 2 &&
          std::abs(cell.center.y() - config.box_center.y()) <= config.box_width_y / 2) {
        cell.label = CellLabel::kBoxPair;
      } else if (config.has_cylinder &&
                 (cell.center - config.cylinder_center).norm() <=
                     config.cylinder_core_frac * config.cylinder_radius) {
        cell.label = CellLabel::kCylinderYawFree;
      }
      scene.cells.push_back(cell);
    }
  }
  return scene;
}

/// Top-down ground-truth rotation with the given in-plane e_z.
inline Matrix3d grasp_rotation_from_ez(const Vector3d& e_z) {
  const Vector3d e_x(0.0, 0.0, -1.0);
  Matrix3d R;
  R.col(0) = e_x;
  R.col(1) = e_z.cross(e_x);
  R.col(2) = e_z;
  return R;
}

enum class RepKind { kOurs, kRotMat, kQuat };

inline int output_dim(RepKind kind) {
  switch (kind) {
    case RepKind::kOurs: return 9;
    case RepKind::kRotMat: return 6;
    case RepKind::kQuat: return 4;
  }
  throw std::invalid_argument("unknown representation kind");
}

/// tanh MLP 2 -> 32 -> 32 -> output_dim(kind), fed normalized cell
/// coordinates (center / half_extent).
struct TinyModel {
  RepKind kind;
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  Eigen::VectorXd forward(const Eigen::Vector2d& in) const {
    const Eigen::VectorXd h1 = (w1 * in + b1).array().tanh();
    const Eigen::VectorXd h2 = (w2 * h1 + b2).array().tanh();
    return w3 * h2 + b3;
  }
};

namespace toy_detail {

inline constexpr int kHiddenWidth = 32;
inline constexpr double kLearningRate = 1e-2;
// Init scales: first layer x6, output layer x2, biases sigma 0.3.
inline constexpr double kFirstLayerScale = 6.0;
inline constexpr double kOutputLayerScale = 2.0;
inline constexpr double kBiasScale = 0.3;

inline Eigen::MatrixXd random_layer(int rows, int cols, double scale, SplitMix64& rng) {
  Eigen::MatrixXd w(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) w(i, j) = scale * rng.normal() / std::sqrt(double(cols));
  }
  return w;
}

inline Eigen::VectorXd random_bias(int rows, SplitMix64& rng) {
  Eigen::VectorXd b(rows);
  for (int i = 0; i < rows; ++i) b[i] = kBiasScale * rng.normal();
  return b;
}

/// dL/d(raw output) for one cell under the kind's loss against R_gt.
inline Eigen::VectorXd loss_grad(RepKind kind, const Eigen::VectorXd& out, const Matrix3d& R_gt,
                                 const NormConstPland& plan) {
  switch (kind) {
    case RepKind::kOurs: {
      PlanarSymRepd rep;
      rep.a = out.head<6>();
      rep.x = out.tail<3>();
      const RepLossGrad<double> g = rep_loss_grad(rep, R_gt, plan);
      Eigen::VectorXd dout(9);
      dout << g.a, g.x;
      return dout;
    }
    case RepKind::kRotMat: {
      const Vector3d ex = out.head<3>();
      const Vector3d ez = out.tail<3>();
      const Matrix3d G =
          flipmin_loss_rotmat(ex, ez, R_gt).flipped_branch ? flip_rotation(R_gt) : R_gt;
      Eigen::VectorXd dout(6);
      dout << detail::cosine_loss_grad(ex, Vector3d(G.col(0))),
          detail::cosine_loss_grad(ez, Vector3d(G.col(2)));
      return dout;
    }
    case RepKind::kQuat: {
      const Eigen::Vector4d q = out;  // (w, x, y, z)
      const double norm = q.norm();
      if (norm <= 1e-9) throw std::domain_error("quat loss: degenerate prediction");
      const Quaternion<double> pred(q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm);
      Quaternion<double> gt(R_gt);
      if (flipmin_loss_quat(pred, gt).flipped_branch) gt = gt * flip_quaternion<double>();
      const Eigen::Vector4d g(gt.w(), gt.x(), gt.y(), gt.z());
      const double dot = q.dot(g);
      const double sign = dot >= 0 ? 1.0 : -1.0;
      // d/dq of 1 - |<q, g>| / |q|
      return Eigen::VectorXd(std::abs(dot) * q / (norm * norm * norm) - sign * g / norm);
    }
  }
  throw std::invalid_argument("unknown representation kind");
}

}  // namespace toy_detail

/// Trains the tiny field regressor by full-batch gradient descent for a
/// fixed number of epochs. Box cells present one pose of their symmetric
/// pair per epoch, alternating sign with (epoch + cell) parity; yaw-free
/// cells draw a fresh yaw each epoch. Deterministic given the seed.
inline TinyModel train_toy(const FieldScene& scene, RepKind kind, int epochs, std::uint64_t seed,
                           const QuadratureConfigd& cfg = {}) {
  if (epochs < 1) throw std::invalid_argument("train_toy: epochs must be >= 1");
  if (scene.labeled_count() == 0) throw std::invalid_argument("train_toy: scene has no labeled cells");
  const NormConstPland plan(cfg);
  const int out_dim = output_dim(kind);

  SplitMix64 init_rng = SplitMix64(seed).split(1);
  SplitMix64 pose_rng = SplitMix64(seed).split(2);

  using toy_detail::kHiddenWidth;
  TinyModel model;
  model.kind = kind;
  model.w1 = toy_detail::random_layer(kHiddenWidth, 2, toy_detail::kFirstLayerScale, init_rng);
  model.b1 = toy_detail::random_bias(kHiddenWidth, init_rng);
  model.w2 = toy_detail::random_layer(kHiddenWidth, kHiddenWidth, 1.0, init_rng);
  model.b2 = toy_detail::random_bias(kHiddenWidth, init_rng);
  model.w3 = toy_detail::random_layer(out_dim, kHiddenWidth, toy_detail::kOutputLayerScale, init_rng);
  model.b3 = toy_detail::random_bias(out_dim, init_rng);

  struct Labeled {
    Eigen::Vector2d in;
    CellLabel label;
  };
  std::vector<Labeled> batch;
  for (const auto& cell : scene.cells) {
    if (cell.label != CellLabel::kEmpty) {
      batch.push_back({cell.center / scene.config.half_extent, cell.label});
    }
  }

  const double lr = toy_detail::kLearningRate;
  const double inv_batch = 1.0 / double(batch.size());
  Eigen::MatrixXd gw1(kHiddenWidth, 2), gw2(kHiddenWidth, kHiddenWidth), gw3(out_dim, kHiddenWidth);
  Eigen::VectorXd gb1(kHiddenWidth), gb2(kHiddenWidth), gb3(out_dim);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    gw1.setZero(); gw2.setZero(); gw3.setZero();
    gb1.setZero(); gb2.setZero(); gb3.setZero();
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Matrix3d R_gt;
      if (batch[i].label == CellLabel::kBoxPair) {
        const double sign = ((epoch + int(i)) % 2 == 0) ? 1.0 : -1.0;
        R_gt = grasp_rotation_from_ez(Vector3d(0.0, sign, 0.0));
      } else {
        const double yaw = 2.0 * kPi * pose_rng.uniform();
        R_gt = grasp_rotation_from_ez(Vector3d(std::cos(yaw), std::sin(yaw), 0.0));
      }

      const Eigen::VectorXd a1 = model.w1 * batch[i].in + model.b1;
      const Eigen::VectorXd h1 = a1.array().tanh();
      const Eigen::VectorXd a2 = model.w2 * h1 + model.b2;
      const Eigen::VectorXd h2 = a2.array().tanh();
      const Eigen::VectorXd out = model.w3 * h2 + model.b3;

      const Eigen::VectorXd dout = toy_detail::loss_grad(kind, out, R_gt, plan);
      gw3 += dout * h2.transpose();
      gb3 += dout;
      const Eigen::VectorXd dh2 =
          (model.w3.transpose() * dout).cwiseProduct((1.0 - h2.array().square()).matrix());
      gw2 += dh2 * h1.transpose();
      gb2 += dh2;
      const Eigen::VectorXd dh1 =
          (model.w2.transpose() * dh2).cwiseProduct((1.0 - h1.array().square()).matrix());
      gw1 += dh1 * batch[i].in.transpose();
      gb1 += dh1;
    }
    model.w1 -= lr * inv_batch * gw1;
    model.b1 -= lr * inv_batch * gb1;
    model.w2 -= lr * inv_batch * gw2;
    model.b2 -= lr * inv_batch * gb2;
    model.w3 -= lr * inv_batch * gw3;
    model.b3 -= lr * inv_batch * gb3;
  }
  return model;
}

struct ConsistencyReport {
  /// Mean |e_z . y-hat| over box cells.
  double axis_alignment = 0.0;
  /// Mean |e_z(a) . e_z(b)| over 4-adjacent box cell pairs.
  double neighbor_coherence = 0.0;
  /// Fraction of box cells with |e_z . y-hat| < cos(30 deg).
  double intermediate_fraction = 0.0;
  double box_confidence = 0.0;
  double cylinder_center_confidence = 0.0;
};

struct CellField {
  Vector3d e_z = Vector3d::UnitZ();
  double confidence = 0.0;  // stays 0 for the baseline representations
};

/// Reconstructed e_z (mode + Gram-Schmidt for ours, Gram-Schmidt of the raw
/// 6 channels for the matrix baseline, quaternion-to-matrix for the
/// quaternion baseline) and the eigenvalue-gap confidence where defined.
inline CellField evaluate_cell(const TinyModel& model, const FieldScene& scene,
                               const FieldCell& cell, const NormConstPland& plan) {
  const Eigen::VectorXd out = model.forward(cell.center / scene.config.half_extent);
  switch (model.kind) {
    case RepKind::kOurs: {
      const Bingham2Dd dist = Bingham2Dd::analyze(triu_unpack(Vector6d(out.head<6>())), plan);
      const Matrix3d R = gram_schmidt_rotation(Vector3d(out.tail<3>()), dist.mode());
      return {R.col(2), dist.confidence()};
    }
    case RepKind::kRotMat: {
      const Matrix3d R = gram_schmidt_rotation(Vector3d(out.head<3>()), Vector3d(out.tail<3>()));
      return {R.col(2), 0.0};
    }
    case RepKind::kQuat: {
      const double norm = out.norm();
      if (norm <= 1e-9) throw std::domain_error("evaluate_cell: degenerate quaternion output");
      const Quaternion<double> q(out[0] / norm, out[1] / norm, out[2] / norm, out[3] / norm);
      return {q.toRotationMatrix().col(2), 0.0};
    }
  }
  throw std::invalid_argument("unknown representation kind");
}

/// Metrics from per-cell fields (parallel to scene.cells; entries at labeled
/// cells are read). All axis quantities use |dot|, so the e_z sign never
/// affects a metric.
inline ConsistencyReport consistency_from_fields(const FieldScene& scene,
                                                 const std::vector<CellField>& fields) {
  if (fields.size() != scene.cells.size()) {
    throw std::invalid_argument("consistency_from_fields: one field per scene cell expected");
  }
  const Vector3d axis(0.0, 1.0, 0.0);
  const double intermediate_threshold = std::cos(30.0 * kPi / 180.0);

  const int nx = scene.config.nx;
  std::vector<bool> is_box(scene.cells.size(), false);
  double align_sum = 0.0, box_conf_sum = 0.0, cyl_conf_sum = 0.0;
  std::size_t n_box = 0, n_cyl = 0, n_intermediate = 0;
  for (std::size_t i = 0; i < scene.cells.size(); ++i) {
    if (scene.cells[i].label == CellLabel::kBoxPair) {
      is_box[i] = true;
      ++n_box;
      const double a = std::abs(fields[i].e_z.dot(axis));
      align_sum += a;
      n_intermediate += a < intermediate_threshold;
      box_conf_sum += fields[i].confidence;
    } else if (scene.cells[i].label == CellLabel::kCylinderYawFree) {
      ++n_cyl;
      cyl_conf_sum += fields[i].confidence;
    }
  }

  double coherence_sum = 0.0;
  std::size_t n_pairs = 0;
  for (std::size_t i = 0; i < scene.cells.size(); ++i) {
    if (!is_box[i]) continue;
    const std::size_t right = i + 1;
    const std::size_t up = i + std::size_t(nx);
    if (scene.cells[i].ix + 1 < nx && right < scene.cells.size() && is_box[right]) {
      coherence_sum += std::abs(fields[i].e_z.dot(fields[right].e_z));
      ++n_pairs;
    }
    if (up < scene.cells.size() && is_box[up]) {
      coherence_sum += std::abs(fields[i].e_z.dot(fields[up].e_z));
      ++n_pairs;
    }
  }

  ConsistencyReport report;
  if (n_box > 0) {
    report.axis_alignment = align_sum / double(n_box);
    report.intermediate_fraction = double(n_intermediate) / double(n_box);
    report.box_confidence = box_conf_sum / double(n_box);
  }
  if (n_pairs > 0) report.neighbor_coherence = coherence_sum / double(n_pairs);
  if (n_cyl > 0) report.cylinder_center_confidence = cyl_conf_sum / double(n_cyl);
  return report;
}

/// Field-level consistency metrics of a trained model over the scene's
/// labeled regions.
inline ConsistencyReport evaluate_field(const TinyModel& model, const FieldScene& scene,
                                        const QuadratureConfigd& cfg = {}) {
  const NormConstPland plan(cfg);
  std::vector<CellField> fields(scene.cells.size());
  for (std::size_t i = 0; i < scene.cells.size(); ++i) {
    if (scene.cells[i].label == CellLabel::kEmpty) continue;
    fields[i] = evaluate_cell(model, scene, scene.cells[i], plan);
  }
  return consistency_from_fields(scene, fields);
}

/// Per-cell field dump over the whole grid: "cx,cy,ezx,ezy,ezz,confidence".
inline void dump_field_csv(const TinyModel& model, const FieldScene& scene, std::ostream& os,
                           const QuadratureConfigd& cfg = {}) {
  const NormConstPland plan(cfg);
  os << "cx,cy,ezx,ezy,ezz,confidence\n";
  char line[256];
  for (const auto& cell : scene.cells) {
    const CellField f = evaluate_cell(model, scene, cell, plan);
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", cell.center.x(),
                  cell.center.y(), f.e_z.x(), f.e_z.y(), f.e_z.z(), f.confidence);
    os << line;
  }
}

}  // namespace symrot
