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
#include <stdexcept>
#include <vector>

#include "symrot/bingham2d.hpp"
#include "symrot/mat3.hpp"

namespace symrot {

/// Nine-parameter planar-symmetric rotation representation: `a` packs the
/// Bingham parameter whose mode axis is normal to the symmetry plane (the
/// +/- e_z pair), `x` is the unnormalized in-plane direction regressed as e_x.
template <typename T>
struct PlanarSymRep {
  Vector6<T> a = Vector6<T>::Zero();
  Vector3<T> x = Vector3<T>::UnitX();
};

using PlanarSymRepd = PlanarSymRep<double>;

template <typename T>
using Quaternion = Eigen::Quaternion<T>;

/// A grasp rotation and its 180-degree flip about the approach axis (the e_x
/// column); both describe the same planar-symmetric grasp.
template <typename T>
struct GraspRotationPair {
  Matrix3<T> primary;
  Matrix3<T> flipped;
};

using GraspRotationPaird = GraspRotationPair<double>;

/// Rotates 180 degrees about the body e_x column: e_x is fixed, e_y and e_z
/// are negated. An involution.
template <typename T>
Matrix3<T> flip_rotation(const Matrix3<T>& R) {
  Matrix3<T> out = R;
  out.col(1) = -out.col(1);
  out.col(2) = -out.col(2);
  return out;
}

namespace detail {

template <typename T>
void require_direction(const Vector3<T>& v, const char* what) {
  if (!v.allFinite() || v.norm() <= T(1e-9)) {
    throw std::domain_error(std::string(what) + ": degenerate direction (near-zero norm)");
  }
}

template <typename T>
T cosine_loss(const Vector3<T>& pred, const Vector3<T>& target) {
  return T(1) - pred.dot(target) / (pred.norm() * target.norm());
}

/// d/dpred of cosine_loss.
template <typename T>
Vector3<T> cosine_loss_grad(const Vector3<T>& pred, const Vector3<T>& target) {
  const T np = pred.norm();
  const T nt = target.norm();
  return (pred * (pred.dot(target) / (np * np * np)) - target / np) / nt;
}

}  // namespace detail

/// Training loss of the representation against a ground-truth rotation:
/// (1 - cos(x, e_x)) + BNLL(triu(a), e_z) with e_x, e_z the first and third
/// columns of R_gt. Invariant to flipping R_gt, so one pose per symmetric
/// pair suffices as ground truth.
template <typename T>
T rep_loss(const PlanarSymRep<T>& rep, const Matrix3<T>& R_gt,
           const NormConstPlan<T>& plan = NormConstPlan<T>{}) {
  if (!rep.a.allFinite() || !rep.x.allFinite()) {
    throw std::invalid_argument("rep_loss: non-finite representation");
  }
  detail::require_direction(rep.x, "rep_loss");
  const Vector3<T> e_x = R_gt.col(0);
  const Vector3<T> e_z = R_gt.col(2);
  return detail::cosine_loss(rep.x, e_x) + nll(triu_unpack(rep.a), e_z, plan);
}

template <typename T>
T rep_loss(const PlanarSymRep<T>& rep, const Matrix3<T>& R_gt, const QuadratureConfig<T>& cfg) {
  return rep_loss(rep, R_gt, NormConstPlan<T>(cfg));
}

/// Gradient of rep_loss with respect to the nine parameters. The packed
/// Bingham part doubles the off-diagonal entries since each packed
/// coordinate drives both mirror entries of A.
template <typename T>
struct RepLossGrad {
  Vector6<T> a;
  Vector3<T> x;
};

template <typename T>
RepLossGrad<T> rep_loss_grad(const PlanarSymRep<T>& rep, const Matrix3<T>& R_gt,
                             const NormConstPlan<T>& plan = NormConstPlan<T>{}) {
  if (!rep.a.allFinite() || !rep.x.allFinite()) {
    throw std::invalid_argument("rep_loss_grad: non-finite representation");
  }
  detail::require_direction(rep.x, "rep_loss_grad");
  const Vector3<T> e_x = R_gt.col(0);
  const Vector3<T> e_z = R_gt.col(2);
  const Matrix3<T> G = nll_grad_A(triu_unpack(rep.a), e_z, plan).grad;
  RepLossGrad<T> out;
  out.a << G(0, 0), T(2) * G(0, 1), T(2) * G(0, 2), G(1, 1), T(2) * G(1, 2), G(2, 2);
  out.x = detail::cosine_loss_grad(rep.x, e_x);
  return out;
}

template <typename T>
RepLossGrad<T> rep_loss_grad(const PlanarSymRep<T>& rep, const Matrix3<T>& R_gt,
                             const QuadratureConfig<T>& cfg) {
  return rep_loss_grad(rep, R_gt, NormConstPlan<T>(cfg));
}

/// Mode-eigenvector reconstruction: e_z is the Bingham mode, the frame is
/// completed by Gram-Schmidt against x. Returns the symmetric pair.
template <typename T>
GraspRotationPair<T> reconstruct_mode(const PlanarSymRep<T>& rep,
                                      const NormConstPlan<T>& plan = NormConstPlan<T>{}) {
  const Bingham2D<T> dist = Bingham2D<T>::analyze(triu_unpack(rep.a), plan);
  GraspRotationPair<T> out;
  out.primary = gram_schmidt_rotation(rep.x, dist.mode());
  out.flipped = flip_rotation(out.primary);
  return out;
}

/// Sampling reconstruction: n rotations whose e_z are independent draws from
/// the Bingham, all sharing the predicted x.
template <typename T>
std::vector<Matrix3<T>> reconstruct_sampled(const PlanarSymRep<T>& rep, std::size_t count,
                                            std::uint64_t seed,
                                            const NormConstPlan<T>& plan = NormConstPlan<T>{}) {
  const Bingham2D<T> dist = Bingham2D<T>::analyze(triu_unpack(rep.a), plan);
  const SampleSet<T> draws = dist.sample(count, seed);
  std::vector<Matrix3<T>> out;
  out.reserve(count);
  for (const auto& e_z : draws.points) {
    out.push_back(gram_schmidt_rotation(rep.x, e_z));
  }
  return out;
}

/// Confidence gate: true iff the eigenvalue-gap confidence reaches the
/// threshold (>= convention; the masked-out set is confidence < threshold).
template <typename T>
bool confidence_mask(const PlanarSymRep<T>& rep, T threshold = T(15),
                     const NormConstPlan<T>& plan = NormConstPlan<T>{}) {
  if (!rep.a.allFinite()) throw std::invalid_argument("confidence_mask: non-finite parameters");
  return Bingham2D<T>::analyze(triu_unpack(rep.a), plan).confidence() >= threshold;
}

template <typename T>
struct FlipMinLoss {
  T loss;
  /// True when the flipped ground truth gave the smaller loss; ties go to
  /// the non-flipped branch.
  bool flipped_branch;
};

/// Baseline training rule for the 6-channel rotation-matrix representation:
/// evaluate the cosine losses against both the ground truth and its flip,
/// keep the smaller.
template <typename T>
FlipMinLoss<T> flipmin_loss_rotmat(const Vector3<T>& pred_ex, const Vector3<T>& pred_ez,
                                   const Matrix3<T>& R_gt) {
  detail::require_direction(pred_ex, "flipmin_loss_rotmat");
  detail::require_direction(pred_ez, "flipmin_loss_rotmat");
  const Matrix3<T> flipped = flip_rotation(R_gt);
  const T plain = detail::cosine_loss(pred_ex, Vector3<T>(R_gt.col(0))) +
                  detail::cosine_loss(pred_ez, Vector3<T>(R_gt.col(2)));
  const T alt = detail::cosine_loss(pred_ex, Vector3<T>(flipped.col(0))) +
                detail::cosine_loss(pred_ez, Vector3<T>(flipped.col(2)));
  if (alt < plain) return {alt, true};
  return {plain, false};
}

/// Quaternion for the 180-degree flip about the body x axis.
template <typename T>
Quaternion<T> flip_quaternion() {
  return Quaternion<T>(T(0), T(1), T(0), T(0));
}

/// Baseline flip-min rule in quaternion space with the double-cover-safe
/// distance 1 - |<p, g>|.
template <typename T>
FlipMinLoss<T> flipmin_loss_quat(const Quaternion<T>& pred, const Quaternion<T>& gt) {
  if (std::abs(pred.norm() - T(1)) > T(1e-9) || std::abs(gt.norm() - T(1)) > T(1e-9)) {
    throw std::invalid_argument("flipmin_loss_quat: expected unit quaternions");
  }
  const Quaternion<T> gt_flipped = gt * flip_quaternion<T>();
  const T plain = T(1) - std::abs(pred.dot(gt));
  const T alt = T(1) - std::abs(pred.dot(gt_flipped));
  if (alt < plain) return {alt, true};
  return {plain, false};
}

}  // namespace symrot
