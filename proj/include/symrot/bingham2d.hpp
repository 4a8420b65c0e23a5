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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "symrot/erfinv.hpp"
#include "symrot/mat3.hpp"
#include "symrot/rng.hpp"

namespace symrot {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Parameters of the oscillatory-series evaluation of the Bingham
/// normalizing constant. The defaults reproduce the reference scheme:
/// d = c/2, n_min = 15, r = 2.5, omega_d = 0.5, n = 200, with
/// c = n_min*pi / (r^2 (1+r) omega_d) and h = sqrt(2 pi d (1+r) / (omega_d n)).
template <typename T>
struct QuadratureConfig {
  T r = T(2.5);
  T omega_d = T(0.5);
  int n = 200;
  int n_min = 15;
  T d_frac = T(0.5);

  void validate() const {
    if (!(r >= T(2))) throw std::invalid_argument("quadrature config: r must be >= 2");
    if (!(omega_d >= T(1) / r && omega_d <= T(1))) {
      throw std::invalid_argument("quadrature config: omega_d must lie in [1/r, 1]");
    }
    if (n_min < 1) throw std::invalid_argument("quadrature config: n_min must be >= 1");
    if (n < n_min) throw std::invalid_argument("quadrature config: n must be >= n_min");
    if (!(d_frac > T(0) && d_frac < T(1))) {
      throw std::invalid_argument("quadrature config: d_frac must lie in (0, 1)");
    }
  }

  T contour_c() const { return T(n_min) * T(kPi) / (r * r * (T(1) + r) * omega_d); }
  T step_h() const {
    const T d = d_frac * contour_c();
    return std::sqrt(T(2) * T(kPi) * d * (T(1) + r) / (omega_d * T(n)));
  }
};

using QuadratureConfigd = QuadratureConfig<double>;

/// Precomputed nodes and windowed phase coefficients of the series
///
///   C(lambda) = e^c h sqrt(pi) * Re sum_{k=-n-1}^{n} w(|kh|) F(kh, lambda) e^{ikh},
///   F(t, lambda) = prod_j (-lambda_j + it + c)^{-1/2},
///   w(x) = erfc(x/p1 - p2) / 2.
///
/// The sum range is asymmetric (one extra node on the negative side) as in
/// the reference scheme. Reusing a plan amortizes the erfc/phase setup when
/// many lambdas are evaluated against the same config.
template <typename T>
class NormConstPlan {
 public:
  explicit NormConstPlan(const QuadratureConfig<T>& cfg = {}) {
    cfg.validate();
    c_ = cfg.contour_c();
    const T h = cfg.step_h();
    const T p1 = std::sqrt(T(cfg.n) * h / cfg.omega_d);
    const T p2 = std::sqrt(cfg.omega_d * T(cfg.n) * h / T(4));
    prefactor_ = std::exp(c_) * h * std::sqrt(T(kPi));
    nodes_.reserve(2 * cfg.n + 2);
    coeffs_.reserve(2 * cfg.n + 2);
    for (int k = -cfg.n - 1; k <= cfg.n; ++k) {
      const T t = T(k) * h;
      const T w = std::erfc(std::abs(t) / p1 - p2) / T(2);
      nodes_.push_back(t);
      coeffs_.push_back(w * std::complex<T>(std::cos(t), std::sin(t)));
    }
  }

  T contour_c() const { return c_; }

  /// C(lambda). Expects lambda ascending with lambda3 = 0 (caller shifts).
  T value(const Vector3<T>& lambda) const {
    check_lambda(lambda);
    std::complex<T> acc{};
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      acc += coeffs_[i] * factor(lambda, nodes_[i]);
    }
    const T out = prefactor_ * acc.real();
    if (!(out > T(0)) || !std::isfinite(out)) {
      throw std::runtime_error("norm_const: series evaluated to a non-positive value");
    }
    return out;
  }

  /// C(lambda) and dC/dlambda in one pass over the nodes.
  std::pair<T, Vector3<T>> value_and_grad(const Vector3<T>& lambda) const {
    check_lambda(lambda);
    std::complex<T> acc{};
    std::complex<T> acc_g[3] = {};
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const T t = nodes_[i];
      const std::complex<T> z0(c_ - lambda[0], t);
      const std::complex<T> z1(c_ - lambda[1], t);
      const std::complex<T> z2(c_ - lambda[2], t);
      const std::complex<T> f =
          coeffs_[i] / (std::sqrt(z0) * std::sqrt(z1) * std::sqrt(z2));
      acc += f;
      acc_g[0] += f / z0;
      acc_g[1] += f / z1;
      acc_g[2] += f / z2;
    }
    const T value = prefactor_ * acc.real();
    if (!(value > T(0)) || !std::isfinite(value)) {
      throw std::runtime_error("norm_const: series evaluated to a non-positive value");
    }
    Vector3<T> grad;
    for (int k = 0; k < 3; ++k) grad[k] = prefactor_ * (T(0.5) * acc_g[k]).real();
    return {value, grad};
  }

 private:
  std::complex<T> factor(const Vector3<T>& lambda, T t) const {
    const std::complex<T> z0(c_ - lambda[0], t);
    const std::complex<T> z1(c_ - lambda[1], t);
    const std::complex<T> z2(c_ - lambda[2], t);
    // Each factor has positive real part (c > 0 >= lambda_k), so the
    // principal branch of every square root is continuous in t.
    return T(1) / (std::sqrt(z0) * std::sqrt(z1) * std::sqrt(z2));
  }

  static void check_lambda(const Vector3<T>& lambda) {
    if (!lambda.allFinite()) throw std::invalid_argument("norm_const: non-finite lambda");
    if (!(lambda[0] <= lambda[1] && lambda[1] <= lambda[2])) {
      throw std::invalid_argument("norm_const: lambda must be sorted ascending");
    }
    if (lambda[2] > T(1e-9)) {
      throw std::invalid_argument("norm_const: expects shifted eigenvalues (lambda3 = 0)");
    }
  }

  T c_{};
  T prefactor_{};
  std::vector<T> nodes_;
  std::vector<std::complex<T>> coeffs_;
};

using NormConstPland = NormConstPlan<double>;

/// Normalizing constant of the Bingham density exp(v^T diag(lambda) v) over
/// the unit sphere, surface measure (C(0,0,0) = 4 pi).
template <typename T>
T norm_const(const Vector3<T>& lambda, const QuadratureConfig<T>& cfg = {}) {
  return NormConstPlan<T>(cfg).value(lambda);
}

template <typename T>
Vector3<T> norm_const_grad(const Vector3<T>& lambda, const QuadratureConfig<T>& cfg = {}) {
  return NormConstPlan<T>(cfg).value_and_grad(lambda).second;
}

/// Unit vectors on the sphere, optionally carrying the orthogonal frame of
/// the distribution that generated them.
template <typename T>
struct SampleSet {
  std::vector<Vector3<T>> points;
  std::optional<Matrix3<T>> frame;
};

using SampleSetd = SampleSet<double>;

/// An analyzed 2D Bingham distribution B(A)(v) = exp(v^T A v) / C(lambda).
///
/// analyze() eigendecomposes A and shifts the eigenvalues so that
/// lambda1 <= lambda2 <= lambda3 = 0; the distribution is unchanged because a
/// shift by c multiplies both the density numerator and C by e^c.
template <typename T>
class Bingham2D {
 public:
  static Bingham2D analyze(const Matrix3<T>& A, const QuadratureConfig<T>& cfg) {
    return analyze(A, NormConstPlan<T>(cfg));
  }

  static Bingham2D analyze(const Matrix3<T>& A, const NormConstPlan<T>& plan = NormConstPlan<T>{}) {
    Bingham2D d;
    d.parameter_ = A;
    const EigSym3<T> eig = eig_sym3(A);
    d.frame_ = eig.vectors;
    d.lambda_ = eig.lambda;
    const T shift = d.lambda_[2];
    d.lambda_.array() -= shift;
    d.lambda_[2] = T(0);
    d.shifted_ = A - shift * Matrix3<T>::Identity();
    d.log_norm_const_ = std::log(plan.value(d.lambda_));
    return d;
  }

  /// Original (unshifted) parameter matrix.
  const Matrix3<T>& parameter() const { return parameter_; }
  /// Shifted parameter A - lambda3 I; same distribution, lambda3 = 0.
  const Matrix3<T>& shifted_parameter() const { return shifted_; }
  /// Orthogonal frame; columns are eigenvectors matching lambda()'s order.
  const Matrix3<T>& frame() const { return frame_; }
  /// Shifted eigenvalues, ascending, lambda[2] = 0.
  const Vector3<T>& lambda() const { return lambda_; }
  T log_norm_const() const { return log_norm_const_; }

  T log_pdf(const Vector3<T>& v) const {
    require_unit(v, "log_pdf");
    return v.dot(shifted_ * v) - log_norm_const_;
  }

  /// Density-maximizing direction: the eigenvector of the largest eigenvalue
  /// under the deterministic sign convention of eig_sym3. For a degenerate
  /// (near-uniform) distribution the returned axis is arbitrary; check
  /// confidence() first.
  Vector3<T> mode() const { return frame_.col(2); }

  /// Eigenvalue-gap confidence (lambda3-lambda2) + (lambda3-lambda1) >= 0.
  /// Invariant under eigenvalue shifts.
  T confidence() const {
    return (lambda_[2] - lambda_[1]) + (lambda_[2] - lambda_[0]);
  }

  /// Draws n i.i.d. unit vectors by rejection sampling with an angular
  /// central Gaussian proposal. With Lam = -lambda >= 0, the proposal
  /// parameter is Omega = I + (2/b) D diag(Lam) D^T where b in (0, 3] solves
  /// sum_k 1/(b + 2 Lam_k) = 1, and the acceptance bound is
  /// exp(-s) (1 + 2s/b)^{3/2} <= exp(-(3-b)/2) (3/b)^{3/2}, s = x^T (-A_s) x.
  /// Deterministic given the seed.
  SampleSet<T> sample(std::size_t count, std::uint64_t seed) const {
    if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
    const Vector3<T> concentration = -lambda_;  // descending, last entry 0

    // Bisection for b; the left bracket is safe because 1/b alone exceeds 1.
    T lo = T(1e-12), hi = T(3);
    auto excess = [&](T b) {
      T s{};
      for (int k = 0; k < 3; ++k) s += T(1) / (b + T(2) * concentration[k]);
      return s - T(1);
    };
    for (int it = 0; it < 200 && (hi - lo) > T(1e-12); ++it) {
      const T mid = (lo + hi) / T(2);
      (excess(mid) > T(0) ? lo : hi) = mid;
    }
    const T b = (lo + hi) / T(2);

    Vector3<T> proposal_scale;
    for (int k = 0; k < 3; ++k) {
      proposal_scale[k] = T(1) / std::sqrt(T(1) + T(2) * concentration[k] / b);
    }
    const T log_bound = (T(3) - b) / T(2) - T(1.5) * std::log(T(3) / b);

    SplitMix64 rng(seed);
    SampleSet<T> out;
    out.frame = frame_;
    out.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      bool accepted = false;
      for (std::uint64_t attempt = 0; attempt < 1000000; ++attempt) {
        Vector3<T> y;
        for (int k = 0; k < 3; ++k) y[k] = proposal_scale[k] * T(rng.normal());
        const T norm = y.norm();
        if (norm < T(1e-12)) continue;
        y /= norm;
        const T s = concentration[0] * y[0] * y[0] + concentration[1] * y[1] * y[1] +
                    concentration[2] * y[2] * y[2];
        const T log_accept = -s + T(1.5) * std::log1p(T(2) * s / b) + log_bound;
        if (std::log(T(rng.uniform_pos())) < log_accept) {
          out.points.push_back(frame_ * y);
          accepted = true;
          break;
        }
      }
      if (!accepted) throw std::runtime_error("sample: rejection loop exceeded iteration cap");
    }
    return out;
  }

 private:
  Bingham2D() = default;

  static void require_unit(const Vector3<T>& v, const char* what) {
    if (!v.allFinite() || std::abs(v.norm() - T(1)) > T(1e-9)) {
      throw std::invalid_argument(std::string(what) + ": expected a unit vector");
    }
  }

  Matrix3<T> parameter_;
  Matrix3<T> shifted_;
  Matrix3<T> frame_;
  Vector3<T> lambda_;
  T log_norm_const_{};
};

using Bingham2Dd = Bingham2D<double>;

/// Negative log-likelihood  -v^T A v + ln C(lambda(A)).  Invariant under
/// eigenvalue shifts of A, so it is evaluated on the shifted spectrum.
template <typename T>
T nll(const Matrix3<T>& A, const Vector3<T>& v_gt, const NormConstPlan<T>& plan = NormConstPlan<T>{}) {
  if (!v_gt.allFinite() || std::abs(v_gt.norm() - T(1)) > T(1e-9)) {
    throw std::invalid_argument("nll: expected a unit ground-truth vector");
  }
  const EigSym3<T> eig = eig_sym3(A);
  Vector3<T> shifted = eig.lambda;
  const T shift = shifted[2];
  shifted.array() -= shift;
  shifted[2] = T(0);
  return -v_gt.dot(A * v_gt) + shift + std::log(plan.value(shifted));
}

template <typename T>
T nll(const Matrix3<T>& A, const Vector3<T>& v_gt, const QuadratureConfig<T>& cfg) {
  return nll(A, v_gt, NormConstPlan<T>(cfg));
}

template <typename T>
struct NllGrad {
  Matrix3<T> grad;
  /// True when eigenvalue gaps fell below the spectral-gradient floor and a
  /// symmetrized finite-difference fallback was used instead.
  bool used_finite_difference = false;
};

/// Gradient of nll with respect to the (symmetric) parameter matrix:
/// dL/dA = -v v^T + D diag((dC/dlambda)/C) D^T. The eigenvector formula is
/// ill-conditioned when eigenvalues nearly coincide, so below a gap of 1e-8
/// the gradient is taken by central differences over the packed coordinates.
template <typename T>
NllGrad<T> nll_grad_A(const Matrix3<T>& A, const Vector3<T>& v_gt,
                      const NormConstPlan<T>& plan = NormConstPlan<T>{}) {
  if (!v_gt.allFinite() || std::abs(v_gt.norm() - T(1)) > T(1e-9)) {
    throw std::invalid_argument("nll_grad_A: expected a unit ground-truth vector");
  }
  const EigSym3<T> eig = eig_sym3(A);
  const T min_gap = std::min(eig.lambda[1] - eig.lambda[0], eig.lambda[2] - eig.lambda[1]);

  NllGrad<T> out;
  if (min_gap > T(1e-8)) {
    Vector3<T> shifted = eig.lambda;
    shifted.array() -= shifted[2];
    shifted[2] = T(0);
    const auto [value, grad] = plan.value_and_grad(shifted);
    const Vector3<T> moments = grad / value;  // E[c_k^2], shift-invariant
    Matrix3<T> spectral = eig.vectors * moments.asDiagonal() * eig.vectors.transpose();
    spectral = ((spectral + spectral.transpose()) / T(2)).eval();
    out.grad = -v_gt * v_gt.transpose() + spectral;
  } else {
    out.used_finite_difference = true;
    const T step = T(1e-4);
    Vector6<T> packed = triu_pack(A);
    Vector6<T> packed_grad;
    for (int j = 0; j < 6; ++j) {
      Vector6<T> hi = packed, lo = packed;
      hi[j] += step;
      lo[j] -= step;
      packed_grad[j] = (nll(triu_unpack(hi), v_gt, plan) - nll(triu_unpack(lo), v_gt, plan)) /
                       (T(2) * step);
    }
    // Packed off-diagonal derivatives perturb both mirror entries, so the
    // matrix gradient halves them.
    out.grad << packed_grad[0], packed_grad[1] / T(2), packed_grad[2] / T(2),
        packed_grad[1] / T(2), packed_grad[3], packed_grad[4] / T(2),
        packed_grad[2] / T(2), packed_grad[4] / T(2), packed_grad[5];
  }
  return out;
}

template <typename T>
NllGrad<T> nll_grad_A(const Matrix3<T>& A, const Vector3<T>& v_gt, const QuadratureConfig<T>& cfg) {
  return nll_grad_A(A, v_gt, NormConstPlan<T>(cfg));
}

/// Gaussian/von-Mises asymptotic approximation of the angle theta such that
/// the band {x : |(D^T x)_axis| <= sin(theta/2)} carries probability p:
/// theta = 2 erf^{-1}(p) / sqrt(lambda3 - lambda_axis). axis is 1-based in {1, 2}.
template <typename T>
T percentile_theta_approx(const Vector3<T>& lambda, int axis, T p) {
  if (axis != 1 && axis != 2) throw std::invalid_argument("percentile: axis must be 1 or 2");
  if (!(p > T(0) && p < T(1))) throw std::invalid_argument("percentile: p must lie in (0, 1)");
  const T gap = lambda[2] - lambda[axis - 1];
  if (!(gap > T(0))) throw std::domain_error("percentile: degenerate axis (zero eigenvalue gap)");
  return T(2) * erf_inv(p) / std::sqrt(gap);
}

/// Empirical counterpart: theta = 2 asin(q_p) where q_p is the p-quantile of
/// |(D^T x)_axis| over the samples. p = 1 returns pi (the band is the whole
/// sphere).
template <typename T>
T percentile_theta_empirical(const SampleSet<T>& samples, int axis, T p) {
  if (axis != 1 && axis != 2) throw std::invalid_argument("percentile: axis must be 1 or 2");
  if (!(p > T(0) && p <= T(1))) throw std::invalid_argument("percentile: p must lie in (0, 1]");
  if (!samples.frame) throw std::invalid_argument("percentile: sample set carries no frame");
  if (samples.points.size() < 100) {
    throw std::invalid_argument("percentile: need at least 100 samples");
  }
  if (p >= T(1)) return T(kPi);
  const Vector3<T> d = samples.frame->col(axis - 1);
  std::vector<T> coords;
  coords.reserve(samples.points.size());
  for (const auto& x : samples.points) coords.push_back(std::abs(d.dot(x)));
  const std::size_t n = coords.size();
  std::size_t idx = std::size_t(std::ceil(p * T(n)));
  idx = std::min(n, std::max<std::size_t>(idx, 1)) - 1;
  std::nth_element(coords.begin(), coords.begin() + idx, coords.end());
  const T q = std::min(coords[idx], T(1));
  return T(2) * std::asin(q);
}

}  // namespace symrot
