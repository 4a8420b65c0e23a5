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
#include <stdexcept>
#include <vector>

#include "symrot/bingham2d.hpp"
#include "symrot/mat3.hpp"

namespace symrot {

template <typename T>
struct FitOptions {
  int max_iters = 200;
  T step = T(1);          // initial line-search step
  T tol = T(1e-7);        // gradient-norm stopping threshold
  T lambda_floor = T(-1e4);

  void validate() const {
    if (max_iters < 1) throw std::invalid_argument("fit options: max_iters must be >= 1");
    if (!(step > T(0))) throw std::invalid_argument("fit options: step must be positive");
    if (!(tol > T(0))) throw std::invalid_argument("fit options: tol must be positive");
    if (!(lambda_floor < T(0))) throw std::invalid_argument("fit options: lambda_floor must be negative");
  }
};

using FitOptionsd = FitOptions<double>;

template <typename T>
struct FitReport {
  Bingham2D<T> dist;
  int iters;
  T final_grad_norm;
  T nll_per_sample;
  bool converged;
  /// Per-sample NLL at the start and after every accepted step.
  std::vector<T> nll_history;
};

using FitReportd = FitReport<double>;

/// Second-moment matrix S = (1/n) sum x x^T of unit samples; the Bingham
/// sufficient statistic. Symmetric positive semidefinite with unit trace.
template <typename T>
Matrix3<T> scatter_matrix(const SampleSet<T>& samples) {
  if (samples.points.size() < 3) {
    throw std::invalid_argument("scatter_matrix: need at least 3 samples");
  }
  Matrix3<T> S = Matrix3<T>::Zero();
  for (const auto& x : samples.points) S += x * x.transpose();
  return S / T(samples.points.size());
}

/// Maximum-likelihood Bingham fit.
///
/// The frame is fixed to the scatter eigenvectors (eigenvalues ascending,
/// matched to the lambda ordering), which is optimal for any ordered lambda.
/// With lambda3 pinned at 0, the per-sample NLL
///   f(lambda) = -lambda1 s1 - lambda2 s2 + ln C(lambda)
/// is minimized over (lambda1, lambda2) by projected gradient descent with
/// an Armijo backtracking line search; at a stationary point the moment
/// identity dlnC/dlambda_i = s_i holds.
template <typename T>
FitReport<T> fit_mle(const SampleSet<T>& samples, const FitOptions<T>& opts = {},
                     const QuadratureConfig<T>& cfg = {}) {
  opts.validate();
  if (samples.points.size() < 10) {
    throw std::invalid_argument("fit_mle: need at least 10 samples");
  }
  const NormConstPlan<T> plan(cfg);
  const EigSym3<T> scatter = eig_sym3<T>(scatter_matrix(samples));
  const Vector3<T>& s = scatter.lambda;

  auto project = [&](T v) { return std::clamp(v, opts.lambda_floor, T(0)); };
  auto objective = [&](const Vector3<T>& lam) {
    return -lam[0] * s[0] - lam[1] * s[1] + std::log(plan.value(lam));
  };

  // Moment-matched start: for a concentrated axis, E[c_i^2] ~ 1/(2 gap_i).
  const T eps = T(1e-9);
  Vector3<T> lambda(project(T(0.5) * (T(1) / std::max(s[2], eps) - T(1) / std::max(s[0], eps))),
                    project(T(0.5) * (T(1) / std::max(s[2], eps) - T(1) / std::max(s[1], eps))),
                    T(0));

  FitReport<T> report{Bingham2D<T>::analyze(Matrix3<T>::Zero(), plan), 0, T(0), T(0), false, {}};
  T f = objective(lambda);
  report.nll_history.push_back(f);
  T step = opts.step;
  T grad_norm = T(0);
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    const auto [value, grad_c] = plan.value_and_grad(lambda);
    const Vector3<T> moments = grad_c / value;
    const Eigen::Matrix<T, 2, 1> grad(moments[0] - s[0], moments[1] - s[1]);
    grad_norm = grad.norm();
    if (grad_norm <= opts.tol) {
      report.converged = true;
      break;
    }
    bool accepted = false;
    while (step >= T(1e-14)) {
      Vector3<T> candidate(project(lambda[0] - step * grad[0]),
                           project(lambda[1] - step * grad[1]), T(0));
      const T dx0 = candidate[0] - lambda[0];
      const T dx1 = candidate[1] - lambda[1];
      const T f_new = objective(candidate);
      if (f_new <= f - T(1e-4) * (dx0 * dx0 + dx1 * dx1) / step) {
        lambda = candidate;
        f = f_new;
        report.nll_history.push_back(f);
        step = std::min(step * T(2), T(1e4));
        accepted = true;
        break;
      }
      step /= T(2);
    }
    if (!accepted) break;  // line search stalled at numerical resolution
  }

  const Matrix3<T> A =
      scatter.vectors * lambda.asDiagonal() * scatter.vectors.transpose();
  report.dist = Bingham2D<T>::analyze(A, plan);
  report.iters = iter;
  report.final_grad_norm = grad_norm;
  report.nll_per_sample = f;
  return report;
}

}  // namespace symrot
