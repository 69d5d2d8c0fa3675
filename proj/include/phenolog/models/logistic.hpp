/*
 * Copyright 2026 The phenolog Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// L2-regularized logistic regression. Objective (per row):
//
//   J(w, b) = (1/n) [ sum_i log(1 + exp(z_i)) - y_i z_i + (l2/2) |w|^2 ],
//   z_i = x_i . w + b,
//
// with the intercept b unpenalized. Minimized by accelerated gradient descent
// with step 1/L, where L bounds the Hessian, and adaptive restart.

#include <cmath>
#include <span>

#include <Eigen/Eigenvalues>

#include "phenolog/models/preprocess.hpp"

namespace phenolog::models {

struct LogisticConfig {
  double l2 = 1.0;
  int max_iterations = 10000;
  double gradient_tolerance = 1e-6;
};

struct LogisticModel {
  Vector weights;
  double intercept = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;

  double predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    const double z = row.dot(weights.transpose()) + intercept;
    return 1.0 / (1.0 + std::exp(-z));
  }
  Vector predict_proba(const Matrix& x) const {
    const Vector z = (x * weights).array() + intercept;
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }
};

namespace detail {

inline double log1p_exp(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace detail

inline double logistic_objective(const Matrix& x, std::span<const double> y,
                                 const Vector& w, double b, double l2) {
  const Vector z = (x * w).array() + b;
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    s += detail::log1p_exp(z[i]) - y[static_cast<std::size_t>(i)] * z[i];
  return (s + 0.5 * l2 * w.squaredNorm()) / static_cast<double>(x.rows());
}

inline LogisticModel fit_logistic(const Matrix& x, std::span<const double> y,
                                  const LogisticConfig& cfg = {}) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (static_cast<std::size_t>(n) != y.size()) throw InputError("row count mismatch");
  if (n == 0) throw InputError("cannot train on zero rows");
  if (cfg.l2 < 0.0) throw InputError("l2 penalty must be nonnegative");
  const Eigen::Map<const Vector> yv(y.data(), n);

  // Lipschitz constant of the gradient: (lambda_max([X 1]'[X 1]) / 4 + l2) / n.
  Matrix design(n, p + 1);
  design << x, Vector::Ones(n);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(design.transpose() * design,
                                                  Eigen::EigenvaluesOnly);
  const double lipschitz =
      (0.25 * eig.eigenvalues().maxCoeff() + cfg.l2) / static_cast<double>(n);
  const double step = 1.0 / lipschitz;

  auto gradient = [&](const Vector& theta) {
    const Vector z = design * theta;
    const Vector prob = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    Vector g = design.transpose() * (prob - yv);
    g.head(p) += cfg.l2 * theta.head(p);
    return Vector(g / static_cast<double>(n));
  };
  auto objective = [&](const Vector& theta) {
    return logistic_objective(x, y, theta.head(p), theta[p], cfg.l2);
  };

  Vector theta = Vector::Zero(p + 1);
  Vector momentum_point = theta;
  double t = 1.0;
  double f_prev = objective(theta);
  LogisticModel model;
  int it = 0;
  Vector g = gradient(theta);
  for (; it < cfg.max_iterations; ++it) {
    if (g.norm() < cfg.gradient_tolerance) break;
    const Vector next = momentum_point - step * gradient(momentum_point);
    const double f_next = objective(next);
    if (f_next > f_prev) {
      // Restart momentum; a plain gradient step from theta always descends.
      t = 1.0;
      momentum_point = theta;
      theta = theta - step * g;
      f_prev = objective(theta);
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      momentum_point = next + ((t - 1.0) / t_next) * (next - theta);
      theta = next;
      t = t_next;
      f_prev = f_next;
    }
    g = gradient(theta);
  }
  model.weights = theta.head(p);
  model.intercept = theta[p];
  model.iterations = it;
  model.gradient_norm = g.norm();
  return model;
}

}  // namespace phenolog::models
