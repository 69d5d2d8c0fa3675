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

#include <cmath>
#include <span>

#include "phenolog/models/preprocess.hpp"

namespace phenolog::models {

inline constexpr double kOlsRidgeFallback = 1e-6;

struct LinearModel {
  Vector coefficients;
  double intercept = 0.0;
  bool ridge_fallback = false;

  Vector predict(const Matrix& x) const {
    return ((x * coefficients).array() + intercept).matrix();
  }
};

// Least squares on a design matrix that already contains any intercept
// column. With at least as many rows as columns: complete orthogonal
// decomposition (minimum-norm solution if rank deficient). Otherwise a tiny
// ridge penalty keeps the system solvable.
inline Vector least_squares(const Matrix& design, const Vector& y, bool* ridge = nullptr) {
  if (!design.allFinite() || !y.allFinite())
    throw InputError("least squares inputs must be finite");
  if (design.rows() >= design.cols()) {
    if (ridge) *ridge = false;
    return design.completeOrthogonalDecomposition().solve(y);
  }
  if (ridge) *ridge = true;
  const Matrix gram = design.transpose() * design +
                      kOlsRidgeFallback * Matrix::Identity(design.cols(), design.cols());
  return gram.ldlt().solve(design.transpose() * y);
}

inline LinearModel fit_ols(const Matrix& x, std::span<const double> y) {
  const auto n = x.rows();
  if (static_cast<std::size_t>(n) != y.size()) throw InputError("row count mismatch");
  if (n == 0) throw InputError("cannot train on zero rows");
  Matrix design(n, x.cols() + 1);
  design << Vector::Ones(n), x;
  LinearModel m;
  const Vector beta = least_squares(
      design, Eigen::Map<const Vector>(y.data(), n), &m.ridge_fallback);
  m.intercept = beta[0];
  m.coefficients = beta.tail(x.cols());
  return m;
}

}  // namespace phenolog::models
