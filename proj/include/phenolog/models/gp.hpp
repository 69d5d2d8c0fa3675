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

// Gaussian-process score regression.
//
//   f ~ GP(m, k),  m(x) = y1 (the earlier score),
//   k(x, x') = exp(-|x - x'|^2 / (2 l)),
//   y2 = f(x) + eps,  eps ~ N(0, sigma^2).
//
// l multiplies |x - x'|^2 directly, so it acts as a squared length scale.
// Predictions are scored through posterior sample paths ("traces").

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "phenolog/error.hpp"
#include "phenolog/models/preprocess.hpp"

namespace phenolog::models {

struct GPConfig {
  std::optional<double> length_scale;  // default: median heuristic
  double noise_std = 1.0;
  int n_traces = 100;
  double jitter = 1e-8;
  bool tune = false;  // grid search on the log marginal likelihood
};

inline constexpr double kMaxJitter = 1e-4;

inline double gp_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                        const Eigen::Ref<const Eigen::RowVectorXd>& b, double ell) {
  return std::exp(-(a - b).squaredNorm() / (2.0 * ell));
}

inline Matrix gp_kernel_matrix(const Matrix& a, const Matrix& b, double ell) {
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = gp_kernel(a.row(i), b.row(j), ell);
  return k;
}

// Median of the pairwise squared distances between training rows (1 when
// undefined or zero).
inline double median_heuristic(const Matrix& x) {
  std::vector<double> d;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j)
      d.push_back((x.row(i) - x.row(j)).squaredNorm());
  const double m = detail::median(std::move(d));
  return m > 0.0 && std::isfinite(m) ? m : 1.0;
}

namespace detail {

// Cholesky of a + j I, escalating j from `start` by factors of 10 up to
// kMaxJitter. `start` = 0 tries the bare matrix first.
inline Eigen::LLT<Matrix> robust_cholesky(const Matrix& a, double start, double* used) {
  double j = start;
  const auto n = a.rows();
  while (true) {
    Eigen::LLT<Matrix> llt(a + j * Matrix::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      if (used) *used = j;
      return llt;
    }
    if (j >= kMaxJitter) break;
    j = j == 0.0 ? 1e-8 : std::min(kMaxJitter, j * 10.0);
  }
  throw NumericalError("covariance matrix not positive definite after jitter escalation");
}

}  // namespace detail

struct GPPrediction {
  Vector mean;            // posterior mean of f
  Vector std;             // posterior std of f
  Vector predictive_std;  // includes observation noise
  Matrix traces;          // n_traces x m sample paths of f
  Vector trace_mean;      // per-point average over traces (the scored estimate)
};

// Trained state: training inputs and residuals r = y2 - y1 with the solve
// (K + sigma^2 I)^{-1} r cached.
struct GaussianProcess {
  Matrix x;
  Vector residual;
  double length_scale = 1.0;
  double noise_std = 1.0;
  double jitter = 1e-8;
  int n_traces = 100;
  Vector alpha;
  Eigen::LLT<Matrix> factor;

  void refresh() {
    if (x.rows() == 0) {
      alpha.resize(0);
      return;
    }
    const Matrix k = gp_kernel_matrix(x, x, length_scale) +
                     noise_std * noise_std * Matrix::Identity(x.rows(), x.rows());
    factor = detail::robust_cholesky(k, 0.0, nullptr);
    alpha = factor.solve(residual);
  }

  double log_marginal_likelihood() const {
    if (x.rows() == 0) return 0.0;
    const Matrix l = factor.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    return -0.5 * residual.dot(alpha) - 0.5 * log_det -
           0.5 * static_cast<double>(x.rows()) * std::log(2.0 * M_PI);
  }

  GPPrediction predict(const Matrix& x_test, const Vector& y1_test,
                       std::uint64_t seed) const {
    if (x_test.rows() != y1_test.size()) throw InputError("test row count mismatch");
    if (x.rows() > 0 && x_test.cols() != x.cols())
      throw InputError("test feature dimension mismatch");
    const auto m = x_test.rows();
    Matrix cov = gp_kernel_matrix(x_test, x_test, length_scale);
    GPPrediction out;
    out.mean = y1_test;
    if (x.rows() > 0) {
      const Matrix k_star = gp_kernel_matrix(x, x_test, length_scale);  // n x m
      out.mean += k_star.transpose() * alpha;
      const Matrix v = factor.matrixL().solve(k_star);
      cov.noalias() -= v.transpose() * v;
    }
    cov = 0.5 * (cov + cov.transpose());
    out.std.resize(m);
    out.predictive_std.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double var = std::max(0.0, cov(i, i));
      out.std[i] = std::sqrt(var);
      out.predictive_std[i] = std::sqrt(var + noise_std * noise_std);
    }
    out.traces.resize(n_traces, m);
    if (m > 0 && n_traces > 0) {
      const auto chol = detail::robust_cholesky(cov, jitter, nullptr);
      const Matrix l = chol.matrixL();
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector z(m);
      for (int t = 0; t < n_traces; ++t) {
        for (Eigen::Index i = 0; i < m; ++i) z[i] = normal(rng);
        out.traces.row(t) = (out.mean + l * z).transpose();
      }
      out.trace_mean = out.traces.colwise().mean().transpose();
    } else {
      out.trace_mean = out.mean;
    }
    return out;
  }
};

inline GaussianProcess fit_gp(const Matrix& x, const Vector& y1, const Vector& y2,
                              const GPConfig& cfg) {
  if (x.rows() != y1.size() || x.rows() != y2.size())
    throw InputError("training row count mismatch");
  if (cfg.noise_std < 0.0) throw InputError("GP noise std must be nonnegative");
  if (cfg.length_scale && !(*cfg.length_scale > 0.0))
    throw InputError("GP length scale must be positive");
  if (cfg.n_traces <= 0) throw InputError("GP trace count must be positive");
  if (!x.allFinite() || !y1.allFinite() || !y2.allFinite())
    throw InputError("GP inputs must be finite");
  GaussianProcess gp;
  gp.x = x;
  gp.residual = y2 - y1;
  gp.jitter = cfg.jitter;
  gp.n_traces = cfg.n_traces;
  gp.noise_std = cfg.noise_std;
  const double median = median_heuristic(x);
  gp.length_scale = cfg.length_scale.value_or(median);
  if (cfg.tune && x.rows() > 0) {
    double best = -std::numeric_limits<double>::infinity();
    double best_ell = gp.length_scale, best_sigma = gp.noise_std;
    for (const double f : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      for (const double s : {0.5, 1.0, 2.0}) {
        gp.length_scale = median * f;
        gp.noise_std = s;
        gp.refresh();
        const double lml = gp.log_marginal_likelihood();
        if (lml > best) {
          best = lml;
          best_ell = gp.length_scale;
          best_sigma = s;
        }
      }
    }
    gp.length_scale = best_ell;
    gp.noise_std = best_sigma;
  }
  gp.refresh();
  return gp;
}

// One-shot posterior on explicit train/test sets (inputs already scaled).
inline GPPrediction gp_posterior_predict(const Matrix& x_train, const Vector& y1_train,
                                         const Vector& y2_train, const Matrix& x_test,
                                         const Vector& y1_test, const GPConfig& cfg,
                                         std::uint64_t seed) {
  return fit_gp(x_train, y1_train, y2_train, cfg).predict(x_test, y1_test, seed);
}

}  // namespace phenolog::models
