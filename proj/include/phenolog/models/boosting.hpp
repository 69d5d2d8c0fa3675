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

// Squared-loss gradient boosting: each stage fits a shallow regression tree to
// the current residuals, prediction = mean(y) + learning_rate * sum(stages).

#include <algorithm>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "phenolog/models/tree.hpp"

namespace phenolog::models {

struct BoostingConfig {
  std::size_t n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  std::size_t min_leaf = 2;
  double subsample = 1.0;
};

struct GradientBoosting {
  double base = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> stages;

  double predict(const Matrix& x, Eigen::Index r) const {
    double out = base;
    for (const auto& t : stages) out += learning_rate * t.predict(x, r);
    return out;
  }
  Vector predict(const Matrix& x) const {
    Vector out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out[r] = predict(x, r);
    return out;
  }
};

// `stage_loss`, when given, receives the training MSE after every stage
// (index 0 is the constant model).
inline GradientBoosting fit_gradient_boosting(const Matrix& x, std::span<const double> y,
                                              const BoostingConfig& cfg,
                                              std::uint64_t seed,
                                              std::vector<double>* stage_loss = nullptr) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n != y.size()) throw InputError("row count mismatch");
  if (n == 0) throw InputError("cannot train on zero rows");
  if (!(cfg.learning_rate > 0.0) || !(cfg.subsample > 0.0 && cfg.subsample <= 1.0))
    throw InputError("invalid boosting configuration");
  GradientBoosting gb;
  gb.learning_rate = cfg.learning_rate;
  gb.base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> pred(n, gb.base), resid(n);
  auto mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
    return s / static_cast<double>(n);
  };
  if (stage_loss) stage_loss->assign(1, mse());

  TreeConfig tc;
  tc.criterion = SplitCriterion::kSquaredError;
  tc.max_depth = cfg.max_depth;
  tc.min_leaf = cfg.min_leaf;
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> all(n);
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  const auto sample_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(cfg.subsample * static_cast<double>(n) + 0.5));
  for (std::size_t s = 0; s < cfg.n_estimators; ++s) {
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - pred[i];
    std::vector<Eigen::Index> rows = all;
    if (sample_size < n) {
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(sample_size);
      std::sort(rows.begin(), rows.end());
    }
    gb.stages.push_back(build_tree(x, resid, std::move(rows), tc, rng));
    for (std::size_t i = 0; i < n; ++i)
      pred[i] += gb.learning_rate * gb.stages.back().predict(x, static_cast<Eigen::Index>(i));
    if (stage_loss) stage_loss->push_back(mse());
  }
  return gb;
}

}  // namespace phenolog::models
