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

#include <random>
#include <span>
#include <vector>

#include "phenolog/models/tree.hpp"

namespace phenolog::models {

struct ForestConfig {
  std::size_t n_trees = 200;
  int max_depth = -1;
  std::size_t min_leaf = 1;
  std::size_t mtry = 4;
  bool bootstrap = true;
};

struct RandomForest {
  std::vector<Tree> trees;

  // Fraction of trees whose leaf votes for class 1 (leaf class-1 share > 0.5).
  double predict_proba(const Matrix& x, Eigen::Index r) const {
    if (trees.empty()) return 0.0;
    int votes = 0;
    for (const auto& t : trees) votes += t.predict(x, r) > 0.5 ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(trees.size());
  }
  Vector predict_proba(const Matrix& x) const {
    Vector out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out[r] = predict_proba(x, r);
    return out;
  }
};

// Gini CART trees on bootstrap resamples; tree i draws from its own stream
// derived from (seed, i).
inline RandomForest fit_random_forest(const Matrix& x, std::span<const double> y,
                                      const ForestConfig& cfg, std::uint64_t seed) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw InputError("row count mismatch");
  if (x.rows() == 0) throw InputError("cannot train on zero rows");
  TreeConfig tc;
  tc.criterion = SplitCriterion::kGini;
  tc.max_depth = cfg.max_depth;
  tc.min_leaf = cfg.min_leaf;
  tc.mtry = cfg.mtry;
  RandomForest forest;
  forest.trees.reserve(cfg.n_trees);
  const auto n = x.rows();
  for (std::size_t i = 0; i < cfg.n_trees; ++i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    if (cfg.bootstrap) {
      std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      for (Eigen::Index r = 0; r < n; ++r) rows[static_cast<std::size_t>(r)] = r;
    }
    forest.trees.push_back(build_tree(x, y, std::move(rows), tc, rng));
  }
  return forest;
}

}  // namespace phenolog::models
