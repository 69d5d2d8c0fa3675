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

// CART trees on dense rows. Classification trees split on Gini impurity of a
// 0/1 target; regression trees on squared error. Rows go left when
// x[feature] <= threshold.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "phenolog/models/preprocess.hpp"
#include "phenolog/random.hpp"

namespace phenolog::models {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf: class-1 fraction or mean target

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const double* row, Eigen::Index stride) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = row[n.feature * stride] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }
  double predict(const Matrix& x, Eigen::Index r) const {
    return predict(&x(r, 0), x.rows());
  }
  int depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].is_leaf()) continue;
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
      best = std::max(best, d[i] + 1);
    }
    return best;
  }
  friend bool operator==(const Tree&, const Tree&) = default;
};

enum class SplitCriterion { kGini, kSquaredError };

struct TreeConfig {
  SplitCriterion criterion = SplitCriterion::kGini;
  int max_depth = -1;        // -1: unlimited
  std::size_t min_leaf = 1;  // minimum rows per child
  std::size_t mtry = 0;      // features tried per node; 0 = all
};

namespace detail {

struct NodeStats {
  double n = 0, sum = 0, sum_sq = 0;
  void add(double y) { n += 1; sum += y; sum_sq += y * y; }
  void remove(double y) { n -= 1; sum -= y; sum_sq -= y * y; }
  // Impurity times node size: n * gini for 0/1 targets, SSE otherwise.
  double cost(SplitCriterion c) const {
    if (n <= 0) return 0.0;
    if (c == SplitCriterion::kGini) return 2.0 * sum * (n - sum) / n;
    return std::max(0.0, sum_sq - sum * sum / n);
  }
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, const TreeConfig& cfg,
              std::mt19937_64& rng)
      : x_(x), y_(y), cfg_(cfg), rng_(rng) {}

  Tree build(std::vector<Eigen::Index> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<Eigen::Index> rows, int depth) {
    NodeStats stats;
    for (const auto r : rows) stats.add(y_[static_cast<std::size_t>(r)]);
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{-1, 0.0, -1, -1, stats.sum / stats.n});

    const double parent_cost = stats.cost(cfg_.criterion);
    if ((cfg_.max_depth >= 0 && depth >= cfg_.max_depth) ||
        rows.size() < 2 * cfg_.min_leaf || parent_cost <= 1e-12)
      return id;

    // Features are visited in random order. At least mtry are evaluated; if
    // none of those admits a split, the search continues through the rest.
    const auto p = static_cast<std::size_t>(x_.cols());
    std::vector<std::size_t> features(p);
    std::iota(features.begin(), features.end(), std::size_t{0});
    const std::size_t mtry = cfg_.mtry == 0 ? p : std::min(cfg_.mtry, p);
    if (mtry < p) std::shuffle(features.begin(), features.end(), rng_);

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_cost = parent_cost - 1e-12;
    std::vector<Eigen::Index> order(rows);
    for (std::size_t k = 0; k < p; ++k) {
      if (k >= mtry && best_feature >= 0) break;
      const auto f = static_cast<Eigen::Index>(features[k]);
      std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return x_(a, f) < x_(b, f) || (x_(a, f) == x_(b, f) && a < b);
      });
      NodeStats left, right = stats;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const double yi = y_[static_cast<std::size_t>(order[i])];
        left.add(yi);
        right.remove(yi);
        const double lo = x_(order[i], f), hi = x_(order[i + 1], f);
        if (!(lo < hi)) continue;
        if (left.n < static_cast<double>(cfg_.min_leaf) ||
            right.n < static_cast<double>(cfg_.min_leaf))
          continue;
        const double cost = left.cost(cfg_.criterion) + right.cost(cfg_.criterion);
        if (cost < best_cost) {
          best_cost = cost;
          best_feature = static_cast<int>(f);
          double mid = lo + 0.5 * (hi - lo);
          if (!(mid < hi)) mid = lo;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<Eigen::Index> left_rows, right_rows;
    for (const auto r : rows)
      (x_(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left_rows), depth + 1);
    const int r = grow(std::move(right_rows), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Matrix& x_;
  std::span<const double> y_;
  const TreeConfig& cfg_;
  std::mt19937_64& rng_;
  Tree tree_;
};

}  // namespace detail

inline Tree build_tree(const Matrix& x, std::span<const double> y,
                       std::vector<Eigen::Index> rows, const TreeConfig& cfg,
                       std::mt19937_64& rng) {
  if (rows.empty()) throw InputError("cannot grow a tree on zero rows");
  return detail::TreeBuilder(x, y, cfg, rng).build(std::move(rows));
}

using phenolog::derive_seed;

inline nlohmann::json to_json(const Tree& t) {
  auto nodes = nlohmann::json::array();
  for (const auto& n : t.nodes)
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

inline Tree tree_from_json(const nlohmann::json& j) {
  Tree t;
  for (const auto& n : j) {
    if (!n.is_array() || n.size() != 5) throw InputError("malformed tree node");
    t.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(),
                       n[3].get<int>(), n[4].get<double>()});
  }
  const auto count = static_cast<int>(t.nodes.size());
  if (count == 0) throw InputError("empty tree");
  // Children always follow their parent, which also rules out cycles.
  for (int i = 0; i < count; ++i) {
    const auto& n = t.nodes[static_cast<std::size_t>(i)];
    if (!n.is_leaf() &&
        (n.left <= i || n.left >= count || n.right <= i || n.right >= count))
      throw InputError("tree node child index out of range");
  }
  return t;
}

}  // namespace phenolog::models
