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

// Cross-validation protocols and metrics.
//
// Rows are (participant, round) segments. Under the grouped strategies all
// rows of one participant share a fold. The significant-change holdout keeps
// every participant whose score moved by 5 or more out of all training sets
// and puts them in every test set.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phenolog/error.hpp"
#include "phenolog/features.hpp"
#include "phenolog/ingest.hpp"
#include "phenolog/io.hpp"
#include "phenolog/models/artifact.hpp"

namespace phenolog::eval {

using models::Matrix;
using models::Vector;

enum class Task { kClassify, kPredict };
enum class FoldStrategy { kGroupedStratified, kSignificantChangeHoldout, kNoGroup };

inline const char* to_string(Task t) { return t == Task::kClassify ? "classify" : "predict"; }
inline const char* to_string(FoldStrategy s) {
  switch (s) {
    case FoldStrategy::kGroupedStratified: return "grouped";
    case FoldStrategy::kSignificantChangeHoldout: return "holdout";
    case FoldStrategy::kNoGroup: return "no-group";
  }
  return "?";
}
inline Task parse_task(const std::string& s) {
  if (s == "classify") return Task::kClassify;
  if (s == "predict") return Task::kPredict;
  throw InputError("unknown task '" + s + "'");
}
inline FoldStrategy parse_strategy(const std::string& s) {
  if (s == "grouped") return FoldStrategy::kGroupedStratified;
  if (s == "holdout") return FoldStrategy::kSignificantChangeHoldout;
  if (s == "no-group") return FoldStrategy::kNoGroup;
  throw InputError("unknown strategy '" + s + "'");
}

inline constexpr int kSignificantChange = 5;
inline constexpr int kHoldoutFold = -1;

// A row to be assigned: its participant, round and stratification label.
struct FoldRow {
  std::string participant_id;
  int round = 1;
  int label = 0;
};

// Rows of a task, derived from participant records. Classification: every
// round with a score (label from that round's score). Prediction: only
// participants with both rounds (label from the binarized follow-up score).
inline std::vector<FoldRow> task_rows(std::span<const ParticipantRecord> records, Task task) {
  std::vector<FoldRow> rows;
  for (const auto& r : records) {
    if (task == Task::kClassify) {
      rows.push_back({r.participant_id, 1, models::label_value(r.y1)});
      if (r.y2 && r.round2_window) rows.push_back({r.participant_id, 2, models::label_value(*r.y2)});
    } else if (r.y2 && r.round2_window) {
      rows.push_back({r.participant_id, 2, models::label_value(*r.y2)});
    }
  }
  return rows;
}

struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  FoldStrategy strategy = FoldStrategy::kGroupedStratified;
  // Group key -> fold index, or kHoldoutFold for rows tested in every fold.
  // The key is the participant id, or "id#round" under kNoGroup.
  std::map<std::string, int> assignments;

  static std::string group_key(FoldStrategy s, const std::string& pid, int round) {
    return s == FoldStrategy::kNoGroup ? pid + "#" + std::to_string(round) : pid;
  }
  int fold_of(const std::string& pid, int round) const {
    const auto it = assignments.find(group_key(strategy, pid, round));
    if (it == assignments.end()) throw InputError("participant '" + pid + "' has no fold");
    return it->second;
  }
  bool in_test(const std::string& pid, int round, int fold) const {
    const int f = fold_of(pid, round);
    return f == fold || f == kHoldoutFold;
  }
  bool in_train(const std::string& pid, int round, int fold) const {
    const int f = fold_of(pid, round);
    return f != fold && f != kHoldoutFold;
  }
};

// Greedy stratified bin packing. Groups are shuffled by the seed, ordered by
// size (largest first) and each is placed in the fold where it least
// increases the squared deviation of per-class counts from their per-fold
// targets; ties go to the smaller fold, then the lower index.
inline FoldPlan make_folds(std::span<const ParticipantRecord> records, int k, std::uint64_t seed,
                           FoldStrategy strategy, Task task = Task::kClassify) {
  if (k < 2) throw InputError("need at least 2 folds");
  if (records.empty()) throw InputError("no participant records");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.strategy = strategy;

  std::set<std::string> holdout;
  if (strategy == FoldStrategy::kSignificantChangeHoldout) {
    for (const auto& r : records)
      if (r.y2 && std::abs(*r.y2 - r.y1) >= kSignificantChange) holdout.insert(r.participant_id);
  }

  struct Group {
    std::string key;
    std::array<int, 2> counts{};
    int size() const { return counts[0] + counts[1]; }
  };
  std::map<std::string, Group> by_key;
  std::array<int, 2> totals{};
  for (const auto& row : task_rows(records, task)) {
    if (holdout.count(row.participant_id)) {
      plan.assignments[FoldPlan::group_key(strategy, row.participant_id, row.round)] = kHoldoutFold;
      continue;
    }
    auto& g = by_key[FoldPlan::group_key(strategy, row.participant_id, row.round)];
    g.key = FoldPlan::group_key(strategy, row.participant_id, row.round);
    ++g.counts[static_cast<std::size_t>(row.label)];
    ++totals[static_cast<std::size_t>(row.label)];
  }
  if (totals[0] == 0 || totals[1] == 0)
    throw InputError("both classes must be present to stratify folds");

  std::vector<Group> groups;
  for (auto& [_, g] : by_key) groups.push_back(g);
  std::mt19937_64 rng(seed);
  std::shuffle(groups.begin(), groups.end(), rng);
  std::stable_sort(groups.begin(), groups.end(),
                   [](const Group& a, const Group& b) { return a.size() > b.size(); });

  std::vector<std::array<int, 2>> fold_counts(static_cast<std::size_t>(k), {0, 0});
  const std::array<double, 2> target = {static_cast<double>(totals[0]) / k,
                                        static_cast<double>(totals[1]) / k};
  for (const auto& g : groups) {
    int best = 0;
    double best_cost = 0.0;
    int best_size = 0;
    for (int f = 0; f < k; ++f) {
      const auto& c = fold_counts[static_cast<std::size_t>(f)];
      double cost = 0.0;
      for (std::size_t cls = 0; cls < 2; ++cls) {
        const double before = c[cls] - target[cls];
        const double after = c[cls] + g.counts[cls] - target[cls];
        cost += after * after - before * before;
      }
      const int size = c[0] + c[1];
      if (f == 0 || cost < best_cost - 1e-12 ||
          (std::abs(cost - best_cost) <= 1e-12 && size < best_size)) {
        best = f;
        best_cost = cost;
        best_size = size;
      }
    }
    auto& c = fold_counts[static_cast<std::size_t>(best)];
    c[0] += g.counts[0];
    c[1] += g.counts[1];
    plan.assignments[g.key] = best;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Metrics

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;
};

struct ClassificationMetrics {
  std::array<ClassMetrics, 2> per_class;  // [NotAnxious, Anxious]
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
};

// Area under the ROC curve as the Mann-Whitney statistic with mid-ranks for
// tied scores.
inline double roc_auc(std::span<const int> y_true, std::span<const double> score) {
  const std::size_t n = y_true.size();
  if (score.size() != n) throw InputError("length mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && score[order[j + 1]] == score[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }
  double pos = 0, neg = 0, rank_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y_true[i] == 1) {
      pos += 1;
      rank_sum += rank[i];
    } else {
      neg += 1;
    }
  }
  if (pos == 0 || neg == 0) throw InputError("AUC undefined: y_true has a single class");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

// A row is predicted Anxious when its probability exceeds the threshold.
// Precision/recall/F1 with a zero denominator are 0.
inline ClassificationMetrics classification_metrics(std::span<const int> y_true,
                                                    std::span<const double> y_prob,
                                                    double threshold = 0.5) {
  if (y_true.size() != y_prob.size()) throw InputError("length mismatch");
  if (y_true.empty()) throw InputError("no predictions to score");
  std::array<std::array<int, 2>, 2> confusion{};  // [truth][predicted]
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] != 0 && y_true[i] != 1) throw InputError("labels must be 0/1");
    if (!(y_prob[i] >= 0.0 && y_prob[i] <= 1.0)) throw InputError("probabilities must lie in [0,1]");
    ++confusion[static_cast<std::size_t>(y_true[i])][y_prob[i] > threshold ? 1 : 0];
  }
  ClassificationMetrics m;
  auto ratio = [](double a, double b) { return b > 0 ? a / b : 0.0; };
  for (std::size_t c = 0; c < 2; ++c) {
    const double tp = confusion[c][c];
    const double predicted = confusion[0][c] + confusion[1][c];
    const double actual = confusion[c][0] + confusion[c][1];
    auto& cm = m.per_class[c];
    cm.precision = ratio(tp, predicted);
    cm.recall = ratio(tp, actual);
    cm.f1 = ratio(2 * cm.precision * cm.recall, cm.precision + cm.recall);
    cm.support = static_cast<int>(actual);
  }
  m.macro_precision = 0.5 * (m.per_class[0].precision + m.per_class[1].precision);
  m.macro_recall = 0.5 * (m.per_class[0].recall + m.per_class[1].recall);
  m.macro_f1 = 0.5 * (m.per_class[0].f1 + m.per_class[1].f1);
  m.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) /
               static_cast<double>(y_true.size());
  m.auc = roc_auc(y_true, y_prob);
  return m;
}

inline double mean_squared_error(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw InputError("length mismatch");
  if (y_true.empty()) throw InputError("no predictions to score");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) s += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  return s / static_cast<double>(y_true.size());
}

struct RocPoint {
  double fpr, tpr, threshold;
};

// Distinct-threshold ROC curve, starting at (0, 0).
inline std::vector<RocPoint> roc_curve(std::span<const int> y_true, std::span<const double> score) {
  std::vector<std::size_t> order(y_true.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  double pos = 0, neg = 0;
  for (const int y : y_true) (y == 1 ? pos : neg) += 1;
  std::vector<RocPoint> out{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (y_true[order[i]] == 1 ? tp : fp) += 1;
    if (i + 1 == order.size() || score[order[i + 1]] != score[order[i]])
      out.push_back({neg > 0 ? fp / neg : 0.0, pos > 0 ? tp / pos : 0.0, score[order[i]]});
  }
  return out;
}

struct Summary {
  std::vector<double> per_fold;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation across folds
};

inline Summary summarize(std::vector<double> values) {
  Summary s;
  s.per_fold = std::move(values);
  if (s.per_fold.empty()) return s;
  for (const double v : s.per_fold) s.mean += v;
  s.mean /= static_cast<double>(s.per_fold.size());
  for (const double v : s.per_fold) s.std += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(s.per_fold.size()));
  return s;
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
  Task task = Task::kClassify;
  models::ModelKind model = models::ModelKind::kRandomForest;
  FoldStrategy strategy = FoldStrategy::kGroupedStratified;
  int folds = 5;
  std::uint64_t seed = 0;
  models::ModelParams params;
};

struct FoldResult {
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::map<std::string, double> metrics;
  std::vector<RocPoint> roc;  // classification only
  models::ModelArtifact artifact;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::size_t n_rows = 0;
  std::size_t n_participants = 0;
  std::size_t n_holdout = 0;
  std::vector<FoldResult> folds;
  std::map<std::string, Summary> summary;
};

namespace detail {

inline Matrix rows_to_matrix(const std::vector<FeatureVector>& rows) {
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kNumFeatures));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < kNumFeatures; ++c)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return x;
}

struct RegressionRow {
  std::string participant_id;
  RegressionFeatures x1{}, x2{};
  double y1 = 0, y2 = 0;
};

inline models::RegressionRows to_regression_rows(const std::vector<const RegressionRow*>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(kNumRegressionFeatures);
  models::RegressionRows out{Matrix(n, d), Matrix(n, d), Vector(n), Vector(n)};
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = *rows[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < d; ++c) {
      out.x1(r, c) = row.x1[static_cast<std::size_t>(c)];
      out.x2(r, c) = row.x2[static_cast<std::size_t>(c)];
    }
    out.y1[r] = row.y1;
    out.y2[r] = row.y2;
  }
  return out;
}

// Records whose task rows all have features. Classification drops a
// missing second round; prediction needs both rounds.
inline std::vector<ParticipantRecord> usable_records(std::span<const ParticipantRecord> records,
                                                     const FeatureTable& features, Task task) {
  const bool classify = task == Task::kClassify;
  std::vector<ParticipantRecord> usable;
  for (const auto& r : records) {
    ParticipantRecord copy = r;
    const bool has1 = features.count({r.participant_id, 1}) > 0;
    const bool has2 = features.count({r.participant_id, 2}) > 0;
    if (classify) {
      if (!has1) continue;
      if (!has2) {
        copy.y2.reset();
        copy.round2_window.reset();
      }
    } else if (!(has1 && has2 && r.y2 && r.round2_window)) {
      continue;
    }
    usable.push_back(std::move(copy));
  }
  if (usable.empty()) throw InputError("no participants with features for this task");
  return usable;
}

template <typename Fn>
auto with_fold_context(int fold, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw InputError("fold " + std::to_string(fold) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError("fold " + std::to_string(fold) + ": " + e.what());
  }
}

}  // namespace detail

// Cross-validated evaluation. Rows whose features are missing from the table
// are skipped. Fold i trains with seed derive_seed(seed, i).
inline ExperimentResult run_experiment(std::span<const ParticipantRecord> records,
                                       const FeatureTable& features,
                                       const ExperimentConfig& cfg) {
  using models::ModelKind;
  const bool classify = cfg.task == Task::kClassify;
  if (classify != models::is_classifier(cfg.model))
    throw InputError(std::string("model '") + models::to_string(cfg.model) +
                     "' does not fit task '" + to_string(cfg.task) + "'");

  const auto usable = detail::usable_records(records, features, cfg.task);

  const auto plan = make_folds(usable, cfg.folds, cfg.seed, cfg.strategy, cfg.task);
  const auto rows = task_rows(usable, cfg.task);

  ExperimentResult result;
  result.config = cfg;
  result.n_rows = rows.size();
  result.n_participants = usable.size();
  for (const auto& [_, f] : plan.assignments) result.n_holdout += f == kHoldoutFold ? 1 : 0;

  std::map<std::string, const ParticipantRecord*> by_id;
  for (const auto& r : usable) by_id[r.participant_id] = &r;

  std::vector<detail::RegressionRow> reg_rows;
  if (!classify) {
    for (const auto& row : rows) {
      const auto& rec = *by_id.at(row.participant_id);
      reg_rows.push_back({row.participant_id,
                          regression_subset(features.at({row.participant_id, 1})),
                          regression_subset(features.at({row.participant_id, 2})),
                          static_cast<double>(rec.y1), static_cast<double>(*rec.y2)});
    }
  }

  std::map<std::string, std::vector<double>> per_metric;
  for (int fold = 0; fold < cfg.folds; ++fold) {
    FoldResult fr;
    fr.fold = fold;
    const std::uint64_t fold_seed = models::derive_seed(cfg.seed, static_cast<std::uint64_t>(fold));
    detail::with_fold_context(fold, [&] {
      if (classify) {
        std::vector<FeatureVector> train_x, test_x;
        std::vector<int> train_y, test_y;
        for (const auto& row : rows) {
          const auto& f = features.at({row.participant_id, row.round});
          if (plan.in_train(row.participant_id, row.round, fold)) {
            train_x.push_back(f);
            train_y.push_back(row.label);
          } else if (plan.in_test(row.participant_id, row.round, fold)) {
            test_x.push_back(f);
            test_y.push_back(row.label);
          }
        }
        fr.n_train = train_x.size();
        fr.n_test = test_x.size();
        const Matrix xtr = detail::rows_to_matrix(train_x);
        fr.artifact = cfg.model == ModelKind::kLogistic
                          ? models::train_logistic(xtr, train_y, cfg.params.logistic, fold_seed)
                          : models::train_random_forest(xtr, train_y, cfg.params.forest, fold_seed);
        const Vector prob = models::predict_proba(fr.artifact, detail::rows_to_matrix(test_x));
        const std::span<const double> p(prob.data(), static_cast<std::size_t>(prob.size()));
        const auto m = classification_metrics(test_y, p);
        fr.metrics = {{"f1", m.macro_f1},
                      {"precision", m.macro_precision},
                      {"recall", m.macro_recall},
                      {"accuracy", m.accuracy},
                      {"auc", m.auc},
                      {"precision_anxious", m.per_class[1].precision},
                      {"recall_anxious", m.per_class[1].recall},
                      {"f1_anxious", m.per_class[1].f1},
                      {"precision_not_anxious", m.per_class[0].precision},
                      {"recall_not_anxious", m.per_class[0].recall},
                      {"f1_not_anxious", m.per_class[0].f1}};
        fr.roc = roc_curve(test_y, p);
      } else {
        std::vector<const detail::RegressionRow*> train, test;
        for (const auto& row : reg_rows) {
          if (plan.in_train(row.participant_id, 2, fold)) {
            train.push_back(&row);
          } else if (plan.in_test(row.participant_id, 2, fold)) {
            test.push_back(&row);
          }
        }
        fr.n_train = train.size();
        fr.n_test = test.size();
        const auto tr = detail::to_regression_rows(train);
        const auto te = detail::to_regression_rows(test);
        switch (cfg.model) {
          case ModelKind::kOls: fr.artifact = models::train_ols(tr, cfg.params.eta); break;
          case ModelKind::kGradientBoosting:
            fr.artifact = models::train_gradient_boosting(tr, cfg.params.eta, cfg.params.boosting, fold_seed);
            break;
          default:
            fr.artifact = models::train_gp(tr, cfg.params.eta, cfg.params.gp, fold_seed);
            break;
        }
        const auto pred = models::predict_scores(fr.artifact, te);
        const std::span<const double> truth(te.y2.data(), static_cast<std::size_t>(te.y2.size()));
        fr.metrics["mse"] = mean_squared_error(
            truth, {pred.estimate.data(), static_cast<std::size_t>(pred.estimate.size())});
        if (pred.traces.rows() > 0) {
          // Average of the per-trace errors (each trace scored separately).
          double total = 0.0;
          for (Eigen::Index t = 0; t < pred.traces.rows(); ++t) {
            const Vector trace = pred.traces.row(t).transpose();
            total += mean_squared_error(truth, {trace.data(), static_cast<std::size_t>(trace.size())});
          }
          fr.metrics["trace_mse"] = total / static_cast<double>(pred.traces.rows());
          fr.metrics["posterior_mean_mse"] = mean_squared_error(
              truth, {pred.posterior_mean.data(), static_cast<std::size_t>(pred.posterior_mean.size())});
        }
      }
      return 0;
    });
    for (const auto& [name, v] : fr.metrics) per_metric[name].push_back(v);
    result.folds.push_back(std::move(fr));
  }
  for (auto& [name, values] : per_metric) result.summary[name] = summarize(std::move(values));
  return result;
}

// ---------------------------------------------------------------------------
// Whole-cohort training and prediction

// Trains one model on every usable row (no held-out data).
inline models::ModelArtifact train_model(std::span<const ParticipantRecord> records,
                                         const FeatureTable& features, const ExperimentConfig& cfg) {
  const bool classify = cfg.task == Task::kClassify;
  if (classify != models::is_classifier(cfg.model))
    throw InputError(std::string("model '") + models::to_string(cfg.model) +
                     "' does not fit task '" + to_string(cfg.task) + "'");
  const auto usable = detail::usable_records(records, features, cfg.task);
  const auto rows = task_rows(usable, cfg.task);
  if (classify) {
    std::vector<FeatureVector> x;
    std::vector<int> y;
    for (const auto& row : rows) {
      x.push_back(features.at({row.participant_id, row.round}));
      y.push_back(row.label);
    }
    const Matrix m = detail::rows_to_matrix(x);
    return cfg.model == models::ModelKind::kLogistic
               ? models::train_logistic(m, y, cfg.params.logistic, cfg.seed)
               : models::train_random_forest(m, y, cfg.params.forest, cfg.seed);
  }
  std::vector<detail::RegressionRow> reg;
  for (const auto& r : usable)
    reg.push_back({r.participant_id, regression_subset(features.at({r.participant_id, 1})),
                   regression_subset(features.at({r.participant_id, 2})),
                   static_cast<double>(r.y1), static_cast<double>(*r.y2)});
  std::vector<const detail::RegressionRow*> ptrs;
  for (const auto& r : reg) ptrs.push_back(&r);
  const auto tr = detail::to_regression_rows(ptrs);
  switch (cfg.model) {
    case models::ModelKind::kOls: return models::train_ols(tr, cfg.params.eta);
    case models::ModelKind::kGradientBoosting:
      return models::train_gradient_boosting(tr, cfg.params.eta, cfg.params.boosting, cfg.seed);
    default: return models::train_gp(tr, cfg.params.eta, cfg.params.gp, cfg.seed);
  }
}

// Predictions CSV. Classifiers score every (participant, round) row of the
// table; regressors need both rounds plus y1 from the records.
inline std::string predictions_csv(const models::ModelArtifact& a, const FeatureTable& features,
                                   std::span<const ParticipantRecord> records) {
  std::string out;
  if (models::is_classifier(a.kind)) {
    std::vector<FeatureVector> x;
    for (const auto& [_, f] : features) x.push_back(f);
    if (x.empty()) throw InputError("no feature rows to score");
    const Vector p = models::predict_proba(a, detail::rows_to_matrix(x));
    out = "participant_id,round,prob_anxious,predicted\n";
    Eigen::Index i = 0;
    for (const auto& [key, _] : features) {
      out += key.first + "," + std::to_string(key.second) + "," + format_double(p[i]) + "," +
             (p[i] > 0.5 ? "anxious" : "not_anxious") + "\n";
      ++i;
    }
    return out;
  }
  std::vector<detail::RegressionRow> reg;
  for (const auto& r : records) {
    const auto f1 = features.find({r.participant_id, 1});
    const auto f2 = features.find({r.participant_id, 2});
    if (f1 == features.end() || f2 == features.end()) continue;
    reg.push_back({r.participant_id, regression_subset(f1->second), regression_subset(f2->second),
                   static_cast<double>(r.y1), r.y2 ? static_cast<double>(*r.y2) : 0.0});
  }
  if (reg.empty()) throw InputError("no participants with both rounds and a round-1 score");
  std::vector<const detail::RegressionRow*> ptrs;
  for (const auto& r : reg) ptrs.push_back(&r);
  const auto pred = models::predict_scores(a, detail::to_regression_rows(ptrs));
  const bool gp = pred.std.size() > 0;
  out = gp ? "participant_id,estimate,std,posterior_mean\n" : "participant_id,estimate\n";
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out += reg[i].participant_id + "," + format_double(pred.estimate[r]);
    if (gp) out += "," + format_double(pred.std[r]) + "," + format_double(pred.posterior_mean[r]);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::ordered_json report_json(const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["task"] = to_string(r.config.task);
  j["model"] = models::to_string(r.config.model);
  j["strategy"] = to_string(r.config.strategy);
  j["folds"] = r.config.folds;
  j["seed"] = r.config.seed;
  j["n_rows"] = r.n_rows;
  j["n_participants"] = r.n_participants;
  j["n_holdout"] = r.n_holdout;
  nlohmann::ordered_json metrics;
  for (const auto& [name, s] : r.summary) {
    nlohmann::ordered_json m;
    m["mean"] = s.mean;
    m["std"] = s.std;
    m["per_fold"] = s.per_fold;
    metrics[name] = m;
  }
  j["metrics"] = metrics;
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (const auto& f : r.folds) {
    nlohmann::ordered_json fj;
    fj["fold"] = f.fold;
    fj["n_train"] = f.n_train;
    fj["n_test"] = f.n_test;
    for (const auto& [name, v] : f.metrics) fj[name] = v;
    folds.push_back(fj);
  }
  j["per_fold"] = folds;
  return j;
}

inline std::string folds_csv(const ExperimentResult& r) {
  std::string out = "fold,n_train,n_test";
  std::vector<std::string> names;
  if (!r.folds.empty())
    for (const auto& [name, _] : r.folds.front().metrics) names.push_back(name);
  for (const auto& n : names) out += "," + n;
  out += "\n";
  for (const auto& f : r.folds) {
    out += std::to_string(f.fold) + "," + std::to_string(f.n_train) + "," + std::to_string(f.n_test);
    for (const auto& n : names) out += "," + format_double(f.metrics.at(n));
    out += "\n";
  }
  return out;
}

inline std::string roc_tsv(const ExperimentResult& r) {
  std::string out = "fold\tfpr\ttpr\tthreshold\n";
  for (const auto& f : r.folds)
    for (const auto& p : f.roc)
      out += std::to_string(f.fold) + "\t" + format_double(p.fpr) + "\t" + format_double(p.tpr) +
             "\t" + (std::isinf(p.threshold) ? std::string("inf") : format_double(p.threshold)) + "\n";
  return out;
}

}  // namespace phenolog::eval
