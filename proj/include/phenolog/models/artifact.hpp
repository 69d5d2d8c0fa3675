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

// Trained models bundled with their preprocessing, seed and the feature order
// they were trained on, plus versioned JSON (de)serialization.
//
// Classifiers consume the 16 canonical features. Score regressors consume the
// 9-feature subset of both rounds: both rounds are imputed and standardized
// with one fold-local preprocessor, then assembled as
// [eta * x2, (1 - eta) * (x1 - x2), y1].

#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "phenolog/features.hpp"
#include "phenolog/models/boosting.hpp"
#include "phenolog/models/forest.hpp"
#include "phenolog/models/gp.hpp"
#include "phenolog/models/labels.hpp"
#include "phenolog/models/logistic.hpp"
#include "phenolog/models/ols.hpp"
#include "phenolog/models/preprocess.hpp"

namespace phenolog::models {

enum class ModelKind { kLogistic, kRandomForest, kOls, kGradientBoosting, kGaussianProcess };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kLogistic: return "lr";
    case ModelKind::kRandomForest: return "rf";
    case ModelKind::kOls: return "ols";
    case ModelKind::kGradientBoosting: return "gb";
    case ModelKind::kGaussianProcess: return "gp";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "lr") return ModelKind::kLogistic;
  if (s == "rf") return ModelKind::kRandomForest;
  if (s == "ols") return ModelKind::kOls;
  if (s == "gb") return ModelKind::kGradientBoosting;
  if (s == "gp") return ModelKind::kGaussianProcess;
  throw InputError("unknown model '" + s + "'");
}

inline bool is_classifier(ModelKind k) {
  return k == ModelKind::kLogistic || k == ModelKind::kRandomForest;
}

inline std::vector<std::string> canonical_feature_names() {
  return {kFeatureNames.begin(), kFeatureNames.end()};
}

// FNV-1a over the comma-joined names.
inline std::string feature_fingerprint(const std::vector<std::string>& names) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) h = (h ^ static_cast<unsigned char>(',')) * 0x100000001b3ULL;
    for (const char c : names[i]) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct ModelArtifact {
  ModelKind kind = ModelKind::kLogistic;
  std::uint64_t seed = 0;
  double eta = kDefaultEta;
  std::vector<std::string> feature_names = canonical_feature_names();
  std::string fingerprint = feature_fingerprint(canonical_feature_names());
  Preprocessor preprocess;
  std::variant<LogisticModel, RandomForest, LinearModel, GradientBoosting, GaussianProcess>
      model;
};

struct ModelParams {
  LogisticConfig logistic;
  ForestConfig forest;
  BoostingConfig boosting;
  GPConfig gp;
  double eta = kDefaultEta;
};

// ---------------------------------------------------------------------------
// Classification (rows of the 16 canonical features; NaN = missing)

namespace detail {

inline std::vector<double> checked_labels(std::span<const int> y, Eigen::Index rows) {
  if (static_cast<Eigen::Index>(y.size()) != rows) throw InputError("label count mismatch");
  if (rows < 10) throw InputError("classifier training needs at least 10 rows");
  std::vector<double> out;
  bool seen[2] = {false, false};
  for (const int v : y) {
    if (v != 0 && v != 1) throw InputError("labels must be 0/1");
    seen[v] = true;
    out.push_back(v);
  }
  if (!seen[0] || !seen[1]) throw InputError("training labels contain a single class");
  return out;
}

}  // namespace detail

inline ModelArtifact train_logistic(const Matrix& x, std::span<const int> y,
                                    const LogisticConfig& cfg, std::uint64_t seed) {
  const auto labels = detail::checked_labels(y, x.rows());
  ModelArtifact a;
  a.kind = ModelKind::kLogistic;
  a.seed = seed;
  a.preprocess = Preprocessor::fit(x);
  a.model = fit_logistic(a.preprocess.transform(x), labels, cfg);
  return a;
}

inline ModelArtifact train_random_forest(const Matrix& x, std::span<const int> y,
                                         const ForestConfig& cfg, std::uint64_t seed) {
  const auto labels = detail::checked_labels(y, x.rows());
  ModelArtifact a;
  a.kind = ModelKind::kRandomForest;
  a.seed = seed;
  a.preprocess = Preprocessor::fit(x);
  a.model = fit_random_forest(a.preprocess.transform(x), labels, cfg, seed);
  return a;
}

inline Vector predict_proba(const ModelArtifact& a, const Matrix& x) {
  const Matrix z = a.preprocess.transform(x);
  if (const auto* lr = std::get_if<LogisticModel>(&a.model)) return lr->predict_proba(z);
  if (const auto* rf = std::get_if<RandomForest>(&a.model)) return rf->predict_proba(z);
  throw InputError("artifact is not a classifier");
}

// ---------------------------------------------------------------------------
// Score regression

struct RegressionRows {
  Matrix x1;  // n x 9, first-round subset (NaN = missing)
  Matrix x2;  // n x 9, follow-up subset
  Vector y1;
  Vector y2;  // unused at prediction time
};

namespace detail {

inline Matrix assemble_regression_inputs(const Preprocessor& prep, const Matrix& x1,
                                         const Matrix& x2, const Vector& y1, double eta) {
  if (x1.rows() != x2.rows() || x1.rows() != y1.size())
    throw InputError("regression row count mismatch");
  const auto d = static_cast<Eigen::Index>(kNumRegressionFeatures);
  if (x1.cols() != d || x2.cols() != d)
    throw InputError("regression inputs need the 9 selected features");
  const Matrix z1 = prep.transform(x1);
  const Matrix z2 = prep.transform(x2);
  Matrix out(x1.rows(), static_cast<Eigen::Index>(kRegressionInputSize));
  for (Eigen::Index r = 0; r < x1.rows(); ++r) {
    RegressionFeatures a{}, b{};
    for (Eigen::Index c = 0; c < d; ++c) {
      a[static_cast<std::size_t>(c)] = z1(r, c);
      b[static_cast<std::size_t>(c)] = z2(r, c);
    }
    const auto in = build_regression_input(a, b, y1[r], eta);
    for (std::size_t c = 0; c < kRegressionInputSize; ++c)
      out(r, static_cast<Eigen::Index>(c)) = in.assembled[c];
  }
  return out;
}

inline Preprocessor fit_round_preprocessor(const RegressionRows& rows) {
  Matrix stacked(rows.x1.rows() + rows.x2.rows(), rows.x1.cols());
  stacked << rows.x1, rows.x2;
  return Preprocessor::fit(stacked);
}

inline void check_regression_rows(const RegressionRows& rows, std::size_t min_rows) {
  if (rows.x1.rows() != rows.y2.size()) throw InputError("regression row count mismatch");
  if (static_cast<std::size_t>(rows.x1.rows()) < min_rows)
    throw InputError("regression training needs at least " + std::to_string(min_rows) +
                     " rows");
  if (!rows.y1.allFinite() || !rows.y2.allFinite())
    throw InputError("scores must be finite");
}

}  // namespace detail

inline Matrix regression_inputs(const ModelArtifact& a, const RegressionRows& rows) {
  return detail::assemble_regression_inputs(a.preprocess, rows.x1, rows.x2, rows.y1, a.eta);
}

inline ModelArtifact train_ols(const RegressionRows& rows, double eta) {
  detail::check_regression_rows(rows, 1);
  ModelArtifact a;
  a.kind = ModelKind::kOls;
  a.eta = eta;
  a.preprocess = detail::fit_round_preprocessor(rows);
  const Matrix x = regression_inputs(a, rows);
  a.model = fit_ols(x, {rows.y2.data(), static_cast<std::size_t>(rows.y2.size())});
  return a;
}

inline ModelArtifact train_gradient_boosting(const RegressionRows& rows, double eta,
                                             const BoostingConfig& cfg, std::uint64_t seed) {
  detail::check_regression_rows(rows, 10);
  ModelArtifact a;
  a.kind = ModelKind::kGradientBoosting;
  a.eta = eta;
  a.seed = seed;
  a.preprocess = detail::fit_round_preprocessor(rows);
  const Matrix x = regression_inputs(a, rows);
  a.model = fit_gradient_boosting(
      x, {rows.y2.data(), static_cast<std::size_t>(rows.y2.size())}, cfg, seed);
  return a;
}

inline ModelArtifact train_gp(const RegressionRows& rows, double eta, const GPConfig& cfg,
                              std::uint64_t seed) {
  detail::check_regression_rows(rows, 0);
  ModelArtifact a;
  a.kind = ModelKind::kGaussianProcess;
  a.eta = eta;
  a.seed = seed;
  if (rows.x1.rows() > 0) {
    a.preprocess = detail::fit_round_preprocessor(rows);
  } else {
    // No training data: identity scaling, the posterior is the prior.
    const auto d = static_cast<Eigen::Index>(kNumRegressionFeatures);
    a.preprocess.imputer.medians = Vector::Zero(d);
    a.preprocess.standardizer.mean = Vector::Zero(d);
    a.preprocess.standardizer.std = Vector::Ones(d);
  }
  const Matrix x = regression_inputs(a, rows);
  const auto d = static_cast<Eigen::Index>(kGpInputSize);
  a.model = fit_gp(x.leftCols(d), rows.y1, rows.y2, cfg);
  return a;
}

struct ScorePrediction {
  Vector estimate;
  Vector std;  // GP predictive std; empty for other models
  Vector posterior_mean;  // GP only
  Matrix traces;          // GP only
};

inline ScorePrediction predict_scores(const ModelArtifact& a, const RegressionRows& rows) {
  ScorePrediction out;
  const Matrix x = regression_inputs(a, rows);
  if (const auto* ols = std::get_if<LinearModel>(&a.model)) {
    out.estimate = ols->predict(x);
  } else if (const auto* gb = std::get_if<GradientBoosting>(&a.model)) {
    out.estimate = gb->predict(x);
  } else if (const auto* gp = std::get_if<GaussianProcess>(&a.model)) {
    const auto d = static_cast<Eigen::Index>(kGpInputSize);
    auto pred = gp->predict(x.leftCols(d), rows.y1, a.seed);
    out.estimate = pred.trace_mean;
    out.std = pred.predictive_std;
    out.posterior_mean = pred.mean;
    out.traces = std::move(pred.traces);
  } else {
    throw InputError("artifact is not a score regressor");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr int kArtifactVersion = 1;

namespace detail {

inline nlohmann::json matrix_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index cols) {
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = j[r].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InputError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ModelArtifact& a) {
  nlohmann::ordered_json j;
  j["format"] = "phenolog-model";
  j["version"] = kArtifactVersion;
  j["kind"] = to_string(a.kind);
  j["task"] = is_classifier(a.kind) ? "classify" : "predict";
  j["seed"] = a.seed;
  j["eta"] = a.eta;
  j["feature_names"] = a.feature_names;
  j["fingerprint"] = a.fingerprint;
  j["preprocess"] = to_json(a.preprocess);
  nlohmann::ordered_json m;
  std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          m["weights"] = detail::to_vector(model.weights);
          m["intercept"] = model.intercept;
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          m["trees"] = nlohmann::json::array();
          for (const auto& t : model.trees) m["trees"].push_back(nlohmann::ordered_json(to_json(t)));
        } else if constexpr (std::is_same_v<T, LinearModel>) {
          m["intercept"] = model.intercept;
          m["coefficients"] = detail::to_vector(model.coefficients);
          m["ridge_fallback"] = model.ridge_fallback;
        } else if constexpr (std::is_same_v<T, GradientBoosting>) {
          m["base"] = model.base;
          m["learning_rate"] = model.learning_rate;
          m["stages"] = nlohmann::json::array();
          for (const auto& t : model.stages) m["stages"].push_back(nlohmann::ordered_json(to_json(t)));
        } else {
          m["length_scale"] = model.length_scale;
          m["noise_std"] = model.noise_std;
          m["jitter"] = model.jitter;
          m["n_traces"] = model.n_traces;
          m["x"] = detail::matrix_json(model.x);
          m["residual"] = detail::to_vector(model.residual);
        }
      },
      a.model);
  j["model"] = m;
  return j;
}

inline ModelArtifact artifact_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "phenolog-model")
      throw InputError("not a phenolog model artifact");
    if (j.at("version").get<int>() != kArtifactVersion)
      throw InputError("unsupported artifact version");
    ModelArtifact a;
    a.kind = parse_model_kind(j.at("kind").get<std::string>());
    a.seed = j.at("seed").get<std::uint64_t>();
    a.eta = j.at("eta").get<double>();
    a.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    a.fingerprint = j.at("fingerprint").get<std::string>();
    if (a.fingerprint != feature_fingerprint(a.feature_names))
      throw InputError("artifact fingerprint does not match its feature names");
    a.preprocess = preprocessor_from_json(j.at("preprocess"));
    const auto& m = j.at("model");
    switch (a.kind) {
      case ModelKind::kLogistic: {
        LogisticModel lr;
        lr.weights = detail::from_json_vector(m.at("weights"));
        lr.intercept = m.at("intercept").get<double>();
        a.model = lr;
        break;
      }
      case ModelKind::kRandomForest: {
        RandomForest rf;
        for (const auto& t : m.at("trees")) rf.trees.push_back(tree_from_json(t));
        a.model = std::move(rf);
        break;
      }
      case ModelKind::kOls: {
        LinearModel ols;
        ols.intercept = m.at("intercept").get<double>();
        ols.coefficients = detail::from_json_vector(m.at("coefficients"));
        ols.ridge_fallback = m.at("ridge_fallback").get<bool>();
        a.model = ols;
        break;
      }
      case ModelKind::kGradientBoosting: {
        GradientBoosting gb;
        gb.base = m.at("base").get<double>();
        gb.learning_rate = m.at("learning_rate").get<double>();
        for (const auto& t : m.at("stages")) gb.stages.push_back(tree_from_json(t));
        a.model = std::move(gb);
        break;
      }
      case ModelKind::kGaussianProcess: {
        GaussianProcess gp;
        gp.length_scale = m.at("length_scale").get<double>();
        gp.noise_std = m.at("noise_std").get<double>();
        gp.jitter = m.at("jitter").get<double>();
        gp.n_traces = m.at("n_traces").get<int>();
        gp.residual = detail::from_json_vector(m.at("residual"));
        gp.x = detail::matrix_from_json(m.at("x"), static_cast<Eigen::Index>(kGpInputSize));
        if (gp.x.rows() != gp.residual.size()) throw InputError("GP cache size mismatch");
        gp.refresh();
        a.model = std::move(gp);
        break;
      }
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed artifact: ") + e.what());
  }
}

inline ModelArtifact load_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read artifact '" + path + "'");
  try {
    return artifact_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace phenolog::models
