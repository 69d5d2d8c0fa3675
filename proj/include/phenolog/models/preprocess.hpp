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

// Fold-local preprocessing: median imputation of missing (NaN) entries and
// per-column z-scoring. Both are fitted on training rows only.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "phenolog/error.hpp"

namespace phenolog::models {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

inline std::vector<double> to_vector(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

inline Vector from_json_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

struct MedianImputer {
  Vector medians;

  static MedianImputer fit(const Matrix& x) {
    MedianImputer imp;
    imp.medians.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      std::vector<double> present;
      for (Eigen::Index r = 0; r < x.rows(); ++r)
        if (!std::isnan(x(r, c))) present.push_back(x(r, c));
      imp.medians[c] = detail::median(std::move(present));  // all missing -> 0
    }
    return imp;
  }

  Matrix transform(Matrix x) const {
    if (x.cols() != medians.size()) throw InputError("imputer dimension mismatch");
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      for (Eigen::Index r = 0; r < x.rows(); ++r)
        if (std::isnan(x(r, c))) x(r, c) = medians[c];
    return x;
  }
};

struct StandardizerState {
  Vector mean;
  Vector std;  // > 0; zero-variance columns get 1
  std::vector<Eigen::Index> constant_columns;

  static StandardizerState fit(const Matrix& x) {
    if (x.rows() == 0) throw InputError("cannot standardize zero rows");
    StandardizerState s;
    s.mean = x.colwise().mean().transpose();
    s.std.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = (x.col(c).array() - s.mean[c]).square().mean();
      if (!(var > 0.0) || !std::isfinite(var)) {
        s.std[c] = 1.0;
        s.constant_columns.push_back(c);
      } else {
        s.std[c] = std::sqrt(var);
      }
    }
    return s;
  }

  Matrix transform(const Matrix& x) const {
    if (x.cols() != mean.size()) throw InputError("standardizer dimension mismatch");
    return (x.rowwise() - mean.transpose()).array().rowwise() /
           std.transpose().array();
  }
};

// Imputation followed by standardization, fitted together.
struct Preprocessor {
  MedianImputer imputer;
  StandardizerState standardizer;

  static Preprocessor fit(const Matrix& x) {
    Preprocessor p;
    p.imputer = MedianImputer::fit(x);
    p.standardizer = StandardizerState::fit(p.imputer.transform(x));
    return p;
  }
  Matrix transform(const Matrix& x) const {
    return standardizer.transform(imputer.transform(x));
  }
};

inline nlohmann::ordered_json to_json(const Preprocessor& p) {
  nlohmann::ordered_json j;
  j["medians"] = detail::to_vector(p.imputer.medians);
  j["mean"] = detail::to_vector(p.standardizer.mean);
  j["std"] = detail::to_vector(p.standardizer.std);
  return j;
}

inline Preprocessor preprocessor_from_json(const nlohmann::json& j) {
  Preprocessor p;
  p.imputer.medians = detail::from_json_vector(j.at("medians"));
  p.standardizer.mean = detail::from_json_vector(j.at("mean"));
  p.standardizer.std = detail::from_json_vector(j.at("std"));
  if (p.imputer.medians.size() != p.standardizer.mean.size() ||
      p.standardizer.mean.size() != p.standardizer.std.size())
    throw InputError("inconsistent preprocessor dimensions");
  return p;
}

}  // namespace phenolog::models
