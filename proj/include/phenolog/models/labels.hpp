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

#include <array>
#include <cmath>
#include <string>

#include "phenolog/error.hpp"
#include "phenolog/features.hpp"

namespace phenolog::models {

enum class AnxietyLabel { kNotAnxious = 0, kAnxious = 1 };

inline constexpr int kGad7Max = 21;
inline constexpr int kGad7Cutoff = 9;  // scores above the cutoff are anxious

inline AnxietyLabel label_anxiety(int score) {
  if (score < 0 || score > kGad7Max)
    throw InputError("GAD-7 score " + std::to_string(score) + " outside 0..21");
  return score > kGad7Cutoff ? AnxietyLabel::kAnxious : AnxietyLabel::kNotAnxious;
}

inline int label_value(int score) {
  return label_anxiety(score) == AnxietyLabel::kAnxious ? 1 : 0;
}

inline constexpr double kDefaultEta = 0.9;
inline constexpr std::size_t kRegressionInputSize = 2 * kNumRegressionFeatures + 1;
inline constexpr std::size_t kGpInputSize = 2 * kNumRegressionFeatures;

// [eta * x2, (1 - eta) * (x1 - x2), y1]; the first 18 entries are the GP
// kernel input.
struct RegressionInput {
  RegressionFeatures x2{};
  RegressionFeatures delta_x{};
  double y1 = 0.0;
  double eta = kDefaultEta;
  std::array<double, kRegressionInputSize> assembled{};
};

inline RegressionInput build_regression_input(const RegressionFeatures& x1,
                                              const RegressionFeatures& x2,
                                              double y1, double eta = kDefaultEta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw InputError("eta must lie in [0, 1]");
  if (!std::isfinite(y1)) throw InputError("y1 must be finite");
  RegressionInput in;
  in.x2 = x2;
  in.y1 = y1;
  in.eta = eta;
  for (std::size_t i = 0; i < kNumRegressionFeatures; ++i) {
    in.delta_x[i] = x1[i] - x2[i];
    in.assembled[i] = eta * x2[i];
    in.assembled[kNumRegressionFeatures + i] = (1.0 - eta) * in.delta_x[i];
  }
  in.assembled[kGpInputSize] = y1;
  return in;
}

template <typename Range>
RegressionFeatures to_regression_features(const Range& values) {
  if (std::size(values) != kNumRegressionFeatures)
    throw InputError("expected " + std::to_string(kNumRegressionFeatures) +
                     " regression features, got " + std::to_string(std::size(values)));
  RegressionFeatures out{};
  std::size_t i = 0;
  for (const double v : values) out[i++] = v;
  return out;
}

}  // namespace phenolog::models
