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

#include <cmath>

#include <gtest/gtest.h>

#include "phenolog/models/ols.hpp"
#include "phenolog/pipeline.hpp"
#include "phenolog/synth.hpp"
#include "test_support.hpp"

using namespace phenolog;
using namespace phenolog::synth;
namespace fi = phenolog::feature_index;

namespace {

std::string events_jsonl(const Cohort& c) {
  std::string out;
  for (const auto& e : c.events) out += to_json(e).dump() + "\n";
  return out;
}

}  // namespace

TEST(Synth, SameSeedIsByteIdentical) {
  const auto spec = phenolog::testkit::small_spec(6, 42);
  const auto a = generate_cohort(spec), b = generate_cohort(spec);
  EXPECT_EQ(events_jsonl(a), events_jsonl(b));
  EXPECT_EQ(truth_json(a).dump(), truth_json(b).dump());
  auto other = spec;
  other.seed = 43;
  EXPECT_NE(events_jsonl(generate_cohort(other)), events_jsonl(a));
}

TEST(Synth, RecordsAndWindows) {
  auto spec = phenolog::testkit::small_spec(10, 3);
  spec.round2_fraction = 0.5;
  const auto c = generate_cohort(spec);
  ASSERT_EQ(c.records.size(), 10u);
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const auto& r = c.records[i];
    EXPECT_EQ(r.participant_id, synth::detail::participant_id(static_cast<int>(i) + 1));
    EXPECT_NO_THROW(validate(r));
    EXPECT_GE(r.y1, 0);
    EXPECT_LE(r.y1, 21);
    EXPECT_EQ(r.y2.has_value(), r.round2_window.has_value());
    EXPECT_EQ(c.truth[i].round2.has_value(), r.y2.has_value());
  }
  for (const auto& e : c.events) {
    ASSERT_TRUE(e.category.has_value());
    EXPECT_FALSE(e.category->empty());
    EXPECT_EQ(e.source == Source::kYoutube, e.action == Action::kWatch);
  }
}

TEST(Synth, ZeroNoiseLabelRuleIsRecoveredByOls) {
  auto spec = phenolog::testkit::small_spec(80, 5);
  spec.round2_fraction = 0;
  spec.label = {10.5, {{"C_H_total", 4.0}}, 0.0, true};  // integer rounding is the only noise
  const auto c = generate_cohort(spec);
  models::Matrix x(80, 1);
  std::vector<double> y(80);
  for (int i = 0; i < 80; ++i) {
    const auto& r = c.records[static_cast<std::size_t>(i)];
    x(i, 0) = c.features.at({r.participant_id, 1})[fi::kCategoryTotal];
    y[static_cast<std::size_t>(i)] = r.y1;
  }
  const auto m = models::fit_ols(x, y);
  const models::Vector pred = m.predict(x);
  double ss_res = 0, ss_tot = 0, mean = 0;
  for (const double v : y) mean += v / 80;
  for (int i = 0; i < 80; ++i) {
    ss_res += std::pow(y[static_cast<std::size_t>(i)] - pred[i], 2);
    ss_tot += std::pow(y[static_cast<std::size_t>(i)] - mean, 2);
  }
  EXPECT_GE(1 - ss_res / ss_tot, 0.99);
}

TEST(Synth, PlantedSleepGivesInactivityThree) {
  auto spec = phenolog::testkit::small_spec(40, 6);
  spec.round2_fraction = 0;
  spec.sleep = {true, 23.0, 0.0, 8.0, 0.0};
  const auto c = generate_cohort(spec);
  int hits = 0;
  for (const auto& r : c.records) hits += c.features.at({r.participant_id, 1})[fi::kInactivity8] == 3.0;
  EXPECT_GE(hits, 36);
}

TEST(Synth, SignificantChangesAreForced) {
  auto spec = phenolog::testkit::small_spec(30, 7);
  spec.n_significant_change = 9;
  const auto c = generate_cohort(spec);
  int big = 0, forced = 0;
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const auto& r = c.records[i];
    if (r.y2 && std::abs(*r.y2 - r.y1) >= 5) ++big;
    forced += c.truth[i].forced_change;
  }
  EXPECT_GE(big, 9);
  EXPECT_EQ(forced, 9);

  spec.round2_fraction = 0.1;
  spec.n_significant_change = 20;
  EXPECT_THROW(generate_cohort(spec), InputError);
}

TEST(Synth, InfeasibleSpecsRejected) {
  auto spec = phenolog::testkit::small_spec(5, 1);
  spec.sleep.duration_mean = 24;
  EXPECT_THROW(validate(spec), InputError);
  spec = phenolog::testkit::small_spec(5, 1);
  spec.alpha = {0.5, 1.0};
  EXPECT_THROW(validate(spec), InputError);
  spec = phenolog::testkit::small_spec(5, 1);
  spec.label.weights["not_a_feature"] = 1;
  EXPECT_THROW(validate(spec), InputError);
  spec = phenolog::testkit::small_spec(5, 1);
  spec.categories = {"News/Politics"};
  EXPECT_THROW(validate(spec), InputError);
  try {
    spec = phenolog::testkit::small_spec(5, 1);
    spec.n_participants = 0;
    validate(spec);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("infeasible spec", 0), 0u);
  }
}

TEST(Synth, SpecJsonRoundTrip) {
  auto spec = phenolog::testkit::small_spec(12, 9);
  spec.drift.mode = DriftSpec::Mode::kLabelRule;
  spec.drift.score.weights["gamma"] = 0.5;
  spec.sleep.start_hour_sd = 0.25;
  const auto j = to_json(spec);
  const auto back = spec_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(to_json(back).dump(), j.dump());
}

TEST(Synth, HawkesParametersRecoveredWithoutSleep) {
  auto spec = phenolog::testkit::small_spec(20, 8, 56);
  spec.round2_fraction = 0;
  spec.sleep.enabled = false;
  const auto c = generate_cohort(spec);
  int eligible = 0, recovered = 0;
  for (const auto& t : c.truth) {
    if (t.round1.n_events < 500) continue;
    ++eligible;
    const auto& f = c.features.at({t.participant_id, 1});
    const auto& p = t.round1.hawkes;
    const bool ok = std::abs(f[fi::kGamma] / p.gamma - 1) < 0.3 &&
                    std::abs(f[fi::kAlpha] - p.alpha) < 0.1 &&
                    std::abs(f[fi::kBeta] / p.beta - 1) < 0.5;
    recovered += ok;
  }
  ASSERT_GT(eligible, 10);
  EXPECT_GE(recovered, 0.8 * eligible);
}

TEST(Synth, PipelineReproducesCohortFeatures) {
  const auto c = generate_cohort(phenolog::testkit::small_spec(8, 10));
  FeaturizeOptions opts;
  opts.jobs = 2;
  const auto r = featurize(c.events, &c.records, opts);
  EXPECT_TRUE(r.warnings.empty());
  ASSERT_EQ(r.table.size(), c.features.size());
  for (const auto& [key, f] : c.features) {
    const auto& g = r.table.at(key);
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      if (std::isnan(f[i])) {
        EXPECT_TRUE(std::isnan(g[i]));
      } else {
        EXPECT_EQ(g[i], f[i]) << key.first << " " << kFeatureNames[i];
      }
    }
  }
}
