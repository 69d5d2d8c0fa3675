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

// Synthetic cohorts with planted ground truth.
//
// Each participant-round is a Hawkes event stream with nightly sleep windows
// carved out by deletion; every event gets a source and a category drawn from
// the participant's own category distribution. Scores come from a planted
// linear rule over the features re-extracted from the generated events:
//
//   y1 = clip(round(intercept + sum_j w_j z_j(x1) + noise))
//   y2 = clip(round(y1 + sum_j v_j z_j(x1 - x2) + noise))        (delta mode)
//   y2 = clip(round(intercept + sum_j w_j z_j(x2) + noise))      (label_rule mode)
//
// where z_j standardizes feature j across the cohort when the rule asks for it
// (missing features contribute 0).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "phenolog/error.hpp"
#include "phenolog/features.hpp"
#include "phenolog/hawkes.hpp"
#include "phenolog/ingest.hpp"
#include "phenolog/io.hpp"
#include "phenolog/random.hpp"
#include "phenolog/taxonomy.hpp"

namespace phenolog::synth {

struct Range {
  double lo = 0.0, hi = 0.0;
};

struct SleepSpec {
  bool enabled = true;
  double start_hour_mean = 23.0;  // local clock; may exceed 24
  double start_hour_sd = 0.0;
  double duration_mean = 8.0;     // hours
  double duration_sd = 0.0;
};

struct LinearRule {
  double intercept = 0.0;
  std::map<std::string, double> weights;  // feature name -> weight
  double noise_std = 0.0;
  bool standardize = true;
};

struct DriftSpec {
  enum class Mode { kDelta, kLabelRule };
  Mode mode = Mode::kDelta;
  // Round-2 behavior relative to round 1.
  double log_gamma_sd = 0.2;
  double alpha_sd = 0.05;
  double log_beta_sd = 0.2;
  double log_concentration_sd = 0.5;
  double sleep_shift_sd = 0.0;  // hours
  double duration_shift_sd = 0.0;
  LinearRule score;  // delta mode: weights over x1 - x2, intercept unused
};

struct CohortSpec {
  int n_participants = 100;
  std::uint64_t seed = 1;
  std::string start = "2019-01-07T00:00:00-05:00";
  double round1_days = 56;
  double round2_days = 28;
  double round2_fraction = 1.0;
  int stagger_days = 7;  // participant i starts (i mod stagger) days later
  Range gamma{0.6, 1.6};
  Range alpha{0.2, 0.6};
  Range beta{0.5, 3.0};
  std::vector<std::string> categories = {"News",  "Sports", "Arts",   "Games",  "Health",
                                         "Music", "Science", "Travel", "Food",  "Finance"};
  Range concentration{0.1, 5.0};  // log-uniform per participant
  double youtube_fraction = 0.5;
  SleepSpec sleep;
  LinearRule label{10.5, {{"C_H_total", 4.0}}, 1.0, true};
  DriftSpec drift;
  int n_significant_change = 0;
};

struct RoundTruth {
  hawkes::HawkesParams hawkes;
  double concentration = 1.0;
  std::vector<double> category_probs;
  double sleep_start = 0.0;
  double sleep_duration = 0.0;
  std::size_t n_events = 0;
  FeatureVector features{};
};

struct ParticipantTruth {
  std::string participant_id;
  RoundTruth round1;
  std::optional<RoundTruth> round2;
  bool forced_change = false;
};

struct Cohort {
  std::vector<ActivityEvent> events;  // ordered by participant, then time
  std::vector<ParticipantRecord> records;
  std::vector<ParticipantTruth> truth;
  FeatureTable features;
  CohortSpec spec;
};

// ---------------------------------------------------------------------------
// Spec JSON

namespace detail {

inline Range range_from(const nlohmann::json& j, const char* key, Range fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j[key];
  if (v.is_number()) return {v.get<double>(), v.get<double>()};
  if (!v.is_array() || v.size() != 2) throw InputError(std::string(key) + " must be [lo, hi]");
  return {v[0].get<double>(), v[1].get<double>()};
}

inline LinearRule rule_from(const nlohmann::json& j, LinearRule r) {
  r.intercept = j.value("intercept", r.intercept);
  r.noise_std = j.value("noise_std", r.noise_std);
  r.standardize = j.value("standardize", r.standardize);
  if (j.contains("weights")) {
    r.weights.clear();
    for (const auto& [k, v] : j["weights"].items()) r.weights[k] = v.get<double>();
  }
  return r;
}

inline nlohmann::ordered_json rule_json(const LinearRule& r) {
  nlohmann::ordered_json j;
  j["intercept"] = r.intercept;
  j["weights"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.weights) j["weights"][k] = v;
  j["noise_std"] = r.noise_std;
  j["standardize"] = r.standardize;
  return j;
}

}  // namespace detail

inline void validate(const CohortSpec& s) {
  auto bad = [](const std::string& why) { return InputError("infeasible spec: " + why); };
  if (s.n_participants < 1) throw bad("n_participants must be positive");
  if (!(s.round1_days > 0) || !(s.round2_days > 0)) throw bad("round lengths must be positive");
  if (!(s.round2_fraction >= 0 && s.round2_fraction <= 1)) throw bad("round2_fraction outside [0,1]");
  if (s.stagger_days < 1) throw bad("stagger_days must be >= 1");
  if (!(s.gamma.lo > 0 && s.gamma.lo <= s.gamma.hi)) throw bad("gamma range");
  if (!(s.alpha.lo >= 0 && s.alpha.lo <= s.alpha.hi && s.alpha.hi < 1)) throw bad("alpha range must lie in [0,1)");
  if (!(s.beta.lo > 0 && s.beta.lo <= s.beta.hi)) throw bad("beta range");
  if (s.categories.empty()) throw bad("no categories");
  for (const auto& c : s.categories)
    if (c.empty() || c.find('/') != std::string::npos) throw bad("category '" + c + "' is not a root label");
  if (!(s.concentration.lo > 0 && s.concentration.lo <= s.concentration.hi)) throw bad("concentration range");
  if (!(s.youtube_fraction >= 0 && s.youtube_fraction <= 1)) throw bad("youtube_fraction outside [0,1]");
  if (s.sleep.enabled) {
    if (!(s.sleep.duration_mean > 0) || s.sleep.duration_mean + 3 * s.sleep.duration_sd >= 24)
      throw bad("sleep window must be shorter than 24h");
    if (s.sleep.start_hour_sd < 0 || s.sleep.duration_sd < 0) throw bad("negative sleep sd");
  }
  auto check_rule = [&](const LinearRule& r) {
    for (const auto& [name, _] : r.weights)
      if (std::find(kFeatureNames.begin(), kFeatureNames.end(), name) == kFeatureNames.end())
        throw bad("unknown feature '" + name + "' in rule");
    if (r.noise_std < 0) throw bad("negative noise");
  };
  check_rule(s.label);
  check_rule(s.drift.score);
  if (s.n_significant_change < 0 || s.n_significant_change > s.n_participants)
    throw bad("n_significant_change out of range");
  parse_rfc3339(s.start);
}

inline CohortSpec spec_from_json(const nlohmann::json& j) {
  CohortSpec s;
  try {
    s.n_participants = j.value("n_participants", s.n_participants);
    s.seed = j.value("seed", s.seed);
    s.start = j.value("start", s.start);
    s.round1_days = j.value("round1_days", s.round1_days);
    s.round2_days = j.value("round2_days", s.round2_days);
    s.round2_fraction = j.value("round2_fraction", s.round2_fraction);
    s.stagger_days = j.value("stagger_days", s.stagger_days);
    if (j.contains("hawkes")) {
      const auto& h = j["hawkes"];
      s.gamma = detail::range_from(h, "gamma", s.gamma);
      s.alpha = detail::range_from(h, "alpha", s.alpha);
      s.beta = detail::range_from(h, "beta", s.beta);
    }
    if (j.contains("categories")) s.categories = j["categories"].get<std::vector<std::string>>();
    s.concentration = detail::range_from(j, "concentration", s.concentration);
    s.youtube_fraction = j.value("youtube_fraction", s.youtube_fraction);
    if (j.contains("sleep")) {
      const auto& sl = j["sleep"];
      s.sleep.enabled = sl.value("enabled", s.sleep.enabled);
      s.sleep.start_hour_mean = sl.value("start_hour_mean", s.sleep.start_hour_mean);
      s.sleep.start_hour_sd = sl.value("start_hour_sd", s.sleep.start_hour_sd);
      s.sleep.duration_mean = sl.value("duration_mean", s.sleep.duration_mean);
      s.sleep.duration_sd = sl.value("duration_sd", s.sleep.duration_sd);
    }
    if (j.contains("label")) s.label = detail::rule_from(j["label"], s.label);
    if (j.contains("drift")) {
      const auto& d = j["drift"];
      const auto mode = d.value("mode", std::string("delta"));
      if (mode == "delta") {
        s.drift.mode = DriftSpec::Mode::kDelta;
      } else if (mode == "label_rule") {
        s.drift.mode = DriftSpec::Mode::kLabelRule;
      } else {
        throw InputError("drift mode must be 'delta' or 'label_rule'");
      }
      s.drift.log_gamma_sd = d.value("log_gamma_sd", s.drift.log_gamma_sd);
      s.drift.alpha_sd = d.value("alpha_sd", s.drift.alpha_sd);
      s.drift.log_beta_sd = d.value("log_beta_sd", s.drift.log_beta_sd);
      s.drift.log_concentration_sd = d.value("log_concentration_sd", s.drift.log_concentration_sd);
      s.drift.sleep_shift_sd = d.value("sleep_shift_sd", s.drift.sleep_shift_sd);
      s.drift.duration_shift_sd = d.value("duration_shift_sd", s.drift.duration_shift_sd);
      if (d.contains("score")) s.drift.score = detail::rule_from(d["score"], s.drift.score);
    }
    s.n_significant_change = j.value("n_significant_change", s.n_significant_change);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed cohort spec: ") + e.what());
  }
  validate(s);
  return s;
}

inline nlohmann::ordered_json to_json(const CohortSpec& s) {
  nlohmann::ordered_json j;
  j["n_participants"] = s.n_participants;
  j["seed"] = s.seed;
  j["start"] = s.start;
  j["round1_days"] = s.round1_days;
  j["round2_days"] = s.round2_days;
  j["round2_fraction"] = s.round2_fraction;
  j["stagger_days"] = s.stagger_days;
  j["hawkes"] = {{"gamma", {s.gamma.lo, s.gamma.hi}},
                 {"alpha", {s.alpha.lo, s.alpha.hi}},
                 {"beta", {s.beta.lo, s.beta.hi}}};
  j["categories"] = s.categories;
  j["concentration"] = {s.concentration.lo, s.concentration.hi};
  j["youtube_fraction"] = s.youtube_fraction;
  j["sleep"] = {{"enabled", s.sleep.enabled},
                {"start_hour_mean", s.sleep.start_hour_mean},
                {"start_hour_sd", s.sleep.start_hour_sd},
                {"duration_mean", s.sleep.duration_mean},
                {"duration_sd", s.sleep.duration_sd}};
  j["label"] = detail::rule_json(s.label);
  nlohmann::ordered_json d;
  d["mode"] = s.drift.mode == DriftSpec::Mode::kDelta ? "delta" : "label_rule";
  d["log_gamma_sd"] = s.drift.log_gamma_sd;
  d["alpha_sd"] = s.drift.alpha_sd;
  d["log_beta_sd"] = s.drift.log_beta_sd;
  d["log_concentration_sd"] = s.drift.log_concentration_sd;
  d["sleep_shift_sd"] = s.drift.sleep_shift_sd;
  d["duration_shift_sd"] = s.drift.duration_shift_sd;
  d["score"] = detail::rule_json(s.drift.score);
  j["drift"] = d;
  j["n_significant_change"] = s.n_significant_change;
  return j;
}

// ---------------------------------------------------------------------------
// Generation

namespace detail {

inline std::string participant_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "P%04d", index);
  return buf;
}

inline std::vector<double> dirichlet(std::size_t k, double concentration, std::mt19937_64& rng) {
  std::gamma_distribution<double> g(concentration, 1.0);
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& v : p) total += (v = g(rng));
  if (!(total > 0.0)) {
    // All draws underflowed: put the mass on one category.
    std::fill(p.begin(), p.end(), 0.0);
    p[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= total;
  return p;
}

// Events for one round: Hawkes times on [start, start + days), nightly sleep
// windows deleted on the local clock, one event per distinct second.
inline std::vector<ActivityEvent> generate_round(const std::string& pid, const Instant& start,
                                                 double days, const RoundTruth& truth,
                                                 const CohortSpec& spec, std::mt19937_64& rng,
                                                 const std::vector<double>& nightly_start,
                                                 const std::vector<double>& nightly_duration) {
  const double horizon = days * 24.0;
  const auto times = hawkes::simulate(truth.hawkes, horizon, rng());
  const std::int64_t window_end = start.utc_seconds + static_cast<std::int64_t>(days * kSecondsPerDay);
  const std::int64_t first_day = start.local_day();
  std::bernoulli_distribution youtube(spec.youtube_fraction);
  std::discrete_distribution<std::size_t> category(truth.category_probs.begin(),
                                                   truth.category_probs.end());
  std::vector<ActivityEvent> out;
  out.reserve(times.size());
  std::int64_t last = std::numeric_limits<std::int64_t>::min();
  for (const double t : times) {
    std::int64_t utc = start.utc_seconds + static_cast<std::int64_t>(std::floor(t * 3600.0));
    utc = std::max(utc, last + 1);
    if (utc >= window_end) break;
    const Instant ts{utc, start.offset_minutes};
    if (spec.sleep.enabled) {
      // Nights start on the previous local day and the current one.
      const std::int64_t day = ts.local_day();
      const double local = static_cast<double>(ts.local_seconds());
      bool asleep = false;
      for (std::int64_t d = day - 1; d <= day && !asleep; ++d) {
        const auto idx = static_cast<std::size_t>(std::clamp<std::int64_t>(
            d - first_day + 1, 0, static_cast<std::int64_t>(nightly_start.size()) - 1));
        const double s = static_cast<double>(d * kSecondsPerDay) + nightly_start[idx] * 3600.0;
        asleep = local >= s && local < s + nightly_duration[idx] * 3600.0;
      }
      if (asleep) continue;
    }
    ActivityEvent e;
    e.participant_id = pid;
    e.timestamp = ts;
    if (youtube(rng)) {
      e.source = Source::kYoutube;
      e.action = Action::kWatch;
    } else {
      e.source = Source::kSearch;
      e.action = Action::kQuery;
    }
    e.category = spec.categories[category(rng)];
    out.push_back(std::move(e));
    last = utc;
  }
  return out;
}

inline RoundTruth make_round(const RoundTruth* previous, const CohortSpec& spec,
                             std::mt19937_64& rng) {
  RoundTruth r;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto in_range = [&](const Range& g) { return g.lo + (g.hi - g.lo) * unif(rng); };
  if (!previous) {
    r.hawkes = {in_range(spec.gamma), in_range(spec.alpha), in_range(spec.beta)};
    r.concentration = std::exp(std::log(spec.concentration.lo) +
                               (std::log(spec.concentration.hi) - std::log(spec.concentration.lo)) * unif(rng));
    r.sleep_start = spec.sleep.start_hour_mean;
    r.sleep_duration = spec.sleep.duration_mean;
  } else {
    const auto& d = spec.drift;
    r.hawkes.gamma = previous->hawkes.gamma * std::exp(d.log_gamma_sd * normal(rng));
    r.hawkes.alpha = std::clamp(previous->hawkes.alpha + d.alpha_sd * normal(rng), 0.0, 0.95);
    r.hawkes.beta = previous->hawkes.beta * std::exp(d.log_beta_sd * normal(rng));
    r.concentration = previous->concentration * std::exp(d.log_concentration_sd * normal(rng));
    r.sleep_start = previous->sleep_start + d.sleep_shift_sd * normal(rng);
    r.sleep_duration = std::clamp(previous->sleep_duration + d.duration_shift_sd * normal(rng), 0.5, 20.0);
  }
  r.category_probs = dirichlet(spec.categories.size(), r.concentration, rng);
  return r;
}

struct Standardization {
  FeatureVector mean{};
  FeatureVector std{};
};

inline Standardization standardization(const std::vector<FeatureVector>& rows) {
  Standardization s;
  for (std::size_t c = 0; c < kNumFeatures; ++c) {
    double sum = 0, n = 0;
    for (const auto& r : rows)
      if (!is_missing(r[c])) sum += r[c], n += 1;
    s.mean[c] = n > 0 ? sum / n : 0.0;
    double var = 0;
    for (const auto& r : rows)
      if (!is_missing(r[c])) var += (r[c] - s.mean[c]) * (r[c] - s.mean[c]);
    s.std[c] = n > 0 && var > 0 ? std::sqrt(var / n) : 1.0;
  }
  return s;
}

inline double apply_rule(const LinearRule& rule, const FeatureVector& x, const Standardization& z,
                         bool with_intercept) {
  double y = with_intercept ? rule.intercept : 0.0;
  for (const auto& [name, w] : rule.weights) {
    const auto c = static_cast<std::size_t>(
        std::find(kFeatureNames.begin(), kFeatureNames.end(), name) - kFeatureNames.begin());
    if (is_missing(x[c])) continue;
    y += w * (rule.standardize ? (x[c] - z.mean[c]) / z.std[c] : x[c]);
  }
  return y;
}

inline int to_score(double y) {
  return static_cast<int>(std::clamp(std::round(y), 0.0, 21.0));
}

inline FeatureVector features_for(const std::vector<ActivityEvent>& events, const Instant& start,
                                  const Instant& end, const std::string& pid) {
  if (events.empty()) throw InputError("infeasible spec: participant " + pid + " has no events");
  ActivityTimeline t;
  t.participant_id = pid;
  t.events = events;
  t.span_start = start;
  t.span_end = end;
  const auto labels = label_events(t.events, LabelerKind::kPassthrough);
  try {
    return extract_features(t, labels);
  } catch (const InputError& e) {
    throw InputError("infeasible spec: participant " + pid + ": " + e.what());
  }
}

}  // namespace detail

inline Cohort generate_cohort(const CohortSpec& spec) {
  validate(spec);
  Cohort cohort;
  cohort.spec = spec;
  const Instant origin = parse_rfc3339(spec.start);
  const auto n = static_cast<std::size_t>(spec.n_participants);
  std::vector<std::vector<ActivityEvent>> round_events[2];
  round_events[0].resize(n);
  round_events[1].resize(n);
  std::vector<TimeWindow> windows[2];
  windows[0].resize(n);
  windows[1].resize(n);
  std::vector<bool> has_round2(n, false);

  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(spec.seed, i));
    ParticipantTruth truth;
    truth.participant_id = detail::participant_id(static_cast<int>(i) + 1);
    const Instant r1_start = origin.plus_seconds(
        static_cast<std::int64_t>(i % static_cast<std::size_t>(spec.stagger_days)) * kSecondsPerDay);
    const Instant r1_end = r1_start.plus_seconds(static_cast<std::int64_t>(spec.round1_days * kSecondsPerDay));
    const Instant r2_end = r1_end.plus_seconds(static_cast<std::int64_t>(spec.round2_days * kSecondsPerDay));
    windows[0][i] = {r1_start, r1_end};
    windows[1][i] = {r1_end, r2_end};
    has_round2[i] = std::bernoulli_distribution(spec.round2_fraction)(rng);

    std::normal_distribution<double> normal(0.0, 1.0);
    auto nights = [&](const RoundTruth& rt, double days, std::vector<double>& starts,
                      std::vector<double>& durations) {
      const auto count = static_cast<std::size_t>(days) + 3;
      starts.resize(count);
      durations.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        starts[k] = rt.sleep_start + spec.sleep.start_hour_sd * normal(rng);
        durations[k] = std::clamp(rt.sleep_duration + spec.sleep.duration_sd * normal(rng), 0.0, 23.0);
      }
    };

    truth.round1 = detail::make_round(nullptr, spec, rng);
    std::vector<double> starts, durations;
    nights(truth.round1, spec.round1_days, starts, durations);
    round_events[0][i] = detail::generate_round(truth.participant_id, r1_start, spec.round1_days,
                                                truth.round1, spec, rng, starts, durations);
    truth.round1.n_events = round_events[0][i].size();
    truth.round1.features = detail::features_for(round_events[0][i], r1_start, r1_end, truth.participant_id);
    if (has_round2[i]) {
      truth.round2 = detail::make_round(&truth.round1, spec, rng);
      nights(*truth.round2, spec.round2_days, starts, durations);
      round_events[1][i] = detail::generate_round(truth.participant_id, r1_end, spec.round2_days,
                                                  *truth.round2, spec, rng, starts, durations);
      truth.round2->n_events = round_events[1][i].size();
      truth.round2->features =
          detail::features_for(round_events[1][i], r1_end, r2_end, truth.participant_id);
    }
    cohort.truth.push_back(std::move(truth));
  }

  // Scores from the planted rules, standardized across the cohort.
  std::vector<FeatureVector> x1s, deltas;
  for (const auto& t : cohort.truth) {
    x1s.push_back(t.round1.features);
    if (t.round2) {
      FeatureVector d{};
      for (std::size_t c = 0; c < kNumFeatures; ++c) d[c] = t.round1.features[c] - t.round2->features[c];
      deltas.push_back(d);
    }
  }
  const auto z1 = detail::standardization(x1s);
  const auto zd = detail::standardization(deltas);
  int forced = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& t = cohort.truth[i];
    std::mt19937_64 rng(derive_seed(spec.seed ^ 0x5eedULL, i));
    std::normal_distribution<double> normal(0.0, 1.0);
    ParticipantRecord rec;
    rec.participant_id = t.participant_id;
    rec.round1_window = windows[0][i];
    rec.y1 = detail::to_score(detail::apply_rule(spec.label, t.round1.features, z1, true) +
                              spec.label.noise_std * normal(rng));
    if (t.round2) {
      rec.round2_window = windows[1][i];
      double y2 = 0.0;
      if (spec.drift.mode == DriftSpec::Mode::kLabelRule) {
        y2 = detail::apply_rule(spec.label, t.round2->features, z1, true) +
             spec.label.noise_std * normal(rng);
      } else {
        FeatureVector d{};
        for (std::size_t c = 0; c < kNumFeatures; ++c) d[c] = t.round1.features[c] - t.round2->features[c];
        y2 = rec.y1 + detail::apply_rule(spec.drift.score, d, zd, false) +
             spec.drift.score.noise_std * normal(rng);
      }
      int score = detail::to_score(y2);
      if (forced < spec.n_significant_change) {
        if (std::abs(score - rec.y1) < 5) score = rec.y1 + 5 <= 21 ? rec.y1 + 5 : rec.y1 - 5;
        t.forced_change = true;
        ++forced;
      }
      rec.y2 = score;
    }
    cohort.records.push_back(std::move(rec));
  }
  if (forced < spec.n_significant_change)
    throw InputError("infeasible spec: fewer follow-up participants than n_significant_change");

  for (std::size_t i = 0; i < n; ++i) {
    const auto& pid = cohort.truth[i].participant_id;
    cohort.features[{pid, 1}] = cohort.truth[i].round1.features;
    if (cohort.truth[i].round2) cohort.features[{pid, 2}] = cohort.truth[i].round2->features;
    for (const int r : {0, 1})
      cohort.events.insert(cohort.events.end(), round_events[r][i].begin(), round_events[r][i].end());
  }
  return cohort;
}

inline nlohmann::ordered_json truth_json(const Cohort& c) {
  auto round = [](const RoundTruth& r) {
    nlohmann::ordered_json j;
    j["gamma"] = r.hawkes.gamma;
    j["alpha"] = r.hawkes.alpha;
    j["beta"] = r.hawkes.beta;
    j["concentration"] = r.concentration;
    j["category_probs"] = r.category_probs;
    j["sleep_start"] = r.sleep_start;
    j["sleep_duration"] = r.sleep_duration;
    j["n_events"] = r.n_events;
    nlohmann::ordered_json f;
    for (std::size_t k = 0; k < kNumFeatures; ++k)
      f[std::string(kFeatureNames[k])] = is_missing(r.features[k]) ? nlohmann::ordered_json() : nlohmann::ordered_json(r.features[k]);
    j["features"] = f;
    return j;
  };
  nlohmann::ordered_json j;
  j["spec"] = to_json(c.spec);
  j["participants"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < c.truth.size(); ++i) {
    const auto& t = c.truth[i];
    nlohmann::ordered_json p;
    p["participant_id"] = t.participant_id;
    p["round1"] = round(t.round1);
    p["round2"] = t.round2 ? round(*t.round2) : nlohmann::ordered_json();
    p["y1"] = c.records[i].y1;
    p["y2"] = c.records[i].y2 ? nlohmann::ordered_json(*c.records[i].y2) : nlohmann::ordered_json();
    p["forced_change"] = t.forced_change;
    j["participants"].push_back(p);
  }
  return j;
}

}  // namespace phenolog::synth
