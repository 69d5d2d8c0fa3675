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

// The 16 explainable behavioral features computed from one activity window:
//
//   activity level      daily/weekly mean and variance of counts, as ln(1+x)
//   category entropy    -sum p ln p over root categories (weekday/weekend/all)
//   time entropy        -sum p ln p over the 24 local hours (weekday/weekend/all)
//   temporality         Hawkes (gamma, alpha, beta) fitted to the event times
//   inactivity modes    most frequent hour of gap midpoints for gaps > k hours
//
// Search and video events are pooled into one stream. Calendar quantities use
// each instant's local wall clock.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phenolog/error.hpp"
#include "phenolog/hawkes.hpp"
#include "phenolog/ingest.hpp"
#include "phenolog/taxonomy.hpp"

namespace phenolog {

inline constexpr std::size_t kNumFeatures = 16;

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "daily_mean_log", "daily_var_log", "weekly_mean_log", "weekly_var_log",
    "C_H_weekday",    "C_H_weekend",   "C_H_total",       "T_H_weekday",
    "T_H_weekend",    "T_H_total",     "gamma",           "alpha",
    "beta",           "I_8",           "I_9",             "I_10"};

namespace feature_index {
inline constexpr std::size_t kDailyMeanLog = 0, kDailyVarLog = 1,
                             kWeeklyMeanLog = 2, kWeeklyVarLog = 3,
                             kCategoryWeekday = 4, kCategoryWeekend = 5,
                             kCategoryTotal = 6, kTimeWeekday = 7,
                             kTimeWeekend = 8, kTimeTotal = 9, kGamma = 10,
                             kAlpha = 11, kBeta = 12, kInactivity8 = 13,
                             kInactivity9 = 14, kInactivity10 = 15;
}  // namespace feature_index

// Missing values (an inactivity mode with no qualifying gap) are NaN.
using FeatureVector = std::array<double, kNumFeatures>;

inline bool is_missing(double v) { return std::isnan(v); }
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// The 9 components used for score prediction, in canonical order.
inline constexpr std::size_t kNumRegressionFeatures = 9;
inline constexpr std::array<std::size_t, kNumRegressionFeatures>
    kRegressionSubset = {feature_index::kCategoryWeekday,
                         feature_index::kCategoryWeekend,
                         feature_index::kTimeWeekday,
                         feature_index::kTimeWeekend,
                         feature_index::kGamma,
                         feature_index::kAlpha,
                         feature_index::kBeta,
                         feature_index::kInactivity9,
                         feature_index::kInactivity10};

using RegressionFeatures = std::array<double, kNumRegressionFeatures>;

inline RegressionFeatures regression_subset(const FeatureVector& f) {
  RegressionFeatures out{};
  for (std::size_t i = 0; i < kNumRegressionFeatures; ++i)
    out[i] = f[kRegressionSubset[i]];
  return out;
}

enum class DayFilter { kWeekday, kWeekend, kTotal };

inline bool passes(DayFilter filter, const Instant& t) {
  switch (filter) {
    case DayFilter::kWeekday: return !t.is_weekend();
    case DayFilter::kWeekend: return t.is_weekend();
    case DayFilter::kTotal: return true;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Activity level

struct ActivityStats {
  double daily_mean_log = 0.0;
  double daily_var_log = 0.0;
  double weekly_mean_log = 0.0;
  double weekly_var_log = 0.0;
};

inline constexpr std::int64_t kMinSpanDays = 14;

namespace detail {

inline std::pair<double, double> mean_and_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (const double x : xs) var += (x - mean) * (x - mean);
  return {mean, var / static_cast<double>(xs.size())};
}

// Calendar days [first, last] covered by the timeline span, widened to any
// event whose own offset puts it on an earlier or later local day. The end
// instant is exclusive, so a span ending at local midnight adds no empty day.
inline std::pair<std::int64_t, std::int64_t> span_days(const ActivityTimeline& t) {
  std::int64_t first = t.span_start.local_day();
  std::int64_t last = t.span_end.plus_seconds(-1).local_day();
  for (const auto& e : t.events) {
    first = std::min(first, e.timestamp.local_day());
    last = std::max(last, e.timestamp.local_day());
  }
  return {first, std::max(first, last)};
}

}  // namespace detail

// Counts over every local calendar day of the span (zero days included) and
// over the Monday-start weeks lying fully inside it. Variance is the
// population variance.
inline ActivityStats activity_stats(const ActivityTimeline& t) {
  if (t.events.empty()) throw InputError("empty timeline");
  if (t.span_end.utc_seconds - t.span_start.utc_seconds < kMinSpanDays * kSecondsPerDay)
    throw InputError("window too short");
  const auto [first, last] = detail::span_days(t);
  std::vector<double> daily(static_cast<std::size_t>(last - first + 1), 0.0);
  for (const auto& e : t.events) {
    daily[static_cast<std::size_t>(e.timestamp.local_day() - first)] += 1.0;
  }
  // Epoch day 0 (1970-01-01) is a Thursday; day d is a Monday iff (d + 3) % 7 == 0.
  const std::int64_t phase = (first + 3) - floor_div(first + 3, 7) * 7;
  std::int64_t monday = first + (7 - phase) % 7;
  std::vector<double> weekly;
  for (; monday + 6 <= last; monday += 7) {
    double sum = 0.0;
    for (std::int64_t d = monday; d <= monday + 6; ++d)
      sum += daily[static_cast<std::size_t>(d - first)];
    weekly.push_back(sum);
  }
  if (weekly.empty()) throw InputError("window too short");
  const auto [dm, dv] = detail::mean_and_variance(daily);
  const auto [wm, wv] = detail::mean_and_variance(weekly);
  return {std::log1p(dm), std::log1p(dv), std::log1p(wm), std::log1p(wv)};
}

// ---------------------------------------------------------------------------
// Entropies

namespace detail {

template <typename Counts>
double entropy_from_counts(const Counts& counts, double total) {
  // Equal nonzero counts: ln k exactly, free of summation rounding.
  std::size_t k = 0;
  double first = 0.0;
  bool uniform = true;
  for (const auto& c : counts) {
    const double n = static_cast<double>(c);
    if (n <= 0.0) continue;
    if (k++ == 0) first = n;
    uniform = uniform && n == first;
  }
  if (uniform) return k > 1 ? std::log(static_cast<double>(k)) : 0.0;
  double h = 0.0;
  for (const auto& c : counts) {
    const double n = static_cast<double>(c);
    if (n > 0.0) {
      const double p = n / total;
      h -= p * std::log(p);
    }
  }
  return h + 0.0;  // no negative zero
}

}  // namespace detail

inline double category_entropy(const ActivityTimeline& t,
                               std::span<const CategoryLabel> labels,
                               DayFilter filter) {
  if (labels.size() != t.events.size())
    throw InputError("every event needs a category label");
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    if (!passes(filter, t.events[i].timestamp)) continue;
    ++counts[labels[i].root];
    ++total;
  }
  if (total == 0) throw InputError("no events in filter");
  std::vector<std::size_t> values;
  values.reserve(counts.size());
  for (const auto& [_, c] : counts) values.push_back(c);
  return detail::entropy_from_counts(values, static_cast<double>(total));
}

inline double time_entropy(const ActivityTimeline& t, DayFilter filter) {
  std::array<std::size_t, 24> bins{};
  std::size_t total = 0;
  for (const auto& e : t.events) {
    if (!passes(filter, e.timestamp)) continue;
    ++bins[static_cast<std::size_t>(e.timestamp.local_hour_bin())];
    ++total;
  }
  if (total == 0) throw InputError("no events in filter");
  return detail::entropy_from_counts(bins, static_cast<double>(total));
}

// ---------------------------------------------------------------------------
// Inactivity

// Hour label of a local time: the nearest whole hour, with exact half hours
// going down (02:30 -> 2, 02:31 -> 3, 23:45 -> 0).
inline int nearest_hour_label(double local_hour) {
  const int h = static_cast<int>(std::ceil(local_hour - 0.5));
  return ((h % 24) + 24) % 24;
}

// Mode of the midpoints of inter-event gaps strictly longer than k hours.
// Midpoints are read on the earlier event's wall clock. Ties go to the hour
// closest to 06:00 (circularly), then to the smaller hour.
inline double inactivity_mode(const ActivityTimeline& t, double k_hours) {
  if (t.events.size() < 2) throw InputError("inactivity needs at least 2 events");
  const double threshold_seconds = k_hours * static_cast<double>(kSecondsPerHour);
  std::array<int, 24> bins{};
  int qualifying = 0;
  for (std::size_t i = 1; i < t.events.size(); ++i) {
    const auto& a = t.events[i - 1].timestamp;
    const auto& b = t.events[i].timestamp;
    const double gap = static_cast<double>(b.utc_seconds - a.utc_seconds);
    if (!(gap > threshold_seconds)) continue;
    const double mid_local =
        static_cast<double>(a.local_seconds() - a.local_day() * kSecondsPerDay) +
        gap / 2.0;
    const double hour = std::fmod(mid_local, static_cast<double>(kSecondsPerDay)) /
                        static_cast<double>(kSecondsPerHour);
    ++bins[static_cast<std::size_t>(nearest_hour_label(hour))];
    ++qualifying;
  }
  if (qualifying == 0) throw InputError("no inactivity >= k");
  auto distance_to_six = [](int h) {
    const int d = std::abs(h - 6);
    return std::min(d, 24 - d);
  };
  int best = 0;
  for (int h = 1; h < 24; ++h) {
    if (bins[h] > bins[best] ||
        (bins[h] == bins[best] && distance_to_six(h) < distance_to_six(best)))
      best = h;
  }
  return static_cast<double>(best);
}

// ---------------------------------------------------------------------------
// Temporality

// Event times in hours from the span start. Distinct events sharing a second
// are spread by +1 ms per rank so the likelihood sees strictly ordered times.
inline std::vector<double> event_hours(const ActivityTimeline& t) {
  std::vector<double> out;
  out.reserve(t.events.size());
  std::int64_t prev = std::numeric_limits<std::int64_t>::min();
  int rank = 0;
  for (const auto& e : t.events) {
    rank = e.timestamp.utc_seconds == prev ? rank + 1 : 0;
    prev = e.timestamp.utc_seconds;
    const double seconds =
        static_cast<double>(e.timestamp.utc_seconds - t.span_start.utc_seconds) +
        0.001 * rank;
    out.push_back(seconds / static_cast<double>(kSecondsPerHour));
  }
  return out;
}

inline hawkes::HawkesFit temporality(const ActivityTimeline& t) {
  const auto times = event_hours(t);
  const double horizon = std::max(hours_between(t.span_start, t.span_end),
                                  times.empty() ? 0.0 : times.back());
  return hawkes::fit(times, horizon);
}

// ---------------------------------------------------------------------------

struct FeatureOptions {
  std::array<double, 3> k_hours = {8.0, 9.0, 10.0};
};

// Assembles the 16-vector. Component failures are rethrown with the
// component's name; a missing inactivity mode is stored as NaN.
inline FeatureVector extract_features(const ActivityTimeline& t,
                                      std::span<const CategoryLabel> labels,
                                      const FeatureOptions& options = {}) {
  using namespace feature_index;
  auto component = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const InputError& e) {
      throw InputError(std::string(name) + ": " + e.what());
    }
  };
  FeatureVector f{};
  const auto stats = component("activity_stats", [&] { return activity_stats(t); });
  f[kDailyMeanLog] = stats.daily_mean_log;
  f[kDailyVarLog] = stats.daily_var_log;
  f[kWeeklyMeanLog] = stats.weekly_mean_log;
  f[kWeeklyVarLog] = stats.weekly_var_log;
  const std::array<DayFilter, 3> filters = {DayFilter::kWeekday, DayFilter::kWeekend,
                                            DayFilter::kTotal};
  for (std::size_t i = 0; i < 3; ++i) {
    f[kCategoryWeekday + i] = component(
        "category_entropy", [&] { return category_entropy(t, labels, filters[i]); });
    f[kTimeWeekday + i] =
        component("time_entropy", [&] { return time_entropy(t, filters[i]); });
  }
  const auto fit = component("hawkes", [&] { return temporality(t); });
  f[kGamma] = fit.params.gamma;
  f[kAlpha] = fit.params.alpha;
  f[kBeta] = fit.params.beta;
  for (std::size_t i = 0; i < 3; ++i) {
    try {
      f[kInactivity8 + i] = inactivity_mode(t, options.k_hours[i]);
    } catch (const InputError&) {
      f[kInactivity8 + i] = kMissing;
    }
  }
  return f;
}

}  // namespace phenolog
