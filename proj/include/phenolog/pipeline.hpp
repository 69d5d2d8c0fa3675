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

// Events + participant windows -> feature table.

#include <algorithm>
#include <atomic>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "phenolog/features.hpp"
#include "phenolog/ingest.hpp"
#include "phenolog/io.hpp"
#include "phenolog/taxonomy.hpp"

namespace phenolog {

struct FeaturizeOptions {
  FeatureOptions features;
  LabelerKind labeler = LabelerKind::kPassthrough;
  const Lexicon* lexicon = nullptr;
  unsigned jobs = 1;
};

struct FeaturizeResult {
  FeatureTable table;
  std::vector<std::string> warnings;  // skipped (participant, round) pairs
};

namespace detail {

struct WindowJob {
  std::string participant_id;
  int round = 1;
  const ActivityTimeline* timeline = nullptr;
  TimeWindow window;
};

}  // namespace detail

// Without records, each participant's whole timeline is featurized as round 1.
// A window that cannot be featurized (empty, too short, too few events for
// the Hawkes fit) is skipped with a warning.
inline FeaturizeResult featurize(const std::vector<ActivityEvent>& events,
                                 const std::vector<ParticipantRecord>* records,
                                 const FeaturizeOptions& options = {}) {
  const auto timelines = build_timelines(events);
  FeaturizeResult result;
  std::vector<detail::WindowJob> jobs;
  if (records) {
    for (const auto& r : *records) {
      const auto it = timelines.find(r.participant_id);
      if (it == timelines.end()) {
        result.warnings.push_back(r.participant_id + ": no events");
        continue;
      }
      jobs.push_back({r.participant_id, 1, &it->second, r.round1_window});
      if (r.round2_window) jobs.push_back({r.participant_id, 2, &it->second, *r.round2_window});
    }
  } else {
    for (const auto& [pid, t] : timelines) jobs.push_back({pid, 1, &t, {t.span_start, t.span_end}});
  }

  std::vector<FeatureVector> out(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::vector<char> ok(jobs.size(), 0);
  auto run = [&](std::size_t i) {
    const auto& job = jobs[i];
    try {
      const auto window = cut_window(*job.timeline, job.window.start, job.window.end);
      const auto labels = label_events(window.events, options.labeler, options.lexicon);
      out[i] = extract_features(window, labels, options.features);
      ok[i] = 1;
    } catch (const std::runtime_error& e) {
      errors[i] = job.participant_id + " round " + std::to_string(job.round) + ": " + e.what();
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(jobs.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) run(i);
      });
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (ok[i]) {
      result.table[{jobs[i].participant_id, jobs[i].round}] = out[i];
    } else {
      result.warnings.push_back(errors[i]);
    }
  }
  return result;
}

}  // namespace phenolog
