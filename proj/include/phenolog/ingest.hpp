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

// Activity-log ingestion: parsing JSONL/CSV exports into validated events,
// assembling per-participant timelines and cutting analysis windows.

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phenolog/error.hpp"
#include "phenolog/redact.hpp"
#include "phenolog/timeutil.hpp"

namespace phenolog {

enum class Source { kSearch, kYoutube };
enum class Action { kQuery, kWatch };

inline const char* to_string(Source s) {
  return s == Source::kSearch ? "search" : "youtube";
}
inline const char* to_string(Action a) {
  return a == Action::kQuery ? "query" : "watch";
}

struct ActivityEvent {
  std::string participant_id;
  Instant timestamp;
  Source source = Source::kSearch;
  Action action = Action::kQuery;
  std::optional<std::string> category;
  std::optional<std::string> text;

  friend bool operator==(const ActivityEvent&, const ActivityEvent&) = default;
};

// Total order used for timelines: time first, then (source, text), then the
// remaining fields so that sorting is fully deterministic.
inline bool event_less(const ActivityEvent& a, const ActivityEvent& b) {
  auto key = [](const ActivityEvent& e) {
    return std::tie(e.timestamp.utc_seconds, e.source, e.text, e.action,
                    e.category, e.timestamp.offset_minutes, e.participant_id);
  };
  return key(a) < key(b);
}

struct ActivityTimeline {
  std::string participant_id;
  std::vector<ActivityEvent> events;  // ascending by event_less
  Instant span_start;
  Instant span_end;
};

struct TimeWindow {
  Instant start;
  Instant end;
};

struct ParticipantRecord {
  std::string participant_id;
  TimeWindow round1_window;
  std::optional<TimeWindow> round2_window;
  int y1 = 0;
  std::optional<int> y2;
  std::map<std::string, std::string> demographics;
};

inline void validate(const ParticipantRecord& r) {
  auto bad = [&](const std::string& why) {
    return InputError("participant '" + r.participant_id + "': " + why);
  };
  if (r.participant_id.empty()) throw InputError("empty participant_id");
  if (r.y1 < 0 || r.y1 > 21) throw bad("y1 outside GAD-7 range 0..21");
  if (r.y2 && (*r.y2 < 0 || *r.y2 > 21))
    throw bad("y2 outside GAD-7 range 0..21");
  if (!earlier(r.round1_window.start, r.round1_window.end))
    throw bad("round1 window is empty");
  if (r.round2_window) {
    if (!earlier(r.round2_window->start, r.round2_window->end))
      throw bad("round2 window is empty");
    if (earlier(r.round2_window->start, r.round1_window.end))
      throw bad("round2 window overlaps round1");
  }
}

// ---------------------------------------------------------------------------
// JSON mapping

inline nlohmann::ordered_json to_json(const ActivityEvent& e) {
  nlohmann::ordered_json j;
  j["participant_id"] = e.participant_id;
  j["timestamp"] = format_rfc3339(e.timestamp);
  j["source"] = to_string(e.source);
  j["action"] = to_string(e.action);
  j["category"] = e.category ? nlohmann::ordered_json(*e.category) : nullptr;
  j["text"] = e.text ? nlohmann::ordered_json(*e.text) : nullptr;
  return j;
}

namespace detail {

inline std::optional<std::string> optional_string(const nlohmann::json& j,
                                                  const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw InputError(std::string("field '") + key + "' must be string or null");
  return it->get<std::string>();
}

inline std::string required_string(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null())
    throw InputError(std::string("missing ") + key);
  if (!it->is_string())
    throw InputError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

// Builds and validates an event from already-split fields. Text is redacted.
inline ActivityEvent make_event(std::string participant_id,
                                const std::string& timestamp,
                                const std::string& source,
                                const std::string& action,
                                std::optional<std::string> category,
                                std::optional<std::string> text,
                                std::optional<int> assume_offset) {
  ActivityEvent e;
  if (participant_id.empty()) throw InputError("empty participant_id");
  e.participant_id = std::move(participant_id);
  e.timestamp = parse_rfc3339(timestamp, assume_offset);
  if (source == "search") {
    e.source = Source::kSearch;
  } else if (source == "youtube") {
    e.source = Source::kYoutube;
  } else {
    throw InputError("unknown source '" + source + "'");
  }
  if (action == "query") {
    e.action = Action::kQuery;
  } else if (action == "watch") {
    e.action = Action::kWatch;
  } else {
    throw InputError("unknown action '" + action + "'");
  }
  if ((e.source == Source::kSearch) != (e.action == Action::kQuery))
    throw InputError("source '" + source + "' is inconsistent with action '" +
                     action + "'");
  e.category = std::move(category);
  if (text) e.text = redact(*text);
  return e;
}

// Minimal RFC 4180 field splitter (quoted fields, doubled quotes).
inline std::optional<std::vector<std::string>> split_csv_line(
    const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  out.push_back(std::move(cur));
  return out;
}

}  // namespace detail

inline ActivityEvent event_from_json(const nlohmann::json& j,
                                     std::optional<int> assume_offset = {}) {
  if (!j.is_object()) throw InputError("record is not a JSON object");
  return detail::make_event(detail::required_string(j, "participant_id"),
                            detail::required_string(j, "timestamp"),
                            detail::required_string(j, "source"),
                            detail::required_string(j, "action"),
                            detail::optional_string(j, "category"),
                            detail::optional_string(j, "text"), assume_offset);
}

// ---------------------------------------------------------------------------
// parse_events

enum class LogFormat { kJsonl, kCsv };

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct ParseReport {
  std::vector<ActivityEvent> events;
  std::vector<LineError> errors;
  std::size_t records_seen = 0;  // non-blank data lines
};

// Thrown when too many records are malformed to trust the file.
class ParseFailure : public InputError {
 public:
  ParseFailure(const std::string& what, std::vector<LineError> errors)
      : InputError(what), errors_(std::move(errors)) {}
  const std::vector<LineError>& errors() const { return errors_; }

 private:
  std::vector<LineError> errors_;
};

inline constexpr double kMaxMalformedFraction = 0.10;

inline ParseReport parse_events(std::istream& in, LogFormat format,
                                std::optional<int> assume_offset = {}) {
  ParseReport report;
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> columns;
  bool header_done = format != LogFormat::kCsv;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!header_done) {
      const auto cells = detail::split_csv_line(line);
      if (!cells) throw InputError("line 1: unterminated quote in CSV header");
      for (std::size_t i = 0; i < cells->size(); ++i) columns[(*cells)[i]] = i;
      for (const char* key : {"participant_id", "timestamp", "source", "action"})
        if (!columns.count(key))
          throw InputError(std::string("CSV header lacks column '") + key + "'");
      header_done = true;
      continue;
    }
    ++report.records_seen;
    try {
      if (format == LogFormat::kJsonl) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
          throw InputError("invalid JSON");
        }
        report.events.push_back(event_from_json(j, assume_offset));
      } else {
        const auto cells = detail::split_csv_line(line);
        if (!cells) throw InputError("unterminated quote");
        auto cell = [&](const char* key) -> std::optional<std::string> {
          const auto it = columns.find(key);
          if (it == columns.end() || it->second >= cells->size() ||
              (*cells)[it->second].empty())
            return std::nullopt;
          return (*cells)[it->second];
        };
        auto required = [&](const char* key) {
          auto v = cell(key);
          if (!v) throw InputError(std::string("missing ") + key);
          return *v;
        };
        report.events.push_back(detail::make_event(
            required("participant_id"), required("timestamp"),
            required("source"), required("action"), cell("category"),
            cell("text"), assume_offset));
      }
    } catch (const InputError& err) {
      report.errors.push_back({lineno, err.what()});
    }
  }
  if (report.records_seen > 0 &&
      static_cast<double>(report.errors.size()) >
          kMaxMalformedFraction * static_cast<double>(report.records_seen)) {
    throw ParseFailure(std::to_string(report.errors.size()) + " of " +
                           std::to_string(report.records_seen) +
                           " records malformed (limit 10%)",
                       report.errors);
  }
  return report;
}

inline ParseReport parse_events(const std::string& path, LogFormat format,
                                std::optional<int> assume_offset = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  try {
    return parse_events(in, format, assume_offset);
  } catch (const ParseFailure& f) {
    throw ParseFailure(path + ": " + f.what(), f.errors());
  }
}

inline std::string error_report_jsonl(const std::vector<LineError>& errors) {
  std::string out;
  for (const auto& e : errors) {
    nlohmann::ordered_json j;
    j["line"] = e.line;
    j["reason"] = e.reason;
    out += j.dump() + "\n";
  }
  return out;
}

inline std::string events_jsonl(const std::vector<ActivityEvent>& events) {
  std::string out;
  for (const auto& e : events) out += to_json(e).dump() + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Timelines

inline ActivityTimeline build_timeline(std::vector<ActivityEvent> events,
                                       const std::string& participant_id) {
  if (events.empty()) throw InputError("empty timeline");
  for (const auto& e : events) {
    if (e.participant_id != participant_id)
      throw InputError("event for participant '" + e.participant_id +
                       "' passed to timeline of '" + participant_id + "'");
  }
  std::sort(events.begin(), events.end(), event_less);
  events.erase(std::unique(events.begin(), events.end()), events.end());
  ActivityTimeline t;
  t.participant_id = participant_id;
  t.span_start = events.front().timestamp;
  t.span_end = events.back().timestamp;
  t.events = std::move(events);
  return t;
}

// Groups a mixed event stream by participant (ordered by participant id).
inline std::map<std::string, ActivityTimeline> build_timelines(
    const std::vector<ActivityEvent>& events) {
  std::map<std::string, std::vector<ActivityEvent>> grouped;
  for (const auto& e : events) grouped[e.participant_id].push_back(e);
  std::map<std::string, ActivityTimeline> out;
  for (auto& [pid, evs] : grouped)
    out.emplace(pid, build_timeline(std::move(evs), pid));
  return out;
}

// Events with start <= t < end. The resulting span is exactly [start, end].
inline ActivityTimeline cut_window(const ActivityTimeline& timeline,
                                   const Instant& start, const Instant& end) {
  if (!earlier(start, end)) throw InputError("window start must precede end");
  ActivityTimeline out;
  out.participant_id = timeline.participant_id;
  out.span_start = start;
  out.span_end = end;
  const auto lo = std::lower_bound(
      timeline.events.begin(), timeline.events.end(), start.utc_seconds,
      [](const ActivityEvent& e, std::int64_t s) {
        return e.timestamp.utc_seconds < s;
      });
  const auto hi = std::lower_bound(
      lo, timeline.events.end(), end.utc_seconds,
      [](const ActivityEvent& e, std::int64_t s) {
        return e.timestamp.utc_seconds < s;
      });
  if (lo == hi) throw InputError("empty window");
  out.events.assign(lo, hi);
  return out;
}

// ---------------------------------------------------------------------------
// Participant records (JSONL, one record per line)

inline nlohmann::ordered_json to_json(const TimeWindow& w) {
  return nlohmann::ordered_json::array(
      {format_rfc3339(w.start), format_rfc3339(w.end)});
}

inline nlohmann::ordered_json to_json(const ParticipantRecord& r) {
  nlohmann::ordered_json j;
  j["participant_id"] = r.participant_id;
  j["round1_window"] = to_json(r.round1_window);
  j["round2_window"] =
      r.round2_window ? to_json(*r.round2_window) : nlohmann::ordered_json();
  j["y1"] = r.y1;
  j["y2"] = r.y2 ? nlohmann::ordered_json(*r.y2) : nlohmann::ordered_json();
  j["demographics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.demographics) j["demographics"][k] = v;
  return j;
}

inline ParticipantRecord record_from_json(const nlohmann::json& j) {
  auto window = [](const nlohmann::json& w) {
    if (!w.is_array() || w.size() != 2 || !w[0].is_string() ||
        !w[1].is_string())
      throw InputError("window must be [start, end] timestamps");
    return TimeWindow{parse_rfc3339(w[0].get<std::string>()),
                      parse_rfc3339(w[1].get<std::string>())};
  };
  auto score = [](const nlohmann::json& v, const char* key) {
    if (!v.is_number_integer())
      throw InputError(std::string(key) + " must be an integer");
    return v.get<int>();
  };
  ParticipantRecord r;
  r.participant_id = detail::required_string(j, "participant_id");
  if (!j.contains("round1_window")) throw InputError("missing round1_window");
  r.round1_window = window(j["round1_window"]);
  if (j.contains("round2_window") && !j["round2_window"].is_null())
    r.round2_window = window(j["round2_window"]);
  if (!j.contains("y1")) throw InputError("missing y1");
  r.y1 = score(j["y1"], "y1");
  if (j.contains("y2") && !j["y2"].is_null()) r.y2 = score(j["y2"], "y2");
  if (j.contains("demographics") && j["demographics"].is_object()) {
    for (const auto& [k, v] : j["demographics"].items())
      r.demographics[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  validate(r);
  return r;
}

inline std::vector<ParticipantRecord> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::vector<ParticipantRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::string records_jsonl(const std::vector<ParticipantRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

}  // namespace phenolog
