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

#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "phenolog/ingest.hpp"
#include "phenolog/redact.hpp"
#include "phenolog/synth.hpp"
#include "test_support.hpp"

using namespace phenolog;

namespace {

ParseReport parse_string(const std::string& s, LogFormat f = LogFormat::kJsonl,
                         std::optional<int> offset = std::nullopt) {
  std::istringstream in(s);
  return parse_events(in, f, offset);
}

ActivityEvent ev(const std::string& ts, Source src = Source::kSearch,
                 std::optional<std::string> text = std::nullopt) {
  ActivityEvent e;
  e.participant_id = "A";
  e.timestamp = parse_rfc3339(ts);
  e.source = src;
  e.action = src == Source::kSearch ? Action::kQuery : Action::kWatch;
  e.text = std::move(text);
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// redact

TEST(Redact, Examples) {
  EXPECT_EQ(redact("contact me a@b.com"), "contact me [EMAIL]");
  EXPECT_EQ(redact("weather today"), "weather today");
  EXPECT_EQ(redact("ssn 123-45-6789 ok"), "ssn [SSN] ok");
  EXPECT_EQ(redact("card 4111 1111 1111 1111 thanks"), "card [CARD] thanks");
  EXPECT_EQ(redact("call (555) 123-4567 now"), "call [PHONE] now");
  EXPECT_EQ(redact("call +1 555.123.4567"), "call [PHONE]");
  EXPECT_EQ(redact("route 66 and 2019 facts"), "route 66 and 2019 facts");
}

// Planting script: clean alphabetic filler with known PII spans dropped in.
TEST(Redact, PlantedCorpus) {
  std::mt19937_64 rng(20190801);
  const std::vector<std::string> words = {"weather", "how", "to", "bake", "bread", "lyrics",
                                          "news", "near", "me", "cheap", "flights", "song"};
  auto digits = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += static_cast<char>('0' + rng() % 10);
    return s;
  };
  auto plant = [&](int kind) -> std::pair<std::string, std::string> {
    switch (kind) {
      case 0: return {words[rng() % words.size()] + "." + words[rng() % words.size()] + "@mail.example.org", "[EMAIL]"};
      case 1: return {digits(3) + "-" + digits(2) + "-" + digits(4), "[SSN]"};
      case 2: return {digits(4) + " " + digits(4) + " " + digits(4) + " " + digits(4), "[CARD]"};
      case 3: return {"(" + digits(3) + ") " + digits(3) + "-" + digits(4), "[PHONE]"};
      default: return {"+" + digits(2) + " " + digits(3) + " " + digits(3) + " " + digits(4), "[PHONE]"};
    }
  };
  for (int i = 0; i < 50; ++i) {
    std::string input, expected;
    const int segments = 3 + static_cast<int>(rng() % 5);
    bool after_plant = false;  // adjacent digit spans are ambiguous, keep a word between
    for (int k = 0; k < segments; ++k) {
      if (k) input += " ", expected += " ";
      after_plant = !after_plant && rng() % 3 == 0;
      if (after_plant) {
        auto [raw, token] = plant(static_cast<int>(rng() % 5));
        input += raw;
        expected += token;
      } else {
        const auto& w = words[rng() % words.size()];
        input += w;
        expected += w;
      }
    }
    EXPECT_EQ(redact(input), expected) << input;
  }
}

TEST(Redact, Idempotent) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "0123456789 -.()+@abcxyz.";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const auto n = rng() % 40;
    for (std::size_t k = 0; k < n; ++k) s += alphabet[rng() % alphabet.size()];
    const auto once = redact(s);
    EXPECT_EQ(redact(once), once) << s;
  }
}

// ---------------------------------------------------------------------------
// parse_events

TEST(ParseEvents, JsonlFieldMapping) {
  const auto r = parse_string(
      R"({"participant_id":"p1","timestamp":"2019-08-01T14:03:22-04:00","source":"search","action":"query","category":"News","text":"mail me at x@y.org"})"
      "\n");
  ASSERT_EQ(r.events.size(), 1u);
  const auto& e = r.events[0];
  EXPECT_EQ(e.participant_id, "p1");
  EXPECT_EQ(e.timestamp, parse_rfc3339("2019-08-01T14:03:22-04:00"));
  EXPECT_EQ(e.timestamp.offset_minutes, -240);
  EXPECT_EQ(e.source, Source::kSearch);
  EXPECT_EQ(e.category, "News");
  EXPECT_EQ(e.text, "mail me at [EMAIL]");
}

TEST(ParseEvents, MissingTimestampIsReported) {
  std::string s;
  for (int i = 0; i < 20; ++i)
    s += R"({"participant_id":"p","timestamp":"2019-08-01T14:03:22Z","source":"youtube","action":"watch","category":null,"text":null})"
         "\n";
  s += R"({"participant_id":"p","source":"search","action":"query","category":null,"text":null})"
       "\n";
  const auto r = parse_string(s);
  EXPECT_EQ(r.events.size(), 20u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 21u);
  EXPECT_NE(r.errors[0].reason.find("timestamp"), std::string::npos);
  EXPECT_EQ(error_report_jsonl(r.errors).substr(0, 9), R"({"line":2)");
}

TEST(ParseEvents, InconsistentSourceActionRejected) {
  std::string s;
  for (int i = 0; i < 10; ++i)
    s += R"({"participant_id":"p","timestamp":"2019-08-01T14:03:22Z","source":"search","action":"query","category":null,"text":null})"
         "\n\n";
  s += R"({"participant_id":"p","timestamp":"2019-08-01T14:03:22Z","source":"search","action":"watch","category":null,"text":null})";
  const auto r = parse_string(s);
  EXPECT_EQ(r.events.size(), 10u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 21u);
}

TEST(ParseEvents, TooManyMalformedIsFatal) {
  std::string s;
  for (int i = 0; i < 8; ++i)
    s += R"({"participant_id":"p","timestamp":"2019-08-01T14:03:22Z","source":"search","action":"query","category":null,"text":null})"
         "\n";
  s += "{not json\n{\"participant_id\":\"p\"}\n";
  try {
    parse_string(s);
    FAIL() << "expected ParseFailure";
  } catch (const ParseFailure& f) {
    EXPECT_EQ(f.errors().size(), 2u);
  }
}

TEST(ParseEvents, CsvWithAssumedOffset) {
  const std::string csv =
      "participant_id,timestamp,source,action,category,text\n"
      "p,2019-08-01T14:03:22,search,query,News,\"hello, world\"\n"
      "p,2019-08-01T15:00:00+02:00,youtube,watch,,\n";
  EXPECT_THROW(parse_string(csv, LogFormat::kCsv), ParseFailure);
  const auto r = parse_string(csv, LogFormat::kCsv, -240);
  ASSERT_EQ(r.events.size(), 2u);
  EXPECT_EQ(r.events[0].timestamp.offset_minutes, -240);
  EXPECT_EQ(r.events[0].text, "hello, world");
  EXPECT_EQ(r.events[1].timestamp.offset_minutes, 120);
  EXPECT_FALSE(r.events[1].category.has_value());
  EXPECT_FALSE(r.events[1].text.has_value());
}

TEST(ParseEvents, UnreadableFileIsFatal) {
  EXPECT_THROW(parse_events("/nonexistent/events.jsonl", LogFormat::kJsonl), InputError);
}

// parse . emit = identity on the synthetic corpus, line for line.
TEST(ParseEvents, SynthRoundTrip) {
  auto spec = testkit::small_spec(2, 5, 28);
  const auto cohort = synth::generate_cohort(spec);
  ASSERT_GE(cohort.events.size(), 1000u);
  std::vector<ActivityEvent> first(cohort.events.begin(), cohort.events.begin() + 1000);
  first[3].text = "query text with 555-123-4567";
  first[3].text = redact(*first[3].text);
  const auto r = parse_string(events_jsonl(first));
  EXPECT_TRUE(r.errors.empty());
  ASSERT_EQ(r.events.size(), 1000u);
  EXPECT_EQ(r.events, first);
  EXPECT_EQ(events_jsonl(r.events), events_jsonl(first));
}

// ---------------------------------------------------------------------------
// timelines

TEST(Timeline, SortsAndDedups) {
  const auto t = build_timeline({ev("2019-08-01T12:00:00Z"), ev("2019-08-01T10:00:00Z"),
                                 ev("2019-08-01T11:00:00Z"), ev("2019-08-01T10:00:00Z")},
                                "A");
  ASSERT_EQ(t.events.size(), 3u);
  EXPECT_EQ(t.events[0].timestamp, parse_rfc3339("2019-08-01T10:00:00Z"));
  EXPECT_EQ(t.events[2].timestamp, parse_rfc3339("2019-08-01T12:00:00Z"));
  EXPECT_EQ(t.span_start, t.events.front().timestamp);
  EXPECT_EQ(t.span_end, t.events.back().timestamp);
}

TEST(Timeline, TiesBySourceThenText) {
  const auto t = build_timeline({ev("2019-08-01T10:00:00Z", Source::kYoutube, "b"),
                                 ev("2019-08-01T10:00:00Z", Source::kSearch, "z"),
                                 ev("2019-08-01T10:00:00Z", Source::kSearch, "a")},
                                "A");
  ASSERT_EQ(t.events.size(), 3u);
  EXPECT_EQ(t.events[0].text, "a");
  EXPECT_EQ(t.events[1].text, "z");
  EXPECT_EQ(t.events[2].source, Source::kYoutube);
}

TEST(Timeline, EmptyAndForeignEvents) {
  EXPECT_THROW(build_timeline({}, "A"), InputError);
  auto e = ev("2019-08-01T10:00:00Z");
  e.participant_id = "B";
  EXPECT_THROW(build_timeline({e}, "A"), InputError);
}

TEST(Timeline, ShuffledSynthMatchesGenerator) {
  auto spec = testkit::small_spec(1, 9, 200);
  spec.round2_fraction = 0.0;
  spec.gamma = {3.0, 3.0};
  const auto cohort = synth::generate_cohort(spec);
  ASSERT_GE(cohort.events.size(), 10000u);
  std::vector<ActivityEvent> events(cohort.events.begin(), cohort.events.begin() + 10000);
  auto shuffled = events;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
  const auto t = build_timeline(shuffled, cohort.truth[0].participant_id);
  EXPECT_EQ(t.events, events);
}

TEST(CutWindow, IdentityEmptyAndBruteForce) {
  std::mt19937_64 rng(17);
  const auto start = parse_rfc3339("2019-03-01T00:00:00-05:00");
  const auto t = testkit::random_timeline(rng, 3000, 60, start, true);
  const auto all = cut_window(t, t.span_start, t.span_end.plus_seconds(1));
  EXPECT_EQ(all.events, t.events);
  EXPECT_THROW(cut_window(t, start.plus_seconds(-1000), start), InputError);
  EXPECT_THROW(cut_window(t, start, start), InputError);

  std::uniform_int_distribution<std::int64_t> when(-86400, 61 * 86400);
  for (int i = 0; i < 200; ++i) {
    auto a = start.plus_seconds(when(rng)), b = start.plus_seconds(when(rng));
    if (!earlier(a, b)) std::swap(a, b);
    if (!earlier(a, b)) continue;
    std::size_t expected = 0;
    for (const auto& e : t.events)
      expected += (e.timestamp.utc_seconds >= a.utc_seconds && e.timestamp.utc_seconds < b.utc_seconds);
    if (expected == 0) {
      EXPECT_THROW(cut_window(t, a, b), InputError);
      continue;
    }
    const auto w = cut_window(t, a, b);
    EXPECT_EQ(w.events.size(), expected);
    EXPECT_EQ(w.span_start, a);
    EXPECT_EQ(w.span_end, b);
  }
}

TEST(CutWindow, AdjacentWindowsPartition) {
  std::mt19937_64 rng(5);
  const auto start = parse_rfc3339("2019-03-01T00:00:00Z");
  const auto t = testkit::random_timeline(rng, 2000, 30, start);
  for (int i = 0; i < 50; ++i) {
    const auto a = start, b = start.plus_seconds(1 + static_cast<std::int64_t>(rng() % (29 * 86400))),
               c = start.plus_seconds(30 * 86400);
    auto left = cut_window(t, a, b).events;
    const auto right = cut_window(t, b, c).events;
    left.insert(left.end(), right.begin(), right.end());
    EXPECT_EQ(left, cut_window(t, a, c).events);
  }
}

// ---------------------------------------------------------------------------
// records

TEST(Records, RoundTripAndValidation) {
  ParticipantRecord r;
  r.participant_id = "P1";
  r.round1_window = {parse_rfc3339("2019-01-01T00:00:00-05:00"), parse_rfc3339("2019-03-01T00:00:00-05:00")};
  r.round2_window = TimeWindow{r.round1_window.end, parse_rfc3339("2019-05-01T00:00:00-04:00")};
  r.y1 = 12;
  r.y2 = 4;
  r.demographics = {{"gender", "f"}};
  const auto back = record_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_EQ(to_json(back).dump(), to_json(r).dump());

  auto bad = r;
  bad.y1 = 22;
  EXPECT_THROW(validate(bad), InputError);
  bad = r;
  bad.round2_window->start = r.round1_window.start;
  EXPECT_THROW(validate(bad), InputError);
  auto j = nlohmann::json::parse(to_json(r).dump());
  j["y2"] = nullptr;
  j["round2_window"] = nullptr;
  EXPECT_FALSE(record_from_json(j).y2.has_value());
  j.erase("y1");
  EXPECT_THROW(record_from_json(j), InputError);
}
