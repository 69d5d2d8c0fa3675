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

// Root-level semantic categories for events. Hierarchical labels such as
// "/News/Sports" are truncated to their root ("News").

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phenolog/error.hpp"
#include "phenolog/ingest.hpp"

namespace phenolog {

struct CategoryLabel {
  std::string root;
  double confidence = 1.0;
};

class Lexicon {
 public:
  Lexicon(std::map<std::string, std::string> entries,
          std::string default_category)
      : default_(std::move(default_category)) {
    if (default_.empty() || default_.find('/') != std::string::npos)
      throw InputError("lexicon default category must be a root label");
    for (auto& [k, v] : entries) {
      if (k.empty()) throw InputError("lexicon keyword must be nonempty");
      if (v.empty() || v.find('/') != std::string::npos)
        throw InputError("lexicon category for '" + k +
                         "' must be a nonempty root label");
      entries_[lowercase(k)] = v;
    }
  }

  static Lexicon from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("default") || !j["default"].is_string() ||
        !j.contains("entries") || !j["entries"].is_object())
      throw InputError(
          "lexicon must be {\"default\": str, \"entries\": {keyword: "
          "category}}");
    std::map<std::string, std::string> entries;
    for (const auto& [k, v] : j["entries"].items()) {
      if (!v.is_string())
        throw InputError("lexicon entry '" + k + "' is not a string");
      entries[k] = v.get<std::string>();
    }
    return Lexicon(std::move(entries), j["default"].get<std::string>());
  }

  static Lexicon load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read lexicon '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ": " + e.what());
    }
  }

  const std::string* find(const std::string& token) const {
    const auto it = entries_.find(lowercase(token));
    return it == entries_.end() ? nullptr : &it->second;
  }
  const std::string& default_category() const { return default_; }

  static std::string lowercase(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }

 private:
  std::map<std::string, std::string> entries_;
  std::string default_;
};

enum class LabelerKind { kPassthrough, kLexicon, kRemoteStub };

// A remote classifier is not bundled; callers may inject one.
using RemoteClassifier = std::function<CategoryLabel(const ActivityEvent&)>;

// Root of a hierarchical label: "/News/Sports" -> "News", "Arts" -> "Arts".
inline std::string root_category(const std::string& label) {
  std::size_t begin = 0;
  while (begin < label.size() && label[begin] == '/') ++begin;
  const auto end = label.find('/', begin);
  return label.substr(begin, end == std::string::npos ? std::string::npos
                                                      : end - begin);
}

inline CategoryLabel label_event(const ActivityEvent& event, LabelerKind kind,
                                 const Lexicon* lexicon = nullptr,
                                 const RemoteClassifier& remote = {}) {
  switch (kind) {
    case LabelerKind::kPassthrough: {
      if (!event.category) throw InputError("unlabeled event");
      auto root = root_category(*event.category);
      if (root.empty()) throw InputError("unlabeled event");
      return {std::move(root), 1.0};
    }
    case LabelerKind::kLexicon: {
      if (!lexicon) throw InputError("lexicon labeler requires a lexicon");
      if (event.text) {
        std::string token;
        auto flush = [&]() -> const std::string* {
          const std::string* hit = token.empty() ? nullptr : lexicon->find(token);
          token.clear();
          return hit;
        };
        for (const char c : *event.text) {
          if (std::isalnum(static_cast<unsigned char>(c))) {
            token.push_back(c);
          } else if (const auto* hit = flush()) {
            return {*hit, 1.0};
          }
        }
        if (const auto* hit = flush()) return {*hit, 1.0};
      }
      return {lexicon->default_category(), 0.5};
    }
    case LabelerKind::kRemoteStub: {
      if (!remote) throw InputError("remote labeler not configured");
      auto label = remote(event);
      label.root = root_category(label.root);
      if (label.root.empty()) throw InputError("remote labeler returned empty label");
      return label;
    }
  }
  throw std::logic_error("unknown labeler");
}

inline std::vector<CategoryLabel> label_events(
    const std::vector<ActivityEvent>& events, LabelerKind kind,
    const Lexicon* lexicon = nullptr, const RemoteClassifier& remote = {}) {
  std::vector<CategoryLabel> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(label_event(e, kind, lexicon, remote));
  return out;
}

}  // namespace phenolog
