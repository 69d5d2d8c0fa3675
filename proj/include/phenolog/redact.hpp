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

// Local pattern-based scrubber for free text (queries, video titles). It is
// conservative: anything that looks like an email address, phone number, SSN
// or payment-card number is replaced by a fixed token.

#include <regex>
#include <string>
#include <utility>
#include <vector>

namespace phenolog {

namespace detail {

struct RedactionRule {
  std::regex pattern;
  const char* token;
};

// Order matters: the more specific digit patterns run before the phone rule.
inline const std::vector<RedactionRule>& redaction_rules() {
  static const std::vector<RedactionRule> rules = [] {
    const auto flags = std::regex::ECMAScript | std::regex::optimize;
    std::vector<RedactionRule> r;
    r.push_back({std::regex(R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,})",
                            flags),
                 "[EMAIL]"});
    r.push_back({std::regex(R"(\b\d{3}-\d{2}-\d{4}\b)", flags), "[SSN]"});
    r.push_back({std::regex(R"(\b(?:\d[ \-]?){12,18}\d\b)", flags), "[CARD]"});
    // 7-15 digits, single separators (space . - or parentheses) allowed.
    r.push_back({std::regex(R"(\+?\(?\d(?:[ .\-]?\)?[ .\-]?\(?\d){6,14})",
                            flags),
                 "[PHONE]"});
    return r;
  }();
  return rules;
}

}  // namespace detail

inline std::string redact(const std::string& text) {
  std::string out = text;
  for (const auto& rule : detail::redaction_rules()) {
    out = std::regex_replace(out, rule.pattern, rule.token);
  }
  return out;
}

}  // namespace phenolog
