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

// File plumbing: atomic writes and the per-(participant, round) feature CSV.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "phenolog/error.hpp"
#include "phenolog/features.hpp"
#include "phenolog/ingest.hpp"

namespace phenolog {

// Writes to "<path>.tmp" and renames over the destination.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw InputError("write failed for '" + path + "'");
  }
  std::filesystem::rename(tmp, target);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// (participant_id, round) -> features; rounds are 1 and 2.
using FeatureKey = std::pair<std::string, int>;
using FeatureTable = std::map<FeatureKey, FeatureVector>;

inline std::string feature_csv_header() {
  std::string h = "participant_id,round";
  for (const auto name : kFeatureNames) h += "," + std::string(name);
  return h;
}

inline std::string feature_csv(const FeatureTable& table) {
  std::string out = feature_csv_header() + "\n";
  for (const auto& [key, f] : table) {
    out += key.first + "," + std::to_string(key.second);
    for (const double v : f) out += "," + (is_missing(v) ? std::string() : format_double(v));
    out += "\n";
  }
  return out;
}

// Parses a feature CSV whose feature columns must appear exactly in
// `expected` order (default: the canonical 16).
inline FeatureTable read_feature_csv(const std::string& path,
                                     const std::vector<std::string>& expected = {
                                         kFeatureNames.begin(), kFeatureNames.end()}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty feature file");
  const auto header = detail::split_csv_line(line);
  if (!header || header->size() < 2 || (*header)[0] != "participant_id" ||
      (*header)[1] != "round")
    throw InputError(path + ":1: header must start with participant_id,round");
  const std::vector<std::string> names(header->begin() + 2, header->end());
  if (names != expected) throw InputError(path + ":1: feature order mismatch");
  FeatureTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    auto where = [&] { return path + ":" + std::to_string(lineno) + ": "; };
    if (!cells || cells->size() != header->size())
      throw InputError(where() + "expected " + std::to_string(header->size()) + " cells");
    if (names.size() != kNumFeatures)
      throw InputError(where() + "expected the 16 canonical features");
    FeatureVector f{};
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      const auto& cell = (*cells)[i + 2];
      if (cell.empty()) {
        f[i] = kMissing;
        continue;
      }
      char* end = nullptr;
      f[i] = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size())
        throw InputError(where() + "non-numeric value '" + cell + "'");
    }
    int round = 0;
    if ((*cells)[1] == "1") {
      round = 1;
    } else if ((*cells)[1] == "2") {
      round = 2;
    } else {
      throw InputError(where() + "round must be 1 or 2");
    }
    if (!table.emplace(FeatureKey{(*cells)[0], round}, f).second)
      throw InputError(where() + "duplicate row for participant " + (*cells)[0]);
  }
  return table;
}

}  // namespace phenolog
