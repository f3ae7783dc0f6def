// Copyright 2026 The lags Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "lags/scenario_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "lags/errors.hpp"

namespace lags {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view s, std::size_t line, const std::string& key) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("'" + key + "' expects a number, got '" + std::string(s) + "'", line);
  }
  return v;
}

std::size_t to_size(std::string_view s, std::size_t line, const std::string& key) {
  s = trim(s);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("'" + key + "' expects a non-negative integer, got '" + std::string(s) + "'",
                     line);
  }
  return v;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(s.substr(0, comma));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<double> to_doubles(std::string_view s, std::size_t line, const std::string& key) {
  std::vector<double> out;
  for (auto part : split_list(s)) out.push_back(to_double(part, line, key));
  return out;
}

std::vector<std::size_t> to_sizes(std::string_view s, std::size_t line, const std::string& key) {
  std::vector<std::size_t> out;
  for (auto part : split_list(s)) out.push_back(to_size(part, line, key));
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "dims",    "t_b",    "t_f",   "t_spar", "t_comm", "latency", "inv_bandwidth", "multiplier",
      "workers", "ratio",  "ratios", "c_u",   "grid",   "fusion_capacity"};
  return keys;
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError("missing key before '='", line_no);
    if (!known_keys().count(key)) throw ParseError("unknown key '" + key + "'", line_no);
    if (value.empty()) throw ParseError("missing value for '" + key + "'", line_no);
    if (entries.count(key)) throw ParseError("duplicate key '" + key + "'", line_no);
    entries.emplace(key, Entry{value, line_no});
  }
  const std::size_t last_line = std::max<std::size_t>(line_no, 1);

  auto require = [&](const char* key) -> const Entry& {
    auto it = entries.find(key);
    if (it == entries.end()) {
      throw ParseError(std::string("missing required key '") + key + "'", last_line);
    }
    return it->second;
  };
  auto find = [&](const char* key) -> const Entry* {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  ScenarioFile out;
  auto& s = out.scenario;
  const auto& dims = require("dims");
  s.dims = to_sizes(dims.value, dims.line, "dims");
  const auto& tb = require("t_b");
  s.backward_times = to_doubles(tb.value, tb.line, "t_b");
  const std::size_t n = s.backward_times.size();
  if (s.dims.size() != n) throw ParseError("'dims' and 't_b' differ in length", dims.line);

  auto per_layer = [&](const char* key) -> std::vector<double> {
    const Entry* e = find(key);
    if (!e) return {};
    auto v = to_doubles(e->value, e->line, key);
    if (v.size() != n) {
      throw ParseError(std::string("'") + key + "' needs " + std::to_string(n) + " values", e->line);
    }
    return v;
  };
  s.sparsify_times = per_layer("t_spar");
  s.comm_times = per_layer("t_comm");
  if (const Entry* e = find("t_f")) s.forward_time = to_double(e->value, e->line, "t_f");
  if (const Entry* e = find("latency")) s.network.latency = to_double(e->value, e->line, "latency");
  if (const Entry* e = find("inv_bandwidth")) {
    s.network.inv_bandwidth = to_double(e->value, e->line, "inv_bandwidth");
  }
  if (const Entry* e = find("multiplier")) {
    s.network.multiplier = to_double(e->value, e->line, "multiplier");
  }
  if (const Entry* e = find("workers")) s.workers = to_size(e->value, e->line, "workers");
  if (const Entry* e = find("fusion_capacity")) {
    s.fusion_capacity = to_size(e->value, e->line, "fusion_capacity");
  }
  if (const Entry* e = find("c_u")) out.ratio_cap = to_double(e->value, e->line, "c_u");
  if (const Entry* e = find("grid")) out.grid = to_doubles(e->value, e->line, "grid");

  const Entry* ratio = find("ratio");
  const Entry* ratios = find("ratios");
  if (ratio && ratios) throw ParseError("give either 'ratio' or 'ratios', not both", ratios->line);
  std::map<std::uint32_t, double> per_layer_ratio;
  const Entry* source = ratio ? ratio : ratios;
  try {
    if (ratios) {
      auto v = per_layer("ratios");
      for (std::size_t l = 0; l < n; ++l) per_layer_ratio[static_cast<std::uint32_t>(l + 1)] = v[l];
    } else {
      const double c = ratio ? to_double(ratio->value, ratio->line, "ratio") : 1.0;
      for (std::size_t l = 0; l < n; ++l) per_layer_ratio[static_cast<std::uint32_t>(l + 1)] = c;
    }
    double cap = out.ratio_cap;
    for (const auto& [id, c] : per_layer_ratio) cap = std::max(cap, c);
    s.policy = CompressionPolicy(std::move(per_layer_ratio), cap);
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), source ? source->line : last_line);
  }

  try {
    s.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), last_line);
  }
  return out;
}

ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace lags
