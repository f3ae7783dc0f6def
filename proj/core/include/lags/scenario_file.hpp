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

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lags/perf.hpp"

namespace lags {

/// A parsed performance scenario file.
///
/// The format is one `key = value` per line; `#` starts a comment. Lists are
/// comma separated and per-layer lists are ordered by layer id 1..L. Times are
/// in seconds.
///
///   dims = 1000, 200            # required
///   t_b = 0.002, 0.001          # required
///   t_f = 0.0005
///   t_spar = 0.0001, 0.0001
///   t_comm = 0.001, 0.001       # overrides the network model
///   latency = 1e-5
///   inv_bandwidth = 1e-9
///   multiplier = 7              # default workers - 1
///   workers = 8
///   ratio = 100                 # uniform ratio, or per layer with `ratios`
///   ratios = 10, 100
///   c_u = 1000
///   grid = 1, 10, 100, 1000
///   fusion_capacity = 0
struct ScenarioFile {
  PipelineScenario scenario;
  double ratio_cap = 1000.0;
  std::vector<double> grid = kDefaultRatioGrid;
};

/// Throws ParseError with the 1-based line on malformed lines, unknown or
/// repeated keys and bad values. Errors that span keys (an invalid scenario)
/// point at the last line.
ScenarioFile parse_scenario(std::string_view text);
ScenarioFile load_scenario(const std::string& path);

}  // namespace lags
