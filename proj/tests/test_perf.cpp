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

#include <gtest/gtest.h>

#include <random>

#include "lags/errors.hpp"
#include "lags/perf.hpp"

using namespace lags;

namespace {

PipelineScenario explicit_scenario(double t_f, std::vector<double> t_b, std::vector<double> t_c) {
  PipelineScenario s;
  s.forward_time = t_f;
  s.backward_times = std::move(t_b);
  s.comm_times = std::move(t_c);
  return s;
}

PipelineScenario network_scenario() {
  PipelineScenario s;
  s.forward_time = 0.0;
  s.backward_times = {1e-3, 1e-3, 1e-3};
  s.dims = {1000, 1000, 1000};
  s.network = {1e-5, 1e-9, std::nullopt};
  s.workers = 2;
  s.policy = CompressionPolicy::uniform(10, 3);
  return s;
}

}  // namespace

TEST(CommTime, LatencyOnlyIgnoresRatio) {
  NetworkModel net{2e-5, 0.0, std::nullopt};
  EXPECT_EQ(comm_time(1000, 1, net, 5), 4 * 2e-5);
  EXPECT_EQ(comm_time(1000, 100, net, 5), 4 * 2e-5);
}

TEST(CommTime, AlphaBetaExample) {
  NetworkModel net{10e-6, 1e-9, 1.0};
  EXPECT_NEAR(comm_time(1000000, 1000, net, 2), 22e-6, 1e-15);
  EXPECT_EQ(sparse_message_bytes(1000000, 1000), 12000u);
  EXPECT_THROW(comm_time(10, 0.5, net, 2), ArgumentError);
  NetworkModel bad{-1, 0, std::nullopt};
  EXPECT_THROW(bad.validate(), ArgumentError);
}

TEST(CommTime, DefaultMultiplierIsWorkersMinusOne) {
  NetworkModel net{1.0, 0.0, std::nullopt};
  EXPECT_EQ(net.factor(8), 7.0);
  EXPECT_EQ(net.factor(1), 1.0);
}

TEST(Schedule, TwoLayerHandTrace) {
  auto s = explicit_scenario(0, {1, 1}, {1, 1});
  auto none = schedule(s, ScheduleMode::kNoOverlap);
  auto pipe = schedule(s, ScheduleMode::kPipelined);
  EXPECT_EQ(none.makespan, 4.0);
  EXPECT_EQ(pipe.makespan, 3.0);
  // backward:2 [0,1], backward:1 [1,2], comm:2 [1,2], comm:1 [2,3]
  ASSERT_EQ(pipe.timeline.size(), 4u);
  EXPECT_EQ(pipe.timeline[0].event, "backward:2");
  EXPECT_EQ(pipe.timeline.back().event, "comm:1");
  EXPECT_EQ(pipe.timeline.back().start, 2.0);
  EXPECT_EQ(timeline_csv(pipe),
            "event,resource,start,end\n"
            "backward:2,compute,0,1\n"
            "backward:1,compute,1,2\n"
            "comm:2,network,1,2\n"
            "comm:1,network,2,3\n");
}

TEST(Schedule, ZeroCommunication) {
  auto s = explicit_scenario(0.5, {1, 2, 3}, {0, 0, 0});
  EXPECT_EQ(schedule(s, ScheduleMode::kPipelined).makespan, 6.5);
  EXPECT_EQ(schedule(s, ScheduleMode::kNoOverlap).makespan, 6.5);
}

TEST(Schedule, SparsifyRunsOnCompute) {
  auto s = explicit_scenario(0, {1, 1}, {1, 1});
  s.sparsify_times = {0.5, 0.5};
  EXPECT_EQ(schedule(s, ScheduleMode::kNoOverlap).makespan, 5.0);
  // compute: b2 [0,1] s2 [1,1.5] b1 [1.5,2.5] s1 [2.5,3]; network: c2 [1.5,2.5] c1 [3,4]
  EXPECT_EQ(schedule(s, ScheduleMode::kPipelined).makespan, 4.0);
}

TEST(Schedule, ResourceLowerBounds) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 7;
    std::vector<double> tb(n), tc(n);
    for (auto& t : tb) t = u(rng);
    for (auto& t : tc) t = u(rng);
    auto s = explicit_scenario(u(rng), tb, tc);
    auto pipe = schedule(s, ScheduleMode::kPipelined).makespan;
    // The first communication cannot start before layer L finishes backprop.
    const double bound = std::max(s.forward_time + s.total_backward(),
                                  s.forward_time + tb.back() + s.total_comm());
    EXPECT_GE(pipe, bound - 1e-12);
    EXPECT_LE(pipe, schedule(s, ScheduleMode::kNoOverlap).makespan + 1e-12);
  }
}

TEST(Schedule, FusionGroupsLayers) {
  auto s = network_scenario();
  // Each layer sends k = 100 entries = 1200 bytes; capacity 2000 pairs 3+2, then 1 alone.
  s.fusion_capacity = 2000;
  auto r = schedule(s, ScheduleMode::kPipelined);
  std::vector<std::string> comms;
  for (const auto& e : r.timeline) {
    if (e.resource == "network") comms.push_back(e.event);
  }
  EXPECT_EQ(comms, (std::vector<std::string>{"comm:3+2", "comm:1"}));
  s.comm_times = {1, 1, 1};
  EXPECT_THROW(schedule(s, ScheduleMode::kPipelined), ArgumentError);
}

TEST(SMax, Values) {
  EXPECT_NEAR(s_max(1, 2, 1), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(s_max_ratio_form(1, 2, 1), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(s_max(1, 2, 1e-12), 1.0, 1e-9);
  EXPECT_NEAR(s_max(0, 1, 1), 2.0, 1e-15);
  EXPECT_THROW(s_max(1, 0, 1), ArgumentError);
  EXPECT_THROW(s_max(1, 1, 0), ArgumentError);
  EXPECT_THROW(s_max(-1, 1, 1), ArgumentError);
}

TEST(SMax, BalancedCaseIsTheLargestForATotal) {
  // Fixed t_f and t_b + t_c: the bound peaks at t_b = t_c.
  const double peak = s_max(0.1, 1.0, 1.0);
  for (double split : {0.2, 0.5, 0.8, 1.2, 1.5, 1.8}) {
    EXPECT_LT(s_max(0.1, split, 2.0 - split), peak);
  }
}

TEST(SelectRatios, GridScan) {
  // comm_time(c) = 1200 ms / c for d = 100000: factor 1, latency 0,
  // k * 12 bytes * b = 1.2 s / c with b = 1e-6.
  PipelineScenario s;
  s.backward_times = {0.010, 0.010};
  s.sparsify_times = {0.001, 0.001};
  s.dims = {100000, 100000};
  s.network = {0.0, 1e-6, 1.0};
  s.policy = CompressionPolicy::uniform(1, 2);
  auto p = select_ratios(s, 1000, {1, 10, 100, 1000});
  EXPECT_EQ(p.ratio(1), 1000.0);
  EXPECT_EQ(p.ratio(2), 1000.0);
  EXPECT_EQ(p.ratio_cap(), 1000.0);
  // A generous budget allows c = 100 on layer 2, which hides behind t_b(1).
  s.backward_times = {0.020, 0.001};
  auto q = select_ratios(s, 1000, {1, 10, 100, 1000});
  EXPECT_EQ(q.ratio(2), 100.0);
  EXPECT_EQ(q.ratio(1), 100.0);
}

TEST(SelectRatios, UnsatisfiableFallsBackToCap) {
  PipelineScenario s;
  s.backward_times = {0.001};
  s.sparsify_times = {0.005};
  s.dims = {1000};
  s.network = {0.0, 1e-9, 1.0};
  auto p = select_ratios(s, 250, {1, 10, 100});
  EXPECT_EQ(p.ratio(1), 250.0);
}

TEST(SelectRatios, GridErrors) {
  auto s = network_scenario();
  EXPECT_THROW(select_ratios(s, 1000, {}), ArgumentError);
  EXPECT_THROW(select_ratios(s, 1000, {10, 1}), ArgumentError);
  EXPECT_THROW(select_ratios(s, 0.5, {1}), ArgumentError);
}

TEST(SelectRatios, ResultRespectsCap) {
  auto s = network_scenario();
  auto p = select_ratios(s, 50, kDefaultRatioGrid);
  for (auto [layer, c] : p.ratios()) EXPECT_LE(c, 50.0);
}
