// Copyright 2026 The hposerve Authors
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
// The statistical oracles are checked against hand-computed and tabulated
// values before any test relies on them.

#include <gtest/gtest.h>

#include <cmath>

#include "support/stats.hpp"

namespace hposerve::testing {
namespace {

TEST(Wilcoxon, AllPositive) {
  const auto r = wilcoxon_signed_rank_greater({1, 2, 3, 4, 5});
  EXPECT_EQ(r.n, 5);
  EXPECT_EQ(r.w_plus, 15.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 32);
}

TEST(Wilcoxon, AllNegative) {
  EXPECT_DOUBLE_EQ(wilcoxon_signed_rank_greater({-1, -2, -3}).p_value, 1.0);
}

TEST(Wilcoxon, HandCountedTail) {
  // Ranks 1..4 with positives at 3 and 4 give W+ = 7. Subsets of {1,2,3,4}
  // summing to at least 7: {3,4} {1,2,4} {1,3,4} {2,3,4} {1,2,3,4}, 5 of 16.
  const auto r = wilcoxon_signed_rank_greater({-0.1, -0.2, 0.3, 0.4});
  EXPECT_EQ(r.w_plus, 7.0);
  EXPECT_DOUBLE_EQ(r.p_value, 5.0 / 16);
}

TEST(Wilcoxon, DropsZerosAndAveragesTies) {
  const auto r = wilcoxon_signed_rank_greater({0, 1, -1, 2});
  EXPECT_EQ(r.n, 3);
  EXPECT_EQ(r.w_plus, 1.5 + 3);
}

TEST(Wilcoxon, MatchesTabulatedCriticalValue) {
  // n = 20, one-sided alpha = 0.05: critical W+ is 150 (tables give the
  // lower tail 60 = 210 - 150). P(W+ >= 150) <= 0.05 < P(W+ >= 149).
  std::vector<double> d;
  for (int i = 1; i <= 20; ++i) d.push_back(i);
  // Flip ranks summing to 60 negative -> W+ = 150.
  for (int r : {20, 19, 18, 3}) d[static_cast<std::size_t>(r - 1)] = -r;
  const auto at150 = wilcoxon_signed_rank_greater(d);
  EXPECT_EQ(at150.w_plus, 150.0);
  EXPECT_LE(at150.p_value, 0.05);
  d[0] = -1;  // W+ = 149
  const auto at149 = wilcoxon_signed_rank_greater(d);
  EXPECT_EQ(at149.w_plus, 149.0);
  EXPECT_GT(at149.p_value, 0.05);
}

TEST(Ks, PerfectGrid) {
  std::vector<double> s;
  for (int i = 0; i < 100; ++i) s.push_back((i + 0.5) / 100);
  EXPECT_NEAR(ks_statistic(s, [](double x) { return x; }), 0.005, 1e-12);
}

TEST(Ks, ShiftedSample) {
  std::vector<double> s;
  for (int i = 0; i < 1000; ++i) s.push_back(0.5 + (i + 0.5) / 2000);
  EXPECT_NEAR(ks_statistic(s, [](double x) { return std::clamp(x, 0.0, 1.0); }),
              0.5, 1e-3);
}

}  // namespace
}  // namespace hposerve::testing
