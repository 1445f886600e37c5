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
#pragma once

#include <functional>
#include <vector>

namespace hposerve::testing {

/// One-sided Wilcoxon signed-rank test of H1: the differences tend to be
/// positive. Zero differences are dropped, tied magnitudes get average
/// ranks, and the p-value comes from the exact null distribution of W+
/// (all 2^n sign assignments), so it is valid for small n.
struct WilcoxonResult {
  int n = 0;             // non-zero differences
  double w_plus = 0.0;   // rank sum of positive differences
  double p_value = 1.0;  // P(W+ >= observed | H0)
};
WilcoxonResult wilcoxon_signed_rank_greater(const std::vector<double>& diffs);

/// Kolmogorov-Smirnov statistic of `samples` against the continuous `cdf`.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

}  // namespace hposerve::testing
