// Copyright 2026 The bipdetect Authors.
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

#ifndef BIPDETECT_LOWER_BOUND_H_
#define BIPDETECT_LOWER_BOUND_H_

// Second moment of the uniform-prior likelihood ratio and the Bayes-risk
// lower bound it implies, plus exhaustive cross-checks for tiny shapes.

#include <cstdint>
#include <vector>

#include "bipdetect/graph_model.h"

namespace bipdetect {

inline constexpr int64_t kBruteForceBudget = 100'000'000;
inline constexpr int64_t kMaxTvCells = 20;

struct SecondMomentResult {
  double mu2 = 0.0;            // delta^2 / (p0 (1 - p0))
  double exact = 1.0;          // E[(1 + mu2)^(U V)], hypergeometric U, V
  double exp_hypergeom = 1.0;  // E[exp(mu2 U V)]
  double exp_binomial = 1.0;   // E[exp(mu2 X Y)], binomial X, Y; may be inf
  double risk_lb = 1.0;
};

// log P(U = u) for the overlap U = |K ∩ K'| of two independent uniform
// k-subsets of [n], indexed by u - max(0, 2k - n).
std::vector<double> hypergeometric_overlap_log_pmf(int64_t n, int64_t k);

double second_moment_exact(const ProblemShape& shape, double p0,
                           double delta);

// Literal average over all ordered pairs of supports. Throws BudgetError when
// C(n1,k1)^2 C(n2,k2)^2 exceeds `budget`.
double second_moment_bruteforce(const ProblemShape& shape, double p0,
                                double delta,
                                int64_t budget = kBruteForceBudget);

struct ExpBounds {
  double exp_hypergeom = 1.0;
  double exp_binomial = 1.0;
};

// X ~ Bin(k1, k1/(n1-k1)) and Y ~ Bin(k2, k2/(n2-k2)); exp_binomial is +inf
// when either success probability is undefined or exceeds 1.
ExpBounds second_moment_exp_bounds(const ProblemShape& shape, double p0,
                                   double delta);

// 1 - sqrt(value - 1) / 2 clamped to [0, 1]. Values in [1 - 1e-12, 1) are
// treated as 1; smaller ones throw DomainError.
double risk_lower_bound(double second_moment);

SecondMomentResult second_moment(const ProblemShape& shape, double p0,
                                 double delta);

// Total variation between the null and the uniform-support mixture, by
// enumerating all 2^(n1 n2) matrices. Throws BudgetError if n1 n2 > 20.
double tv_exact(const ProblemShape& shape, double p0, double delta,
                int threads = 1);

}  // namespace bipdetect

#endif  // BIPDETECT_LOWER_BOUND_H_
