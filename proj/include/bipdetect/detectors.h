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

#ifndef BIPDETECT_DETECTORS_H_
#define BIPDETECT_DETECTORS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bipdetect/graph_model.h"
#include "bipdetect/rates.h"

namespace bipdetect {

inline constexpr int64_t kDefaultSubsetBudget = 1'000'000;

enum class DetectorTag {
  kTotalDegree,
  kTruncDegreeAxis1,
  kTruncDegreeAxis2,
  kMaxTruncAxis1,
  kMaxTruncAxis2,
  kDeltaStar,
};

std::string_view DetectorTagName(DetectorTag tag);
// Accepts the names produced by DetectorTagName (case-insensitive, '-' or
// '_' separators). Throws ParameterError otherwise.
DetectorTag ParseDetectorTag(std::string_view name);

// Axis 1 scores each right vertex by its degree over the left set (columns
// of A); axis 2 does the same for left vertices (rows of A).
enum class Axis { k1 = 1, k2 = 2 };

struct DetectorKind {
  DetectorTag tag = DetectorTag::kTotalDegree;
  std::optional<double> tau;      // truncation level, truncated tests only
  std::optional<int64_t> k_scan;  // subset size, max tests only

  // Checks presence of tau / k_scan against the tag.
  void Validate() const;
};

struct TestDecision {
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
};

inline TestDecision Decide(double statistic, double threshold) {
  return {statistic, threshold, statistic > threshold};
}

// Centered, normalized edge count: sum(A_ij - p0) / sqrt(n1 n2 p0 (1-p0)).
double total_degree(const AdjacencyMatrix& a, double p0);

// sum over scored vertices of (w(Y) - nu_tau) 1{Y >= k_min(tau)} with the
// Bin(n, p0) kernel, n the length of each degree sum.
double truncated_degree(const AdjacencyMatrix& a, double p0, double tau,
                        Axis axis);

// Maximum of the truncated sum over all k_scan-subsets of the summed axis,
// with the Bin(k_scan, p0) kernel. Enumerates subsets exactly; throws
// BudgetError when C(n, k_scan) exceeds `budget`.
double max_truncated_degree(const AdjacencyMatrix& a, double p0, double tau,
                            int64_t k_scan, Axis axis,
                            int64_t budget = kDefaultSubsetBudget,
                            int threads = 1);

// Constants of the analytic threshold formulas. C_tau scales the truncation
// levels tau = sqrt(C_tau * log(...)).
struct ThresholdConstants {
  double C_star = 1.0;
  double c_prime = 1.0;
  double C_tau = 3.0;
};

struct AnalyticThresholds {
  double h1 = 0.0;   // truncated degree, axis 1
  double h1p = 0.0;  // truncated degree, axis 2
  double h2 = 0.0;   // total degree (branch A fallback)
  double h2p = 0.0;  // total degree (branch B fallback)
  double h3 = 0.0;   // max truncated degree, axis 1
  double h4 = 0.0;   // max truncated degree, axis 2
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;
  double tau4 = 0.0;
};

AnalyticThresholds analytic_thresholds(const ProblemShape& shape, double p0,
                                       double alpha,
                                       const ThresholdConstants& consts);

// Options shared by everything that evaluates detectors.
struct DetectorOptions {
  RateConstants rates;
  ThresholdConstants thresholds;
  int64_t budget = kDefaultSubsetBudget;
  int threads = 1;
};

// A detector with its kernel tables precomputed for one (shape, p0). The
// composite test is resolved to the sub-test its branch selects.
class Detector {
 public:
  static Detector Resolve(const DetectorKind& kind, const ProblemShape& shape,
                          double p0, const DetectorOptions& options);

  double Statistic(const AdjacencyMatrix& a) const;

  // The requested kind, and the concrete test actually evaluated.
  const DetectorKind& requested() const { return requested_; }
  const DetectorKind& effective() const { return effective_; }
  const ProblemShape& shape() const { return shape_; }
  double p0() const { return p0_; }
  std::optional<Branch> branch() const { return branch_; }

  // Analytic threshold for the effective test.
  double AnalyticThreshold(double alpha,
                           const ThresholdConstants& consts) const;

 private:
  Detector() = default;

  DetectorKind requested_;
  DetectorKind effective_;
  ProblemShape shape_;
  double p0_ = 0.0;
  std::optional<Branch> branch_;
  int64_t budget_ = kDefaultSubsetBudget;
  int threads_ = 1;
  // contribution_[y] = (w(y) - nu) 1{y >= k_min} for truncated tests.
  std::vector<double> contribution_;
};

// Empirical (1 - alpha)-quantile of the statistic over `trials` null samples:
// the order statistic of rank ceil((1 - alpha) trials).
double calibrate_threshold(const DetectorKind& kind, const ProblemShape& shape,
                           double p0, double alpha, int64_t trials,
                           uint64_t seed, const DetectorOptions& options = {});

// Thresholds (and truncation levels) for every sub-test of the composite.
struct DeltaStarThresholds {
  std::optional<double> h1, h1p, h2, h2p, h3, h4;
  std::optional<double> tau1, tau2, tau3, tau4;

  static DeltaStarThresholds FromAnalytic(const AnalyticThresholds& t);
};

// Runs the sub-test chosen by the branch of R-tilde:
//   MAX_TRUNC_1 -> max truncated degree, axis 1, threshold h3
//   MAX_TRUNC_2 -> max truncated degree, axis 2, threshold h4
//   BRANCH_A    -> truncated degree axis 1 (h1) if n2/k2^2 >= c1,
//                  else total degree (h2)
//   BRANCH_B    -> truncated degree axis 2 (h1p) if n1/k1^2 >= c1,
//                  else total degree (h2p)
// Throws ConfigurationError if the needed threshold or tau is missing.
TestDecision run_delta_star(const AdjacencyMatrix& a,
                            const ProblemShape& shape, double p0,
                            const RateConstants& consts,
                            const DeltaStarThresholds& thresholds,
                            int64_t budget = kDefaultSubsetBudget);

}  // namespace bipdetect

#endif  // BIPDETECT_DETECTORS_H_
