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

#include "bipdetect/detectors.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bipdetect/binomial_kernel.h"
#include "bipdetect/counter_rng.h"
#include "bipdetect/errors.h"
#include "bipdetect/graph_model.h"
#include "bipdetect/rates.h"

namespace bipdetect {
namespace {

AdjacencyMatrix FromRows(const std::vector<std::string>& rows) {
  AdjacencyMatrix a(static_cast<int64_t>(rows.size()),
                    static_cast<int64_t>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) a.set(i, j, rows[i][j] == '1');
  }
  return a;
}

// Long-double reference for one contribution table entry.
long double ContributionOracle(int64_t y, int64_t n, long double p,
                               int64_t k_min) {
  auto xlogy = [](long double x, long double v) {
    return x == 0 ? 0.0L : x * std::log(v);
  };
  auto w = [&](int64_t k) {
    return xlogy(n - k, (n - k) / (n * (1 - p))) + xlogy(k, k / (n * p));
  };
  if (y < k_min) return 0.0L;
  std::vector<long double> pmf(n + 1);
  pmf[0] = std::pow(1 - p, static_cast<long double>(n));
  for (int64_t k = 0; k < n; ++k) pmf[k + 1] = pmf[k] * (n - k) / (k + 1) * p / (1 - p);
  long double mass = 0, acc = 0;
  for (int64_t k = k_min; k <= n; ++k) {
    mass += pmf[k];
    acc += pmf[k] * w(k);
  }
  return w(y) - acc / mass;
}

// Brute-force max over row subsets by bitmask; per-subset sums run over
// columns in index order like the library, so the result is bit-exact.
double BruteForceMax(const AdjacencyMatrix& a, double p0, double tau,
                     int64_t k) {
  const BennettKernel kernel(k, p0);
  const int64_t k_min = kernel.k_min(tau);
  const double centre = nu(tau, kernel);
  double best = -INFINITY;
  for (uint32_t mask = 0; mask < (1u << a.rows()); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    double sum = 0.0;
    for (int64_t j = 0; j < a.cols(); ++j) {
      int64_t count = 0;
      for (int64_t i = 0; i < a.rows(); ++i) {
        if (mask >> i & 1u) count += a.at(i, j);
      }
      sum += count >= k_min ? kernel.w(count) - centre : 0.0;
    }
    best = std::max(best, sum);
  }
  return best;
}

TEST(TotalDegreeTest, Examples) {
  EXPECT_NEAR(total_degree(FromRows({"10", "01"}), 0.5), 0.0, 1e-15);
  EXPECT_NEAR(total_degree(FromRows({"00", "00"}), 0.25), -1.0 / std::sqrt(0.75),
              1e-14);
  EXPECT_NEAR(total_degree(FromRows({"00", "00"}), 0.25), -1.154701, 1e-6);
  EXPECT_NEAR(total_degree(FromRows({"11", "11"}), 0.25), 3.464102, 1e-6);
  EXPECT_THROW(total_degree(FromRows({"11"}), 0.0), ParameterError);
}

TEST(TruncatedDegreeTest, Examples) {
  EXPECT_EQ(truncated_degree(AdjacencyMatrix(5, 7), 0.25, 1.0, Axis::k1), 0.0);
  const AdjacencyMatrix a = FromRows({"010", "010", "010", "010"});
  const double got = truncated_degree(a, 0.25, 1.0, Axis::k1);
  EXPECT_NEAR(got, 5.545177444479562 - 0.940023, 1e-6);
  EXPECT_NEAR(got, 4.605154, 1e-6);
  EXPECT_THROW(truncated_degree(a, 0.25, -1.0, Axis::k1), ParameterError);
}

TEST(TruncatedDegreeTest, EmptyConditionPropagates) {
  // k_min(tau) > n1 for a huge tau.
  EXPECT_THROW(truncated_degree(AdjacencyMatrix(4, 2), 0.25, 50.0, Axis::k1),
               EmptyConditionError);
}

TEST(TruncatedDegreeTest, TableMatchesOracle) {
  for (int64_t n : {4, 16, 64}) {
    for (double p : {0.1, 0.25}) {
      for (double tau : {0.5, 1.0, 2.0}) {
        const BennettKernel kernel(n, p);
        const int64_t k_min = kernel.k_min(tau);
        // One column of each count 0..n.
        AdjacencyMatrix a(n, n + 1);
        for (int64_t j = 0; j <= n; ++j) {
          for (int64_t i = 0; i < j; ++i) a.set(i, j, 1);
        }
        long double ref = 0;
        for (int64_t y = 0; y <= n; ++y) {
          ref += ContributionOracle(y, n, p, k_min);
        }
        EXPECT_NEAR(truncated_degree(a, p, tau, Axis::k1),
                    static_cast<double>(ref), 1e-10 * (1 + std::abs((double)ref)));
      }
    }
  }
}

TEST(MaxTruncatedTest, FullScanEqualsTruncated) {
  const AdjacencyMatrix a = sample_null({7, 11, 1, 1}, 0.3, 4);
  EXPECT_EQ(max_truncated_degree(a, 0.3, 0.8, 7, Axis::k1),
            truncated_degree(a, 0.3, 0.8, Axis::k1));
  EXPECT_EQ(max_truncated_degree(a, 0.3, 0.8, 11, Axis::k2),
            truncated_degree(a, 0.3, 0.8, Axis::k2));
}

TEST(MaxTruncatedTest, AllZerosIsZero) {
  for (double tau : {0.1, 1.0, 2.0}) {
    EXPECT_EQ(max_truncated_degree(AdjacencyMatrix(8, 5), 0.25, tau, 3,
                                   Axis::k1),
              0.0);
  }
}

TEST(MaxTruncatedTest, PlantedBlockExample) {
  const AdjacencyMatrix a = FromRows({"000", "100", "100", "000"});
  EXPECT_EQ(max_truncated_degree(a, 0.25, 1.0, 2, Axis::k1),
            BruteForceMax(a, 0.25, 1.0, 2));
  // Best pair is {1, 2}: one column at count 2.
  const BennettKernel k2(2, 0.25);
  EXPECT_NEAR(max_truncated_degree(a, 0.25, 1.0, 2, Axis::k1),
              k2.w(2) - nu(1.0, k2), 1e-15);
}

TEST(MaxTruncatedTest, MatchesBruteForceOnRandomInputs) {
  // C(12, 5) = 792 subsets per input.
  for (uint64_t t = 0; t < 100; ++t) {
    const double p0 = 0.1 + 0.3 * UniformAt(77, Stream::kDerive, t, 0);
    const int64_t k = 1 + static_cast<int64_t>(t % 6);
    // Keep k_min(tau) <= k so the conditioning event is nonempty.
    const double tau_max = (k - k * p0) / std::sqrt(k * p0 * (1 - p0));
    const double tau = tau_max * UniformAt(77, Stream::kDerive, t, 1);
    const AdjacencyMatrix a = sample_null({12, 9, 1, 1}, p0, 1000 + t);
    EXPECT_EQ(max_truncated_degree(a, p0, tau, k, Axis::k1, kDefaultSubsetBudget,
                                   1 + static_cast<int>(t % 3)),
              BruteForceMax(a, p0, tau, k))
        << t;
  }
}

TEST(MaxTruncatedTest, TransposeDuality) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const AdjacencyMatrix a = sample_null({9, 13, 1, 1}, 0.3, seed);
    EXPECT_EQ(truncated_degree(a, 0.3, 1.0, Axis::k2),
              truncated_degree(a.Transposed(), 0.3, 1.0, Axis::k1));
    EXPECT_EQ(max_truncated_degree(a, 0.3, 1.0, 4, Axis::k2),
              max_truncated_degree(a.Transposed(), 0.3, 1.0, 4, Axis::k1));
  }
}

TEST(MaxTruncatedTest, DominatesPlantedSubset) {
  const ProblemShape shape{14, 20, 4, 6};
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto [a, support] =
        sample_planted_uniform_support(shape, {0.2, 0.5}, seed);
    const BennettKernel kernel(4, 0.2);
    const int64_t k_min = kernel.k_min(0.7);
    const double centre = nu(0.7, kernel);
    double at_support = 0.0;
    for (int64_t j = 0; j < shape.n2; ++j) {
      int64_t count = 0;
      for (int64_t i : support.left) count += a.at(i, j);
      if (count >= k_min) at_support += kernel.w(count) - centre;
    }
    EXPECT_GE(max_truncated_degree(a, 0.2, 0.7, 4, Axis::k1), at_support);
  }
}

TEST(MaxTruncatedTest, BudgetAndThreads) {
  const AdjacencyMatrix a = sample_null({30, 10, 1, 1}, 0.2, 1);
  EXPECT_THROW(max_truncated_degree(a, 0.2, 1.0, 15, Axis::k1), BudgetError);
  EXPECT_THROW(max_truncated_degree(a, 0.2, 1.0, 4, Axis::k1, 100),
               BudgetError);
  const double one = max_truncated_degree(a, 0.2, 1.0, 4, Axis::k1, 1000000, 1);
  for (int threads : {2, 3, 8}) {
    EXPECT_EQ(max_truncated_degree(a, 0.2, 1.0, 4, Axis::k1, 1000000, threads),
              one);
  }
}

TEST(DetectorKindTest, Validation) {
  EXPECT_NO_THROW((DetectorKind{DetectorTag::kTotalDegree, {}, {}}.Validate()));
  EXPECT_THROW((DetectorKind{DetectorTag::kTotalDegree, 1.0, {}}.Validate()),
               ParameterError);
  EXPECT_THROW((DetectorKind{DetectorTag::kTruncDegreeAxis1, {}, {}}.Validate()),
               ParameterError);
  EXPECT_THROW((DetectorKind{DetectorTag::kMaxTruncAxis1, 1.0, {}}.Validate()),
               ParameterError);
  EXPECT_NO_THROW((DetectorKind{DetectorTag::kMaxTruncAxis2, 1.0, 3}.Validate()));
  EXPECT_EQ(ParseDetectorTag("TRUNC_DEGREE_AXIS1"), DetectorTag::kTruncDegreeAxis1);
  EXPECT_EQ(ParseDetectorTag("max-trunc-2"), DetectorTag::kMaxTruncAxis2);
  EXPECT_THROW(ParseDetectorTag("scan"), ParameterError);
}

TEST(DecisionTest, StrictAndMonotone) {
  EXPECT_FALSE(Decide(1.0, 1.0).reject);
  EXPECT_TRUE(Decide(1.0, 0.999).reject);
  for (double s : {-1.0, 0.0, 0.5, 2.0}) {
    for (double h : {-0.5, 0.4, 1.0}) {
      if (Decide(s, h + 0.1).reject) EXPECT_TRUE(Decide(s, h).reject);
    }
  }
}

TEST(AnalyticThresholdsTest, Examples) {
  const ThresholdConstants c;
  const AnalyticThresholds t =
      analytic_thresholds({100, 100, 10, 10}, 0.25, 0.2, c);
  EXPECT_NEAR(t.h2, std::sqrt(4 * std::log(10.0)), 1e-14);
  EXPECT_NEAR(t.h2, 3.034854, 1e-6);
  EXPECT_NEAR(t.tau1, std::sqrt(3 * std::log(2.0)), 1e-14);
  EXPECT_NEAR(t.tau1, 1.442027, 1e-6);
  EXPECT_GT(analytic_thresholds({20, 50, 5, 5}, 0.25, 0.2, c).h3,
            analytic_thresholds({10, 50, 5, 5}, 0.25, 0.2, c).h3);
  // Axis-2 variants swap the roles of the two sides.
  const AnalyticThresholds s =
      analytic_thresholds({40, 90, 4, 6}, 0.25, 0.1, c);
  const AnalyticThresholds r =
      analytic_thresholds({90, 40, 6, 4}, 0.25, 0.1, c);
  EXPECT_EQ(s.h1, r.h1p);
  EXPECT_EQ(s.h3, r.h4);
  EXPECT_EQ(s.tau1, r.tau2);
  EXPECT_EQ(s.tau3, r.tau4);
  EXPECT_THROW(analytic_thresholds({4, 4, 2, 2}, 0.25, 1.0, c), ParameterError);
}

TEST(DetectorTest, ResolveDefaultsAndErrors) {
  const DetectorOptions opts;
  const Detector t = Detector::Resolve({DetectorTag::kTruncDegreeAxis1, {}, {}},
                                       {100, 100, 10, 10}, 0.25, opts);
  EXPECT_NEAR(*t.effective().tau, 1.442027, 1e-6);
  const Detector m = Detector::Resolve({DetectorTag::kMaxTruncAxis2, 0.5, {}},
                                       {12, 12, 3, 3}, 0.25, opts);
  EXPECT_EQ(*m.effective().k_scan, 3);
  EXPECT_THROW(Detector::Resolve({DetectorTag::kTotalDegree, 1.0, {}},
                                 {4, 4, 2, 2}, 0.25, opts),
               ParameterError);
  EXPECT_THROW(Detector::Resolve({DetectorTag::kMaxTruncAxis1, 1.0, 9},
                                 {4, 4, 2, 2}, 0.25, opts),
               ParameterError);
  EXPECT_THROW(Detector::Resolve({DetectorTag::kMaxTruncAxis1, 1.0, {}},
                                 {64, 64, 16, 16}, 0.25, opts),
               BudgetError);
  EXPECT_THROW(Detector::Resolve({DetectorTag::kTotalDegree, {}, {}},
                                 {4, 4, 2, 2}, 0.0, opts),
               ParameterError);
}

TEST(DetectorTest, StatisticMatchesFreeFunctions) {
  const ProblemShape shape{12, 15, 3, 4};
  const AdjacencyMatrix a = sample_null(shape, 0.3, 8);
  const DetectorOptions opts;
  EXPECT_EQ(Detector::Resolve({DetectorTag::kTotalDegree, {}, {}}, shape, 0.3,
                              opts)
                .Statistic(a),
            total_degree(a, 0.3));
  EXPECT_EQ(Detector::Resolve({DetectorTag::kTruncDegreeAxis2, 0.9, {}}, shape,
                              0.3, opts)
                .Statistic(a),
            truncated_degree(a, 0.3, 0.9, Axis::k2));
  EXPECT_EQ(Detector::Resolve({DetectorTag::kMaxTruncAxis1, 0.9, 3}, shape,
                              0.3, opts)
                .Statistic(a),
            max_truncated_degree(a, 0.3, 0.9, 3, Axis::k1));
  EXPECT_THROW(Detector::Resolve({DetectorTag::kTotalDegree, {}, {}}, shape,
                                 0.3, opts)
                   .Statistic(AdjacencyMatrix(3, 3)),
               ParameterError);
}

TEST(CalibrateTest, SingleTrialIsObservedStatistic) {
  const ProblemShape shape{10, 10, 2, 2};
  const DetectorKind kind{DetectorTag::kTotalDegree, {}, {}};
  const double h = calibrate_threshold(kind, shape, 0.25, 0.1, 1, 5);
  const AdjacencyMatrix a =
      sample_null(shape, 0.25, DeriveSeed(5, kRoleCalibration, 0));
  EXPECT_EQ(h, total_degree(a, 0.25));
  EXPECT_THROW(calibrate_threshold(kind, shape, 0.25, 0.1, 0, 5),
               ParameterError);
  EXPECT_THROW(calibrate_threshold(kind, shape, 0.25, 1.5, 10, 5),
               ParameterError);
}

TEST(CalibrateTest, IndependentOfThreadCount) {
  const ProblemShape shape{12, 12, 3, 3};
  const DetectorKind kind{DetectorTag::kMaxTruncAxis1, 0.5, 3};
  DetectorOptions one;
  DetectorOptions many;
  many.threads = 5;
  EXPECT_EQ(calibrate_threshold(kind, shape, 0.25, 0.1, 300, 9, one),
            calibrate_threshold(kind, shape, 0.25, 0.1, 300, 9, many));
}

TEST(CalibrateTest, PropagatesBudgetError) {
  EXPECT_THROW(calibrate_threshold({DetectorTag::kMaxTruncAxis1, 0.5, 10},
                                   {40, 10, 10, 2}, 0.25, 0.1, 100, 1),
               BudgetError);
}

TEST(CalibrateTest, TotalDegreeQuantilesNearNormal) {
  const ProblemShape shape{64, 64, 8, 8};
  const DetectorKind kind{DetectorTag::kTotalDegree, {}, {}};
  DetectorOptions opts;
  opts.threads = 4;
  const double median =
      calibrate_threshold(kind, shape, 0.25, 0.5, 100000, 21, opts);
  EXPECT_LE(std::abs(median), 0.05);
  const double upper =
      calibrate_threshold(kind, shape, 0.25, 0.1, 100000, 22, opts);
  EXPECT_NEAR(upper, 1.2816, 0.03);
}

TEST(NullCenteringTest, TruncatedMeanWithinFourSe) {
  const int draws = 10000;
  for (int64_t n1 : {4, 16, 64}) {
    for (double p0 : {0.1, 0.25}) {
      for (double tau : {0.5, 1.0, 2.0}) {
        const ProblemShape shape{n1, 8, 1, 1};
        const Detector d = Detector::Resolve(
            {DetectorTag::kTruncDegreeAxis1, tau, {}}, shape, p0, {});
        double sum = 0.0, sum_sq = 0.0;
        for (int t = 0; t < draws; ++t) {
          const double s = d.Statistic(sample_null(shape, p0, 500000 + t));
          sum += s;
          sum_sq += s * s;
        }
        const double mean = sum / draws;
        const double sd = std::sqrt(std::max(0.0, sum_sq / draws - mean * mean));
        EXPECT_LE(std::abs(mean), 4 * sd / std::sqrt(draws) + 1e-12)
            << n1 << " " << p0 << " " << tau;
      }
    }
  }
}

TEST(DeltaStarTest, BranchAFallsBackToTotalDegree) {
  const ProblemShape shape{64, 64, 16, 16};
  const RateConstants rc;
  ASSERT_EQ(rate_bundle(shape, rc).branch, Branch::kBranchA);
  const DeltaStarThresholds th = DeltaStarThresholds::FromAnalytic(
      analytic_thresholds(shape, 0.25, 0.1, {}));
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const AdjacencyMatrix a = sample_null(shape, 0.25, seed);
    const TestDecision d = run_delta_star(a, shape, 0.25, rc, th);
    const TestDecision ref = Decide(total_degree(a, 0.25), *th.h2);
    EXPECT_EQ(d.statistic, ref.statistic);
    EXPECT_EQ(d.threshold, ref.threshold);
    EXPECT_EQ(d.reject, ref.reject);
  }
  const Detector resolved = Detector::Resolve(
      {DetectorTag::kDeltaStar, {}, {}}, shape, 0.25, {});
  EXPECT_EQ(resolved.effective().tag, DetectorTag::kTotalDegree);
  EXPECT_EQ(resolved.branch(), Branch::kBranchA);
}

TEST(DeltaStarTest, BranchATruncatedWhenRatioLarge) {
  // n2 / k2^2 = 12.5 >= c1 and the phi12 term is the smallest.
  const ProblemShape shape{10, 50, 5, 2};
  const RateConstants rc;
  const RateBundle b = rate_bundle(shape, rc);
  ASSERT_EQ(b.branch, Branch::kBranchA);
  const DeltaStarThresholds th = DeltaStarThresholds::FromAnalytic(
      analytic_thresholds(shape, 0.25, 0.1, {}));
  const AdjacencyMatrix a = sample_null(shape, 0.25, 3);
  const TestDecision d = run_delta_star(a, shape, 0.25, rc, th);
  EXPECT_EQ(d.statistic, truncated_degree(a, 0.25, *th.tau1, Axis::k1));
  EXPECT_EQ(d.threshold, *th.h1);
}

TEST(DeltaStarTest, SymmetricShapeAndTranspose) {
  const ProblemShape shape{12, 12, 3, 3};
  const RateConstants rc;
  const RateBundle b = rate_bundle(shape, rc);
  // Ties resolve toward the axis-1 option.
  EXPECT_TRUE(b.branch == Branch::kMaxTrunc1 || b.branch == Branch::kBranchA);
  const AdjacencyMatrix a = sample_null(shape, 0.25, 6);
  EXPECT_EQ(max_truncated_degree(a, 0.25, 0.5, 3, Axis::k1),
            max_truncated_degree(a.Transposed(), 0.25, 0.5, 3, Axis::k2));
  EXPECT_EQ(truncated_degree(a, 0.25, 0.5, Axis::k1),
            truncated_degree(a.Transposed(), 0.25, 0.5, Axis::k2));
}

TEST(DeltaStarTest, MaxBranchDispatch) {
  const ProblemShape shape{100, 100, 10, 10};
  RateConstants rc;
  rc.C_phi = 10;
  ASSERT_EQ(rate_bundle(shape, rc).branch, Branch::kMaxTrunc1);
  const ProblemShape small{12, 30, 3, 5};
  const RateBundle sb = rate_bundle(small, {});
  DeltaStarThresholds th;
  th.h3 = 1.0;
  th.tau3 = 0.5;
  th.h4 = 2.0;
  th.tau4 = 0.5;
  th.h1 = th.h1p = th.h2 = th.h2p = 0.0;
  th.tau1 = th.tau2 = 0.5;
  const AdjacencyMatrix a = sample_null(small, 0.25, 2);
  const TestDecision d = run_delta_star(a, small, 0.25, {}, th);
  if (sb.branch == Branch::kMaxTrunc1) {
    EXPECT_EQ(d.statistic, max_truncated_degree(a, 0.25, 0.5, 3, Axis::k1));
    EXPECT_EQ(d.threshold, 1.0);
  } else if (sb.branch == Branch::kMaxTrunc2) {
    EXPECT_EQ(d.statistic, max_truncated_degree(a, 0.25, 0.5, 5, Axis::k2));
    EXPECT_EQ(d.threshold, 2.0);
  }
}

TEST(DeltaStarTest, UnresolvedThresholdIsConfigurationError) {
  const ProblemShape shape{64, 64, 16, 16};
  DeltaStarThresholds th;
  th.h1 = 1.0;
  EXPECT_THROW(run_delta_star(AdjacencyMatrix(64, 64), shape, 0.25, {}, th),
               ConfigurationError);
}

TEST(DeltaStarTest, BudgetErrorPropagates) {
  const ProblemShape shape{100, 100, 10, 10};
  RateConstants rc;
  rc.C_phi = 10;
  DeltaStarThresholds th;
  th.h3 = 1.0;
  th.tau3 = 1.0;
  EXPECT_THROW(run_delta_star(AdjacencyMatrix(100, 100), shape, 0.25, rc, th),
               BudgetError);
}

TEST(DeltaStarTest, PowerAtUpperBound) {
  const ProblemShape shape{64, 64, 16, 16};
  const double p0 = 0.25;
  const RateConstants rc;
  const double delta = delta_star_bounds(shape, p0, rc).upper;
  const DetectorKind kind{DetectorTag::kDeltaStar, {}, {}};
  DetectorOptions opts;
  opts.threads = 4;
  const double h = calibrate_threshold(kind, shape, p0, 0.1, 1000, 31, opts);
  const Detector d = Detector::Resolve(kind, shape, p0, {});
  const int trials = 2000;
  int rejections = 0;
  for (int t = 0; t < trials; ++t) {
    const auto [a, support] = sample_planted_uniform_support(
        shape, {p0, delta}, DeriveSeed(31, kRoleAlternative, t));
    rejections += Decide(d.Statistic(a), h).reject;
  }
  EXPECT_GE(rejections / static_cast<double>(trials), 0.8);
}

}  // namespace
}  // namespace bipdetect
