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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "bipdetect/binomial_kernel.h"
#include "bipdetect/combinations.h"
#include "bipdetect/counter_rng.h"
#include "bipdetect/errors.h"
#include "bipdetect/numerics.h"
#include "bipdetect/parallel.h"

namespace bipdetect {

namespace {

void CheckOpenProbability(double p0) {
  if (!(p0 > 0.0 && p0 < 1.0)) {
    throw ParameterError("p0 must lie in (0, 1), got " + std::to_string(p0));
  }
}

void CheckTau(double tau) {
  if (!(tau >= 0.0) || std::isinf(tau)) {
    throw ParameterError("tau must be a finite nonnegative number");
  }
}

bool IsTruncated(DetectorTag tag) {
  return tag == DetectorTag::kTruncDegreeAxis1 ||
         tag == DetectorTag::kTruncDegreeAxis2 ||
         tag == DetectorTag::kMaxTruncAxis1 ||
         tag == DetectorTag::kMaxTruncAxis2;
}

bool IsMax(DetectorTag tag) {
  return tag == DetectorTag::kMaxTruncAxis1 ||
         tag == DetectorTag::kMaxTruncAxis2;
}

// (w(y) - nu_tau) 1{y >= k_min(tau)} for y = 0..n.
std::vector<double> ContributionTable(int64_t n, double p0, double tau) {
  const BennettKernel kernel(n, p0);
  const double centre = nu(tau, kernel);
  const int64_t k_min = kernel.k_min(tau);
  std::vector<double> table(static_cast<size_t>(n + 1), 0.0);
  for (int64_t y = k_min; y <= n; ++y) table[y] = kernel.w(y) - centre;
  return table;
}

// Sum of table[count] over counts, left to right.
template <typename Count>
double TruncatedSum(std::span<const Count> counts,
                    const std::vector<double>& table) {
  double sum = 0.0;
  for (Count c : counts) sum += table[c];
  return sum;
}

std::vector<int32_t> ColumnCounts(const AdjacencyMatrix& a) {
  std::vector<int32_t> counts(static_cast<size_t>(a.cols()), 0);
  for (int64_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    for (int64_t j = 0; j < a.cols(); ++j) counts[j] += row[j];
  }
  return counts;
}

std::vector<int32_t> RowCounts(const AdjacencyMatrix& a) {
  std::vector<int32_t> counts(static_cast<size_t>(a.rows()), 0);
  for (int64_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    int32_t c = 0;
    for (uint8_t bit : row) c += bit;
    counts[i] = c;
  }
  return counts;
}

double TruncatedFromTable(const AdjacencyMatrix& a, Axis axis,
                          const std::vector<double>& table) {
  const std::vector<int32_t> counts =
      axis == Axis::k1 ? ColumnCounts(a) : RowCounts(a);
  return TruncatedSum<int32_t>(counts, table);
}

// Depth-first lexicographic scan over the k-subsets of rows whose smallest
// element is `first`; partial column sums are kept per depth.
double ScanSubtree(const AdjacencyMatrix& a, int64_t k, int64_t first,
                   const std::vector<double>& table) {
  const int64_t n = a.rows();
  const int64_t cols = a.cols();
  std::vector<std::vector<int32_t>> partial(
      static_cast<size_t>(k + 1),
      std::vector<int32_t>(static_cast<size_t>(cols), 0));
  std::vector<int64_t> chosen(static_cast<size_t>(k), 0);
  double best = -std::numeric_limits<double>::infinity();

  auto add_row = [&](int64_t depth, int64_t i) {
    const auto row = a.row(i);
    const auto& from = partial[depth];
    auto& to = partial[depth + 1];
    for (int64_t j = 0; j < cols; ++j) to[j] = from[j] + row[j];
  };

  chosen[0] = first;
  add_row(0, first);
  int64_t depth = 1;
  // Iterative DFS: `depth` rows are fixed; extend or backtrack.
  while (depth >= 1) {
    if (depth == k) {
      best = std::max(best, TruncatedSum<int32_t>(partial[k], table));
      // Backtrack to the deepest position that can advance.
      while (depth >= 2) {
        const int64_t pos = depth - 1;
        if (chosen[pos] < n - k + pos) {
          ++chosen[pos];
          add_row(pos, chosen[pos]);
          break;
        }
        --depth;
      }
      if (depth < 2) break;
      continue;
    }
    chosen[depth] = chosen[depth - 1] + 1;
    add_row(depth, chosen[depth]);
    ++depth;
  }
  return best;
}

double MaxFromTable(const AdjacencyMatrix& rows_as_units, int64_t k,
                    const std::vector<double>& table, int64_t budget,
                    int threads) {
  const int64_t n = rows_as_units.rows();
  if (k < 1 || k > n) {
    throw ParameterError("k_scan must lie in [1, " + std::to_string(n) + "]");
  }
  const uint64_t cap = static_cast<uint64_t>(std::max<int64_t>(budget, 0));
  if (BinomialCapped(static_cast<uint64_t>(n), static_cast<uint64_t>(k),
                     cap) > cap) {
    throw BudgetError("C(" + std::to_string(n) + ", " + std::to_string(k) +
                      ") subsets exceed the budget of " +
                      std::to_string(budget));
  }
  const int64_t firsts = n - k + 1;
  std::vector<double> best(static_cast<size_t>(firsts));
  ParallelFor(firsts, threads, [&](int64_t first) {
    best[first] = ScanSubtree(rows_as_units, k, first, table);
  });
  return *std::max_element(best.begin(), best.end());
}

struct TauSet {
  double tau1, tau2, tau3, tau4;
};

TauSet AnalyticTaus(const ProblemShape& shape, double C_tau) {
  const auto [n1, n2, k1, k2] = shape;
  const double r1 = static_cast<double>(n1) / (static_cast<double>(k1) * k1);
  const double r2 = static_cast<double>(n2) / (static_cast<double>(k2) * k2);
  const double b1 = log_binom(n1, k1);
  const double b2 = log_binom(n2, k2);
  return {std::sqrt(C_tau * std::log1p(r2)), std::sqrt(C_tau * std::log1p(r1)),
          std::sqrt(C_tau * std::log1p(r2 * b1)),
          std::sqrt(C_tau * std::log1p(r1 * b2))};
}

std::string Normalize(std::string_view name) {
  std::string out;
  for (char c : name) {
    out.push_back(c == '_' ? '-'
                           : static_cast<char>(std::tolower(
                                 static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::string_view DetectorTagName(DetectorTag tag) {
  switch (tag) {
    case DetectorTag::kTotalDegree:
      return "total-degree";
    case DetectorTag::kTruncDegreeAxis1:
      return "trunc-degree-1";
    case DetectorTag::kTruncDegreeAxis2:
      return "trunc-degree-2";
    case DetectorTag::kMaxTruncAxis1:
      return "max-trunc-1";
    case DetectorTag::kMaxTruncAxis2:
      return "max-trunc-2";
    case DetectorTag::kDeltaStar:
      return "delta-star";
  }
  return "unknown";
}

DetectorTag ParseDetectorTag(std::string_view name) {
  const std::string n = Normalize(name);
  if (n == "total-degree") return DetectorTag::kTotalDegree;
  if (n == "trunc-degree-1" || n == "trunc-degree-axis1") {
    return DetectorTag::kTruncDegreeAxis1;
  }
  if (n == "trunc-degree-2" || n == "trunc-degree-axis2") {
    return DetectorTag::kTruncDegreeAxis2;
  }
  if (n == "max-trunc-1" || n == "max-trunc-axis1") {
    return DetectorTag::kMaxTruncAxis1;
  }
  if (n == "max-trunc-2" || n == "max-trunc-axis2") {
    return DetectorTag::kMaxTruncAxis2;
  }
  if (n == "delta-star") return DetectorTag::kDeltaStar;
  throw ParameterError("unknown detector '" + std::string(name) + "'");
}

void DetectorKind::Validate() const {
  if (IsTruncated(tag) != tau.has_value()) {
    throw ParameterError(std::string(DetectorTagName(tag)) +
                         (tau ? " takes no tau" : " needs tau"));
  }
  if (IsMax(tag) != k_scan.has_value()) {
    throw ParameterError(std::string(DetectorTagName(tag)) +
                         (k_scan ? " takes no k_scan" : " needs k_scan"));
  }
  if (tau) CheckTau(*tau);
  if (k_scan && *k_scan < 1) throw ParameterError("k_scan must be positive");
}

double total_degree(const AdjacencyMatrix& a, double p0) {
  CheckOpenProbability(p0);
  const double cells = static_cast<double>(a.rows() * a.cols());
  const double centered = static_cast<double>(a.EdgeCount()) - cells * p0;
  return centered / std::sqrt(cells * p0 * (1.0 - p0));
}

double truncated_degree(const AdjacencyMatrix& a, double p0, double tau,
                        Axis axis) {
  CheckOpenProbability(p0);
  CheckTau(tau);
  const int64_t n = axis == Axis::k1 ? a.rows() : a.cols();
  return TruncatedFromTable(a, axis, ContributionTable(n, p0, tau));
}

double max_truncated_degree(const AdjacencyMatrix& a, double p0, double tau,
                            int64_t k_scan, Axis axis, int64_t budget,
                            int threads) {
  CheckOpenProbability(p0);
  CheckTau(tau);
  if (k_scan < 1) throw ParameterError("k_scan must be positive");
  const std::vector<double> table = ContributionTable(k_scan, p0, tau);
  if (axis == Axis::k1) return MaxFromTable(a, k_scan, table, budget, threads);
  return MaxFromTable(a.Transposed(), k_scan, table, budget, threads);
}

AnalyticThresholds analytic_thresholds(const ProblemShape& shape, double p0,
                                       double alpha,
                                       const ThresholdConstants& consts) {
  shape.Validate();
  CheckOpenProbability(p0);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("alpha must lie in (0, 1)");
  }
  const auto [n1, n2, k1, k2] = shape;
  const double n1d = static_cast<double>(n1);
  const double n2d = static_cast<double>(n2);
  const double r1 = n1d / (static_cast<double>(k1) * k1);
  const double r2 = n2d / (static_cast<double>(k2) * k2);
  const double b1 = log_binom(n1, k1);
  const double b2 = log_binom(n2, k2);
  const double level = std::log(2.0 / alpha);

  auto formula = [&](double count, double inner, double log_level) {
    return consts.C_star *
           (std::sqrt(count * std::exp(-consts.c_prime * std::log1p(inner)) *
                      log_level) +
            log_level);
  };

  AnalyticThresholds t;
  t.h2 = std::sqrt(4.0 * level);
  t.h2p = t.h2;
  t.h1 = formula(n2d, r2, level);
  t.h1p = formula(n1d, r1, level);
  t.h3 = formula(n2d, r2 * b1, level + b1);
  t.h4 = formula(n1d, r1 * b2, level + b2);
  const TauSet taus = AnalyticTaus(shape, consts.C_tau);
  t.tau1 = taus.tau1;
  t.tau2 = taus.tau2;
  t.tau3 = taus.tau3;
  t.tau4 = taus.tau4;
  return t;
}

Detector Detector::Resolve(const DetectorKind& kind, const ProblemShape& shape,
                           double p0, const DetectorOptions& options) {
  shape.Validate();
  CheckOpenProbability(p0);
  if (kind.tau) CheckTau(*kind.tau);
  if (kind.tau && !IsTruncated(kind.tag) &&
      kind.tag != DetectorTag::kDeltaStar) {
    throw ParameterError(std::string(DetectorTagName(kind.tag)) +
                         " takes no tau");
  }
  if (kind.k_scan && !IsMax(kind.tag)) {
    throw ParameterError(std::string(DetectorTagName(kind.tag)) +
                         " takes no k_scan");
  }

  Detector d;
  d.requested_ = kind;
  d.shape_ = shape;
  d.p0_ = p0;
  d.budget_ = options.budget;
  d.threads_ = options.threads;

  const TauSet taus = AnalyticTaus(shape, options.thresholds.C_tau);
  DetectorKind eff = kind;
  if (kind.tag == DetectorTag::kDeltaStar) {
    const RateBundle bundle = rate_bundle(shape, options.rates);
    d.branch_ = bundle.branch;
    const double r1 =
        static_cast<double>(shape.n1) / (static_cast<double>(shape.k1) * shape.k1);
    const double r2 =
        static_cast<double>(shape.n2) / (static_cast<double>(shape.k2) * shape.k2);
    eff = {};
    switch (bundle.branch) {
      case Branch::kMaxTrunc1:
        eff = {DetectorTag::kMaxTruncAxis1, kind.tau.value_or(taus.tau3),
               shape.k1};
        break;
      case Branch::kMaxTrunc2:
        eff = {DetectorTag::kMaxTruncAxis2, kind.tau.value_or(taus.tau4),
               shape.k2};
        break;
      case Branch::kBranchA:
        if (r2 >= options.rates.c1) {
          eff = {DetectorTag::kTruncDegreeAxis1, kind.tau.value_or(taus.tau1),
                 std::nullopt};
        } else {
          eff = {DetectorTag::kTotalDegree, std::nullopt, std::nullopt};
        }
        break;
      case Branch::kBranchB:
        if (r1 >= options.rates.c1) {
          eff = {DetectorTag::kTruncDegreeAxis2, kind.tau.value_or(taus.tau2),
                 std::nullopt};
        } else {
          eff = {DetectorTag::kTotalDegree, std::nullopt, std::nullopt};
        }
        break;
    }
  } else {
    switch (kind.tag) {
      case DetectorTag::kTruncDegreeAxis1:
        eff.tau = kind.tau.value_or(taus.tau1);
        break;
      case DetectorTag::kTruncDegreeAxis2:
        eff.tau = kind.tau.value_or(taus.tau2);
        break;
      case DetectorTag::kMaxTruncAxis1:
        eff.tau = kind.tau.value_or(taus.tau3);
        eff.k_scan = kind.k_scan.value_or(shape.k1);
        break;
      case DetectorTag::kMaxTruncAxis2:
        eff.tau = kind.tau.value_or(taus.tau4);
        eff.k_scan = kind.k_scan.value_or(shape.k2);
        break;
      default:
        break;
    }
  }
  eff.Validate();
  d.effective_ = eff;

  switch (eff.tag) {
    case DetectorTag::kTruncDegreeAxis1:
      d.contribution_ = ContributionTable(shape.n1, p0, *eff.tau);
      break;
    case DetectorTag::kTruncDegreeAxis2:
      d.contribution_ = ContributionTable(shape.n2, p0, *eff.tau);
      break;
    case DetectorTag::kMaxTruncAxis1:
    case DetectorTag::kMaxTruncAxis2: {
      const int64_t n =
          eff.tag == DetectorTag::kMaxTruncAxis1 ? shape.n1 : shape.n2;
      if (*eff.k_scan > n) {
        throw ParameterError("k_scan exceeds the scanned axis length");
      }
      const uint64_t cap = static_cast<uint64_t>(std::max<int64_t>(d.budget_, 0));
      if (BinomialCapped(static_cast<uint64_t>(n),
                         static_cast<uint64_t>(*eff.k_scan), cap) > cap) {
        throw BudgetError("C(" + std::to_string(n) + ", " +
                          std::to_string(*eff.k_scan) +
                          ") subsets exceed the budget of " +
                          std::to_string(d.budget_));
      }
      d.contribution_ = ContributionTable(*eff.k_scan, p0, *eff.tau);
      break;
    }
    default:
      break;
  }
  return d;
}

double Detector::Statistic(const AdjacencyMatrix& a) const {
  if (a.rows() != shape_.n1 || a.cols() != shape_.n2) {
    throw ParameterError("matrix dimensions do not match the detector shape");
  }
  switch (effective_.tag) {
    case DetectorTag::kTotalDegree:
      return total_degree(a, p0_);
    case DetectorTag::kTruncDegreeAxis1:
      return TruncatedFromTable(a, Axis::k1, contribution_);
    case DetectorTag::kTruncDegreeAxis2:
      return TruncatedFromTable(a, Axis::k2, contribution_);
    case DetectorTag::kMaxTruncAxis1:
      return MaxFromTable(a, *effective_.k_scan, contribution_, budget_,
                          threads_);
    case DetectorTag::kMaxTruncAxis2:
      return MaxFromTable(a.Transposed(), *effective_.k_scan, contribution_,
                          budget_, threads_);
    case DetectorTag::kDeltaStar:
      break;
  }
  throw ConfigurationError("unresolved composite detector");
}

double Detector::AnalyticThreshold(double alpha,
                                   const ThresholdConstants& consts) const {
  const AnalyticThresholds t = analytic_thresholds(shape_, p0_, alpha, consts);
  switch (effective_.tag) {
    case DetectorTag::kTotalDegree:
      return branch_ == Branch::kBranchB ? t.h2p : t.h2;
    case DetectorTag::kTruncDegreeAxis1:
      return t.h1;
    case DetectorTag::kTruncDegreeAxis2:
      return t.h1p;
    case DetectorTag::kMaxTruncAxis1:
      return t.h3;
    case DetectorTag::kMaxTruncAxis2:
      return t.h4;
    case DetectorTag::kDeltaStar:
      break;
  }
  throw ConfigurationError("unresolved composite detector");
}

double calibrate_threshold(const DetectorKind& kind, const ProblemShape& shape,
                           double p0, double alpha, int64_t trials,
                           uint64_t seed, const DetectorOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("alpha must lie in (0, 1)");
  }
  if (trials < 1) throw ParameterError("trials must be positive");
  DetectorOptions inner = options;
  inner.threads = 1;
  const Detector detector = Detector::Resolve(kind, shape, p0, inner);
  std::vector<double> stats(static_cast<size_t>(trials));
  ParallelFor(trials, options.threads, [&](int64_t t) {
    const AdjacencyMatrix a = sample_null(
        shape, p0, DeriveSeed(seed, kRoleCalibration, static_cast<uint64_t>(t)));
    stats[t] = detector.Statistic(a);
  });
  std::sort(stats.begin(), stats.end());
  // The slack keeps e.g. 0.9 * 10000 from rounding up to rank 9001.
  const double target = (1.0 - alpha) * static_cast<double>(trials);
  const int64_t rank = std::clamp<int64_t>(
      static_cast<int64_t>(std::ceil(target - 1e-9)), 1, trials);
  return stats[rank - 1];
}

DeltaStarThresholds DeltaStarThresholds::FromAnalytic(
    const AnalyticThresholds& t) {
  DeltaStarThresholds d;
  d.h1 = t.h1;
  d.h1p = t.h1p;
  d.h2 = t.h2;
  d.h2p = t.h2p;
  d.h3 = t.h3;
  d.h4 = t.h4;
  d.tau1 = t.tau1;
  d.tau2 = t.tau2;
  d.tau3 = t.tau3;
  d.tau4 = t.tau4;
  return d;
}

TestDecision run_delta_star(const AdjacencyMatrix& a,
                            const ProblemShape& shape, double p0,
                            const RateConstants& consts,
                            const DeltaStarThresholds& thresholds,
                            int64_t budget) {
  shape.Validate();
  if (a.rows() != shape.n1 || a.cols() != shape.n2) {
    throw ParameterError("matrix dimensions do not match the shape");
  }
  auto need = [](const std::optional<double>& v, const char* name) {
    if (!v) {
      throw ConfigurationError(std::string("threshold '") + name +
                               "' is unresolved for the selected branch");
    }
    return *v;
  };
  const RateBundle bundle = rate_bundle(shape, consts);
  const double r1 =
      static_cast<double>(shape.n1) / (static_cast<double>(shape.k1) * shape.k1);
  const double r2 =
      static_cast<double>(shape.n2) / (static_cast<double>(shape.k2) * shape.k2);
  switch (bundle.branch) {
    case Branch::kMaxTrunc1:
      return Decide(max_truncated_degree(a, p0, need(thresholds.tau3, "tau3"),
                                         shape.k1, Axis::k1, budget),
                    need(thresholds.h3, "h3"));
    case Branch::kMaxTrunc2:
      return Decide(max_truncated_degree(a, p0, need(thresholds.tau4, "tau4"),
                                         shape.k2, Axis::k2, budget),
                    need(thresholds.h4, "h4"));
    case Branch::kBranchA:
      if (r2 >= consts.c1) {
        return Decide(truncated_degree(a, p0, need(thresholds.tau1, "tau1"),
                                       Axis::k1),
                      need(thresholds.h1, "h1"));
      }
      return Decide(total_degree(a, p0), need(thresholds.h2, "h2"));
    case Branch::kBranchB:
      if (r1 >= consts.c1) {
        return Decide(truncated_degree(a, p0, need(thresholds.tau2, "tau2"),
                                       Axis::k2),
                      need(thresholds.h1p, "h1p"));
      }
      return Decide(total_degree(a, p0), need(thresholds.h2p, "h2p"));
  }
  throw ConfigurationError("unknown branch");
}

}  // namespace bipdetect
