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

#include "bipdetect/rates.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "bipdetect/errors.h"

namespace bipdetect {

namespace {

double Ratio(int64_t num, int64_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

void CheckArgs(int64_t k1, int64_t k2, int64_t n1, int64_t n2) {
  ProblemShape{n1, n2, k1, k2}.Validate();
}

}  // namespace

double ExtendedReal::value() const {
  if (infinite_) throw DomainError("extended real is infinite");
  return value_;
}

double ExtendedReal::ToDouble() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

std::string ExtendedReal::ToString() const {
  return infinite_ ? "inf" : FormatDouble(value_);
}

void RateConstants::Validate() const {
  if (!(C_phi > 0 && c1 > 0 && c_delta > 0 && C_delta > 0 && C_eta > 0)) {
    throw ParameterError("rate constants must be strictly positive");
  }
  if (c_delta > C_delta) {
    throw ParameterError("need c_delta <= C_delta");
  }
}

std::string_view BranchName(Branch branch) {
  switch (branch) {
    case Branch::kMaxTrunc1:
      return "MAX_TRUNC_1";
    case Branch::kMaxTrunc2:
      return "MAX_TRUNC_2";
    case Branch::kBranchA:
      return "BRANCH_A";
    case Branch::kBranchB:
      return "BRANCH_B";
  }
  return "UNKNOWN";
}

double psi(int64_t k1, int64_t k2, int64_t n1, int64_t n2) {
  CheckArgs(k1, k2, n1, n2);
  const double log_e_binom = 1.0 + log_binom(n1, k1);
  const double k2d = static_cast<double>(k2);
  return std::log1p(static_cast<double>(n2) / (k2d * k2d) * log_e_binom) /
         static_cast<double>(k1);
}

double beta(int64_t k1, int64_t k2, int64_t n1, int64_t n2) {
  CheckArgs(k1, k2, n1, n2);
  const double log_ratio = std::log(Ratio(n2, k2));
  const double k1d = static_cast<double>(k1);
  const double indicator =
      static_cast<double>(n1) * static_cast<double>(k2) / (k1d * k1d) *
      log_ratio;
  return indicator > 1.0 ? log_ratio / k1d : 0.0;
}

ExtendedReal phi(int64_t k1, int64_t k2, int64_t n1, int64_t n2,
                 const RateConstants& consts) {
  CheckArgs(k1, k2, n1, n2);
  const double k1d = static_cast<double>(k1);
  const double k2d = static_cast<double>(k2);
  const double left = static_cast<double>(n1) / (k1d * k1d);
  if (left > consts.C_phi) return ExtendedReal::Infinity();
  return ExtendedReal(left * std::log1p(static_cast<double>(n2) / (k2d * k2d)));
}

double psi_appendix_variant(int64_t k1, int64_t k2, int64_t n1, int64_t n2) {
  CheckArgs(k1, k2, n1, n2);
  if (k1 == n1) return 0.0;
  const double k2d = static_cast<double>(k2);
  const double inner = static_cast<double>(n2) * static_cast<double>(k1) /
                       (k2d * k2d) * std::log(Ratio(n1, k1));
  return std::log1p(inner) / static_cast<double>(k1);
}

RateBundle rate_bundle(const ProblemShape& shape,
                       const RateConstants& consts) {
  shape.Validate();
  consts.Validate();
  const auto [n1, n2, k1, k2] = shape;
  RateBundle b;
  b.psi12 = psi(k1, k2, n1, n2);
  b.psi21 = psi(k2, k1, n2, n1);
  b.beta12 = beta(k1, k2, n1, n2);
  b.beta21 = beta(k2, k1, n2, n1);
  b.phi12 = phi(k1, k2, n1, n2, consts);
  b.phi21 = phi(k2, k1, n2, n1, consts);
  b.R = Min(Min(ExtendedReal(b.psi12 + b.psi21), b.phi12), b.phi21);

  const std::array<ExtendedReal, 4> candidates = {
      ExtendedReal(b.psi12 + b.beta21), ExtendedReal(b.psi21 + b.beta12),
      b.phi12, b.phi21};
  const std::array<Branch, 4> branches = {Branch::kMaxTrunc1,
                                          Branch::kMaxTrunc2,
                                          Branch::kBranchA, Branch::kBranchB};
  // Strict comparison keeps the earliest branch on exact ties.
  size_t best = 0;
  for (size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i] < candidates[best]) best = i;
  }
  b.R_tilde = candidates[best];
  b.branch = branches[best];
  return b;
}

DeltaStarBounds delta_star_bounds(const ProblemShape& shape, double p0,
                                  const RateConstants& consts) {
  if (!(p0 > 0.0 && p0 < 1.0)) {
    throw ParameterError("delta_star_bounds: need 0 < p0 < 1");
  }
  const RateBundle bundle = rate_bundle(shape, consts);
  const double cap = 1.0 - p0;
  if (bundle.R.is_infinite()) return {cap, cap};
  const double scale = p0 * (1.0 - p0) * bundle.R.value();
  return {std::min(std::sqrt(consts.c_delta * scale), cap),
          std::min(std::sqrt(consts.C_delta * scale), cap)};
}

double density_requirement(const ProblemShape& shape, Branch branch,
                           const RateConstants& consts) {
  shape.Validate();
  const auto [n1, n2, k1, k2] = shape;
  const double n1d = static_cast<double>(n1);
  const double n2d = static_cast<double>(n2);
  const double k1d = static_cast<double>(k1);
  const double k2d = static_cast<double>(k2);
  switch (branch) {
    case Branch::kMaxTrunc1:
    case Branch::kMaxTrunc2:
      return consts.C_eta / (k1d * k2d) *
             (1.0 + log_binom(n1, k1) + log_binom(n2, k2));
    case Branch::kBranchA:
      if (n2d > k2d * k2d) {
        return consts.C_eta / n1d * std::log1p(n2d / (k2d * k2d));
      }
      break;
    case Branch::kBranchB:
      if (n1d > k1d * k1d) {
        return consts.C_eta / n2d * std::log1p(n1d / (k1d * k1d));
      }
      break;
  }
  return consts.C_eta / (n1d * n2d);
}

DensityReport density_assumption(const ProblemShape& shape, double p0,
                                 const RateConstants& consts) {
  DensityReport report;
  report.branch = rate_bundle(shape, consts).branch;
  report.required_lower_bound =
      density_requirement(shape, report.branch, consts);
  report.meets_lower_bound = p0 >= report.required_lower_bound;
  report.meets_cap = p0 <= 0.25;
  report.satisfied = report.meets_lower_bound && report.meets_cap;
  return report;
}

}  // namespace bipdetect
