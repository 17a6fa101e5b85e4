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

#ifndef BIPDETECT_RATES_H_
#define BIPDETECT_RATES_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "bipdetect/graph_model.h"
#include "bipdetect/numerics.h"

namespace bipdetect {

// Nonnegative extended real: a finite double or +infinity.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr explicit ExtendedReal(double value) : value_(value) {}
  static constexpr ExtendedReal Infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_infinite() const { return infinite_; }
  // Throws DomainError when infinite.
  double value() const;
  // +inf as an IEEE double when infinite.
  double ToDouble() const;
  std::string ToString() const;

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return Infinity();
    return ExtendedReal(a.value_ + b.value_);
  }
  friend bool operator<(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }
  friend bool operator==(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend bool operator<=(ExtendedReal a, ExtendedReal b) {
    return a < b || a == b;
  }
  friend ExtendedReal Min(ExtendedReal a, ExtendedReal b) {
    return b < a ? b : a;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

// The rate constants are existence-only; these defaults are working values.
struct RateConstants {
  double C_phi = 8.0;     // cutoff on n1/k1^2 in phi
  double c1 = 1.0;        // degree vs truncated-degree switch on n2/k2^2
  double c_delta = 0.01;  // lower-bound constant
  double C_delta = 16.0;  // upper-bound constant
  double C_eta = 1.0;     // density assumption constant

  void Validate() const;
};

// Which sub-test the composite test runs; the enumerator order is the
// tie-breaking precedence.
enum class Branch {
  kMaxTrunc1,  // psi12 + beta21 attains the minimum
  kMaxTrunc2,  // psi21 + beta12
  kBranchA,    // phi12
  kBranchB,    // phi21
};

std::string_view BranchName(Branch branch);

struct RateBundle {
  double psi12 = 0.0;
  double psi21 = 0.0;
  double beta12 = 0.0;
  double beta21 = 0.0;
  ExtendedReal phi12;
  ExtendedReal phi21;
  ExtendedReal R;
  ExtendedReal R_tilde;
  Branch branch = Branch::kMaxTrunc1;
};

// (1/k1) log(1 + (n2/k2^2) log(e C(n1,k1))).
double psi(int64_t k1, int64_t k2, int64_t n1, int64_t n2);

// (1/k1) log(n2/k2) when (n1 k2 / k1^2) log(n2/k2) > 1, else 0.
double beta(int64_t k1, int64_t k2, int64_t n1, int64_t n2);

// (n1/k1^2) log(1 + n2/k2^2) when n1/k1^2 <= C_phi, else infinity.
ExtendedReal phi(int64_t k1, int64_t k2, int64_t n1, int64_t n2,
                 const RateConstants& consts);

// (1/k1) log(1 + (n2 k1 / k2^2) log(n1/k1)); 0 when k1 == n1.
double psi_appendix_variant(int64_t k1, int64_t k2, int64_t n1, int64_t n2);

RateBundle rate_bundle(const ProblemShape& shape, const RateConstants& consts);

struct DeltaStarBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// lower = sqrt(c_delta p0 (1-p0) R), upper = sqrt(C_delta p0 (1-p0) R), both
// clamped to 1 - p0.
DeltaStarBounds delta_star_bounds(const ProblemShape& shape, double p0,
                                  const RateConstants& consts);

struct DensityReport {
  Branch branch = Branch::kMaxTrunc1;
  double required_lower_bound = 0.0;
  bool meets_lower_bound = false;
  bool meets_cap = false;  // p0 <= 1/4
  bool satisfied = false;
};

// Lower bound on p0 for a given composite-test branch.
double density_requirement(const ProblemShape& shape, Branch branch,
                           const RateConstants& consts);

// Evaluates the density condition for the branch selected by rate_bundle.
DensityReport density_assumption(const ProblemShape& shape, double p0,
                                 const RateConstants& consts);

}  // namespace bipdetect

#endif  // BIPDETECT_RATES_H_
