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

#include "bipdetect/binomial_kernel.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "bipdetect/errors.h"
#include "bipdetect/numerics.h"

namespace bipdetect {

namespace {

// Below this |x| the Bennett function is evaluated from its Taylor series
// sum_{k>=2} (-1)^k x^k / (k (k - 1)); the closed form cancels badly there.
constexpr double kSeriesCutoff = 1e-2;

double BennettSeries(double x) {
  double term = x;
  double sum = 0.0;
  for (int k = 2; k <= 14; ++k) {
    term *= -x;
    sum += term / static_cast<double>(k * (k - 1));
  }
  // term carries sign (-1)^(k-1) x^k; flip to (-1)^k.
  return -sum;
}

// h(u - 1) given either the offset x = u - 1 (accurate near 0) or the
// ratio u >= 0 (accurate near the boundary u = 0).
double BennettFromOffsetOrRatio(double x, double u) {
  if (std::fabs(x) < kSeriesCutoff) return BennettSeries(x);
  if (u <= 0.0) return 1.0;
  return u * std::log(u) - (u - 1.0);
}

void CheckLogPmfInputs(int64_t n, double p) {
  if (n < 1) throw DomainError("binomial size n must be positive");
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("binomial kernel needs 0 < p0 < 1, got " +
                      std::to_string(p));
  }
}

double LogPmf(int64_t n, double p, int64_t y) {
  return log_binom(n, y) + static_cast<double>(y) * std::log(p) +
         static_cast<double>(n - y) * std::log1p(-p);
}

}  // namespace

double bennett_h(double x) {
  if (!(x >= -1.0)) {
    throw DomainError("bennett_h: need x >= -1, got " + std::to_string(x));
  }
  if (x == -1.0) return 1.0;
  if (std::fabs(x) < kSeriesCutoff) return BennettSeries(x);
  return (1.0 + x) * std::log1p(x) - x;
}

BennettKernel::BennettKernel(int64_t n, double p0) : n_(n), p0_(p0) {
  CheckLogPmfInputs(n, p0);
  sigma_ = std::sqrt(static_cast<double>(n) * p0 * (1.0 - p0));
  log_pmf_.resize(static_cast<size_t>(n + 1));
  for (int64_t y = 0; y <= n; ++y) log_pmf_[y] = LogPmf(n, p0, y);
}

double BennettKernel::w(int64_t y) const {
  if (y < 0 || y > n_) {
    throw DomainError("w: count " + std::to_string(y) + " outside [0, " +
                      std::to_string(n_) + "]");
  }
  const double nd = static_cast<double>(n_);
  const double yd = static_cast<double>(y);
  const double below = nd * (1.0 - p0_);
  const double above = nd * p0_;
  const double d = yd - above;
  const double lower_part =
      below * BennettFromOffsetOrRatio(-d / below, (nd - yd) / below);
  const double upper_part =
      above * BennettFromOffsetOrRatio(d / above, yd / above);
  return lower_part + upper_part;
}

int64_t BennettKernel::k_min(double a) const {
  const double x = static_cast<double>(n_) * p0_ + a * sigma_;
  // Absorb rounding when n p0 + a sigma is an integer in exact arithmetic.
  const double slack = 1e-12 * std::max(1.0, std::fabs(x));
  const double c = std::ceil(x - slack);
  if (c <= 0.0) return 0;
  if (c > static_cast<double>(n_)) return n_ + 1;
  return static_cast<int64_t>(c);
}

double BennettKernel::ConditionalMoment(double a, int power) const {
  const int64_t k = k_min(a);
  if (k > n_) {
    throw EmptyConditionError(
        "conditioning event {Z >= " + std::to_string(a) +
        "} is empty: k_min = " + std::to_string(k) + " > n = " +
        std::to_string(n_));
  }
  const double peak =
      *std::max_element(log_pmf_.begin() + k, log_pmf_.end());
  NeumaierSum mass;
  NeumaierSum moment;
  for (int64_t y = n_; y >= k; --y) {
    const double weight = std::exp(log_pmf_[y] - peak);
    const double value = w(y);
    mass.Add(weight);
    moment.Add(weight * (power == 1 ? value : value * value));
  }
  return moment.value() / mass.value();
}

double BennettKernel::UpperTail(int64_t k) const {
  if (k <= 0) return 1.0;
  if (k > n_) return 0.0;
  const auto first = log_pmf_.begin();
  if (static_cast<double>(k) > static_cast<double>(n_) * p0_) {
    return std::exp(LogSumExp({first + k, log_pmf_.end()}));
  }
  return std::max(0.0, 1.0 - std::exp(LogSumExp({first, first + k})));
}

double w_stat(int64_t y, const BennettKernel& kernel) { return kernel.w(y); }

int64_t z_threshold_to_count(double a, const BennettKernel& kernel) {
  return kernel.k_min(a);
}

double nu(double a, const BennettKernel& kernel) {
  return kernel.ConditionalMoment(a, 1);
}

double gamma(double a, const BennettKernel& kernel) {
  return kernel.ConditionalMoment(a, 2);
}

double binomial_tail(int64_t k, int64_t n, double p) {
  if (n < 0) throw DomainError("binomial_tail: n must be nonnegative");
  if (k < 0 || k > n + 1) {
    throw DomainError("binomial_tail: k=" + std::to_string(k) +
                      " outside [0, n+1]");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("binomial_tail: p must lie in [0, 1]");
  }
  if (k == 0) return 1.0;
  if (k == n + 1) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  std::vector<double> terms;
  if (static_cast<double>(k) > static_cast<double>(n) * p) {
    for (int64_t y = n; y >= k; --y) terms.push_back(LogPmf(n, p, y));
    return std::exp(LogSumExp(terms));
  }
  for (int64_t y = 0; y < k; ++y) terms.push_back(LogPmf(n, p, y));
  return std::max(0.0, 1.0 - std::exp(LogSumExp(terms)));
}

}  // namespace bipdetect
