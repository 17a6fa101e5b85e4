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

#ifndef BIPDETECT_BINOMIAL_KERNEL_H_
#define BIPDETECT_BINOMIAL_KERNEL_H_

#include <cstdint>
#include <vector>

namespace bipdetect {

// Bennett function h(x) = (1 + x) log(1 + x) - x, with h(-1) = 1.
// Throws DomainError for x < -1.
double bennett_h(double x);

// Exact machinery for Y ~ Bin(n, p0): the statistic kernel
//
//   w(y) = n(1 - p0) h(-(y - n p0) / (n(1 - p0))) + n p0 h((y - n p0) / (n p0))
//
// and its conditional moments above a standardized threshold a, where the
// event {(Y - n p0) / sigma >= a} is realized as {Y >= k_min(a)}.
//
// Immutable after construction; safe to share across threads.
class BennettKernel {
 public:
  BennettKernel(int64_t n, double p0);

  int64_t n() const { return n_; }
  double p0() const { return p0_; }
  double sigma() const { return sigma_; }

  double w(int64_t y) const;
  int64_t k_min(double a) const;
  double log_pmf(int64_t y) const { return log_pmf_[y]; }

  // E[w(Y)^power | Y >= k_min(a)] for power 1 or 2.
  double ConditionalMoment(double a, int power) const;

  // P(Y >= k).
  double UpperTail(int64_t k) const;

 private:
  int64_t n_;
  double p0_;
  double sigma_;
  std::vector<double> log_pmf_;
};

double w_stat(int64_t y, const BennettKernel& kernel);

// Smallest count y with (y - n p0) / sigma >= a, i.e. ceil(n p0 + a sigma),
// clamped below at 0. May equal n + 1 when no count qualifies.
int64_t z_threshold_to_count(double a, const BennettKernel& kernel);

// Conditional mean / second moment of w(Y) given Y >= k_min(a).
// Throw EmptyConditionError when k_min(a) > n.
double nu(double a, const BennettKernel& kernel);
double gamma(double a, const BennettKernel& kernel);

// P(Bin(n, p) >= k) for 0 <= k <= n + 1, summed in log space over the
// shorter tail.
double binomial_tail(int64_t k, int64_t n, double p);

}  // namespace bipdetect

#endif  // BIPDETECT_BINOMIAL_KERNEL_H_
