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

#ifndef BIPDETECT_NUMERICS_H_
#define BIPDETECT_NUMERICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace bipdetect {

// log C(n, k) via log-gamma. Throws DomainError unless 0 <= k <= n.
double log_binom(int64_t n, int64_t k);

// Thread-safe log-gamma (std::lgamma may write the global signgam).
double LogGamma(double x);

// log(sum(exp(values))); -inf for an empty span or all -inf entries.
double LogSumExp(std::span<const double> values);

// Compensated (Neumaier) summation.
class NeumaierSum {
 public:
  void Add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// 17 significant digits, locale independent; "inf"/"-inf" for infinities.
std::string FormatDouble(double value);

// Locale-independent decimal parse of the whole string. Throws
// ParameterError on trailing garbage.
double ParseDouble(std::string_view text);

}  // namespace bipdetect

#endif  // BIPDETECT_NUMERICS_H_
