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

#include "bipdetect/numerics.h"

#include <math.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "bipdetect/errors.h"

namespace bipdetect {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParameter:
      return "parameter";
    case ErrorKind::kDomain:
      return "domain";
    case ErrorKind::kFormat:
      return "format";
    case ErrorKind::kBudget:
      return "budget";
    case ErrorKind::kEmptyCondition:
      return "empty_condition";
    case ErrorKind::kConfiguration:
      return "configuration";
    case ErrorKind::kBracket:
      return "bracket";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

double LogGamma(double x) {
  int sign = 0;
  return lgamma_r(x, &sign);
}

double log_binom(int64_t n, int64_t k) {
  if (n < 0 || k < 0 || k > n) {
    throw DomainError("log_binom: need 0 <= k <= n, got n=" +
                      std::to_string(n) + " k=" + std::to_string(k));
  }
  if (k == 0 || k == n) return 0.0;
  if (k == 1 || k == n - 1) return std::log(static_cast<double>(n));
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return LogGamma(nd + 1.0) - LogGamma(kd + 1.0) - LogGamma(nd - kd + 1.0);
}

double LogSumExp(std::span<const double> values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  NeumaierSum sum;
  for (double v : values) sum.Add(std::exp(v - peak));
  return peak + std::log(sum.value());
}

void NeumaierSum::Add(double x) {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                    std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

double ParseDouble(std::string_view text) {
  if (text == "inf" || text == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw ParameterError("not a decimal number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace bipdetect
