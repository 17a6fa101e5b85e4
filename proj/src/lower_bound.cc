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

#include "bipdetect/lower_bound.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "bipdetect/combinations.h"
#include "bipdetect/errors.h"
#include "bipdetect/numerics.h"
#include "bipdetect/parallel.h"

namespace bipdetect {

namespace {

void CheckSignal(const ProblemShape& shape, double p0, double delta) {
  shape.Validate();
  if (!(p0 > 0.0 && p0 < 1.0)) {
    throw ParameterError("p0 must lie in (0, 1)");
  }
  if (!(delta >= 0.0) || delta > 1.0 - p0 + 1e-12) {
    throw ParameterError("delta must lie in [0, 1 - p0]");
  }
}

double Mu2(double p0, double delta) {
  return delta * delta / (p0 * (1.0 - p0));
}

int64_t OverlapFloor(int64_t n, int64_t k) { return std::max<int64_t>(0, 2 * k - n); }

// log E[exp(rate * U V)] for independent hypergeometric overlaps U, V.
double LogOverlapMgf(const ProblemShape& shape, double rate) {
  const std::vector<double> lu = hypergeometric_overlap_log_pmf(shape.n1, shape.k1);
  const std::vector<double> lv = hypergeometric_overlap_log_pmf(shape.n2, shape.k2);
  const int64_t u0 = OverlapFloor(shape.n1, shape.k1);
  const int64_t v0 = OverlapFloor(shape.n2, shape.k2);
  std::vector<double> terms;
  terms.reserve(lu.size() * lv.size());
  for (size_t a = 0; a < lu.size(); ++a) {
    for (size_t b = 0; b < lv.size(); ++b) {
      const double uv = static_cast<double>((u0 + static_cast<int64_t>(a)) *
                                            (v0 + static_cast<int64_t>(b)));
      terms.push_back(lu[a] + lv[b] + rate * uv);
    }
  }
  return LogSumExp(terms);
}

// log pmf of Bin(k, q), q in [0, 1].
std::vector<double> BinomialLogPmf(int64_t k, double q) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> out(static_cast<size_t>(k + 1), neg_inf);
  if (q <= 0.0) {
    out[0] = 0.0;
    return out;
  }
  if (q >= 1.0) {
    out[k] = 0.0;
    return out;
  }
  for (int64_t x = 0; x <= k; ++x) {
    out[x] = log_binom(k, x) + x * std::log(q) +
             static_cast<double>(k - x) * std::log1p(-q);
  }
  return out;
}

struct Bitset {
  std::vector<uint64_t> words;
};

std::vector<Bitset> AllSubsets(int64_t n, int64_t k) {
  std::vector<Bitset> out;
  const size_t words = static_cast<size_t>((n + 63) / 64);
  Combinations combos(n, k);
  do {
    Bitset b{std::vector<uint64_t>(words, 0)};
    for (int64_t i : combos.current()) b.words[i / 64] |= uint64_t{1} << (i % 64);
    out.push_back(std::move(b));
  } while (combos.Next());
  return out;
}

int64_t Overlap(const Bitset& a, const Bitset& b) {
  int64_t c = 0;
  for (size_t w = 0; w < a.words.size(); ++w) {
    c += std::popcount(a.words[w] & b.words[w]);
  }
  return c;
}

// Overlap sizes of every ordered pair of k-subsets of [n].
std::vector<int64_t> PairOverlaps(int64_t n, int64_t k) {
  const std::vector<Bitset> subsets = AllSubsets(n, k);
  std::vector<int64_t> out;
  out.reserve(subsets.size() * subsets.size());
  for (const Bitset& a : subsets) {
    for (const Bitset& b : subsets) out.push_back(Overlap(a, b));
  }
  return out;
}

}  // namespace

std::vector<double> hypergeometric_overlap_log_pmf(int64_t n, int64_t k) {
  if (n < 1 || k < 0 || k > n) {
    throw ParameterError("overlap law needs 0 <= k <= n, n >= 1");
  }
  const int64_t lo = OverlapFloor(n, k);
  const double denom = log_binom(n, k);
  std::vector<double> out;
  for (int64_t u = lo; u <= k; ++u) {
    out.push_back(log_binom(k, u) + log_binom(n - k, k - u) - denom);
  }
  return out;
}

double second_moment_exact(const ProblemShape& shape, double p0,
                           double delta) {
  CheckSignal(shape, p0, delta);
  const double mu2 = Mu2(p0, delta);
  if (mu2 == 0.0) return 1.0;
  return std::exp(LogOverlapMgf(shape, std::log1p(mu2)));
}

double second_moment_bruteforce(const ProblemShape& shape, double p0,
                                double delta, int64_t budget) {
  CheckSignal(shape, p0, delta);
  const uint64_t cap = static_cast<uint64_t>(std::max<int64_t>(budget, 0));
  const uint64_t c1 = BinomialCapped(shape.n1, shape.k1, cap);
  const uint64_t c2 = BinomialCapped(shape.n2, shape.k2, cap);
  const unsigned __int128 pairs =
      static_cast<unsigned __int128>(c1) * c1 * c2 * c2;
  if (c1 > cap || c2 > cap || pairs > cap) {
    throw BudgetError("support-pair enumeration exceeds the budget of " +
                      std::to_string(budget));
  }
  const double base = 1.0 + Mu2(p0, delta);
  const std::vector<int64_t> left = PairOverlaps(shape.n1, shape.k1);
  const std::vector<int64_t> right = PairOverlaps(shape.n2, shape.k2);
  std::vector<double> power(static_cast<size_t>(shape.k1 * shape.k2 + 1));
  for (size_t e = 0; e < power.size(); ++e) {
    power[e] = std::pow(base, static_cast<double>(e));
  }
  NeumaierSum total;
  for (int64_t u : left) {
    for (int64_t v : right) total.Add(power[u * v]);
  }
  return total.value() / static_cast<double>(pairs);
}

ExpBounds second_moment_exp_bounds(const ProblemShape& shape, double p0,
                                   double delta) {
  CheckSignal(shape, p0, delta);
  const double mu2 = Mu2(p0, delta);
  ExpBounds out;
  if (mu2 == 0.0) return out;
  out.exp_hypergeom = std::exp(LogOverlapMgf(shape, mu2));

  const double inf = std::numeric_limits<double>::infinity();
  if (shape.k1 >= shape.n1 || shape.k2 >= shape.n2) {
    out.exp_binomial = inf;
    return out;
  }
  const double q1 = static_cast<double>(shape.k1) / (shape.n1 - shape.k1);
  const double q2 = static_cast<double>(shape.k2) / (shape.n2 - shape.k2);
  if (q1 > 1.0 || q2 > 1.0) {
    out.exp_binomial = inf;
    return out;
  }
  const std::vector<double> lx = BinomialLogPmf(shape.k1, q1);
  const std::vector<double> ly = BinomialLogPmf(shape.k2, q2);
  std::vector<double> terms;
  for (int64_t x = 0; x <= shape.k1; ++x) {
    for (int64_t y = 0; y <= shape.k2; ++y) {
      terms.push_back(lx[x] + ly[y] + mu2 * static_cast<double>(x * y));
    }
  }
  out.exp_binomial = std::exp(LogSumExp(terms));
  return out;
}

double risk_lower_bound(double second_moment) {
  if (std::isnan(second_moment) || second_moment < 1.0 - 1e-12) {
    throw DomainError("second moment must be at least 1");
  }
  const double excess = std::max(0.0, second_moment - 1.0);
  return std::clamp(1.0 - 0.5 * std::sqrt(excess), 0.0, 1.0);
}

SecondMomentResult second_moment(const ProblemShape& shape, double p0,
                                 double delta) {
  SecondMomentResult r;
  r.mu2 = Mu2(p0, delta);
  r.exact = second_moment_exact(shape, p0, delta);
  const ExpBounds bounds = second_moment_exp_bounds(shape, p0, delta);
  r.exp_hypergeom = bounds.exp_hypergeom;
  r.exp_binomial = bounds.exp_binomial;
  r.risk_lb = risk_lower_bound(r.exact);
  return r;
}

double tv_exact(const ProblemShape& shape, double p0, double delta,
                int threads) {
  CheckSignal(shape, p0, delta);
  const int64_t cells = shape.n1 * shape.n2;
  if (cells > kMaxTvCells) {
    throw BudgetError("tv_exact enumerates 2^" + std::to_string(cells) +
                      " matrices; the limit is 2^" +
                      std::to_string(kMaxTvCells));
  }
  const double p1 = std::min(1.0, p0 + delta);
  const int64_t block = shape.k1 * shape.k2;

  // Cell (i, j) is bit i * n2 + j.
  std::vector<uint32_t> supports;
  Combinations rows(shape.n1, shape.k1);
  do {
    Combinations cols(shape.n2, shape.k2);
    do {
      uint32_t mask = 0;
      for (int64_t i : rows.current()) {
        for (int64_t j : cols.current()) mask |= uint32_t{1} << (i * shape.n2 + j);
      }
      supports.push_back(mask);
    } while (cols.Next());
  } while (rows.Next());

  // Likelihood ratio of one support given e ones inside the block.
  std::vector<double> ratio(static_cast<size_t>(block + 1));
  for (int64_t e = 0; e <= block; ++e) {
    ratio[e] = std::pow(p1 / p0, static_cast<double>(e)) *
               std::pow((1.0 - p1) / (1.0 - p0), static_cast<double>(block - e));
  }
  std::vector<double> null_prob(static_cast<size_t>(cells + 1));
  for (int64_t e = 0; e <= cells; ++e) {
    null_prob[e] = std::pow(p0, static_cast<double>(e)) *
                   std::pow(1.0 - p0, static_cast<double>(cells - e));
  }

  const uint32_t total = uint32_t{1} << cells;
  // Fixed chunking keeps the reduction order independent of `threads`.
  constexpr uint32_t kChunk = 4096;
  const int64_t chunks = (total + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<size_t>(chunks), 0.0);
  const double inv_supports = 1.0 / static_cast<double>(supports.size());
  ParallelFor(chunks, threads, [&](int64_t c) {
    NeumaierSum sum;
    const uint32_t begin = static_cast<uint32_t>(c) * kChunk;
    const uint32_t end = std::min<uint32_t>(total, begin + kChunk);
    for (uint32_t m = begin; m < end; ++m) {
      NeumaierSum lr;
      for (uint32_t s : supports) lr.Add(ratio[std::popcount(m & s)]);
      const double likelihood = lr.value() * inv_supports;
      sum.Add(null_prob[std::popcount(m)] * std::abs(1.0 - likelihood));
    }
    partial[c] = sum.value();
  });
  NeumaierSum tv;
  for (double v : partial) tv.Add(v);
  return std::clamp(0.5 * tv.value(), 0.0, 1.0);
}

}  // namespace bipdetect
