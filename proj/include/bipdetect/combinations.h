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

#ifndef BIPDETECT_COMBINATIONS_H_
#define BIPDETECT_COMBINATIONS_H_

#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace bipdetect {

// Lexicographic k-subsets of {0, ..., n-1}:
//
//   Combinations c(5, 2);
//   do { use(c.current()); } while (c.Next());
//
// k == 0 yields the single empty subset.
class Combinations {
 public:
  Combinations(int64_t n, int64_t k) : n_(n), k_(k), index_(k) {
    std::iota(index_.begin(), index_.end(), int64_t{0});
  }

  std::span<const int64_t> current() const { return index_; }

  // Advances to the next subset; returns false after the last one.
  bool Next() {
    int64_t i = k_ - 1;
    while (i >= 0 && index_[i] == n_ - k_ + i) --i;
    if (i < 0) return false;
    ++index_[i];
    for (int64_t j = i + 1; j < k_; ++j) index_[j] = index_[j - 1] + 1;
    return true;
  }

  // Positions the iterator at the subset whose first element is `first`
  // (the lexicographically smallest such subset).
  void SeekFirst(int64_t first) {
    for (int64_t j = 0; j < k_; ++j) index_[j] = first + j;
  }

 private:
  int64_t n_;
  int64_t k_;
  std::vector<int64_t> index_;
};

// Exact C(n, k) if it fits in `cap`, otherwise cap + 1. Used for budgets.
inline uint64_t BinomialCapped(uint64_t n, uint64_t k, uint64_t cap) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 value = 1;
  for (uint64_t i = 1; i <= k; ++i) {
    value = value * (n - k + i) / i;
    if (value > cap) return cap + 1;
  }
  return static_cast<uint64_t>(value);
}

}  // namespace bipdetect

#endif  // BIPDETECT_COMBINATIONS_H_
