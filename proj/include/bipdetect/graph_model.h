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

#ifndef BIPDETECT_GRAPH_MODEL_H_
#define BIPDETECT_GRAPH_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace bipdetect {

// Instance geometry: an n1 x n2 bipartite graph with a planted k1 x k2 block.
struct ProblemShape {
  int64_t n1 = 1;
  int64_t n2 = 1;
  int64_t k1 = 1;
  int64_t k2 = 1;

  // Throws ParameterError unless 1 <= k1 <= n1 and 1 <= k2 <= n2.
  void Validate() const;

  // Swaps the roles of the two vertex sets.
  ProblemShape Transposed() const { return {n2, n1, k2, k1}; }

  friend bool operator==(const ProblemShape&, const ProblemShape&) = default;
};

// Dense n1 x n2 binary matrix, row-major, one byte per entry.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  AdjacencyMatrix(int64_t rows, int64_t cols);

  int64_t rows() const { return rows_; }
  int64_t cols() const { return cols_; }

  uint8_t at(int64_t i, int64_t j) const { return bits_[i * cols_ + j]; }
  void set(int64_t i, int64_t j, bool value) {
    bits_[i * cols_ + j] = value ? 1 : 0;
  }
  std::span<const uint8_t> row(int64_t i) const {
    return {bits_.data() + i * cols_, static_cast<size_t>(cols_)};
  }

  int64_t EdgeCount() const;
  AdjacencyMatrix Transposed() const;

  friend bool operator==(const AdjacencyMatrix&,
                         const AdjacencyMatrix&) = default;

 private:
  int64_t rows_ = 0;
  int64_t cols_ = 0;
  std::vector<uint8_t> bits_;
};

// Planted block K1 x K2; both index lists strictly increasing.
struct PlantedSupport {
  std::vector<int64_t> left;
  std::vector<int64_t> right;

  void Validate(const ProblemShape& shape) const;

  friend bool operator==(const PlantedSupport&,
                         const PlantedSupport&) = default;
};

// Baseline probability p0 and elevation delta, with p0 + delta <= 1.
struct SignalConfig {
  double p0 = 0.0;
  double delta = 0.0;

  void Validate() const;
};

AdjacencyMatrix sample_null(const ProblemShape& shape, double p0,
                            uint64_t seed);

// Entries of K1 x K2 are Bernoulli(p0 + delta), all others Bernoulli(p0).
// Uses the same per-cell uniform as sample_null, so for a fixed seed the
// matrix is entrywise nondecreasing in delta.
AdjacencyMatrix sample_planted(const ProblemShape& shape,
                               const SignalConfig& cfg,
                               const PlantedSupport& support, uint64_t seed);

// Uniform k-subset of [n] by a partial Fisher-Yates shuffle keyed on
// (seed, axis); returned sorted.
std::vector<int64_t> sample_uniform_subset(int64_t n, int64_t k,
                                           uint64_t seed, uint32_t axis);

PlantedSupport sample_uniform_support(const ProblemShape& shape,
                                      uint64_t seed);

std::pair<AdjacencyMatrix, PlantedSupport> sample_planted_uniform_support(
    const ProblemShape& shape, const SignalConfig& cfg, uint64_t seed);

// Text format: "n1 n2\n" followed by n1 lines of n2 '0'/'1' characters.
AdjacencyMatrix ParseMatrix(std::istream& in);
void FormatMatrix(const AdjacencyMatrix& a, std::ostream& out);

AdjacencyMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const AdjacencyMatrix& a, const std::filesystem::path& path);

}  // namespace bipdetect

#endif  // BIPDETECT_GRAPH_MODEL_H_
