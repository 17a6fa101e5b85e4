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

#include "bipdetect/graph_model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "bipdetect/counter_rng.h"
#include "bipdetect/errors.h"

namespace bipdetect {

namespace {

constexpr uint32_t kLeftAxis = 1;
constexpr uint32_t kRightAxis = 2;

void CheckProbability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError(std::string(what) + " must lie in [0, 1], got " +
                         std::to_string(p));
  }
}

void CheckIndexSet(const std::vector<int64_t>& idx, int64_t k, int64_t n,
                   const char* name) {
  if (static_cast<int64_t>(idx.size()) != k) {
    throw ParameterError(std::string(name) + " must have " +
                         std::to_string(k) + " indices, got " +
                         std::to_string(idx.size()));
  }
  for (size_t t = 0; t < idx.size(); ++t) {
    if (idx[t] < 0 || idx[t] >= n) {
      throw ParameterError(std::string(name) + " index " +
                           std::to_string(idx[t]) + " out of range [0, " +
                           std::to_string(n) + ")");
    }
    if (t > 0 && idx[t] <= idx[t - 1]) {
      throw ParameterError(std::string(name) + " must be strictly increasing");
    }
  }
}

}  // namespace

void ProblemShape::Validate() const {
  if (n1 < 1 || n2 < 1) {
    throw ParameterError("n1 and n2 must be positive");
  }
  if (k1 < 1 || k1 > n1 || k2 < 1 || k2 > n2) {
    throw ParameterError("need 1 <= k1 <= n1 and 1 <= k2 <= n2, got n1=" +
                         std::to_string(n1) + " n2=" + std::to_string(n2) +
                         " k1=" + std::to_string(k1) +
                         " k2=" + std::to_string(k2));
  }
}

AdjacencyMatrix::AdjacencyMatrix(int64_t rows, int64_t cols)
    : rows_(rows), cols_(cols), bits_(static_cast<size_t>(rows * cols), 0) {
  if (rows < 0 || cols < 0) {
    throw ParameterError("matrix dimensions must be nonnegative");
  }
}

int64_t AdjacencyMatrix::EdgeCount() const {
  return std::accumulate(bits_.begin(), bits_.end(), int64_t{0});
}

AdjacencyMatrix AdjacencyMatrix::Transposed() const {
  AdjacencyMatrix t(cols_, rows_);
  for (int64_t i = 0; i < rows_; ++i) {
    for (int64_t j = 0; j < cols_; ++j) t.set(j, i, at(i, j));
  }
  return t;
}

void PlantedSupport::Validate(const ProblemShape& shape) const {
  shape.Validate();
  CheckIndexSet(left, shape.k1, shape.n1, "K1");
  CheckIndexSet(right, shape.k2, shape.n2, "K2");
}

void SignalConfig::Validate() const {
  CheckProbability(p0, "p0");
  // Tolerate p0 + delta overshooting 1 by rounding, e.g. 0.7 + 0.3.
  if (!(delta >= 0.0 && p0 + delta <= 1.0 + 1e-12)) {
    throw ParameterError("delta must satisfy 0 <= delta <= 1 - p0");
  }
}

AdjacencyMatrix sample_null(const ProblemShape& shape, double p0,
                            uint64_t seed) {
  shape.Validate();
  CheckProbability(p0, "p0");
  AdjacencyMatrix a(shape.n1, shape.n2);
  for (int64_t i = 0; i < shape.n1; ++i) {
    for (int64_t j = 0; j < shape.n2; ++j) {
      const double u = UniformAt(seed, Stream::kCell, static_cast<uint32_t>(i),
                                 static_cast<uint32_t>(j));
      a.set(i, j, u < p0);
    }
  }
  return a;
}

AdjacencyMatrix sample_planted(const ProblemShape& shape,
                               const SignalConfig& cfg,
                               const PlantedSupport& support, uint64_t seed) {
  cfg.Validate();
  support.Validate(shape);
  std::vector<uint8_t> in_right(static_cast<size_t>(shape.n2), 0);
  for (int64_t j : support.right) in_right[j] = 1;
  std::vector<uint8_t> in_left(static_cast<size_t>(shape.n1), 0);
  for (int64_t i : support.left) in_left[i] = 1;

  const double p1 = std::min(1.0, cfg.p0 + cfg.delta);
  AdjacencyMatrix a(shape.n1, shape.n2);
  for (int64_t i = 0; i < shape.n1; ++i) {
    for (int64_t j = 0; j < shape.n2; ++j) {
      const double u = UniformAt(seed, Stream::kCell, static_cast<uint32_t>(i),
                                 static_cast<uint32_t>(j));
      const double p = (in_left[i] && in_right[j]) ? p1 : cfg.p0;
      a.set(i, j, u < p);
    }
  }
  return a;
}

std::vector<int64_t> sample_uniform_subset(int64_t n, int64_t k,
                                           uint64_t seed, uint32_t axis) {
  if (k < 0 || k > n) {
    throw ParameterError("subset size must lie in [0, n]");
  }
  std::vector<int64_t> pool(static_cast<size_t>(n));
  std::iota(pool.begin(), pool.end(), int64_t{0});
  for (int64_t t = 0; t < k; ++t) {
    const double u = UniformAt(seed, Stream::kSupport,
                               static_cast<uint32_t>(t), axis);
    const int64_t span = n - t;
    const int64_t offset =
        std::min<int64_t>(static_cast<int64_t>(u * static_cast<double>(span)),
                          span - 1);
    std::swap(pool[t], pool[t + offset]);
  }
  pool.resize(static_cast<size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

PlantedSupport sample_uniform_support(const ProblemShape& shape,
                                      uint64_t seed) {
  shape.Validate();
  return {sample_uniform_subset(shape.n1, shape.k1, seed, kLeftAxis),
          sample_uniform_subset(shape.n2, shape.k2, seed, kRightAxis)};
}

std::pair<AdjacencyMatrix, PlantedSupport> sample_planted_uniform_support(
    const ProblemShape& shape, const SignalConfig& cfg, uint64_t seed) {
  cfg.Validate();
  PlantedSupport support = sample_uniform_support(shape, seed);
  AdjacencyMatrix a = sample_planted(shape, cfg, support, seed);
  return {std::move(a), std::move(support)};
}

AdjacencyMatrix ParseMatrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(1, "missing dimension header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream header(line);
  int64_t rows = -1, cols = -1;
  std::string extra;
  if (!(header >> rows >> cols) || (header >> extra) || rows < 1 ||
      cols < 1) {
    throw FormatError(1, "expected header 'n1 n2' with positive integers");
  }
  AdjacencyMatrix a(rows, cols);
  for (int64_t i = 0; i < rows; ++i) {
    const int64_t line_no = i + 2;
    if (!std::getline(in, line)) {
      throw FormatError(line_no, "missing row; header declares " +
                                     std::to_string(rows) + " rows");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int64_t>(line.size()) != cols) {
      throw FormatError(line_no, "expected " + std::to_string(cols) +
                                     " characters, got " +
                                     std::to_string(line.size()));
    }
    for (int64_t j = 0; j < cols; ++j) {
      const char c = line[j];
      if (c != '0' && c != '1') {
        throw FormatError(line_no, "invalid character '" + std::string(1, c) +
                                       "' at column " + std::to_string(j + 1));
      }
      a.set(i, j, c == '1');
    }
  }
  int64_t line_no = rows + 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line != "\r") {
      throw FormatError(line_no, "extra row beyond the " +
                                     std::to_string(rows) +
                                     " declared in the header");
    }
  }
  return a;
}

void FormatMatrix(const AdjacencyMatrix& a, std::ostream& out) {
  out << a.rows() << ' ' << a.cols() << '\n';
  std::string line(static_cast<size_t>(a.cols()), '0');
  for (int64_t i = 0; i < a.rows(); ++i) {
    for (int64_t j = 0; j < a.cols(); ++j) line[j] = a.at(i, j) ? '1' : '0';
    out << line << '\n';
  }
}

AdjacencyMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return ParseMatrix(in);
}

void write_matrix(const AdjacencyMatrix& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  FormatMatrix(a, out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace bipdetect
