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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "bipdetect/errors.h"

namespace bipdetect {
namespace {

std::filesystem::path TempPath(const std::string& name) {
  const char* dir = std::getenv("TEST_TMPDIR");
  return std::filesystem::path(dir ? dir : "/tmp") / name;
}

int64_t OnesIn(const AdjacencyMatrix& a, const PlantedSupport& s, bool inside) {
  int64_t count = 0;
  for (int64_t i = 0; i < a.rows(); ++i) {
    for (int64_t j = 0; j < a.cols(); ++j) {
      const bool in_left =
          std::find(s.left.begin(), s.left.end(), i) != s.left.end();
      const bool in_right =
          std::find(s.right.begin(), s.right.end(), j) != s.right.end();
      if ((in_left && in_right) == inside) count += a.at(i, j);
    }
  }
  return count;
}

TEST(ProblemShapeTest, Validation) {
  EXPECT_NO_THROW((ProblemShape{4, 5, 1, 5}.Validate()));
  EXPECT_THROW((ProblemShape{0, 5, 1, 1}.Validate()), ParameterError);
  EXPECT_THROW((ProblemShape{4, 5, 5, 1}.Validate()), ParameterError);
  EXPECT_THROW((ProblemShape{4, 5, 1, 0}.Validate()), ParameterError);
  EXPECT_EQ((ProblemShape{4, 5, 2, 3}.Transposed()), (ProblemShape{5, 4, 3, 2}));
}

TEST(SampleNullTest, DegenerateProbabilities) {
  const ProblemShape shape{3, 3, 1, 1};
  const AdjacencyMatrix zeros = sample_null(shape, 0.0, 7);
  const AdjacencyMatrix ones = sample_null(shape, 1.0, 7);
  EXPECT_EQ(zeros.EdgeCount(), 0);
  EXPECT_EQ(ones.EdgeCount(), 9);
}

TEST(SampleNullTest, RejectsInvalidProbability) {
  EXPECT_THROW(sample_null({3, 3, 1, 1}, -0.1, 1), ParameterError);
  EXPECT_THROW(sample_null({3, 3, 1, 1}, 1.5, 1), ParameterError);
}

TEST(SampleNullTest, MeanWithinFourSe) {
  const AdjacencyMatrix a = sample_null({64, 64, 1, 1}, 0.25, 1);
  const double mean = static_cast<double>(a.EdgeCount()) / 4096.0;
  EXPECT_NEAR(mean, 0.25, 4 * std::sqrt(0.25 * 0.75 / 4096));
}

TEST(SampleNullTest, Deterministic) {
  EXPECT_EQ(sample_null({20, 30, 1, 1}, 0.3, 11),
            sample_null({20, 30, 1, 1}, 0.3, 11));
  EXPECT_FALSE(sample_null({20, 30, 1, 1}, 0.3, 11) ==
               sample_null({20, 30, 1, 1}, 0.3, 12));
}

TEST(SamplePlantedTest, DeterministicEntries) {
  const ProblemShape shape{2, 2, 1, 1};
  const AdjacencyMatrix a =
      sample_planted(shape, {0.0, 1.0}, {{0}, {0}}, 3);
  EXPECT_EQ(a.at(0, 0), 1);
  EXPECT_EQ(a.EdgeCount(), 1);
}

TEST(SamplePlantedTest, ZeroDeltaEqualsNull) {
  const ProblemShape shape{16, 16, 4, 4};
  const PlantedSupport support{{1, 3, 5, 7}, {0, 2, 4, 6}};
  EXPECT_EQ(sample_planted(shape, {0.3, 0.0}, support, 9),
            sample_null(shape, 0.3, 9));
}

TEST(SamplePlantedTest, BlockMeanWithinFourSe) {
  const ProblemShape shape{64, 64, 16, 16};
  PlantedSupport support;
  for (int64_t i = 0; i < 16; ++i) {
    support.left.push_back(4 * i);
    support.right.push_back(4 * i + 1);
  }
  int64_t inside = 0;
  int64_t outside = 0;
  const int reps = 40;
  for (int r = 0; r < reps; ++r) {
    const AdjacencyMatrix a = sample_planted(shape, {0.25, 0.2}, support, r);
    inside += OnesIn(a, support, true);
    outside += OnesIn(a, support, false);
  }
  const double n_in = 256.0 * reps;
  const double n_out = (4096.0 - 256.0) * reps;
  EXPECT_NEAR(inside / n_in, 0.45, 4 * std::sqrt(0.45 * 0.55 / n_in));
  EXPECT_NEAR(outside / n_out, 0.25, 4 * std::sqrt(0.25 * 0.75 / n_out));
  // Single draw, as in the one-sample check.
  const AdjacencyMatrix a = sample_planted(shape, {0.25, 0.2}, support, 1);
  EXPECT_NEAR(OnesIn(a, support, true) / 256.0, 0.45,
              4 * std::sqrt(0.45 * 0.55 / 256));
}

TEST(SamplePlantedTest, DominatesEntrywiseInDelta) {
  const ProblemShape shape{20, 20, 5, 5};
  const PlantedSupport support{{0, 4, 8, 12, 16}, {1, 2, 3, 10, 19}};
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const AdjacencyMatrix lo = sample_planted(shape, {0.2, 0.1}, support, seed);
    const AdjacencyMatrix hi = sample_planted(shape, {0.2, 0.3}, support, seed);
    for (int64_t i = 0; i < 20; ++i) {
      for (int64_t j = 0; j < 20; ++j) EXPECT_LE(lo.at(i, j), hi.at(i, j));
    }
  }
}

TEST(SamplePlantedTest, RejectsBadSupport) {
  const ProblemShape shape{4, 4, 2, 2};
  EXPECT_THROW(sample_planted(shape, {0.2, 0.1}, {{0, 4}, {0, 1}}, 1),
               ParameterError);
  EXPECT_THROW(sample_planted(shape, {0.2, 0.1}, {{1, 1}, {0, 1}}, 1),
               ParameterError);
  EXPECT_THROW(sample_planted(shape, {0.2, 0.1}, {{1}, {0, 1}}, 1),
               ParameterError);
  EXPECT_THROW(sample_planted(shape, {0.7, 0.5}, {{0, 1}, {0, 1}}, 1),
               ParameterError);
}

TEST(UniformSupportTest, FullSupport) {
  const ProblemShape shape{5, 3, 5, 3};
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const PlantedSupport s = sample_uniform_support(shape, seed);
    EXPECT_EQ(s.left, (std::vector<int64_t>{0, 1, 2, 3, 4}));
    EXPECT_EQ(s.right, (std::vector<int64_t>{0, 1, 2}));
  }
}

TEST(UniformSupportTest, SingleIndexFrequencies) {
  const int draws = 40000;
  std::vector<int> counts(4, 0);
  for (int t = 0; t < draws; ++t) {
    counts[sample_uniform_support({4, 4, 1, 1}, t).left[0]]++;
  }
  const double se = std::sqrt(0.25 * 0.75 / draws);
  for (int c : counts) EXPECT_NEAR(c / double(draws), 0.25, 4 * se);
}

TEST(UniformSupportTest, PairFrequencies) {
  const int draws = 60000;
  std::map<std::vector<int64_t>, int> counts;
  for (int t = 0; t < draws; ++t) {
    counts[sample_uniform_support({4, 4, 2, 1}, t).left]++;
  }
  ASSERT_EQ(counts.size(), 6u);
  const double p = 1.0 / 6.0;
  const double se = std::sqrt(p * (1 - p) / draws);
  for (const auto& [subset, c] : counts) {
    EXPECT_NEAR(c / double(draws), p, 4 * se);
  }
}

TEST(UniformSupportTest, PlantedUsesReturnedSupport) {
  const ProblemShape shape{10, 12, 3, 4};
  const auto [a, s] = sample_planted_uniform_support(shape, {0.0, 1.0}, 5);
  EXPECT_NO_THROW(s.Validate(shape));
  EXPECT_EQ(a.EdgeCount(), 12);
  for (int64_t i : s.left) {
    for (int64_t j : s.right) EXPECT_EQ(a.at(i, j), 1);
  }
}

TEST(MatrixIoTest, ParsesDefinitionExample) {
  std::istringstream in("2 3\n010\n110\n");
  const AdjacencyMatrix a = ParseMatrix(in);
  ASSERT_EQ(a.rows(), 2);
  ASSERT_EQ(a.cols(), 3);
  EXPECT_EQ(a.at(0, 0), 0);
  EXPECT_EQ(a.at(0, 1), 1);
  EXPECT_EQ(a.at(0, 2), 0);
  EXPECT_EQ(a.at(1, 0), 1);
  EXPECT_EQ(a.at(1, 1), 1);
  EXPECT_EQ(a.at(1, 2), 0);
}

TEST(MatrixIoTest, ShortRowNamesLine) {
  std::istringstream in("2 3\n01\n110\n");
  try {
    ParseMatrix(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(MatrixIoTest, MalformedInputs) {
  auto line_of = [](const std::string& text) -> int64_t {
    std::istringstream in(text);
    try {
      ParseMatrix(in);
    } catch (const FormatError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("2 x\n01\n11\n"), 1);
  EXPECT_EQ(line_of("2 2\n01\n12\n"), 3);
  EXPECT_EQ(line_of("2 2\n01\n"), 3);
  EXPECT_EQ(line_of("1 2\n01\n11\n"), 3);
  EXPECT_EQ(line_of(""), 1);
}

TEST(MatrixIoTest, FileRoundTrip) {
  const auto path = TempPath("graph_model_roundtrip.txt");
  const AdjacencyMatrix zeros(3, 3);
  write_matrix(zeros, path);
  EXPECT_EQ(read_matrix(path), zeros);
  const AdjacencyMatrix random = sample_null({7, 13, 1, 1}, 0.4, 3);
  write_matrix(random, path);
  EXPECT_EQ(read_matrix(path), random);
}

TEST(MatrixIoTest, MissingFileIsIoError) {
  EXPECT_THROW(read_matrix(TempPath("no_such_dir/none.txt")), IoError);
  EXPECT_THROW(write_matrix(AdjacencyMatrix(1, 1),
                            TempPath("no_such_dir/none.txt")),
               IoError);
}

TEST(AdjacencyMatrixTest, TransposeInvolution) {
  const AdjacencyMatrix a = sample_null({5, 9, 1, 1}, 0.5, 2);
  const AdjacencyMatrix t = a.Transposed();
  ASSERT_EQ(t.rows(), 9);
  for (int64_t i = 0; i < 5; ++i) {
    for (int64_t j = 0; j < 9; ++j) EXPECT_EQ(a.at(i, j), t.at(j, i));
  }
  EXPECT_EQ(t.Transposed(), a);
}

}  // namespace
}  // namespace bipdetect
