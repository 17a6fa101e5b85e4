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

#ifndef BIPDETECT_HARNESS_H_
#define BIPDETECT_HARNESS_H_

// Monte Carlo experiments: risk estimation, power sweeps, bisection for the
// empirical separation rate, rate-phase grids, and empty-subgraph
// diagnostics. Every trial draws from its own derived seed, so results do
// not depend on the worker count.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bipdetect/detectors.h"
#include "bipdetect/graph_model.h"
#include "bipdetect/rates.h"
#include "json.hpp"

namespace bipdetect {

enum class ThresholdMode { kAnalytic, kCalibrated, kFixed };

std::string_view ThresholdModeName(ThresholdMode mode);
ThresholdMode ParseThresholdMode(std::string_view name);

struct ThresholdSpec {
  ThresholdMode mode = ThresholdMode::kCalibrated;
  double alpha = 0.1;
  int64_t calibration_trials = 1000;
  // Calibration seed; the experiment seed when absent. Calibration draws use
  // their own seed family, so sharing the seed does not reuse null samples.
  std::optional<uint64_t> calibration_seed;
  double value = 0.0;  // kFixed only; may be +-inf
};

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  ProblemShape shape;
  double p0 = 0.0;
  std::vector<double> delta_grid;
  DetectorKind detector;
  ThresholdSpec threshold;
  int64_t trials = 1000;
  uint64_t seed = 0;
  double eta = 0.5;
  DetectorOptions options;

  // Throws ConfigurationError naming the offending field.
  void Validate() const;
};

struct RiskEstimate {
  double type1 = 0.0;
  double type2 = 0.0;
  double risk = 0.0;
  double se1 = 0.0;
  double se2 = 0.0;
  int64_t trials = 0;
};

struct ResolvedThreshold {
  double value = 0.0;
  DetectorKind effective;
  std::optional<Branch> branch;
};

ResolvedThreshold resolve_threshold(const ExperimentConfig& cfg);

// A detector with its threshold fixed, plus the cached null rejection count
// (Type I does not depend on delta).
class RiskEvaluator {
 public:
  explicit RiskEvaluator(const ExperimentConfig& cfg);

  RiskEstimate Evaluate(double delta) const;
  const ResolvedThreshold& threshold() const { return threshold_; }
  double type1() const { return type1_; }

 private:
  ExperimentConfig cfg_;
  Detector detector_;
  ResolvedThreshold threshold_;
  double type1_ = 0.0;
};

RiskEstimate estimate_risk(const ExperimentConfig& cfg, double delta);

struct SweepRow {
  double delta = 0.0;
  RiskEstimate estimate;
};

struct SweepResult {
  ResolvedThreshold threshold;
  std::vector<SweepRow> rows;
  // Type II is nonincreasing in delta (sorted) up to 4 combined SE.
  bool type2_monotone = true;
};

SweepResult power_sweep(const ExperimentConfig& cfg);

struct BisectionResult {
  double delta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int iterations = 0;
  ResolvedThreshold threshold;
};

// Bisects [0, 1 - p0] for the crossing risk(delta) = eta. Throws
// BracketError unless risk(0) > eta and risk(1 - p0) < eta.
BisectionResult bisect_delta_star(const ExperimentConfig& cfg,
                                  double tolerance);

struct PhaseRow {
  ProblemShape shape;
  RateBundle bundle;
  DeltaStarBounds bounds;
};

std::vector<PhaseRow> phase_diagram(const std::vector<ProblemShape>& shapes,
                                    double p0, const RateConstants& consts);

enum class EmptyVariant {
  kSubgraph,   // some k1 x k2 submatrix is all zeros
  kEmptyRows,  // some k1 rows are all zeros
};

struct EmptySubgraphReport {
  double union_bound = 0.0;
  double mc_estimate = 0.0;
  double se = 0.0;
  int64_t trials = 0;
};

inline constexpr int64_t kEmptyScanBudget = 1'000'000;

EmptySubgraphReport empty_subgraph_diagnostic(
    const ProblemShape& shape, double p0, int64_t trials, uint64_t seed,
    EmptyVariant variant = EmptyVariant::kSubgraph,
    int64_t budget = kEmptyScanBudget, int threads = 1);

// One output row; the column order of the CSV.
struct ResultRow {
  std::string experiment_id;
  int64_t n1 = 0, n2 = 0, k1 = 0, k2 = 0;
  double p0 = 0.0;
  double delta = 0.0;
  std::string detector;
  std::string threshold_mode;
  double threshold = 0.0;
  int64_t trials = 0;
  uint64_t seed = 0;
  double type1 = 0.0, se1 = 0.0, type2 = 0.0, se2 = 0.0, risk = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

using ResultTable = std::vector<ResultRow>;

enum class OutputFormat { kCsv, kJson };

ResultTable ToResultTable(const ExperimentConfig& cfg,
                          const SweepResult& sweep);

void WriteResultsCsv(const ResultTable& table, std::ostream& out);
void WriteResultsJson(const ResultTable& table, std::ostream& out);
ResultTable ReadResultsCsv(std::istream& in);

// Throws IoError naming the path.
void emit_results(const ResultTable& table, const std::filesystem::path& path,
                  OutputFormat format);

void WritePhaseCsv(const std::vector<PhaseRow>& rows, std::ostream& out);

// JSON schema mirrors the ExperimentConfig fields:
//   experiment_id, shape {n1, n2, k1, k2}, p0, delta_grid, detector {tag,
//   tau, k_scan}, threshold {mode, alpha, trials, seed, value}, trials,
//   seed, eta, threads, budget, constants {C_phi, c1, c_delta, C_delta,
//   C_eta, C_star, c_prime, C_tau}.
// Unknown keys and type mismatches throw ConfigurationError with the path.
ExperimentConfig ConfigFromJson(const nlohmann::json& doc);
nlohmann::json ConfigToJson(const ExperimentConfig& cfg);

// Resolved constants and thresholds of a sweep, for the output sidecar.
nlohmann::json SweepMetadata(const ExperimentConfig& cfg,
                             const SweepResult& sweep);

}  // namespace bipdetect

#endif  // BIPDETECT_HARNESS_H_
