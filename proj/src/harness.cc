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

#include "bipdetect/harness.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "bipdetect/combinations.h"
#include "bipdetect/counter_rng.h"
#include "bipdetect/errors.h"
#include "bipdetect/numerics.h"
#include "bipdetect/parallel.h"

namespace bipdetect {

namespace {

using nlohmann::json;

constexpr const char* kCsvHeader =
    "experiment_id,n1,n2,k1,k2,p0,delta,detector,threshold_mode,threshold,"
    "trials,seed,type1,se1,type2,se2,risk";

double ProportionSe(double p, int64_t trials) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

DetectorOptions SingleThreaded(const DetectorOptions& options) {
  DetectorOptions inner = options;
  inner.threads = 1;
  return inner;
}

// Counts trials whose statistic exceeds `threshold`; per-trial flags are
// reduced in index order.
template <typename Sampler>
int64_t CountRejections(const Detector& detector, double threshold,
                        int64_t trials, int threads, Sampler&& sample) {
  std::vector<uint8_t> reject(static_cast<size_t>(trials), 0);
  ParallelFor(trials, threads, [&](int64_t t) {
    reject[t] = detector.Statistic(sample(t)) > threshold ? 1 : 0;
  });
  return std::accumulate(reject.begin(), reject.end(), int64_t{0});
}

const ExperimentConfig& Validated(const ExperimentConfig& cfg) {
  cfg.Validate();
  return cfg;
}

std::string JsonPathError(const std::string& path, const std::string& what) {
  return path + ": " + what;
}

// Typed accessors that report the JSON path on failure.
class Reader {
 public:
  Reader(const json& node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      throw ConfigurationError(JsonPathError(Name(), "expected an object"));
    }
  }

  bool Has(const char* key) const { return node_.contains(key); }

  double Number(const char* key) const {
    const json& v = At(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      try {
        return ParseDouble(v.get<std::string>());
      } catch (const ParameterError&) {
      }
    }
    throw ConfigurationError(JsonPathError(Child(key), "expected a number"));
  }

  int64_t Integer(const char* key) const {
    const json& v = At(key);
    if (v.is_number_integer()) return v.get<int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == std::floor(d) && std::abs(d) < 9.0e15) {
        return static_cast<int64_t>(d);
      }
    }
    throw ConfigurationError(JsonPathError(Child(key), "expected an integer"));
  }

  uint64_t Unsigned(const char* key) const {
    const json& v = At(key);
    if (v.is_number_unsigned()) return v.get<uint64_t>();
    if (v.is_number_integer() && v.get<int64_t>() >= 0) {
      return static_cast<uint64_t>(v.get<int64_t>());
    }
    throw ConfigurationError(
        JsonPathError(Child(key), "expected a nonnegative integer"));
  }

  std::string String(const char* key) const {
    const json& v = At(key);
    if (!v.is_string()) {
      throw ConfigurationError(JsonPathError(Child(key), "expected a string"));
    }
    return v.get<std::string>();
  }

  const json& At(const char* key) const {
    if (!node_.contains(key)) {
      throw ConfigurationError(JsonPathError(Child(key), "missing"));
    }
    return node_.at(key);
  }

  void RejectUnknown(std::initializer_list<const char*> known) const {
    for (const auto& [key, value] : node_.items()) {
      const bool ok = std::any_of(known.begin(), known.end(),
                                  [&](const char* k) { return key == k; });
      if (!ok) {
        throw ConfigurationError(JsonPathError(Child(key.c_str()),
                                               "unknown field"));
      }
    }
  }

  std::string Child(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

 private:
  std::string Name() const { return path_.empty() ? "<root>" : path_; }

  const json& node_;
  std::string path_;
};

// Wraps a validation step so its message carries the field path.
template <typename Fn>
void WithPath(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigurationError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigurationError(JsonPathError(path, e.what()));
  }
}

json NumberOrString(double v) {
  if (std::isfinite(v)) return v;
  return FormatDouble(v);
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int64_t ParseInt(const std::string& text, int line) {
  try {
    size_t used = 0;
    const int64_t v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw FormatError(line, "bad integer '" + text + "'");
}

uint64_t ParseUnsigned(const std::string& text, int line) {
  try {
    size_t used = 0;
    const uint64_t v = std::stoull(text, &used);
    if (used == text.size() && !text.empty() && text[0] != '-') return v;
  } catch (const std::exception&) {
  }
  throw FormatError(line, "bad unsigned integer '" + text + "'");
}

double ParseReal(const std::string& text, int line) {
  try {
    return ParseDouble(text);
  } catch (const ParameterError&) {
    throw FormatError(line, "bad number '" + text + "'");
  }
}

}  // namespace

std::string_view ThresholdModeName(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::kAnalytic:
      return "analytic";
    case ThresholdMode::kCalibrated:
      return "calibrated";
    case ThresholdMode::kFixed:
      return "fixed";
  }
  return "unknown";
}

ThresholdMode ParseThresholdMode(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(c)));
  if (lower == "analytic") return ThresholdMode::kAnalytic;
  if (lower == "calibrated") return ThresholdMode::kCalibrated;
  if (lower == "fixed") return ThresholdMode::kFixed;
  throw ParameterError("unknown threshold mode '" + std::string(name) + "'");
}

void ExperimentConfig::Validate() const {
  if (experiment_id.empty() ||
      experiment_id.find_first_of(",\"\r\n") != std::string::npos) {
    throw ConfigurationError(
        "experiment_id: must be nonempty without commas, quotes or newlines");
  }
  WithPath("shape", [&] { shape.Validate(); });
  if (!(p0 > 0.0 && p0 < 1.0)) {
    throw ConfigurationError("p0: must lie in (0, 1)");
  }
  if (delta_grid.empty()) {
    throw ConfigurationError("delta_grid: must be nonempty");
  }
  for (size_t i = 0; i < delta_grid.size(); ++i) {
    const double d = delta_grid[i];
    if (!(d >= 0.0) || d > 1.0 - p0 + 1e-12) {
      throw ConfigurationError("delta_grid[" + std::to_string(i) +
                               "]: must lie in [0, 1 - p0]");
    }
  }
  if (trials < 100) throw ConfigurationError("trials: must be at least 100");
  if (!(eta > 0.0 && eta < 1.0)) {
    throw ConfigurationError("eta: must lie in (0, 1)");
  }
  if (options.threads < 1) {
    throw ConfigurationError("threads: must be positive");
  }
  if (options.budget < 1) throw ConfigurationError("budget: must be positive");
  WithPath("constants", [&] { options.rates.Validate(); });
  switch (threshold.mode) {
    case ThresholdMode::kAnalytic:
    case ThresholdMode::kCalibrated:
      if (!(threshold.alpha > 0.0 && threshold.alpha < 1.0)) {
        throw ConfigurationError("threshold.alpha: must lie in (0, 1)");
      }
      if (threshold.mode == ThresholdMode::kCalibrated &&
          threshold.calibration_trials < 100) {
        throw ConfigurationError("threshold.trials: must be at least 100");
      }
      break;
    case ThresholdMode::kFixed:
      if (std::isnan(threshold.value)) {
        throw ConfigurationError("threshold.value: must be a number");
      }
      break;
  }
}

ResolvedThreshold resolve_threshold(const ExperimentConfig& cfg) {
  const Detector detector = Detector::Resolve(cfg.detector, cfg.shape, cfg.p0,
                                              SingleThreaded(cfg.options));
  ResolvedThreshold r;
  r.effective = detector.effective();
  r.branch = detector.branch();
  switch (cfg.threshold.mode) {
    case ThresholdMode::kAnalytic:
      r.value = detector.AnalyticThreshold(cfg.threshold.alpha,
                                           cfg.options.thresholds);
      break;
    case ThresholdMode::kCalibrated:
      // Calibrate the effective test so a later change of defaults cannot
      // make the calibrated and evaluated detectors disagree.
      r.value = calibrate_threshold(
          r.effective, cfg.shape, cfg.p0, cfg.threshold.alpha,
          cfg.threshold.calibration_trials,
          cfg.threshold.calibration_seed.value_or(cfg.seed), cfg.options);
      break;
    case ThresholdMode::kFixed:
      r.value = cfg.threshold.value;
      break;
  }
  return r;
}

RiskEvaluator::RiskEvaluator(const ExperimentConfig& cfg)
    : cfg_(Validated(cfg)),
      detector_(Detector::Resolve(cfg.detector, cfg.shape, cfg.p0,
                                  SingleThreaded(cfg.options))) {
  threshold_ = resolve_threshold(cfg_);
  const int64_t rejections = CountRejections(
      detector_, threshold_.value, cfg_.trials, cfg_.options.threads,
      [&](int64_t t) {
        return sample_null(cfg_.shape, cfg_.p0,
                           DeriveSeed(cfg_.seed, kRoleNull,
                                      static_cast<uint64_t>(t)));
      });
  type1_ = static_cast<double>(rejections) / static_cast<double>(cfg_.trials);
}

RiskEstimate RiskEvaluator::Evaluate(double delta) const {
  if (!(delta >= 0.0) || delta > 1.0 - cfg_.p0 + 1e-12) {
    throw ParameterError("delta must lie in [0, 1 - p0]");
  }
  const SignalConfig signal{cfg_.p0, std::min(delta, 1.0 - cfg_.p0)};
  // The same trial seeds at every delta: common random numbers.
  const int64_t detections = CountRejections(
      detector_, threshold_.value, cfg_.trials, cfg_.options.threads,
      [&](int64_t t) {
        return sample_planted_uniform_support(
                   cfg_.shape, signal,
                   DeriveSeed(cfg_.seed, kRoleAlternative,
                              static_cast<uint64_t>(t)))
            .first;
      });
  RiskEstimate e;
  e.trials = cfg_.trials;
  e.type1 = type1_;
  e.type2 = static_cast<double>(cfg_.trials - detections) /
            static_cast<double>(cfg_.trials);
  e.risk = e.type1 + e.type2;
  e.se1 = ProportionSe(e.type1, e.trials);
  e.se2 = ProportionSe(e.type2, e.trials);
  return e;
}

RiskEstimate estimate_risk(const ExperimentConfig& cfg, double delta) {
  return RiskEvaluator(cfg).Evaluate(delta);
}

SweepResult power_sweep(const ExperimentConfig& cfg) {
  const RiskEvaluator evaluator(cfg);
  SweepResult result;
  result.threshold = evaluator.threshold();
  for (double delta : cfg.delta_grid) {
    result.rows.push_back({delta, evaluator.Evaluate(delta)});
  }
  std::vector<size_t> order(result.rows.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return result.rows[a].delta < result.rows[b].delta;
  });
  for (size_t i = 1; i < order.size(); ++i) {
    const RiskEstimate& prev = result.rows[order[i - 1]].estimate;
    const RiskEstimate& next = result.rows[order[i]].estimate;
    const double slack = 4.0 * std::hypot(prev.se2, next.se2);
    if (next.type2 > prev.type2 + slack) result.type2_monotone = false;
  }
  return result;
}

BisectionResult bisect_delta_star(const ExperimentConfig& cfg,
                                  double tolerance) {
  if (!(tolerance > 0.0)) throw ParameterError("tolerance must be positive");
  const RiskEvaluator evaluator(cfg);
  double lo = 0.0;
  double hi = 1.0 - cfg.p0;
  const double risk_lo = evaluator.Evaluate(lo).risk;
  const double risk_hi = evaluator.Evaluate(hi).risk;
  if (!(risk_lo > cfg.eta && risk_hi < cfg.eta)) {
    throw BracketError("no crossing of eta = " + FormatDouble(cfg.eta) +
                       ": risk(0) = " + FormatDouble(risk_lo) +
                       ", risk(1 - p0) = " + FormatDouble(risk_hi));
  }
  BisectionResult out;
  out.threshold = evaluator.threshold();
  while (hi - lo >= tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (evaluator.Evaluate(mid).risk > cfg.eta) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++out.iterations;
  }
  out.lower = lo;
  out.upper = hi;
  out.delta = 0.5 * (lo + hi);
  return out;
}

std::vector<PhaseRow> phase_diagram(const std::vector<ProblemShape>& shapes,
                                    double p0, const RateConstants& consts) {
  if (shapes.empty()) throw ParameterError("phase grid must be nonempty");
  std::vector<PhaseRow> rows;
  rows.reserve(shapes.size());
  for (const ProblemShape& s : shapes) {
    rows.push_back({s, rate_bundle(s, consts), delta_star_bounds(s, p0, consts)});
  }
  return rows;
}

EmptySubgraphReport empty_subgraph_diagnostic(const ProblemShape& shape,
                                              double p0, int64_t trials,
                                              uint64_t seed,
                                              EmptyVariant variant,
                                              int64_t budget, int threads) {
  shape.Validate();
  if (!(p0 >= 0.0 && p0 <= 1.0)) {
    throw ParameterError("p0 must lie in [0, 1]");
  }
  if (trials < 100) throw ParameterError("trials must be at least 100");
  const auto [n1, n2, k1, k2] = shape;

  EmptySubgraphReport report;
  report.trials = trials;
  const double log_zero = std::log1p(-p0);  // -inf at p0 = 1
  double log_bound = 0.0;
  if (variant == EmptyVariant::kSubgraph) {
    const uint64_t cap = static_cast<uint64_t>(std::max<int64_t>(budget, 0));
    const uint64_t c1 = BinomialCapped(n1, k1, cap);
    const uint64_t c2 = BinomialCapped(n2, k2, cap);
    if (c1 > cap || c2 > cap ||
        static_cast<unsigned __int128>(c1) * c2 > cap) {
      throw BudgetError("C(n1,k1) C(n2,k2) exceeds the scan budget of " +
                        std::to_string(budget));
    }
    log_bound = log_binom(n1, k1) + log_binom(n2, k2) +
                static_cast<double>(k1 * k2) * log_zero;
  } else {
    log_bound =
        log_binom(n1, k1) + static_cast<double>(k1 * n2) * log_zero;
  }
  report.union_bound = std::min(1.0, std::exp(log_bound));

  const size_t words = static_cast<size_t>((n2 + 63) / 64);
  std::vector<uint8_t> hit(static_cast<size_t>(trials), 0);
  ParallelFor(trials, threads, [&](int64_t t) {
    const AdjacencyMatrix a = sample_null(
        shape, p0, DeriveSeed(seed, kRoleDiagnostic, static_cast<uint64_t>(t)));
    if (variant == EmptyVariant::kEmptyRows) {
      int64_t empty = 0;
      for (int64_t i = 0; i < n1; ++i) {
        const auto row = a.row(i);
        if (std::all_of(row.begin(), row.end(), [](uint8_t b) { return b == 0; })) {
          ++empty;
        }
      }
      hit[t] = empty >= k1 ? 1 : 0;
      return;
    }
    std::vector<std::vector<uint64_t>> rows(
        static_cast<size_t>(n1), std::vector<uint64_t>(words, 0));
    for (int64_t i = 0; i < n1; ++i) {
      for (int64_t j = 0; j < n2; ++j) {
        if (a.at(i, j)) rows[i][j / 64] |= uint64_t{1} << (j % 64);
      }
    }
    std::vector<uint64_t> covered(words);
    Combinations combos(n1, k1);
    do {
      std::fill(covered.begin(), covered.end(), 0);
      for (int64_t i : combos.current()) {
        for (size_t w = 0; w < words; ++w) covered[w] |= rows[i][w];
      }
      int64_t ones = 0;
      for (uint64_t w : covered) ones += std::popcount(w);
      if (n2 - ones >= k2) {
        hit[t] = 1;
        return;
      }
    } while (combos.Next());
  });
  const int64_t hits = std::accumulate(hit.begin(), hit.end(), int64_t{0});
  report.mc_estimate = static_cast<double>(hits) / static_cast<double>(trials);
  report.se = ProportionSe(report.mc_estimate, trials);
  return report;
}

ResultTable ToResultTable(const ExperimentConfig& cfg,
                          const SweepResult& sweep) {
  ResultTable table;
  for (const SweepRow& row : sweep.rows) {
    ResultRow r;
    r.experiment_id = cfg.experiment_id;
    r.n1 = cfg.shape.n1;
    r.n2 = cfg.shape.n2;
    r.k1 = cfg.shape.k1;
    r.k2 = cfg.shape.k2;
    r.p0 = cfg.p0;
    r.delta = row.delta;
    r.detector = std::string(DetectorTagName(cfg.detector.tag));
    r.threshold_mode = std::string(ThresholdModeName(cfg.threshold.mode));
    r.threshold = sweep.threshold.value;
    r.trials = row.estimate.trials;
    r.seed = cfg.seed;
    r.type1 = row.estimate.type1;
    r.se1 = row.estimate.se1;
    r.type2 = row.estimate.type2;
    r.se2 = row.estimate.se2;
    r.risk = row.estimate.risk;
    table.push_back(std::move(r));
  }
  return table;
}

void WriteResultsCsv(const ResultTable& table, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : table) {
    out << r.experiment_id << ',' << r.n1 << ',' << r.n2 << ',' << r.k1 << ','
        << r.k2 << ',' << FormatDouble(r.p0) << ',' << FormatDouble(r.delta)
        << ',' << r.detector << ',' << r.threshold_mode << ','
        << FormatDouble(r.threshold) << ',' << r.trials << ',' << r.seed << ','
        << FormatDouble(r.type1) << ',' << FormatDouble(r.se1) << ','
        << FormatDouble(r.type2) << ',' << FormatDouble(r.se2) << ','
        << FormatDouble(r.risk) << '\n';
  }
}

void WriteResultsJson(const ResultTable& table, std::ostream& out) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ResultRow& r : table) {
    nlohmann::ordered_json j;
    j["experiment_id"] = r.experiment_id;
    j["n1"] = r.n1;
    j["n2"] = r.n2;
    j["k1"] = r.k1;
    j["k2"] = r.k2;
    j["p0"] = r.p0;
    j["delta"] = r.delta;
    j["detector"] = r.detector;
    j["threshold_mode"] = r.threshold_mode;
    j["threshold"] = NumberOrString(r.threshold);
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    j["type1"] = r.type1;
    j["se1"] = r.se1;
    j["type2"] = r.type2;
    j["se2"] = r.se2;
    j["risk"] = r.risk;
    rows.push_back(std::move(j));
  }
  out << rows.dump(2) << '\n';
}

ResultTable ReadResultsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw FormatError(1, "unexpected CSV header");
  }
  ResultTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsv(line);
    if (f.size() != 17) {
      throw FormatError(line_no, "expected 17 fields, got " +
                                     std::to_string(f.size()));
    }
    ResultRow r;
    r.experiment_id = f[0];
    r.n1 = ParseInt(f[1], line_no);
    r.n2 = ParseInt(f[2], line_no);
    r.k1 = ParseInt(f[3], line_no);
    r.k2 = ParseInt(f[4], line_no);
    r.p0 = ParseReal(f[5], line_no);
    r.delta = ParseReal(f[6], line_no);
    r.detector = f[7];
    r.threshold_mode = f[8];
    r.threshold = ParseReal(f[9], line_no);
    r.trials = ParseInt(f[10], line_no);
    r.seed = ParseUnsigned(f[11], line_no);
    r.type1 = ParseReal(f[12], line_no);
    r.se1 = ParseReal(f[13], line_no);
    r.type2 = ParseReal(f[14], line_no);
    r.se2 = ParseReal(f[15], line_no);
    r.risk = ParseReal(f[16], line_no);
    table.push_back(std::move(r));
  }
  return table;
}

void emit_results(const ResultTable& table, const std::filesystem::path& path,
                  OutputFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  if (format == OutputFormat::kCsv) {
    WriteResultsCsv(table, out);
  } else {
    WriteResultsJson(table, out);
  }
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void WritePhaseCsv(const std::vector<PhaseRow>& rows, std::ostream& out) {
  out << "n1,n2,k1,k2,psi12,psi21,beta12,beta21,phi12,phi21,R,R_tilde,"
         "branch,delta_lower,delta_upper\n";
  for (const PhaseRow& r : rows) {
    const RateBundle& b = r.bundle;
    out << r.shape.n1 << ',' << r.shape.n2 << ',' << r.shape.k1 << ','
        << r.shape.k2 << ',' << FormatDouble(b.psi12) << ','
        << FormatDouble(b.psi21) << ',' << FormatDouble(b.beta12) << ','
        << FormatDouble(b.beta21) << ',' << b.phi12.ToString() << ','
        << b.phi21.ToString() << ',' << b.R.ToString() << ','
        << b.R_tilde.ToString() << ',' << BranchName(b.branch) << ','
        << FormatDouble(r.bounds.lower) << ',' << FormatDouble(r.bounds.upper)
        << '\n';
  }
}

ExperimentConfig ConfigFromJson(const json& doc) {
  const Reader root(doc, "");
  root.RejectUnknown({"experiment_id", "shape", "p0", "delta_grid", "detector",
                      "threshold", "trials", "seed", "eta", "threads",
                      "budget", "constants"});
  ExperimentConfig cfg;
  if (root.Has("experiment_id")) cfg.experiment_id = root.String("experiment_id");

  const Reader shape(root.At("shape"), "shape");
  shape.RejectUnknown({"n1", "n2", "k1", "k2"});
  cfg.shape = {shape.Integer("n1"), shape.Integer("n2"), shape.Integer("k1"),
               shape.Integer("k2")};

  cfg.p0 = root.Number("p0");

  const json& grid = root.At("delta_grid");
  if (!grid.is_array()) {
    throw ConfigurationError("delta_grid: expected an array");
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!grid[i].is_number()) {
      throw ConfigurationError("delta_grid[" + std::to_string(i) +
                               "]: expected a number");
    }
    cfg.delta_grid.push_back(grid[i].get<double>());
  }

  if (root.Has("detector")) {
    const json& node = root.At("detector");
    if (node.is_string()) {
      WithPath("detector", [&] {
        cfg.detector.tag = ParseDetectorTag(node.get<std::string>());
      });
    } else {
      const Reader det(node, "detector");
      det.RejectUnknown({"tag", "tau", "k_scan"});
      WithPath("detector.tag",
               [&] { cfg.detector.tag = ParseDetectorTag(det.String("tag")); });
      if (det.Has("tau")) cfg.detector.tau = det.Number("tau");
      if (det.Has("k_scan")) cfg.detector.k_scan = det.Integer("k_scan");
    }
  }

  if (root.Has("threshold")) {
    const Reader th(root.At("threshold"), "threshold");
    th.RejectUnknown({"mode", "alpha", "trials", "seed", "value"});
    WithPath("threshold.mode", [&] {
      cfg.threshold.mode = ParseThresholdMode(th.String("mode"));
    });
    if (th.Has("alpha")) cfg.threshold.alpha = th.Number("alpha");
    if (th.Has("trials")) {
      cfg.threshold.calibration_trials = th.Integer("trials");
    }
    if (th.Has("seed")) cfg.threshold.calibration_seed = th.Unsigned("seed");
    if (th.Has("value")) cfg.threshold.value = th.Number("value");
    if (cfg.threshold.mode == ThresholdMode::kFixed && !th.Has("value")) {
      throw ConfigurationError("threshold.value: missing");
    }
  }

  if (root.Has("trials")) cfg.trials = root.Integer("trials");
  if (root.Has("seed")) cfg.seed = root.Unsigned("seed");
  if (root.Has("eta")) cfg.eta = root.Number("eta");
  if (root.Has("threads")) {
    cfg.options.threads = static_cast<int>(root.Integer("threads"));
  }
  if (root.Has("budget")) cfg.options.budget = root.Integer("budget");

  if (root.Has("constants")) {
    const Reader c(root.At("constants"), "constants");
    c.RejectUnknown({"C_phi", "c1", "c_delta", "C_delta", "C_eta", "C_star",
                     "c_prime", "C_tau"});
    RateConstants& r = cfg.options.rates;
    ThresholdConstants& t = cfg.options.thresholds;
    if (c.Has("C_phi")) r.C_phi = c.Number("C_phi");
    if (c.Has("c1")) r.c1 = c.Number("c1");
    if (c.Has("c_delta")) r.c_delta = c.Number("c_delta");
    if (c.Has("C_delta")) r.C_delta = c.Number("C_delta");
    if (c.Has("C_eta")) r.C_eta = c.Number("C_eta");
    if (c.Has("C_star")) t.C_star = c.Number("C_star");
    if (c.Has("c_prime")) t.c_prime = c.Number("c_prime");
    if (c.Has("C_tau")) t.C_tau = c.Number("C_tau");
  }
  return cfg;
}

json ConfigToJson(const ExperimentConfig& cfg) {
  json j;
  j["experiment_id"] = cfg.experiment_id;
  j["shape"] = {{"n1", cfg.shape.n1},
                {"n2", cfg.shape.n2},
                {"k1", cfg.shape.k1},
                {"k2", cfg.shape.k2}};
  j["p0"] = cfg.p0;
  j["delta_grid"] = cfg.delta_grid;
  json det = {{"tag", std::string(DetectorTagName(cfg.detector.tag))}};
  if (cfg.detector.tau) det["tau"] = *cfg.detector.tau;
  if (cfg.detector.k_scan) det["k_scan"] = *cfg.detector.k_scan;
  j["detector"] = det;
  json th = {{"mode", std::string(ThresholdModeName(cfg.threshold.mode))}};
  switch (cfg.threshold.mode) {
    case ThresholdMode::kCalibrated:
      th["trials"] = cfg.threshold.calibration_trials;
      if (cfg.threshold.calibration_seed) {
        th["seed"] = *cfg.threshold.calibration_seed;
      }
      [[fallthrough]];
    case ThresholdMode::kAnalytic:
      th["alpha"] = cfg.threshold.alpha;
      break;
    case ThresholdMode::kFixed:
      th["value"] = NumberOrString(cfg.threshold.value);
      break;
  }
  j["threshold"] = th;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["eta"] = cfg.eta;
  j["threads"] = cfg.options.threads;
  j["budget"] = cfg.options.budget;
  const RateConstants& r = cfg.options.rates;
  const ThresholdConstants& t = cfg.options.thresholds;
  j["constants"] = {{"C_phi", r.C_phi},     {"c1", r.c1},
                    {"c_delta", r.c_delta}, {"C_delta", r.C_delta},
                    {"C_eta", r.C_eta},     {"C_star", t.C_star},
                    {"c_prime", t.c_prime}, {"C_tau", t.C_tau}};
  return j;
}

json SweepMetadata(const ExperimentConfig& cfg, const SweepResult& sweep) {
  json meta;
  json config = ConfigToJson(cfg);
  // The worker count does not affect results; leaving it out keeps the
  // sidecar byte-identical across --threads.
  config.erase("threads");
  meta["config"] = config;
  json resolved;
  resolved["threshold"] = NumberOrString(sweep.threshold.value);
  resolved["detector"] =
      std::string(DetectorTagName(sweep.threshold.effective.tag));
  if (sweep.threshold.effective.tau) {
    resolved["tau"] = *sweep.threshold.effective.tau;
  }
  if (sweep.threshold.effective.k_scan) {
    resolved["k_scan"] = *sweep.threshold.effective.k_scan;
  }
  if (sweep.threshold.branch) {
    resolved["branch"] = std::string(BranchName(*sweep.threshold.branch));
  }
  const RateBundle bundle = rate_bundle(cfg.shape, cfg.options.rates);
  resolved["R"] = NumberOrString(bundle.R.ToDouble());
  resolved["R_tilde"] = NumberOrString(bundle.R_tilde.ToDouble());
  const DeltaStarBounds bounds =
      delta_star_bounds(cfg.shape, cfg.p0, cfg.options.rates);
  resolved["delta_lower"] = bounds.lower;
  resolved["delta_upper"] = bounds.upper;
  if (cfg.threshold.mode != ThresholdMode::kFixed) {
    const AnalyticThresholds a = analytic_thresholds(
        cfg.shape, cfg.p0, cfg.threshold.alpha, cfg.options.thresholds);
    resolved["analytic"] = {{"h1", a.h1},     {"h1p", a.h1p},
                            {"h2", a.h2},     {"h2p", a.h2p},
                            {"h3", a.h3},     {"h4", a.h4},
                            {"tau1", a.tau1}, {"tau2", a.tau2},
                            {"tau3", a.tau3}, {"tau4", a.tau4}};
  }
  meta["resolved"] = resolved;
  meta["type2_monotone"] = sweep.type2_monotone;
  return meta;
}

}  // namespace bipdetect
