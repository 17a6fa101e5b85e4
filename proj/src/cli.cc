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

#include "bipdetect/cli.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bipdetect/detectors.h"
#include "bipdetect/errors.h"
#include "bipdetect/graph_model.h"
#include "bipdetect/harness.h"
#include "bipdetect/lower_bound.h"
#include "bipdetect/numerics.h"
#include "bipdetect/rates.h"
#include "json.hpp"

namespace bipdetect {

namespace {

// tv is printed by `lb` only up to this many cells; beyond it the
// enumeration takes seconds.
constexpr int64_t kLbTvCells = 16;

struct Flags {
  std::optional<int64_t> n1, n2, k1, k2;
  std::optional<double> p0, delta, tau, threshold;
  double alpha = 0.1;
  double eta = 0.5;
  double tolerance = 0.005;
  int64_t trials = 1000;
  std::optional<int64_t> calibration_trials;
  std::optional<uint64_t> seed;
  std::optional<int64_t> k_scan;
  int threads = 1;
  int64_t budget = kDefaultSubsetBudget;
  std::string out;
  std::string config;
  std::string detector = "delta-star";
  std::string threshold_mode = "calibrated";
  std::string format = "csv";
  std::string experiment_id = "experiment";
  std::string delta_grid;
  std::string n1_grid, n2_grid, k1_grid, k2_grid;
  std::string matrix;
  bool null_model = false;
  bool bisect = false;
  RateConstants rates;
  ThresholdConstants thresholds;
};

// Shortest round-trip form, for --help defaults.
std::string ShortDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Real-valued flags go through ParseDouble: decimal, locale independent.
CLI::Option* AddReal(CLI::App* app, const std::string& name, double& target,
                     const std::string& help) {
  return app
      ->add_option_function<std::string>(
          name, [&target](const std::string& s) { target = ParseDouble(s); },
          help)
      ->type_name("FLOAT")
      ->default_str(ShortDouble(target));
}

CLI::Option* AddReal(CLI::App* app, const std::string& name,
                     std::optional<double>& target, const std::string& help) {
  return app
      ->add_option_function<std::string>(
          name, [&target](const std::string& s) { target = ParseDouble(s); },
          help)
      ->type_name("FLOAT");
}

void AddShape(CLI::App* app, Flags& f, bool with_k) {
  app->add_option("--n1", f.n1, "left vertex count (rows)");
  app->add_option("--n2", f.n2, "right vertex count (columns)");
  if (with_k) {
    app->add_option("--k1", f.k1, "planted rows");
    app->add_option("--k2", f.k2, "planted columns");
  }
}

void AddRateConstants(CLI::App* app, Flags& f) {
  AddReal(app, "--c-phi", f.rates.C_phi, "cutoff on n1/k1^2 in phi");
  AddReal(app, "--c1", f.rates.c1, "truncated vs total degree switch");
  AddReal(app, "--c-delta", f.rates.c_delta, "lower separation constant");
  AddReal(app, "--C-delta", f.rates.C_delta, "upper separation constant");
  AddReal(app, "--C-eta", f.rates.C_eta, "density assumption constant");
}

void AddThresholdConstants(CLI::App* app, Flags& f) {
  AddReal(app, "--C-star", f.thresholds.C_star, "analytic threshold scale");
  AddReal(app, "--c-prime", f.thresholds.c_prime,
          "analytic threshold exponent");
  AddReal(app, "--C-tau", f.thresholds.C_tau, "truncation level scale");
}

void AddDetector(CLI::App* app, Flags& f) {
  app->add_option("--detector", f.detector,
                  "total-degree, trunc-degree-1, trunc-degree-2, "
                  "max-trunc-1, max-trunc-2 or delta-star")
      ->capture_default_str();
  AddReal(app, "--tau", f.tau, "truncation level (default: analytic)");
  app->add_option("--k-scan", f.k_scan, "subset size of the max tests");
  app->add_option("--threads", f.threads, "worker threads")
      ->capture_default_str();
  app->add_option("--budget", f.budget, "subset enumeration budget")
      ->capture_default_str();
  AddRateConstants(app, f);
  AddThresholdConstants(app, f);
}

bool Given(const CLI::App* app, const std::string& name) {
  return app->count(name) > 0;
}

int64_t Need(const std::optional<int64_t>& v, const char* flag) {
  if (!v) throw ParameterError(std::string("missing ") + flag);
  return *v;
}

double Need(const std::optional<double>& v, const char* flag) {
  if (!v) throw ParameterError(std::string("missing ") + flag);
  return *v;
}

uint64_t NeedSeed(const Flags& f) {
  if (!f.seed) throw ParameterError("missing --seed (required for randomized subcommands)");
  return *f.seed;
}

ProblemShape ShapeFrom(const Flags& f) {
  ProblemShape s{Need(f.n1, "--n1"), Need(f.n2, "--n2"), Need(f.k1, "--k1"),
                 Need(f.k2, "--k2")};
  s.Validate();
  return s;
}

DetectorKind KindFrom(const Flags& f) {
  DetectorKind kind;
  kind.tag = ParseDetectorTag(f.detector);
  kind.tau = f.tau;
  kind.k_scan = f.k_scan;
  return kind;
}

DetectorOptions OptionsFrom(const Flags& f) {
  if (f.threads < 1) throw ParameterError("--threads must be positive");
  DetectorOptions o;
  o.rates = f.rates;
  o.thresholds = f.thresholds;
  o.budget = f.budget;
  o.threads = f.threads;
  o.rates.Validate();
  return o;
}

std::vector<double> ParseRealList(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    out.push_back(ParseDouble(item));
  }
  if (out.empty()) throw ParameterError(std::string(flag) + " is empty");
  return out;
}

std::vector<int64_t> ParseIntList(const std::string& text,
                                  const std::optional<int64_t>& single,
                                  const char* flag) {
  if (text.empty()) {
    if (!single) throw ParameterError(std::string("missing ") + flag);
    return {*single};
  }
  std::vector<int64_t> out;
  for (double v : ParseRealList(text, flag)) {
    if (v != static_cast<double>(static_cast<int64_t>(v))) {
      throw ParameterError(std::string(flag) + " must list integers");
    }
    out.push_back(static_cast<int64_t>(v));
  }
  return out;
}

// Prints "key = value" lines.
class KeyValue {
 public:
  explicit KeyValue(std::ostream& out) : out_(out) {}

  KeyValue& operator()(std::string_view key, double v) {
    out_ << key << " = " << FormatDouble(v) << '\n';
    return *this;
  }
  KeyValue& operator()(std::string_view key, int64_t v) {
    out_ << key << " = " << v << '\n';
    return *this;
  }
  KeyValue& operator()(std::string_view key, uint64_t v) {
    out_ << key << " = " << v << '\n';
    return *this;
  }
  KeyValue& operator()(std::string_view key, std::string_view v) {
    out_ << key << " = " << v << '\n';
    return *this;
  }
  KeyValue& operator()(std::string_view key, bool v) {
    out_ << key << " = " << (v ? "true" : "false") << '\n';
    return *this;
  }

 private:
  std::ostream& out_;
};

void PrintDetector(KeyValue& kv, const Detector& d) {
  kv("detector", DetectorTagName(d.requested().tag));
  kv("effective", DetectorTagName(d.effective().tag));
  if (d.branch()) kv("branch", BranchName(*d.branch()));
  if (d.effective().tau) kv("tau", *d.effective().tau);
  if (d.effective().k_scan) kv("k_scan", *d.effective().k_scan);
}

// Output goes to --out when set, else to `out`.
template <typename Fn>
void WithOutput(const Flags& f, std::ostream& out, Fn&& fn) {
  if (f.out.empty()) {
    fn(out);
    return;
  }
  std::ofstream file(f.out, std::ios::binary);
  if (!file) throw IoError("cannot open '" + f.out + "' for writing");
  fn(file);
  file.flush();
  if (!file) throw IoError("failed writing '" + f.out + "'");
}

void WriteJsonFile(const std::filesystem::path& path,
                   const nlohmann::json& doc) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  file << doc.dump(2) << '\n';
  if (!file) throw IoError("failed writing '" + path.string() + "'");
}

void RunGen(const Flags& f, std::ostream& out) {
  const uint64_t seed = NeedSeed(f);
  const double p0 = Need(f.p0, "--p0");
  if (f.null_model) {
    const ProblemShape shape{Need(f.n1, "--n1"), Need(f.n2, "--n2"), 1, 1};
    if (shape.n1 < 1 || shape.n2 < 1) {
      throw ParameterError("--n1 and --n2 must be positive");
    }
    const AdjacencyMatrix a = sample_null(shape, p0, seed);
    WithOutput(f, out, [&](std::ostream& o) { FormatMatrix(a, o); });
    return;
  }
  const ProblemShape shape = ShapeFrom(f);
  const SignalConfig signal{p0, Need(f.delta, "--delta")};
  signal.Validate();
  const auto [a, support] = sample_planted_uniform_support(shape, signal, seed);
  WithOutput(f, out, [&](std::ostream& o) { FormatMatrix(a, o); });
  if (!f.out.empty()) {
    WriteJsonFile(f.out + ".support.json",
                  {{"left", support.left}, {"right", support.right}});
  }
}

void RunStat(const Flags& f, std::ostream& out) {
  if (f.matrix.empty()) throw ParameterError("missing matrix path");
  const AdjacencyMatrix a = read_matrix(f.matrix);
  const ProblemShape shape{a.rows(), a.cols(), Need(f.k1, "--k1"),
                           Need(f.k2, "--k2")};
  shape.Validate();
  const double p0 = Need(f.p0, "--p0");
  const Detector d = Detector::Resolve(KindFrom(f), shape, p0, OptionsFrom(f));
  const double stat = d.Statistic(a);
  KeyValue kv(out);
  PrintDetector(kv, d);
  kv("statistic", stat);
  const ThresholdMode mode = ParseThresholdMode(f.threshold_mode);
  std::optional<double> h;
  if (f.threshold) {
    h = *f.threshold;
  } else if (mode == ThresholdMode::kAnalytic) {
    h = d.AnalyticThreshold(f.alpha, f.thresholds);
  }
  if (h) {
    kv("threshold", *h);
    kv("reject", stat > *h);
  }
}

void RunCalibrate(const Flags& f, std::ostream& out) {
  const uint64_t seed = NeedSeed(f);
  const ProblemShape shape = ShapeFrom(f);
  const double p0 = Need(f.p0, "--p0");
  const DetectorOptions options = OptionsFrom(f);
  const DetectorKind kind = KindFrom(f);
  const Detector d = Detector::Resolve(kind, shape, p0, options);
  const double h = calibrate_threshold(kind, shape, p0, f.alpha, f.trials,
                                       seed, options);
  KeyValue kv(out);
  PrintDetector(kv, d);
  kv("alpha", f.alpha)("trials", f.trials)("seed", seed)("threshold", h);
}

void RunRisk(const Flags& f, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.seed = NeedSeed(f);
  cfg.shape = ShapeFrom(f);
  cfg.p0 = Need(f.p0, "--p0");
  const double delta = Need(f.delta, "--delta");
  cfg.delta_grid = {delta};
  cfg.detector = KindFrom(f);
  cfg.threshold.mode = ParseThresholdMode(f.threshold_mode);
  cfg.threshold.alpha = f.alpha;
  cfg.threshold.calibration_trials = f.calibration_trials.value_or(f.trials);
  if (f.threshold) {
    cfg.threshold.mode = ThresholdMode::kFixed;
    cfg.threshold.value = *f.threshold;
  }
  cfg.trials = f.trials;
  cfg.eta = f.eta;
  cfg.options = OptionsFrom(f);
  const RiskEvaluator evaluator(cfg);
  const RiskEstimate e = evaluator.Evaluate(delta);
  KeyValue kv(out);
  kv("detector", DetectorTagName(cfg.detector.tag));
  kv("effective", DetectorTagName(evaluator.threshold().effective.tag));
  if (evaluator.threshold().branch) {
    kv("branch", BranchName(*evaluator.threshold().branch));
  }
  kv("threshold_mode", ThresholdModeName(cfg.threshold.mode));
  kv("threshold", evaluator.threshold().value);
  kv("delta", delta)("trials", e.trials)("seed", cfg.seed);
  kv("type1", e.type1)("se1", e.se1)("type2", e.type2)("se2", e.se2);
  kv("risk", e.risk);
}

void RunRates(const Flags& f, std::ostream& out) {
  const ProblemShape shape = ShapeFrom(f);
  f.rates.Validate();
  const RateBundle b = rate_bundle(shape, f.rates);
  KeyValue kv(out);
  kv("psi12", b.psi12)("psi21", b.psi21)("beta12", b.beta12)("beta21",
                                                             b.beta21);
  kv("phi12", b.phi12.ToString())("phi21", b.phi21.ToString());
  kv("R", b.R.ToString())("R_tilde", b.R_tilde.ToString());
  kv("branch", BranchName(b.branch));
  if (f.p0) {
    const DeltaStarBounds bounds = delta_star_bounds(shape, *f.p0, f.rates);
    kv("delta_lower", bounds.lower)("delta_upper", bounds.upper);
    const DensityReport density = density_assumption(shape, *f.p0, f.rates);
    kv("density_required", density.required_lower_bound);
    kv("density_satisfied", density.satisfied);
  }
}

void RunLb(const Flags& f, std::ostream& out) {
  const ProblemShape shape = ShapeFrom(f);
  const double p0 = Need(f.p0, "--p0");
  const double delta = Need(f.delta, "--delta");
  const SecondMomentResult r = second_moment(shape, p0, delta);
  KeyValue kv(out);
  kv("mu2", r.mu2)("exact", r.exact)("exp_hypergeom", r.exp_hypergeom);
  kv("exp_binomial", r.exp_binomial)("risk_lb", r.risk_lb);
  if (shape.n1 * shape.n2 <= kLbTvCells) {
    const double tv = tv_exact(shape, p0, delta, f.threads);
    kv("tv", tv)("one_minus_tv", 1.0 - tv);
  }
}

ExperimentConfig SweepConfig(const Flags& f, const CLI::App* sub) {
  ExperimentConfig cfg;
  bool seed_known = false;
  if (!f.config.empty()) {
    std::ifstream in(f.config, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + f.config + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigurationError(std::string("config: ") + e.what());
    }
    cfg = ConfigFromJson(doc);
    seed_known = doc.contains("seed");
  } else {
    cfg.shape = ShapeFrom(f);
    cfg.p0 = Need(f.p0, "--p0");
  }

  if (Given(sub, "--n1")) cfg.shape.n1 = *f.n1;
  if (Given(sub, "--n2")) cfg.shape.n2 = *f.n2;
  if (Given(sub, "--k1")) cfg.shape.k1 = *f.k1;
  if (Given(sub, "--k2")) cfg.shape.k2 = *f.k2;
  if (Given(sub, "--p0")) cfg.p0 = *f.p0;
  if (Given(sub, "--experiment-id") || f.config.empty()) {
    cfg.experiment_id = f.experiment_id;
  }
  if (Given(sub, "--delta-grid")) {
    cfg.delta_grid = ParseRealList(f.delta_grid, "--delta-grid");
  } else if (Given(sub, "--delta")) {
    cfg.delta_grid = {*f.delta};
  }
  if (Given(sub, "--detector")) {
    cfg.detector = {ParseDetectorTag(f.detector), std::nullopt, std::nullopt};
  } else if (f.config.empty()) {
    cfg.detector.tag = ParseDetectorTag(f.detector);
  }
  if (Given(sub, "--tau")) cfg.detector.tau = f.tau;
  if (Given(sub, "--k-scan")) cfg.detector.k_scan = f.k_scan;
  if (Given(sub, "--threshold-mode") || f.config.empty()) {
    cfg.threshold.mode = ParseThresholdMode(f.threshold_mode);
  }
  if (Given(sub, "--alpha") || f.config.empty()) cfg.threshold.alpha = f.alpha;
  if (Given(sub, "--calibration-trials")) {
    cfg.threshold.calibration_trials = *f.calibration_trials;
  } else if (f.config.empty()) {
    cfg.threshold.calibration_trials = f.trials;
  }
  if (Given(sub, "--threshold")) {
    cfg.threshold.mode = ThresholdMode::kFixed;
    cfg.threshold.value = *f.threshold;
  }
  if (Given(sub, "--trials") || f.config.empty()) cfg.trials = f.trials;
  if (Given(sub, "--seed")) {
    cfg.seed = *f.seed;
    seed_known = true;
  }
  if (!seed_known) {
    throw ParameterError("missing --seed (required for randomized subcommands)");
  }
  if (Given(sub, "--eta") || f.config.empty()) cfg.eta = f.eta;
  if (Given(sub, "--threads") || f.config.empty()) {
    cfg.options.threads = f.threads;
  }
  if (Given(sub, "--budget") || f.config.empty()) {
    cfg.options.budget = f.budget;
  }
  RateConstants& r = cfg.options.rates;
  ThresholdConstants& t = cfg.options.thresholds;
  const bool flags_only = f.config.empty();
  if (Given(sub, "--c-phi") || flags_only) r.C_phi = f.rates.C_phi;
  if (Given(sub, "--c1") || flags_only) r.c1 = f.rates.c1;
  if (Given(sub, "--c-delta") || flags_only) r.c_delta = f.rates.c_delta;
  if (Given(sub, "--C-delta") || flags_only) r.C_delta = f.rates.C_delta;
  if (Given(sub, "--C-eta") || flags_only) r.C_eta = f.rates.C_eta;
  if (Given(sub, "--C-star") || flags_only) t.C_star = f.thresholds.C_star;
  if (Given(sub, "--c-prime") || flags_only) t.c_prime = f.thresholds.c_prime;
  if (Given(sub, "--C-tau") || flags_only) t.C_tau = f.thresholds.C_tau;
  cfg.Validate();
  return cfg;
}

void RunSweep(const Flags& f, const CLI::App* sub, std::ostream& out) {
  const ExperimentConfig cfg = SweepConfig(f, sub);
  const OutputFormat format = f.format == "json" ? OutputFormat::kJson
                              : f.format == "csv"
                                  ? OutputFormat::kCsv
                                  : throw ParameterError("--format must be csv or json");
  if (f.bisect && f.out.empty()) {
    throw ParameterError("--bisect needs --out");
  }
  const SweepResult sweep = power_sweep(cfg);
  const ResultTable table = ToResultTable(cfg, sweep);
  if (f.out.empty()) {
    if (format == OutputFormat::kCsv) {
      WriteResultsCsv(table, out);
    } else {
      WriteResultsJson(table, out);
    }
    return;
  }
  emit_results(table, f.out, format);
  nlohmann::json meta = SweepMetadata(cfg, sweep);
  if (f.bisect) {
    const BisectionResult b = bisect_delta_star(cfg, f.tolerance);
    meta["bisection"] = {{"delta", b.delta},
                         {"lower", b.lower},
                         {"upper", b.upper},
                         {"iterations", b.iterations},
                         {"tolerance", f.tolerance}};
    KeyValue kv(out);
    kv("delta_star", b.delta)("bracket_lower", b.lower)("bracket_upper",
                                                        b.upper);
    kv("iterations", static_cast<int64_t>(b.iterations));
  }
  WriteJsonFile(f.out + ".meta.json", meta);
}

void RunPhase(const Flags& f, std::ostream& out) {
  const double p0 = Need(f.p0, "--p0");
  f.rates.Validate();
  std::vector<ProblemShape> shapes;
  for (int64_t n1 : ParseIntList(f.n1_grid, f.n1, "--n1")) {
    for (int64_t n2 : ParseIntList(f.n2_grid, f.n2, "--n2")) {
      for (int64_t k1 : ParseIntList(f.k1_grid, f.k1, "--k1")) {
        for (int64_t k2 : ParseIntList(f.k2_grid, f.k2, "--k2")) {
          shapes.push_back({n1, n2, k1, k2});
        }
      }
    }
  }
  const std::vector<PhaseRow> rows = phase_diagram(shapes, p0, f.rates);
  WithOutput(f, out, [&](std::ostream& o) { WritePhaseCsv(rows, o); });
}

int Fail(std::ostream& err, int code, std::string_view kind,
         std::string_view message) {
  const char* category = code == kExitBudget ? "budget"
                         : code == kExitIo   ? "io"
                                             : "usage";
  nlohmann::json line = {{"error", category},
                         {"kind", std::string(kind)},
                         {"message", std::string(message)}};
  err << line.dump() << '\n';
  return code;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  Flags f;
  CLI::App app{"Planted bipartite community detection toolkit", "bipdetect"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "sample a null or planted matrix");
  AddShape(gen, f, true);
  AddReal(gen, "--p0", f.p0, "baseline edge probability");
  AddReal(gen, "--delta", f.delta, "planted elevation");
  gen->add_flag("--null", f.null_model, "sample the null model");
  gen->add_option("--seed", f.seed, "random seed (required)");
  gen->add_option("--out", f.out, "output path (default: stdout)");

  auto* stat = app.add_subcommand("stat", "evaluate a detector on a matrix");
  stat->add_option("matrix", f.matrix, "matrix file")->required();
  stat->add_option("--k1", f.k1, "planted rows");
  stat->add_option("--k2", f.k2, "planted columns");
  AddReal(stat, "--p0", f.p0, "baseline edge probability");
  AddReal(stat, "--alpha", f.alpha, "level of the analytic threshold");
  stat->add_option("--threshold-mode", f.threshold_mode,
                   "analytic prints the threshold and decision")
      ->capture_default_str();
  AddReal(stat, "--threshold", f.threshold, "explicit threshold");
  AddDetector(stat, f);

  auto* calibrate =
      app.add_subcommand("calibrate", "Monte Carlo null quantile threshold");
  AddShape(calibrate, f, true);
  AddReal(calibrate, "--p0", f.p0, "baseline edge probability");
  AddReal(calibrate, "--alpha", f.alpha, "target Type I error");
  calibrate->add_option("--trials", f.trials, "null samples")
      ->capture_default_str();
  calibrate->add_option("--seed", f.seed, "random seed (required)");
  AddDetector(calibrate, f);

  auto* risk = app.add_subcommand("risk", "estimate Type I + Type II");
  AddShape(risk, f, true);
  AddReal(risk, "--p0", f.p0, "baseline edge probability");
  AddReal(risk, "--delta", f.delta, "planted elevation");
  AddReal(risk, "--alpha", f.alpha, "threshold level");
  AddReal(risk, "--eta", f.eta, "target risk");
  AddReal(risk, "--threshold", f.threshold, "fixed threshold");
  risk->add_option("--threshold-mode", f.threshold_mode,
                   "analytic, calibrated or fixed")
      ->capture_default_str();
  risk->add_option("--trials", f.trials, "trials per hypothesis")
      ->capture_default_str();
  risk->add_option("--calibration-trials", f.calibration_trials,
                   "null samples for calibration (default: --trials)");
  risk->add_option("--seed", f.seed, "random seed (required)");
  AddDetector(risk, f);

  auto* rates = app.add_subcommand("rates", "rate functions and branch");
  AddShape(rates, f, true);
  AddReal(rates, "--p0", f.p0, "baseline probability for delta bounds");
  AddRateConstants(rates, f);

  auto* lb = app.add_subcommand("lb", "second moment lower bound");
  AddShape(lb, f, true);
  AddReal(lb, "--p0", f.p0, "baseline edge probability");
  AddReal(lb, "--delta", f.delta, "planted elevation");
  lb->add_option("--threads", f.threads, "worker threads")
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "power sweep over a delta grid");
  sweep->add_option("--config", f.config, "JSON experiment config");
  AddShape(sweep, f, true);
  AddReal(sweep, "--p0", f.p0, "baseline edge probability");
  AddReal(sweep, "--delta", f.delta, "single delta (overrides the grid)");
  sweep->add_option("--delta-grid", f.delta_grid,
                    "comma-separated delta values");
  AddReal(sweep, "--alpha", f.alpha, "threshold level");
  AddReal(sweep, "--eta", f.eta, "target risk for --bisect");
  AddReal(sweep, "--threshold", f.threshold, "fixed threshold");
  sweep->add_option("--threshold-mode", f.threshold_mode,
                    "analytic, calibrated or fixed")
      ->capture_default_str();
  sweep->add_option("--trials", f.trials, "trials per hypothesis")
      ->capture_default_str();
  sweep->add_option("--calibration-trials", f.calibration_trials,
                    "null samples for calibration (default: --trials)");
  sweep->add_option("--seed", f.seed, "random seed (required here or in config)");
  sweep->add_option("--experiment-id", f.experiment_id, "CSV experiment_id")
      ->capture_default_str();
  sweep->add_option("--out", f.out,
                    "output path; also writes <out>.meta.json");
  sweep->add_option("--format", f.format, "csv or json")->capture_default_str();
  sweep->add_flag("--bisect", f.bisect, "also bisect for the eta crossing");
  AddReal(sweep, "--tolerance", f.tolerance, "bisection bracket width");
  AddDetector(sweep, f);

  auto* phase = app.add_subcommand("phase", "rate bundle over a shape grid");
  AddShape(phase, f, true);
  phase->add_option("--n1-grid", f.n1_grid, "comma-separated n1 values");
  phase->add_option("--n2-grid", f.n2_grid, "comma-separated n2 values");
  phase->add_option("--k1-grid", f.k1_grid, "comma-separated k1 values");
  phase->add_option("--k2-grid", f.k2_grid, "comma-separated k2 values");
  AddReal(phase, "--p0", f.p0, "baseline probability for delta bounds");
  phase->add_option("--out", f.out, "output path (default: stdout)");
  AddRateConstants(phase, f);

  try {
    app.parse(argc, argv);
    if (gen->parsed()) RunGen(f, out);
    if (stat->parsed()) RunStat(f, out);
    if (calibrate->parsed()) RunCalibrate(f, out);
    if (risk->parsed()) RunRisk(f, out);
    if (rates->parsed()) RunRates(f, out);
    if (lb->parsed()) RunLb(f, out);
    if (sweep->parsed()) RunSweep(f, sweep, out);
    if (phase->parsed()) RunPhase(f, out);
    return kExitOk;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return Fail(err, kExitUsage, "usage", e.what());
  } catch (const BudgetError& e) {
    return Fail(err, kExitBudget, ErrorKindName(e.kind()), e.what());
  } catch (const IoError& e) {
    return Fail(err, kExitIo, ErrorKindName(e.kind()), e.what());
  } catch (const FormatError& e) {
    return Fail(err, kExitIo, ErrorKindName(e.kind()), e.what());
  } catch (const Error& e) {
    return Fail(err, kExitUsage, ErrorKindName(e.kind()), e.what());
  }
}

}  // namespace bipdetect
