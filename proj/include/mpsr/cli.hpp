/**
 * @file cli.hpp
 * @brief The `mpsr` command-line pipeline: simulate, metrics, compare,
 *        fit-risk, evaluate, misuse and report.
 *
 * Exit codes: 0 success, 1 usage error, 2 data or validation error,
 * 3 numerical failure. Failures print one line to stderr:
 *   mpsr: error kind=<Kind>: <message>
 */
#pragma once

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpsr/aggregation.hpp"
#include "mpsr/dataset_io.hpp"
#include "mpsr/error.hpp"
#include "mpsr/motion.hpp"
#include "mpsr/report.hpp"
#include "mpsr/risk.hpp"
#include "mpsr/stats.hpp"

namespace mpsr {

// ---------------------------------------------------------------------------
// Corpus spec files

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                                const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) fail(ErrorKind::ParseError, where + ": unknown key '" + key + "'");
  }
}

/// A range is either a number (fixed value) or a two-element [lo, hi] array.
inline ParameterRange parse_range(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    ParameterRange r{j[0].get<double>(), j[1].get<double>()};
    if (r.lo > r.hi) fail(ErrorKind::ParameterBounds, where + ": range lower bound exceeds upper bound");
    return r;
  }
  fail(ErrorKind::ParseError, where + ": expected a number or [lo, hi]");
}

}  // namespace detail

/**
 * Corpus spec JSON:
 * {
 *   "seed": 42, "dt_seconds": 0.001, "duration_seconds": 0.05,
 *   "groups": [{"dataset_tag": "ROT", "family": "RotatingStretch", "impacts": 10,
 *               "elements_per_impact": 10, "stretch_rate": [0.05, 0.5],
 *               "angular_velocity": [5, 50]}],
 *   "labeled_fixture": {"dataset_tag": "NFL", "positives": 22, "negatives": 31}
 * }
 * Every key except "groups" entries' tag/family/impacts is optional.
 */
inline CorpusSpec parse_corpus_spec(std::string_view text, const std::string& where = "corpus spec") {
  CorpusSpec spec;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) fail(ErrorKind::ParseError, where + ": expected a JSON object");
    detail::reject_unknown_keys(j, {"seed", "dt_seconds", "duration_seconds", "groups", "labeled_fixture"}, where);
    spec.seed = j.value("seed", spec.seed);
    spec.dt = j.value("dt_seconds", spec.dt);
    spec.duration = j.value("duration_seconds", spec.duration);
    if (j.contains("groups"))
      for (std::size_t i = 0; i < j.at("groups").size(); ++i) {
        const auto& g = j.at("groups")[i];
        const std::string gw = where + ": groups[" + std::to_string(i) + "]";
        detail::reject_unknown_keys(g,
                                    {"dataset_tag", "family", "impacts", "elements_per_impact", "stretch_rate",
                                     "shear_rate", "angular_velocity", "random_scale"},
                                    gw);
        CorpusGroup cg;
        cg.dataset_tag = g.at("dataset_tag").get<std::string>();
        cg.family = parse_motion_family(g.at("family").get<std::string>());
        cg.impacts = g.at("impacts").get<int>();
        cg.elements_per_impact = g.value("elements_per_impact", 1);
        if (g.contains("stretch_rate")) cg.stretch_rate = detail::parse_range(g["stretch_rate"], gw);
        if (g.contains("shear_rate")) cg.shear_rate = detail::parse_range(g["shear_rate"], gw);
        if (g.contains("angular_velocity")) cg.angular_velocity = detail::parse_range(g["angular_velocity"], gw);
        if (g.contains("random_scale")) cg.random_scale = detail::parse_range(g["random_scale"], gw);
        spec.groups.push_back(std::move(cg));
      }
    if (j.contains("labeled_fixture")) {
      const auto& f = j.at("labeled_fixture");
      detail::reject_unknown_keys(f,
                                  {"dataset_tag", "positives", "negatives", "elements_per_impact", "positive_mean",
                                   "negative_mean", "severity_sd"},
                                  where + ": labeled_fixture");
      LabeledFixtureSpec fx;
      fx.dataset_tag = f.value("dataset_tag", fx.dataset_tag);
      fx.positives = f.value("positives", fx.positives);
      fx.negatives = f.value("negatives", fx.negatives);
      fx.elements_per_impact = f.value("elements_per_impact", fx.elements_per_impact);
      fx.positive_mean = f.value("positive_mean", fx.positive_mean);
      fx.negative_mean = f.value("negative_mean", fx.negative_mean);
      fx.severity_sd = f.value("severity_sd", fx.severity_sd);
      spec.labeled_fixture = fx;
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, where + ": " + e.what());
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Pipeline

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliOptions {
  std::uint64_t seed = 42;
  bool seed_given = false;
  unsigned threads = 0;  ///< 0 = hardware concurrency
  std::string output_dir = ".";
  OutputFormat format = OutputFormat::Csv;

  std::string spec_path;
  std::string dataset;
  std::string metrics_dir;
  std::string dataset_tag;
  std::string variable = "all";
  std::string scenario = "all";
  int rounds = 40;
  double train_fraction = 0.6;
  std::optional<double> threshold1;
  std::optional<double> threshold2;
  bool svg = false;
};

inline RiskVariable parse_risk_variable(std::string_view s) {
  for (auto v : kAllRiskVariables)
    if (to_string(v) == s) return v;
  throw UsageError("unknown variable '" + std::string(s) + "'");
}

inline MisuseScenario parse_scenario(std::string_view s) {
  for (auto sc : kAllScenarios)
    if (to_string(sc) == s) return sc;
  throw UsageError("unknown scenario '" + std::string(s) + "'");
}

class Pipeline {
 public:
  Pipeline(CliOptions opts, std::ostream& out) : o_(std::move(opts)), out_(out) {
    if (o_.threads == 0) o_.threads = std::max(1u, std::thread::hardware_concurrency());
  }

  void simulate() {
    if (o_.spec_path.empty()) throw UsageError("simulate requires --spec");
    auto spec = parse_corpus_spec(read_text_file(o_.spec_path), o_.spec_path);
    if (o_.seed_given) spec.seed = o_.seed;
    const auto records = generate_corpus(spec);
    ensure_output_dir();
    out_ << write_dataset(records, o_.output_dir).string() << '\n';
  }

  void metrics() {
    if (o_.dataset.empty()) throw UsageError("metrics requires --dataset");
    const auto& a = analyses();
    emit("element_metrics" + std::string(extension(o_.format)), element_metrics_table(a, o_.format));
    emit("impact_summaries" + std::string(extension(o_.format)), impact_summary_table(a, o_.format));
  }

  void compare() {
    const auto& a = analyses();
    for (auto pair : {MetricPair::MPSR, MetricPair::MPSxSR})
      for (auto level : {ComparisonLevel::Element, ComparisonLevel::Impact}) {
        const auto samples = paired_samples(a, level, pair);
        const auto rep = scheme_comparison_report(samples, level, pair);
        const std::string base = std::string(to_string(pair)) + "_" + std::string(to_string(level));
        emit("compare_" + base + std::string(extension(o_.format)), comparison_table(rep, o_.format));
        const std::string ba = level == ComparisonLevel::Element ? "bland_altman_" + std::string(to_string(pair))
                                                                 : "bland_altman_p95_" + std::string(to_string(pair));
        emit(ba + ".csv", bland_altman_table(samples));
        if (o_.svg) {
          const auto& pooled = rep.rows[rep.rows.size() - 2].stats;
          const std::string title = std::string(pair == MetricPair::MPSR ? "MPSR" : "MPSxSR") + " scheme 1 vs 2 (" +
                                    std::string(to_string(level)) + " level)";
          emit(ba + ".svg", bland_altman_svg(samples, pooled, title));
        }
      }
  }

  void fit_risk() {
    for (auto v : selected_variables()) emit("risk_" + std::string(to_string(v)) + ".json", risk_json(fit(v)));
  }

  void evaluate() {
    const auto vars = selected_variables();
    std::vector<std::pair<RiskVariable, SplitEvaluation>> evals;
    for (auto v : vars) {
      const auto cohort = labeled_cohort(summaries(), v, tag());
      auto ev = split_evaluation(cohort, o_.rounds, o_.train_fraction, o_.seed, o_.threads);
      const std::string base = "evaluate_" + std::string(to_string(v));
      emit(base + ".json", evaluation_report(v, ev, o_.rounds, o_.train_fraction, o_.seed, OutputFormat::Json));
      if (o_.format == OutputFormat::Csv)
        emit(base + ".csv", evaluation_report(v, ev, o_.rounds, o_.train_fraction, o_.seed, OutputFormat::Csv));
      evals.emplace_back(v, std::move(ev));
    }
    if (evals.size() > 1) emit("evaluate_anova.json", anova_across(evals));
  }

  void misuse() {
    std::vector<MisuseScenario> scenarios;
    if (o_.scenario == "all")
      scenarios.assign(std::begin(kAllScenarios), std::end(kAllScenarios));
    else
      scenarios.push_back(parse_scenario(o_.scenario));
    if ((o_.threshold1 || o_.threshold2) && (scenarios.size() != 1 || !(o_.threshold1 && o_.threshold2)))
      throw UsageError("--threshold1 and --threshold2 must be given together with a single --scenario");

    for (auto sc : scenarios) {
      double t1, t2;
      if (o_.threshold1) {
        t1 = *o_.threshold1;
        t2 = *o_.threshold2;
      } else {
        const bool rate = scenario_pair(sc) == MetricPair::MPSR;
        t1 = fit(rate ? RiskVariable::MPSR1 : RiskVariable::MPSxSR1).threshold50.value;
        t2 = fit(rate ? RiskVariable::MPSR2 : RiskVariable::MPSxSR2).threshold50.value;
      }
      const auto rep = misuse_false_rates(summaries(), sc, t1, t2);
      const std::string base = "misuse_" + std::string(to_string(sc));
      emit(base + ".json", misuse_report(rep, OutputFormat::Json));
      if (o_.format == OutputFormat::Csv) emit(base + ".csv", misuse_report(rep, OutputFormat::Csv));
    }
  }

  /// Everything; risk-based sections are skipped when no impact is labeled.
  void report() {
    if (!o_.dataset.empty()) metrics();
    o_.svg = true;
    compare();
    bool labeled = false;
    for (const auto& s : summaries())
      if (s.injury_label && (o_.dataset_tag.empty() || s.dataset_tag == o_.dataset_tag)) labeled = true;
    if (!labeled) {
      std::cerr << "mpsr: note: no labeled impacts; skipping fit-risk, evaluate and misuse\n";
      return;
    }
    o_.variable = "all";
    o_.scenario = "all";
    fit_risk();
    evaluate();
    misuse();
  }

 private:
  void ensure_output_dir() {
    std::error_code ec;
    std::filesystem::create_directories(o_.output_dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory " + o_.output_dir + ": " + ec.message());
  }

  void emit(const std::string& name, const std::string& text) {
    ensure_output_dir();
    const auto path = std::filesystem::path(o_.output_dir) / name;
    write_text_file(path, text);
    out_ << path.string() << '\n';
  }

  const std::vector<ImpactAnalysis>& analyses() {
    if (!analyses_) {
      if (o_.dataset.empty() == o_.metrics_dir.empty())
        throw UsageError("exactly one of --dataset or --metrics is required");
      if (!o_.dataset.empty()) {
        std::filesystem::path p = o_.dataset;
        if (std::filesystem::is_directory(p)) p /= kManifestName;
        const auto records = read_dataset(p);
        analyses_ = analyze_dataset(records, o_.threads);
      } else {
        analyses_ = read_metric_tables(o_.metrics_dir);
      }
    }
    return *analyses_;
  }

  const std::vector<ImpactSummary>& summaries() {
    if (!summaries_) {
      summaries_.emplace();
      for (const auto& a : analyses()) summaries_->push_back(a.summary);
    }
    return *summaries_;
  }

  std::optional<std::string> tag() const {
    return o_.dataset_tag.empty() ? std::nullopt : std::optional<std::string>(o_.dataset_tag);
  }

  std::vector<RiskVariable> selected_variables() const {
    if (o_.variable == "all") return {std::begin(kAllRiskVariables), std::end(kAllRiskVariables)};
    return {parse_risk_variable(o_.variable)};
  }

  const RiskFit& fit(RiskVariable v) {
    auto it = fits_.find(v);
    if (it == fits_.end()) it = fits_.emplace(v, mpsr::fit_risk(summaries(), v, tag())).first;
    return it->second;
  }

  static std::string anova_across(const std::vector<std::pair<RiskVariable, SplitEvaluation>>& evals) {
    Json j{{"variables", Json::array()}};
    for (const auto& [v, _] : evals) j["variables"].push_back(std::string(to_string(v)));
    const std::pair<const char*, double ClassificationMetrics::*> fields[] = {
        {"accuracy", &ClassificationMetrics::accuracy},
        {"precision", &ClassificationMetrics::precision},
        {"recall", &ClassificationMetrics::recall},
        {"f1", &ClassificationMetrics::f1}};
    for (const auto& [name, member] : fields) {
      std::vector<std::vector<double>> groups;
      for (const auto& [v, ev] : evals) {
        auto& g = groups.emplace_back();
        for (const auto& r : ev.rounds)
          if (r.metrics) g.push_back((*r.metrics).*member);
      }
      try {
        const auto a = one_way_anova(groups);
        j[name] = {{"f_statistic", a.f_statistic},
                   {"df_between", a.df_between},
                   {"df_within", a.df_within},
                   {"p_value", a.p_value},
                   {"significant_at_05", a.p_value < kSignificance}};
      } catch (const Error& e) {
        j[name] = {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
      }
    }
    return j.dump(2) + "\n";
  }

  CliOptions o_;
  std::ostream& out_;
  std::optional<std::vector<ImpactAnalysis>> analyses_;
  std::optional<std::vector<ImpactSummary>> summaries_;
  std::map<RiskVariable, RiskFit> fits_;
};

/// Entry point of the `mpsr` executable.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Strain, strain-rate and injury-risk metrics for brain deformation histories", "mpsr"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions o;
  std::string format = "csv";
  double threshold1 = 0.0, threshold2 = 0.0;
  app.add_option("--seed", o.seed, "Root seed for corpus generation and split rounds")->capture_default_str();
  app.add_option("--threads", o.threads, "Worker threads (0 = all cores); never changes output")->capture_default_str();
  app.add_option("--output-dir", o.output_dir, "Directory for outputs")->capture_default_str();
  app.add_option("--format", format, "Table format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  auto add_input = [&](CLI::App* sub) {
    auto* d = sub->add_option("--dataset", o.dataset, "Dataset manifest (or its directory)");
    auto* m = sub->add_option("--metrics", o.metrics_dir, "Directory holding tables from `metrics`");
    d->excludes(m);
  };
  auto add_tag = [&](CLI::App* sub) {
    sub->add_option("--dataset-tag", o.dataset_tag, "Restrict model fitting to one dataset tag");
  };
  std::vector<std::string> variable_names{"all"};
  for (auto v : kAllRiskVariables) variable_names.emplace_back(to_string(v));
  std::vector<std::string> scenario_names{"all"};
  for (auto s : kAllScenarios) scenario_names.emplace_back(to_string(s));

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corpus from a spec file");
  simulate->add_option("--spec", o.spec_path, "Corpus spec JSON")->required()->check(CLI::ExistingFile);

  auto* metrics = app.add_subcommand("metrics", "Per-element and per-impact metric tables");
  metrics->add_option("--dataset", o.dataset, "Dataset manifest (or its directory)")->required();

  auto* compare = app.add_subcommand("compare", "Scheme 1 vs scheme 2 agreement reports");
  add_input(compare);
  compare->add_flag("--svg", o.svg, "Also write Bland-Altman SVG scatter plots");

  auto* fit = app.add_subcommand("fit-risk", "Logistic risk fit and 50% threshold");
  add_input(fit);
  add_tag(fit);
  fit->add_option("--variable", o.variable, "Predictor")->check(CLI::IsMember(variable_names))->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Repeated stratified train/test rounds");
  add_input(evaluate);
  add_tag(evaluate);
  evaluate->add_option("--variable", o.variable, "Predictor")
      ->check(CLI::IsMember(variable_names))
      ->capture_default_str();
  evaluate->add_option("--rounds", o.rounds, "Number of rounds")->check(CLI::PositiveNumber)->capture_default_str();
  evaluate->add_option("--train-fraction", o.train_fraction, "Training share of each class")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  auto* misuse = app.add_subcommand("misuse", "False classification rates from swapped thresholds");
  add_input(misuse);
  add_tag(misuse);
  misuse->add_option("--scenario", o.scenario, "SN1..SN4 or all")
      ->check(CLI::IsMember(scenario_names))
      ->capture_default_str();
  auto* t1 = misuse->add_option("--threshold1", threshold1, "Scheme-1 threshold override");
  auto* t2 = misuse->add_option("--threshold2", threshold2, "Scheme-2 threshold override");

  auto* report = app.add_subcommand("report", "Run every analysis");
  add_input(report);
  add_tag(report);
  report->add_option("--rounds", o.rounds, "Number of evaluation rounds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  report->add_option("--train-fraction", o.train_fraction, "Training share of each class")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "mpsr: error kind=Usage: " << e.what() << '\n';
    return 1;
  }

  o.seed_given = app.count("--seed") > 0;
  o.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  if (t1->count()) o.threshold1 = threshold1;
  if (t2->count()) o.threshold2 = threshold2;

  try {
    Pipeline p(o, out);
    if (simulate->parsed()) p.simulate();
    else if (metrics->parsed()) p.metrics();
    else if (compare->parsed()) p.compare();
    else if (fit->parsed()) p.fit_risk();
    else if (evaluate->parsed()) p.evaluate();
    else if (misuse->parsed()) p.misuse();
    else if (report->parsed()) p.report();
    return 0;
  } catch (const UsageError& e) {
    err << "mpsr: error kind=Usage: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "mpsr: error kind=" << to_string(e.kind()) << ": " << e.what() << '\n';
    return is_numerical(e.kind()) ? 3 : 2;
  } catch (const std::exception& e) {
    err << "mpsr: error kind=Io: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace mpsr
