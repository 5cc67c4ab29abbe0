/**
 * @file report.hpp
 * @brief Serialization of metric tables and analysis reports (CSV / JSON),
 *        plus SVG Bland-Altman scatter plots.
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpsr/aggregation.hpp"
#include "mpsr/dataset_io.hpp"
#include "mpsr/error.hpp"
#include "mpsr/risk.hpp"
#include "mpsr/stats.hpp"

namespace mpsr {

enum class OutputFormat { Csv, Json };

constexpr std::string_view extension(OutputFormat f) { return f == OutputFormat::Csv ? ".csv" : ".json"; }

using Json = nlohmann::ordered_json;

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

inline std::string csv_optional(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

// ---------------------------------------------------------------------------
// Metric tables

inline constexpr std::string_view kElementMetricsHeader =
    "impact_id,dataset_tag,element_id,mps,mpsr1,mpsr2,mps_x_sr1,mps_x_sr2";
inline constexpr std::string_view kImpactSummaryHeader =
    "impact_id,dataset_tag,injury_label,p95_mps,p95_mpsr1,p95_mpsr2,p95_mps_x_sr1,p95_mps_x_sr2";

inline std::string label_text(const std::optional<bool>& l) { return l ? (*l ? "true" : "false") : ""; }

inline std::string element_metrics_table(std::span<const ImpactAnalysis> analyses, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    std::string out(kElementMetricsHeader);
    out += '\n';
    for (const auto& a : analyses)
      for (const auto& e : a.elements) {
        out += a.summary.impact_id + ',' + a.summary.dataset_tag + ',' + std::to_string(e.element_id);
        for (double v : {e.mps, e.mpsr1, e.mpsr2, e.mps_x_sr1, e.mps_x_sr2}) out += ',' + format_real(v);
        out += '\n';
      }
    return out;
  }
  Json rows = Json::array();
  for (const auto& a : analyses)
    for (const auto& e : a.elements)
      rows.push_back({{"impact_id", a.summary.impact_id},
                      {"dataset_tag", a.summary.dataset_tag},
                      {"element_id", e.element_id},
                      {"mps", e.mps},
                      {"mpsr1", e.mpsr1},
                      {"mpsr2", e.mpsr2},
                      {"mps_x_sr1", e.mps_x_sr1},
                      {"mps_x_sr2", e.mps_x_sr2}});
  return rows.dump(2) + "\n";
}

inline std::string impact_summary_table(std::span<const ImpactAnalysis> analyses, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    std::string out(kImpactSummaryHeader);
    out += '\n';
    for (const auto& a : analyses) {
      const auto& s = a.summary;
      out += s.impact_id + ',' + s.dataset_tag + ',' + label_text(s.injury_label);
      for (double v : {s.p95_mps, s.p95_mpsr1, s.p95_mpsr2, s.p95_mps_x_sr1, s.p95_mps_x_sr2})
        out += ',' + format_real(v);
      out += '\n';
    }
    return out;
  }
  Json rows = Json::array();
  for (const auto& a : analyses) {
    const auto& s = a.summary;
    rows.push_back({{"impact_id", s.impact_id},
                    {"dataset_tag", s.dataset_tag},
                    {"injury_label", s.injury_label ? Json(*s.injury_label) : Json()},
                    {"p95_mps", s.p95_mps},
                    {"p95_mpsr1", s.p95_mpsr1},
                    {"p95_mpsr2", s.p95_mpsr2},
                    {"p95_mps_x_sr1", s.p95_mps_x_sr1},
                    {"p95_mps_x_sr2", s.p95_mps_x_sr2}});
  }
  return rows.dump(2) + "\n";
}

namespace detail {

inline std::vector<std::vector<std::string>> read_csv_table(const std::filesystem::path& p,
                                                            std::string_view header) {
  const std::string text = read_text_file(p);
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != header)
    fail(ErrorKind::ParseError, p.string() + ":1: expected header '" + std::string(header) + "'");
  const std::size_t cols = split_csv(header).size();
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv(lines[i]);
    if (fields.size() != cols)
      fail(ErrorKind::ParseError, p.string() + ":" + std::to_string(i + 1) + ": expected " + std::to_string(cols) +
                                      " columns");
    rows.emplace_back(fields.begin(), fields.end());
  }
  return rows;
}

}  // namespace detail

/// Rebuilds per-impact analyses from the tables written by the `metrics`
/// command (CSV or JSON, chosen by which files exist in `dir`).
inline std::vector<ImpactAnalysis> read_metric_tables(const std::filesystem::path& dir) {
  std::map<std::string, ImpactAnalysis> by_id;
  const auto csv_summary = dir / "impact_summaries.csv";
  const auto json_summary = dir / "impact_summaries.json";

  if (std::filesystem::exists(csv_summary)) {
    for (const auto& row : detail::read_csv_table(csv_summary, kImpactSummaryHeader)) {
      detail::CsvContext ctx{csv_summary.string(), 0};
      ImpactSummary s;
      s.impact_id = row[0];
      s.dataset_tag = row[1];
      if (row[2] == "true") s.injury_label = true;
      else if (row[2] == "false") s.injury_label = false;
      else if (!row[2].empty()) fail(ErrorKind::ParseError, csv_summary.string() + ": bad injury_label '" + row[2] + "'");
      s.p95_mps = detail::parse_real(row[3], ctx);
      s.p95_mpsr1 = detail::parse_real(row[4], ctx);
      s.p95_mpsr2 = detail::parse_real(row[5], ctx);
      s.p95_mps_x_sr1 = detail::parse_real(row[6], ctx);
      s.p95_mps_x_sr2 = detail::parse_real(row[7], ctx);
      by_id[s.impact_id].summary = s;
    }
    const auto csv_elements = dir / "element_metrics.csv";
    if (std::filesystem::exists(csv_elements))
      for (const auto& row : detail::read_csv_table(csv_elements, kElementMetricsHeader)) {
        detail::CsvContext ctx{csv_elements.string(), 0};
        auto it = by_id.find(row[0]);
        if (it == by_id.end()) fail(ErrorKind::InvalidValue, csv_elements.string() + ": unknown impact " + row[0]);
        ElementMetrics e;
        e.element_id = detail::parse_int(row[2], ctx);
        e.mps = detail::parse_real(row[3], ctx);
        e.mpsr1 = detail::parse_real(row[4], ctx);
        e.mpsr2 = detail::parse_real(row[5], ctx);
        e.mps_x_sr1 = detail::parse_real(row[6], ctx);
        e.mps_x_sr2 = detail::parse_real(row[7], ctx);
        it->second.elements.push_back(e);
      }
  } else if (std::filesystem::exists(json_summary)) {
    try {
      for (const auto& j : nlohmann::json::parse(read_text_file(json_summary))) {
        ImpactSummary s;
        s.impact_id = j.at("impact_id").get<std::string>();
        s.dataset_tag = j.at("dataset_tag").get<std::string>();
        if (!j.at("injury_label").is_null()) s.injury_label = j.at("injury_label").get<bool>();
        s.p95_mps = j.at("p95_mps").get<double>();
        s.p95_mpsr1 = j.at("p95_mpsr1").get<double>();
        s.p95_mpsr2 = j.at("p95_mpsr2").get<double>();
        s.p95_mps_x_sr1 = j.at("p95_mps_x_sr1").get<double>();
        s.p95_mps_x_sr2 = j.at("p95_mps_x_sr2").get<double>();
        by_id[s.impact_id].summary = s;
      }
      const auto json_elements = dir / "element_metrics.json";
      if (std::filesystem::exists(json_elements))
        for (const auto& j : nlohmann::json::parse(read_text_file(json_elements))) {
          auto it = by_id.find(j.at("impact_id").get<std::string>());
          if (it == by_id.end()) fail(ErrorKind::InvalidValue, json_elements.string() + ": unknown impact");
          ElementMetrics e;
          e.element_id = j.at("element_id").get<std::int64_t>();
          e.mps = j.at("mps").get<double>();
          e.mpsr1 = j.at("mpsr1").get<double>();
          e.mpsr2 = j.at("mpsr2").get<double>();
          e.mps_x_sr1 = j.at("mps_x_sr1").get<double>();
          e.mps_x_sr2 = j.at("mps_x_sr2").get<double>();
          it->second.elements.push_back(e);
        }
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorKind::ParseError, dir.string() + ": bad metric table: " + ex.what());
    }
  } else {
    fail(ErrorKind::Io, "no impact_summaries.csv or impact_summaries.json in " + dir.string());
  }

  std::vector<ImpactAnalysis> out;
  for (auto& [id, a] : by_id) out.push_back(std::move(a));
  return out;
}

// ---------------------------------------------------------------------------
// Comparison reports

inline constexpr std::string_view kComparisonHeader =
    "Dataset,ME,MAE,RSME,MPE,MAPE,LoA Upper,LoA Lower,n,n_excluded,t,df,p";

inline std::string comparison_table(const ComparisonReport& rep, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    std::string out(kComparisonHeader);
    out += '\n';
    for (const auto& r : rep.rows) {
      const auto& s = r.stats;
      out += r.label;
      for (double v : {s.me, s.mae, s.rmse}) out += ',' + format_real(v);
      out += ',' + csv_optional(s.mpe) + ',' + csv_optional(s.mape);
      out += ',' + format_real(s.loa_upper) + ',' + format_real(s.loa_lower);
      out += ',' + std::to_string(s.n) + ',' + std::to_string(s.n_excluded);
      if (r.t_test)
        out += ',' + format_real(r.t_test->t_statistic) + ',' + std::to_string(r.t_test->degrees_of_freedom) + ',' +
               format_real(r.t_test->p_value);
      else
        out += ",NA,NA,NA";
      out += '\n';
    }
    return out;
  }
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    const auto& s = r.stats;
    Json row{{"Dataset", r.label},   {"ME", s.me},
             {"MAE", s.mae},         {"RSME", s.rmse},
             {"MPE", optional_json(s.mpe)}, {"MAPE", optional_json(s.mape)},
             {"LoA Upper", s.loa_upper},    {"LoA Lower", s.loa_lower},
             {"n", s.n},             {"n_excluded", s.n_excluded}};
    if (r.t_test)
      row["t_test"] = {{"t", r.t_test->t_statistic},
                       {"df", r.t_test->degrees_of_freedom},
                       {"p", r.t_test->p_value},
                       {"significant_at_05", r.t_test->significant_at_05}};
    else
      row["t_test"] = nullptr;
    rows.push_back(std::move(row));
  }
  Json j{{"pair", std::string(to_string(rep.pair))}, {"level", std::string(to_string(rep.level))}, {"rows", rows}};
  return j.dump(2) + "\n";
}

inline std::string bland_altman_table(std::span<const PairedSample> samples) {
  std::string out = "dataset_tag,sample_id,mean,diff\n";
  for (const auto& s : samples) {
    const double a[] = {s.scheme1};
    const double b[] = {s.scheme2};
    const auto p = bland_altman_points(a, b).front();
    out += s.dataset_tag + ',' + s.sample_id + ',' + format_real(p.mean) + ',' + format_real(p.difference) + '\n';
  }
  return out;
}

namespace detail {

inline std::string fixed(double v, int precision = 3) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Difference-vs-mean scatter with the mean difference and the 1.96 SD limits.
inline std::string bland_altman_svg(std::span<const PairedSample> samples, const ErrorStats& pooled,
                                    std::string_view title) {
  constexpr double w = 640, h = 480, left = 70, right = 20, top = 40, bottom = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = std::min(pooled.loa_lower, 0.0),
         ymax = std::max(pooled.loa_upper, 0.0);
  for (const auto& s : samples) {
    const double m = 0.5 * (s.scheme1 + s.scheme2), d = s.scheme1 - s.scheme2;
    xmin = std::min(xmin, m);
    xmax = std::max(xmax, m);
    ymin = std::min(ymin, d);
    ymax = std::max(ymax, d);
  }
  if (!(xmax > xmin)) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (!(ymax > ymin)) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (w - left - right); };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * (h - top - bottom); };
  using detail::fixed;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         std::string(title) + "</text>\n";
  svg += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(h - bottom) + "\" x2=\"" + fixed(w - right) + "\" y2=\"" +
         fixed(h - bottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top) + "\" x2=\"" + fixed(left) + "\" y2=\"" +
         fixed(h - bottom) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"320\" y=\"470\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">mean of schemes</text>\n";
  svg += "<text x=\"16\" y=\"240\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 240)\">scheme 1 - scheme 2</text>\n";
  for (double x : {xmin, xmax})
    svg += "<text x=\"" + fixed(px(x)) + "\" y=\"" + fixed(h - bottom + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + fixed(x, 3) + "</text>\n";
  for (double y : {ymin, ymax})
    svg += "<text x=\"" + fixed(left - 6) + "\" y=\"" + fixed(py(y) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fixed(y, 3) + "</text>\n";

  for (const auto& s : samples) {
    const double m = 0.5 * (s.scheme1 + s.scheme2), d = s.scheme1 - s.scheme2;
    svg += "<circle cx=\"" + fixed(px(m)) + "\" cy=\"" + fixed(py(d)) + "\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.6\"/>\n";
  }
  auto hline = [&](double y, const char* colour, const char* dash, const std::string& label) {
    svg += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(py(y)) + "\" x2=\"" + fixed(w - right) + "\" y2=\"" +
           fixed(py(y)) + "\" stroke=\"" + colour + "\"" + (dash[0] ? std::string(" stroke-dasharray=\"") + dash + "\"" : "") +
           "/>\n";
    svg += "<text x=\"" + fixed(w - right - 4) + "\" y=\"" + fixed(py(y) - 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" + colour + "\">" + label +
           "</text>\n";
  };
  hline(pooled.me, "#d62728", "", "ME " + fixed(pooled.me, 4));
  hline(pooled.loa_upper, "#7f7f7f", "6 4", "LoA " + fixed(pooled.loa_upper, 4));
  hline(pooled.loa_lower, "#7f7f7f", "6 4", "LoA " + fixed(pooled.loa_lower, 4));
  svg += "</svg>\n";
  return svg;
}

// ---------------------------------------------------------------------------
// Risk, evaluation and misuse reports

inline Json model_json(const LogisticModel& m) {
  return {{"beta0", m.beta0},
          {"beta1", m.beta1},
          {"deviance", m.deviance},
          {"converged", m.converged},
          {"iterations", m.iterations}};
}

struct RiskFit {
  RiskVariable variable = RiskVariable::MPSR1;
  std::optional<std::string> dataset_tag;
  std::size_t n = 0;
  std::size_t positives = 0;
  LogisticModel model;
  LogisticModel null_model;
  RiskThreshold threshold50;
};

inline RiskFit fit_risk(std::span<const ImpactSummary> summaries, RiskVariable v,
                        const std::optional<std::string>& tag) {
  const auto cohort = labeled_cohort(summaries, v, tag);
  if (cohort.size() == 0)
    fail(ErrorKind::EmptyCollection, "no labeled impacts" + (tag ? " with dataset tag " + *tag : std::string()));
  RiskFit fit{v, tag, cohort.size(), cohort.positives(), {}, {}, {}};
  fit.model = fit_logistic(cohort);
  fit.null_model = fit_null_logistic(cohort);
  fit.threshold50 = risk_threshold(fit.model, 0.5);
  return fit;
}

inline std::string risk_json(const RiskFit& f) {
  Json j{{"variable", std::string(to_string(f.variable))},
         {"dataset_tag", f.dataset_tag ? Json(*f.dataset_tag) : Json()},
         {"n", f.n},
         {"positives", f.positives},
         {"beta0", f.model.beta0},
         {"beta1", f.model.beta1},
         {"deviance", f.model.deviance},
         {"null_deviance", f.null_model.deviance},
         {"threshold50", f.threshold50.value},
         {"inverted_direction", f.threshold50.inverted_direction},
         {"converged", f.model.converged},
         {"iterations", f.model.iterations}};
  return j.dump(2) + "\n";
}

inline Json metrics_json(const ClassificationMetrics& m) {
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"precision_undefined", m.precision_undefined},
          {"recall_undefined", m.recall_undefined}};
}

inline std::string evaluation_report(RiskVariable v, const SplitEvaluation& ev, int rounds, double train_fraction,
                                     std::uint64_t seed, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    std::string out = "round,accuracy,precision,recall,f1,threshold,skip_reason\n";
    for (const auto& r : ev.rounds) {
      out += std::to_string(r.round);
      if (r.metrics)
        for (double x : {r.metrics->accuracy, r.metrics->precision, r.metrics->recall, r.metrics->f1})
          out += ',' + format_real(x);
      else
        out += ",NA,NA,NA,NA";
      out += ',' + (r.model ? format_real(r.threshold) : std::string("NA")) + ',' + r.skip_reason + '\n';
    }
    out += "mean";
    if (ev.mean)
      for (double x : {ev.mean->accuracy, ev.mean->precision, ev.mean->recall, ev.mean->f1}) out += ',' + format_real(x);
    else
      out += ",NA,NA,NA,NA";
    out += ",NA,skipped=" + std::to_string(ev.skipped) + '\n';
    return out;
  }
  Json rows = Json::array();
  for (const auto& r : ev.rounds) {
    Json row{{"round", r.round}};
    row["metrics"] = r.metrics ? metrics_json(*r.metrics) : Json();
    row["model"] = r.model ? model_json(*r.model) : Json();
    row["threshold"] = r.model ? Json(r.threshold) : Json();
    row["skip_reason"] = r.skip_reason.empty() ? Json() : Json(r.skip_reason);
    rows.push_back(std::move(row));
  }
  Json j{{"variable", std::string(to_string(v))},
         {"rounds", rounds},
         {"train_fraction", train_fraction},
         {"seed", seed},
         {"skipped", ev.skipped},
         {"mean", ev.mean ? metrics_json(*ev.mean) : Json()},
         {"per_round", rows}};
  return j.dump(2) + "\n";
}

inline std::string misuse_report(const MisuseReport& rep, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    std::string out = "Dataset,n,false_count,false_rate\n";
    std::size_t n = 0, f = 0;
    for (const auto& d : rep.datasets) {
      out += d.dataset_tag + ',' + std::to_string(d.n) + ',' + std::to_string(d.false_count) + ',' +
             format_real(d.rate) + '\n';
      n += d.n;
      f += d.false_count;
    }
    out += std::string(kAverageByImpacts) + ',' + std::to_string(n) + ',' + std::to_string(f) + ',' +
           format_real(rep.by_impacts) + '\n';
    out += std::string(kAverageByDatasets) + ",NA,NA," + format_real(rep.by_datasets) + '\n';
    return out;
  }
  Json datasets = Json::array();
  for (const auto& d : rep.datasets)
    datasets.push_back({{"dataset_tag", d.dataset_tag}, {"n", d.n}, {"false_count", d.false_count}, {"rate", d.rate}});
  Json j{{"scenario", std::string(to_string(rep.scenario))},
         {"pair", std::string(to_string(scenario_pair(rep.scenario)))},
         {"variable", std::string(to_string(scenario_variable(rep.scenario)))},
         {"wrong_threshold", rep.wrong_threshold},
         {"own_threshold", rep.own_threshold},
         {"datasets", datasets},
         {std::string(kAverageByImpacts), rep.by_impacts},
         {std::string(kAverageByDatasets), rep.by_datasets}};
  return j.dump(2) + "\n";
}

}  // namespace mpsr
