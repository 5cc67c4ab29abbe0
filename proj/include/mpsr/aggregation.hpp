/**
 * @file aggregation.hpp
 * @brief Whole-brain summaries: the 95th percentile of each per-element
 *        peak metric across the elements of an impact.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mpsr/error.hpp"
#include "mpsr/parallel.hpp"
#include "mpsr/strain_metrics.hpp"

namespace mpsr {

/**
 * Percentile with linear interpolation between closest ranks.
 *
 * For n sorted values x_1..x_n and fraction p, h = (n - 1) p + 1 and the
 * result is x_floor(h) + (h - floor(h)) (x_floor(h)+1 - x_floor(h)).
 */
inline double percentile(std::span<const double> values, double p) {
  if (values.empty()) fail(ErrorKind::EmptyCollection, "percentile of an empty collection");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::InvalidValue, "percentile fraction outside [0, 1]");
  for (double v : values)
    if (!std::isfinite(v)) fail(ErrorKind::InvalidValue, "percentile input contains a non-finite value");

  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const double h = static_cast<double>(x.size() - 1) * p;  // zero-based rank
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= x.size()) return x.back();
  return x[lo] + (h - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

inline constexpr double kSummaryPercentile = 0.95;

/// One head impact: a set of brain elements sharing a time grid.
struct ImpactRecord {
  std::string impact_id;
  std::string dataset_tag;
  std::optional<bool> injury_label;
  std::vector<ElementHistory> elements;

  void validate() const {
    if (elements.empty()) fail(ErrorKind::EmptyCollection, "impact " + impact_id + " has no elements");
    std::set<std::int64_t> ids;
    const double dt = elements.front().dt;
    for (const auto& e : elements) {
      if (!ids.insert(e.element_id).second)
        fail(ErrorKind::InvalidValue,
             "impact " + impact_id + ": duplicate element id " + std::to_string(e.element_id));
      if (e.dt != dt) fail(ErrorKind::InvalidValue, "impact " + impact_id + ": elements disagree on dt");
    }
  }
};

/// 95th-percentile peak metrics of one impact.
struct ImpactSummary {
  std::string impact_id;
  std::string dataset_tag;
  std::optional<bool> injury_label;
  double p95_mps = 0.0;
  double p95_mpsr1 = 0.0;
  double p95_mpsr2 = 0.0;
  double p95_mps_x_sr1 = 0.0;
  double p95_mps_x_sr2 = 0.0;

  friend bool operator==(const ImpactSummary&, const ImpactSummary&) = default;
};

/// Per-element metrics of an impact, in the record's element order.
inline std::vector<ElementMetrics> element_metrics(const ImpactRecord& r, unsigned threads = 1) {
  r.validate();
  std::vector<ElementMetrics> out(r.elements.size());
  parallel_for(r.elements.size(), threads,
               [&](std::size_t i) { out[i] = compute_element_metrics(r.elements[i]); });
  return out;
}

/// Percentile reduction over already computed element metrics.
inline ImpactSummary summarize(const ImpactRecord& r, std::span<const ElementMetrics> metrics) {
  if (metrics.empty()) fail(ErrorKind::EmptyCollection, "impact " + r.impact_id + " has no element metrics");
  auto column = [&](double ElementMetrics::*field) {
    std::vector<double> v;
    v.reserve(metrics.size());
    for (const auto& m : metrics) v.push_back(m.*field);
    return percentile(v, kSummaryPercentile);
  };
  ImpactSummary s;
  s.impact_id = r.impact_id;
  s.dataset_tag = r.dataset_tag;
  s.injury_label = r.injury_label;
  s.p95_mps = column(&ElementMetrics::mps);
  s.p95_mpsr1 = column(&ElementMetrics::mpsr1);
  s.p95_mpsr2 = column(&ElementMetrics::mpsr2);
  s.p95_mps_x_sr1 = column(&ElementMetrics::mps_x_sr1);
  s.p95_mps_x_sr2 = column(&ElementMetrics::mps_x_sr2);
  return s;
}

/// Peaks per element first, then the 95th percentile across elements.
inline ImpactSummary impact_summary(const ImpactRecord& r, unsigned threads = 1) {
  const auto metrics = element_metrics(r, threads);
  return summarize(r, metrics);
}

/// Element metrics and summary for one impact.
struct ImpactAnalysis {
  ImpactSummary summary;
  std::vector<ElementMetrics> elements;
};

inline std::vector<std::size_t> order_by_impact_id(std::span<const ImpactRecord> records) {
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].impact_id < records[b].impact_id;
  });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (records[order[i]].impact_id == records[order[i - 1]].impact_id)
      fail(ErrorKind::InvalidValue, "duplicate impact id " + records[order[i]].impact_id);
  return order;
}

/// Full analysis of every impact, sorted by impact_id. Elements of all impacts
/// are evaluated as one flat parallel loop.
inline std::vector<ImpactAnalysis> analyze_dataset(std::span<const ImpactRecord> records,
                                                   unsigned threads = 1) {
  if (records.empty()) fail(ErrorKind::EmptyCollection, "dataset has no impacts");
  const auto order = order_by_impact_id(records);

  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  std::vector<ImpactAnalysis> out(records.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& r = records[order[k]];
    r.validate();
    out[k].elements.resize(r.elements.size());
    for (std::size_t e = 0; e < r.elements.size(); ++e) jobs.emplace_back(k, e);
  }
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const auto [k, e] = jobs[j];
    out[k].elements[e] = compute_element_metrics(records[order[k]].elements[e]);
  });
  for (std::size_t k = 0; k < order.size(); ++k)
    out[k].summary = summarize(records[order[k]], out[k].elements);
  return out;
}

/// One summary per impact, sorted by impact_id.
inline std::vector<ImpactSummary> dataset_summaries(std::span<const ImpactRecord> records,
                                                    unsigned threads = 1) {
  auto analyses = analyze_dataset(records, threads);
  std::vector<ImpactSummary> out;
  out.reserve(analyses.size());
  for (auto& a : analyses) out.push_back(std::move(a.summary));
  return out;
}

}  // namespace mpsr
