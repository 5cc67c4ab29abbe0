/**
 * @file stats.hpp
 * @brief Agreement statistics between the two strain-rate schemes: error
 *        summaries, Bland-Altman limits, paired t-test, D'Agostino-Pearson
 *        normality test, one-way ANOVA, and per-dataset comparison tables.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mpsr/aggregation.hpp"
#include "mpsr/error.hpp"

namespace mpsr {

inline constexpr double kSignificance = 0.05;
inline constexpr double kLoaMultiplier = 1.96;
/// References with smaller magnitude are left out of MPE / MAPE.
inline constexpr double kReferenceFloor = 1e-9;

struct ErrorStats {
  double me = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> mpe;   ///< percent; empty when no reference passes the floor
  std::optional<double> mape;  ///< percent
  double sd = 0.0;             ///< sample SD of the differences
  double loa_upper = 0.0;
  double loa_lower = 0.0;
  std::size_t n = 0;
  std::size_t n_excluded = 0;  ///< samples dropped from the percentage means
};

struct TTestResult {
  double t_statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  bool significant_at_05 = false;
};

struct AnovaResult {
  double f_statistic = 0.0;
  int df_between = 0;
  int df_within = 0;
  double p_value = 1.0;
};

struct NormalityResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool normal_at_05 = true;
};

namespace detail {

inline void require_pairs(std::span<const double> a, std::span<const double> b, std::size_t min_n) {
  if (a.size() != b.size())
    fail(ErrorKind::ShapeMismatch, "paired inputs differ in length (" + std::to_string(a.size()) +
                                       " vs " + std::to_string(b.size()) + ")");
  if (a.size() < min_n)
    fail(ErrorKind::SampleTooSmall, "need at least " + std::to_string(min_n) + " pairs");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
      fail(ErrorKind::InvalidValue, "non-finite value at pair " + std::to_string(i));
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(std::span<const double> v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double two_sided_t_p(double t, int df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

}  // namespace detail

/// Differences d = a - b summarised the way the comparison tables report them.
/// Percentage errors use b (scheme 2) as the reference.
inline ErrorStats error_stats(std::span<const double> a, std::span<const double> b) {
  detail::require_pairs(a, b, 2);
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];

  ErrorStats s;
  s.n = n;
  double abs_sum = 0.0, sq_sum = 0.0, pe_sum = 0.0, ape_sum = 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    abs_sum += std::abs(d[i]);
    sq_sum += d[i] * d[i];
    if (std::abs(b[i]) >= kReferenceFloor) {
      pe_sum += 100.0 * d[i] / b[i];
      ape_sum += 100.0 * std::abs(d[i]) / std::abs(b[i]);
      ++valid;
    }
  }
  s.me = detail::mean(d);
  s.mae = abs_sum / static_cast<double>(n);
  s.rmse = std::sqrt(sq_sum / static_cast<double>(n));
  s.n_excluded = n - valid;
  if (valid > 0) {
    s.mpe = pe_sum / static_cast<double>(valid);
    s.mape = ape_sum / static_cast<double>(valid);
  }
  s.sd = detail::sample_sd(d, s.me);
  s.loa_upper = s.me + kLoaMultiplier * s.sd;
  s.loa_lower = s.me - kLoaMultiplier * s.sd;
  return s;
}

struct BlandAltmanPoint {
  double mean = 0.0;
  double difference = 0.0;
};

inline std::vector<BlandAltmanPoint> bland_altman_points(std::span<const double> a,
                                                         std::span<const double> b) {
  detail::require_pairs(a, b, 0);
  std::vector<BlandAltmanPoint> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = {0.5 * (a[i] + b[i]), a[i] - b[i]};
  return out;
}

/// Two-sided paired t-test on d = a - b.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  detail::require_pairs(a, b, 2);
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double m = detail::mean(d);
  const double sd = detail::sample_sd(d, m);
  if (!(sd > 0.0)) fail(ErrorKind::DegenerateDifferences, "paired differences have zero variance");

  TTestResult r;
  r.degrees_of_freedom = static_cast<int>(d.size()) - 1;
  r.t_statistic = m / (sd / std::sqrt(static_cast<double>(d.size())));
  r.p_value = detail::two_sided_t_p(r.t_statistic, r.degrees_of_freedom);
  r.significant_at_05 = r.p_value < kSignificance;
  return r;
}

/// D'Agostino-Pearson K^2 omnibus test (skewness and kurtosis z-scores,
/// chi-square with 2 degrees of freedom).
inline NormalityResult normality_test(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 20) fail(ErrorKind::SampleTooSmall, "normality test needs at least 20 samples");
  for (double v : x)
    if (!std::isfinite(v)) fail(ErrorKind::InvalidValue, "normality test input is non-finite");

  const double m = detail::mean(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double c = v - m;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) fail(ErrorKind::InvalidValue, "normality test input has zero variance");
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);

  // skewness z-score
  const double y = skew * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  const double z_skew = delta * std::asinh(y / alpha);

  // kurtosis z-score (Anscombe-Glynn)
  const double expected = 3.0 * (n - 1.0) / (n + 1.0);
  const double var_b2 =
      24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double xk = (kurt - expected) / std::sqrt(var_b2);
  const double sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                            std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
  const double a = 6.0 + 8.0 / sqrt_beta1 *
                             (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double term1 = 1.0 - 2.0 / (9.0 * a);
  const double denom = 1.0 + xk * std::sqrt(2.0 / (a - 4.0));
  const double term2 = std::copysign(std::cbrt((1.0 - 2.0 / a) / std::abs(denom)), denom);
  const double z_kurt = (term1 - term2) / std::sqrt(2.0 / (9.0 * a));

  NormalityResult r;
  r.statistic = z_skew * z_skew + z_kurt * z_kurt;
  boost::math::chi_squared chi2(2.0);
  r.p_value = std::clamp(boost::math::cdf(boost::math::complement(chi2, r.statistic)), 0.0, 1.0);
  r.normal_at_05 = r.p_value >= kSignificance;
  return r;
}

/// One-way ANOVA over k >= 2 groups of at least two values each.
inline AnovaResult one_way_anova(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) fail(ErrorKind::SampleTooSmall, "ANOVA needs at least two groups");
  std::size_t total = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) fail(ErrorKind::SampleTooSmall, "every ANOVA group needs at least two values");
    for (double v : g) {
      if (!std::isfinite(v)) fail(ErrorKind::InvalidValue, "ANOVA input is non-finite");
      grand += v;
    }
    total += g.size();
  }
  grand /= static_cast<double>(total);

  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& g : groups) {
    const double gm = detail::mean(g);
    ss_between += static_cast<double>(g.size()) * (gm - grand) * (gm - grand);
    for (double v : g) ss_within += (v - gm) * (v - gm);
  }

  AnovaResult r;
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(total - groups.size());
  const double ms_within = ss_within / r.df_within;
  // Relative to the data scale, so constant shifts cannot turn roundoff into a signal.
  double scale = 0.0;
  for (const auto& g : groups)
    for (double v : g) scale = std::max(scale, std::abs(v - grand));
  if (!(ms_within > 1e-28 * (1.0 + scale * scale)))
    fail(ErrorKind::DegenerateGroups, "within-group variance is zero");
  r.f_statistic = (ss_between / r.df_between) / ms_within;
  boost::math::fisher_f dist(r.df_between, r.df_within);
  r.p_value = std::clamp(boost::math::cdf(boost::math::complement(dist, r.f_statistic)), 0.0, 1.0);
  return r;
}

// ---------------------------------------------------------------------------
// Scheme comparison tables

enum class ComparisonLevel { Element, Impact };
enum class MetricPair { MPSR, MPSxSR };

constexpr std::string_view to_string(ComparisonLevel l) {
  return l == ComparisonLevel::Element ? "element" : "impact";
}
constexpr std::string_view to_string(MetricPair p) {
  return p == MetricPair::MPSR ? "mpsr" : "mps_x_sr";
}

struct PairedSample {
  std::string dataset_tag;
  std::string sample_id;
  double scheme1 = 0.0;
  double scheme2 = 0.0;
};

inline constexpr std::string_view kAverageByImpacts = "Average by Impacts";
inline constexpr std::string_view kAverageByDatasets = "Average by Datasets";

struct ComparisonRow {
  std::string label;
  ErrorStats stats;
  std::optional<TTestResult> t_test;  ///< empty for zero-variance differences and the by-datasets row
};

struct ComparisonReport {
  ComparisonLevel level = ComparisonLevel::Element;
  MetricPair pair = MetricPair::MPSR;
  std::vector<ComparisonRow> rows;  ///< datasets sorted by tag, then the two average rows
};

/// Scheme-1 / scheme-2 value pairs at element or impact level.
inline std::vector<PairedSample> paired_samples(std::span<const ImpactAnalysis> analyses,
                                                ComparisonLevel level, MetricPair pair) {
  std::vector<PairedSample> out;
  for (const auto& a : analyses) {
    const auto& s = a.summary;
    if (level == ComparisonLevel::Impact) {
      out.push_back(pair == MetricPair::MPSR
                        ? PairedSample{s.dataset_tag, s.impact_id, s.p95_mpsr1, s.p95_mpsr2}
                        : PairedSample{s.dataset_tag, s.impact_id, s.p95_mps_x_sr1, s.p95_mps_x_sr2});
      continue;
    }
    for (const auto& e : a.elements) {
      const std::string id = s.impact_id + "/" + std::to_string(e.element_id);
      out.push_back(pair == MetricPair::MPSR
                        ? PairedSample{s.dataset_tag, id, e.mpsr1, e.mpsr2}
                        : PairedSample{s.dataset_tag, id, e.mps_x_sr1, e.mps_x_sr2});
    }
  }
  return out;
}

namespace detail {

inline ComparisonRow comparison_row(std::string label, std::span<const PairedSample> samples) {
  std::vector<double> a, b;
  a.reserve(samples.size());
  b.reserve(samples.size());
  for (const auto& s : samples) {
    a.push_back(s.scheme1);
    b.push_back(s.scheme2);
  }
  ComparisonRow row{std::move(label), error_stats(a, b), std::nullopt};
  if (row.stats.sd > 0.0) row.t_test = paired_t_test(a, b);
  return row;
}

}  // namespace detail

/**
 * Per-dataset error statistics plus the two summary rows: "Average by
 * Impacts" pools every sample, "Average by Datasets" is the unweighted mean
 * of each per-dataset statistic.
 */
inline ComparisonReport scheme_comparison_report(std::span<const PairedSample> samples,
                                                 ComparisonLevel level, MetricPair pair) {
  if (samples.empty()) fail(ErrorKind::EmptyCollection, "comparison needs at least one sample");
  std::map<std::string, std::vector<PairedSample>> by_tag;
  for (const auto& s : samples) by_tag[s.dataset_tag].push_back(s);

  ComparisonReport report{level, pair, {}};
  for (const auto& [tag, group] : by_tag) report.rows.push_back(detail::comparison_row(tag, group));

  const std::size_t k = report.rows.size();
  report.rows.push_back(detail::comparison_row(std::string(kAverageByImpacts), samples));

  ComparisonRow avg{std::string(kAverageByDatasets), {}, std::nullopt};
  double mpe = 0.0, mape = 0.0;
  std::size_t with_pct = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& s = report.rows[i].stats;
    avg.stats.me += s.me / k;
    avg.stats.mae += s.mae / k;
    avg.stats.rmse += s.rmse / k;
    avg.stats.sd += s.sd / k;
    avg.stats.loa_upper += s.loa_upper / k;
    avg.stats.loa_lower += s.loa_lower / k;
    avg.stats.n += s.n;
    avg.stats.n_excluded += s.n_excluded;
    if (s.mpe && s.mape) {
      mpe += *s.mpe;
      mape += *s.mape;
      ++with_pct;
    }
  }
  if (with_pct > 0) {
    avg.stats.mpe = mpe / with_pct;
    avg.stats.mape = mape / with_pct;
  }
  report.rows.push_back(std::move(avg));
  return report;
}

}  // namespace mpsr
