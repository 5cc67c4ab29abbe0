/**
 * @file risk.hpp
 * @brief Injury-risk curves: single-predictor logistic regression, 50%-risk
 *        thresholds, repeated stratified split evaluation, and the false
 *        rates caused by applying one scheme's threshold to the other
 *        scheme's values.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpsr/aggregation.hpp"
#include "mpsr/error.hpp"
#include "mpsr/parallel.hpp"
#include "mpsr/random.hpp"
#include "mpsr/stats.hpp"

namespace mpsr {

/// A single predictor with binary outcomes (true = injurious).
struct LabeledCohort {
  std::vector<double> values;
  std::vector<bool> labels;

  std::size_t size() const { return values.size(); }
  std::size_t positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  }
};

struct LogisticModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double deviance = 0.0;
  bool converged = false;
  int iterations = 0;

  double probability(double x) const { return 1.0 / (1.0 + std::exp(-(beta0 + beta1 * x))); }
};

inline constexpr int kMaxIrlsIterations = 100;
inline constexpr double kDevianceTolerance = 1e-10;
/// Standardized coefficients beyond this magnitude are treated as divergence.
inline constexpr double kSeparationBound = 50.0;

namespace detail {

// log(1 + e^x) without overflow.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double bernoulli_deviance(std::span<const double> x, const std::vector<bool>& y, double b0,
                                 double b1) {
  double dev = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double eta = b0 + b1 * x[i];
    dev += softplus(eta) - (y[i] ? eta : 0.0);
  }
  return 2.0 * dev;
}

inline void validate_cohort(const LabeledCohort& c) {
  if (c.values.size() != c.labels.size())
    fail(ErrorKind::ShapeMismatch, "cohort values and labels differ in length");
  if (c.values.empty()) fail(ErrorKind::EmptyCollection, "cohort is empty");
  for (double v : c.values)
    if (!std::isfinite(v)) fail(ErrorKind::InvalidValue, "cohort contains a non-finite value");
  const std::size_t pos = c.positives();
  if (pos == 0 || pos == c.size())
    fail(ErrorKind::SingleClass, "cohort has a single outcome class (" + std::to_string(pos) + " of " +
                                     std::to_string(c.size()) + " injurious)");
}

}  // namespace detail

/// Intercept-only model: beta0 = logit of the positive fraction.
inline LogisticModel fit_null_logistic(const LabeledCohort& c) {
  detail::validate_cohort(c);
  const double n = static_cast<double>(c.size());
  const double k = static_cast<double>(c.positives());
  const double p = k / n;
  LogisticModel m;
  m.beta0 = std::log(p / (1.0 - p));
  m.deviance = -2.0 * (k * std::log(p) + (n - k) * std::log1p(-p));
  m.converged = true;
  return m;
}

/**
 * Maximum-likelihood logistic fit p(x) = 1 / (1 + exp(-(beta0 + beta1 x))).
 *
 * IRLS (Newton) on the standardized predictor with step halving. Stops when
 * the deviance changes by less than 1e-10 or after 100 iterations.
 *
 * Throws SingleClass, SingularDesign (constant predictor), SeparationDetected
 * (classes split by a threshold, or standardized coefficients above 50), and
 * SampleTooSmall (fewer than 4 observations).
 */
inline LogisticModel fit_logistic(const LabeledCohort& c) {
  detail::validate_cohort(c);
  const auto& x = c.values;
  const auto& y = c.labels;
  const std::size_t n = x.size();

  const double mean = detail::mean(x);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  if (!(sd > 1e-12 * (1.0 + std::abs(mean))))
    fail(ErrorKind::SingularDesign, "predictor is constant; slope is not identifiable");

  double max_neg = -INFINITY, min_neg = INFINITY, max_pos = -INFINITY, min_pos = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i]) {
      max_pos = std::max(max_pos, x[i]);
      min_pos = std::min(min_pos, x[i]);
    } else {
      max_neg = std::max(max_neg, x[i]);
      min_neg = std::min(min_neg, x[i]);
    }
  }
  if (max_neg <= min_pos || max_pos <= min_neg)
    fail(ErrorKind::SeparationDetected, "outcome classes are separated by a threshold on the predictor");
  if (n < 4) fail(ErrorKind::SampleTooSmall, "logistic fit needs at least 4 observations");

  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (x[i] - mean) / sd;

  const double k = static_cast<double>(c.positives());
  double a = std::log(k / (static_cast<double>(n) - k));
  double b = 0.0;
  double dev = detail::bernoulli_deviance(z, y, a, b);

  LogisticModel m;
  for (int it = 1; it <= kMaxIrlsIterations; ++it) {
    m.iterations = it;
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = detail::sigmoid(a + b * z[i]);
      const double r = (y[i] ? 1.0 : 0.0) - p;
      const double w = p * (1.0 - p);
      g0 += r;
      g1 += r * z[i];
      h00 += w;
      h01 += w * z[i];
      h11 += w * z[i] * z[i];
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(det > 0.0)) fail(ErrorKind::SeparationDetected, "information matrix became singular");
    double da = (h11 * g0 - h01 * g1) / det;
    double db = (h00 * g1 - h01 * g0) / det;

    double step = 1.0;
    double next = detail::bernoulli_deviance(z, y, a + da, b + db);
    for (int halving = 0; halving < 30 && !(next <= dev); ++halving) {
      step *= 0.5;
      next = detail::bernoulli_deviance(z, y, a + step * da, b + step * db);
    }
    if (!(next <= dev)) {  // no descent possible: already at the optimum to rounding
      m.converged = true;
      break;
    }
    a += step * da;
    b += step * db;
    if (std::abs(a) > kSeparationBound || std::abs(b) > kSeparationBound)
      fail(ErrorKind::SeparationDetected, "standardized coefficients diverge (quasi-complete separation)");
    const double change = dev - next;
    dev = next;
    if (change < kDevianceTolerance) {
      m.converged = true;
      break;
    }
  }

  m.beta1 = b / sd;
  m.beta0 = a - b * mean / sd;
  m.deviance = detail::bernoulli_deviance(x, y, m.beta0, m.beta1);
  return m;
}

struct RiskThreshold {
  double value = 0.0;
  /// beta1 < 0: risk falls as the predictor rises, so ">= threshold" is not injurious.
  bool inverted_direction = false;
};

/// Predictor value where the fitted risk equals `risk`.
inline RiskThreshold risk_threshold(const LogisticModel& m, double risk = 0.5) {
  if (!m.converged) fail(ErrorKind::NotConverged, "risk threshold requested from an unconverged model");
  if (!(risk > 0.0 && risk < 1.0)) fail(ErrorKind::InvalidValue, "risk level must lie in (0, 1)");
  if (m.beta1 == 0.0) fail(ErrorKind::FlatModel, "model slope is zero; no threshold exists");
  const double logit = std::log(risk / (1.0 - risk));
  return {(logit - m.beta0) / m.beta1, m.beta1 < 0.0};
}

/// value >= threshold classifies as injurious.
inline std::vector<bool> classify(std::span<const double> values, double threshold) {
  std::vector<bool> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] >= threshold;
  return out;
}

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  ///< no positive predictions; precision reported as 0
  bool recall_undefined = false;     ///< no positives in truth; recall reported as 0
};

inline ClassificationMetrics classification_metrics(const std::vector<bool>& predicted,
                                                    const std::vector<bool>& truth) {
  if (predicted.size() != truth.size())
    fail(ErrorKind::ShapeMismatch, "predicted and true labels differ in length");
  if (truth.empty()) fail(ErrorKind::EmptyCollection, "no labels to score");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] && truth[i]) ++tp;
    else if (predicted[i]) ++fp;
    else if (truth[i]) ++fn;
    else ++tn;
  }
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(truth.size());
  m.precision_undefined = tp + fp == 0;
  m.recall_undefined = tp + fn == 0;
  if (!m.precision_undefined) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (!m.recall_undefined) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

// ---------------------------------------------------------------------------
// Repeated split evaluation

struct RoundResult {
  int round = 0;
  std::optional<ClassificationMetrics> metrics;  ///< empty when the round was skipped
  std::optional<LogisticModel> model;
  double threshold = 0.0;
  std::string skip_reason;
};

struct SplitEvaluation {
  std::vector<RoundResult> rounds;
  std::optional<ClassificationMetrics> mean;  ///< over completed rounds
  std::size_t skipped = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split for one round. Positives and negatives are shuffled
/// separately (positives first) with the round's sub-seed, and the first
/// round(train_fraction * class size) of each go to training.
inline SplitIndices stratified_split(const LabeledCohort& c, double train_fraction,
                                     std::uint64_t seed, int round) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < c.size(); ++i) (c.labels[i] ? pos : neg).push_back(i);
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(round)}));
  rng.shuffle(std::span(pos));
  rng.shuffle(std::span(neg));
  const auto n_pos = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(pos.size())));
  const auto n_neg = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(neg.size())));
  SplitIndices s;
  s.train.insert(s.train.end(), pos.begin(), pos.begin() + n_pos);
  s.train.insert(s.train.end(), neg.begin(), neg.begin() + n_neg);
  s.test.insert(s.test.end(), pos.begin() + n_pos, pos.end());
  s.test.insert(s.test.end(), neg.begin() + n_neg, neg.end());
  return s;
}

/**
 * For each round: stratified split, fit on the training part, threshold at
 * 50% risk, classify the test part. Rounds whose fit fails numerically are
 * recorded as skipped with the reason, not dropped. Results are identical for
 * any thread count.
 */
inline SplitEvaluation split_evaluation(const LabeledCohort& c, int rounds, double train_fraction,
                                        std::uint64_t seed, unsigned threads = 1) {
  detail::validate_cohort(c);
  if (rounds < 1) fail(ErrorKind::InvalidValue, "split evaluation needs at least one round");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorKind::InvalidValue, "train fraction must lie in (0, 1)");

  SplitEvaluation ev;
  ev.rounds.resize(static_cast<std::size_t>(rounds));
  parallel_for(ev.rounds.size(), threads, [&](std::size_t r) {
    RoundResult& out = ev.rounds[r];
    out.round = static_cast<int>(r);
    const auto split = stratified_split(c, train_fraction, seed, out.round);
    if (split.test.empty()) fail(ErrorKind::InvalidValue, "train fraction leaves an empty test set");
    LabeledCohort train, test;
    for (auto i : split.train) {
      train.values.push_back(c.values[i]);
      train.labels.push_back(c.labels[i]);
    }
    for (auto i : split.test) {
      test.values.push_back(c.values[i]);
      test.labels.push_back(c.labels[i]);
    }
    try {
      const auto model = fit_logistic(train);
      const auto th = risk_threshold(model, 0.5);
      out.model = model;
      out.threshold = th.value;
      if (th.inverted_direction) {
        out.skip_reason = "InvertedRiskDirection";
        return;
      }
      out.metrics = classification_metrics(classify(test.values, th.value), test.labels);
    } catch (const Error& e) {
      if (!is_numerical(e.kind()) && e.kind() != ErrorKind::SampleTooSmall) throw;
      out.skip_reason = std::string(to_string(e.kind()));
    }
  });

  ClassificationMetrics sum;
  std::size_t done = 0;
  for (const auto& r : ev.rounds) {
    if (!r.metrics) {
      ++ev.skipped;
      continue;
    }
    sum.accuracy += r.metrics->accuracy;
    sum.precision += r.metrics->precision;
    sum.recall += r.metrics->recall;
    sum.f1 += r.metrics->f1;
    ++done;
  }
  if (done > 0) {
    const double d = static_cast<double>(done);
    ev.mean = ClassificationMetrics{sum.accuracy / d, sum.precision / d, sum.recall / d, sum.f1 / d};
  }
  return ev;
}

// ---------------------------------------------------------------------------
// Risk variables and cohorts from impact summaries

enum class RiskVariable { MPS, MPSR1, MPSR2, MPSxSR1, MPSxSR2 };

inline constexpr RiskVariable kAllRiskVariables[] = {RiskVariable::MPS, RiskVariable::MPSR1,
                                                     RiskVariable::MPSR2, RiskVariable::MPSxSR1,
                                                     RiskVariable::MPSxSR2};

constexpr std::string_view to_string(RiskVariable v) {
  switch (v) {
    case RiskVariable::MPS: return "p95_mps";
    case RiskVariable::MPSR1: return "p95_mpsr1";
    case RiskVariable::MPSR2: return "p95_mpsr2";
    case RiskVariable::MPSxSR1: return "p95_mps_x_sr1";
    case RiskVariable::MPSxSR2: return "p95_mps_x_sr2";
  }
  return "";
}

inline double value_of(const ImpactSummary& s, RiskVariable v) {
  switch (v) {
    case RiskVariable::MPS: return s.p95_mps;
    case RiskVariable::MPSR1: return s.p95_mpsr1;
    case RiskVariable::MPSR2: return s.p95_mpsr2;
    case RiskVariable::MPSxSR1: return s.p95_mps_x_sr1;
    case RiskVariable::MPSxSR2: return s.p95_mps_x_sr2;
  }
  return 0.0;
}

/// Labeled impacts (optionally restricted to one dataset tag) as a cohort.
inline LabeledCohort labeled_cohort(std::span<const ImpactSummary> summaries, RiskVariable v,
                                    const std::optional<std::string>& dataset_tag = std::nullopt) {
  LabeledCohort c;
  for (const auto& s : summaries) {
    if (!s.injury_label) continue;
    if (dataset_tag && s.dataset_tag != *dataset_tag) continue;
    c.values.push_back(value_of(s, v));
    c.labels.push_back(*s.injury_label);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Threshold misuse

enum class MisuseScenario { SN1, SN2, SN3, SN4 };

inline constexpr MisuseScenario kAllScenarios[] = {MisuseScenario::SN1, MisuseScenario::SN2,
                                                   MisuseScenario::SN3, MisuseScenario::SN4};

constexpr std::string_view to_string(MisuseScenario s) {
  switch (s) {
    case MisuseScenario::SN1: return "SN1";
    case MisuseScenario::SN2: return "SN2";
    case MisuseScenario::SN3: return "SN3";
    case MisuseScenario::SN4: return "SN4";
  }
  return "";
}

/// SN1/SN2 concern the MPSR pair, SN3/SN4 the MPSxSR pair.
constexpr MetricPair scenario_pair(MisuseScenario s) {
  return s == MisuseScenario::SN1 || s == MisuseScenario::SN2 ? MetricPair::MPSR : MetricPair::MPSxSR;
}

/// The variable whose values are (mis)classified: scheme 2 in SN1/SN3, scheme 1 in SN2/SN4.
constexpr RiskVariable scenario_variable(MisuseScenario s) {
  switch (s) {
    case MisuseScenario::SN1: return RiskVariable::MPSR2;
    case MisuseScenario::SN2: return RiskVariable::MPSR1;
    case MisuseScenario::SN3: return RiskVariable::MPSxSR2;
    case MisuseScenario::SN4: return RiskVariable::MPSxSR1;
  }
  return RiskVariable::MPSR2;
}

struct DatasetFalseRate {
  std::string dataset_tag;
  std::size_t n = 0;
  std::size_t false_count = 0;
  double rate = 0.0;
};

struct MisuseReport {
  MisuseScenario scenario = MisuseScenario::SN1;
  double wrong_threshold = 0.0;
  double own_threshold = 0.0;
  std::vector<DatasetFalseRate> datasets;  ///< sorted by tag
  double by_impacts = 0.0;                 ///< pooled over all impacts
  double by_datasets = 0.0;                ///< unweighted mean of per-dataset rates
};

/// A classification is false when value >= wrong disagrees with value >= own.
inline MisuseReport misuse_false_rates(const std::map<std::string, std::vector<double>>& values_by_tag,
                                       double wrong_threshold, double own_threshold,
                                       MisuseScenario scenario = MisuseScenario::SN1) {
  if (!std::isfinite(wrong_threshold) || !std::isfinite(own_threshold))
    fail(ErrorKind::InvalidValue, "misuse thresholds must be finite");
  MisuseReport rep{scenario, wrong_threshold, own_threshold, {}, 0.0, 0.0};
  std::size_t total = 0, total_false = 0;
  for (const auto& [tag, values] : values_by_tag) {
    if (values.empty()) continue;
    DatasetFalseRate d{tag, values.size(), 0, 0.0};
    for (double v : values)
      if ((v >= wrong_threshold) != (v >= own_threshold)) ++d.false_count;
    d.rate = static_cast<double>(d.false_count) / static_cast<double>(d.n);
    total += d.n;
    total_false += d.false_count;
    rep.by_datasets += d.rate;
    rep.datasets.push_back(std::move(d));
  }
  if (rep.datasets.empty()) fail(ErrorKind::EmptyCollection, "misuse analysis needs at least one impact");
  rep.by_impacts = static_cast<double>(total_false) / static_cast<double>(total);
  rep.by_datasets /= static_cast<double>(rep.datasets.size());
  return rep;
}

/**
 * Misuse false rates over impact summaries grouped by dataset tag.
 * `threshold1` / `threshold2` are the scheme-1 / scheme-2 50%-risk thresholds
 * of the scenario's metric pair; the scenario decides which one is "wrong".
 */
inline MisuseReport misuse_false_rates(std::span<const ImpactSummary> summaries, MisuseScenario scenario,
                                       double threshold1, double threshold2) {
  std::map<std::string, std::vector<double>> by_tag;
  const RiskVariable v = scenario_variable(scenario);
  for (const auto& s : summaries) by_tag[s.dataset_tag].push_back(value_of(s, v));
  const bool scheme2_values = scenario == MisuseScenario::SN1 || scenario == MisuseScenario::SN3;
  return scheme2_values ? misuse_false_rates(by_tag, threshold1, threshold2, scenario)
                        : misuse_false_rates(by_tag, threshold2, threshold1, scenario);
}

}  // namespace mpsr
