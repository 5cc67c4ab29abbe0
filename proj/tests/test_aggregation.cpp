#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mpsr/aggregation.hpp"
#include "support.hpp"

using namespace mpsr;
using namespace testing_support;

TEST(Percentile, Examples) {
  EXPECT_EQ(percentile(std::vector<double>{5}, 0.95), 5.0);
  EXPECT_EQ(percentile(std::vector<double>{7, 7, 7, 7}, 0.95), 7.0);
  std::vector<double> v;
  for (int i = 20; i >= 1; --i) v.push_back(i);
  EXPECT_NEAR(percentile(v, 0.95), 19.05, 1e-12);
  EXPECT_EQ(percentile(v, 0.0), 1.0);
  EXPECT_EQ(percentile(v, 1.0), 20.0);
}

TEST(Percentile, Errors) {
  try {
    percentile(std::vector<double>{}, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCollection);
  }
  try {
    percentile(std::vector<double>{1, 2}, 1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidValue);
  }
  EXPECT_THROW(percentile(std::vector<double>{1, NAN}, 0.5), Error);
}

TEST(Percentile, MonotoneInPAndBounded) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> v(37);
  for (auto& x : v) x = n(gen);
  double prev = -INFINITY;
  for (int i = 0; i <= 100; ++i) {
    const double q = percentile(v, i / 100.0);
    EXPECT_GE(q, prev);
    EXPECT_GE(q, *std::min_element(v.begin(), v.end()));
    EXPECT_LE(q, *std::max_element(v.begin(), v.end()));
    prev = q;
  }
}

TEST(ImpactSummary, RigidRotationElementIsZero) {
  ImpactRecord r{"I1", "T", std::nullopt, {rigid_rotation(20.0, 0.02, 1e-3)}};
  const auto s = impact_summary(r);
  for (double v : {s.p95_mps, s.p95_mpsr1, s.p95_mpsr2, s.p95_mps_x_sr1, s.p95_mps_x_sr2})
    EXPECT_LE(std::abs(v), 1e-10);
}

TEST(ImpactSummary, UniaxialElementsPercentileOfClosedForms) {
  ImpactRecord r{"I1", "T", true, {}};
  for (int i = 1; i <= 20; ++i) r.elements.push_back(uniaxial(1.0, 0.01 * i, 1.0, 1e-2, i));
  const auto s = impact_summary(r);
  const double v19 = (1.19 * 1.19 - 1) / 2, v20 = (1.2 * 1.2 - 1) / 2;
  EXPECT_NEAR(s.p95_mps, v19 + 0.05 * (v20 - v19), 1e-12);
  EXPECT_NEAR(s.p95_mps, 0.2086475, 1e-12);
  EXPECT_EQ(s.injury_label, std::optional<bool>(true));
}

TEST(ImpactSummary, FieldsWithinElementRange) {
  ImpactRecord r{"I1", "T", std::nullopt, {}};
  for (int i = 1; i <= 9; ++i) r.elements.push_back(uniaxial(1.0 + 0.01 * i, 0.2 - 0.03 * i, 0.05, 1e-3, i));
  const auto m = element_metrics(r);
  const auto s = summarize(r, m);
  auto check = [&](double p, double ElementMetrics::*f) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& e : m) {
      lo = std::min(lo, e.*f);
      hi = std::max(hi, e.*f);
    }
    EXPECT_GE(p, lo);
    EXPECT_LE(p, hi);
  };
  check(s.p95_mps, &ElementMetrics::mps);
  check(s.p95_mpsr1, &ElementMetrics::mpsr1);
  check(s.p95_mpsr2, &ElementMetrics::mpsr2);
  check(s.p95_mps_x_sr1, &ElementMetrics::mps_x_sr1);
  check(s.p95_mps_x_sr2, &ElementMetrics::mps_x_sr2);
}

TEST(ImpactRecord, ValidationErrors) {
  ImpactRecord empty{"E", "T", std::nullopt, {}};
  EXPECT_THROW(impact_summary(empty), Error);
  ImpactRecord dup{"D", "T", std::nullopt, {uniaxial(1, 0.1, 0.01, 1e-3, 4), uniaxial(1, 0.2, 0.01, 1e-3, 4)}};
  EXPECT_THROW(impact_summary(dup), Error);
}

namespace {

std::vector<ImpactRecord> small_dataset() {
  std::vector<ImpactRecord> rs;
  for (int i = 0; i < 6; ++i) {
    ImpactRecord r{"IMP-" + std::to_string(5 - i), i % 2 ? "A" : "B", std::nullopt, {}};
    for (int e = 0; e < 5; ++e) r.elements.push_back(uniaxial(1.0, 0.05 + 0.01 * i + 0.02 * e, 0.03, 1e-3, e));
    rs.push_back(std::move(r));
  }
  return rs;
}

}  // namespace

TEST(DatasetSummaries, SortedByIdAndPermutationInvariant) {
  auto rs = small_dataset();
  const auto a = dataset_summaries(rs);
  ASSERT_EQ(a.size(), 6u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end(),
                             [](const auto& x, const auto& y) { return x.impact_id < y.impact_id; }));
  std::reverse(rs.begin(), rs.end());
  std::swap(rs[1], rs[4]);
  EXPECT_EQ(dataset_summaries(rs), a);
}

TEST(DatasetSummaries, OneRecordEqualsImpactSummary) {
  auto rs = small_dataset();
  rs.resize(1);
  const auto a = dataset_summaries(rs);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], impact_summary(rs[0]));
}

TEST(DatasetSummaries, ThreadCountDoesNotChangeResults) {
  const auto rs = small_dataset();
  const auto a = analyze_dataset(rs, 1);
  for (unsigned t : {2u, 3u, 8u}) {
    const auto b = analyze_dataset(rs, t);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].summary, b[i].summary);
      EXPECT_EQ(a[i].elements, b[i].elements);
    }
  }
}

TEST(DatasetSummaries, Errors) {
  try {
    dataset_summaries(std::vector<ImpactRecord>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCollection);
  }
  auto rs = small_dataset();
  rs[1].impact_id = rs[0].impact_id;
  EXPECT_THROW(dataset_summaries(rs), Error);
}
