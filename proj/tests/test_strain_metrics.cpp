#include <gtest/gtest.h>

#include <cmath>

#include "mpsr/motion.hpp"
#include "mpsr/strain_metrics.hpp"
#include "support.hpp"

using namespace mpsr;
using namespace testing_support;

TEST(MpsTrace, UniaxialClosedForm) {
  const auto h = uniaxial(1.0, 0.1, 1.0, 1e-3);
  const auto tr = mps_trace(h);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double l = 1.0 + 0.1 * k * 1e-3;
    EXPECT_NEAR(tr.values[k], (l * l - 1) / 2, 1e-15);
  }
  EXPECT_NEAR(tr.values.back(), 0.105, 1e-12);
}

TEST(MpsTrace, ShearClosedForm) {
  const auto h = simple_shear(1.0, 1.0, 1e-3);
  const auto tr = mps_trace(h);
  for (std::size_t k = 0; k < tr.size(); k += 50) {
    const double g = k * 1e-3;
    EXPECT_NEAR(tr.values[k], (g * g + g * std::sqrt(g * g + 4)) / 4, 1e-14);
  }
  EXPECT_NEAR(element_mps(h), 0.809017, 1e-6);
}

TEST(ElementMetrics, UniaxialClosedForms) {
  const auto m = compute_element_metrics(uniaxial(1.0, 0.1, 1.0, 1e-3));
  EXPECT_LE(rel_err(m.mps, 0.105), 1e-6);
  EXPECT_LE(rel_err(m.mpsr1, 0.11), 1e-6);
  EXPECT_LE(rel_err(m.mpsr2, 0.1), 1e-6);
  EXPECT_LE(rel_err(m.mps_x_sr1, 0.105 * 0.11), 1e-6);
  EXPECT_LE(rel_err(m.mps_x_sr2, 0.105 * 0.1 / 1.1), 1e-6);
}

TEST(ElementMetrics, UniaxialShrinkGivesNegativeRate) {
  const auto h = uniaxial(1.2, -0.1, 1.0, 1e-3);
  const auto tr = scheme1_rate_trace(h);
  for (double v : tr.values) EXPECT_LT(v, 0.0);
  EXPECT_NEAR(element_mpsr1(h), -0.11, 1e-6);
}

TEST(ElementMetrics, SimpleShear) {
  const auto h = simple_shear(10.0, 0.1, 1e-3);
  EXPECT_NEAR(element_mpsr2(h), 5.0, 1e-12);
  const double g = 1.0, r = std::sqrt(g * g + 4);
  const double want = 10.0 * (2 * g + r + g * g / r) / 4;
  EXPECT_LE(rel_err(element_mpsr1(h), want), 1e-6);
  EXPECT_NEAR(element_mpsr1(h), 11.708, 1e-3);
}

TEST(ElementMetrics, RigidRotationAllZero) {
  for (double w : {1.0, 17.0, 55.5, 100.0}) {
    const auto m = compute_element_metrics(rigid_rotation(w, 0.05, 1e-3));
    for (double v : {m.mps, m.mpsr1, m.mpsr2, m.mps_x_sr1, m.mps_x_sr2}) EXPECT_LE(std::abs(v), 1e-10);
  }
}

TEST(ElementMetrics, ZeroDeformationBothProducts) {
  const auto h = sampled([](double) { return Tensor3::identity(); }, 1e-3, 20);
  EXPECT_EQ(element_mps_x_sr(h, RateScheme::S1), 0.0);
  EXPECT_EQ(element_mps_x_sr(h, RateScheme::S2), 0.0);
}

TEST(ElementMetrics, RotatingStretchClosedForm) {
  // F = R(wt) diag(s, 1/s, 1) R(wt)^T with s = 1 + r t.
  const double r = 0.4, w = 30.0, dt = 1e-4, T = 0.05;
  MotionSpec spec;
  spec.family = MotionFamily::RotatingStretch;
  spec.stretch_rate = r;
  spec.angular_velocity = w;
  spec.duration = T;
  spec.dt = dt;
  const auto m = compute_element_metrics(generate_motion(spec));
  const double sT = 1 + r * T;
  EXPECT_LE(rel_err(m.mps, (sT * sT - 1) / 2), 1e-9);
  EXPECT_LE(rel_err(m.mpsr1, r * sT), 1e-8);
  double want2 = -INFINITY;
  for (std::size_t k = 0; k < steps_for(T, dt); ++k) {
    const double s = 1 + r * k * dt, a = r / s, b = w * (s * s - 1 / (s * s)) / 2;
    want2 = std::max(want2, std::sqrt(a * a + b * b));
  }
  EXPECT_LE(rel_err(m.mpsr2, want2), 1e-6);
  EXPECT_GT(m.mpsr2, m.mpsr1);
}

TEST(ElementMetrics, RateSeriesMatchesFdotChainOnSmoothMotion) {
  // Away from fast rotation both discretizations of sym(Fdot F^-1) agree to stencil accuracy.
  MotionSpec spec;
  spec.family = MotionFamily::SmoothRandom;
  spec.random_scale = 0.1;
  spec.seed = 3;
  spec.dt = 1e-4;
  const auto h = generate_motion(spec);
  const auto d = scheme2_rate_trace(h);
  const auto fdot = fd_tensor_derivative(h.deformation, h.dt);
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < h.steps(); ++k) {
    const double v = max_principal(rate_of_deformation(velocity_gradient(fdot[k], h.deformation[k])));
    worst = std::max(worst, std::abs(v - d.values[k]));
    scale = std::max(scale, std::abs(v));
  }
  EXPECT_LE(worst, 1e-6 * scale);
}

TEST(ElementMetrics, FeExportMatchesKinematic) {
  const double dt = 1e-4, rate = 0.3;
  const auto kin = uniaxial(1.0, rate, 0.5, dt);
  std::vector<SymTensor3> e, d;
  for (std::size_t k = 0; k < kin.steps(); ++k) {
    const double l = 1.0 + rate * k * dt;
    e.push_back({(l * l - 1) / 2, 0, 0, 0, 0, 0});
    d.push_back({rate / l, 0, 0, 0, 0, 0});
  }
  const auto a = compute_element_metrics(kin);
  const auto b = compute_element_metrics(ElementHistory::fe_export(1, dt, e, d));
  EXPECT_NEAR(a.mps, b.mps, 1e-6);
  EXPECT_NEAR(a.mpsr1, b.mpsr1, 1e-6);
  EXPECT_NEAR(a.mpsr2, b.mpsr2, 1e-6);
  EXPECT_NEAR(a.mps_x_sr1, b.mps_x_sr1, 1e-6);
  EXPECT_NEAR(a.mps_x_sr2, b.mps_x_sr2, 1e-6);
}

TEST(ElementMetrics, SmallStrainSchemesAgree) {
  const auto m = compute_element_metrics(uniaxial(1.0, 0.01, 1.0, 1e-3));
  EXPECT_LE(std::abs(m.mpsr1 - m.mpsr2) / m.mpsr2, 0.021);
}

TEST(ElementMetrics, ProductsUseInstantaneousPairs) {
  // Strain peaks late, scheme-1 rate peaks early: product peak is below mps * mpsr1.
  const auto h = sampled([](double t) { return Tensor3::diag(1 + 0.2 * std::sin(20 * t), 1, 1); }, 1e-3, 80);
  const auto m = compute_element_metrics(h);
  EXPECT_LT(m.mps_x_sr1, m.mps * m.mpsr1);
  const auto e = mps_trace(h), r = scheme1_rate_trace(h);
  double want = -INFINITY;
  for (std::size_t k = 0; k < e.size(); ++k) want = std::max(want, e.values[k] * r.values[k]);
  EXPECT_EQ(m.mps_x_sr1, want);
}

TEST(ElementHistoryValidation, Rejections) {
  auto h = uniaxial(1.0, 0.1, 0.003, 1e-3);
  ASSERT_EQ(h.steps(), 4u);
  try {
    compute_element_metrics(h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SeriesTooShort);
  }
  auto g = uniaxial(1.0, 0.1, 0.01, 1e-3);
  g.deformation[3] = Tensor3::diag(-1, 1, 1);
  try {
    compute_element_metrics(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularDeformation);
  }
  auto fe = ElementHistory::fe_export(1, 1e-3, std::vector<SymTensor3>(6), std::vector<SymTensor3>(5));
  try {
    compute_element_metrics(fe);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}
