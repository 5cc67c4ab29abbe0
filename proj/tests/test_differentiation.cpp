#include <gtest/gtest.h>

#include <cmath>

#include "mpsr/differentiation.hpp"
#include "mpsr/tensor.hpp"

using namespace mpsr;

namespace {

ScalarSeries sample(double (*f)(double), double dt, std::size_t n) {
  ScalarSeries s{{}, dt};
  for (std::size_t k = 0; k < n; ++k) s.values.push_back(f(static_cast<double>(k) * dt));
  return s;
}

double max_error_sin(double dt) {
  const std::size_t n = static_cast<std::size_t>(std::llround(1.0 / dt)) + 1;
  const auto d = fd_derivative(sample([](double t) { return std::sin(3.0 * t); }, dt, n));
  double err = 0.0;
  for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(d.values[k] - 3.0 * std::cos(3.0 * k * dt)));
  return err;
}

}  // namespace

TEST(FdDerivative, ConstantSeries) {
  const auto d = fd_derivative({std::vector<double>(12, 4.2), 0.01});
  for (double v : d.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(FdDerivative, LinearExactEverywhere) {
  const auto d = fd_derivative(sample([](double t) { return 3.0 * t; }, 1e-3, 101));
  ASSERT_EQ(d.size(), 101u);
  for (double v : d.values) EXPECT_NEAR(v, 3.0, 1e-9);
}

TEST(FdDerivative, QuarticExactAtInteriorPoints) {
  const double dt = 1e-3;
  const auto d = fd_derivative(sample([](double t) { return t * t * t * t; }, dt, 1001));
  for (std::size_t k = 2; k + 2 < d.size(); ++k) {
    const double t = k * dt;
    EXPECT_LE(std::abs(d.values[k] - 4 * t * t * t), 1e-12) << "k=" << k;
  }
}

TEST(FdDerivative, QuarticExactAtBoundaryRowsUpToRoundoff) {
  // The one-sided rows are also exact on degree-4 polynomials.
  const double dt = 0.1;
  const auto d = fd_derivative(sample([](double t) { return t * t * t * t - 2 * t * t; }, dt, 7));
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double t = k * dt;
    EXPECT_NEAR(d.values[k], 4 * t * t * t - 4 * t, 1e-12);
  }
}

TEST(FdDerivative, FourthOrderConvergence) {
  const double e1 = max_error_sin(1e-2), e2 = max_error_sin(5e-3);
  EXPECT_GE(e1 / e2, 14.0);
}

TEST(FdDerivative, TimeReversalFlipsSign) {
  auto s = sample([](double t) { return std::exp(t) * std::sin(5 * t); }, 0.01, 40);
  auto r = s;
  std::reverse(r.values.begin(), r.values.end());
  const auto d = fd_derivative(s), dr = fd_derivative(r);
  for (std::size_t k = 0; k < d.size(); ++k) EXPECT_NEAR(d.values[k], -dr.values[d.size() - 1 - k], 1e-10);
}

TEST(FdDerivative, RejectsShortSeries) {
  try {
    fd_derivative({{1, 2, 3, 4}, 0.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SeriesTooShort);
  }
  EXPECT_THROW(fd_derivative({{1, 2, 3, 4, 5}, 0.0}), Error);
  EXPECT_THROW(fd_derivative({{1, 2, NAN, 4, 5}, 0.1}), Error);
}

TEST(FdTensorDerivative, ConstantAndLinear) {
  std::vector<Tensor3> c(8, Tensor3::diag(1.2, 0.9, 1.0));
  for (const auto& d : fd_tensor_derivative(c, 1e-3)) EXPECT_NEAR(d.norm(), 0.0, 1e-9);
  std::vector<Tensor3> lin;
  for (int k = 0; k < 8; ++k) lin.push_back(Tensor3::diag(1 + 2.5 * k * 1e-3, 1, 1));
  for (const auto& d : fd_tensor_derivative(lin, 1e-3)) {
    EXPECT_NEAR(d(0, 0), 2.5, 1e-9);
    EXPECT_NEAR(d(1, 1), 0.0, 1e-12);
  }
}

TEST(FdTensorDerivative, RotationMatchesAnalyticDerivative) {
  const double dt = 1e-4, w = 1.0;
  std::vector<Tensor3> f;
  for (int k = 0; k < 200; ++k) f.push_back(rotation_z(w * k * dt));
  const auto d = fd_tensor_derivative(f, dt);
  for (int k = 0; k < 200; ++k) {
    const double t = k * dt;
    const Tensor3 ref({-w * std::sin(w * t), -w * std::cos(w * t), 0, w * std::cos(w * t), -w * std::sin(w * t), 0,
                       0, 0, 0});
    for (int i = 0; i < 9; ++i) EXPECT_NEAR(d[k].components()[i], ref.components()[i], 1e-10);
  }
}
