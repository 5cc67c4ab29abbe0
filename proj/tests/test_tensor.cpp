#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mpsr/tensor.hpp"
#include "support.hpp"

using namespace mpsr;
using testing_support::brute_force_roots;
using testing_support::char_det;
using testing_support::jacobi_eigenvalues;

TEST(EigSym3, Identity) {
  const auto p = eig_sym3(SymTensor3::identity());
  EXPECT_DOUBLE_EQ(p.first, 1.0);
  EXPECT_DOUBLE_EQ(p.second, 1.0);
  EXPECT_DOUBLE_EQ(p.third, 1.0);
}

TEST(EigSym3, AlreadyDiagonal) {
  const auto p = eig_sym3({3, 1, -2, 0, 0, 0});
  EXPECT_DOUBLE_EQ(p.first, 3.0);
  EXPECT_DOUBLE_EQ(p.second, 1.0);
  EXPECT_DOUBLE_EQ(p.third, -2.0);
}

TEST(EigSym3, ShearGreenStrainMatchesPolynomialRoots) {
  const SymTensor3 m{0, 0.5, 0, 0.5, 0, 0};
  const auto roots = brute_force_roots(m);
  ASSERT_EQ(roots.size(), 3u);
  const auto p = eig_sym3(m);
  EXPECT_NEAR(p.first, roots[0], 1e-12);
  EXPECT_NEAR(p.second, roots[1], 1e-12);
  EXPECT_NEAR(p.third, roots[2], 1e-12);
  EXPECT_NEAR(p.first, 0.809017, 1e-6);
  EXPECT_NEAR(p.third, -0.309017, 1e-6);
}

TEST(EigSym3, RandomTensorsAgreeWithBruteForceRoots) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const SymTensor3 m{u(gen), u(gen), u(gen), u(gen), u(gen), u(gen)};
    const auto roots = brute_force_roots(m);
    if (roots.size() != 3) continue;  // nearly repeated root missed by the scan
    const auto p = eig_sym3(m);
    EXPECT_NEAR(p.first, roots[0], 1e-9);
    EXPECT_NEAR(p.second, roots[1], 1e-9);
    EXPECT_NEAR(p.third, roots[2], 1e-9);
  }
}

TEST(EigSym3, RepeatedRootsOfRotatedDiagonals) {
  // Q diag(d) Q^T has eigenvalues d exactly; the Jacobi oracle covers the same cases.
  const Tensor3 q = rotation_z(0.3) * Tensor3({1, 0, 0, 0, std::cos(0.7), -std::sin(0.7), 0, std::sin(0.7),
                                               std::cos(0.7)});
  const std::array<std::array<double, 3>, 4> cases{{{2, 2, -1}, {3, 3, -1}, {1 + 1e-9, 1, 1}, {5, 5, 5 - 1e-7}}};
  for (const auto& d : cases) {
    const Tensor3 a = q * Tensor3::diag(d[0], d[1], d[2]) * q.transpose();
    const SymTensor3 m{a(0, 0), a(1, 1), a(2, 2), a(0, 1), a(0, 2), a(1, 2)};
    auto want = d;
    std::sort(want.rbegin(), want.rend());
    const auto ref = jacobi_eigenvalues(m);
    const auto p = eig_sym3(m);
    const double tol = 4e-15 * (1 + m.norm());
    EXPECT_NEAR(p.first, want[0], tol);
    EXPECT_NEAR(p.second, want[1], tol);
    EXPECT_NEAR(p.third, want[2], tol);
    EXPECT_NEAR(ref[0], want[0], tol);
  }
}

TEST(EigSym3, OrderingAndTraceProperty) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const SymTensor3 m{u(gen), u(gen), u(gen), u(gen), u(gen), u(gen)};
    const auto p = eig_sym3(m);
    EXPECT_GE(p.first, p.second);
    EXPECT_GE(p.second, p.third);
    EXPECT_NEAR(p.sum(), m.trace(), 1e-9 * (1 + m.norm()));
    const double scale = 1 + std::pow(m.norm(), 3);
    for (double l : {p.first, p.second, p.third}) EXPECT_LE(std::abs(char_det(m, l)), 1e-8 * scale);
  }
}

TEST(EigSym3, RejectsNonFinite) {
  EXPECT_THROW(eig_sym3({NAN, 0, 0, 0, 0, 0}), Error);
  try {
    eig_sym3({0, INFINITY, 0, 0, 0, 0});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidTensor);
  }
}

TEST(GreenStrain, Examples) {
  EXPECT_EQ(green_strain(Tensor3::identity()), SymTensor3{});
  const auto e = green_strain(Tensor3::diag(1.1, 1, 1));
  EXPECT_NEAR(e.s11(), 0.105, 1e-15);
  EXPECT_EQ(e.s22(), 0.0);
  auto f = Tensor3::identity();
  f(0, 1) = 1.0;
  const auto s = green_strain(f);
  EXPECT_DOUBLE_EQ(s.s12(), 0.5);
  EXPECT_DOUBLE_EQ(s.s22(), 0.5);
  EXPECT_EQ(s.s11(), 0.0);
  EXPECT_EQ(s.s33(), 0.0);
}

TEST(GreenStrain, InvariantUnderRigidRotation) {
  const auto f = Tensor3::diag(1.2, 0.9, 1.05);
  const auto e0 = green_strain(f);
  const auto e1 = green_strain(rotation_z(0.8) * f);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(e0.components()[i], e1.components()[i], 1e-15);
}

TEST(VelocityGradient, ZeroRate) {
  EXPECT_EQ(velocity_gradient(Tensor3{}, Tensor3::diag(1.3, 0.8, 1)).norm(), 0.0);
}

TEST(VelocityGradient, RotationGivesSpin) {
  const double w = 4.0, t = 0.3;
  const Tensor3 fdot({-w * std::sin(w * t), -w * std::cos(w * t), 0, w * std::cos(w * t), -w * std::sin(w * t), 0,
                      0, 0, 0});
  const auto l = velocity_gradient(fdot, rotation_z(w * t));
  EXPECT_NEAR(l(0, 1), -w, 1e-12);
  EXPECT_NEAR(l(1, 0), w, 1e-12);
  EXPECT_NEAR(l(0, 0), 0, 1e-12);
  EXPECT_NEAR(l(1, 1), 0, 1e-12);
  EXPECT_NEAR(rate_of_deformation(l).norm(), 0.0, 1e-12);
}

TEST(VelocityGradient, ShearRateOnlyInOneTwoSlot) {
  auto f = Tensor3::identity();
  f(0, 1) = 0.7;
  Tensor3 fdot;
  fdot(0, 1) = 10.0;
  const auto l = velocity_gradient(fdot, f);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(l(i, j), (i == 0 && j == 1) ? 10.0 : 0.0, 1e-14);
  const auto d = rate_of_deformation(l);
  EXPECT_DOUBLE_EQ(d.s12(), 5.0);
  EXPECT_EQ(d.s11(), 0.0);
}

TEST(VelocityGradient, SingularDeformationRejected) {
  try {
    velocity_gradient(Tensor3::identity(), Tensor3::diag(1, 1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularDeformation);
  }
}

TEST(RateOfDeformation, DiagonalAndSkew) {
  const auto d = rate_of_deformation(Tensor3::diag(1, -2, 3));
  EXPECT_EQ(d, (SymTensor3{1, -2, 3, 0, 0, 0}));
  const Tensor3 w({0, -1, 2, 1, 0, -3, -2, 3, 0});
  EXPECT_EQ(rate_of_deformation(w).norm(), 0.0);
}

TEST(RateFromStrainRate, MatchesSymmetrizedVelocityGradient) {
  const Tensor3 f({1.2, 0.3, -0.1, 0.05, 0.9, 0.2, 0.1, -0.15, 1.1});
  const Tensor3 fdot({0.4, -1.0, 0.3, 2.0, 0.1, -0.6, 0.2, 0.7, -0.3});
  const Tensor3 c = fdot.transpose() * f + f.transpose() * fdot;
  const SymTensor3 edot{0.5 * c(0, 0), 0.5 * c(1, 1), 0.5 * c(2, 2), 0.5 * c(0, 1), 0.5 * c(0, 2), 0.5 * c(1, 2)};
  const auto a = rate_of_deformation_from_strain_rate(edot, f);
  const auto b = rate_of_deformation(velocity_gradient(fdot, f));
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(a.components()[i], b.components()[i], 1e-13);
}

TEST(Inverse, MatchesIdentityProduct) {
  const Tensor3 a({2, 0.3, -0.1, 0.2, 1.5, 0.4, 0.0, -0.2, 0.9});
  const auto p = a * inverse(a);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(p(i, j), i == j ? 1.0 : 0.0, 1e-14);
}
