/**
 * @file tensor.hpp
 * @brief 3x3 tensors and the finite-strain kinematics built on them:
 *        Green-Lagrange strain, velocity gradient, rate of deformation and
 *        the symmetric eigenvalue solver.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "mpsr/error.hpp"

namespace mpsr {

/// General 3x3 tensor, row-major (t11, t12, t13, t21, ..., t33).
class Tensor3 {
 public:
  constexpr Tensor3() = default;
  constexpr explicit Tensor3(const std::array<double, 9>& c) : c_(c) {}

  static constexpr Tensor3 identity() {
    return Tensor3({1, 0, 0, 0, 1, 0, 0, 0, 1});
  }
  static constexpr Tensor3 diag(double a, double b, double c) {
    return Tensor3({a, 0, 0, 0, b, 0, 0, 0, c});
  }

  constexpr double operator()(int i, int j) const { return c_[3 * i + j]; }
  constexpr double& operator()(int i, int j) { return c_[3 * i + j]; }

  constexpr const std::array<double, 9>& components() const { return c_; }
  constexpr std::array<double, 9>& components() { return c_; }

  bool is_finite() const {
    return std::all_of(c_.begin(), c_.end(), [](double v) { return std::isfinite(v); });
  }

  constexpr Tensor3 transpose() const {
    Tensor3 t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t(i, j) = (*this)(j, i);
    return t;
  }

  constexpr double trace() const { return c_[0] + c_[4] + c_[8]; }

  constexpr double determinant() const {
    const auto& t = *this;
    return t(0, 0) * (t(1, 1) * t(2, 2) - t(1, 2) * t(2, 1)) -
           t(0, 1) * (t(1, 0) * t(2, 2) - t(1, 2) * t(2, 0)) +
           t(0, 2) * (t(1, 0) * t(2, 1) - t(1, 1) * t(2, 0));
  }

  double norm() const {
    double s = 0.0;
    for (double v : c_) s += v * v;
    return std::sqrt(s);
  }

  friend constexpr Tensor3 operator*(const Tensor3& a, const Tensor3& b) {
    Tensor3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
        r(i, j) = s;
      }
    return r;
  }
  friend constexpr Tensor3 operator+(Tensor3 a, const Tensor3& b) {
    for (int k = 0; k < 9; ++k) a.c_[k] += b.c_[k];
    return a;
  }
  friend constexpr Tensor3 operator-(Tensor3 a, const Tensor3& b) {
    for (int k = 0; k < 9; ++k) a.c_[k] -= b.c_[k];
    return a;
  }
  friend constexpr Tensor3 operator*(double s, Tensor3 a) {
    for (double& v : a.c_) v *= s;
    return a;
  }
  friend constexpr bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::array<double, 9> c_{};
};

/// Symmetric 3x3 tensor holding each off-diagonal once.
/// Storage order: s11, s22, s33, s12, s13, s23.
class SymTensor3 {
 public:
  constexpr SymTensor3() = default;
  constexpr explicit SymTensor3(const std::array<double, 6>& c) : c_(c) {}
  constexpr SymTensor3(double s11, double s22, double s33, double s12, double s13,
                       double s23)
      : c_{s11, s22, s33, s12, s13, s23} {}

  static constexpr SymTensor3 identity() { return {1, 1, 1, 0, 0, 0}; }

  constexpr double operator()(int i, int j) const { return c_[slot(i, j)]; }
  constexpr double& operator()(int i, int j) { return c_[slot(i, j)]; }

  constexpr double s11() const { return c_[0]; }
  constexpr double s22() const { return c_[1]; }
  constexpr double s33() const { return c_[2]; }
  constexpr double s12() const { return c_[3]; }
  constexpr double s13() const { return c_[4]; }
  constexpr double s23() const { return c_[5]; }

  constexpr const std::array<double, 6>& components() const { return c_; }

  bool is_finite() const {
    return std::all_of(c_.begin(), c_.end(), [](double v) { return std::isfinite(v); });
  }

  constexpr double trace() const { return c_[0] + c_[1] + c_[2]; }

  constexpr double determinant() const {
    const auto [a, b, c, d, e, f] = c_;
    // | a d e |
    // | d b f |
    // | e f c |
    return a * (b * c - f * f) - d * (d * c - f * e) + e * (d * f - b * e);
  }

  /// Frobenius norm of the full matrix (off-diagonals counted twice).
  double norm() const {
    const auto [a, b, c, d, e, f] = c_;
    return std::sqrt(a * a + b * b + c * c + 2.0 * (d * d + e * e + f * f));
  }

  constexpr Tensor3 to_tensor() const {
    Tensor3 t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t(i, j) = (*this)(i, j);
    return t;
  }

  friend constexpr bool operator==(const SymTensor3&, const SymTensor3&) = default;

 private:
  static constexpr int slot(int i, int j) {
    if (i == j) return i;
    const int lo = std::min(i, j);
    const int hi = std::max(i, j);
    return lo == 0 ? (hi == 1 ? 3 : 4) : 5;
  }

  std::array<double, 6> c_{};
};

/// Eigenvalues of a symmetric tensor, largest first.
struct PrincipalValues {
  double first = 0.0;
  double second = 0.0;
  double third = 0.0;

  constexpr double max() const { return first; }
  constexpr double sum() const { return first + second + third; }
};

/// det(m - lambda I), the characteristic polynomial up to sign.
constexpr double characteristic_polynomial(const SymTensor3& m, double lambda) {
  SymTensor3 shifted(m.s11() - lambda, m.s22() - lambda, m.s33() - lambda, m.s12(),
                     m.s13(), m.s23());
  return shifted.determinant();
}

namespace detail {

// Cyclic Jacobi sweeps; robust where the trigonometric form loses accuracy
// (two nearly equal roots make acos ill-conditioned).
inline std::array<double, 3> jacobi_eigenvalues(const SymTensor3& m) {
  double a[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = m(i, j);
  for (int sweep = 0; sweep < 50; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    const double diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
    if (off <= 1e-36 * diag || off == 0.0) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double kp = a[k][p], kq = a[k][q];
          a[k][p] = c * kp - s * kq;
          a[k][q] = s * kp + c * kq;
        }
        for (int k = 0; k < 3; ++k) {
          const double pk = a[p][k], qk = a[q][k];
          a[p][k] = c * pk - s * qk;
          a[q][k] = s * pk + c * qk;
        }
      }
  }
  return {a[0][0], a[1][1], a[2][2]};
}

}  // namespace detail

/**
 * All three eigenvalues of a symmetric 3x3 tensor, sorted descending.
 *
 * Closed-form trigonometric solution of the characteristic cubic. When the
 * discriminant is near degenerate (repeated roots) the values come from
 * Jacobi iteration instead.
 */
/// 1 - |r| below which the trigonometric roots are replaced by Jacobi values.
/// The acos error grows like eps / sqrt(1 - |r|), so 1e-6 keeps it near 1e-13 p.
inline constexpr double kNearDegenerate = 1e-6;

inline PrincipalValues eig_sym3(const SymTensor3& m) {
  if (!m.is_finite()) fail(ErrorKind::InvalidTensor, "eig_sym3: non-finite tensor component");

  const double off = m.s12() * m.s12() + m.s13() * m.s13() + m.s23() * m.s23();
  const double q = m.trace() / 3.0;
  const double a = m.s11() - q;
  const double b = m.s22() - q;
  const double c = m.s33() - q;
  const double p2 = a * a + b * b + c * c + 2.0 * off;

  if (p2 == 0.0) return {q, q, q};

  if (off == 0.0) {
    std::array<double, 3> d{m.s11(), m.s22(), m.s33()};
    std::sort(d.begin(), d.end(), std::greater<>());
    return {d[0], d[1], d[2]};
  }

  const double p = std::sqrt(p2 / 6.0);
  const SymTensor3 scaled(a / p, b / p, c / p, m.s12() / p, m.s13() / p, m.s23() / p);
  const double r = std::clamp(scaled.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;

  // |r| -> 1 means two roots coincide and the acos is ill-conditioned.
  if (1.0 - std::abs(r) < kNearDegenerate) {
    auto v = detail::jacobi_eigenvalues(m);
    std::sort(v.begin(), v.end(), std::greater<>());
    return {v[0], v[1], v[2]};
  }

  const double l1 = q + 2.0 * p * std::cos(phi);
  const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double l2 = m.trace() - l1 - l3;

  std::array<double, 3> v{l1, l2, l3};
  std::sort(v.begin(), v.end(), std::greater<>());
  return {v[0], v[1], v[2]};
}

/// Largest eigenvalue of a symmetric tensor.
inline double max_principal(const SymTensor3& m) { return eig_sym3(m).first; }

/// Green-Lagrange strain E = (F^T F - I) / 2.
inline SymTensor3 green_strain(const Tensor3& f) {
  if (!f.is_finite()) fail(ErrorKind::InvalidTensor, "green_strain: non-finite deformation gradient");
  auto cauchy_green = [&](int i, int j) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += f(k, i) * f(k, j);
    return s;
  };
  return {0.5 * (cauchy_green(0, 0) - 1.0), 0.5 * (cauchy_green(1, 1) - 1.0),
          0.5 * (cauchy_green(2, 2) - 1.0), 0.5 * cauchy_green(0, 1),
          0.5 * cauchy_green(0, 2),         0.5 * cauchy_green(1, 2)};
}

/// Determinant floor below which a deformation gradient is treated as corrupt.
inline constexpr double kDetFloor = 1e-12;

/// Inverse via the adjugate. Throws SingularDeformation if det <= kDetFloor.
inline Tensor3 inverse(const Tensor3& t) {
  const double det = t.determinant();
  if (!(det > kDetFloor))
    fail(ErrorKind::SingularDeformation,
         "deformation gradient determinant " + std::to_string(det) + " at or below floor");
  Tensor3 inv;
  inv(0, 0) = (t(1, 1) * t(2, 2) - t(1, 2) * t(2, 1)) / det;
  inv(0, 1) = (t(0, 2) * t(2, 1) - t(0, 1) * t(2, 2)) / det;
  inv(0, 2) = (t(0, 1) * t(1, 2) - t(0, 2) * t(1, 1)) / det;
  inv(1, 0) = (t(1, 2) * t(2, 0) - t(1, 0) * t(2, 2)) / det;
  inv(1, 1) = (t(0, 0) * t(2, 2) - t(0, 2) * t(2, 0)) / det;
  inv(1, 2) = (t(0, 2) * t(1, 0) - t(0, 0) * t(1, 2)) / det;
  inv(2, 0) = (t(1, 0) * t(2, 1) - t(1, 1) * t(2, 0)) / det;
  inv(2, 1) = (t(0, 1) * t(2, 0) - t(0, 0) * t(2, 1)) / det;
  inv(2, 2) = (t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0)) / det;
  return inv;
}

/// Velocity gradient L from Fdot = L F, i.e. L = Fdot F^-1.
inline Tensor3 velocity_gradient(const Tensor3& fdot, const Tensor3& f) {
  if (!fdot.is_finite() || !f.is_finite())
    fail(ErrorKind::InvalidTensor, "velocity_gradient: non-finite input");
  return fdot * inverse(f);
}

/// Rate of deformation D = (L + L^T) / 2.
inline SymTensor3 rate_of_deformation(const Tensor3& l) {
  if (!l.is_finite()) fail(ErrorKind::InvalidTensor, "rate_of_deformation: non-finite input");
  return {l(0, 0),
          l(1, 1),
          l(2, 2),
          0.5 * (l(0, 1) + l(1, 0)),
          0.5 * (l(0, 2) + l(2, 0)),
          0.5 * (l(1, 2) + l(2, 1))};
}

/// D from the Green strain rate: Edot = F^T D F, so D = F^-T Edot F^-1.
inline SymTensor3 rate_of_deformation_from_strain_rate(const SymTensor3& edot, const Tensor3& f) {
  if (!edot.is_finite() || !f.is_finite())
    fail(ErrorKind::InvalidTensor, "rate_of_deformation_from_strain_rate: non-finite input");
  const Tensor3 inv = inverse(f);
  return rate_of_deformation(inv.transpose() * edot.to_tensor() * inv);
}

/// Rotation by angle (radians) about the z axis.
inline Tensor3 rotation_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return Tensor3({c, -s, 0, s, c, 0, 0, 0, 1});
}

}  // namespace mpsr
