// Shared fixtures and independent oracles for the test suites.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "mpsr/aggregation.hpp"
#include "mpsr/risk.hpp"
#include "mpsr/strain_metrics.hpp"
#include "mpsr/tensor.hpp"

namespace testing_support {

using mpsr::ElementHistory;
using mpsr::SymTensor3;
using mpsr::Tensor3;

/// Samples F(t) at t = k dt for k = 0..steps-1.
inline ElementHistory sampled(const std::function<Tensor3(double)>& f, double dt, std::size_t steps,
                              std::int64_t id = 1) {
  std::vector<Tensor3> fs;
  fs.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) fs.push_back(f(static_cast<double>(k) * dt));
  return ElementHistory::kinematic(id, dt, std::move(fs));
}

/// Steps covering [0, T] inclusive.
inline std::size_t steps_for(double duration, double dt) {
  return static_cast<std::size_t>(std::llround(duration / dt)) + 1;
}

inline ElementHistory uniaxial(double lambda0, double rate, double duration, double dt, std::int64_t id = 1) {
  return sampled([=](double t) { return Tensor3::diag(lambda0 + rate * t, 1.0, 1.0); }, dt,
                 steps_for(duration, dt), id);
}

inline ElementHistory simple_shear(double gamma_rate, double duration, double dt) {
  return sampled(
      [=](double t) {
        auto f = Tensor3::identity();
        f(0, 1) = gamma_rate * t;
        return f;
      },
      dt, steps_for(duration, dt));
}

inline ElementHistory rigid_rotation(double omega, double duration, double dt) {
  return sampled([=](double t) { return mpsr::rotation_z(omega * t); }, dt, steps_for(duration, dt));
}

/// det(M - x I) by explicit cofactor expansion.
inline double char_det(const SymTensor3& m, double x) {
  const double a = m.s11() - x, b = m.s22() - x, c = m.s33() - x;
  const double d = m.s12(), e = m.s13(), f = m.s23();
  return a * (b * c - f * f) - d * (d * c - f * e) + e * (d * f - b * e);
}

/// Roots of det(M - x I) by dense sign-change scanning plus bisection over the
/// Gershgorin interval. Returns descending roots; assumes distinct eigenvalues.
inline std::vector<double> brute_force_roots(const SymTensor3& m, int grid = 20000) {
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i < 3; ++i) {
    double r = 0.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) r += std::abs(m(i, j));
    lo = std::min(lo, m(i, i) - r);
    hi = std::max(hi, m(i, i) + r);
  }
  lo -= 1e-9;
  hi += 1e-9;
  std::vector<double> roots;
  double x0 = lo, p0 = char_det(m, lo);
  for (int k = 1; k <= grid; ++k) {
    const double x1 = lo + (hi - lo) * k / grid, p1 = char_det(m, x1);
    if (p0 == 0.0) roots.push_back(x0);
    else if (p0 * p1 < 0.0) {
      double a = x0, b = x1, pa = p0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b), pm = char_det(m, mid);
        if (pa * pm <= 0.0) b = mid;
        else {
          a = mid;
          pa = pm;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    p0 = p1;
  }
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

/// Cyclic Jacobi eigenvalues (descending), used for repeated-root cases.
inline std::array<double, 3> jacobi_eigenvalues(const SymTensor3& s) {
  double a[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = s(i, j);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-300) break;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - sn * akq;
          a[k][q] = sn * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - sn * aqk;
          a[q][k] = sn * apk + c * aqk;
        }
      }
  }
  std::array<double, 3> ev{a[0][0], a[1][1], a[2][2]};
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

/// Bernoulli deviance written out directly, without the library's stable forms.
inline double deviance(const mpsr::LabeledCohort& c, double b0, double b1) {
  double d = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * c.values[i])));
    d -= 2.0 * std::log(c.labels[i] ? p : 1.0 - p);
  }
  return d;
}

struct GridFit {
  double b0, b1, dev;
};

// Coarse-to-fine grid search of the deviance surface.
inline GridFit grid_search(const mpsr::LabeledCohort& c) {
  GridFit best{0, 0, deviance(c, 0, 0)};
  double c0 = 0, c1 = 0, w0 = 20, w1 = 10;
  for (int level = 0; level < 40; ++level) {
    const int n = 40;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const double b0 = c0 - w0 / 2 + w0 * i / n, b1 = c1 - w1 / 2 + w1 * j / n;
        const double d = deviance(c, b0, b1);
        if (d < best.dev) best = {b0, b1, d};
      }
    c0 = best.b0;
    c1 = best.b1;
    w0 *= 0.25;
    w1 *= 0.25;
  }
  return best;
}

/// Overlapping 8-point cohort.
inline const mpsr::LabeledCohort kEight{{1, 2, 3, 4, 5, 6, 7, 8},
                                        {false, false, true, false, true, false, true, true}};

/// Exact (bitwise) equality of histories and records.
inline bool same_history(const ElementHistory& a, const ElementHistory& b) {
  if (a.element_id != b.element_id || a.mode != b.mode || a.dt != b.dt || a.steps() != b.steps()) return false;
  for (std::size_t k = 0; k < a.deformation.size(); ++k)
    if (!(a.deformation[k] == b.deformation[k])) return false;
  for (std::size_t k = 0; k < a.strain.size(); ++k)
    if (a.strain[k].components() != b.strain[k].components() || a.rate[k].components() != b.rate[k].components())
      return false;
  return true;
}

inline bool same_records(const std::vector<mpsr::ImpactRecord>& a, const std::vector<mpsr::ImpactRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].impact_id != b[i].impact_id || a[i].dataset_tag != b[i].dataset_tag ||
        a[i].injury_label != b[i].injury_label || a[i].elements.size() != b[i].elements.size())
      return false;
    for (std::size_t e = 0; e < a[i].elements.size(); ++e)
      if (!same_history(a[i].elements[e], b[i].elements[e])) return false;
  }
  return true;
}

}  // namespace testing_support
