/**
 * @file strain_metrics.hpp
 * @brief Per-element peak metrics: MPS, both strain-rate schemes and the
 *        strain x strain-rate products.
 *
 * Scheme 1 differentiates the maximum-principal-strain trace in time.
 * Scheme 2 takes the largest eigenvalue of the rate-of-deformation tensor.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpsr/differentiation.hpp"
#include "mpsr/error.hpp"
#include "mpsr/tensor.hpp"

namespace mpsr {

enum class HistoryMode {
  Kinematic,  ///< deformation gradient F(t)
  FeExport,   ///< Green strain E(t) and rate of deformation D(t), as exported by an FE solver
};

enum class RateScheme { S1, S2 };

/// One element's deformation history on a uniform time grid.
struct ElementHistory {
  std::int64_t element_id = 0;
  HistoryMode mode = HistoryMode::Kinematic;
  double dt = 0.0;
  std::vector<Tensor3> deformation;  // Kinematic
  std::vector<SymTensor3> strain;    // FeExport
  std::vector<SymTensor3> rate;      // FeExport

  static ElementHistory kinematic(std::int64_t id, double dt, std::vector<Tensor3> f) {
    ElementHistory h;
    h.element_id = id;
    h.mode = HistoryMode::Kinematic;
    h.dt = dt;
    h.deformation = std::move(f);
    return h;
  }

  static ElementHistory fe_export(std::int64_t id, double dt, std::vector<SymTensor3> e,
                                  std::vector<SymTensor3> d) {
    ElementHistory h;
    h.element_id = id;
    h.mode = HistoryMode::FeExport;
    h.dt = dt;
    h.strain = std::move(e);
    h.rate = std::move(d);
    return h;
  }

  std::size_t steps() const {
    return mode == HistoryMode::Kinematic ? deformation.size() : strain.size();
  }

  void validate() const {
    const std::string who = "element " + std::to_string(element_id);
    if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorKind::InvalidValue, who + ": dt must be positive");
    if (mode == HistoryMode::Kinematic) {
      if (deformation.size() < kStencilPoints)
        fail(ErrorKind::SeriesTooShort, who + ": fewer than 5 steps");
      for (std::size_t k = 0; k < deformation.size(); ++k) {
        if (!deformation[k].is_finite())
          fail(ErrorKind::InvalidTensor, who + ": non-finite F at step " + std::to_string(k));
        if (!(deformation[k].determinant() > 0.0))
          fail(ErrorKind::SingularDeformation,
               who + ": det(F) <= 0 at step " + std::to_string(k));
      }
    } else {
      if (strain.size() != rate.size())
        fail(ErrorKind::ShapeMismatch, who + ": E and D series differ in length");
      if (strain.size() < kStencilPoints)
        fail(ErrorKind::SeriesTooShort, who + ": fewer than 5 steps");
      for (std::size_t k = 0; k < strain.size(); ++k)
        if (!strain[k].is_finite() || !rate[k].is_finite())
          fail(ErrorKind::InvalidTensor, who + ": non-finite E or D at step " + std::to_string(k));
    }
  }
};

/// Peak-over-time metrics of one element. Strain is dimensionless, rates 1/s.
struct ElementMetrics {
  std::int64_t element_id = 0;
  double mps = 0.0;
  double mpsr1 = 0.0;
  double mpsr2 = 0.0;
  double mps_x_sr1 = 0.0;
  double mps_x_sr2 = 0.0;

  friend bool operator==(const ElementMetrics&, const ElementMetrics&) = default;
};

namespace detail {

inline double peak(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }

inline double peak_product(std::span<const double> a, std::span<const double> b) {
  double best = a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) best = std::max(best, a[i] * b[i]);
  return best;
}

}  // namespace detail

/// lambda_max(E(t)) at every step.
inline ScalarSeries mps_trace(const ElementHistory& h) {
  h.validate();
  ScalarSeries out{std::vector<double>(h.steps()), h.dt};
  for (std::size_t k = 0; k < h.steps(); ++k) {
    const SymTensor3 e =
        h.mode == HistoryMode::Kinematic ? green_strain(h.deformation[k]) : h.strain[k];
    out.values[k] = max_principal(e);
  }
  return out;
}

/// Stencil derivative of the MPS trace: the scheme-1 rate series.
inline ScalarSeries scheme1_rate_trace(const ElementHistory& h) { return fd_derivative(mps_trace(h)); }

/// lambda_max(D(t)) at every step: the scheme-2 rate series.
///
/// In Kinematic mode D = F^-T Edot F^-1 with Edot the stencil derivative of
/// E(t). This equals sym(Fdot F^-1) but stays exactly zero under rigid
/// rotation; differentiating F itself leaks a symmetric part of order
/// w (w dt)^4 at the one-sided boundary rows.
inline ScalarSeries scheme2_rate_trace(const ElementHistory& h) {
  h.validate();
  ScalarSeries out{std::vector<double>(h.steps()), h.dt};
  if (h.mode == HistoryMode::Kinematic) {
    std::vector<Tensor3> strain(h.steps());
    for (std::size_t k = 0; k < h.steps(); ++k) strain[k] = green_strain(h.deformation[k]).to_tensor();
    const auto edot = fd_tensor_derivative(strain, h.dt);
    for (std::size_t k = 0; k < h.steps(); ++k) {
      const SymTensor3 e{edot[k](0, 0), edot[k](1, 1), edot[k](2, 2),
                         edot[k](0, 1), edot[k](0, 2), edot[k](1, 2)};
      out.values[k] = max_principal(rate_of_deformation_from_strain_rate(e, h.deformation[k]));
    }
  } else {
    for (std::size_t k = 0; k < h.steps(); ++k) out.values[k] = max_principal(h.rate[k]);
  }
  return out;
}

inline double element_mps(const ElementHistory& h) { return mps_trace(h).max(); }

/// Peak of d/dt MPS(t). Not clamped: a shrinking element gives a negative value.
inline double element_mpsr1(const ElementHistory& h) { return scheme1_rate_trace(h).max(); }

inline double element_mpsr2(const ElementHistory& h) { return scheme2_rate_trace(h).max(); }

/// Peak over time of lambda_max(E(t)) * r(t) with r the rate series of the
/// given scheme. Instantaneous strain is used, not the running peak.
inline double element_mps_x_sr(const ElementHistory& h, RateScheme scheme) {
  const auto strain = mps_trace(h);
  const auto rate = scheme == RateScheme::S1 ? fd_derivative(strain) : scheme2_rate_trace(h);
  return detail::peak_product(strain.values, rate.values);
}

/// All five metrics in one pass over the history.
inline ElementMetrics compute_element_metrics(const ElementHistory& h) {
  const auto strain = mps_trace(h);
  const auto rate1 = fd_derivative(strain);
  const auto rate2 = scheme2_rate_trace(h);
  ElementMetrics m;
  m.element_id = h.element_id;
  m.mps = detail::peak(strain.values);
  m.mpsr1 = detail::peak(rate1.values);
  m.mpsr2 = detail::peak(rate2.values);
  m.mps_x_sr1 = detail::peak_product(strain.values, rate1.values);
  m.mps_x_sr2 = detail::peak_product(strain.values, rate2.values);
  return m;
}

}  // namespace mpsr
