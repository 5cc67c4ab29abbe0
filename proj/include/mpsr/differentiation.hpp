/**
 * @file differentiation.hpp
 * @brief Five-point finite-difference derivatives of uniformly sampled series.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mpsr/error.hpp"
#include "mpsr/tensor.hpp"

namespace mpsr {

/// Uniformly sampled scalar signal; dt in seconds.
struct ScalarSeries {
  std::vector<double> values;
  double dt = 0.0;

  std::size_t size() const { return values.size(); }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt))
      fail(ErrorKind::InvalidValue, "series timestep must be positive and finite");
    if (values.empty()) fail(ErrorKind::EmptyCollection, "series has no samples");
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }))
      fail(ErrorKind::InvalidValue, "series contains a non-finite sample");
  }

  double max() const { return *std::max_element(values.begin(), values.end()); }
  double min() const { return *std::min_element(values.begin(), values.end()); }
};

inline constexpr std::size_t kStencilPoints = 5;

namespace detail {

// All rows are fourth-order accurate; weights are over 12h.
//   i = 0      : forward   (-25, 48, -36, 16, -3)
//   i = 1      : skewed    (-3, -10, 18, -6, 1) on f[0..4]
//   interior   : central   (1, -8, 0, 8, -1) on f[i-2..i+2]
//   i = n - 2  : mirrored skewed
//   i = n - 1  : mirrored forward
template <typename T, typename Get>
T stencil_at(std::size_t n, std::size_t i, double h, Get&& f) {
  const double inv = 1.0 / (12.0 * h);
  if (i == 0)
    return inv * (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4));
  if (i == 1)
    return inv * (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + 1.0 * f(4));
  if (i == n - 1)
    return inv * (3.0 * f(n - 5) - 16.0 * f(n - 4) + 36.0 * f(n - 3) - 48.0 * f(n - 2) +
                  25.0 * f(n - 1));
  if (i == n - 2)
    return inv * (-1.0 * f(n - 5) + 6.0 * f(n - 4) - 18.0 * f(n - 3) + 10.0 * f(n - 2) +
                  3.0 * f(n - 1));
  return inv * (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2));
}

inline void require_stencil_length(std::size_t n, double dt) {
  if (n < kStencilPoints)
    fail(ErrorKind::SeriesTooShort,
         "five-point stencil needs at least 5 samples, got " + std::to_string(n));
  if (!(dt > 0.0) || !std::isfinite(dt))
    fail(ErrorKind::InvalidValue, "timestep must be positive and finite");
}

}  // namespace detail

/**
 * Time derivative of a sampled series with the five-point stencil.
 *
 * Interior samples use the central formula; the first two and last two use
 * one-sided five-point formulas of the same order, so the output has the
 * same length as the input.
 */
inline ScalarSeries fd_derivative(const ScalarSeries& series) {
  detail::require_stencil_length(series.size(), series.dt);
  series.validate();
  const auto& v = series.values;
  const std::size_t n = v.size();
  ScalarSeries out{std::vector<double>(n), series.dt};
  for (std::size_t i = 0; i < n; ++i)
    out.values[i] = detail::stencil_at<double>(n, i, series.dt, [&](std::size_t k) { return v[k]; });
  return out;
}

/// Componentwise fd_derivative of a tensor series (Fdot from F samples).
inline std::vector<Tensor3> fd_tensor_derivative(std::span<const Tensor3> f_series, double dt) {
  const std::size_t n = f_series.size();
  detail::require_stencil_length(n, dt);
  std::vector<Tensor3> out(n);
  for (int c = 0; c < 9; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i].components()[c] = detail::stencil_at<double>(
          n, i, dt, [&](std::size_t k) { return f_series[k].components()[c]; });
    }
  }
  return out;
}

}  // namespace mpsr
