/**
 * @file motion.hpp
 * @brief Synthetic deformation histories and multi-impact corpora.
 *
 * Families (t in seconds, r stretch rate, g shear rate, w angular velocity):
 *   Uniaxial         F = diag(1 + r t, 1, 1)
 *   SimpleShear      F = I + g t e1 (x) e2
 *   RigidRotation    F = Rz(w t)
 *   RotatingStretch  F = Rz(w t) diag(s, 1/s, 1) Rz(w t)^T,  s = 1 + r t
 *   SmoothRandom     F = exp(G(t)), G a smoothed seeded walk of symmetric +
 *                    skew components with G(0) = 0
 *
 * Documented bounds keep det(F) > 0.1 at every step:
 *   |r| T in [-0.85, 2], |g| T <= 5, |w| <= 1e4, random scale in [0, 0.5].
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpsr/aggregation.hpp"
#include "mpsr/error.hpp"
#include "mpsr/random.hpp"
#include "mpsr/strain_metrics.hpp"
#include "mpsr/tensor.hpp"

namespace mpsr {

enum class MotionFamily { Uniaxial, SimpleShear, RigidRotation, RotatingStretch, SmoothRandom };

constexpr std::string_view to_string(MotionFamily f) {
  switch (f) {
    case MotionFamily::Uniaxial: return "Uniaxial";
    case MotionFamily::SimpleShear: return "SimpleShear";
    case MotionFamily::RigidRotation: return "RigidRotation";
    case MotionFamily::RotatingStretch: return "RotatingStretch";
    case MotionFamily::SmoothRandom: return "SmoothRandom";
  }
  return "";
}

inline MotionFamily parse_motion_family(std::string_view s) {
  for (auto f : {MotionFamily::Uniaxial, MotionFamily::SimpleShear, MotionFamily::RigidRotation,
                 MotionFamily::RotatingStretch, MotionFamily::SmoothRandom})
    if (to_string(f) == s) return f;
  fail(ErrorKind::ParameterBounds, "unknown motion family '" + std::string(s) + "'");
}

struct MotionSpec {
  MotionFamily family = MotionFamily::Uniaxial;
  double stretch_rate = 0.0;      ///< 1/s
  double shear_rate = 0.0;        ///< 1/s
  double angular_velocity = 0.0;  ///< rad/s
  double random_scale = 0.0;      ///< peak walk component magnitude (dimensionless)
  std::uint64_t seed = 0;
  double duration = 0.05;  ///< s
  double dt = 1e-3;        ///< s
  std::int64_t element_id = 0;

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(duration / dt)) + 1; }
};

inline constexpr double kMinStretchExtent = -0.85;
inline constexpr double kMaxStretchExtent = 2.0;
inline constexpr double kMaxShearExtent = 5.0;
inline constexpr double kMaxAngularVelocity = 1e4;
inline constexpr double kMaxRandomScale = 0.5;
inline constexpr int kRandomKnots = 6;
/// Cap on |G_ii| so that det F = exp(tr G) >= exp(-2.25) > 0.1.
inline constexpr double kRandomDiagonalCap = 0.75;

inline void validate(const MotionSpec& s) {
  auto bad = [](const std::string& what) { fail(ErrorKind::ParameterBounds, "motion spec: " + what); };
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) bad("dt must be positive");
  if (!(s.duration > 0.0) || !std::isfinite(s.duration)) bad("duration must be positive");
  if (s.steps() < kStencilPoints) bad("duration / dt gives fewer than 5 steps");
  if (s.steps() > 10'000'000) bad("too many steps");
  const double stretch = s.stretch_rate * s.duration;
  const double shear = s.shear_rate * s.duration;
  switch (s.family) {
    case MotionFamily::Uniaxial:
    case MotionFamily::RotatingStretch:
      if (!(stretch >= kMinStretchExtent && stretch <= kMaxStretchExtent))
        bad("stretch_rate * duration outside [-0.85, 2]");
      break;
    case MotionFamily::SimpleShear:
      if (!(std::abs(shear) <= kMaxShearExtent)) bad("|shear_rate * duration| exceeds 5");
      break;
    case MotionFamily::SmoothRandom:
      if (!(s.random_scale >= 0.0 && s.random_scale <= kMaxRandomScale)) bad("random_scale outside [0, 0.5]");
      break;
    case MotionFamily::RigidRotation:
      break;
  }
  if (!(std::abs(s.angular_velocity) <= kMaxAngularVelocity)) bad("|angular_velocity| exceeds 1e4 rad/s");
}

/// Matrix exponential by scaling and squaring with a Taylor core.
inline Tensor3 expm(const Tensor3& a) {
  int squarings = 0;
  double norm = a.norm();
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const Tensor3 x = std::ldexp(1.0, -squarings) * a;
  Tensor3 term = Tensor3::identity();
  Tensor3 sum = Tensor3::identity();
  for (int k = 1; k <= 18; ++k) {
    term = (1.0 / k) * (term * x);
    sum = sum + term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

namespace detail {

inline double smootherstep(double u) { return u * u * u * (u * (6.0 * u - 15.0) + 10.0); }

// Knot values of the walk: 6 symmetric + 3 skew components per knot.
inline std::vector<std::array<double, 9>> random_walk_knots(double scale, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::array<double, 9>> knots(kRandomKnots);
  const double step = scale / std::sqrt(static_cast<double>(kRandomKnots - 1));
  const double cap = std::min(2.0 * scale, kRandomDiagonalCap);
  for (int k = 1; k < kRandomKnots; ++k)
    for (int c = 0; c < 9; ++c) {
      double v = knots[k - 1][c] + step * rng.normal();
      knots[k][c] = std::clamp(v, -cap, cap);
    }
  return knots;
}

inline Tensor3 walk_tensor(const std::array<double, 9>& c) {
  // c[0..2] diagonal, c[3..5] symmetric off-diagonal (12, 13, 23), c[6..8] skew (12, 13, 23)
  return Tensor3({c[0], c[3] + c[6], c[4] + c[7],
                  c[3] - c[6], c[1], c[5] + c[8],
                  c[4] - c[7], c[5] - c[8], c[2]});
}

}  // namespace detail

/// Deformation-gradient history for one element (Kinematic mode).
inline ElementHistory generate_motion(const MotionSpec& s) {
  validate(s);
  const std::size_t n = s.steps();
  std::vector<Tensor3> f(n);

  std::vector<std::array<double, 9>> knots;
  if (s.family == MotionFamily::SmoothRandom) knots = detail::random_walk_knots(s.random_scale, s.seed);

  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * s.dt;
    switch (s.family) {
      case MotionFamily::Uniaxial:
        f[k] = Tensor3::diag(1.0 + s.stretch_rate * t, 1.0, 1.0);
        break;
      case MotionFamily::SimpleShear:
        f[k] = Tensor3::identity();
        f[k](0, 1) = s.shear_rate * t;
        break;
      case MotionFamily::RigidRotation:
        f[k] = rotation_z(s.angular_velocity * t);
        break;
      case MotionFamily::RotatingStretch: {
        const double stretch = 1.0 + s.stretch_rate * t;
        const Tensor3 r = rotation_z(s.angular_velocity * t);
        f[k] = r * Tensor3::diag(stretch, 1.0 - s.stretch_rate * t / stretch, 1.0) * r.transpose();
        break;
      }
      case MotionFamily::SmoothRandom: {
        const double span = s.duration / (kRandomKnots - 1);
        const auto seg = std::min<std::size_t>(static_cast<std::size_t>(t / span), kRandomKnots - 2);
        const double u = detail::smootherstep(std::clamp(t / span - static_cast<double>(seg), 0.0, 1.0));
        std::array<double, 9> g{};
        for (int c = 0; c < 9; ++c) g[c] = (1.0 - u) * knots[seg][c] + u * knots[seg + 1][c];
        f[k] = expm(detail::walk_tensor(g));
        break;
      }
    }
  }
  return ElementHistory::kinematic(s.element_id, s.dt, std::move(f));
}

// ---------------------------------------------------------------------------
// Corpora

struct ParameterRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// `impacts` impacts of one family, each with `elements_per_impact` elements
/// whose parameters are drawn uniformly from the ranges.
struct CorpusGroup {
  std::string dataset_tag;
  MotionFamily family = MotionFamily::Uniaxial;
  int impacts = 0;
  int elements_per_impact = 1;
  ParameterRange stretch_rate;
  ParameterRange shear_rate;
  ParameterRange angular_velocity;
  ParameterRange random_scale;
};

/// Labeled cohort of SmoothRandom impacts. Each impact draws a severity from
/// one of two overlapping normals by label; each element then scales its walk
/// by severity * U(0.6, 1).
struct LabeledFixtureSpec {
  std::string dataset_tag = "NFL";
  int positives = 22;
  int negatives = 31;
  int elements_per_impact = 16;
  double positive_mean = 0.30;
  double negative_mean = 0.22;
  double severity_sd = 0.07;
};

struct CorpusSpec {
  std::uint64_t seed = 42;
  double dt = 1e-3;
  double duration = 0.05;
  std::vector<CorpusGroup> groups;
  std::optional<LabeledFixtureSpec> labeled_fixture;
};

namespace detail {

inline std::string impact_name(const std::string& tag, int index) {
  std::string num = std::to_string(index + 1);
  if (num.size() < 4) num.insert(0, 4 - num.size(), '0');
  return tag + "-" + num;
}

inline double draw(Rng& rng, const ParameterRange& r) { return r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi); }

}  // namespace detail

/// Deterministic corpus; every stream derives from (seed, tag, impact, element).
/// Impacts come out sorted by impact_id.
inline std::vector<ImpactRecord> generate_corpus(const CorpusSpec& spec) {
  std::vector<std::string> tags;
  for (const auto& g : spec.groups) tags.push_back(g.dataset_tag);
  if (spec.labeled_fixture) tags.push_back(spec.labeled_fixture->dataset_tag);
  std::sort(tags.begin(), tags.end());
  if (std::adjacent_find(tags.begin(), tags.end()) != tags.end())
    fail(ErrorKind::ParameterBounds, "corpus dataset tags must be unique");

  std::vector<ImpactRecord> out;
  for (const auto& g : spec.groups) {
    if (g.impacts < 0 || g.elements_per_impact < 1)
      fail(ErrorKind::ParameterBounds, "corpus group " + g.dataset_tag + ": invalid counts");
    for (int i = 0; i < g.impacts; ++i) {
      ImpactRecord r{detail::impact_name(g.dataset_tag, i), g.dataset_tag, std::nullopt, {}};
      for (int e = 0; e < g.elements_per_impact; ++e) {
        const std::uint64_t sub = derive_seed(spec.seed, {hash_string(g.dataset_tag),
                                                          static_cast<std::uint64_t>(i),
                                                          static_cast<std::uint64_t>(e)});
        Rng rng(sub);
        MotionSpec m;
        m.family = g.family;
        m.stretch_rate = detail::draw(rng, g.stretch_rate);
        m.shear_rate = detail::draw(rng, g.shear_rate);
        m.angular_velocity = detail::draw(rng, g.angular_velocity);
        m.random_scale = detail::draw(rng, g.random_scale);
        m.seed = splitmix64(sub);
        m.duration = spec.duration;
        m.dt = spec.dt;
        m.element_id = e + 1;
        r.elements.push_back(generate_motion(m));
      }
      out.push_back(std::move(r));
    }
  }

  if (spec.labeled_fixture) {
    const auto& fx = *spec.labeled_fixture;
    if (fx.positives < 0 || fx.negatives < 0 || fx.elements_per_impact < 1)
      fail(ErrorKind::ParameterBounds, "labeled fixture: invalid counts");
    const int total = fx.positives + fx.negatives;
    for (int i = 0; i < total; ++i) {
      const bool injurious = i < fx.positives;
      const std::uint64_t tag = hash_string(fx.dataset_tag);
      Rng severity_rng(derive_seed(spec.seed, {tag, static_cast<std::uint64_t>(i), 0xFEEDull}));
      const double severity = std::clamp(
          severity_rng.normal(injurious ? fx.positive_mean : fx.negative_mean, fx.severity_sd), 0.02, kMaxRandomScale);
      ImpactRecord r{detail::impact_name(fx.dataset_tag, i), fx.dataset_tag, injurious, {}};
      for (int e = 0; e < fx.elements_per_impact; ++e) {
        const std::uint64_t sub =
            derive_seed(spec.seed, {tag, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(e)});
        Rng rng(sub);
        MotionSpec m;
        m.family = MotionFamily::SmoothRandom;
        m.random_scale = std::min(kMaxRandomScale, severity * rng.uniform(0.6, 1.0));
        m.seed = splitmix64(sub);
        m.duration = spec.duration;
        m.dt = spec.dt;
        m.element_id = e + 1;
        r.elements.push_back(generate_motion(m));
      }
      out.push_back(std::move(r));
    }
  }

  std::sort(out.begin(), out.end(),
            [](const ImpactRecord& a, const ImpactRecord& b) { return a.impact_id < b.impact_id; });
  return out;
}

/// The default 22 injurious / 31 non-injurious labeled fixture on its own.
inline std::vector<ImpactRecord> labeled_fixture_corpus(std::uint64_t seed = 42) {
  CorpusSpec spec;
  spec.seed = seed;
  spec.labeled_fixture = LabeledFixtureSpec{};
  return generate_corpus(spec);
}

}  // namespace mpsr
