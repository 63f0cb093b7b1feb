#pragma once

// Numerical certificates for finite versus infinite mass. A certificate is
// built from a ladder of nested truncated domains whose integrals are
// nondecreasing; the ladder is walked until one of the rules fires.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "pprior/error.hpp"
#include "pprior/quadrature.hpp"

namespace pprior {

enum class MassVerdict { Finite, Infinite, Inconclusive };

constexpr std::string_view to_string(MassVerdict v) {
  switch (v) {
    case MassVerdict::Finite: return "FINITE";
    case MassVerdict::Infinite: return "INFINITE";
    case MassVerdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

struct DivergenceOptions {
  std::size_t min_rungs = 8;
  std::size_t max_rungs = 48;
  /// Geometric rule: successive integrals grow by more than this factor.
  double growth_factor = 1.5;
  /// Increment rule: successive increments shrink by less than this factor
  /// (catches logarithmic growth, whose increments are constant).
  double increment_ratio = 0.95;
  /// Either growth rule must hold this many consecutive rungs.
  std::size_t growth_run = 6;
  /// Convergence: relative step below this for `converge_run` rungs.
  double converge_step = 1e-4;
  std::size_t converge_run = 3;
};

struct Certificate {
  MassVerdict verdict = MassVerdict::Inconclusive;
  double value = 0.0;
  std::vector<double> ladder;
  std::string rule;
};

/// `rung(k)` returns the integral over the k-th nested domain, k = 0, 1, ...
template <class Rung>
Certificate divergence_certificate(Rung&& rung, const DivergenceOptions& opts = {}) {
  if (opts.max_rungs < opts.min_rungs || opts.min_rungs < 8)
    fail(ErrorCode::Domain, "divergence certificate needs a ladder of at least 8 rungs");
  Certificate cert;
  std::size_t geometric = 0, incremental = 0, converging = 0;
  for (std::size_t k = 0; k < opts.max_rungs; ++k) {
    const double value = rung(k);
    cert.ladder.push_back(value);
    if (std::isinf(value) && value > 0) {
      cert.verdict = MassVerdict::Infinite;
      cert.value = value;
      cert.rule = "rung integral infinite";
      return cert;
    }
    if (!std::isfinite(value)) fail(ErrorCode::NonConverged, "divergence certificate: non-finite rung integral");
    if (k == 0) continue;
    const double prev = cert.ladder[k - 1];
    const double step = value - prev;

    const bool still = std::abs(step) <= opts.converge_step * std::abs(value) || (value == 0.0 && prev == 0.0);
    converging = still ? converging + 1 : 0;

    geometric = (prev > 0.0 && value > opts.growth_factor * prev) ? geometric + 1 : 0;

    bool inc_ok = false;
    if (k >= 2) {
      const double prev_step = prev - cert.ladder[k - 2];
      inc_ok = step > 0.0 && prev_step > 0.0 && step >= opts.increment_ratio * prev_step &&
               step > opts.converge_step * std::abs(value);
    }
    incremental = inc_ok ? incremental + 1 : 0;

    if (converging >= opts.converge_run) {
      cert.verdict = MassVerdict::Finite;
      cert.value = value;
      cert.rule = "relative step below " + std::to_string(opts.converge_step) + " for " +
                  std::to_string(opts.converge_run) + " rungs";
      return cert;
    }
    if (geometric >= opts.growth_run) {
      cert.verdict = MassVerdict::Infinite;
      cert.value = std::numeric_limits<double>::infinity();
      cert.rule = "growth ratio above " + std::to_string(opts.growth_factor) + " for " +
                  std::to_string(opts.growth_run) + " rungs";
      return cert;
    }
    if (incremental >= opts.growth_run) {
      cert.verdict = MassVerdict::Infinite;
      cert.value = std::numeric_limits<double>::infinity();
      cert.rule = "non-decaying increments for " + std::to_string(opts.growth_run) + " rungs";
      return cert;
    }
  }
  cert.verdict = MassVerdict::Inconclusive;
  cert.value = cert.ladder.empty() ? 0.0 : cert.ladder.back();
  cert.rule = "no rule fired within " + std::to_string(opts.max_rungs) + " rungs";
  return cert;
}

/// One-dimensional form: integrate `integrand` over each nested axis of the
/// ladder (which must have at least `min_rungs` entries).
template <class F>
Certificate divergence_certificate(F&& integrand, const std::vector<Axis>& ladder, const QuadOptions& quad,
                                   DivergenceOptions opts = {}) {
  if (ladder.size() < opts.min_rungs) fail(ErrorCode::Domain, "divergence certificate needs at least 8 rungs");
  opts.max_rungs = ladder.size();
  return divergence_certificate(
      [&](std::size_t k) {
        return require_converged(integrate_1d(integrand, ladder[k], quad), "divergence ladder rung");
      },
      opts);
}

/// Ladder (start * 2^-k, hi), closing in on a singular lower end at zero.
inline std::vector<Axis> shrinking_lower_ladder(double start, double hi, std::size_t rungs) {
  std::vector<Axis> out;
  for (std::size_t k = 0; k < rungs; ++k) out.push_back(Axis::finite(std::ldexp(start, -static_cast<int>(k)), hi));
  return out;
}

/// Ladder (lo, T * 2^k).
inline std::vector<Axis> expanding_upper_ladder(double lo, double start, std::size_t rungs) {
  std::vector<Axis> out;
  for (std::size_t k = 0; k < rungs; ++k) out.push_back(Axis::finite(lo, std::ldexp(start, static_cast<int>(k))));
  return out;
}

}  // namespace pprior
