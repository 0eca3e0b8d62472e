#pragma once

// Driver to trace: the chain of vertical slit atoms with bases sampled from
// the driver, and the trace read off at the tip of each partial chain.

#include <cmath>
#include <optional>
#include <vector>

#include "loewner/conformal.hpp"
#include "loewner/core.hpp"
#include "loewner/errors.hpp"
#include "loewner/inverse.hpp"
#include "loewner/parallel.hpp"

namespace loewner {

struct ForwardOptions {
  /// evaluate at tip_floor and tip_floor / 2 and extrapolate
  bool richardson = true;
  /// split steps where the driver moves fast against sqrt(dt)
  bool adaptive = false;
  /// a step is split while |xi(b) - xi(a)| > adapt_ratio * 2 sqrt(b - a)
  double adapt_ratio = 0.5;
  int adapt_depth = 8;
};

struct ForwardResult {
  SampledPath trace;
  HullChain chain;
};

namespace detail {

inline void adaptive_knots(const DrivingFunction& xi, double a, double b, int depth,
                           const ForwardOptions& opt, std::vector<double>& out) {
  if (depth < opt.adapt_depth &&
      std::abs(xi(b) - xi(a)) > opt.adapt_ratio * 2.0 * std::sqrt(b - a)) {
    double m = 0.5 * (a + b);
    adaptive_knots(xi, a, m, depth + 1, opt, out);
    adaptive_knots(xi, m, b, depth + 1, opt, out);
    return;
  }
  out.push_back(b);
}

/// f_{t_k}(b + i y) for the first k atoms at two heights y1, y2 at once, the
/// last atom done in closed form. `heights` caches 2 sqrt(dt).
inline std::pair<Complex, Complex> tip_pair(std::span<const SlitAtom> atoms,
                                            std::span<const double> heights, std::size_t k,
                                            double y1, double y2) {
  const SlitAtom& last = atoms[k - 1];
  Complex w1(last.base, std::sqrt(4.0 * last.dt + y1 * y1));
  Complex w2(last.base, std::sqrt(4.0 * last.dt + y2 * y2));
  for (std::size_t j = k - 1; j-- > 0;) {
    const double b = atoms[j].base, h = heights[j];
    Complex d1 = w1 - b, d2 = w2 - b;
    w1 = b + upper_sqrt((d1 - h) * (d1 + h), d1.real());
    w2 = b + upper_sqrt((d2 - h) * (d2 + h), d2.real());
  }
  return {w1, w2};
}

}  // namespace detail

/// Evolves `xi` over [0, T] (T its last knot) with n_steps capacity steps.
/// Atom k has base xi at the step midpoint; gamma(t_k) is the chain inverse
/// at base + i tip_floor.
inline ForwardResult evolve(const DrivingFunction& xi, std::size_t n_steps, double tip_floor,
                            const ForwardOptions& opt = {}) {
  if (!(tip_floor > 0.0)) throw DomainError("drive_to_trace: tip_floor must be positive");
  if (n_steps == 0) throw DomainError("drive_to_trace: need at least one step");
  const double T = xi.end_time();
  if (!(T > 0.0)) throw DomainError("drive_to_trace: driver has an empty time range");

  std::vector<double> t{0.0};
  for (std::size_t k = 0; k < n_steps; ++k) {
    double a = T * static_cast<double>(k) / static_cast<double>(n_steps);
    double b = k + 1 == n_steps ? T : T * static_cast<double>(k + 1) / static_cast<double>(n_steps);
    if (opt.adaptive)
      detail::adaptive_knots(xi, a, b, 0, opt, t);
    else
      t.push_back(b);
  }

  ForwardResult r;
  r.chain.atoms.reserve(t.size() - 1);
  for (std::size_t k = 0; k + 1 < t.size(); ++k)
    r.chain.atoms.emplace_back(xi(0.5 * (t[k] + t[k + 1])), t[k + 1] - t[k]);

  std::vector<Complex> pts(t.size());
  pts[0] = Complex(xi(0.0), 0.0);
  const auto& atoms = r.chain.atoms;
  std::vector<double> heights(atoms.size());
  for (std::size_t k = 0; k < atoms.size(); ++k) heights[k] = atoms[k].height();
  parallel_for(
      t.size() - 1,
      [&](std::size_t i) {
        auto [g1, g2] = detail::tip_pair(atoms, heights, i + 1, tip_floor, 0.5 * tip_floor);
        pts[i + 1] = opt.richardson ? (4.0 * g2 - g1) / 3.0 : g1;
      },
      16);
  r.trace = SampledPath::from_complex(std::move(t), pts, Parametrisation::capacity);
  return r;
}

inline SampledPath drive_to_trace(const DrivingFunction& xi, std::size_t n_steps,
                                  double tip_floor = 1e-7, const ForwardOptions& opt = {}) {
  return evolve(xi, n_steps, tip_floor, opt).trace;
}

/// Continues gamma1 (on [0, t1]) by gamma2 (on [t1, t2], starting on R):
/// gamma(s) = f_{t1}(gamma2(s) - gamma2(t1) + xi(t1)). xi(t1) defaults to the
/// terminal driver value recovered from gamma1. A gamma2 whose times start
/// elsewhere is shifted to start at t1.
inline SampledPath glue_traces(const SampledPath& gamma1, const SampledPath& gamma2,
                               std::optional<double> xi1_end = std::nullopt,
                               const UnzipOptions& opt = {}) {
  double scale = std::max({detail::path_extent(gamma1), detail::path_extent(gamma2), 1.0});
  Complex start = gamma2[0];
  if (std::abs(start.imag()) > 1e-9 * scale)
    throw DomainError("glue_traces: the second path does not start on the real line");
  HullChain chain;
  double xi1 = gamma1[0].real();
  if (gamma1.size() > 1) {
    UnzipResult r = unzip(gamma1, opt);
    chain = std::move(r.chain);
    xi1 = r.sample_base.back();
  }
  if (xi1_end) xi1 = *xi1_end;

  const double t1 = gamma1.end_time();
  const double shift = t1 - gamma2.start_time();
  std::vector<double> times(gamma1.times().begin(), gamma1.times().end());
  std::vector<Complex> pts = gamma1.complex_points();
  const std::size_t base = pts.size();
  const std::size_t m = gamma2.size() - 1;
  times.resize(base + m);
  pts.resize(base + m);
  parallel_for(
      m,
      [&](std::size_t i) {
        times[base + i] = gamma2.time(i + 1) + shift;
        pts[base + i] =
            detail::inverse_range(chain.atoms, 0, chain.size(), gamma2[i + 1] - start.real() + xi1);
      },
      16);
  Parametrisation tag = gamma1.parametrisation() == Parametrisation::capacity &&
                                gamma2.parametrisation() == Parametrisation::capacity
                            ? Parametrisation::capacity
                            : Parametrisation::arbitrary;
  return SampledPath::from_complex(std::move(times), pts, tag);
}

}  // namespace loewner
