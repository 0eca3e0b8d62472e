#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "loewner/loewner.hpp"

namespace fixtures {

using loewner::Complex;
using loewner::DrivingFunction;
using loewner::SampledPath;

inline DrivingFunction zero_driver(double T = 1.0) {
  return DrivingFunction::sample([](double) { return 0.0; }, T, 10);
}

inline DrivingFunction sin_driver(std::size_t n = 10000) {
  return DrivingFunction::sample([](double t) { return std::sin(t); }, 1.0, n);
}

inline DrivingFunction sqrt_driver(std::size_t n = 10000) {
  return DrivingFunction::sample([](double t) { return 0.5 * std::sqrt(t); }, 1.0, n,
                                 loewner::Interpolation::sqrt);
}

/// Gaussian random walk with `knots` steps on [0, 1], scaled so sup |xi| = 1.
inline DrivingFunction random_walk_driver(std::uint64_t seed = 7, std::size_t knots = 1000) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, std::sqrt(1.0 / static_cast<double>(knots)));
  std::vector<double> t(knots + 1), v(knots + 1, 0.0);
  double m = 0.0;
  for (std::size_t k = 1; k <= knots; ++k) {
    t[k] = static_cast<double>(k) / static_cast<double>(knots);
    v[k] = v[k - 1] + step(rng);
    m = std::max(m, std::abs(v[k]));
  }
  if (m > 0.0)
    for (double& x : v) x /= m;
  return DrivingFunction(std::move(t), std::move(v));
}

/// n semicircular arcs of radius 1/2 side by side, each returning to R at
/// the next integer; reparametrised by capacity.
inline SampledPath bouncing_arcs(int n, int per_arc = 500) {
  std::vector<double> t;
  std::vector<Complex> z;
  for (int a = 0; a < n; ++a)
    for (int k = a == 0 ? 0 : 1; k <= per_arc; ++k) {
      double th = std::numbers::pi * k / per_arc;
      t.push_back(a + static_cast<double>(k) / per_arc);
      z.emplace_back(a + 0.5 - 0.5 * std::cos(th), 0.5 * std::sin(th));
    }
  return loewner::reparametrize_by_hcap(SampledPath::from_complex(std::move(t), z));
}

/// Up the imaginary axis to 2i, down towards 1/n + i, then right along
/// Im = 1. For 1/n = 0 the third leg retraces the second.
inline SampledPath retrace_path(double inv_n, int per_leg = 1000) {
  std::vector<double> t;
  std::vector<Complex> z;
  for (int k = 0; k <= 3 * per_leg; ++k) {
    double s = static_cast<double>(k) / per_leg;
    Complex g;
    if (s <= 1.0)
      g = Complex(0.0, 2.0 * s);
    else if (s <= 2.0)
      g = Complex(0.0, 2.0) + (s - 1.0) * Complex(inv_n, -1.0);
    else
      g = Complex(inv_n, 1.0) + (s - 2.0);
    t.push_back(s);
    z.push_back(g);
  }
  return SampledPath::from_complex(std::move(t), z);
}

inline SampledPath polyline(const std::vector<Complex>& v, int per_edge = 200) {
  std::vector<double> t;
  std::vector<Complex> z;
  for (std::size_t s = 0; s + 1 < v.size(); ++s)
    for (int k = s == 0 ? 0 : 1; k <= per_edge; ++k) {
      t.push_back(static_cast<double>(s) + static_cast<double>(k) / per_edge);
      z.push_back(v[s] + (v[s + 1] - v[s]) * (static_cast<double>(k) / per_edge));
    }
  return SampledPath::from_complex(std::move(t), z);
}

inline SampledPath crossing_polyline() {
  return polyline({{0, 0}, {0, 2}, {1, 2}, {1, 1.3}, {-1.05, 1.3}});
}

}  // namespace fixtures
