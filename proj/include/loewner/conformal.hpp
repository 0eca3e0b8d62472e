#pragma once

// Vertical slit maps and their compositions.
//
// The atom with base b and capacity increment dt is the hydrodynamically
// normalised map of H minus the segment [b, b + 2i sqrt(dt)] onto H:
//
//   g(z) = b + sqrt((z - b)^2 + 4 dt),   g^{-1}(w) = b + sqrt((w - b)^2 - 4 dt)
//
// with the branch keeping the image in the closed upper half-plane. Its
// expansion at infinity is z + 2 dt / z + O(z^-3), so hcap = 2 dt.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "loewner/core.hpp"
#include "loewner/errors.hpp"

namespace loewner {

namespace detail {

/// Principal square root without the Annex G special-case overhead.
inline Complex principal_sqrt(Complex u) noexcept {
  double x = u.real(), y = u.imag();
  if (x == 0.0 && y == 0.0) return {0.0, 0.0};
  double r = std::sqrt(x * x + y * y);
  double s = std::sqrt(0.5 * (r + std::abs(x)));
  if (x >= 0.0) return {s, y / (2.0 * s)};
  return {std::abs(y) / (2.0 * s), std::copysign(s, y)};
}

/// Root of u in the closed upper half-plane; on the real axis the sign
/// follows `side`.
inline Complex upper_sqrt(Complex u, double side) noexcept {
  Complex s = principal_sqrt(u);
  if (s.imag() < 0.0) return -s;
  if (s.imag() == 0.0) return {std::copysign(std::abs(s.real()), side), 0.0};
  return s;
}

inline bool on_slit(Complex d, double height) noexcept {
  double tol = 1e-15 * (std::abs(d) + height);
  return std::abs(d.real()) <= tol && d.imag() < height - tol;
}

inline std::string format_point(Complex z) {
  std::ostringstream os;
  os.precision(17);
  os << '(' << z.real() << ", " << z.imag() << ')';
  return os.str();
}

/// Forward slit map on relative coordinate d = z - base. Returns the image
/// relative to base. Throws SwallowedError(index) when d lies on the slit.
inline Complex slit_forward_rel(Complex d, double dt, std::size_t index) {
  double h = 2.0 * std::sqrt(dt);
  if (on_slit(d, h)) {
    if (std::abs(d - Complex(0.0, h)) <= 1e-15 * h) return {0.0, 0.0};
    throw SwallowedError(index, "point " + format_point(d) +
                                    " (relative to base) lies on the slit of atom " +
                                    std::to_string(index));
  }
  Complex u = (d - Complex(0.0, h)) * (d + Complex(0.0, h));
  return upper_sqrt(u, d.real());
}

inline Complex slit_inverse_rel(Complex d, double dt) noexcept {
  double h = 2.0 * std::sqrt(dt);
  Complex u = (d - h) * (d + h);
  return upper_sqrt(u, d.real());
}

/// Applies atoms[first, last) in order. `index_offset` is added to the index
/// reported in a SwallowedError.
inline Complex forward_range(std::span<const SlitAtom> atoms, std::size_t first,
                             std::size_t last, Complex z, std::size_t index_offset = 0) {
  for (std::size_t k = first; k < last; ++k) {
    const SlitAtom& a = atoms[k];
    z = a.base + slit_forward_rel(z - a.base, a.dt, k + index_offset);
  }
  return z;
}

/// Applies the inverses of atoms[first, last) in reverse order.
inline Complex inverse_range(std::span<const SlitAtom> atoms, std::size_t first,
                             std::size_t last, Complex w) noexcept {
  for (std::size_t k = last; k-- > first;) {
    const SlitAtom& a = atoms[k];
    w = a.base + slit_inverse_rel(w - a.base, a.dt);
  }
  return w;
}

/// Radius bound R = max(sqrt(duration), max |base - base_0|); every hull of
/// the chain lies in the disk of radius 4R about the first base.
inline double chain_radius_scale(const HullChain& chain) {
  if (chain.empty()) return 0.0;
  double b0 = chain.atoms.front().base, osc = 0.0;
  for (const auto& a : chain.atoms) osc = std::max(osc, std::abs(a.base - b0));
  return std::max(std::sqrt(chain.duration()), osc);
}

}  // namespace detail

inline HPoint slit_forward(const SlitAtom& atom, HPoint z) {
  return HPoint::clamped(atom.base + detail::slit_forward_rel(z.z() - atom.base, atom.dt, 0));
}

inline HPoint slit_inverse(const SlitAtom& atom, HPoint w) {
  return HPoint::clamped(atom.base + detail::slit_inverse_rel(w.z() - atom.base, atom.dt));
}

/// g_t of the chain: atoms applied first to last.
inline HPoint chain_forward(const HullChain& chain, HPoint z) {
  return HPoint::clamped(detail::forward_range(chain.atoms, 0, chain.size(), z.z()));
}

/// f_t = g_t^{-1}.
inline HPoint chain_inverse(const HullChain& chain, HPoint w) {
  return HPoint::clamped(detail::inverse_range(chain.atoms, 0, chain.size(), w.z()));
}

/// Bound on the diameter of every hull of the chain (8 R, see
/// detail::chain_radius_scale).
inline double chain_diameter_bound(const HullChain& chain) {
  return 8.0 * detail::chain_radius_scale(chain);
}

/// Richardson ladder diagnostics of `hcap_series`.
struct HcapSeriesResult {
  double value = 0.0;
  std::vector<double> heights;  // y of each rung
  std::vector<double> rungs;    // Re[(z - c)(g(z) - z)] at z = c + iy
  double last_correction = 0.0;
};

/// Half-plane capacity of the chain's hull from lim z (g(z) - z), evaluated
/// at z = c + iy for y = 2^6 .. 2^12 times the hull diameter bound and
/// extrapolated in 1/y^2 (the real part of z(g(z) - z) on a vertical ray
/// only contains even powers of 1/y).
inline HcapSeriesResult hcap_series_detailed(const HullChain& chain) {
  HcapSeriesResult r;
  if (chain.empty()) return r;
  const double c = chain.atoms.front().base;
  const double diam = chain_diameter_bound(chain);
  constexpr int kFirst = 6, kLast = 12, kRungs = kLast - kFirst + 1;
  for (int k = kFirst; k <= kLast; ++k) {
    double y = std::ldexp(diam, k);
    Complex z(c, y), disp(0.0, 0.0);
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const SlitAtom& a = chain.atoms[i];
      Complex d = z - a.base;
      Complex s = detail::slit_forward_rel(d, a.dt, i);
      Complex step = 4.0 * a.dt / (s + d);  // s - d without cancellation
      disp += step;
      z += step;
    }
    r.heights.push_back(y);
    r.rungs.push_back(-y * disp.imag());
  }
  std::array<std::array<double, kRungs>, kRungs> t{};
  for (int i = 0; i < kRungs; ++i) {
    t[i][0] = r.rungs[static_cast<std::size_t>(i)];
    double f = 1.0;
    for (int j = 1; j <= i; ++j) {
      f *= 4.0;
      t[i][j] = t[i][j - 1] + (t[i][j - 1] - t[i - 1][j - 1]) / (f - 1.0);
    }
  }
  r.value = t[kRungs - 1][kRungs - 1];
  r.last_correction = std::abs(t[kRungs - 1][kRungs - 1] - t[kRungs - 1][kRungs - 2]);
  double scale = std::max(std::abs(r.value), 1e-300);
  if (!std::isfinite(r.value) || r.last_correction > 1e-6 * scale) {
    std::ostringstream os;
    os.precision(17);
    os << "hcap_series: Richardson ladder did not converge (value " << r.value
       << ", last correction " << r.last_correction << ", rungs";
    for (double q : r.rungs) os << ' ' << q;
    os << ')';
    throw NumericalError(os.str());
  }
  return r;
}

inline double hcap_series(const HullChain& chain) { return hcap_series_detailed(chain).value; }

/// hcap(A followed by B) - hcap(A) - hcap(B), where B is given in the
/// coordinates after mapping out A.
inline double hcap_additivity_check(const HullChain& a_chain, const HullChain& b_extension) {
  if (b_extension.empty()) return 0.0;
  return hcap_series(a_chain.concat(b_extension)) - hcap_series(a_chain) -
         hcap_series(b_extension);
}

/// Points on the boundary curve grown by atom k: f_{prefix k}(b_k + i y) for
/// y from 0 to the slit height, `per_atom` segments each, equally spaced in y.
inline std::vector<std::vector<Complex>> hull_curves(const HullChain& chain,
                                                     std::size_t per_atom = 16) {
  std::vector<std::vector<Complex>> curves;
  curves.reserve(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const SlitAtom& a = chain.atoms[k];
    std::vector<Complex> c;
    c.reserve(per_atom + 1);
    for (std::size_t j = 0; j <= per_atom; ++j) {
      double y = a.height() * static_cast<double>(j) / static_cast<double>(per_atom);
      c.push_back(detail::inverse_range(chain.atoms, 0, k, Complex(a.base, y)));
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

}  // namespace loewner
