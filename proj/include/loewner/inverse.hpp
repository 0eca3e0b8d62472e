#pragma once

// Recovering the driving function of a sampled curve by unzipping: each
// increment is pushed through the chain built so far and replaced by the
// vertical slit reaching its image.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "loewner/conformal.hpp"
#include "loewner/core.hpp"
#include "loewner/errors.hpp"
#include "loewner/parallel.hpp"

namespace loewner {

struct UnzipOptions {
  /// an increment is accepted as a vertical slit when |Re w - base| <= kappa Im w
  double kappa = 0.5;
  /// maximal number of interpolating bisections of one sample step
  int max_depth = 12;
  /// at maximal depth a step is still accepted up to this ratio; beyond it the
  /// path is taken to cross its past hull
  double kappa_hard = 1e3;
  /// images with Im w below floor_rel times the path's extent count as on R
  double floor_rel = 1e-9;
  /// samples pushed through the frozen chain per parallel batch
  std::size_t batch = 256;
};

struct UnzipResult {
  /// base_k at the capacity time before atom k, closed by the last base
  DrivingFunction driver;
  HullChain chain;
  /// capacity time reached at each input sample
  std::vector<double> sample_clock;
  /// number of atoms mapping out the path up to each input sample
  std::vector<std::size_t> sample_atoms;
  /// g_{t_j}(gamma(t_j)): the driver value reached at sample j
  std::vector<double> sample_base;
  std::size_t subdivisions = 0;
};

namespace detail {

inline double path_extent(const SampledPath& p) {
  double x0 = p[0].real(), x1 = x0, y1 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    x0 = std::min(x0, p[i].real());
    x1 = std::max(x1, p[i].real());
    y1 = std::max(y1, p[i].imag());
  }
  return std::max(std::hypot(x1 - x0, y1), 1e-300);
}

inline std::string sample_label(const SampledPath& p, std::size_t j) {
  std::ostringstream os;
  os.precision(17);
  os << "sample " << j << " (t = " << p.time(j) << ")";
  return os.str();
}

class Unzipper {
 public:
  Unzipper(const SampledPath& path, const UnzipOptions& opt) : path_(path), opt_(opt) {
    floor_ = opt.floor_rel * path_extent(path);
    repeat_tol_ = 8.0 * std::numeric_limits<double>::epsilon() * path_extent(path);
    prev_base_ = path[0].real();
  }

  UnzipResult run() {
    const std::size_t n = path_.size();
    if (std::abs(path_[0].imag()) > floor_)
      throw DomainError("unzip: the path must start on the real line");
    res_.sample_clock.assign(n, 0.0);
    res_.sample_atoms.assign(n, 0);
    res_.sample_base.assign(n, prev_base_);
    std::vector<Complex> pre;
    std::vector<std::optional<std::size_t>> hit;
    const std::size_t batch = std::max<std::size_t>(opt_.batch, 1);
    for (std::size_t j0 = 1; j0 < n; j0 += batch) {
      std::size_t j1 = std::min(n, j0 + batch);
      std::size_t a0 = atoms_.size();
      pre.assign(j1 - j0, Complex{});
      hit.assign(j1 - j0, std::nullopt);
      parallel_for(
          j1 - j0,
          [&](std::size_t i) {
            try {
              pre[i] = forward_range(atoms_, 0, a0, path_[j0 + i]);
            } catch (const SwallowedError& e) {
              hit[i] = e.atom_index();
            }
          },
          16);
      for (std::size_t j = j0; j < j1; ++j) {
        if (hit[j - j0]) throw swallowed(j, *hit[j - j0]);
        Complex w = push(pre[j - j0], a0, j);
        fit(path_[j - 1], path_[j], w, 0, j);
        res_.sample_clock[j] = clock_;
        res_.sample_atoms[j] = atoms_.size();
        res_.sample_base[j] = prev_base_;
      }
    }
    res_.chain = HullChain{0.0, atoms_};
    std::vector<double> t, v;
    t.reserve(atoms_.size() + 1);
    v.reserve(atoms_.size() + 1);
    double c = 0.0;
    for (const auto& a : atoms_) {
      t.push_back(c);
      v.push_back(a.base);
      c += a.dt;
    }
    if (atoms_.empty() || c > t.back()) {
      t.push_back(c);
      v.push_back(prev_base_);
    }
    res_.driver = DrivingFunction(std::move(t), std::move(v), Interpolation::linear);
    return std::move(res_);
  }

 private:
  NotATraceError swallowed(std::size_t j, std::size_t atom) const {
    return NotATraceError(NotATraceError::Kind::not_strictly_increasing, j,
                          "hulls not strictly increasing: " + sample_label(path_, j) +
                              " lies on the hull grown by atom " + std::to_string(atom));
  }

  /// Applies atoms [from, end) to w.
  Complex push(Complex w, std::size_t from, std::size_t j) const {
    try {
      return forward_range(atoms_, from, atoms_.size(), w);
    } catch (const SwallowedError& e) {
      throw swallowed(j, e.atom_index());
    }
  }

  void fit(Complex z0, Complex z1, Complex w, int depth, std::size_t j) {
    double dx = std::abs(w.real() - prev_base_);
    if (!(w.imag() > floor_)) {
      // A landing on R is a touch of the boundary; a repeated point adds
      // nothing to the hull.
      if (!(std::abs(z1 - z0) > repeat_tol_))
        throw NotATraceError(NotATraceError::Kind::not_strictly_increasing, j,
                             "hulls not strictly increasing: " + sample_label(path_, j) +
                                 " repeats the previous point");
      if (depth == opt_.max_depth) {
        prev_base_ = w.real();
        return;
      }
    } else {
      double ratio = dx / w.imag();
      if (ratio <= opt_.kappa || (depth == opt_.max_depth && ratio <= opt_.kappa_hard)) {
        double dt = 0.25 * w.imag() * w.imag();
        // increments below the clock's resolution are dropped
        if (clock_ + dt > clock_) {
          atoms_.emplace_back(w.real(), dt);
          clock_ += dt;
        }
        prev_base_ = w.real();
        return;
      }
    }
    if (depth == opt_.max_depth) {
      std::ostringstream os;
      os << "path crosses its past hull near " << sample_label(path_, j)
         << ": mapped increment leaves the tip at slope " << dx / w.imag();
      throw NotATraceError(NotATraceError::Kind::crosses_hull, j, os.str());
    }
    ++res_.subdivisions;
    Complex mid = 0.5 * (z0 + z1);
    std::size_t a = atoms_.size();
    fit(z0, mid, push(mid, 0, j), depth + 1, j);
    fit(mid, z1, push(w, a, j), depth + 1, j);
  }

  const SampledPath& path_;
  UnzipOptions opt_;
  double floor_ = 0.0;
  double repeat_tol_ = 0.0;
  double prev_base_ = 0.0;
  double clock_ = 0.0;
  std::vector<SlitAtom> atoms_;
  UnzipResult res_;
};

}  // namespace detail

/// Unzips `gamma`: the returned chain maps out gamma[0, t_i] for every
/// sample, and the driver lives on the capacity clock.
inline UnzipResult unzip(const SampledPath& gamma, const UnzipOptions& opt = {}) {
  return detail::Unzipper(gamma, opt).run();
}

inline std::pair<DrivingFunction, HullChain> trace_to_driver(const SampledPath& gamma,
                                                             const UnzipOptions& opt = {}) {
  UnzipResult r = unzip(gamma, opt);
  return {std::move(r.driver), std::move(r.chain)};
}

/// The same samples re-timed by the capacity clock.
inline SampledPath reparametrize_by_hcap(const SampledPath& gamma,
                                         const UnzipOptions& opt = {}) {
  UnzipResult r = unzip(gamma, opt);
  return SampledPath(std::move(r.sample_clock), {gamma.points().begin(), gamma.points().end()},
                     Parametrisation::capacity);
}

/// Which boundary side a swallowed point is sent to.
enum class Side { left, right, automatic };

inline const char* to_string(Side s) {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    default: return "auto";
  }
}

namespace detail {

/// g(z) for the atoms [first, last). A point on a slit is sent to the side
/// `sign` of it, i.e. to the one-sided boundary limit b +- sqrt(h^2 - y^2).
/// `swallowed` is set when that happened.
inline Complex forward_sided(std::span<const SlitAtom> atoms, std::size_t first,
                             std::size_t last, Complex z, double sign, bool& swallowed) {
  for (std::size_t k = first; k < last; ++k) {
    const SlitAtom& a = atoms[k];
    double h = a.height();
    Complex d = z - a.base;
    if (on_slit(d, h)) {
      if (std::abs(d - Complex(0.0, h)) <= 1e-15 * h) {
        z = a.base;
        continue;
      }
      double y = std::max(d.imag(), 0.0);
      swallowed = true;
      z = a.base + std::copysign(std::sqrt((h - y) * (h + y)), sign);
      continue;
    }
    z = a.base + upper_sqrt((d - Complex(0.0, h)) * (d + Complex(0.0, h)), d.real());
  }
  return z;
}

/// Images of `pts` under the chain, swallowed points resolved by `side`; in
/// automatic mode the side closer to the previous output point wins (the
/// first point defaults to the right). `index_offset` is added to the sample
/// index of errors.
inline std::vector<Complex> map_points(const HullChain& chain, std::span<const Complex> pts,
                                       Side side, std::size_t index_offset = 0) {
  std::vector<Complex> plus(pts.size()), minus(pts.size());
  std::vector<char> hit(pts.size(), 0);
  const double sign = side == Side::left ? -1.0 : 1.0;
  parallel_for(
      pts.size(),
      [&](std::size_t i) {
        bool s = false;
        plus[i] = forward_sided(chain.atoms, 0, chain.size(), pts[i], sign, s);
        if (s && side == Side::automatic) {
          bool s2 = false;
          minus[i] = forward_sided(chain.atoms, 0, chain.size(), pts[i], -1.0, s2);
        }
        hit[i] = s ? 1 : 0;
      },
      16);
  std::vector<Complex> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Complex w = plus[i];
    if (hit[i] && side == Side::automatic && i > 0 &&
        std::abs(minus[i] - out[i - 1]) < std::abs(plus[i] - out[i - 1]))
      w = minus[i];
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
      throw NotATraceError(NotATraceError::Kind::swallowed, i + index_offset,
                           "swallowed point at sample " + std::to_string(i + index_offset) +
                               " could not be resolved to a boundary point");
    out[i] = w;
  }
  return out;
}

}  // namespace detail

/// gamma_t for the sample index i0, given an unzip of (at least) gamma[0, t].
inline SampledPath map_out_at(const SampledPath& gamma, std::size_t i0, const UnzipResult& unz,
                              Side side = Side::automatic, bool recentre = false) {
  if (i0 >= gamma.size() || i0 >= unz.sample_atoms.size())
    throw DomainError("map_out_at: sample index out of range");
  HullChain chain = unz.chain.prefix(unz.sample_atoms[i0]);
  double shift = recentre ? unz.sample_base[i0] : 0.0;
  std::vector<Complex> tail;
  tail.reserve(gamma.size() - i0);
  for (std::size_t j = i0; j < gamma.size(); ++j) tail.push_back(gamma[j]);
  std::vector<Complex> img = detail::map_points(chain, tail, side, i0);
  for (auto& w : img) w -= shift;
  return SampledPath::from_complex({gamma.times().begin() + static_cast<std::ptrdiff_t>(i0),
                                    gamma.times().end()},
                                   img, gamma.parametrisation());
}

/// gamma_t(s) = g_t(gamma(s)) for s >= t, where g_t maps out gamma[0, t]. With
/// `recentre` the result is shifted so that gamma_t(t) = 0. Time labels are
/// kept.
inline SampledPath map_out_initial(const SampledPath& gamma, double t,
                                   Side side = Side::automatic, bool recentre = false,
                                   const UnzipOptions& opt = {}) {
  auto idx = gamma.knot_index(t);
  if (!idx) throw DomainError("map_out_initial: t is not a sample time of the path");
  return map_out_at(gamma, *idx, unzip(gamma.slice(0, *idx), opt), side, recentre);
}

}  // namespace loewner
