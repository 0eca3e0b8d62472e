#pragma once

// Brownian-motion estimate of half-plane capacity:
//
//   hcap(A) = lim_{y -> oo} y E[Im B^{iy}_tau],
//
// tau the exit time of H \ A. Paths are launched at c + iL. Outside a
// half-disk D_R that contains A the exit distribution is sampled exactly
// (the Joukowski map z + R^2/z takes H \ D_R onto H, where the exit point is
// Cauchy distributed). Inside D_R the walk takes spherical steps whose radius
// is the distance to the nearest obstacle (A or the real line) and stops in
// an eps-shell.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "loewner/conformal.hpp"
#include "loewner/core.hpp"
#include "loewner/parallel.hpp"

namespace loewner {

/// A compact set A in the closed upper half-plane, known through its
/// distance function. A lies in the half-disk of `radius` about `center`.
struct Region {
  std::function<double(Complex)> distance;
  double center = 0.0;
  double radius = 0.0;
  bool empty = false;

  bool contains(Complex z) const { return !empty && distance(z) <= 0.0; }
  double diameter() const { return empty ? 0.0 : 2.0 * radius; }
};

inline Region empty_region() {
  return Region{[](Complex) { return std::numeric_limits<double>::infinity(); }, 0.0, 0.0,
                true};
}

namespace detail {

inline double segment_distance(Complex p, Complex a, Complex b) {
  Complex ab = b - a;
  double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double u = ((p.real() - a.real()) * ab.real() + (p.imag() - a.imag()) * ab.imag()) / len2;
  u = std::clamp(u, 0.0, 1.0);
  return std::abs(p - (a + u * ab));
}

}  // namespace detail

inline Region segment_region(Complex a, Complex b) {
  double c = 0.5 * (a.real() + b.real());
  double r = std::max(std::abs(a - c), std::abs(b - c));
  return Region{[a, b](Complex z) { return detail::segment_distance(z, a, b); }, c, r, false};
}

/// The vertical slit [base, base + i height].
inline Region vertical_slit_region(double base, double height) {
  return segment_region(Complex(base, 0.0), Complex(base, height));
}

/// The closed half-disk {|z - center| <= r, Im z >= 0}.
inline Region half_disk_region(double center, double r) {
  return Region{[center, r](Complex z) { return std::max(0.0, std::abs(z - center) - r); },
                center, r, false};
}

/// Union of polylines. Segments are grouped in blocks with bounding boxes so
/// a query only visits blocks that can beat the current best distance.
inline Region polyline_region(const std::vector<std::vector<Complex>>& polylines) {
  struct Block {
    double x0, x1, y0, y1;
    std::vector<std::pair<Complex, Complex>> segs;
  };
  auto blocks = std::make_shared<std::vector<Block>>();
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  for (const auto& line : polylines) {
    std::vector<std::pair<Complex, Complex>> segs;
    if (line.size() == 1) segs.emplace_back(line[0], line[0]);
    for (std::size_t i = 1; i < line.size(); ++i) segs.emplace_back(line[i - 1], line[i]);
    for (std::size_t s = 0; s < segs.size(); s += 16) {
      Block b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
              {}};
      for (std::size_t k = s; k < std::min(segs.size(), s + 16); ++k) {
        for (Complex p : {segs[k].first, segs[k].second}) {
          b.x0 = std::min(b.x0, p.real());
          b.x1 = std::max(b.x1, p.real());
          b.y0 = std::min(b.y0, p.imag());
          b.y1 = std::max(b.y1, p.imag());
        }
        b.segs.push_back(segs[k]);
      }
      xmin = std::min(xmin, b.x0);
      xmax = std::max(xmax, b.x1);
      blocks->push_back(std::move(b));
    }
  }
  if (blocks->empty()) return empty_region();
  double c = 0.5 * (xmin + xmax), r = 0.0;
  for (const auto& b : *blocks)
    for (const auto& s : b.segs)
      r = std::max({r, std::abs(s.first - c), std::abs(s.second - c)});
  auto dist = [blocks](Complex z) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : *blocks) {
      double dx = std::max({b.x0 - z.real(), 0.0, z.real() - b.x1});
      double dy = std::max({b.y0 - z.imag(), 0.0, z.imag() - b.y1});
      if (dx * dx + dy * dy >= best * best) continue;
      for (const auto& s : b.segs)
        best = std::min(best, detail::segment_distance(z, s.first, s.second));
    }
    return best;
  };
  return Region{dist, c, r, false};
}

/// The hull of `chain` restricted to the atoms in `ranges` (half-open index
/// ranges), as a polyline region.
inline Region chain_region(const HullChain& chain,
                           std::span<const std::pair<std::size_t, std::size_t>> ranges,
                           std::size_t per_atom = 16) {
  auto curves = hull_curves(chain, per_atom);
  std::vector<std::vector<Complex>> picked;
  for (auto [a, b] : ranges)
    for (std::size_t k = a; k < std::min(b, curves.size()); ++k) picked.push_back(curves[k]);
  return polyline_region(picked);
}

inline Region chain_region(const HullChain& chain, std::size_t per_atom = 16) {
  std::pair<std::size_t, std::size_t> all{0, chain.size()};
  return chain_region(chain, std::span(&all, 1), per_atom);
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  double launch_height = 0.0;
  /// set when the launch height is not large against the set's diameter
  bool launch_warning = false;
};

struct McOptions {
  std::uint64_t samples = 100000;
  /// 0 selects 100 x diameter
  double launch_height = 0.0;
  std::uint64_t seed = 1;
  /// stopping shell, relative to the bounding radius
  double shell = 1e-5;
};

namespace detail {

struct RunningMoments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const RunningMoments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    double d = o.mean - mean;
    double nt = na + nb;
    mean += d * nb / nt;
    m2 += o.m2 + d * d * na * nb / nt;
    n += o.n;
  }
};

/// Im of the stopping point of one Brownian path.
template <class Rng>
double brownian_exit_height(const Region& region, double launch, double R, double c,
                            double eps, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Complex p(c, launch);
  bool placed = false;
  for (int guard = 0; guard < 1000000; ++guard) {
    Complex zeta = p - c;
    if (!placed && std::abs(zeta) > R) {
      Complex J = zeta + R * R / zeta;
      double x = J.real() + J.imag() * std::tan(std::numbers::pi * (unif(rng) - 0.5));
      if (!(std::abs(x) < 2.0 * R)) return 0.0;
      double th = std::acos(x / (2.0 * R));
      p = c + std::polar(R, th);
      placed = true;
    }
    double da = region.distance(p);
    double dr = p.imag();
    double r = std::min(da, dr);
    if (r < eps) return da <= dr ? p.imag() : 0.0;
    double phi = 2.0 * std::numbers::pi * unif(rng);
    p += Complex(r * std::cos(phi), r * std::sin(phi));
    placed = false;
  }
  return 0.0;
}

}  // namespace detail

/// Monte Carlo half-plane capacity: launch_height times the mean of Im at the
/// stopping point, with its standard error. Results depend only on the seed,
/// not on the worker count (samples are split in 64 fixed streams).
inline McEstimate hcap_mc(const Region& region, const McOptions& opt = {}) {
  McEstimate est;
  est.samples = opt.samples;
  double diam = region.diameter();
  est.launch_height = opt.launch_height > 0.0 ? opt.launch_height
                                              : 100.0 * (diam > 0.0 ? diam : 1.0);
  est.launch_warning = diam > 0.0 && est.launch_height < 20.0 * diam;
  if (opt.samples == 0) throw DomainError("hcap_mc: need at least one sample");
  double R = region.empty ? 1.0 : 1.05 * region.radius + 1e-12;
  if (est.launch_height <= R) throw DomainError("hcap_mc: launch height inside the set's disk");
  double eps = opt.shell * R;

  constexpr std::size_t kStreams = 64;
  std::vector<detail::RunningMoments> parts(kStreams);
  parallel_for(
      kStreams,
      [&](std::size_t s) {
        std::seed_seq seq{static_cast<std::uint32_t>(opt.seed),
                          static_cast<std::uint32_t>(opt.seed >> 32),
                          static_cast<std::uint32_t>(s), 0x4c6f6577u};
        std::mt19937_64 rng(seq);
        std::uint64_t n = opt.samples / kStreams + (s < opt.samples % kStreams ? 1 : 0);
        for (std::uint64_t i = 0; i < n; ++i)
          parts[s].add(est.launch_height *
                       detail::brownian_exit_height(region, est.launch_height, R,
                                                    region.center, eps, rng));
      },
      1);
  detail::RunningMoments all;
  for (const auto& p : parts) all.merge(p);
  est.mean = all.mean;
  est.std_error =
      all.n > 1 ? std::sqrt(all.m2 / static_cast<double>(all.n - 1) / static_cast<double>(all.n))
                : 0.0;
  return est;
}

struct SuperadditivityResult {
  /// hcap of the union minus the sum of the chain capacities
  double slack = 0.0;
  double std_error = 0.0;
  double union_hcap = 0.0;
  double chain_sum = 0.0;
};

/// For nested chains A_1 c ... c A_n (each a prefix of the next) compares
/// hcap(A_1 u (A_3 \ A_2) u (A_5 \ A_4) u ...) with
/// hcap(A_1) + hcap(A_{2,3}) + hcap(A_{4,5}) + ..., where A_{i,j} is
/// A_j \ A_i mapped out by g_{A_i}. The union is estimated by Monte Carlo.
inline SuperadditivityResult hcap_superadditivity_check(std::span<const HullChain> nested,
                                                        const McOptions& opt = {}) {
  if (nested.empty()) throw DomainError("hcap_superadditivity_check: no hulls");
  for (std::size_t i = 1; i < nested.size(); ++i) {
    const auto& small = nested[i - 1].atoms;
    const auto& big = nested[i].atoms;
    if (small.size() > big.size() || !std::equal(small.begin(), small.end(), big.begin()))
      throw DomainError("hcap_superadditivity_check: hulls are not nested prefixes");
  }
  SuperadditivityResult r;
  r.chain_sum = hcap_series(nested[0]);
  if (nested.size() < 3) {
    r.union_hcap = r.chain_sum;
    return r;
  }
  std::vector<std::pair<std::size_t, std::size_t>> ranges{{0, nested[0].size()}};
  for (std::size_t i = 1; i + 1 < nested.size(); i += 2) {
    std::size_t a = nested[i].size(), b = nested[i + 1].size();
    ranges.emplace_back(a, b);
    r.chain_sum += hcap_series(nested[i + 1].suffix(a));
  }
  const HullChain& outer = nested.back();
  McEstimate mc = hcap_mc(chain_region(outer, ranges), opt);
  r.union_hcap = mc.mean;
  r.std_error = mc.std_error;
  r.slack = r.union_hcap - r.chain_sum;
  return r;
}

}  // namespace loewner
