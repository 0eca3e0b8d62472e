#pragma once

// Simple approximations of a trace by cut insertion. At stage n a short
// vertical segment is inserted at the mapped-out tip of gamma^{n-1} at time
// s_n, and everything after s_n is lifted above it:
//
//   gamma^n(s) = gamma^{n-1}(s)                              s <= s_n
//              = f(i 2 sqrt(s - s_n))                        s in [s_n, s_n + h_n]
//              = f(i 2 sqrt(h_n) + gamma^{n-1}_{s_n}(s))      s >= s_n + h_n
//
// where f is the recentred inverse of the mapping-out function of
// gamma^{n-1}[0, s_n]. Later times shift by h_n (the stretch map phi).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "loewner/analysis.hpp"
#include "loewner/conformal.hpp"
#include "loewner/core.hpp"
#include "loewner/errors.hpp"
#include "loewner/inverse.hpp"
#include "loewner/parallel.hpp"

namespace loewner {

struct CutSchedule {
  /// cut times t_n in the input's time, in insertion order
  std::vector<double> cut_times;
  /// capacities h_n
  std::vector<double> capacities;
  /// s_n = phi(t_n) in the final stretched time
  std::vector<double> stretched;
  /// number of halvings applied to the initial h_n
  std::vector<int> halvings;
  /// ||gamma^n - gamma^{n-1}|| (previous stage halted on the new block)
  std::vector<double> stage_distance;
  /// d_{n,n}
  std::vector<double> own_gap;
  /// d_{n,N} at the end of the construction
  std::vector<double> final_gap;
  std::vector<std::string> warnings;

  double total() const {
    double s = 0.0;
    for (double h : capacities) s += h;
    return s;
  }

  /// phi(t) = t + sum of h_m over cuts t_m < t.
  double phi(double t) const {
    double s = t;
    for (std::size_t m = 0; m < cut_times.size(); ++m)
      if (cut_times[m] < t) s += capacities[m];
    return s;
  }

  /// sup{t : phi(t) <= s}; constant t_n on the inserted intervals.
  double phi_inverse(double s) const {
    std::vector<std::size_t> order(cut_times.size());
    for (std::size_t m = 0; m < order.size(); ++m) order[m] = m;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cut_times[a] < cut_times[b]; });
    double shift = 0.0;
    for (std::size_t m : order) {
      double sm = cut_times[m] + shift;
      if (s <= sm) break;
      if (s <= sm + capacities[m]) return cut_times[m];
      shift += capacities[m];
    }
    return s - shift;
  }
};

// ---------------------------------------------------------------------------
// Cut times

struct CutTimeSelection {
  std::vector<double> times;
  std::vector<std::string> warnings;
};

namespace detail {

/// Minimum distance between two point sets (sweep over A sorted by Re).
inline double set_distance(std::span<const Complex> A, std::span<const Complex> B) {
  if (A.empty() || B.empty()) return std::numeric_limits<double>::infinity();
  std::vector<Complex> a(A.begin(), A.end());
  std::sort(a.begin(), a.end(), [](Complex x, Complex y) { return x.real() < y.real(); });
  double best = std::abs(A.back() - B.front());
  for (Complex b : B) {
    auto lo = std::lower_bound(a.begin(), a.end(), b.real() - best,
                               [](Complex x, double v) { return x.real() < v; });
    for (auto it = lo; it != a.end() && it->real() <= b.real() + best; ++it)
      best = std::min(best, std::abs(*it - b));
  }
  return best;
}

/// Whether every point of B is at distance > tau from every point of A.
inline bool separated(std::span<const Complex> A, std::span<const Complex> B, double tau) {
  if (A.empty() || B.empty()) return true;
  if (!(tau > 0.0)) return set_distance(A, B) > tau;
  auto key = [tau](Complex z) {
    auto ix = static_cast<std::int64_t>(std::floor(z.real() / tau));
    auto iy = static_cast<std::int64_t>(std::floor(z.imag() / tau));
    return std::pair{ix, iy};
  };
  auto pack = [](std::int64_t x, std::int64_t y) {
    return static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(y);
  };
  std::unordered_map<std::uint64_t, std::vector<Complex>> grid;
  grid.reserve(A.size());
  for (Complex z : A) {
    auto [x, y] = key(z);
    grid[pack(x, y)].push_back(z);
  }
  for (Complex z : B) {
    auto [x, y] = key(z);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(pack(x + dx, y + dy));
        if (it == grid.end()) continue;
        for (Complex q : it->second)
          if (std::abs(q - z) <= tau) return false;
      }
  }
  return true;
}

/// Distance from sample j to the samples before it, skipping the stretch of
/// path within arclength `skip` just before j, and to R.
inline double separation_from_past(const SampledPath& g, std::size_t j, double skip) {
  double d = g[j].imag();
  double arc = 0.0;
  std::size_t k = j;
  while (k > 0 && arc <= skip) {
    arc += std::abs(g[k] - g[k - 1]);
    --k;
  }
  if (arc <= skip) return d;
  for (std::size_t m = 0; m <= k; ++m) d = std::min(d, std::abs(g[m] - g[j]));
  return d;
}

}  // namespace detail

/// Up to N sample times in dyadic order (1/2; 1/4, 3/4; ...) of the time
/// span. A dyadic time whose sample is within sep_tol of R or of the earlier
/// path is replaced by the nearest passing sample of its dyadic cell; a cell
/// without one is skipped with a warning.
inline CutTimeSelection select_cut_times(const SampledPath& gamma, std::size_t N,
                                         double sep_tol, int max_generation = 24) {
  CutTimeSelection sel;
  if (gamma.size() < 3 || N == 0) return sel;
  const double t0 = gamma.start_time(), span = gamma.end_time() - t0;
  auto times = gamma.times();
  std::vector<char> used(gamma.size(), 0);
  used.front() = used.back() = 1;
  auto passes = [&](std::size_t j) {
    return !used[j] && detail::separation_from_past(gamma, j, 2.0 * sep_tol) > sep_tol;
  };
  for (int g = 1; g <= max_generation && sel.times.size() < N; ++g) {
    const double cell = span / std::ldexp(1.0, g);
    bool any_sample = false;
    for (std::int64_t k = 1; k < (std::int64_t{1} << g) && sel.times.size() < N; k += 2) {
      double target = t0 + cell * static_cast<double>(k);
      double lo = target - 0.5 * cell, hi = target + 0.5 * cell;
      std::size_t j = detail::bracket(times, target);
      if (j + 1 < times.size() && std::abs(times[j + 1] - target) < std::abs(times[j] - target))
        ++j;
      // nearest samples first, alternating sides, inside the cell
      std::size_t left = j, right = j + 1;
      bool found = false;
      while (true) {
        bool moved = false;
        if (left < times.size() && times[left] >= lo && times[left] < hi) {
          moved = true;
          any_sample = true;
          if (passes(left)) {
            j = left;
            found = true;
          }
        }
        if (!found && right < times.size() && times[right] >= lo && times[right] < hi) {
          moved = true;
          any_sample = true;
          if (passes(right)) {
            j = right;
            found = true;
          }
        }
        if (found || !moved) break;
        if (left == 0) left = times.size();
        else --left;
        ++right;
      }
      if (found) {
        used[j] = 1;
        sel.times.push_back(times[j]);
      } else {
        std::ostringstream os;
        os.precision(17);
        os << "no admissible cut time in [" << lo << ", " << hi << "); cell skipped";
        sel.warnings.push_back(os.str());
      }
    }
    if (!any_sample) break;
  }
  return sel;
}

// ---------------------------------------------------------------------------
// One cut

/// Everything about a cut at sample `index` of the previous stage that does
/// not depend on the capacity h.
struct PreparedCut {
  SampledPath prev;
  std::size_t index = 0;
  /// maps out prev[0, index]
  HullChain chain;
  /// g(prev(s_n)), the recentring constant
  double base = 0.0;
  /// recentred images g(prev(s)) - base of the samples after index
  std::vector<Complex> mapped_tail;
  std::size_t block_samples = 32;

  /// The next stage for capacity h.
  SampledPath realize(double h) const {
    if (!(h > 0.0)) throw DomainError("insert_cut: capacity must be positive");
    const std::size_t M = block_samples;
    const std::size_t n_prev = prev.size();
    const std::size_t total = n_prev + M;
    std::vector<double> t(total);
    std::vector<Complex> z(total);
    for (std::size_t j = 0; j <= index; ++j) {
      t[j] = prev.time(j);
      z[j] = prev[j];
    }
    const double s_n = prev.time(index);
    const double lift = 2.0 * std::sqrt(h);
    const auto& atoms = chain.atoms;
    for (std::size_t k = 1; k <= M; ++k) {
      double u = static_cast<double>(k) / static_cast<double>(M);
      t[index + k] = k == M ? s_n + h : s_n + h * u;
      z[index + k] = detail::inverse_range(atoms, 0, chain.size(), Complex(base, lift * std::sqrt(u)));
    }
    parallel_for(
        mapped_tail.size(),
        [&](std::size_t m) {
          std::size_t j = index + 1 + m;
          t[j + M] = prev.time(j) + h;
          z[j + M] = detail::inverse_range(atoms, 0, chain.size(),
                                           base + Complex(0.0, lift) + mapped_tail[m]);
        },
        16);
    return SampledPath::from_complex(std::move(t), z, prev.parametrisation());
  }
};

inline PreparedCut prepare_cut(const SampledPath& prev, std::size_t index,
                               std::size_t block_samples = 32, Side side = Side::automatic,
                               const UnzipOptions& opt = {}) {
  if (index == 0 || index + 1 > prev.size())
    throw DomainError("insert_cut: the cut must be at an interior or final sample");
  if (block_samples < 2) throw DomainError("insert_cut: need at least 2 block samples");
  PreparedCut pc;
  pc.prev = prev;
  pc.index = index;
  pc.block_samples = block_samples;
  UnzipResult u = unzip(prev.slice(0, index), opt);
  pc.chain = std::move(u.chain);
  pc.base = u.sample_base.back();
  std::vector<Complex> tail;
  for (std::size_t j = index + 1; j < prev.size(); ++j) tail.push_back(prev[j]);
  pc.mapped_tail = detail::map_points(pc.chain, tail, side, index + 1);
  for (auto& w : pc.mapped_tail) w -= pc.base;
  return pc;
}

/// gamma^n from gamma^{n-1}: a cut of capacity h_n at time s_n (a sample time).
inline SampledPath insert_cut(const SampledPath& gamma_prev, double s_n, double h_n,
                              std::size_t block_samples = 32, const UnzipOptions& opt = {}) {
  auto idx = gamma_prev.knot_index(s_n);
  if (!idx) throw DomainError("insert_cut: s_n is not a sample time");
  return prepare_cut(gamma_prev, *idx, block_samples, Side::automatic, opt).realize(h_n);
}

// ---------------------------------------------------------------------------
// Capacity choice

/// A completed cut block inside the current stage, by sample indices:
/// `first` is the cut point gamma(s_k), `last` the top of the inserted segment.
struct CutBlock {
  std::size_t first = 0;
  std::size_t last = 0;
  /// samples [first, last] of gamma^k when the block was made
  std::vector<Complex> created;
  /// d_{k,k}
  double own_gap = 0.0;
};

struct CapacityChoice {
  double h = 0.0;
  int halvings = 0;
  SampledPath path;
  double stage_distance = 0.0;
  double own_gap = 0.0;
};

namespace detail {

inline std::size_t shifted_index(std::size_t i, std::size_t cut, std::size_t M) {
  return i <= cut ? i : i + M;
}

/// ||gamma^n - gamma^{n-1}|| with gamma^{n-1} halted on the new block.
inline double stage_distance(const PreparedCut& pc, const SampledPath& next) {
  const std::size_t M = pc.block_samples;
  double d = 0.0;
  Complex cut = pc.prev[pc.index];
  for (std::size_t k = 1; k <= M; ++k) d = std::max(d, std::abs(next[pc.index + k] - cut));
  for (std::size_t j = pc.index + 1; j < pc.prev.size(); ++j)
    d = std::max(d, std::abs(next[j + M] - pc.prev[j]));
  return d;
}

inline std::vector<Complex> points_range(const SampledPath& p, std::size_t a, std::size_t b) {
  std::vector<Complex> v;
  v.reserve(b - a);
  for (std::size_t j = a; j < b; ++j) v.push_back(p[j]);
  return v;
}

}  // namespace detail

/// Halving search for h_n from eps^2 4^-n: accepts the first h for which
/// (a) ||gamma^n - gamma^{n-1}|| < eps 2^-n,
/// (b) d_{k,n} > d_{k,k} / 2 for all earlier blocks k,
/// (c) blocks after s_n keep all pairwise sample distances above half of
///     their values at creation,
/// and the new block is separated (d_{n,n} > 0). `blocks` are in the
/// coordinates of gamma^{n-1}.
inline CapacityChoice choose_capacity(const PreparedCut& pc, int n, double eps,
                                      std::span<const CutBlock> blocks, int max_halvings = 60) {
  if (n < 1) throw DomainError("choose_capacity: stages are numbered from 1");
  const std::size_t M = pc.block_samples;
  const double tol = eps * std::ldexp(1.0, -n);
  double h = eps * eps * std::ldexp(1.0, -2 * n);
  const double t_scale = std::max({std::abs(pc.prev.start_time()), std::abs(pc.prev.end_time()),
                                   pc.prev.end_time() - pc.prev.start_time()});
  const double h_min = 8.0 * static_cast<double>(M) * std::numeric_limits<double>::epsilon() * t_scale;
  std::ostringstream diag;
  diag.precision(6);
  for (int halving = 0; halving <= max_halvings; ++halving, h *= 0.5) {
    if (h < h_min) {
      diag << " capacity fell below the time resolution;";
      break;
    }
    CapacityChoice c;
    c.h = h;
    c.halvings = halving;
    c.path = pc.realize(h);
    c.stage_distance = detail::stage_distance(pc, c.path);
    if (!(c.stage_distance < tol)) {
      diag << " h=" << h << ": stage distance " << c.stage_distance << ";";
      continue;
    }
    bool ok = true;
    for (const CutBlock& b : blocks) {
      std::size_t f = detail::shifted_index(b.first, pc.index, M);
      std::size_t l = detail::shifted_index(b.last, pc.index, M);
      auto A = detail::points_range(c.path, 0, f + 1);
      auto B = detail::points_range(c.path, l, c.path.size());
      if (!detail::separated(A, B, 0.5 * b.own_gap)) {
        diag << " h=" << h << ": block at sample " << f << " lost separation;";
        ok = false;
        break;
      }
      if (b.first > pc.index) {
        for (std::size_t x = 0; ok && x < b.created.size(); ++x)
          for (std::size_t y = x + 1; y < b.created.size(); ++y) {
            double before = std::abs(b.created[x] - b.created[y]);
            double now = std::abs(c.path[f + x] - c.path[f + y]);
            if (!(now > 0.5 * before)) {
              diag << " h=" << h << ": block at sample " << f << " contracted;";
              ok = false;
              break;
            }
          }
        if (!ok) break;
      }
    }
    if (!ok) continue;
    auto A = detail::points_range(c.path, 0, pc.index + 1);
    auto B = detail::points_range(c.path, pc.index + M, c.path.size());
    c.own_gap = detail::set_distance(A, B);
    if (!(c.own_gap > 0.0)) {
      diag << " h=" << h << ": new block not separated;";
      continue;
    }
    return c;
  }
  throw NumericalError("choose_capacity: no admissible capacity at stage " + std::to_string(n) +
                       ":" + diag.str());
}

// ---------------------------------------------------------------------------
// The construction

struct ApproxOptions {
  std::size_t block_samples = 32;
  /// separation required of cut points; 0 selects 1e-3 times the path's extent
  double sep_tol = 0.0;
  int max_halvings = 60;
  /// unzip every stage to fill the report's driver distances
  bool driver_report = true;
  UnzipOptions unzip{0.5, 12, 1e3, 1e-14, 256};
};

struct ApproxResult {
  SampledPath path;
  CutSchedule schedule;
  /// per stage: ||gamma - gamma^n|| at equal times and ||xi - xi^n||
  ConvergenceReport report;
  std::vector<CutBlock> blocks;
};

namespace detail {

/// sup_s |gamma(min(s, T)) - g(s)| over the union of both knot sets, for g
/// starting with gamma and running at least as long.
inline double same_time_distance(const SampledPath& gamma, const SampledPath& g) {
  auto grid = common_grid(g, g);
  for (double t : gamma.times()) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double d = 0.0;
  for (double s : grid) {
    if (s < g.start_time() || s > g.end_time()) continue;
    d = std::max(d, std::abs(gamma.at(std::min(s, gamma.end_time())) - g.at(s)));
  }
  return d;
}

}  // namespace detail

/// N stages of cut insertion at dyadic cut times with capacities from
/// choose_capacity. The result is simple at construction scale: samples
/// separated by a completed block stay d_{k,k}/2 apart, samples inside a block
/// keep half their distance. Only completed blocks are certified.
inline ApproxResult approximate_simple(const SampledPath& gamma, double eps, std::size_t N,
                                       const ApproxOptions& opt = {}) {
  if (!(eps > 0.0)) throw DomainError("approximate_simple: eps must be positive");
  ApproxResult res;
  const std::size_t M = opt.block_samples;
  double sep = opt.sep_tol > 0.0 ? opt.sep_tol : 1e-3 * detail::path_extent(gamma);
  CutTimeSelection sel = select_cut_times(gamma, N, sep);
  res.schedule.warnings = sel.warnings;

  std::optional<UnzipResult> ref;
  if (opt.driver_report) ref = unzip(gamma, opt.unzip);

  SampledPath cur = gamma;
  // current index of each input sample
  std::vector<std::size_t> where(gamma.size());
  for (std::size_t j = 0; j < where.size(); ++j) where[j] = j;
  int stage = 0;
  for (double tn : sel.times) {
    ++stage;
    std::size_t orig = *gamma.knot_index(tn, 0.0);
    std::size_t idx = where[orig];
    PreparedCut pc = prepare_cut(cur, idx, M, Side::automatic, opt.unzip);
    CapacityChoice c = choose_capacity(pc, stage, eps, res.blocks, opt.max_halvings);
    for (auto& b : res.blocks) {
      b.first = detail::shifted_index(b.first, idx, M);
      b.last = detail::shifted_index(b.last, idx, M);
    }
    CutBlock nb;
    nb.first = idx;
    nb.last = idx + M;
    nb.created = detail::points_range(c.path, idx, idx + M + 1);
    nb.own_gap = c.own_gap;
    res.blocks.push_back(std::move(nb));
    for (auto& w : where)
      if (w > idx) w += M;
    cur = std::move(c.path);

    res.schedule.cut_times.push_back(tn);
    res.schedule.capacities.push_back(c.h);
    res.schedule.halvings.push_back(c.halvings);
    res.schedule.stage_distance.push_back(c.stage_distance);
    res.schedule.own_gap.push_back(c.own_gap);

    res.report.trace_distances.push_back(detail::same_time_distance(gamma, cur));
    double dd = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    if (ref) {
      try {
        UnzipResult un = unzip(cur, opt.unzip);
        dd = detail::driver_sup_distance(ref->driver, un.driver);
        ok = true;
      } catch (const NotATraceError& e) {
        res.report.notes.push_back("stage " + std::to_string(stage) + ": " + e.what());
      }
    }
    res.report.driver_distances.push_back(dd);
    res.report.entry_ok.push_back(ok);
  }
  for (std::size_t m = 0; m < res.schedule.cut_times.size(); ++m)
    res.schedule.stretched.push_back(res.schedule.phi(res.schedule.cut_times[m]));

  double min_final = std::numeric_limits<double>::infinity();
  double min_half_own = std::numeric_limits<double>::infinity();
  for (const auto& b : res.blocks) {
    auto A = detail::points_range(cur, 0, b.first + 1);
    auto B = detail::points_range(cur, b.last, cur.size());
    double d = detail::set_distance(A, B);
    res.schedule.final_gap.push_back(d);
    min_final = std::min(min_final, d);
    min_half_own = std::min(min_half_own, 0.5 * b.own_gap);
  }
  double hbar = res.schedule.total();
  double omega = modulus_of_continuity_interp(gamma, hbar);
  // distance to the input halted on the blocks
  double halted = 0.0;
  for (std::size_t j = 0; j < gamma.size(); ++j)
    halted = std::max(halted, std::abs(cur[where[j]] - gamma[j]));
  for (const auto& b : res.blocks)
    for (std::size_t k = b.first; k <= b.last; ++k)
      halted = std::max(halted, std::abs(cur[k] - cur[b.first]) +
                                    std::abs(cur[b.first] - gamma.at(res.schedule.phi_inverse(
                                                                cur.time(b.first)))));
  auto& md = res.report.metadata;
  md["eps"] = eps;
  md["stages"] = static_cast<double>(res.blocks.size());
  md["h_bar"] = hbar;
  md["omega_h_bar"] = omega;
  md["sup_distance"] = res.blocks.empty() ? 0.0 : detail::same_time_distance(gamma, cur);
  md["halted_distance"] = halted;
  md["bound"] = eps + omega;
  md["min_cross_block_distance"] = res.blocks.empty() ? 0.0 : min_final;
  md["min_half_own_gap"] = res.blocks.empty() ? 0.0 : min_half_own;
  md["block_samples"] = static_cast<double>(M);
  res.report.notes.push_back(
      "simplicity is certified across completed cut blocks only (finitely many stages)");
  res.path = std::move(cur);
  res.report.validate();
  return res;
}

// ---------------------------------------------------------------------------

/// gamma(0) + 2i sqrt(t) for t <= eps, then gamma(t - eps) + 2i sqrt(eps):
/// the same curve raised off R. eps = 0 returns gamma.
inline SampledPath lift_off_boundary(const SampledPath& gamma, double eps,
                                     std::size_t lead_samples = 32) {
  if (eps < 0.0) throw DomainError("lift_off_boundary: eps must be non-negative");
  if (eps == 0.0) return gamma;
  const double t0 = gamma.start_time();
  std::vector<double> t;
  std::vector<Complex> z;
  for (std::size_t k = 0; k < lead_samples; ++k) {
    double u = static_cast<double>(k) / static_cast<double>(lead_samples);
    t.push_back(t0 + eps * u * u);
    z.push_back(gamma[0] + Complex(0.0, 2.0 * std::sqrt(eps) * u));
  }
  const Complex lift(0.0, 2.0 * std::sqrt(eps));
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    t.push_back(gamma.time(j) + eps);
    z.push_back(gamma[j] + lift);
  }
  return SampledPath::from_complex(std::move(t), z, gamma.parametrisation());
}

}  // namespace loewner
