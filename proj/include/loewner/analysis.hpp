#pragma once

// Checks of the trace properties on sampled paths: local growth, continuity
// of the mapped-out tails, excursions, time spent near R, and the driver
// error anatomy of an approximating sequence.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "loewner/conformal.hpp"
#include "loewner/core.hpp"
#include "loewner/errors.hpp"
#include "loewner/inverse.hpp"
#include "loewner/parallel.hpp"

namespace loewner {

// ---------------------------------------------------------------------------
// Local growth

struct LgpCertificate {
  double epsilon = 0.0;
  double T = 0.0;
  double delta = 0.0;
  double worst_t = 0.0;
  double worst_diam = 0.0;
};

struct LgpResult {
  bool passed = false;
  LgpCertificate certificate;
  std::string reason;
  std::optional<std::size_t> sample_index;
};

namespace detail {

/// Running diameter test for a growing point set: tells whether adding a
/// point makes the diameter reach `eps`.
class DiameterScan {
 public:
  explicit DiameterScan(double eps) : eps_(eps) {}

  /// Adds p; returns false when the set's diameter is now >= eps.
  bool add(Complex p) {
    if (pts_.empty()) {
      x0_ = x1_ = p.real();
      y0_ = y1_ = p.imag();
    } else {
      x0_ = std::min(x0_, p.real());
      x1_ = std::max(x1_, p.real());
      y0_ = std::min(y0_, p.imag());
      y1_ = std::max(y1_, p.imag());
    }
    if (std::max(x1_ - x0_, y1_ - y0_) >= eps_) {
      diam_ = std::max(diam_, std::max(x1_ - x0_, y1_ - y0_));
      pts_.push_back(p);
      return false;
    }
    if (std::hypot(x1_ - x0_, y1_ - y0_) >= eps_) {
      for (Complex q : pts_) {
        double d = std::abs(p - q);
        diam_ = std::max(diam_, d);
        if (d >= eps_) {
          pts_.push_back(p);
          return false;
        }
      }
    } else {
      for (Complex q : pts_) diam_ = std::max(diam_, std::abs(p - q));
    }
    pts_.push_back(p);
    return true;
  }

  /// Diameter of the points added so far (exact while below eps).
  double diameter() const { return diam_; }

 private:
  double eps_;
  double x0_ = 0, x1_ = 0, y0_ = 0, y1_ = 0;
  double diam_ = 0.0;
  std::vector<Complex> pts_;
};

}  // namespace detail

/// Largest grid step delta such that for every sample time t <= T the mapped
/// increment g_t(gamma(t, t + delta]) together with xi(t) has diameter < eps.
/// delta is capped at T. The path is unzipped first; an unzip failure is a
/// failed check.
inline LgpResult check_local_growth(const SampledPath& gamma, double eps,
                                    std::optional<double> T_opt = std::nullopt,
                                    const UnzipOptions& opt = {}) {
  if (!(eps > 0.0)) throw DomainError("check_local_growth: epsilon must be positive");
  const double T = T_opt ? *T_opt : gamma.end_time();
  if (!(T > gamma.start_time()) && gamma.size() > 1)
    throw DomainError("check_local_growth: T must exceed the path's start time");
  LgpResult res;
  res.certificate.epsilon = eps;
  res.certificate.T = T;
  UnzipResult u;
  try {
    u = unzip(gamma, opt);
  } catch (const NotATraceError& e) {
    res.reason = e.what();
    res.sample_index = e.sample_index();
    return res;
  }
  const std::size_t n = gamma.size();
  const auto& atoms = u.chain.atoms;
  auto t = gamma.times();
  const double Tcap = T - gamma.start_time();

  // suffix extremes of the driver values for the hull size bound
  std::vector<double> smax(n), smin(n);
  smax[n - 1] = smin[n - 1] = u.sample_base[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    smax[i] = std::max(smax[i + 1], u.sample_base[i]);
    smin[i] = std::min(smin[i + 1], u.sample_base[i]);
  }

  double best = Tcap;
  double worst_t = gamma.start_time(), worst_diam = 0.0;
  // Q[k] = g_{t_i}(gamma(t_k)) for k in [i + 1, hi)
  std::vector<Complex> Q(n);
  std::size_t hi = n;
  for (std::size_t i = n - 1; i-- > 0;) {
    const std::size_t a0 = u.sample_atoms[i], a1 = u.sample_atoms[i + 1];
    // window needed for this i
    std::size_t need = i + 2;
    while (need < n && t[need - 1] - t[i] <= best) ++need;
    if (hi > need) hi = need;
    Q[i + 1] = Complex(u.sample_base[i + 1], 0.0);
    if (hi < i + 2) hi = i + 2;
    parallel_for(
        hi - (i + 1),
        [&](std::size_t m) {
          std::size_t k = i + 1 + m;
          Q[k] = detail::inverse_range(atoms, a0, a1, Q[k]);
        },
        256);
    if (t[i] > T + 1e-12 * (1.0 + std::abs(T))) continue;
    double xi = u.sample_base[i];
    double R = std::max(std::sqrt(std::max(t[n - 1] - t[i], 0.0)),
                        std::max(smax[i] - xi, xi - smin[i]));
    if (8.0 * R < eps) continue;
    detail::DiameterScan scan(eps);
    scan.add(Complex(xi, 0.0));
    std::size_t k = i + 1;
    bool violated = false;
    for (; k < n; ++k) {
      if (t[k] - t[i] > best && k > i + 1) break;
      if (k >= hi) {
        Q[k] = detail::inverse_range(atoms, a0, u.sample_atoms[k],
                                     Complex(u.sample_base[k], 0.0));
        hi = k + 1;
      }
      double before = scan.diameter();
      if (!scan.add(Q[k])) {
        violated = true;
        double d = t[k - 1] - t[i];
        if (d < best || (d == best && before > worst_diam)) {
          best = d;
          worst_t = t[i];
          worst_diam = before;
        }
        break;
      }
    }
    if (!violated && best == Tcap && scan.diameter() > worst_diam) {
      worst_t = t[i];
      worst_diam = scan.diameter();
    }
  }
  res.certificate.delta = best;
  res.certificate.worst_t = worst_t;
  res.certificate.worst_diam = worst_diam;
  res.passed = best > 0.0;
  if (!res.passed) {
    std::ostringstream os;
    os.precision(17);
    os << "a single sample step already maps to a set of diameter >= " << eps << " at t = "
       << worst_t;
    res.reason = os.str();
    res.sample_index = gamma.knot_index(worst_t);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Continuity of mapped-out tails

struct MarkovOptions {
  /// offsets h at which the modulus is reported; empty selects 16 geometric
  /// values from half the time span down to the smallest sample step
  std::vector<double> modulus_grid;
  /// the largest sample gap of gamma_t may be at most gap_factor times the
  /// reference gap of gamma
  double gap_factor = 4.0;
  Side side = Side::automatic;
  UnzipOptions unzip;
};

struct MarkovReport {
  bool passed = false;
  double t = 0.0;
  std::vector<double> h;
  std::vector<double> modulus;
  double largest_gap = 0.0;
  double gap_time = 0.0;
  double gap_tolerance = 0.0;
  std::string reason;
  std::optional<std::size_t> sample_index;
};

namespace detail {

inline double largest_gap(const SampledPath& p, std::size_t from, double* at = nullptr) {
  double g = 0.0;
  for (std::size_t j = from + 1; j < p.size(); ++j) {
    double d = std::abs(p[j] - p[j - 1]);
    if (d > g) {
      g = d;
      if (at) *at = p.time(j - 1);
    }
  }
  return g;
}

/// Reference sample gap of a path: max(largest gap, 2 sqrt(largest step)).
inline double reference_gap(const SampledPath& p) {
  double step = 0.0;
  for (std::size_t j = 1; j < p.size(); ++j) step = std::max(step, p.time(j) - p.time(j - 1));
  return std::max(largest_gap(p, 0), 2.0 * std::sqrt(step));
}

inline std::vector<double> default_modulus_grid(const SampledPath& p) {
  double span = p.end_time() - p.start_time();
  double step = span;
  for (std::size_t j = 1; j < p.size(); ++j) step = std::min(step, p.time(j) - p.time(j - 1));
  std::vector<double> g;
  if (!(span > 0.0)) return g;
  double hi = 0.5 * span, lo = std::min(step, hi);
  for (int k = 0; k < 16; ++k) g.push_back(hi * std::pow(lo / hi, k / 15.0));
  return g;
}

inline MarkovReport markov_report_for(const SampledPath& tail, double t, double ref_gap,
                                      const MarkovOptions& opt) {
  MarkovReport r;
  r.t = t;
  r.h = opt.modulus_grid.empty() ? default_modulus_grid(tail) : opt.modulus_grid;
  for (double h : r.h) r.modulus.push_back(modulus_of_continuity(tail, h));
  r.largest_gap = largest_gap(tail, 0, &r.gap_time);
  r.gap_tolerance = opt.gap_factor * ref_gap;
  r.passed = r.largest_gap <= r.gap_tolerance;
  if (!r.passed) {
    std::ostringstream os;
    os.precision(17);
    os << "mapped-out path at t = " << t << " jumps by " << r.largest_gap << " near s = "
       << r.gap_time << " (tolerance " << r.gap_tolerance << ")";
    r.reason = os.str();
    r.sample_index = tail.knot_index(r.gap_time);
  }
  return r;
}

}  // namespace detail

/// Modulus of continuity of gamma_t = g_t(gamma) on [t, end]. Passes when the
/// largest sample gap of gamma_t stays within the tolerance, i.e. the modulus
/// goes to 0 at sample scale.
inline MarkovReport check_markov_continuity(const SampledPath& gamma, double t,
                                            const MarkovOptions& opt = {}) {
  double ref = detail::reference_gap(gamma);
  try {
    SampledPath tail = map_out_initial(gamma, t, opt.side, false, opt.unzip);
    return detail::markov_report_for(tail, t, ref, opt);
  } catch (const NotATraceError& e) {
    MarkovReport r;
    r.t = t;
    r.reason = e.what();
    r.sample_index = e.sample_index();
    return r;
  }
}

struct MarkovSweep {
  bool passed = true;
  std::vector<MarkovReport> reports;
};

/// Sample times nearest to start + k 2^-levels (end - start), k = 0 .. 2^levels - 1.
inline std::vector<std::size_t> dyadic_knots(const SampledPath& gamma, int levels) {
  std::vector<std::size_t> idx;
  const std::size_t m = std::size_t{1} << levels;
  for (std::size_t k = 0; k < m; ++k) {
    double t = gamma.start_time() +
               (gamma.end_time() - gamma.start_time()) * static_cast<double>(k) /
                   static_cast<double>(m);
    auto times = gamma.times();
    std::size_t j = detail::bracket(times, t);
    if (j + 1 < times.size() && std::abs(times[j + 1] - t) < std::abs(times[j] - t)) ++j;
    if (idx.empty() || idx.back() != j) idx.push_back(j);
  }
  return idx;
}

/// check_markov_continuity at every dyadic time of the given depth (snapped
/// to the nearest sample).
inline MarkovSweep check_markov_continuity_dyadic(const SampledPath& gamma, int levels = 4,
                                                  const MarkovOptions& opt = {}) {
  MarkovSweep sweep;
  auto idx = dyadic_knots(gamma, levels);
  double ref = detail::reference_gap(gamma);
  std::optional<UnzipResult> full;
  try {
    full = unzip(gamma, opt.unzip);
  } catch (const NotATraceError&) {
  }
  for (std::size_t i0 : idx) {
    MarkovReport r;
    if (full) {
      try {
        r = detail::markov_report_for(map_out_at(gamma, i0, *full, opt.side), gamma.time(i0),
                                      ref, opt);
      } catch (const NotATraceError& e) {
        r.t = gamma.time(i0);
        r.reason = e.what();
        r.sample_index = e.sample_index();
      }
    } else {
      r = check_markov_continuity(gamma, gamma.time(i0), opt);
    }
    sweep.passed = sweep.passed && r.passed;
    sweep.reports.push_back(std::move(r));
  }
  return sweep;
}

// ---------------------------------------------------------------------------
// Excursions

struct Excursion {
  double t_start = 0.0;
  double t_end = 0.0;
  SampledPath points;
  double diam = 0.0;
};

/// Splits a path at its samples on R (Im <= floor; a negative floor selects
/// 1e-9 times the path's extent). Each excursion runs between consecutive
/// such samples, or to the path's ends.
inline std::vector<Excursion> excursion_decomposition(const SampledPath& beta,
                                                      double floor = -1.0) {
  if (floor < 0.0) floor = 1e-9 * detail::path_extent(beta);
  std::vector<Excursion> out;
  const std::size_t n = beta.size();
  std::size_t j = 0;
  while (j < n) {
    if (beta[j].imag() <= floor) {
      ++j;
      continue;
    }
    std::size_t a = j;
    while (j < n && beta[j].imag() > floor) ++j;
    std::size_t first = a > 0 ? a - 1 : a;
    std::size_t last = j < n ? j : n - 1;
    Excursion e;
    e.points = beta.slice(first, last);
    e.t_start = beta.time(first);
    e.t_end = beta.time(last);
    auto pts = e.points.complex_points();
    e.diam = detail::diameter(pts);
    out.push_back(std::move(e));
  }
  return out;
}

inline std::size_t count_excursions_larger(std::span<const Excursion> ex, double delta) {
  return static_cast<std::size_t>(
      std::count_if(ex.begin(), ex.end(), [&](const Excursion& e) { return e.diam > delta; }));
}

// ---------------------------------------------------------------------------
// Time near the boundary

/// Lebesgue measure of {t : Im gamma(t) < h} for the piecewise linear path.
inline double boundary_time_measure(const SampledPath& gamma, double h) {
  if (gamma.parametrisation() != Parametrisation::capacity)
    throw DomainError("boundary_time_measure: path must be parametrised by capacity");
  if (!(h > 0.0)) throw DomainError("boundary_time_measure: h must be positive");
  double m = 0.0;
  for (std::size_t j = 1; j < gamma.size(); ++j) {
    double y0 = gamma[j - 1].imag(), y1 = gamma[j].imag();
    double dt = gamma.time(j) - gamma.time(j - 1);
    double lo = std::min(y0, y1), hi = std::max(y0, y1);
    if (hi < h)
      m += dt;
    else if (lo < h)
      m += dt * (h - lo) / (hi - lo);
  }
  return m;
}

struct BoundaryTimeProfile {
  std::vector<double> h;
  std::vector<double> measure;
  /// max over h of measure / h
  double c = 0.0;
};

inline BoundaryTimeProfile boundary_time_profile(const SampledPath& gamma,
                                                 std::span<const double> hs) {
  BoundaryTimeProfile p;
  for (double h : hs) {
    double m = boundary_time_measure(gamma, h);
    p.h.push_back(h);
    p.measure.push_back(m);
    p.c = std::max(p.c, m / h);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Hyperbolic distance bound

/// asinh(4 (a + b) / (y - b)): bound on the hyperbolic distance from x + iy
/// to infinity in the sphere minus the rectangle [-a, a] x [-b, b].
inline double hyperbolic_bound(double a, double b, double y) {
  if (!(y > b)) throw DomainError("hyperbolic_bound: need y > b");
  if (a < 0.0 || b < 0.0) throw DomainError("hyperbolic_bound: need a, b >= 0");
  return std::asinh(4.0 * (a + b) / (y - b));
}

// ---------------------------------------------------------------------------
// Driver convergence

struct ConvergenceOptions {
  /// upper end h_eps of the probe scan; 0 selects a tenth of the window
  double probe_max = 0.0;
  int probe_count = 32;
  /// dyadic depth for R = sup_t diam gamma_t
  int R_levels = 3;
  UnzipOptions unzip;
};

namespace detail {

inline std::size_t nearest_clock_index(std::span<const double> clock, double s) {
  std::size_t j = bracket(clock, s);
  if (j + 1 < clock.size() && std::abs(clock[j + 1] - s) < std::abs(clock[j] - s)) ++j;
  return j;
}

/// g_{t_i}(gamma(t_k)) from an unzip.
inline Complex mapped_sample(const UnzipResult& u, std::size_t i, std::size_t k) {
  return inverse_range(u.chain.atoms, u.sample_atoms[i], u.sample_atoms[k],
                       Complex(u.sample_base[k], 0.0));
}

inline double driver_sup_distance(const DrivingFunction& a, const DrivingFunction& b,
                                  double* worst_t = nullptr) {
  double hi = std::min(a.end_time(), b.end_time());
  std::vector<double> g{0.0, hi};
  for (double t : a.times())
    if (t < hi) g.push_back(t);
  for (double t : b.times())
    if (t < hi) g.push_back(t);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  double d = 0.0;
  for (double t : g) {
    double e = std::abs(a(t) - b(t));
    if (e > d) {
      d = e;
      if (worst_t) *worst_t = t;
    }
  }
  return d;
}

}  // namespace detail

/// Trace distances ||gamma - gamma^n|| and driver distances ||xi - xi^n|| on
/// the common window. For each approximant the driver error at its worst
/// time t is split into
///   |xi(t) - g_t(gamma(t+h))| + |g_t(gamma(t+h)) - g^n_t(gamma^n(t+h))|
///     + |g^n_t(gamma^n(t+h)) - xi^n(t)|
/// with the probe h among geometric candidates in (0, h_eps] maximising
/// Im g_t(gamma(t+h)); the terms go to metadata as entry<n>.term1..3.
inline ConvergenceReport driver_convergence_experiment(
    const SampledPath& gamma, std::span<const SampledPath> approximants,
    const ConvergenceOptions& opt = {}) {
  ConvergenceReport rep;
  UnzipResult u = unzip(gamma, opt.unzip);
  const std::size_t m = approximants.size();
  rep.trace_distances.assign(m, 0.0);
  rep.driver_distances.assign(m, std::numeric_limits<double>::quiet_NaN());
  rep.entry_ok.assign(m, false);
  std::vector<std::map<std::string, double>> meta(m);
  std::vector<std::string> notes(m);
  double window = gamma.end_time();
  for (const auto& a : approximants) window = std::min(window, a.end_time());
  rep.metadata["window_T"] = window;
  rep.metadata["samples"] = static_cast<double>(gamma.size());

  parallel_for(
      m,
      [&](std::size_t n) {
        const SampledPath& an = approximants[n];
        rep.trace_distances[n] = sup_distance(gamma, an, window);
        UnzipResult un;
        try {
          un = unzip(an, opt.unzip);
        } catch (const NotATraceError& e) {
          notes[n] = "approximant " + std::to_string(n) + ": " + e.what();
          return;
        }
        rep.entry_ok[n] = true;
        double tw = 0.0;
        rep.driver_distances[n] = detail::driver_sup_distance(u.driver, un.driver, &tw);

        std::size_t i = detail::nearest_clock_index(u.sample_clock, tw);
        std::size_t in = detail::nearest_clock_index(un.sample_clock, tw);
        double span = std::min(u.sample_clock.back(), un.sample_clock.back()) -
                      std::max(u.sample_clock.front(), un.sample_clock.front());
        double h_eps = opt.probe_max > 0.0 ? opt.probe_max : 0.1 * span;
        h_eps = std::min(h_eps, span - u.sample_clock[i]);
        std::string key = "entry" + std::to_string(n) + ".";
        meta[n][key + "t"] = tw;
        if (!(h_eps > 0.0)) return;
        double best_im = -1.0, best_h = 0.0;
        Complex w{}, wn{};
        double lo = h_eps * 1e-4;
        for (int c = 0; c < opt.probe_count; ++c) {
          double h = h_eps * std::pow(lo / h_eps, static_cast<double>(c) /
                                                      std::max(1, opt.probe_count - 1));
          std::size_t k = detail::nearest_clock_index(u.sample_clock, u.sample_clock[i] + h);
          std::size_t kn = detail::nearest_clock_index(un.sample_clock, un.sample_clock[in] + h);
          if (k <= i || kn <= in) continue;
          Complex z = detail::mapped_sample(u, i, k);
          if (z.imag() > best_im) {
            best_im = z.imag();
            best_h = h;
            w = z;
            wn = detail::mapped_sample(un, in, kn);
          }
        }
        if (best_im < 0.0) return;
        meta[n][key + "h"] = best_h;
        meta[n][key + "term1"] = std::abs(u.sample_base[i] - w);
        meta[n][key + "term2"] = std::abs(w - wn);
        meta[n][key + "term3"] = std::abs(wn - un.sample_base[in]);
        meta[n][key + "error"] = std::abs(u.driver(tw) - un.driver(tw));
      },
      1);
  for (std::size_t n = 0; n < m; ++n) {
    for (auto& [k, v] : meta[n]) rep.metadata[k] = v;
    if (!notes[n].empty()) rep.notes.push_back(notes[n]);
  }

  double R = 0.0;
  for (std::size_t i0 : dyadic_knots(gamma, opt.R_levels)) {
    SampledPath tail = map_out_at(gamma, i0, u);
    auto pts = tail.complex_points();
    R = std::max(R, detail::diameter(pts));
  }
  rep.metadata["R"] = R;
  rep.validate();
  return rep;
}

/// Spearman rank correlation of two equally long sequences (ties share the
/// mean rank).
inline double rank_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw DomainError("rank_correlation: need two sequences of equal length >= 2");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      double mean = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mean;
      i = j + 1;
    }
    return r;
  };
  auto ra = ranks(a), rb = ranks(b);
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(ra.size());
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(rb.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace loewner
