#pragma once

// Domain types shared by every module: points of the closed upper
// half-plane, sampled paths, sampled driving functions, slit atoms and
// hull chains.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loewner/errors.hpp"

namespace loewner {

using Complex = std::complex<double>;

/// A point of the closed upper half-plane. Construction rejects points with
/// negative or non-finite coordinates; use `clamped` for values produced by
/// floating point maps that may dip a few ulps below the axis.
class HPoint {
 public:
  constexpr HPoint() = default;
  HPoint(double re, double im) : value_(re, im) { validate(); }
  explicit HPoint(Complex z) : value_(z) { validate(); }

  static HPoint clamped(Complex z) {
    if (z.imag() < 0.0) z.imag(0.0);
    return HPoint(z);
  }

  double re() const noexcept { return value_.real(); }
  double im() const noexcept { return value_.imag(); }
  Complex z() const noexcept { return value_; }
  operator Complex() const noexcept { return value_; }

  friend bool operator==(const HPoint&, const HPoint&) = default;

 private:
  void validate() const {
    if (!std::isfinite(value_.real()) || !std::isfinite(value_.imag()))
      throw DomainError("HPoint: non-finite coordinate");
    if (value_.imag() < 0.0)
      throw DomainError("HPoint: imaginary part is negative");
  }

  Complex value_{0.0, 0.0};
};

enum class Parametrisation { capacity, arbitrary };

inline const char* to_string(Parametrisation p) {
  return p == Parametrisation::capacity ? "capacity" : "arbitrary";
}

namespace detail {

inline void require_strictly_increasing(std::span<const double> t,
                                        const char* who) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]))
      throw DomainError(std::string(who) + ": non-finite time");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw DomainError(std::string(who) + ": times not strictly increasing");
  }
}

/// Index k with t[k] <= x < t[k+1], clamped to [0, n-2].
inline std::size_t bracket(std::span<const double> t, double x) {
  if (t.size() < 2) return 0;
  auto it = std::upper_bound(t.begin(), t.end(), x);
  std::size_t k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
  return std::min(k, t.size() - 2);
}

}  // namespace detail

/// A curve in the closed upper half-plane sampled at strictly increasing
/// times. Between samples the curve is the straight segment joining them.
class SampledPath {
 public:
  SampledPath() = default;

  SampledPath(std::vector<double> times, std::vector<HPoint> points,
              Parametrisation tag = Parametrisation::arbitrary)
      : times_(std::move(times)), points_(std::move(points)), tag_(tag) {
    if (times_.empty()) throw DomainError("SampledPath: no samples");
    if (times_.size() != points_.size())
      throw DomainError("SampledPath: times and points differ in length");
    detail::require_strictly_increasing(times_, "SampledPath");
  }

  /// Builds from raw complex samples, clamping round-off below the axis.
  static SampledPath from_complex(std::vector<double> times,
                                  std::span<const Complex> pts,
                                  Parametrisation tag = Parametrisation::arbitrary) {
    std::vector<HPoint> hp;
    hp.reserve(pts.size());
    for (Complex z : pts) hp.push_back(HPoint::clamped(z));
    return SampledPath(std::move(times), std::move(hp), tag);
  }

  std::span<const double> times() const noexcept { return times_; }
  std::span<const HPoint> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return times_.size(); }
  Parametrisation parametrisation() const noexcept { return tag_; }
  double start_time() const noexcept { return times_.front(); }
  double end_time() const noexcept { return times_.back(); }
  double time(std::size_t i) const { return times_[i]; }
  Complex operator[](std::size_t i) const { return points_[i].z(); }

  std::vector<Complex> complex_points() const {
    return {points_.begin(), points_.end()};
  }

  /// Linear interpolation between samples.
  Complex at(double t) const {
    if (!(t >= times_.front() - 1e-12 * (1.0 + std::abs(times_.front())) &&
          t <= times_.back() + 1e-12 * (1.0 + std::abs(times_.back()))))
      throw DomainError("SampledPath::at: time outside sampled range");
    if (times_.size() == 1) return points_.front();
    std::size_t k = detail::bracket(times_, t);
    double a = times_[k], b = times_[k + 1];
    double u = std::clamp((t - a) / (b - a), 0.0, 1.0);
    return points_[k].z() + u * (points_[k + 1].z() - points_[k].z());
  }

  /// Index of the sample at time `t`, or nullopt when `t` is not a knot
  /// (relative tolerance `rel`).
  std::optional<std::size_t> knot_index(double t, double rel = 1e-9) const {
    double span = std::max(times_.back() - times_.front(), 1e-300);
    auto it = std::lower_bound(times_.begin(), times_.end(), t - rel * span);
    if (it != times_.end() && std::abs(*it - t) <= rel * span)
      return static_cast<std::size_t>(it - times_.begin());
    return std::nullopt;
  }

  /// Samples [first, last] inclusive.
  SampledPath slice(std::size_t first, std::size_t last) const {
    if (first > last || last >= size()) throw DomainError("SampledPath::slice: bad range");
    return SampledPath({times_.begin() + first, times_.begin() + last + 1},
                       {points_.begin() + first, points_.begin() + last + 1}, tag_);
  }

  SampledPath with_parametrisation(Parametrisation tag) const {
    SampledPath p = *this;
    p.tag_ = tag;
    return p;
  }

  friend bool operator==(const SampledPath&, const SampledPath&) = default;

 private:
  std::vector<double> times_;
  std::vector<HPoint> points_;
  Parametrisation tag_ = Parametrisation::arbitrary;
};

enum class Interpolation { linear, sqrt };

inline const char* to_string(Interpolation i) {
  return i == Interpolation::linear ? "linear" : "sqrt";
}

/// A continuous real function of capacity time, given by samples. With
/// `Interpolation::sqrt` each increment follows a square-root profile
/// xi_k + (xi_{k+1} - xi_k) * sqrt((t - t_k) / (t_{k+1} - t_k)), which is the
/// driver shape that grows a straight slit.
class DrivingFunction {
 public:
  DrivingFunction() = default;

  DrivingFunction(std::vector<double> times, std::vector<double> values,
                  Interpolation interp = Interpolation::linear)
      : times_(std::move(times)), values_(std::move(values)), interp_(interp) {
    if (times_.empty()) throw DomainError("DrivingFunction: no samples");
    if (times_.size() != values_.size())
      throw DomainError("DrivingFunction: times and values differ in length");
    if (times_.front() != 0.0)
      throw DomainError("DrivingFunction: times must start at 0");
    detail::require_strictly_increasing(times_, "DrivingFunction");
    for (double v : values_)
      if (!std::isfinite(v)) throw DomainError("DrivingFunction: non-finite value");
  }

  /// Samples `f` on a uniform grid of `n` intervals over [0, T].
  template <class F>
  static DrivingFunction sample(F&& f, double T, std::size_t n,
                                Interpolation interp = Interpolation::linear) {
    if (n == 0 || !(T > 0.0)) throw DomainError("DrivingFunction::sample: empty range");
    std::vector<double> t(n + 1), v(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      t[k] = T * static_cast<double>(k) / static_cast<double>(n);
      v[k] = f(t[k]);
    }
    t[n] = T;
    return DrivingFunction(std::move(t), std::move(v), interp);
  }

  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> values() const noexcept { return values_; }
  Interpolation interpolation() const noexcept { return interp_; }
  std::size_t size() const noexcept { return times_.size(); }
  double end_time() const noexcept { return times_.back(); }

  double operator()(double t) const {
    double tol = 1e-12 * (1.0 + times_.back());
    if (!(t >= -tol && t <= times_.back() + tol))
      throw DomainError("DrivingFunction: time outside sampled range");
    if (times_.size() == 1) return values_.front();
    std::size_t k = detail::bracket(times_, t);
    double a = times_[k], b = times_[k + 1];
    double u = std::clamp((t - a) / (b - a), 0.0, 1.0);
    if (interp_ == Interpolation::sqrt) u = std::sqrt(u);
    return values_[k] + u * (values_[k + 1] - values_[k]);
  }

  friend bool operator==(const DrivingFunction&, const DrivingFunction&) = default;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  Interpolation interp_ = Interpolation::linear;
};

/// One vertical slit map: removes the segment from `base` to
/// `base + 2i sqrt(dt)`, a hull of half-plane capacity 2 dt.
struct SlitAtom {
  double base = 0.0;
  double dt = 0.0;

  SlitAtom() = default;
  SlitAtom(double base_, double dt_) : base(base_), dt(dt_) {
    if (!std::isfinite(base) || !std::isfinite(dt) || !(dt > 0.0))
      throw DomainError("SlitAtom: need finite base and dt > 0");
  }

  double height() const noexcept { return 2.0 * std::sqrt(dt); }
  friend bool operator==(const SlitAtom&, const SlitAtom&) = default;
};

/// A discretised Loewner chain: atoms applied in order, starting at capacity
/// time t0. The mapping-out function of the whole chain is
/// atom[n-1] o ... o atom[0].
struct HullChain {
  double t0 = 0.0;
  std::vector<SlitAtom> atoms;

  std::size_t size() const noexcept { return atoms.size(); }
  bool empty() const noexcept { return atoms.empty(); }

  double duration() const noexcept {
    double s = 0.0;
    for (const auto& a : atoms) s += a.dt;
    return s;
  }
  double total_capacity() const noexcept { return 2.0 * duration(); }

  /// Capacity clock after each atom: clock[k] = t0 + sum_{j<k} dt_j,
  /// k = 0..size().
  std::vector<double> clock() const {
    std::vector<double> c(atoms.size() + 1, t0);
    for (std::size_t k = 0; k < atoms.size(); ++k) c[k + 1] = c[k] + atoms[k].dt;
    return c;
  }

  HullChain prefix(std::size_t n) const {
    HullChain c{t0, {atoms.begin(), atoms.begin() + std::min(n, atoms.size())}};
    return c;
  }

  /// The chain continuing this one: atoms [n, size()).
  HullChain suffix(std::size_t n) const {
    n = std::min(n, atoms.size());
    double t = t0;
    for (std::size_t k = 0; k < n; ++k) t += atoms[k].dt;
    return HullChain{t, {atoms.begin() + n, atoms.end()}};
  }

  HullChain concat(const HullChain& tail) const {
    HullChain c = *this;
    c.atoms.insert(c.atoms.end(), tail.atoms.begin(), tail.atoms.end());
    return c;
  }

  friend bool operator==(const HullChain&, const HullChain&) = default;
};

/// Paired sup-norm distances over an approximating sequence.
struct ConvergenceReport {
  std::vector<double> trace_distances;
  std::vector<double> driver_distances;
  /// false where the driver of an approximant could not be recovered
  std::vector<bool> entry_ok;
  std::map<std::string, double> metadata;
  std::vector<std::string> notes;

  void validate() const {
    if (trace_distances.size() != driver_distances.size())
      throw DomainError("ConvergenceReport: sequences differ in length");
    for (double d : trace_distances)
      if (d < 0.0) throw DomainError("ConvergenceReport: negative distance");
    for (double d : driver_distances)
      if (d < 0.0) throw DomainError("ConvergenceReport: negative distance");
  }
};

// ---------------------------------------------------------------------------
// Path utilities

/// Union of the sample times of `a` and `b` inside their common window,
/// optionally truncated at `T`.
inline std::vector<double> common_grid(const SampledPath& a, const SampledPath& b,
                                       std::optional<double> T = std::nullopt) {
  double lo = std::max(a.start_time(), b.start_time());
  double hi = std::min(a.end_time(), b.end_time());
  if (T) hi = std::min(hi, *T);
  if (hi < lo) throw DomainError("sup_distance: disjoint time ranges");
  std::vector<double> g;
  g.reserve(a.size() + b.size() + 2);
  g.push_back(lo);
  for (double t : a.times())
    if (t > lo && t < hi) g.push_back(t);
  for (double t : b.times())
    if (t > lo && t < hi) g.push_back(t);
  g.push_back(hi);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

/// max over `grid` of |a(t) - b(t)|.
inline double sup_distance(const SampledPath& a, const SampledPath& b,
                           std::span<const double> grid) {
  if (grid.empty()) throw DomainError("sup_distance: empty grid");
  double lo = std::max(a.start_time(), b.start_time());
  double hi = std::min(a.end_time(), b.end_time());
  if (hi < lo) throw DomainError("sup_distance: disjoint time ranges");
  double d = 0.0;
  for (double t : grid) d = std::max(d, std::abs(a.at(t) - b.at(t)));
  return d;
}

/// Sup distance on the union of both knot sets in the window [lo, min(hi, T)].
/// Exact for the piecewise linear interpolants.
inline double sup_distance(const SampledPath& a, const SampledPath& b,
                           std::optional<double> T = std::nullopt) {
  auto g = common_grid(a, b, T);
  return sup_distance(a, b, g);
}

/// Re-times `p`: the output has knots `new_times` and visits
/// p(source_times[k]) at knot k. `source_times` must be non-decreasing
/// and inside p's range; when omitted it equals `new_times`.
inline SampledPath reparametrize_linear(const SampledPath& p,
                                        std::vector<double> new_times,
                                        std::optional<std::vector<double>> source_times =
                                            std::nullopt) {
  detail::require_strictly_increasing(new_times, "reparametrize_linear");
  const std::vector<double>& src = source_times ? *source_times : new_times;
  if (src.size() != new_times.size())
    throw DomainError("reparametrize_linear: source and target lengths differ");
  for (std::size_t k = 1; k < src.size(); ++k)
    if (src[k] < src[k - 1])
      throw DomainError("reparametrize_linear: time change is not monotone");
  std::vector<HPoint> pts;
  pts.reserve(src.size());
  for (double s : src) pts.push_back(HPoint::clamped(p.at(s)));
  return SampledPath(std::move(new_times), std::move(pts), Parametrisation::arbitrary);
}

namespace detail {

/// Diameter of a finite point set (exact: convex hull + pairwise on hull).
inline double diameter(std::span<const Complex> pts) {
  if (pts.size() < 2) return 0.0;
  std::vector<Complex> p(pts.begin(), pts.end());
  std::sort(p.begin(), p.end(), [](Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  auto cross = [](Complex o, Complex a, Complex b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
  };
  std::vector<Complex> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k > 1 ? k - 1 : k);
  double d = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = i + 1; j < h.size(); ++j) d = std::max(d, std::abs(h[i] - h[j]));
  if (h.size() < 2) d = std::abs(p.front() - p.back());
  return d;
}

}  // namespace detail

/// Empirical modulus of continuity: max |p(s) - p(s')| over sample pairs with
/// |s - s'| <= h.
inline double modulus_of_continuity(const SampledPath& p, double h) {
  auto t = p.times();
  double w = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size() && t[j] - t[i] <= h * (1.0 + 1e-12); ++j)
      w = std::max(w, std::abs(p[j] - p[i]));
  return w;
}

/// Modulus at a time offset `h` that need not be a multiple of the grid:
/// evaluates the interpolant on every knot and every knot shifted by h.
inline double modulus_of_continuity_interp(const SampledPath& p, double h) {
  if (h <= 0.0) return 0.0;
  double w = modulus_of_continuity(p, h);
  for (double t : p.times()) {
    double s = t + h;
    if (s <= p.end_time()) w = std::max(w, std::abs(p.at(s) - p.at(t)));
    s = t - h;
    if (s >= p.start_time()) w = std::max(w, std::abs(p.at(s) - p.at(t)));
  }
  return w;
}

}  // namespace loewner
