#pragma once

// The `loewner` command line. run() returns 0 on success, 1 when a check
// fails or the input is not a trace, 2 on bad input or usage.

#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "loewner/loewner.hpp"

namespace loewner::cli {

namespace detail {

inline void maybe_svg(const std::string& file, const std::vector<SampledPath>& paths) {
  if (!file.empty()) io::write_text(file, svg::render(paths));
}

inline Side parse_side(const std::string& s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  if (s == "auto") return Side::automatic;
  throw DomainError("unknown side '" + s + "'");
}

inline DrivingFunction generate_driver(const std::string& kind, double T, std::size_t n, double c,
                                       std::uint64_t seed) {
  if (kind == "constant") return DrivingFunction::sample([c](double) { return c; }, T, n);
  if (kind == "sin") return DrivingFunction::sample([c](double t) { return c * std::sin(t); }, T, n);
  if (kind == "sqrt")
    return DrivingFunction::sample([c](double t) { return c * std::sqrt(t); }, T, n,
                                   Interpolation::sqrt);
  if (kind == "random-walk") {
    // Gaussian increments of variance dt, rescaled so that sup |xi| = c
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(0.0, std::sqrt(T / static_cast<double>(n)));
    std::vector<double> t(n + 1), v(n + 1, 0.0);
    double m = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      t[k] = k == n ? T : T * static_cast<double>(k) / static_cast<double>(n);
      v[k] = v[k - 1] + step(rng);
      m = std::max(m, std::abs(v[k]));
    }
    if (m > 0.0)
      for (double& x : v) x *= c / m;
    return DrivingFunction(std::move(t), std::move(v));
  }
  throw DomainError("unknown driver kind '" + kind + "'");
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Chordal Loewner evolution toolkit", "loewner"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  // trace
  auto* trace = app.add_subcommand("trace", "evolve a driving function into a trace");
  std::string driver_in, out_file, svg_file, chain_file;
  std::size_t steps = 1000;
  double tip_floor = 1e-7;
  bool no_richardson = false, adaptive = false;
  trace->add_option("--driver", driver_in, "driver (JSON or CSV)")->required();
  trace->add_option("--steps", steps, "capacity steps");
  trace->add_option("--out", out_file, "trace output")->default_str("trace.json");
  trace->add_option("--chain", chain_file, "slit chain output");
  trace->add_option("--svg", svg_file, "SVG plot");
  trace->add_option("--tip-floor", tip_floor, "evaluation height below the tip");
  trace->add_flag("--no-richardson", no_richardson, "single evaluation at tip-floor");
  trace->add_flag("--adaptive", adaptive, "refine steps where the driver moves fast");

  // unzip
  auto* unz = app.add_subcommand("unzip", "recover the driving function of a trace");
  std::string trace_in;
  unz->add_option("--trace", trace_in, "trace (JSON or CSV)")->required();
  unz->add_option("--out", out_file, "driver output")->default_str("driver.json");
  unz->add_option("--chain", chain_file, "slit chain output");

  // mapout
  auto* mapout = app.add_subcommand("mapout", "map out the initial piece gamma[0, t]");
  double t_cut = 0.5;
  std::string side_name = "auto";
  bool recentre = false;
  mapout->add_option("--trace", trace_in, "trace")->required();
  mapout->add_option("--t", t_cut, "time (a sample time of the trace)")->required();
  mapout->add_option("--out", out_file, "mapped tail output")->default_str("tail.json");
  mapout->add_option("--side", side_name, "prime end side for swallowed points")
      ->check(CLI::IsMember({"left", "right", "auto"}));
  mapout->add_flag("--recentre", recentre, "subtract the driver value at t");
  mapout->add_option("--svg", svg_file, "SVG plot");

  // approx-simple
  auto* approx = app.add_subcommand("approx-simple", "simple approximation by cut insertion");
  double eps = 0.1;
  std::size_t stages = 16, block_samples = 32;
  std::string schedule_file, report_file;
  bool no_driver_report = false;
  approx->add_option("--trace", trace_in, "trace")->required();
  approx->add_option("--eps", eps, "tolerance");
  approx->add_option("--stages", stages, "number of cuts");
  approx->add_option("--block-samples", block_samples, "samples per cut block");
  approx->add_option("--out", out_file, "approximant output")->default_str("simple.json");
  approx->add_option("--schedule", schedule_file, "cut schedule output");
  approx->add_option("--report", report_file, "convergence report output");
  approx->add_flag("--no-driver-report", no_driver_report, "skip per-stage unzips");
  approx->add_option("--svg", svg_file, "SVG plot");

  // check-lgp
  auto* lgp = app.add_subcommand("check-lgp", "local growth check");
  std::optional<double> T_lgp;
  bool with_markov = false;
  int levels = 4;
  lgp->add_option("--trace", trace_in, "path")->required();
  lgp->add_option("--eps", eps, "diameter bound");
  lgp->add_option("--T", T_lgp, "time horizon");
  lgp->add_flag("--markov", with_markov, "also check continuity of the mapped-out tails");
  lgp->add_option("--levels", levels, "dyadic levels for --markov");

  // converge
  auto* conv = app.add_subcommand("converge", "trace and driver distances of approximants");
  std::vector<std::string> approx_in;
  conv->add_option("--trace", trace_in, "reference trace")->required();
  conv->add_option("--approx", approx_in, "approximants")->required()->expected(1, -1);
  conv->add_option("--out", out_file, "report output");

  // boundary-time
  auto* bt = app.add_subcommand("boundary-time", "time spent within height h of R");
  std::vector<double> hs{0.1, 0.05, 0.025};
  bool reparam = false;
  bt->set_help_flag("--help", "Print this help message and exit");
  bt->add_option("--trace", trace_in, "trace")->required();
  bt->add_option("--h", hs, "heights")->delimiter(',');
  bt->add_flag("--reparametrize", reparam, "reparametrise by capacity first");
  bt->add_option("--out", out_file, "profile output");

  // hcap
  auto* hcap = app.add_subcommand("hcap", "half-plane capacity");
  std::string hcap_chain;
  std::optional<double> slit_h, disk_r;
  bool mc = false;
  std::uint64_t samples = 100000, seed = 1;
  auto* hc_chain = hcap->add_option("--chain", hcap_chain, "slit chain");
  auto* hc_trace = hcap->add_option("--trace", trace_in, "trace (unzipped to a chain)");
  auto* hc_slit = hcap->add_option("--slit", slit_h, "vertical slit of this height at 0");
  auto* hc_disk = hcap->add_option("--half-disk", disk_r, "half-disk of this radius at 0");
  hc_chain->excludes(hc_trace)->excludes(hc_slit)->excludes(hc_disk);
  hc_trace->excludes(hc_slit)->excludes(hc_disk);
  hc_slit->excludes(hc_disk);
  hcap->add_flag("--mc", mc, "Monte Carlo estimate");
  hcap->add_option("--samples", samples, "Monte Carlo samples");
  hcap->add_option("--seed", seed, "Monte Carlo seed");
  hcap->add_option("--out", out_file, "result output");

  // gen-driver
  auto* gen = app.add_subcommand("gen-driver", "write a driving function");
  std::string kind;
  double T_gen = 1.0;
  std::size_t n_gen = 1000;
  double coef = 1.0;
  gen->add_option("--kind", kind, "constant, sin, sqrt or random-walk")
      ->required()
      ->check(CLI::IsMember({"constant", "sin", "sqrt", "random-walk"}));
  gen->add_option("--T", T_gen, "end time");
  gen->add_option("--n", n_gen, "number of intervals");
  gen->add_option("--c", coef, "value (constant), amplitude (sin), k (k sqrt t), sup (random-walk)");
  gen->add_option("--seed", seed, "random-walk seed");
  gen->add_option("--out", out_file, "driver output")->default_str("driver.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  set_thread_count(threads);
  auto or_default = [&](const char* d) { return out_file.empty() ? std::string(d) : out_file; };
  out.precision(10);

  try {
    if (*trace) {
      ForwardOptions fo;
      fo.richardson = !no_richardson;
      fo.adaptive = adaptive;
      auto r = evolve(io::read_driver(driver_in), steps, tip_floor, fo);
      io::write_path(or_default("trace.json"), r.trace);
      if (!chain_file.empty()) io::write_json(chain_file, io::to_json(r.chain));
      detail::maybe_svg(svg_file, {r.trace});
      out << "trace: " << r.trace.size() << " samples, tip " << r.trace[r.trace.size() - 1]
          << "\n";
    } else if (*unz) {
      auto u = unzip(io::read_path(trace_in));
      io::write_driver(or_default("driver.json"), u.driver);
      if (!chain_file.empty()) io::write_json(chain_file, io::to_json(u.chain));
      out << "unzip: " << u.chain.size() << " atoms, capacity " << u.driver.end_time() << "\n";
    } else if (*mapout) {
      auto g = io::read_path(trace_in);
      auto tail = map_out_initial(g, t_cut, detail::parse_side(side_name), recentre);
      io::write_path(or_default("tail.json"), tail);
      detail::maybe_svg(svg_file, {tail});
      out << "mapout: " << tail.size() << " samples\n";
    } else if (*approx) {
      ApproxOptions ao;
      ao.block_samples = block_samples;
      ao.driver_report = !no_driver_report;
      auto r = approximate_simple(io::read_path(trace_in), eps, stages, ao);
      io::write_path(or_default("simple.json"), r.path);
      if (!schedule_file.empty()) io::write_json(schedule_file, io::to_json(r.schedule));
      if (!report_file.empty()) io::write_json(report_file, io::to_json(r.report));
      detail::maybe_svg(svg_file, {io::read_path(trace_in), r.path});
      for (const auto& w : r.schedule.warnings) err << "warning: " << w << "\n";
      out << "approx-simple: " << r.schedule.cut_times.size() << " cuts, h_bar "
          << r.schedule.total() << ", sup distance " << r.report.metadata.at("sup_distance")
          << ", min cross-block distance " << r.report.metadata.at("min_cross_block_distance")
          << "\n";
    } else if (*lgp) {
      auto g = io::read_path(trace_in);
      auto r = check_local_growth(g, eps, T_lgp);
      bool ok = r.passed;
      if (r.passed)
        out << "local growth: pass, delta " << r.certificate.delta << " (worst diameter "
            << r.certificate.worst_diam << " at t = " << r.certificate.worst_t << ")\n";
      else
        out << "local growth: FAIL: " << r.reason << "\n";
      if (with_markov) {
        MarkovOptions mo;
        auto m = check_markov_continuity_dyadic(g, levels, mo);
        out << "markov continuity: " << (m.passed ? "pass" : "FAIL");
        if (!m.passed)
          for (const auto& rep : m.reports)
            if (!rep.passed) {
              out << ": " << rep.reason;
              break;
            }
        out << "\n";
        ok = ok && m.passed;
      }
      return ok ? 0 : 1;
    } else if (*conv) {
      auto g = io::read_path(trace_in);
      std::vector<SampledPath> ap;
      for (const auto& f : approx_in) ap.push_back(io::read_path(f));
      auto rep = driver_convergence_experiment(g, ap);
      if (!out_file.empty()) io::write_json(out_file, io::to_json(rep));
      out << "n,trace_distance,driver_distance,ok\n";
      for (std::size_t k = 0; k < ap.size(); ++k)
        out << k + 1 << ',' << rep.trace_distances[k] << ',' << rep.driver_distances[k] << ','
            << (rep.entry_ok[k] ? 1 : 0) << "\n";
      for (const auto& n : rep.notes) err << "note: " << n << "\n";
    } else if (*bt) {
      auto g = io::read_path(trace_in);
      if (reparam) g = reparametrize_by_hcap(g);
      auto p = boundary_time_profile(g, hs);
      io::json j{{"h", p.h}, {"measure", p.measure}, {"c", p.c}};
      if (!out_file.empty()) io::write_json(out_file, j);
      out << "h,measure\n";
      for (std::size_t k = 0; k < p.h.size(); ++k) out << p.h[k] << ',' << p.measure[k] << "\n";
      out << "max measure/h: " << p.c << "\n";
    } else if (*hcap) {
      io::json j;
      Region region;
      if (slit_h) {
        region = vertical_slit_region(0.0, *slit_h);
        j["exact"] = (*slit_h) * (*slit_h) / 2.0;
        j["series"] = hcap_series(HullChain{0.0, {SlitAtom{0.0, (*slit_h) * (*slit_h) / 4.0}}});
      } else if (disk_r) {
        region = half_disk_region(0.0, *disk_r);
        j["exact"] = (*disk_r) * (*disk_r);
      } else {
        HullChain c;
        if (!hcap_chain.empty()) c = io::chain_from_json(io::read_json(hcap_chain));
        else if (!trace_in.empty()) c = unzip(io::read_path(trace_in)).chain;
        else throw DomainError("hcap: give one of --chain, --trace, --slit, --half-disk");
        j["series"] = hcap_series(c);
        j["two_sum_dt"] = c.total_capacity();
        if (mc) region = chain_region(c);
      }
      if (mc) {
        McOptions mo;
        mo.samples = samples;
        mo.seed = seed;
        auto e = hcap_mc(region, mo);
        j["mc"] = {{"mean", e.mean}, {"std_error", e.std_error}, {"samples", e.samples},
                   {"launch_height", e.launch_height}};
        if (e.launch_warning) j["mc"]["warning"] = "launch height below 20 diameters";
      }
      if (!out_file.empty()) io::write_json(out_file, j);
      out << j.dump(1) << "\n";
    } else if (*gen) {
      auto xi = detail::generate_driver(kind, T_gen, n_gen, coef, seed);
      io::write_driver(or_default("driver.json"), xi);
      out << "gen-driver: " << kind << ", " << xi.size() << " knots\n";
    }
  } catch (const NotATraceError& e) {
    err << "not a trace: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace loewner::cli
