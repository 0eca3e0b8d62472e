#pragma once

// JSON and CSV formats for paths, drivers and chains. Doubles are written in
// shortest round-trip form, so a write/read cycle is exact.

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "loewner/analysis.hpp"
#include "loewner/approx.hpp"
#include "loewner/core.hpp"
#include "loewner/errors.hpp"

namespace loewner::io {

using nlohmann::json;

inline Parametrisation parse_parametrisation(const std::string& s) {
  if (s == "capacity") return Parametrisation::capacity;
  if (s == "arbitrary") return Parametrisation::arbitrary;
  throw DomainError("unknown parametrisation '" + s + "'");
}

inline Interpolation parse_interpolation(const std::string& s) {
  if (s == "linear") return Interpolation::linear;
  if (s == "sqrt") return Interpolation::sqrt;
  throw DomainError("unknown interpolation '" + s + "'");
}

inline json to_json(const SampledPath& p) {
  json re = json::array(), im = json::array();
  for (const HPoint& h : p.points()) {
    re.push_back(h.re());
    im.push_back(h.im());
  }
  return {{"times", std::vector<double>(p.times().begin(), p.times().end())},
          {"re", std::move(re)},
          {"im", std::move(im)},
          {"parametrisation", to_string(p.parametrisation())},
          {"number_format", "binary64"}};
}

inline json to_json(const DrivingFunction& xi) {
  return {{"times", std::vector<double>(xi.times().begin(), xi.times().end())},
          {"values", std::vector<double>(xi.values().begin(), xi.values().end())},
          {"interpolation", to_string(xi.interpolation())},
          {"number_format", "binary64"}};
}

inline json to_json(const HullChain& c) {
  json atoms = json::array();
  for (const SlitAtom& a : c.atoms) atoms.push_back({{"base", a.base}, {"dt", a.dt}});
  return {{"t0", c.t0}, {"atoms", std::move(atoms)}};
}

inline json to_json(const ConvergenceReport& r) {
  json d = json::array(), x = json::array();
  for (double v : r.trace_distances) d.push_back(v);
  for (double v : r.driver_distances) {
    if (std::isfinite(v)) x.push_back(v);
    else x.push_back(nullptr);
  }
  return {{"trace_distances", std::move(d)},
          {"driver_distances", std::move(x)},
          {"entry_ok", std::vector<bool>(r.entry_ok.begin(), r.entry_ok.end())},
          {"metadata", r.metadata},
          {"notes", r.notes}};
}

inline json to_json(const CutSchedule& s) {
  return {{"cut_times", s.cut_times},   {"capacities", s.capacities},
          {"stretched", s.stretched},   {"halvings", s.halvings},
          {"stage_distance", s.stage_distance}, {"own_gap", s.own_gap},
          {"final_gap", s.final_gap},   {"total", s.total()},
          {"warnings", s.warnings}};
}

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw DomainError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::vector<double> numbers(const json& j, const char* key) {
  const json& a = field(j, key);
  if (!a.is_array()) throw DomainError(std::string("field '") + key + "' is not an array");
  std::vector<double> v;
  v.reserve(a.size());
  for (const json& x : a) {
    if (!x.is_number()) throw DomainError(std::string("field '") + key + "' has a non-number");
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace detail

inline SampledPath path_from_json(const json& j) {
  auto t = detail::numbers(j, "times");
  auto re = detail::numbers(j, "re");
  auto im = detail::numbers(j, "im");
  if (re.size() != t.size() || im.size() != t.size())
    throw DomainError("path JSON: times, re and im differ in length");
  Parametrisation tag = Parametrisation::arbitrary;
  if (j.contains("parametrisation"))
    tag = parse_parametrisation(j.at("parametrisation").get<std::string>());
  std::vector<HPoint> pts;
  pts.reserve(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) pts.emplace_back(re[k], im[k]);
  return SampledPath(std::move(t), std::move(pts), tag);
}

inline DrivingFunction driver_from_json(const json& j) {
  Interpolation in = Interpolation::linear;
  if (j.contains("interpolation"))
    in = parse_interpolation(j.at("interpolation").get<std::string>());
  return DrivingFunction(detail::numbers(j, "times"), detail::numbers(j, "values"), in);
}

inline HullChain chain_from_json(const json& j) {
  HullChain c;
  if (j.contains("t0")) c.t0 = j.at("t0").get<double>();
  for (const json& a : detail::field(j, "atoms"))
    c.atoms.emplace_back(detail::field(a, "base").get<double>(),
                         detail::field(a, "dt").get<double>());
  return c;
}

// ---------------------------------------------------------------------------
// CSV

inline void append_number(std::string& out, double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

inline std::string path_to_csv(const SampledPath& p) {
  std::string s = "t,re,im\n";
  for (std::size_t k = 0; k < p.size(); ++k) {
    append_number(s, p.time(k));
    s += ',';
    append_number(s, p.points()[k].re());
    s += ',';
    append_number(s, p.points()[k].im());
    s += '\n';
  }
  return s;
}

inline std::string driver_to_csv(const DrivingFunction& xi) {
  std::string s = "t,xi\n";
  for (std::size_t k = 0; k < xi.size(); ++k) {
    append_number(s, xi.times()[k]);
    s += ',';
    append_number(s, xi.values()[k]);
    s += '\n';
  }
  return s;
}

namespace detail {

inline std::vector<std::vector<double>> csv_rows(const std::string& text, const std::string& header,
                                                 std::size_t cols) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DomainError("CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw DomainError("CSV: expected header '" + header + "'");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p <= end) {
      double v = 0.0;
      auto r = std::from_chars(p, end, v);
      if (r.ec != std::errc()) throw DomainError("CSV: bad number in '" + line + "'");
      row.push_back(v);
      p = r.ptr;
      if (p == end) break;
      if (*p != ',') throw DomainError("CSV: bad separator in '" + line + "'");
      ++p;
    }
    if (row.size() != cols) throw DomainError("CSV: wrong column count in '" + line + "'");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline SampledPath path_from_csv(const std::string& text,
                                 Parametrisation tag = Parametrisation::arbitrary) {
  std::vector<double> t;
  std::vector<HPoint> pts;
  for (auto& r : detail::csv_rows(text, "t,re,im", 3)) {
    t.push_back(r[0]);
    pts.emplace_back(r[1], r[2]);
  }
  return SampledPath(std::move(t), std::move(pts), tag);
}

inline DrivingFunction driver_from_csv(const std::string& text,
                                       Interpolation in = Interpolation::linear) {
  std::vector<double> t, v;
  for (auto& r : detail::csv_rows(text, "t,xi", 2)) {
    t.push_back(r[0]);
    v.push_back(r[1]);
  }
  return DrivingFunction(std::move(t), std::move(v), in);
}

// ---------------------------------------------------------------------------
// Files. A ".csv" extension selects CSV, anything else JSON.

inline bool is_csv(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + path + "'");
  f << text;
  if (!f) throw DomainError("write to '" + path + "' failed");
}

inline json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw DomainError("'" + path + "': " + e.what());
  }
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

inline SampledPath read_path(const std::string& path) {
  if (is_csv(path)) return path_from_csv(read_text(path));
  try {
    return path_from_json(read_json(path));
  } catch (const json::exception& e) {
    throw DomainError("'" + path + "': " + e.what());
  }
}

inline DrivingFunction read_driver(const std::string& path) {
  if (is_csv(path)) return driver_from_csv(read_text(path));
  try {
    return driver_from_json(read_json(path));
  } catch (const json::exception& e) {
    throw DomainError("'" + path + "': " + e.what());
  }
}

inline void write_path(const std::string& path, const SampledPath& p) {
  if (is_csv(path)) write_text(path, path_to_csv(p));
  else write_json(path, to_json(p));
}

inline void write_driver(const std::string& path, const DrivingFunction& xi) {
  if (is_csv(path)) write_text(path, driver_to_csv(xi));
  else write_json(path, to_json(xi));
}

}  // namespace loewner::io
