#pragma once

// Batch orchestration behind the `gbc` tool: run configuration, the INI
// reader, and the JSON / CSV report writers.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbc/mass.hpp"
#include "gbc/metric.hpp"
#include "gbc/verify.hpp"

namespace gbc::cli {

using Json = nlohmann::ordered_json;

struct RadiusSchedule {
  double r0 = 10.0;
  double factor = 2.0;
  int count = 6;
};

/// Every field has a default; see the README for the file layout.
struct RunConfig {
  std::string command = "mass";
  std::string metric = "schwarzschild_isotropic";
  int n = 3;
  std::vector<int> k = {1};
  ParamMap params;
  RadiusSchedule radii;
  bool radii_set = false;  ///< verify uses its own slope radii unless this is set
  int quad_degree = 24;
  bool quad_degree_set = false;  ///< verify uses its own lighter degree unless this is set
  double fd_step = 0.0;  ///< relative step; 0 = per-check default
  std::string out = "gbc_report";
  std::string format = "both";
  std::vector<std::string> checks = {"all"};
  std::uint64_t seed = 0;
  bool two_term = false;
  int points = 100;
  int fd_points = 3;
};

// --- parsing helpers ---------------------------------------------------------

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ContractViolation("invalid number '" + s + "' for " + what);
  return v;
}

inline long long parse_int(const std::string& s, const std::string& what) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ContractViolation("invalid integer '" + s + "' for " + what);
  return v;
}

inline std::vector<int> parse_k_list(const std::string& s) {
  std::vector<int> ks;
  for (const auto& part : split(s, ','))
    if (!part.empty()) ks.push_back(static_cast<int>(parse_int(part, "k")));
  if (ks.empty()) throw ContractViolation("k list is empty");
  return ks;
}

inline RadiusSchedule parse_radii(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 3 || parts[0].empty()) throw ContractViolation("radii must be r0,factor,count");
  RadiusSchedule r{parse_double(parts[0], "radii r0"), parse_double(parts[1], "radii factor"),
                   static_cast<int>(parse_int(parts[2], "radii count"))};
  if (!(r.r0 > 0.0) || !(r.factor > 1.0) || r.count < 1)
    throw ContractViolation("radius schedule needs r0 > 0, factor > 1, count >= 1");
  return r;
}

inline std::pair<std::string, double> parse_param(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ContractViolation("parameter must be key=value: '" + kv + "'");
  const std::string key = trim(kv.substr(0, eq));
  return {key, parse_double(trim(kv.substr(eq + 1)), "parameter " + key)};
}

/// Applies one `key = value` setting from section `section` of a config file.
inline void apply_setting(RunConfig& c, const std::string& section, const std::string& key,
                          const std::string& value) {
  const std::string full = section.empty() ? key : section + "." + key;
  if (section == "params") {
    c.params[key] = parse_double(value, "parameter " + key);
    return;
  }
  if (section == "run" && key == "command") c.command = value;
  else if (section == "run" && key == "out") c.out = value;
  else if (section == "run" && key == "format") c.format = value;
  else if (section == "run" && key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (section == "metric" && key == "family") c.metric = value;
  else if (section == "metric" && key == "n") c.n = static_cast<int>(parse_int(value, key));
  else if (section == "mass" && key == "k") c.k = parse_k_list(value);
  else if (section == "mass" && key == "radii") {
    c.radii = parse_radii(value);
    c.radii_set = true;
  } else if (section == "mass" && key == "quad_degree") {
    c.quad_degree = static_cast<int>(parse_int(value, key));
    c.quad_degree_set = true;
  }
  else if (section == "mass" && key == "two_term") c.two_term = (value == "true" || value == "1");
  else if (section == "verify" && key == "checks") c.checks = split(value, ',');
  else if (section == "verify" && key == "fd_step") c.fd_step = parse_double(value, key);
  else if (section == "verify" && key == "points") c.points = static_cast<int>(parse_int(value, key));
  else if (section == "verify" && key == "fd_points") c.fd_points = static_cast<int>(parse_int(value, key));
  else
    throw ContractViolation("unknown configuration key '" + full + "'");
}

/// Reads an INI-style file: [section] headers, `key = value` lines, '#' or ';'
/// comments. Unknown sections and keys are rejected by name.
inline void load_ini(RunConfig& c, std::istream& in, const std::string& origin = "config") {
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ContractViolation(origin + ":" + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "run" && section != "metric" && section != "params" && section != "mass" &&
          section != "verify")
        throw ContractViolation("unknown configuration section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ContractViolation(origin + ":" + std::to_string(lineno) + ": expected key = value");
    apply_setting(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void load_ini_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open config file '" + path + "'");
  load_ini(c, in, path);
}

/// Checks cross-field constraints; the family itself validates its parameters.
inline void validate(const RunConfig& c) {
  if (c.command != "mass" && c.command != "convergence" && c.command != "verify")
    throw ContractViolation("command must be mass, convergence or verify");
  if (c.format != "json" && c.format != "csv" && c.format != "both")
    throw ContractViolation("format must be json, csv or both");
  if (c.n < 2 || c.n > kMaxFormDim) throw ContractViolation("n must lie in [2, " + std::to_string(kMaxFormDim) + "]");
  if (c.quad_degree < 0) throw ContractViolation("quadrature degree must be nonnegative");
  if (c.radii.count < 1) throw ContractViolation("radius list is empty");
  for (int k : c.k)
    if (k < 1 || 2 * k >= c.n)
      throw ContractViolation("invalid (n, k) = (" + std::to_string(c.n) + ", " + std::to_string(k) +
                              "): need 1 <= k and 2k < n");
  if (c.command != "verify" && c.radii.count < 4)
    throw ContractViolation("mass extrapolation needs at least 4 radii");
}

/// The family with the run seed forwarded to random_af unless given explicitly.
inline MetricFamily family_for(const RunConfig& c) {
  ParamMap p = c.params;
  if (c.metric == "random_af" && !p.count("seed")) p["seed"] = static_cast<double>(c.seed);
  return make_family(c.metric, c.n, p);
}

// --- number formatting -------------------------------------------------------

/// 17 significant digits, '.' decimal point regardless of locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, p);
}

inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json config_json(const RunConfig& c, const MetricFamily& f, int k) {
  Json j;
  j["command"] = c.command;
  j["metric"] = c.metric;
  j["n"] = c.n;
  j["k"] = k;
  Json params = Json::object();
  for (const auto& [key, v] : f.params()) params[key] = number(v);
  j["params"] = params;
  j["tau"] = f.decay_tau() ? number(*f.decay_tau()) : Json(nullptr);
  j["radii"] = {{"r0", c.radii.r0}, {"factor", c.radii.factor}, {"count", c.radii.count}};
  j["quad_degree"] = c.quad_degree;
  j["fd_step"] = c.fd_step;
  j["two_term"] = c.two_term;
  j["seed"] = c.seed;
  return j;
}

inline Json report_json(const RunConfig& c, const MetricFamily& f, const MassReport& rep) {
  Json j;
  j["config"] = config_json(c, f, rep.k);
  Json rows = Json::array();
  for (std::size_t i = 0; i < rep.radii.size(); ++i) {
    Json row;
    row["r"] = rep.radii[i];
    for (const auto& name : mass_names())
      row[name] = rep.has(name) ? number(rep.partial.at(name)[i]) : Json(nullptr);
    rows.push_back(row);
  }
  j["per_radius"] = rows;
  Json limits, exps, free_limits, residuals;
  for (const auto& name : mass_names()) {
    const bool has = rep.has(name);
    limits[name] = has ? number(rep.fit.at(name).limit) : Json(nullptr);
    exps[name] = has ? number(rep.fit_free.at(name).exponent) : Json(nullptr);
    free_limits[name] = has ? number(rep.fit_free.at(name).limit) : Json(nullptr);
    residuals[name] = has ? number(rep.fit.at(name).residual) : Json(nullptr);
  }
  j["limits"] = limits;
  j["exponents"] = exps;
  j["limits_free_fit"] = free_limits;
  j["fit_residuals"] = residuals;
  Json ladder = Json::array();
  for (double p : rep.ladder) ladder.push_back(p);
  j["ladder_exponents"] = ladder;
  Json disc;
  for (const auto& [name, d] : rep.discrepancies)
    disc[name] = {{"absolute", number(d.absolute)}, {"relative", number(d.relative)}, {"pass", d.pass}};
  j["discrepancies"] = disc;
  Json warns = Json::array();
  for (const auto& w : rep.warnings) warns.push_back(w);
  j["warnings"] = warns;
  return j;
}

inline void write_report_csv(std::ostream& os, const MassReport& rep) {
  os << "r,m_GBC_partial,m_Ik_partial,m_kC_partial,adm_partial,omega_starq_partial\n";
  const std::array<const char*, 5> order = {"gbc", "intrinsic", "chern", "adm", "omega_starq"};
  for (std::size_t i = 0; i < rep.radii.size(); ++i) {
    os << format_double(rep.radii[i]);
    for (const char* name : order) {
      os << ',';
      if (rep.has(name)) os << format_double(rep.partial.at(name)[i]);
    }
    os << '\n';
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GeometryError("cannot write '" + path + "'");
  out << text;
}

inline std::string dump_json(const Json& j) {
  // nlohmann prints the shortest round-trip representation of each double.
  return j.dump(2) + "\n";
}

// --- commands ----------------------------------------------------------------

inline std::vector<double> radii_of(const RunConfig& c) {
  return geometric_radii(c.radii.r0, c.radii.factor, c.radii.count);
}

inline void print_summary(std::ostream& log, const MassReport& rep) {
  log << "k = " << rep.k << "\n";
  for (const auto& name : mass_names()) {
    if (!rep.has(name)) continue;
    log << "  " << name << " limit " << format_double(rep.fit.at(name).limit) << "  (free-fit exponent "
        << format_double(rep.fit_free.at(name).exponent) << ")\n";
  }
  for (const auto& [name, d] : rep.discrepancies)
    log << "  " << name << " abs " << format_double(d.absolute) << " rel " << format_double(d.relative)
        << (d.pass ? " ok" : " MISMATCH") << "\n";
  for (const auto& w : rep.warnings) log << "  warning: " << w << "\n";
}

/// Runs mass_all for every k and writes `<out>_k<k>.json` / `.csv`.
inline int run_mass(const RunConfig& c, std::ostream& log = std::cout) {
  validate(c);
  const MetricFamily f = family_for(c);
  if (!f.asymptotically_flat()) throw ContractViolation("mass needs an asymptotically flat family");
  const SphereQuadrature quad(c.n, c.quad_degree);
  const auto radii = radii_of(c);
  for (int k : c.k) {
    MassOptions opt;
    opt.two_term = c.two_term;
    const MassReport rep = mass_all(f, k, quad, radii, opt);
    const std::string stem = c.out + "_k" + std::to_string(k);
    if (c.format != "csv") write_text(stem + ".json", dump_json(report_json(c, f, rep)));
    if (c.format != "json") {
      std::ostringstream os;
      write_report_csv(os, rep);
      write_text(stem + ".csv", os.str());
    }
    print_summary(log, rep);
  }
  return 0;
}

/// Per-radius table with distances to the limits, local slopes, and the
/// Chern-form remainder along a fixed ray.
inline int run_convergence(const RunConfig& c, std::ostream& log = std::cout) {
  validate(c);
  const MetricFamily f = family_for(c);
  if (!f.asymptotically_flat()) throw ContractViolation("convergence needs an asymptotically flat family");
  const SphereQuadrature quad(c.n, c.quad_degree);
  const auto radii = radii_of(c);
  std::mt19937_64 rng(c.seed + 11);
  const auto u = detail::random_direction(c.n, rng);
  for (int k : c.k) {
    MassOptions opt;
    opt.two_term = c.two_term;
    const MassReport rep = mass_all(f, k, quad, radii, opt);
    std::vector<double> rem;
    for (double r : radii) {
      std::vector<double> x(u);
      for (double& v : x) v *= r;
      rem.push_back(chern_remainder_residual(f, k, x, (c.fd_step > 0.0 ? c.fd_step : 0.02) * r));
    }
    std::ostringstream os;
    os << "r";
    for (const auto& name : mass_names())
      if (rep.has(name)) os << ',' << name << "_partial," << name << "_minus_limit," << name << "_local_slope";
    os << ",chern_remainder_residual,chern_remainder_local_slope\n";
    auto local_slope = [&](const std::vector<double>& v, std::size_t i) -> std::string {
      if (i == 0 || !(v[i] != 0.0) || !(v[i - 1] != 0.0)) return "";
      return format_double(std::log(std::abs(v[i] / v[i - 1])) / std::log(radii[i] / radii[i - 1]));
    };
    std::map<std::string, std::vector<double>> delta;
    for (const auto& [name, vals] : rep.partial)
      for (double v : vals) delta[name].push_back(v - rep.fit.at(name).limit);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      os << format_double(radii[i]);
      for (const auto& name : mass_names())
        if (rep.has(name))
          os << ',' << format_double(rep.partial.at(name)[i]) << ',' << format_double(delta[name][i]) << ','
             << local_slope(delta[name], i);
      os << ',' << format_double(rem[i]) << ',' << local_slope(rem, i) << '\n';
    }
    const std::string stem = c.out + "_convergence_k" + std::to_string(k);
    if (c.format != "json") write_text(stem + ".csv", os.str());
    if (c.format != "csv") {
      Json j = report_json(c, f, rep);
      Json rj = Json::array();
      for (double v : rem) rj.push_back(number(v));
      j["chern_remainder_residual"] = rj;
      j["chern_remainder_expected_slope"] = number(-((k + 1) * *f.decay_tau() + 2.0 * k));
      write_text(stem + ".json", dump_json(j));
    }
    print_summary(log, rep);
    log << "  chern remainder expected slope " << format_double(-((k + 1) * *f.decay_tau() + 2.0 * k)) << "\n";
  }
  return 0;
}

inline VerifyConfig verify_config(const RunConfig& c, int k) {
  VerifyConfig v;
  v.k = k;
  v.points = c.points;
  v.fd_points = c.fd_points;
  v.seed = c.seed;
  v.fd_step = c.fd_step;
  if (c.quad_degree_set) v.quad_degree = c.quad_degree;
  if (c.radii_set) {
    v.slope_radii = radii_of(c);
    v.mass_radii = radii_of(c);
  }
  return v;
}

/// Runs the named checks for every k; exit status 1 iff any check fails.
inline int run_verify(const RunConfig& c, std::ostream& log = std::cout) {
  validate(c);
  const auto names = resolve_checks(c.checks);
  const MetricFamily f = family_for(c);
  bool failed = false;
  std::ostringstream csv;
  csv << "k,name,status,measured,threshold,detail\n";
  Json rows = Json::array();
  for (int k : c.k) {
    const VerifyConfig vc = verify_config(c, k);
    for (const auto& name : names) {
      const CheckResult r = run_check(name, f, vc);
      failed = failed || r.status == CheckStatus::fail;
      log << "k=" << k << "  " << r.name << std::string(r.name.size() < 20 ? 20 - r.name.size() : 1, ' ')
          << status_name(r.status) << "  measured " << format_double(r.measured) << "  threshold "
          << format_double(r.threshold) << "  " << r.detail << "\n";
      std::string detail = r.detail;
      for (char& ch : detail)
        if (ch == ',') ch = ';';
      csv << k << ',' << r.name << ',' << status_name(r.status) << ',' << format_double(r.measured) << ','
          << format_double(r.threshold) << ',' << detail << '\n';
      rows.push_back({{"k", k},
                      {"name", r.name},
                      {"status", status_name(r.status)},
                      {"measured", number(r.measured)},
                      {"threshold", number(r.threshold)},
                      {"detail", r.detail}});
    }
  }
  if (c.format != "json") write_text(c.out + "_verify.csv", csv.str());
  if (c.format != "csv") {
    Json j;
    j["config"] = config_json(c, f, c.k.front());
    j["config"]["checks"] = names;
    j["config"]["quad_degree"] = verify_config(c, c.k.front()).quad_degree;
    j["checks"] = rows;
    write_text(c.out + "_verify.json", dump_json(j));
  }
  return failed ? 1 : 0;
}

inline int run(const RunConfig& c, std::ostream& log = std::cout) {
  if (c.command == "mass") return run_mass(c, log);
  if (c.command == "convergence") return run_convergence(c, log);
  if (c.command == "verify") return run_verify(c, log);
  throw ContractViolation("command must be mass, convergence or verify");
}

}  // namespace gbc::cli
