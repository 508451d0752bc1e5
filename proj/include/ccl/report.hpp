#pragma once

// Experiment report plumbing: config echo, per-replica rows, named summary
// statistics, and verdicts evaluated against [lo, hi] bands that arrive
// from fixture files, never from code. CSV and JSON emission is
// byte-deterministic ("%.17g" round-trip formatting, fixed key order).

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ccl/config.hpp"

namespace ccl {

struct SummaryStat {
  std::string name;
  double value = 0;
};

struct VerdictSpec {
  std::string name;  // must match a summary statistic
  double lo = 0;
  double hi = 0;
};

struct Verdict {
  std::string name;
  double value = 0;
  double lo = 0;
  double hi = 0;
  bool pass = false;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> config;  // echoed, ordered
  std::vector<std::string> columns;  // observable columns, between
                                     // replica_id and censored
  std::vector<std::vector<double>> rows;
  std::vector<uint8_t> censored;
  std::vector<SummaryStat> stats;
  std::vector<Verdict> verdicts;
  std::string ecdf_observable;      // which column the ECDF refers to
  std::vector<double> ecdf_points;  // sorted uncensored observables
  nlohmann::ordered_json extra;     // free-form summary blocks

  void add_config(const std::string& k, const std::string& v) {
    config.emplace_back(k, v);
  }
  void add_config_num(const std::string& k, double v);
  void add_stat(const std::string& name, double value) {
    stats.push_back({name, value});
  }
  bool has_stat(const std::string& name) const {
    for (const SummaryStat& s : stats)
      if (s.name == name) return true;
    return false;
  }
  double stat(const std::string& name) const {
    for (const SummaryStat& s : stats)
      if (s.name == name) return s.value;
    throw std::invalid_argument("report: no statistic named \"" + name +
                                "\"");
  }
  bool all_pass() const {
    for (const Verdict& v : verdicts)
      if (!v.pass) return false;
    return true;
  }
};

// Shortest exact decimal round-trip for doubles, stable across runs.
inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Prefer the shortest representation that round-trips, so integers and
  // short decimals stay readable.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[64];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    double back = 0;
    std::sscanf(probe, "%lf", &back);
    if (back == v) return probe;
  }
  return buf;
}

inline void ExperimentReport::add_config_num(const std::string& k, double v) {
  config.emplace_back(k, fmt_num(v));
}

// Evaluate [lo, hi] bands against named statistics.
inline void apply_verdicts(ExperimentReport& rep,
                           const std::vector<VerdictSpec>& specs) {
  for (const VerdictSpec& s : specs) {
    Verdict v;
    v.name = s.name;
    v.lo = s.lo;
    v.hi = s.hi;
    v.value = rep.stat(s.name);  // throws when the fixture names a
                                 // statistic the experiment does not emit
    v.pass = v.value >= s.lo && v.value <= s.hi;
    rep.verdicts.push_back(v);
  }
}

// Fixture files carry lines `verdict.<stat> = lo, hi`.
inline std::vector<VerdictSpec> verdict_specs_from(const Config& fixture) {
  std::vector<VerdictSpec> specs;
  for (const auto& [key, value] : fixture.items()) {
    if (key.rfind("verdict.", 0) != 0) continue;
    const std::string name = key.substr(8);
    std::istringstream in(value);
    double lo = 0, hi = 0;
    char comma = 0;
    if (!(in >> lo >> comma >> hi) || comma != ',')
      throw ConfigError(fixture.origin() + ": key \"" + key +
                        "\" must be \"lo, hi\"");
    if (lo > hi)
      throw ConfigError(fixture.origin() + ": key \"" + key +
                        "\" has lo > hi");
    specs.push_back({name, lo, hi});
  }
  return specs;
}

inline void write_csv(const ExperimentReport& rep, std::ostream& out) {
  out << "replica_id";
  for (const std::string& c : rep.columns) out << ',' << c;
  out << ",censored\n";
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    out << i;
    for (double v : rep.rows[i]) out << ',' << fmt_num(v);
    out << ',' << (rep.censored[i] ? 1 : 0) << '\n';
  }
}

inline std::string csv_string(const ExperimentReport& rep) {
  std::ostringstream out;
  write_csv(rep, out);
  return out.str();
}

inline nlohmann::ordered_json summary_json(const ExperimentReport& rep) {
  nlohmann::ordered_json j;
  j["experiment"] = rep.experiment;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : rep.config) cfg[k] = v;
  j["config"] = cfg;
  j["replicas"] = rep.rows.size();
  size_t ncens = 0;
  for (uint8_t c : rep.censored) ncens += c ? 1 : 0;
  j["censored"] = ncens;
  nlohmann::ordered_json st;
  for (const SummaryStat& s : rep.stats) st[s.name] = s.value;
  j["summary"] = st;
  if (!rep.ecdf_points.empty()) {
    j["ecdf_observable"] = rep.ecdf_observable;
    j["ecdf_points"] = rep.ecdf_points;
  }
  if (!rep.extra.is_null()) j["extra"] = rep.extra;
  nlohmann::ordered_json vs = nlohmann::ordered_json::array();
  for (const Verdict& v : rep.verdicts) {
    nlohmann::ordered_json one;
    one["name"] = v.name;
    one["value"] = v.value;
    one["lo"] = v.lo;
    one["hi"] = v.hi;
    one["pass"] = v.pass;
    vs.push_back(one);
  }
  j["verdicts"] = vs;
  j["all_pass"] = rep.all_pass();
  return j;
}

inline std::string json_string(const ExperimentReport& rep) {
  return summary_json(rep).dump(2) + "\n";
}

}  // namespace ccl
