// ccl: configuration-driven front end for the cylinder cover-time and
// interlacement experiments, plus an exact-oracle selftest.
//
// Exit codes: 0 all verdicts pass, 2 a verdict failed, 1 configuration or
// usage error.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccl/config.hpp"
#include "ccl/exact.hpp"
#include "ccl/excursions.hpp"
#include "ccl/experiments.hpp"
#include "ccl/green.hpp"
#include "ccl/interlace.hpp"
#include "ccl/report.hpp"
#include "ccl/stats.hpp"

namespace fs = std::filesystem;
using namespace ccl;

namespace {

CylinderSet parse_cylinder_sites(const CylinderGeom& geom,
                                 const std::string& shape) {
  if (shape == "zero-level") return level_set(geom, 0);
  if (shape.rfind("list:", 0) == 0) {
    CylinderSet F;
    std::string body = shape.substr(5);
    size_t start = 0;
    while (start < body.size()) {
      size_t semi = body.find(';', start);
      if (semi == std::string::npos) semi = body.size();
      const std::string group = body.substr(start, semi - start);
      std::vector<int64_t> coords;
      size_t gs = 0;
      while (gs <= group.size()) {
        size_t comma = group.find(',', gs);
        if (comma == std::string::npos) comma = group.size();
        coords.push_back(std::stoll(group.substr(gs, comma - gs)));
        gs = comma + 1;
      }
      if (static_cast<int>(coords.size()) != geom.d + 1)
        throw ConfigError("key \"F\": site needs " +
                          std::to_string(geom.d + 1) + " coordinates, got \"" +
                          group + "\"");
      CylinderPoint p{};
      for (int a = 0; a < geom.d; ++a)
        p.t[static_cast<size_t>(a)] =
            geom.wrap(static_cast<int32_t>(coords[static_cast<size_t>(a)]));
      p.z = coords.back();
      F.insert(p);
      start = semi + 1;
    }
    if (F.empty()) throw ConfigError("key \"F\": empty site list");
    return F;
  }
  throw ConfigError("key \"F\": unknown cylinder shape \"" + shape +
                    "\" (want zero-level or list:t...,z;...)");
}

LatticeSet parse_lattice_sites(int dim, const std::string& shape) {
  auto split_ints = [](const std::string& s, char sep) {
    std::vector<int64_t> out;
    size_t start = 0;
    while (start <= s.size()) {
      size_t p = s.find(sep, start);
      if (p == std::string::npos) p = s.size();
      out.push_back(std::stoll(s.substr(start, p - start)));
      start = p + 1;
    }
    return out;
  };
  if (shape.rfind("scattered:", 0) == 0) {
    const auto v = split_ints(shape.substr(10), ':');
    if (v.size() != 2)
      throw ConfigError("key \"F\": want scattered:<count>:<spacing>");
    return scattered_sites(static_cast<int>(v[0]), static_cast<int>(v[1]),
                           dim);
  }
  if (shape.rfind("box:", 0) == 0) {
    return lattice_box(split_ints(shape.substr(4), ','), dim);
  }
  if (shape.rfind("list:", 0) == 0) {
    LatticeSet F;
    const std::string body = shape.substr(5);
    size_t start = 0;
    while (start < body.size()) {
      size_t semi = body.find(';', start);
      if (semi == std::string::npos) semi = body.size();
      const auto coords = split_ints(body.substr(start, semi - start), ',');
      if (static_cast<int>(coords.size()) != dim)
        throw ConfigError("key \"F\": site needs " + std::to_string(dim) +
                          " coordinates");
      LatticePoint p{};
      for (int a = 0; a < dim; ++a)
        p.x[static_cast<size_t>(a)] = coords[static_cast<size_t>(a)];
      F.insert(p);
      start = semi + 1;
    }
    if (F.empty()) throw ConfigError("key \"F\": empty site list");
    return F;
  }
  throw ConfigError("key \"F\": unknown lattice shape \"" + shape +
                    "\" (want scattered:..., box:... or list:...)");
}

std::vector<VerdictSpec> load_verdicts(const Config& cfg,
                                       const std::string& config_path) {
  if (!cfg.has("tolerances")) return {};
  fs::path fixture(cfg.get_str("tolerances"));
  if (fixture.is_relative())
    fixture = fs::path(config_path).parent_path() / fixture;
  return verdict_specs_from(Config::load(fixture.string()));
}

ExperimentReport dispatch(const std::string& experiment, const Config& cfg,
                          uint64_t seed, int64_t replicas, int threads,
                          const std::vector<VerdictSpec>& verdicts) {
  if (experiment == "gumbel-cylinder") {
    GumbelCylinderParams p;
    p.N = static_cast<int>(cfg.get_i64("N"));
    p.d = static_cast<int>(cfg.get_i64("d", 2));
    p.f_label = cfg.get_str("F", "zero-level");
    p.F = parse_cylinder_sites(CylinderGeom(p.N, p.d), p.f_label);
    p.replicas = replicas;
    p.seed = seed;
    p.max_steps = static_cast<uint64_t>(
        cfg.get_i64("max_steps", 1'000'000'000));
    p.threads = threads;
    p.verdicts = verdicts;
    return run_gumbel_cylinder(std::move(p));
  }
  if (experiment == "cover-time-zeta") {
    CoverTimeZetaParams p;
    p.N = static_cast<int>(cfg.get_i64("N"));
    p.d = static_cast<int>(cfg.get_i64("d", 2));
    p.f_label = cfg.get_str("F", "zero-level");
    p.F = parse_cylinder_sites(CylinderGeom(p.N, p.d), p.f_label);
    p.replicas = replicas;
    p.seed = seed;
    p.max_steps = static_cast<uint64_t>(
        cfg.get_i64("max_steps", 2'000'000'000));
    p.threads = threads;
    p.verdicts = verdicts;
    return run_cover_time_zeta(std::move(p));
  }
  if (experiment == "point-process") {
    PointProcessParams p;
    p.N = static_cast<int>(cfg.get_i64("N"));
    p.d = static_cast<int>(cfg.get_i64("d", 2));
    if (cfg.has("z_grid")) p.z_grid = cfg.get_f64_list("z_grid");
    p.replicas = replicas;
    p.seed = seed;
    p.max_steps = static_cast<uint64_t>(
        cfg.get_i64("max_steps", 1'000'000'000));
    p.threads = threads;
    p.verdicts = verdicts;
    return run_point_process(std::move(p));
  }
  if (experiment == "last-k-separation") {
    LastKParams p;
    p.N = static_cast<int>(cfg.get_i64("N"));
    p.d = static_cast<int>(cfg.get_i64("d", 2));
    p.k = static_cast<int>(cfg.get_i64("k", 2));
    p.replicas = replicas;
    p.seed = seed;
    p.max_steps = static_cast<uint64_t>(
        cfg.get_i64("max_steps", 1'000'000'000));
    p.threads = threads;
    p.verdicts = verdicts;
    return run_last_k_separation(std::move(p));
  }
  if (experiment == "gumbel-interlacement") {
    GumbelInterlacementParams p;
    p.ambient_dim = static_cast<int>(cfg.get_i64("ambient_dim", 3));
    p.f_label = cfg.get_str("F", "scattered:64:10");
    p.F = parse_lattice_sites(p.ambient_dim, p.f_label);
    p.replicas = replicas;
    p.seed = seed;
    p.trunc.eps = cfg.get_f64("trunc_eps", p.trunc.eps);
    p.trunc.max_radius = cfg.get_i64("trunc_max_radius", p.trunc.max_radius);
    if (cfg.has("z_grid")) p.z_grid = cfg.get_f64_list("z_grid");
    p.threads = threads;
    p.verdicts = verdicts;
    return run_gumbel_interlacement(std::move(p));
  }
  throw ConfigError(
      "unknown experiment \"" + experiment +
      "\" (want gumbel-cylinder, cover-time-zeta, point-process, "
      "last-k-separation or gumbel-interlacement)");
}

int cmd_run(const std::string& experiment_flag, const std::string& config_path,
            uint64_t seed, const std::string& out_dir,
            int64_t replicas_override, int threads_flag) {
  const Config cfg = Config::load(config_path);
  const std::string experiment = !experiment_flag.empty()
                                     ? experiment_flag
                                     : cfg.get_str("experiment");
  const int64_t replicas = replicas_override > 0
                               ? replicas_override
                               : cfg.get_i64("replicas");
  const int threads =
      threads_flag > 0
          ? threads_flag
          : (cfg.has("threads")
                 ? resolve_threads(static_cast<int>(cfg.get_i64("threads")))
                 : resolve_threads(0));
  const std::vector<VerdictSpec> verdicts = load_verdicts(cfg, config_path);

  ExperimentReport rep =
      dispatch(experiment, cfg, seed, replicas, threads, verdicts);

  fs::create_directories(out_dir);
  const std::string stem = fs::path(config_path).stem().string();
  const fs::path csv_path = fs::path(out_dir) / (stem + ".csv");
  const fs::path json_path = fs::path(out_dir) / (stem + ".json");
  {
    std::ofstream csv(csv_path);
    if (!csv) throw ConfigError("cannot write " + csv_path.string());
    write_csv(rep, csv);
  }
  {
    std::ofstream js(json_path);
    if (!js) throw ConfigError("cannot write " + json_path.string());
    js << json_string(rep);
  }

  std::printf("experiment %s: %zu replicas, %zu censored\n",
              rep.experiment.c_str(), rep.rows.size(),
              static_cast<size_t>(rep.stat("censored_count")));
  for (const SummaryStat& s : rep.stats)
    std::printf("  stat %-24s %.6g\n", s.name.c_str(), s.value);
  for (const Verdict& v : rep.verdicts)
    std::printf("  verdict %-21s %.6g in [%.6g, %.6g] %s\n", v.name.c_str(),
                v.value, v.lo, v.hi, v.pass ? "PASS" : "FAIL");
  std::printf("wrote %s and %s\n", csv_path.string().c_str(),
              json_path.string().c_str());
  return rep.all_pass() ? 0 : 2;
}

struct SelftestRow {
  std::string name;
  double value = 0;
  double limit = 0;
  bool pass = false;
};

// Bundled exact-oracle checks: entrance-law identity residuals by linear
// solves, Green harmonicity, capacity closed forms, the slab-diagonal
// cross-check, and closed-form CDF spot values. --fault-inject-g0 corrupts
// g(0) by 1% inside the capacity comparisons; the cross-check must then
// fail, demonstrating the suite's sensitivity.
int cmd_selftest(bool fault_g0) {
  std::vector<SelftestRow> rows;
  const auto check = [&rows](const std::string& name, double value,
                             double limit) {
    rows.push_back({name, value, limit, value <= limit});
  };

  for (int N : {4, 6, 8}) {
    const CylinderGeom geom(N, 2);
    auto at = [&](int64_t t0, int64_t t1, int64_t z) {
      CylinderPoint p{};
      p.t[0] = geom.wrap(static_cast<int32_t>(t0));
      p.t[1] = geom.wrap(static_cast<int32_t>(t1));
      p.z = z;
      return p;
    };
    std::vector<CylinderSet> sets(5);
    sets[0].insert(at(0, 0, 0));
    sets[1].insert(at(0, 0, 0));
    sets[1].insert(at(1, 0, 0));
    sets[2].insert(at(0, 0, -2));
    sets[2].insert(at(0, 0, 2));
    sets[3].insert(at(0, 0, 0));
    sets[3].insert(at(1, 0, 0));
    sets[3].insert(at(0, 1, 0));
    sets[3].insert(at(1, 1, 0));
    sets[4].insert(at(0, 0, 0));
    sets[4].insert(at(1, 0, 1));
    sets[4].insert(at(0, 1, -1));
    for (size_t s = 0; s < sets.size(); ++s) {
      char name[64];
      std::snprintf(name, sizeof(name), "entrance_law N=%d set=%zu", N,
                    s + 1);
      check(name, entrance_law_residual(sets[s], N, 2), 1e-8);
    }
  }

  const GreenEvaluator& ev = green_evaluator(3);
  {
    auto lat = [](int64_t a, int64_t b, int64_t c) {
      LatticePoint p{};
      p.x[0] = a;
      p.x[1] = b;
      p.x[2] = c;
      return p;
    };
    auto laplacian = [&](const LatticePoint& x) {
      double s = 0;
      for (int ax = 0; ax < 3; ++ax)
        for (int sg : {-1, 1}) {
          LatticePoint y = x;
          y.x[static_cast<size_t>(ax)] += sg;
          s += ev(y);
        }
      return ev(x) - s / 6.0;
    };
    check("green harmonicity at origin", std::abs(laplacian(lat(0, 0, 0)) - 1.0),
          1e-6);
    check("green harmonicity at e1", std::abs(laplacian(lat(1, 0, 0))), 1e-6);
    check("green harmonicity at (1,1,0)", std::abs(laplacian(lat(1, 1, 0))),
          1e-6);

    // Capacity closed forms; a 1% fault in g(0) must trip these.
    const double g0 = ev.g0() * (fault_g0 ? 1.01 : 1.0);
    LatticeSet origin;
    origin.insert(lat(0, 0, 0));
    check("capacity singleton vs 1/g(0)",
          std::abs(capacity_zd(origin, 2) - 1.0 / g0), 4e-6);
    for (int64_t sep : {1, 2}) {
      LatticeSet pairset;
      pairset.insert(lat(0, 0, 0));
      pairset.insert(lat(sep, 0, 0));
      const double expect = 2.0 / (g0 + ev(lat(sep, 0, 0)));
      char name[64];
      std::snprintf(name, sizeof(name), "capacity pair sep=%lld",
                    static_cast<long long>(sep));
      check(name, std::abs(capacity_zd(pairset, 2) - expect), 4e-6);
    }
  }

  {
    // Slab Green diagonal: torus mode sum vs the dense killed solve.
    const SlabWindow w = make_slab_window(4, 2);
    const CylinderKilledGreen sys = killed_green(w.sites, w.geom);
    const CylinderPoint a = w.geom.from_torus_index(0, 0);
    check("slab diagonal mode-sum vs solve",
          std::abs(sys.green(a, a) - slab_center_green_diag(4, 2)), 1e-8);
  }

  check("gumbel_cdf(0) vs 1/e",
        std::abs(stats::gumbel_cdf(0.0) - std::exp(-1.0)), 1e-15);
  check("zeta_cdf(1,1) vs 2(1-Phi(1))",
        std::abs(stats::zeta_cdf(1.0, 1.0) - 0.31731050786291415), 1e-10);
  {
    double worst = 0;
    for (int i = 1; i <= 100; ++i) {
      const double z = 0.07 * i;
      worst = std::max(worst, std::abs(stats::zeta_cdf(z, 2.0) -
                                       stats::zeta_cdf(z / 4.0, 1.0)));
    }
    check("zeta scaling identity", worst, 1e-12);
  }

  bool all = true;
  std::printf("%-34s %13s %10s  %s\n", "check", "residual", "limit", "result");
  for (const SelftestRow& r : rows) {
    all = all && r.pass;
    std::printf("%-34s %13.3e %10.0e  %s\n", r.name.c_str(), r.value, r.limit,
                r.pass ? "PASS" : "FAIL");
  }
  std::printf("selftest: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cylinder cover-time and interlacement laboratory"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a config");
  std::string experiment, config_path, out_dir;
  uint64_t seed = 0;
  int64_t replicas_override = 0;
  int threads_flag = 0;
  run->add_option("--experiment", experiment,
                  "experiment name (else the config's experiment key)");
  run->add_option("--config", config_path, "key = value config file")
      ->required();
  run->add_option("--seed", seed, "master RNG seed (mandatory)")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--replicas", replicas_override, "override replica count");
  run->add_option("--threads", threads_flag,
                  "worker threads (else CCL_THREADS, else 1)");

  auto* st = app.add_subcommand("selftest", "run the exact-oracle suite");
  bool fault_g0 = false;
  st->add_flag("--fault-inject-g0", fault_g0,
               "corrupt g(0) by 1% to demonstrate sensitivity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (st->parsed()) return cmd_selftest(fault_g0);
    return cmd_run(experiment, config_path, seed, out_dir, replicas_override,
                   threads_flag);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  }
}
