#include "gkdv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"

#include "gkdv/diagnostics.hpp"
#include "gkdv/error.hpp"
#include "gkdv/gauge.hpp"
#include "gkdv/parallel.hpp"
#include "gkdv/random.hpp"

namespace gkdv::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError("missing required key: " + path);
  }
  return obj.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError("expected a number at " + path);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("non-finite value at " + path);
  return d;
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError("expected an integer at " + path);
  return v.get<int>();
}

std::vector<double> as_number_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError("expected an array at " + path);
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<ModeSpec> as_modes(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError("expected an array of [k, re, im] at " + path);
  std::vector<ModeSpec> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != 3) throw ConfigError("expected [k, re, im] at " + p);
    const int k = as_int(v[i][0], p + "[0]");
    if (k == 0) throw ConfigError("mode k = 0 is not allowed (mean-zero) at " + p);
    out.push_back({k, as_number(v[i][1], p + "[1]"), as_number(v[i][2], p + "[2]")});
  }
  return out;
}

template <class T, class Get>
void optional_key(const json& obj, const char* key, const std::string& path, T& target, Get get) {
  if (obj.is_object() && obj.contains(key)) target = get(obj.at(key), path);
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError("expected a string at " + path);
  return v.get<std::string>();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string column_suffix(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void set_modes(SpectralField& u, const std::vector<ModeSpec>& modes) {
  for (const auto& m : modes) {
    if (std::abs(m.k) > u.n()) {
      throw ConfigError("mode k=" + std::to_string(m.k) + " exceeds grid bandwidth N=" +
                        std::to_string(u.n()));
    }
    u.set_mode(m.k, Complex(m.re, m.im));
  }
}

SpectralField random_smooth_field(const Grid& grid, int modes, double h1, std::uint64_t seed) {
  SplitMix64 rng(seed);
  SpectralField u(grid);
  for (int k = 1; k <= std::min(modes, grid.n()); ++k) {
    const double amp = std::exp(-k / 3.0) * (0.5 + 0.5 * rng.uniform());
    u.set_mode(k, std::polar(amp, rng.phase()));
  }
  const double norm = sobolev_norm(u, 1.0);
  if (norm > 0.0) u *= h1 / norm;
  return u;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  c.source = doc;
  if (doc.contains("schema_version") && as_int(doc["schema_version"], "schema_version") != kSchemaVersion) {
    throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }

  const json& problem = require(doc, "problem", "problem");
  c.g = as_number_list(require(problem, "g", "problem.g"), "problem.g");
  c.gamma = as_number(require(problem, "gamma", "problem.gamma"), "problem.gamma");
  if (c.gamma < 0.0) throw ConfigError("problem.gamma must be >= 0");
  if (problem.contains("forcing")) {
    const json& f = problem["forcing"];
    optional_key(f, "profile", "problem.forcing.profile", c.forcing.profile, as_string);
    optional_key(f, "amplitude", "problem.forcing.amplitude", c.forcing.amplitude, as_number);
    optional_key(f, "coeffs", "problem.forcing.coeffs", c.forcing.coeffs, as_modes);
    if (f.contains("coeffs") && !f.contains("profile")) c.forcing.profile = "coeffs";
    const auto& p = c.forcing.profile;
    if (p != "zero" && p != "cos1" && p != "sin1" && p != "coeffs") {
      throw ConfigError("unknown problem.forcing.profile '" + p + "'");
    }
  }

  const json& grid = require(doc, "grid", "grid");
  c.n = as_int(require(grid, "N", "grid.N"), "grid.N");
  if (c.n < 1) throw ConfigError("grid.N must be >= 1");
  if (grid.contains("M")) c.m = as_int(grid["M"], "grid.M");

  const json& solver = require(doc, "solver", "solver");
  c.dt = as_number(require(solver, "dt", "solver.dt"), "solver.dt");
  c.t_end = as_number(require(solver, "t_end", "solver.t_end"), "solver.t_end");
  optional_key(solver, "stride", "solver.stride", c.stride, as_int);
  optional_key(solver, "blowup_cap", "solver.blowup_cap", c.blowup_cap, as_number);
  if (!(c.dt > 0.0)) throw ConfigError("solver.dt must be positive");
  if (!(c.t_end > 0.0)) throw ConfigError("solver.t_end must be positive");
  if (c.stride < 1) throw ConfigError("solver.stride must be >= 1");

  if (doc.contains("initial")) {
    const json& i = doc["initial"];
    optional_key(i, "profile", "initial.profile", c.initial.profile, as_string);
    optional_key(i, "scale", "initial.scale", c.initial.scale, as_number);
    optional_key(i, "coeffs", "initial.coeffs", c.initial.coeffs, as_modes);
    optional_key(i, "alpha", "initial.alpha", c.initial.alpha, as_number);
    optional_key(i, "h1", "initial.h1", c.initial.h1, as_number);
    optional_key(i, "modes", "initial.modes", c.initial.modes, as_int);
    const auto& p = c.initial.profile;
    if (p != "zero" && p != "sin1" && p != "cos1" && p != "two_mode" && p != "coeffs" &&
        p != "rough" && p != "random") {
      throw ConfigError("unknown initial.profile '" + p + "'");
    }
  }
  if (doc.contains("diagnostics")) {
    const json& d = doc["diagnostics"];
    optional_key(d, "s", "diagnostics.s", c.s_list, as_number_list);
    optional_key(d, "rho", "diagnostics.rho", c.rho_list, as_number_list);
  }
  if (doc.contains("gauge")) {
    const json& g = doc["gauge"];
    optional_key(g, "lambda", "gauge.lambda", c.lambda, as_number);
    optional_key(g, "cA", "gauge.cA", c.c_a, as_number);
    if (!(c.lambda > 1.0)) throw ConfigError("gauge.lambda must exceed 1");
    if (!(c.c_a > 0.0)) throw ConfigError("gauge.cA must be positive");
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) {
      throw ConfigError("expected an unsigned integer at seed");
    }
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("study")) {
    const json& s = doc["study"];
    if (s.contains("resolutions")) {
      c.study.resolutions.clear();
      for (double v : as_number_list(s["resolutions"], "study.resolutions")) {
        c.study.resolutions.push_back(static_cast<int>(v));
      }
    }
    optional_key(s, "alpha", "study.alpha", c.study.alpha, as_number);
  }
  if (doc.contains("ensemble")) {
    const json& e = doc["ensemble"];
    optional_key(e, "count", "ensemble.count", c.ensemble.count, as_int);
    optional_key(e, "radius", "ensemble.radius", c.ensemble.radius, as_number);
    if (e.contains("h1_range")) {
      const auto r = as_number_list(e["h1_range"], "ensemble.h1_range");
      if (r.size() != 2 || !(r[0] > 0.0) || !(r[1] >= r[0])) {
        throw ConfigError("ensemble.h1_range must be [lo, hi] with 0 < lo <= hi");
      }
      c.ensemble.h1_min = r[0];
      c.ensemble.h1_max = r[1];
    }
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

PolynomialNonlinearity make_nonlinearity(const RunConfig& config) {
  return PolynomialNonlinearity::from_coefficients(config.g);
}

Grid make_grid(const RunConfig& config, int n) {
  const int degree = std::max(make_nonlinearity(config).degree(), 1);
  if (config.m && n == config.n) {
    const int need = Grid::required_points(n, degree);
    if (*config.m < need) {
      throw ConfigError("grid.M=" + std::to_string(*config.m) + " is too small for degree " +
                        std::to_string(degree) + " at N=" + std::to_string(n) + "; needs M >= " +
                        std::to_string(need));
    }
    return Grid(n, *config.m);
  }
  return Grid::for_degree(n, degree);
}

SpectralField make_forcing(const ForcingSpec& spec, const Grid& grid) {
  SpectralField f(grid);
  if (spec.profile == "cos1") {
    f.set_mode(1, 0.5);
  } else if (spec.profile == "sin1") {
    f.set_mode(1, Complex(0.0, -0.5));
  } else if (spec.profile == "coeffs") {
    set_modes(f, spec.coeffs);
  }
  f *= spec.amplitude;
  return f;
}

SpectralField make_initial(const InitialSpec& spec, const Grid& grid, std::uint64_t seed) {
  SpectralField u(grid);
  const auto& p = spec.profile;
  if (p == "sin1") {
    u.set_mode(1, Complex(0.0, -0.5));
  } else if (p == "cos1") {
    u.set_mode(1, 0.5);
  } else if (p == "two_mode") {
    u.set_mode(1, Complex(0.0, -0.5));
    if (grid.n() >= 2) u.set_mode(2, Complex(0.0, -0.25));
  } else if (p == "coeffs") {
    set_modes(u, spec.coeffs);
  } else if (p == "rough") {
    u = rough_data(grid, spec.alpha, seed);
  } else if (p == "random") {
    u = random_smooth_field(grid, spec.modes, spec.h1, seed);
  }
  u *= spec.scale;
  return u;
}

Problem make_problem(const RunConfig& config, int n) {
  const Grid grid = make_grid(config, n);
  return Problem(make_nonlinearity(config), config.gamma, make_forcing(config.forcing, grid));
}

SpectralField ensemble_initial(const RunConfig& config, const Grid& grid, int index, int count) {
  const double lo = config.ensemble.h1_min;
  const double hi = config.ensemble.h1_max;
  const double frac = count > 1 ? static_cast<double>(index) / (count - 1) : 0.0;
  const double target = lo * std::pow(hi / lo, frac);
  return random_smooth_field(grid, 8, target, stream_seed(config.seed, static_cast<std::uint64_t>(index)));
}

int resolve_threads(int requested) {
  if (const char* env = std::getenv("GKDV_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(requested, 1);
}

int run_simulate(const RunConfig& config, const fs::path& out_dir, const std::string& run_id) {
  fs::create_directories(out_dir);
  const Problem problem = make_problem(config, config.n);
  const SpectralField u0 = make_initial(config.initial, problem.grid(), config.seed);

  SolverConfig solver;
  solver.dt = config.dt;
  solver.t_end = config.t_end;
  solver.stride = config.stride;
  solver.blowup_cap = config.blowup_cap;
  solver.keep_snapshots = false;

  std::vector<DiagnosticsRecord> records;
  const Observer collect = [&](const Sample& s) {
    records.push_back(make_record(s.t, s.u, s.phase, u0, problem, config.s_list, config.rho_list));
  };
  const Trajectory traj = simulate(problem, u0, solver, {collect});

  std::ostringstream csv;
  csv << "schema_version,run_id,t,mass,momentum,energy,phase,shift";
  for (double s : config.s_list) csv << ",hs_" << column_suffix(s);
  for (double r : config.rho_list) csv << ",metric_rho_" << column_suffix(r);
  csv << "\n";
  for (const auto& r : records) {
    csv << kSchemaVersion << ',' << run_id << ',' << format_double(r.t) << ','
        << format_double(r.mass) << ',' << format_double(r.momentum) << ','
        << format_double(r.energy) << ',' << format_double(r.phase) << ','
        << format_double(translation(r.phase));
    for (const auto& [s, v] : r.sobolev) csv << ',' << format_double(v);
    for (const auto& [rho, v] : r.metric) csv << ',' << format_double(v);
    csv << "\n";
  }
  write_text(out_dir / "run.csv", csv.str());

  const auto& first = records.front();
  double mass_max = 0.0, mom_drift = 0.0, energy_drift = 0.0;
  for (const auto& r : records) {
    mass_max = std::max(mass_max, std::abs(r.mass));
    mom_drift = std::max(mom_drift, std::abs(r.momentum - first.momentum));
    energy_drift = std::max(energy_drift, std::abs(r.energy - first.energy));
  }
  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["run_id"] = run_id;
  summary["status"] = traj.aborted ? "aborted" : "ok";
  summary["partial"] = traj.aborted;
  summary["abort_reason"] = traj.aborted ? json(traj.abort_reason) : json(nullptr);
  summary["steps"] = traj.steps_taken;
  summary["samples"] = records.size();
  summary["t_final"] = records.back().t;
  summary["grid"] = {{"N", problem.grid().n()}, {"M", problem.grid().m()}};
  summary["conserved"] = {
      {"mass_max_abs", mass_max},
      {"momentum_initial", first.momentum},
      {"momentum_rel_drift", first.momentum > 0 ? finite_or_null(mom_drift / first.momentum) : json(0.0)},
      {"energy_initial", first.energy},
      {"energy_rel_drift",
       first.energy != 0.0 ? finite_or_null(energy_drift / std::abs(first.energy)) : json(energy_drift)},
  };

  std::vector<double> ts, moms;
  for (const auto& r : records) {
    ts.push_back(r.t);
    moms.push_back(r.momentum);
  }
  json fit = {{"quantity", "momentum"}, {"expected_rate_unforced", 2.0 * config.gamma}};
  try {
    const DecayFit d = decay_fit(ts, moms);
    fit["rate"] = d.rate;
    fit["residual"] = d.residual;
    fit["points"] = d.points;
  } catch (const std::exception&) {
    fit["rate"] = nullptr;
    fit["residual"] = nullptr;
    fit["points"] = 0;
  }
  summary["decay_fit"] = fit;

  json sup = json::object();
  for (std::size_t i = 0; i < config.s_list.size(); ++i) {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.sobolev[i].second);
    sup["hs_" + column_suffix(config.s_list[i])] = m;
  }
  for (std::size_t i = 0; i < config.rho_list.size(); ++i) {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.metric[i].second);
    sup["metric_rho_" + column_suffix(config.rho_list[i])] = m;
  }
  summary["sup"] = sup;
  summary["final_phase"] = records.back().phase;
  summary["seed"] = config.seed;
  summary["config"] = config.source;
  write_json(out_dir / "summary.json", summary);
  return traj.aborted ? kNumericalAbort : kOk;
}

int run_decompose(const RunConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const Grid grid = make_grid(config, config.n);
  const auto g = make_nonlinearity(config);
  const SpectralField u = make_initial(config.initial, grid, config.seed);
  const RegionParams params{config.lambda, config.c_a};

  ResonanceSplit split{SpectralField(grid), SpectralField(grid), SpectralField(grid), SpectralField(grid)};
  HighLowSplit hl{SpectralField(grid), SpectralField(grid), SpectralField(grid), SpectralField(grid)};
  try {
    split = decompose_r1_r2_nr(u, g);
    hl = decompose_hl_hh_re(u, g, params);
  } catch (const BudgetError& e) {
    json report = {{"schema_version", kSchemaVersion}, {"status", "budget-exceeded"}, {"error", e.what()}};
    write_json(out_dir / "decompose_report.json", report);
    return kBudgetExceeded;
  }
  const SpectralField fft_full = -1.0 * nonlinear_rhs(u, g);
  const double scale = std::max(1.0, fft_full.max_abs());

  json report;
  report["schema_version"] = kSchemaVersion;
  report["status"] = "ok";
  report["grid"] = {{"N", grid.n()}, {"M", grid.m()}};
  report["scale"] = scale;
  report["residuals"] = {
      {"r1_r2_nr_vs_fft", (split.r1 + split.r2 + split.nr - fft_full).max_abs()},
      {"enumeration_vs_fft", (split.full - fft_full).max_abs()},
      {"r1_closed_form", (split.r1 - r1_closed_form(u, g)).max_abs()},
      {"hl_hh_re_vs_nr", (hl.hl + hl.hh + hl.re - hl.nr).max_abs()},
      {"nr_consistency", (split.nr - hl.nr).max_abs()},
  };
  const std::vector<std::pair<const char*, const SpectralField*>> parts = {
      {"full", &fft_full}, {"r1", &split.r1}, {"r2", &split.r2}, {"nr", &split.nr},
      {"hl", &hl.hl},      {"hh", &hl.hh},    {"re", &hl.re}};
  json comps = json::object();
  for (const auto& [name, field] : parts) {
    json norms = json::object();
    for (double s : config.s_list) norms["hs_" + column_suffix(s)] = sobolev_norm(*field, s);
    comps[name] = norms;
  }
  report["components"] = comps;
  report["params"] = {{"lambda", params.lambda}, {"cA", params.c_a}};
  report["config"] = config.source;
  write_json(out_dir / "decompose_report.json", report);
  return kOk;
}

int run_cases(int n, int bound, std::optional<CaseConstants> constants, const fs::path& out_dir) {
  if (n < 2) throw ConfigError("cases: n must be >= 2");
  if (bound < 1) throw ConfigError("cases: K must be >= 1");
  fs::create_directories(out_dir);
  CaseScanReport r;
  try {
    r = scan_cases(n, bound, constants);
  } catch (const BudgetError& e) {
    json report = {{"schema_version", kSchemaVersion}, {"status", "budget-exceeded"}, {"error", e.what()}};
    write_json(out_dir / "cases_report.json", report);
    return kBudgetExceeded;
  }
  json report;
  report["schema_version"] = kSchemaVersion;
  report["status"] = "ok";
  report["n"] = r.n;
  report["K"] = r.bound;
  report["certified_constant"] = finite_or_null(r.certified_constant);
  report["worst_tuple"] = r.worst_tuple;
  report["constants"] = {{"cA", finite_or_null(r.constants.a)},
                         {"cC", finite_or_null(r.constants.c)},
                         {"cD", finite_or_null(r.constants.d)}};
  report["tuples"] = r.tuples;
  report["counts"] = {{"A", r.count_a}, {"B", r.count_b}, {"C", r.count_c}, {"D", r.count_d}};
  report["uncovered"] = r.uncovered;
  report["uncovered_examples"] = r.uncovered_examples;
  write_json(out_dir / "cases_report.json", report);
  return kOk;
}

int run_smoothing_study(const RunConfig& config, const fs::path& out_dir, int threads) {
  fs::create_directories(out_dir);
  StudyConfig study;
  study.g = make_nonlinearity(config);
  study.gamma = config.gamma;
  const ForcingSpec forcing = config.forcing;
  study.forcing = [forcing](const Grid& grid) { return make_forcing(forcing, grid); };
  study.alpha = config.study.alpha;
  study.rho = config.rho_list.empty() ? 0.5 : config.rho_list.front();
  study.resolutions = config.study.resolutions;
  study.seed = config.seed;
  study.dt = config.dt;
  study.t_end = config.t_end;
  study.stride = config.stride;
  study.threads = threads;
  const StudyTable table = refinement_smoothing_study(study);

  std::ostringstream csv;
  csv << "schema_version,run_id,N,data_h1,data_norm,sup_metric,aborted\n";
  json rows = json::array();
  for (const auto& r : table.rows) {
    const std::string id = "study-N" + std::to_string(r.n);
    csv << kSchemaVersion << ',' << id << ',' << r.n << ',' << format_double(r.data_h1) << ','
        << format_double(r.data_norm) << ',' << format_double(r.sup_metric) << ','
        << (r.aborted ? 1 : 0) << "\n";
    rows.push_back({{"N", r.n}, {"data_h1", r.data_h1}, {"data_norm", r.data_norm},
                    {"sup_metric", r.sup_metric}, {"aborted", r.aborted}});
  }
  write_text(out_dir / "study.csv", csv.str());
  json summary = {{"schema_version", kSchemaVersion},
                  {"verdict", table.verdict},
                  {"metric_spread", finite_or_null(table.metric_spread)},
                  {"rho", study.rho},
                  {"alpha", study.alpha},
                  {"rows", rows},
                  {"config", config.source}};
  write_json(out_dir / "study_summary.json", summary);
  bool aborted = false;
  for (const auto& r : table.rows) aborted = aborted || r.aborted;
  return aborted ? kNumericalAbort : kOk;
}

int run_ensemble(const RunConfig& config, int count, const fs::path& out_dir, int threads) {
  if (count < 2) throw ConfigError("ensemble: count must be >= 2");
  fs::create_directories(out_dir);
  const double rho = config.rho_list.empty() ? 0.5 : config.rho_list.front();
  const double radius = config.ensemble.radius;

  struct Member {
    std::uint64_t seed = 0;
    double h1_initial = 0.0;
    std::optional<double> entry;
    double post_h1 = 0.0;
    double post_metric = 0.0;
    double final_h1 = 0.0;
    bool aborted = false;
    std::string reason;
  };
  std::vector<Member> members(static_cast<std::size_t>(count));

  parallel_for(members.size(), threads, [&](std::size_t i) {
    const Problem problem = make_problem(config, config.n);
    const SpectralField u0 = ensemble_initial(config, problem.grid(), static_cast<int>(i), count);
    SolverConfig solver;
    solver.dt = config.dt;
    solver.t_end = config.t_end;
    solver.stride = config.stride;
    solver.blowup_cap = config.blowup_cap;
    solver.keep_snapshots = false;
    std::vector<double> ts, h1, metric;
    const Observer collect = [&](const Sample& s) {
      ts.push_back(s.t);
      h1.push_back(sobolev_norm(s.u, 1.0));
      metric.push_back(smoothing_metric_at(s.u, s.phase, u0, s.t, problem.gamma(), rho));
    };
    Member m;
    m.seed = stream_seed(config.seed, i);
    m.h1_initial = sobolev_norm(u0, 1.0);
    try {
      const Trajectory traj = simulate(problem, u0, solver, {collect});
      m.aborted = traj.aborted;
      m.reason = traj.abort_reason;
    } catch (const std::exception& e) {
      m.aborted = true;
      m.reason = e.what();
    }
    if (!m.aborted) {
      m.entry = absorbing_entry(ts, h1, radius);
      if (m.entry) {
        for (std::size_t j = 0; j < ts.size(); ++j) {
          if (ts[j] < *m.entry) continue;
          m.post_h1 = std::max(m.post_h1, h1[j]);
          m.post_metric = std::max(m.post_metric, metric[j]);
        }
      }
      m.final_h1 = h1.back();
    }
    members[i] = m;
  });

  std::ostringstream csv;
  csv << "schema_version,run_id,seed,h1_initial,entry_time,post_entry_sup_h1,post_entry_sup_metric,final_h1,status\n";
  json runs = json::array();
  bool all_entered = true;
  double max_entry = 0.0, max_h1 = 0.0, max_metric = 0.0;
  double min_metric = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = members[i];
    const std::string id = "member-" + std::to_string(i);
    const std::string status = m.aborted ? "aborted" : (m.entry ? "entered" : "outside");
    csv << kSchemaVersion << ',' << id << ',' << m.seed << ',' << format_double(m.h1_initial) << ','
        << (m.entry ? format_double(*m.entry) : std::string("")) << ',' << format_double(m.post_h1)
        << ',' << format_double(m.post_metric) << ',' << format_double(m.final_h1) << ',' << status
        << "\n";
    runs.push_back({{"run_id", id},
                    {"seed", m.seed},
                    {"h1_initial", m.h1_initial},
                    {"entry_time", nullable(m.entry)},
                    {"post_entry_sup_h1", m.post_h1},
                    {"post_entry_sup_metric", m.post_metric},
                    {"final_h1", m.final_h1},
                    {"status", status},
                    {"abort_reason", m.aborted ? json(m.reason) : json(nullptr)}});
    if (!m.entry || m.aborted) {
      all_entered = false;
      continue;
    }
    max_entry = std::max(max_entry, *m.entry);
    max_h1 = std::max(max_h1, m.post_h1);
    max_metric = std::max(max_metric, m.post_metric);
    min_metric = std::min(min_metric, m.post_metric);
  }
  write_text(out_dir / "ensemble.csv", csv.str());
  json report = {{"schema_version", kSchemaVersion},
                 {"radius", radius},
                 {"rho", rho},
                 {"count", count},
                 {"runs", runs},
                 {"ensemble",
                  {{"all_entered", all_entered},
                   {"max_entry_time", max_entry},
                   {"max_post_entry_sup_h1", max_h1},
                   {"max_post_entry_sup_metric", max_metric},
                   {"metric_spread", all_entered && min_metric > 0 ? json(max_metric / min_metric)
                                                                   : json(nullptr)}}},
                 {"config", config.source}};
  write_json(out_dir / "ensemble_report.json", report);
  bool aborted = false;
  for (const auto& m : members) aborted = aborted || m.aborted;
  return aborted ? kNumericalAbort : kOk;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"gkdv: damped, forced generalized KdV toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  int count = 0;
  int n = 0;
  int bound = 0;
  std::optional<double> constant, ca, cc, cd;

  auto common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) sub->add_option("--config", config_path, "config JSON")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", threads, "worker threads (GKDV_THREADS overrides)");
  };
  auto* sim = app.add_subcommand("simulate", "single run: run.csv + summary.json");
  common(sim, true);
  auto* dec = app.add_subcommand("decompose", "resonance partitions: decompose_report.json");
  common(dec, true);
  auto* cases = app.add_subcommand("cases", "exhaustive case scan: cases_report.json");
  common(cases, false);
  cases->add_option("--n", n, "tuple length")->required();
  cases->add_option("--K", bound, "wavenumber bound")->required();
  cases->add_option("--constant", constant, "uniform constant for cA, cC, cD");
  cases->add_option("--ca", ca);
  cases->add_option("--cc", cc);
  cases->add_option("--cd", cd);
  auto* study = app.add_subcommand("smoothing-study", "refinement study: study.csv");
  common(study, true);
  auto* ens = app.add_subcommand("ensemble", "seeded ensemble: ensemble_report.json");
  common(ens, true);
  ens->add_option("--count", count, "number of members (>= 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    const int workers = resolve_threads(threads);
    if (*cases) {
      std::optional<CaseConstants> c;
      if (constant) c = CaseConstants::uniform(*constant);
      if (ca || cc || cd) {
        CaseConstants k = c.value_or(CaseConstants{});
        if (ca) k.a = *ca;
        if (cc) k.c = *cc;
        if (cd) k.d = *cd;
        c = k;
      }
      return run_cases(n, bound, c, out_dir);
    }
    RunConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    if (*sim) return run_simulate(config, out_dir);
    if (*dec) return run_decompose(config, out_dir);
    if (*study) return run_smoothing_study(config, out_dir, workers);
    if (*ens) return run_ensemble(config, count > 0 ? count : config.ensemble.count, out_dir, workers);
  } catch (const ConfigError& e) {
    std::cerr << "gkdv: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const BudgetError& e) {
    std::cerr << "gkdv: " << e.what() << "\n";
    return kBudgetExceeded;
  } catch (const NumericalAbort& e) {
    std::cerr << "gkdv: " << e.what() << "\n";
    return kNumericalAbort;
  } catch (const std::invalid_argument& e) {
    std::cerr << "gkdv: invalid configuration: " << e.what() << "\n";
    return kInvalidConfig;
  }
  return kOk;
}

}  // namespace gkdv::harness
