#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gkdv/error.hpp"
#include "gkdv/harness.hpp"
#include "gkdv/random.hpp"
#include "json.hpp"

using namespace gkdv;
using namespace gkdv::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gkdv_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json base_config() {
  return json::parse(R"({
    "schema_version": 1,
    "problem": {"g": [0, 1], "gamma": 0.0},
    "grid": {"N": 16},
    "solver": {"dt": 0.001, "t_end": 0.05, "stride": 10},
    "initial": {"profile": "sin1"}
  })");
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) out.push_back(c);
  return out;
}

}  // namespace

TEST_CASE("splitmix reference vectors") {
  SplitMix64 g(0);
  CHECK(g.next() == 0xe220a8397b1dcdafULL);
  CHECK(g.next() == 0x6e789e6aa1b965f4ULL);
  CHECK(g.next() == 0x06c45d188009454fULL);
  SplitMix64 h(1234567);
  CHECK(h.next() == 6457827717110365317ULL);
  // stream i is the (i+1)-th output of the root generator
  SplitMix64 root(99);
  for (std::uint64_t i = 0; i < 5; ++i) CHECK(stream_seed(99, i) == root.next());
  SplitMix64 u(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
  }
}

TEST_CASE("doubles are written with 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(0.0) == "0");
}

TEST_CASE("missing required keys are named") {
  for (const std::string key : {"problem.g", "problem.gamma", "grid.N", "solver.dt", "solver.t_end"}) {
    json doc = base_config();
    const auto dot = key.find('.');
    doc[key.substr(0, dot)].erase(key.substr(dot + 1));
    try {
      parse_config(doc);
      FAIL("expected ConfigError for " << key);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  }
  json doc = base_config();
  doc.erase("problem");
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("invalid values are rejected") {
  json doc = base_config();
  doc["problem"]["gamma"] = -1.0;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base_config();
  doc["problem"]["forcing"] = {{"profile", "square"}};
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base_config();
  doc["solver"]["dt"] = "fast";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base_config();
  doc["grid"]["M"] = 40;  // degree 3 at N = 16 needs 65
  CHECK_THROWS_AS(make_grid(parse_config(doc), 16), ConfigError);
  doc = base_config();
  doc["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("profiles") {
  const Grid grid(4, 16);
  ForcingSpec f;
  f.profile = "cos1";
  f.amplitude = 2.0;
  CHECK(make_forcing(f, grid)[1] == Complex(1.0, 0.0));
  f.profile = "coeffs";
  f.coeffs = {{2, 0.1, 0.2}};
  f.amplitude = 1.0;
  CHECK(make_forcing(f, grid)[-2] == Complex(0.1, -0.2));
  f.coeffs = {{9, 1.0, 0.0}};
  CHECK_THROWS_AS(make_forcing(f, grid), ConfigError);
  InitialSpec i;
  i.profile = "random";
  i.h1 = 3.0;
  CHECK(sobolev_norm(make_initial(i, grid, 1), 1.0) == doctest::Approx(3.0));
}

TEST_CASE("simulate writes schema-stamped CSV and summary") {
  const fs::path out = scratch("sim");
  const RunConfig cfg = parse_config(base_config());
  CHECK(run_simulate(cfg, out) == kOk);
  const auto rows = lines(slurp(out / "run.csv"));
  REQUIRE(rows.size() == 1 + 6);
  CHECK(rows[0] == "schema_version,run_id,t,mass,momentum,energy,phase,shift,hs_0,hs_1,metric_rho_0.5");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(split(rows[i])[0] == "1");
  const json s = json::parse(slurp(out / "summary.json"));
  CHECK(s["schema_version"] == 1);
  CHECK(s["status"] == "ok");
  CHECK(s.contains("conserved"));
  CHECK(s["decay_fit"].contains("rate"));
  CHECK(s["final_phase"].get<double>() == doctest::Approx(3 * 3.141592653589793 * 0.05).epsilon(1e-6));
}

TEST_CASE("linear config yields an all-zero metric column") {
  const fs::path out = scratch("linear");
  json doc = base_config();
  doc["problem"]["g"] = json::array();
  doc["problem"]["gamma"] = 0.5;
  CHECK(run_simulate(parse_config(doc), out) == kOk);
  const auto rows = lines(slurp(out / "run.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(split(rows[i]).back() == "0");
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  json doc = base_config();
  doc["initial"] = {{"profile", "rough"}};
  doc["seed"] = 77;
  const RunConfig cfg = parse_config(doc);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  run_simulate(cfg, a);
  run_simulate(cfg, b);
  CHECK(slurp(a / "run.csv") == slurp(b / "run.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
}

TEST_CASE("blow-up gives exit 2 and a partial summary") {
  json doc = base_config();
  doc["solver"]["blowup_cap"] = 0.5;
  const fs::path out = scratch("abort");
  CHECK(run_simulate(parse_config(doc), out) == kNumericalAbort);
  const json s = json::parse(slurp(out / "summary.json"));
  CHECK(s["partial"] == true);
  CHECK(s["status"] == "aborted");
}

TEST_CASE("decompose report") {
  json doc = base_config();
  doc["grid"]["N"] = 10;
  doc["problem"]["g"] = {1.0};
  doc["initial"] = {{"profile", "rough"}};
  const fs::path out = scratch("dec");
  CHECK(run_decompose(parse_config(doc), out) == kOk);
  json r = json::parse(slurp(out / "decompose_report.json"));
  CHECK(r["components"]["r2"]["hs_0"] == 0.0);
  for (auto& [k, v] : r["residuals"].items()) CHECK(v.get<double>() <= 1e-12 * r["scale"].get<double>());

  doc["initial"] = {{"profile", "zero"}};
  CHECK(run_decompose(parse_config(doc), out) == kOk);
  r = json::parse(slurp(out / "decompose_report.json"));
  for (auto& [name, norms] : r["components"].items()) CHECK(norms["hs_1"] == 0.0);
}

TEST_CASE("decompose over budget exits 3") {
  json doc = base_config();
  doc["grid"]["N"] = 200;
  doc["problem"]["g"] = {0, 0, 0, 0, 0, 1.0};
  CHECK(run_decompose(parse_config(doc), scratch("budget")) == kBudgetExceeded);
}

TEST_CASE("cases report") {
  const fs::path out = scratch("cases");
  CHECK(run_cases(3, 1, std::nullopt, out) == kOk);
  const json r = json::parse(slurp(out / "cases_report.json"));
  CHECK(r["tuples"] == 8);
  CHECK(r["uncovered"] == 0);
  CHECK(r["counts"]["A"] == 2);
  CHECK_THROWS_AS(run_cases(1, 5, std::nullopt, out), ConfigError);
}

TEST_CASE("ensemble needs two members") {
  CHECK_THROWS_AS(run_ensemble(parse_config(base_config()), 1, scratch("ens1"), 1), ConfigError);
}

TEST_CASE("ensemble initial sizes span the configured range") {
  const RunConfig cfg = parse_config(base_config());
  const Grid grid(16, 40);
  CHECK(sobolev_norm(ensemble_initial(cfg, grid, 0, 8), 1.0) == doctest::Approx(0.5));
  CHECK(sobolev_norm(ensemble_initial(cfg, grid, 7, 8), 1.0) == doctest::Approx(5.0));
}

TEST_CASE("unforced ensemble decays into a small ball") {
  json doc = base_config();
  doc["problem"]["g"] = {0, -1.0};
  doc["problem"]["gamma"] = 1.0;
  doc["solver"] = {{"dt", 0.002}, {"t_end", 4.0}, {"stride", 25}};
  doc["ensemble"] = {{"radius", 0.3}};
  const fs::path out = scratch("ens");
  CHECK(run_ensemble(parse_config(doc), 3, out, 2) == kOk);
  const json r = json::parse(slurp(out / "ensemble_report.json"));
  CHECK(r["ensemble"]["all_entered"] == true);
  CHECK(r["runs"].size() == 3);
  CHECK(lines(slurp(out / "ensemble.csv")).size() == 4);
}

TEST_CASE("study with one resolution is insufficient") {
  json doc = base_config();
  doc["study"] = {{"resolutions", {16}}};
  const fs::path out = scratch("study");
  CHECK(run_smoothing_study(parse_config(doc), out, 1) == kOk);
  CHECK(json::parse(slurp(out / "study_summary.json"))["verdict"] == "insufficient-points");
}

TEST_CASE("thread count override") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) == 1);
  setenv("GKDV_THREADS", "5", 1);
  CHECK(resolve_threads(2) == 5);
  unsetenv("GKDV_THREADS");
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  json doc = base_config();
  doc["problem"].erase("gamma");
  std::ofstream(dir / "bad.json") << doc.dump();
  std::string cfg = (dir / "bad.json").string();
  std::string outd = dir.string();
  {
    const char* argv[] = {"gkdv", "simulate", "--config", cfg.c_str(), "--out", outd.c_str()};
    CHECK(cli_main(6, const_cast<char**>(argv)) == kInvalidConfig);
  }
  {
    const char* argv[] = {"gkdv", "cases", "--n", "1", "--K", "3", "--out", outd.c_str()};
    CHECK(cli_main(8, const_cast<char**>(argv)) == kInvalidConfig);
  }
  {
    std::ofstream(dir / "good.json") << base_config().dump();
    std::string good = (dir / "good.json").string();
    const char* argv[] = {"gkdv", "simulate", "--config", good.c_str(), "--out", outd.c_str(), "--seed", "3"};
    CHECK(cli_main(8, const_cast<char**>(argv)) == kOk);
    CHECK(fs::exists(dir / "run.csv"));
  }
  {
    std::string good = (dir / "good.json").string();
    const char* argv[] = {"gkdv", "ensemble", "--config", good.c_str(), "--count", "1"};
    CHECK(cli_main(6, const_cast<char**>(argv)) == kInvalidConfig);
  }
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : fs::directory_iterator(fs::path(GKDV_SOURCE_DIR) / "configs")) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
  }
}

TEST_CASE("canonical run matches pinned baselines") {
  // g = -u^3, gamma = 0.5, f = cos x, u0 = sin x, N = 128, dt = 1e-4, t = 10.
  const fs::path out = scratch("canonical");
  REQUIRE(run_simulate(load_config(fs::path(GKDV_SOURCE_DIR) / "configs/canonical.json"), out) == kOk);
  const json s = json::parse(slurp(out / "summary.json"));
  auto pinned = [](const json& v, double expect) {
    CHECK(v.get<double>() == doctest::Approx(expect).epsilon(1e-10));
  };
  CHECK(s["conserved"]["mass_max_abs"] == 0.0);
  pinned(s["conserved"]["energy_initial"], 2.159844949342983);
  pinned(s["conserved"]["energy_rel_drift"], 0.8602824626379008);
  pinned(s["conserved"]["momentum_rel_drift"], 0.8203603578864214);
  pinned(s["decay_fit"]["rate"], 0.07128604083535482);
  pinned(s["final_phase"], -58.25270166067372);
  pinned(s["sup"]["hs_1"], 1.7718657503480404);
  pinned(s["sup"]["hs_1.5"], 2.517727198537616);
  pinned(s["sup"]["metric_rho_0.5"], 2.6023194163600287);
  pinned(s["sup"]["metric_rho_0"], 1.835249589822417);
}
