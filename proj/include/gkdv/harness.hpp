#pragma once

// Run orchestration: JSON configuration, simulate / decompose / cases /
// smoothing-study / ensemble drivers, and their CSV and JSON outputs.
// Column and key names are documented in docs/schema.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "gkdv/dynamics.hpp"
#include "gkdv/resonance.hpp"
#include "gkdv/spectral.hpp"

namespace gkdv::harness {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
  kOk = 0,
  kInvalidConfig = 1,
  kNumericalAbort = 2,
  kBudgetExceeded = 3,
};

struct ModeSpec {
  int k;
  double re;
  double im;
};

struct ForcingSpec {
  std::string profile = "zero";  // zero | cos1 | sin1 | coeffs
  double amplitude = 1.0;
  std::vector<ModeSpec> coeffs;
};

struct InitialSpec {
  std::string profile = "sin1";  // zero | sin1 | cos1 | two_mode | coeffs | rough | random
  double scale = 1.0;
  std::vector<ModeSpec> coeffs;
  double alpha = 1.51;  // rough
  double h1 = 1.0;      // random: target ||u0||_{H^1}
  int modes = 8;        // random: bandwidth of the random field
};

struct StudySpec {
  std::vector<int> resolutions{64, 128, 256};
  double alpha = 1.51;
};

struct EnsembleSpec {
  int count = 8;
  double h1_min = 0.5;
  double h1_max = 5.0;
  double radius = 2.0;
};

struct RunConfig {
  std::vector<double> g;  // a_2, a_3, ...
  double gamma = 0.0;
  ForcingSpec forcing;
  int n = 64;
  std::optional<int> m;
  double dt = 1e-4;
  double t_end = 1.0;
  int stride = 1;
  double blowup_cap = 1e6;
  InitialSpec initial;
  std::vector<double> s_list{0.0, 1.0};
  std::vector<double> rho_list{0.5};
  double lambda = 4.0;
  double c_a = 0.25;
  std::uint64_t seed = 0;
  StudySpec study;
  EnsembleSpec ensemble;
  nlohmann::json source;  // the parsed document, echoed into summaries
};

/// Validates and converts a config document. Throws ConfigError naming the
/// offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

PolynomialNonlinearity make_nonlinearity(const RunConfig& config);
Grid make_grid(const RunConfig& config, int n);
SpectralField make_forcing(const ForcingSpec& spec, const Grid& grid);
SpectralField make_initial(const InitialSpec& spec, const Grid& grid, std::uint64_t seed);
Problem make_problem(const RunConfig& config, int n);

/// Shortest-safe decimal for a double: 17 significant digits.
std::string format_double(double v);

/// Single run. Writes run.csv and summary.json. Returns kOk or kNumericalAbort.
int run_simulate(const RunConfig& config, const std::filesystem::path& out_dir,
                 const std::string& run_id = "run-0");

/// Resonance partitions of the configured initial field. Writes
/// decompose_report.json. Returns kBudgetExceeded when the enumeration is too large.
int run_decompose(const RunConfig& config, const std::filesystem::path& out_dir);

/// Exhaustive case scan. Writes cases_report.json.
int run_cases(int n, int bound, std::optional<CaseConstants> constants,
              const std::filesystem::path& out_dir);

/// Refinement study. Writes study.csv and study_summary.json.
int run_smoothing_study(const RunConfig& config, const std::filesystem::path& out_dir,
                        int threads);

/// Seeded ensemble of runs. Writes ensemble.csv and ensemble_report.json.
int run_ensemble(const RunConfig& config, int count, const std::filesystem::path& out_dir,
                 int threads);

/// Initial condition of ensemble member `index`.
SpectralField ensemble_initial(const RunConfig& config, const Grid& grid, int index, int count);

/// Thread count from --threads, overridden by GKDV_THREADS.
int resolve_threads(int requested);

/// Entry point of the `gkdv` executable.
int cli_main(int argc, char** argv);

}  // namespace gkdv::harness
