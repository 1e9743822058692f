#pragma once

// Functionals and trajectory diagnostics. Integral functionals use the
// physical convention int_T h dx = 2pi h_0; Sobolev norms use coefficients.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gkdv/dynamics.hpp"
#include "gkdv/spectral.hpp"

namespace gkdv {

/// int_T u dx.
double mass(const SpectralField& u);
/// int_T u^2 dx.
double momentum(const SpectralField& u);
/// 1/2 int u_x^2 dx - int G(u) dx with G' = g, G(0) = 0.
double energy(const SpectralField& u, const PolynomialNonlinearity& g);

/// ||apply_gauge(u, shift(phase)) - W^gamma_t u0||_{H^{1+rho}}.
double smoothing_metric_at(const SpectralField& u, double phase, const SpectralField& u0, double t,
                           double gamma, double rho);

/// smoothing_metric_at over every stored sample of the trajectory.
std::vector<double> smoothing_metric(const Trajectory& trajectory, const SpectralField& u0,
                                     double gamma, double rho);

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double momentum = 0.0;
  double energy = 0.0;
  double phase = 0.0;
  std::vector<std::pair<double, double>> sobolev;  // (s, ||u||_{H^s})
  std::vector<std::pair<double, double>> metric;   // (rho, smoothing metric)
};

DiagnosticsRecord make_record(double t, const SpectralField& u, double phase,
                              const SpectralField& u0, const Problem& problem,
                              std::span<const double> s_list, std::span<const double> rho_list);

struct DecayFit {
  double rate = 0.0;      // lambda in value ~ C e^{-lambda t}
  double residual = 0.0;  // rms of the log-linear fit
  std::size_t points = 0;
};

/// Least-squares fit of log(value) against t over samples with
/// t_min <= t <= t_max. Throws std::domain_error on nonpositive values.
DecayFit decay_fit(std::span<const double> times, std::span<const double> values,
                   double t_min = -1e300, double t_max = 1e300);

/// First sample time after which every remaining value is <= radius.
std::optional<double> absorbing_entry(std::span<const double> times,
                                      std::span<const double> norms, double radius);
std::optional<double> absorbing_entry(const Trajectory& trajectory, double radius, double s);

/// |u_k| = <k>^{-alpha}, phases from the seed. Mode k's phase does not depend
/// on N, so refinements extend the same function.
SpectralField rough_data(const Grid& grid, double alpha, std::uint64_t seed);

struct StudyConfig {
  PolynomialNonlinearity g;
  double gamma = 0.5;
  /// Forcing realized on each refinement grid.
  std::function<SpectralField(const Grid&)> forcing;
  double alpha = 1.51;
  double rho = 0.5;
  std::vector<int> resolutions{64, 128, 256};
  std::uint64_t seed = 0;
  double dt = 1e-4;
  double t_end = 1.0;
  int stride = 10;
  int threads = 1;
};

struct StudyRow {
  int n = 0;
  double data_h1 = 0.0;
  double data_norm = 0.0;   // ||u0||_{H^{1+rho}}
  double sup_metric = 0.0;  // sup_t smoothing metric
  bool aborted = false;
};

struct StudyTable {
  std::vector<StudyRow> rows;
  std::string verdict;  // "pass", "fail" or "insufficient-points"
  double metric_spread = 0.0;  // max/min of sup_metric over the last three rows
};

/// Stabilization means: data norms strictly increasing and sup metric
/// max/min <= 2 over the three largest N (an all-zero metric counts as stable).
StudyTable refinement_smoothing_study(const StudyConfig& config);

std::string study_verdict(std::span<const StudyRow> rows, double* spread = nullptr);

}  // namespace gkdv
