#include "gkdv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gkdv/gauge.hpp"
#include "gkdv/parallel.hpp"
#include "gkdv/random.hpp"

namespace gkdv {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double mass(const SpectralField& u) { return kTwoPi * u[0].real(); }

double momentum(const SpectralField& u) {
  double sum = 0.0;
  for (Complex c : u.coefficients()) sum += std::norm(c);
  return kTwoPi * sum;
}

double energy(const SpectralField& u, const PolynomialNonlinearity& g) {
  double kinetic = 0.0;
  for (int k = 1; k <= u.n(); ++k) kinetic += 2.0 * static_cast<double>(k) * k * std::norm(u[k]);
  kinetic *= 0.5 * kTwoPi;
  if (g.is_zero()) return kinetic;
  u.grid().require_degree(g.degree());
  SpectralWorkspace ws(u.grid());
  ws.load(u);
  double sum = 0.0;
  for (double v : ws.physical()) sum += g.primitive(v);
  return kinetic - kTwoPi * sum / static_cast<double>(u.grid().m());
}

double smoothing_metric_at(const SpectralField& u, double phase, const SpectralField& u0, double t,
                           double gamma, double rho) {
  return sobolev_norm(apply_gauge(u, translation(phase)) - airy_propagator(u0, t, gamma), 1.0 + rho);
}

std::vector<double> smoothing_metric(const Trajectory& trajectory, const SpectralField& u0,
                                     double gamma, double rho) {
  if (trajectory.snapshots.size() != trajectory.times.size()) {
    throw std::invalid_argument("trajectory has no stored snapshots");
  }
  std::vector<double> out;
  out.reserve(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    out.push_back(smoothing_metric_at(trajectory.snapshots[i], trajectory.phases[i], u0,
                                      trajectory.times[i], gamma, rho));
  }
  return out;
}

DiagnosticsRecord make_record(double t, const SpectralField& u, double phase,
                              const SpectralField& u0, const Problem& problem,
                              std::span<const double> s_list, std::span<const double> rho_list) {
  DiagnosticsRecord r;
  r.t = t;
  r.mass = mass(u);
  r.momentum = momentum(u);
  r.energy = energy(u, problem.g());
  r.phase = phase;
  for (double s : s_list) r.sobolev.emplace_back(s, sobolev_norm(u, s));
  for (double rho : rho_list) {
    r.metric.emplace_back(rho, smoothing_metric_at(u, phase, u0, t, problem.gamma(), rho));
  }
  return r;
}

DecayFit decay_fit(std::span<const double> times, std::span<const double> values, double t_min,
                   double t_max) {
  if (times.size() != values.size()) throw std::invalid_argument("series length mismatch");
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_min || times[i] > t_max) continue;
    if (!(values[i] > 0.0)) throw std::domain_error("decay fit needs positive values in the window");
    const double y = std::log(values[i]);
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("decay fit needs at least two points in the window");
  const double dn = static_cast<double>(n);
  const double denom = dn * stt - st * st;
  const double slope = (dn * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / dn;
  double ss = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_min || times[i] > t_max) continue;
    const double e = std::log(values[i]) - (intercept + slope * times[i]);
    ss += e * e;
  }
  // -0.0 reads oddly for a constant series.
  const double rate = slope == 0.0 ? 0.0 : -slope;
  return {rate, std::sqrt(ss / dn), n};
}

std::optional<double> absorbing_entry(std::span<const double> times,
                                      std::span<const double> norms, double radius) {
  if (times.size() != norms.size()) throw std::invalid_argument("series length mismatch");
  std::optional<double> entry;
  for (std::size_t i = times.size(); i-- > 0;) {
    if (norms[i] > radius) break;
    entry = times[i];
  }
  return entry;
}

std::optional<double> absorbing_entry(const Trajectory& trajectory, double radius, double s) {
  std::vector<double> norms;
  norms.reserve(trajectory.snapshots.size());
  for (const auto& u : trajectory.snapshots) norms.push_back(sobolev_norm(u, s));
  return absorbing_entry(trajectory.times, norms, radius);
}

SpectralField rough_data(const Grid& grid, double alpha, std::uint64_t seed) {
  SpectralField u(grid);
  for (int k = 1; k <= grid.n(); ++k) {
    SplitMix64 rng(stream_seed(seed, static_cast<std::uint64_t>(k)));
    u.set_mode(k, std::polar(std::pow(bracket(k), -alpha), rng.phase()));
  }
  return u;
}

std::string study_verdict(std::span<const StudyRow> rows, double* spread) {
  if (spread) *spread = 0.0;
  if (rows.size() < 2) return "insufficient-points";
  bool ok = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].data_norm > rows[i - 1].data_norm)) ok = false;
  }
  for (const auto& r : rows) ok = ok && !r.aborted && std::isfinite(r.sup_metric);
  const std::size_t first = rows.size() >= 3 ? rows.size() - 3 : 0;
  double lo = rows[first].sup_metric;
  double hi = lo;
  for (std::size_t i = first; i < rows.size(); ++i) {
    lo = std::min(lo, rows[i].sup_metric);
    hi = std::max(hi, rows[i].sup_metric);
  }
  double ratio = 1.0;
  if (hi > 1e-12) ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (spread) *spread = ratio;
  if (ratio > 2.0) ok = false;
  return ok ? "pass" : "fail";
}

StudyTable refinement_smoothing_study(const StudyConfig& config) {
  std::vector<int> ns = config.resolutions;
  if (!std::is_sorted(ns.begin(), ns.end())) {
    throw std::invalid_argument("refinement resolutions must be ascending");
  }
  StudyTable table;
  table.rows.resize(ns.size());
  parallel_for(ns.size(), config.threads, [&](std::size_t i) {
    const int n = ns[i];
    const Grid grid = Grid::for_degree(n, std::max(config.g.degree(), 1));
    SpectralField forcing = config.forcing ? config.forcing(grid) : SpectralField(grid);
    const Problem problem(config.g, config.gamma, std::move(forcing));
    const SpectralField u0 = rough_data(grid, config.alpha, config.seed);

    StudyRow row;
    row.n = n;
    row.data_h1 = sobolev_norm(u0, 1.0);
    row.data_norm = sobolev_norm(u0, 1.0 + config.rho);

    SolverConfig solver;
    solver.dt = config.dt;
    solver.t_end = config.t_end;
    solver.stride = config.stride;
    solver.keep_snapshots = false;
    double sup = 0.0;
    const Observer track = [&](const Sample& s) {
      sup = std::max(sup, smoothing_metric_at(s.u, s.phase, u0, s.t, config.gamma, config.rho));
    };
    const Trajectory traj = simulate(problem, u0, solver, {track});
    row.aborted = traj.aborted;
    row.sup_metric = sup;
    table.rows[i] = row;
  });
  table.verdict = study_verdict(table.rows, &table.metric_spread);
  return table;
}

}  // namespace gkdv
