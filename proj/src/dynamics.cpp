#include "gkdv/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gkdv/error.hpp"

namespace gkdv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex linear_symbol(int k, double gamma) {
  const double k3 = static_cast<double>(k) * k * k;
  return {-gamma, k3};
}

}  // namespace

PolynomialNonlinearity PolynomialNonlinearity::from_coefficients(std::vector<double> coefficients) {
  for (double a : coefficients) {
    if (!std::isfinite(a)) throw std::invalid_argument("non-finite polynomial coefficient");
  }
  while (!coefficients.empty() && coefficients.back() == 0.0) coefficients.pop_back();
  PolynomialNonlinearity g;
  g.a_ = std::move(coefficients);
  return g;
}

PolynomialNonlinearity PolynomialNonlinearity::monomial(int degree, double coefficient) {
  if (degree < 2) throw std::invalid_argument("g has no constant or linear term (degree >= 2)");
  std::vector<double> a(static_cast<std::size_t>(degree - 1), 0.0);
  a.back() = coefficient;
  return from_coefficients(std::move(a));
}

double PolynomialNonlinearity::coefficient(int j) const {
  if (j < 2 || j > degree()) return 0.0;
  return a_[static_cast<std::size_t>(j - 2)];
}

double PolynomialNonlinearity::value(double x) const {
  // Horner on sum a_j x^j = x^2 (a_2 + a_3 x + ...).
  double acc = 0.0;
  for (auto it = a_.rbegin(); it != a_.rend(); ++it) acc = acc * x + *it;
  return acc * x * x;
}

double PolynomialNonlinearity::derivative(double x) const {
  double acc = 0.0;
  for (int j = degree(); j >= 2; --j) acc = acc * x + j * coefficient(j);
  return acc * x;
}

double PolynomialNonlinearity::primitive(double x) const {
  double acc = 0.0;
  for (int j = degree(); j >= 2; --j) acc = acc * x + coefficient(j) / (j + 1);
  return acc * x * x * x;
}

std::vector<int> PolynomialNonlinearity::degrees() const {
  std::vector<int> out;
  for (int j = 2; j <= degree(); ++j) {
    if (coefficient(j) != 0.0) out.push_back(j);
  }
  return out;
}

Problem::Problem(PolynomialNonlinearity g, double gamma, SpectralField forcing)
    : g_(std::move(g)), gamma_(gamma), forcing_(std::move(forcing)) {
  if (!std::isfinite(gamma) || gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (!forcing_.is_finite()) throw std::invalid_argument("non-finite forcing");
  if (forcing_[0] != Complex{}) throw std::invalid_argument("forcing must be mean-zero");
  if (!g_.is_zero()) grid().require_degree(g_.degree());
}

Problem::Problem(PolynomialNonlinearity g, double gamma, const Grid& grid)
    : Problem(std::move(g), gamma, SpectralField(grid)) {}

long SolverConfig::steps() const { return std::lround(t_end / dt); }

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (!(blowup_cap > 0.0)) throw std::invalid_argument("blowup cap must be positive");
}

SpectralField nonlinear_rhs(const SpectralField& u, const PolynomialNonlinearity& g) {
  SpectralField out(u.grid());
  if (g.is_zero()) return out;
  u.grid().require_degree(g.degree());
  SpectralWorkspace ws(u.grid());
  ws.load(u);
  for (double& v : ws.physical()) v = g.value(v);
  ws.store(out);
  return apply_multiplier(out, [](int k) { return Complex(0.0, -k); });
}

SpectralField full_rhs(const SpectralField& u, const Problem& problem, double /*t*/) {
  SpectralField out = nonlinear_rhs(u, problem.g());
  out += problem.forcing();
  auto c = out.mutable_coefficients();
  const int n = u.n();
  for (int k = -n; k <= n; ++k) {
    c[static_cast<std::size_t>(k + n)] += linear_symbol(k, problem.gamma()) * u[k];
  }
  c[static_cast<std::size_t>(n)] = 0.0;
  return out;
}

SpectralField steady_state_linear(const SpectralField& f, double gamma) {
  return apply_multiplier(f, [gamma](int k) {
    const Complex denom = -linear_symbol(k, gamma);  // gamma - ik^3
    if (denom == Complex{}) throw std::domain_error("gamma - ik^3 vanishes");
    return 1.0 / denom;
  });
}

Integrator::Integrator(const Problem& problem, double dt)
    : problem_(problem),
      dt_(dt),
      full_(static_cast<std::size_t>(2 * problem.grid().n() + 1)),
      half_(full_.size()),
      ws_(problem.grid()),
      k1_(problem.grid()),
      k2_(problem.grid()),
      k3_(problem.grid()),
      k4_(problem.grid()),
      stage_(problem.grid()),
      steady_(steady_state_linear(problem.forcing(), problem.gamma())),
      shifted_(problem.grid()),
      forced_(problem.forcing().max_abs() > 0.0) {
  const int n = problem.grid().n();
  for (int k = -n; k <= n; ++k) {
    const Complex l = linear_symbol(k, problem.gamma());
    full_[static_cast<std::size_t>(k + n)] = std::exp(l * dt);
    half_[static_cast<std::size_t>(k + n)] = std::exp(l * (0.5 * dt));
  }
}

void Integrator::evaluate(const SpectralField& w, SpectralField& out, double& rate) {
  const auto& g = problem_.g();
  const int n = w.n();
  auto c = out.mutable_coefficients();
  if (g.is_zero()) {
    rate = 0.0;
    std::fill(c.begin(), c.end(), Complex{});
  } else {
    if (forced_) {
      shifted_ = w;
      shifted_ += steady_;
      ws_.load(shifted_);
    } else {
      ws_.load(w);
    }
    auto p = ws_.physical();
    // 2 a_2 u has zero mean; leaving it out keeps Theta exactly 0 for quadratic g.
    const double linear = 2.0 * g.coefficient(2);
    double sum = 0.0;
    for (double& v : p) {
      sum += g.derivative(v) - linear * v;
      v = g.value(v);
    }
    rate = g.degree() <= 2 ? 0.0 : kTwoPi * sum / static_cast<double>(p.size());
    ws_.store(out);
    for (int k = -n; k <= n; ++k) c[static_cast<std::size_t>(k + n)] *= Complex(0.0, -k);
  }
}

void Integrator::step(SpectralField& u, double& phase) {
  const double dt = dt_;
  if (forced_) u -= steady_;
  auto uc = u.mutable_coefficients();
  auto s = stage_.mutable_coefficients();
  const std::size_t size = uc.size();
  double r1 = 0, r2 = 0, r3 = 0, r4 = 0;

  evaluate(u, k1_, r1);
  auto a = k1_.coefficients();
  for (std::size_t i = 0; i < size; ++i) s[i] = half_[i] * (uc[i] + 0.5 * dt * a[i]);
  evaluate(stage_, k2_, r2);
  auto b = k2_.coefficients();
  for (std::size_t i = 0; i < size; ++i) s[i] = half_[i] * uc[i] + 0.5 * dt * b[i];
  evaluate(stage_, k3_, r3);
  auto c = k3_.coefficients();
  for (std::size_t i = 0; i < size; ++i) s[i] = full_[i] * uc[i] + dt * half_[i] * c[i];
  evaluate(stage_, k4_, r4);
  auto d = k4_.coefficients();
  for (std::size_t i = 0; i < size; ++i) {
    uc[i] = full_[i] * uc[i] +
            (dt / 6.0) * (full_[i] * a[i] + 2.0 * half_[i] * (b[i] + c[i]) + d[i]);
  }
  phase += (dt / 6.0) * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
  if (forced_) u += steady_;
}

SpectralField ifrk4_step(const SpectralField& u, const Problem& problem, double /*t*/, double dt) {
  if (dt < 0.0 || !std::isfinite(dt)) throw std::invalid_argument("dt must be >= 0");
  if (!(u.grid() == problem.grid())) throw std::invalid_argument("state and problem grids differ");
  SpectralField out = u;
  if (dt == 0.0) return out;
  Integrator integrator(problem, dt);
  double phase = 0.0;
  integrator.step(out, phase);
  if (!out.is_finite()) throw NumericalAbort("non-finite state after step", 1);
  return out;
}

Trajectory simulate(const Problem& problem, const SpectralField& u0, const SolverConfig& config,
                    const std::vector<Observer>& observers) {
  config.validate();
  if (!(u0.grid() == problem.grid())) throw std::invalid_argument("u0 is not on the problem grid");
  if (u0[0] != Complex{}) throw std::invalid_argument("u0 must be mean-zero");

  Trajectory traj;
  SpectralField u = u0;
  double phase = 0.0;
  const long steps = config.steps();
  Integrator integrator(problem, config.dt);

  auto record = [&](long step) {
    const double t = static_cast<double>(step) * config.dt;
    traj.times.push_back(t);
    traj.phases.push_back(phase);
    if (config.keep_snapshots) traj.snapshots.push_back(u);
    const Sample sample{step, t, u, phase};
    for (const auto& obs : observers) obs(sample);
  };

  // Linear problems use the closed-form flow so no rounding accumulates.
  const bool linear = problem.g().is_zero();
  const SpectralField steady = steady_state_linear(problem.forcing(), problem.gamma());
  const SpectralField transient = u0 - steady;

  record(0);
  for (long step = 1; step <= steps; ++step) {
    if (linear) {
      u = steady + airy_propagator(transient, static_cast<double>(step) * config.dt, problem.gamma());
    } else {
      integrator.step(u, phase);
    }
    traj.steps_taken = step;
    const double h1 = sobolev_norm(u, 1.0);
    if (!u.is_finite() || !std::isfinite(phase) || !std::isfinite(h1)) {
      traj.aborted = true;
      traj.abort_step = step;
      traj.abort_reason = "non-finite state at step " + std::to_string(step);
      break;
    }
    if (h1 > config.blowup_cap) {
      traj.aborted = true;
      traj.abort_step = step;
      traj.abort_reason = "H1 norm " + std::to_string(h1) + " exceeded cap at step " +
                          std::to_string(step);
      record(step);
      break;
    }
    if (step % config.stride == 0 || step == steps) record(step);
  }
  return traj;
}

}  // namespace gkdv
