#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gkdv/dynamics.hpp"
#include "gkdv/error.hpp"
#include "support.hpp"

using namespace gkdv;
using gkdv::testing::max_diff;
using gkdv::testing::random_field;
using std::numbers::pi;

namespace {

SpectralField sin1(const Grid& grid) {
  SpectralField u(grid);
  u.set_mode(1, Complex(0.0, -0.5));
  return u;
}

}  // namespace

TEST_CASE("polynomial evaluation") {
  const auto g = PolynomialNonlinearity::from_coefficients({1.0, -2.0, 0.0, 0.0});
  CHECK(g.degree() == 3);
  CHECK(g.degrees() == std::vector<int>{2, 3});
  CHECK(g.value(2.0) == doctest::Approx(4.0 - 16.0));
  CHECK(g.derivative(2.0) == doctest::Approx(4.0 - 24.0));
  CHECK(g.primitive(2.0) == doctest::Approx(8.0 / 3.0 - 8.0));
  CHECK(g.coefficient(3) == -2.0);
  CHECK(g.coefficient(7) == 0.0);

  const auto zero = PolynomialNonlinearity::from_coefficients({0.0, 0.0});
  CHECK(zero.is_zero());
  CHECK(zero.degree() == 0);
  CHECK(zero.value(3.0) == 0.0);
  CHECK(PolynomialNonlinearity::monomial(5, 2.0).degree() == 5);
}

TEST_CASE("problem validation") {
  const Grid grid = Grid::for_degree(8, 4);
  CHECK_THROWS_AS(Problem(PolynomialNonlinearity::monomial(3, 1.0), -0.1, grid), std::invalid_argument);
  CHECK_THROWS_AS(Problem(PolynomialNonlinearity::monomial(5, 1.0), 0.0, grid), HeadroomError);
  CHECK_NOTHROW(Problem(PolynomialNonlinearity::monomial(3, 1.0), 0.0, grid));
}

TEST_CASE("nonlinear term of u^2 at sin x") {
  // sin^2 = 1/2 - cos(2x)/2, so g_2 = -1/4 and -ik g_k = i/2 at k = 2.
  const Grid grid = Grid::for_degree(4, 3);
  const SpectralField n = nonlinear_rhs(sin1(grid), PolynomialNonlinearity::monomial(2, 1.0));
  CHECK(std::abs(n[2] - Complex(0.0, 0.5)) < 1e-15);
  CHECK(std::abs(n[1]) < 1e-15);
  CHECK(std::abs(n[3]) < 1e-15);
}

TEST_CASE("linear steady state for cos x forcing") {
  const Grid grid(4, 10);
  SpectralField f(grid);
  f.set_mode(1, 0.5);
  const SpectralField F = steady_state_linear(f, 1.0);
  CHECK(std::abs(F[1] - Complex(0.25, 0.25)) < 1e-16);
  CHECK(std::abs(F[2]) == 0.0);
}

TEST_CASE("zero step is the identity") {
  const Grid grid = Grid::for_degree(8, 4);
  const Problem p(PolynomialNonlinearity::monomial(3, 1.0), 0.3, grid);
  const SpectralField u = random_field(grid, 9);
  CHECK(max_diff(ifrk4_step(u, p, 0.0, 0.0), u) == 0.0);
}

TEST_CASE("linear problem is integrated exactly") {
  const Grid grid = Grid::for_degree(16, 2);
  SpectralField f(grid);
  f.set_mode(1, 0.5);
  f.set_mode(3, Complex(0.1, -0.2));
  const double gamma = 0.7;
  const Problem p(PolynomialNonlinearity{}, gamma, f);
  const SpectralField u0 = random_field(grid, 4);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 2.0;
  cfg.stride = 50;
  const Trajectory traj = simulate(p, u0, cfg);
  const SpectralField F = steady_state_linear(f, gamma);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const SpectralField exact = F + airy_propagator(u0 - F, traj.times[i], gamma);
    CHECK(max_diff(traj.snapshots[i], exact) < 1e-10);
    CHECK(traj.phases[i] == 0.0);
  }
}

TEST_CASE("simulate samples t = 0, every stride and the final step") {
  const Grid grid = Grid::for_degree(8, 4);
  const Problem p(PolynomialNonlinearity::monomial(3, 1.0), 0.0, grid);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 0.25;
  cfg.stride = 10;
  std::vector<long> seen;
  const Trajectory traj = simulate(p, sin1(grid), cfg, {[&](const Sample& s) { seen.push_back(s.step); }});
  CHECK(seen == std::vector<long>{0, 10, 20, 25});
  CHECK(traj.size() == 4);
  CHECK(traj.times.back() == doctest::Approx(0.25));
  CHECK_FALSE(traj.aborted);
}

TEST_CASE("phase of mKdV from sin x grows at rate 3 pi") {
  const Grid grid = Grid::for_degree(32, 4);
  const Problem p(PolynomialNonlinearity::monomial(3, 1.0), 0.0, grid);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.01;
  const Trajectory traj = simulate(p, sin1(grid), cfg);
  CHECK(traj.phases.back() == doctest::Approx(3.0 * pi * 0.01).epsilon(1e-6));
}

TEST_CASE("blow-up cap aborts with a partial trajectory") {
  const Grid grid = Grid::for_degree(8, 4);
  const Problem p(PolynomialNonlinearity::monomial(3, 1.0), 0.0, grid);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.blowup_cap = 0.5;
  const Trajectory traj = simulate(p, sin1(grid), cfg);
  CHECK(traj.aborted);
  CHECK(traj.abort_step.has_value());
  CHECK_FALSE(traj.abort_reason.empty());
}

TEST_CASE("non-finite states abort instead of propagating") {
  const Grid grid = Grid::for_degree(8, 6);
  const Problem p(PolynomialNonlinearity::monomial(5, 1.0), 0.0, grid);
  SpectralField u(grid);
  u.set_mode(1, 1e80);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.1;
  cfg.blowup_cap = 1e300;
  const Trajectory traj = simulate(p, u, cfg);
  CHECK(traj.aborted);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.dt = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg.dt = 0.1;
  cfg.stride = 0;
  CHECK_THROWS(cfg.validate());
  cfg.stride = 1;
  cfg.t_end = 1.0;
  CHECK(cfg.steps() == 10);
}

TEST_CASE("runs are bitwise deterministic") {
  const Grid grid = Grid::for_degree(16, 4);
  SpectralField f(grid);
  f.set_mode(1, 0.5);
  const Problem p(PolynomialNonlinearity::monomial(3, -1.0), 0.5, f);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.2;
  cfg.stride = 20;
  const SpectralField u0 = random_field(grid, 11);
  const Trajectory a = simulate(p, u0, cfg);
  const Trajectory b = simulate(p, u0, cfg);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(max_diff(a.snapshots[i], b.snapshots[i]) == 0.0);
    CHECK(a.phases[i] == b.phases[i]);
  }
}

TEST_CASE("fourth-order convergence in dt") {
  // Asymptotic regime needs k^3 dt << 1 on the excited modes.
  const Grid grid = Grid::for_degree(6, 4);
  SpectralField f(grid);
  f.set_mode(1, 0.5);
  const Problem p(PolynomialNonlinearity::monomial(3, 1.0), 0.2, f);
  const SpectralField u0 = random_field(grid, 2, 3.0);
  auto run = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 0.4;
    cfg.stride = 1000000;
    return simulate(p, u0, cfg).snapshots.back();
  };
  const SpectralField ref = run(2.5e-5);
  const double e1 = max_diff(run(4e-3), ref);
  const double e2 = max_diff(run(2e-3), ref);
  CHECK(std::log2(e1 / e2) >= 3.9);
}

TEST_CASE("steady state of sin 2x forcing and zero linear residual") {
  const Grid grid(4, 10);
  SpectralField f(grid);
  f.set_mode(2, Complex(0.0, -0.5));
  const SpectralField F = steady_state_linear(f, 2.0);
  CHECK(std::abs(F[2] - Complex(0.0, -0.5) / Complex(2.0, -8.0)) < 1e-16);

  SpectralField g(grid);
  g.set_mode(1, Complex(0.3, 0.1));
  g.set_mode(3, Complex(-0.2, 0.4));
  for (double gamma : {0.0, 1.0}) {
    const Problem p(PolynomialNonlinearity{}, gamma, g);
    CHECK(full_rhs(steady_state_linear(g, gamma), p, 0.0).max_abs() < 1e-12);
  }
}

TEST_CASE("damping removes L2 at rate gamma") {
  const Grid grid = Grid::for_degree(32, 4);
  const double gamma = 0.5;
  const Problem p(PolynomialNonlinearity::monomial(3, 1.0), gamma, grid);
  const SpectralField u0 = random_field(grid, 13, 2.0);
  SolverConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = 10.0;
  cfg.stride = 10000;
  cfg.keep_snapshots = false;
  const double n0 = sobolev_norm(u0, 0.0);
  double worst = 0.0;
  simulate(p, u0, cfg, {[&](const Sample& s) {
    const double expect = std::exp(-gamma * s.t) * n0;
    worst = std::max(worst, std::abs(sobolev_norm(s.u, 0.0) - expect) / expect);
  }});
  CHECK(worst <= 1e-8);
}

TEST_CASE("forced L2 balance: d/dt int u^2 = -2 gamma int u^2 + 2 int u f") {
  const Grid grid = Grid::for_degree(16, 4);
  SpectralField f(grid);
  f.set_mode(1, 0.5);
  const double gamma = 0.5;
  const Problem p(PolynomialNonlinearity::monomial(3, -1.0), gamma, f);
  SolverConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = 0.05;
  const Trajectory traj = simulate(p, random_field(grid, 3, 2.0), cfg);
  auto l2 = [](const SpectralField& u) { return 2 * pi * std::pow(sobolev_norm(u, 0.0), 2); };
  auto uf = [&](const SpectralField& u) {
    double s = 0.0;
    for (int k = -u.n(); k <= u.n(); ++k) s += (u[k] * std::conj(f[k])).real();
    return 2 * pi * s;
  };
  for (std::size_t i = 1; i + 1 < traj.size(); i += 50) {
    const double lhs = (l2(traj.snapshots[i + 1]) - l2(traj.snapshots[i - 1])) / (2 * cfg.dt);
    const double rhs = -2 * gamma * l2(traj.snapshots[i]) + 2 * uf(traj.snapshots[i]);
    CHECK(std::abs(lhs - rhs) < 1e-6);
    CHECK(traj.snapshots[i][0] == Complex(0.0));
  }
}
