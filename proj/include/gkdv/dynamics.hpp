#pragma once

// Damped, forced generalized KdV on the torus:
//
//   u_t + u_xxx + gamma u + (g(u))_x = f(x),
//
// integrated with an integrating-factor RK4 scheme. The linear symbol
// ik^3 - gamma is applied exactly; the accumulated gauge phase
// Theta(t) = int_0^t int g'(u) dx ds is carried as an extra state variable
// through the same stages.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gkdv/spectral.hpp"

namespace gkdv {

/// g(u) = sum_{j>=2} a_j u^j. The zero polynomial is allowed.
class PolynomialNonlinearity {
 public:
  PolynomialNonlinearity() = default;

  /// coefficients[i] is a_{i+2}. Trailing zeros are dropped.
  static PolynomialNonlinearity from_coefficients(std::vector<double> coefficients);
  static PolynomialNonlinearity monomial(int degree, double coefficient);

  /// 0 for the zero polynomial.
  int degree() const { return static_cast<int>(a_.size()) + 1 - (a_.empty() ? 1 : 0); }
  bool is_zero() const { return a_.empty(); }
  double coefficient(int j) const;

  double value(double x) const;
  double derivative(double x) const;
  /// G with G' = g, G(0) = 0.
  double primitive(double x) const;

  /// Degrees with nonzero coefficient, ascending.
  std::vector<int> degrees() const;

 private:
  std::vector<double> a_;  // a_[i] = a_{i+2}
};

class Problem {
 public:
  /// Validates gamma >= 0, a mean-zero forcing on `grid`, and grid headroom
  /// for g's degree. The same grid gives the exact zero mode of G(u)
  /// (degree + 1), which is all the energy needs.
  Problem(PolynomialNonlinearity g, double gamma, SpectralField forcing);
  Problem(PolynomialNonlinearity g, double gamma, const Grid& grid);

  const PolynomialNonlinearity& g() const { return g_; }
  double gamma() const { return gamma_; }
  const SpectralField& forcing() const { return forcing_; }
  const Grid& grid() const { return forcing_.grid(); }

 private:
  PolynomialNonlinearity g_;
  double gamma_;
  SpectralField forcing_;
};

enum class Scheme { ifrk4 };

struct SolverConfig {
  double dt = 1e-4;
  double t_end = 1.0;
  int stride = 1;
  Scheme scheme = Scheme::ifrk4;
  /// Abort when ||u||_{H^1} exceeds this.
  double blowup_cap = 1e6;
  bool keep_snapshots = true;

  /// Number of fixed steps, round(t_end / dt).
  long steps() const;
  void validate() const;
};

/// Snapshots u(t_i) and accumulated phase Theta(t_i) at every stride.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> snapshots;
  /// Theta(t) = int_0^t int_T g'(u) dx ds.
  std::vector<double> phases;
  long steps_taken = 0;
  bool aborted = false;
  std::string abort_reason;
  std::optional<long> abort_step;

  std::size_t size() const { return times.size(); }
};

struct Sample {
  long step;
  double t;
  const SpectralField& u;
  double phase;
};

using Observer = std::function<void(const Sample&)>;

/// -ik g(u)^_k with dealiased powers.
SpectralField nonlinear_rhs(const SpectralField& u, const PolynomialNonlinearity& g);

/// (ik^3 - gamma) u_k - ik g(u)^_k + f_k.
SpectralField full_rhs(const SpectralField& u, const Problem& problem, double t);

/// F_k = f_k / (gamma - ik^3).
SpectralField steady_state_linear(const SpectralField& f, double gamma);

/// One integrating-factor RK4 step of size dt (dt = 0 is the identity).
SpectralField ifrk4_step(const SpectralField& u, const Problem& problem, double t, double dt);

/// Integrates from u0 over [0, config.t_end] with fixed steps. Observers and
/// the returned trajectory see every `stride`-th step, including t = 0 and
/// the final step. For g = 0 the exact flow F + W_t^gamma (u0 - F) is
/// evaluated at every step instead. A non-finite state or ||u||_{H^1} > blowup_cap stops the
/// run and returns the partial trajectory with `aborted` set.
Trajectory simulate(const Problem& problem, const SpectralField& u0, const SolverConfig& config,
                    const std::vector<Observer>& observers = {});

/// Stepper that owns its FFT workspace; used by `simulate`. The state is
/// shifted by the linear steady state F (L F + f = 0), so the forcing is
/// integrated exactly: w = u - F obeys w_t = L w - ik g(F + w)^.
class Integrator {
 public:
  Integrator(const Problem& problem, double dt);

  /// Advances (u, phase) by one step in place.
  void step(SpectralField& u, double& phase);

 private:
  // -ik g(F + w)^ and the phase rate int g'(F + w) dx.
  void evaluate(const SpectralField& w, SpectralField& out, double& rate);

  const Problem& problem_;
  double dt_;
  std::vector<Complex> full_;  // e^{L dt}
  std::vector<Complex> half_;  // e^{L dt/2}
  SpectralWorkspace ws_;
  SpectralField k1_, k2_, k3_, k4_, stage_;
  SpectralField steady_, shifted_;
  bool forced_;
};

}  // namespace gkdv
