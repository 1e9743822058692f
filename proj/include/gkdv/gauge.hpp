#pragma once

// Gauge transform removing the R^1 part of the nonlinearity.
//
// The accumulated phase Theta(t) = int_0^t int_T g'(u) dx ds is stored on the
// trajectory. With the coefficient convention the multiplier that cancels
// R^1 is exp(ik Theta / 2pi): the torus measure inside the multiplier is the
// normalized one, which is what makes sum_{k_1+..+k_{n-1}=0} prod u_{k_j}
// equal to the zero mode of u^{n-1}. `translation(Theta)` converts the phase
// into the spatial shift used by `apply_gauge`; u~(x) = u(x + shift).

#include <optional>
#include <vector>

#include "gkdv/dynamics.hpp"
#include "gkdv/spectral.hpp"

namespace gkdv {

/// int_T g'(u) dx = 2pi sum_j j a_j (u^{j-1})^_0.
double theta_rate(const SpectralField& u, const PolynomialNonlinearity& g);

/// Spatial shift Theta / 2pi.
double translation(double phase);

/// (out)_k = e^{ik shift} u_k, i.e. out(x) = u(x + shift).
SpectralField apply_gauge(const SpectralField& u, double shift);

/// Exact inverse of apply_gauge.
SpectralField ungauge_translate(const SpectralField& gauged, double shift);

/// f~ = apply_gauge(f, shift).
SpectralField gauged_forcing(const SpectralField& f, double shift);

/// max_k |((gauged u)^n)_k - e^{ik shift} (u^n)_k|.
double exp_multiplier_identity_check(const SpectralField& u, double shift, int degree);

/// Gauged snapshots apply_gauge(u(t_i), translation(Theta(t_i))).
std::vector<SpectralField> gauged_snapshots(const Trajectory& trajectory);

struct ResidualPoint {
  double t;
  double value;
};

/// ||d_t u~ + u~_xxx + gamma u~ + R^2[u~] + NR[u~] - f~||_{H^0} at interior
/// samples (centered differences). `indices` selects samples; default is
/// every interior sample. Needs >= 3 snapshots.
std::vector<ResidualPoint> modified_pde_residual(
    const Trajectory& trajectory, const Problem& problem,
    const std::optional<std::vector<std::size_t>>& indices = std::nullopt);

}  // namespace gkdv
