#include "gkdv/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gkdv/resonance.hpp"

namespace gkdv {

double theta_rate(const SpectralField& u, const PolynomialNonlinearity& g) {
  // The linear part 2 a_2 u of g' integrates to zero exactly for mean-zero u.
  if (g.degree() <= 2) return 0.0;
  // Zero mode of u^{n-1} is exact once M > (n-1)N; the product check is stricter.
  u.grid().require_degree(g.degree() - 1);
  SpectralWorkspace ws(u.grid());
  ws.load(u);
  const double linear = 2.0 * g.coefficient(2);
  double sum = 0.0;
  for (double v : ws.physical()) sum += g.derivative(v) - linear * v;
  return 2.0 * std::numbers::pi * sum / static_cast<double>(u.grid().m());
}

double translation(double phase) { return phase / (2.0 * std::numbers::pi); }

SpectralField apply_gauge(const SpectralField& u, double shift) {
  return apply_multiplier(u, [shift](int k) { return std::polar(1.0, k * shift); });
}

SpectralField ungauge_translate(const SpectralField& gauged, double shift) {
  return apply_multiplier(gauged, [shift](int k) { return std::polar(1.0, -k * shift); });
}

SpectralField gauged_forcing(const SpectralField& f, double shift) { return apply_gauge(f, shift); }

double exp_multiplier_identity_check(const SpectralField& u, double shift, int degree) {
  const SpectralField lhs = dealiased_power(apply_gauge(u, shift), degree);
  const SpectralField rhs = apply_gauge(dealiased_power(u, degree), shift);
  return (lhs - rhs).max_abs();
}

std::vector<SpectralField> gauged_snapshots(const Trajectory& trajectory) {
  if (trajectory.snapshots.size() != trajectory.phases.size()) {
    throw std::invalid_argument("trajectory has no stored snapshots");
  }
  std::vector<SpectralField> out;
  out.reserve(trajectory.snapshots.size());
  for (std::size_t i = 0; i < trajectory.snapshots.size(); ++i) {
    out.push_back(apply_gauge(trajectory.snapshots[i], translation(trajectory.phases[i])));
  }
  return out;
}

std::vector<ResidualPoint> modified_pde_residual(
    const Trajectory& trajectory, const Problem& problem,
    const std::optional<std::vector<std::size_t>>& indices) {
  const std::size_t count = trajectory.snapshots.size();
  if (count < 3) throw std::invalid_argument("modified-equation residual needs >= 3 snapshots");

  std::vector<std::size_t> picks;
  if (indices) {
    for (std::size_t i : *indices) {
      if (i == 0 || i + 1 >= count) throw std::out_of_range("residual sample must be interior");
      picks.push_back(i);
    }
  } else {
    for (std::size_t i = 1; i + 1 < count; ++i) picks.push_back(i);
  }

  const double gamma = problem.gamma();
  std::vector<ResidualPoint> out;
  out.reserve(picks.size());
  for (std::size_t i : picks) {
    const double width = trajectory.times[i + 1] - trajectory.times[i - 1];
    const double shift_prev = translation(trajectory.phases[i - 1]);
    const double shift = translation(trajectory.phases[i]);
    const double shift_next = translation(trajectory.phases[i + 1]);
    const SpectralField gauged = apply_gauge(trajectory.snapshots[i], shift);

    SpectralField res = (1.0 / width) * (apply_gauge(trajectory.snapshots[i + 1], shift_next) -
                                         apply_gauge(trajectory.snapshots[i - 1], shift_prev));
    // u_xxx + gamma u -> (-ik^3 + gamma) u_k
    res += apply_multiplier(gauged, [gamma](int k) {
      return Complex(gamma, -static_cast<double>(k) * k * k);
    });
    if (!problem.g().is_zero()) {
      const ResonanceSplit split = decompose_r1_r2_nr(gauged, problem.g());
      res += split.r2;
      res += split.nr;
    }
    res -= gauged_forcing(problem.forcing(), shift);
    out.push_back({trajectory.times[i], sobolev_norm(res, 0.0)});
  }
  return out;
}

}  // namespace gkdv
