#pragma once

// Fourier representation of real mean-zero functions on the torus [0, 2pi).
//
// Convention: u(x) = sum_k u_k e^{ikx} with u_k = (1/2pi) int u e^{-ikx} dx.
// Sobolev norms use the coefficient convention (no 2pi factor); integral
// functionals such as int u^2 dx carry the explicit 2pi (see diagnostics.hpp).

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace gkdv {

using Complex = std::complex<double>;

/// Discretization of the torus: modes |k| <= n, m equispaced samples.
class Grid {
 public:
  Grid(int n, int m);

  /// Smallest FFT-friendly grid that resolves products of `degree` exactly.
  static Grid for_degree(int n, int degree);

  /// Sample count needed for an alias-free degree-d product at bandwidth n.
  static int required_points(int n, int degree) { return (degree + 1) * n + 1; }

  int n() const { return n_; }
  int m() const { return m_; }
  double spacing() const;
  double point(int j) const { return j * spacing(); }

  /// Highest product degree this grid truncates exactly.
  int max_exact_degree() const { return (m_ - 1) / n_ - 1; }
  void require_degree(int degree) const;

  bool operator==(const Grid&) const = default;

 private:
  int n_;
  int m_;
};

/// <k> = 1 + |k|.
inline double bracket(int k) { return 1.0 + (k < 0 ? -k : k); }

/// Fourier coefficients u_k, k = -N..N, of a real mean-zero function.
///
/// Hermitian symmetry and u_0 = 0 are maintained by every library operation;
/// `from_coefficients` validates them for user-supplied data.
class SpectralField {
 public:
  explicit SpectralField(const Grid& grid);

  static SpectralField from_coefficients(const Grid& grid, std::vector<Complex> coeffs,
                                         double tolerance = 1e-12);

  const Grid& grid() const { return grid_; }
  int n() const { return grid_.n(); }

  Complex operator[](int k) const { return coeffs_[static_cast<std::size_t>(k + n())]; }

  /// Sets u_k and u_{-k} = conj(u_k). k = 0 is ignored (mean stays zero).
  void set_mode(int k, Complex value);

  std::span<const Complex> coefficients() const { return coeffs_; }
  std::span<Complex> mutable_coefficients() { return coeffs_; }

  /// Restores u_{-k} = conj(u_k) from the k > 0 half and zeroes the mean.
  void symmetrize();

  bool is_hermitian(double tolerance) const;
  bool is_finite() const;
  double max_abs() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(Complex scale);

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(Complex scale, SpectralField a);

/// Samples u(x_j) = sum_k u_k e^{ikx_j} on the grid's m points.
std::vector<double> to_physical(const SpectralField& field);

/// u_k = (1/M) sum_j u(x_j) e^{-ikx_j} for |k| <= N, mean projected out.
/// Throws std::invalid_argument on non-finite samples or a length mismatch.
SpectralField to_spectral(const Grid& grid, std::span<const double> samples);

/// Zero mode (1/M) sum_j u(x_j) of a sample vector.
double mean_of_samples(std::span<const double> samples);

/// Alias-free truncation of the pointwise product of all fields.
SpectralField dealiased_product(std::span<const SpectralField> fields);

/// u^degree, dealiased.
SpectralField dealiased_power(const SpectralField& field, int degree);

/// (out)_k = symbol(k) u_k. The symbol must respect symbol(-k) = conj(symbol(k))
/// for the result to stay real.
SpectralField apply_multiplier(const SpectralField& field,
                               const std::function<Complex(int)>& symbol);

/// (sum_k <k>^{2s} |u_k|^2)^{1/2}.
double sobolev_norm(const SpectralField& field, double s);

/// e^{(ik^3 - gamma) t} u_k, the damped Airy flow W_t^gamma.
SpectralField airy_propagator(const SpectralField& field, double t, double gamma);

/// Reusable FFT buffers for repeated transforms on one grid. Not thread-safe;
/// give each thread its own.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const Grid& grid);

  const Grid& grid() const { return grid_; }

  /// Fills `physical()` with samples of `field`.
  void load(const SpectralField& field);
  std::span<double> physical() { return physical_; }

  /// Transforms `physical()` back into `out` (mean projected).
  void store(SpectralField& out);

 private:
  Grid grid_;
  std::vector<double> physical_;
  std::vector<Complex> half_;
};

}  // namespace gkdv
