#include "gkdv/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gkdv/error.hpp"

namespace gkdv {

HeadroomError::HeadroomError(int degree, int n, int m, int required)
    : Error("degree-" + std::to_string(degree) + " product at N=" + std::to_string(n) +
            " needs M >= " + std::to_string(required) + " sample points, grid has M=" +
            std::to_string(m)),
      required_(required) {}

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
struct Plans {
  fftw_plan forward;   // r2c
  fftw_plan backward;  // c2r
};

Plans plans_for(int m) {
  static std::mutex mutex;
  static std::map<int, Plans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  std::vector<double> real(static_cast<std::size_t>(m));
  std::vector<Complex> half(static_cast<std::size_t>(m / 2 + 1));
  auto* c = reinterpret_cast<fftw_complex*>(half.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans plans{fftw_plan_dft_r2c_1d(m, real.data(), c, flags),
              fftw_plan_dft_c2r_1d(m, c, real.data(), flags)};
  cache.emplace(m, plans);
  return plans;
}

bool is_smooth_number(int v) {
  for (int p : {2, 3, 5}) {
    while (v % p == 0) v /= p;
  }
  return v == 1;
}

void check_same_grid(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
}

}  // namespace

Grid::Grid(int n, int m) : n_(n), m_(m) {
  if (n < 1) throw std::invalid_argument("grid needs N >= 1");
  if (m < 2 * n + 2) {
    throw std::invalid_argument("grid needs M >= 2N+2 (N=" + std::to_string(n) +
                                ", M=" + std::to_string(m) + ")");
  }
}

Grid Grid::for_degree(int n, int degree) {
  int m = std::max(2 * n + 2, required_points(n, std::max(degree, 1)));
  while (m % 2 != 0 || !is_smooth_number(m)) ++m;
  return Grid(n, m);
}

double Grid::spacing() const { return 2.0 * std::numbers::pi / m_; }

void Grid::require_degree(int degree) const {
  const int need = required_points(n_, degree);
  if (m_ < need) throw HeadroomError(degree, n_, m_, need);
}

SpectralField::SpectralField(const Grid& grid)
    : grid_(grid), coeffs_(static_cast<std::size_t>(2 * grid.n() + 1)) {}

SpectralField SpectralField::from_coefficients(const Grid& grid, std::vector<Complex> coeffs,
                                               double tolerance) {
  if (coeffs.size() != static_cast<std::size_t>(2 * grid.n() + 1)) {
    throw std::invalid_argument("expected 2N+1 coefficients");
  }
  SpectralField f(grid);
  f.coeffs_ = std::move(coeffs);
  if (!f.is_finite()) throw std::invalid_argument("non-finite Fourier coefficient");
  const double scale = std::max(1.0, f.max_abs());
  if (!f.is_hermitian(tolerance * scale)) {
    throw std::invalid_argument("coefficients are not Hermitian (field is not real)");
  }
  if (std::abs(f[0]) > tolerance * scale) throw std::invalid_argument("field is not mean-zero");
  f.symmetrize();
  return f;
}

void SpectralField::set_mode(int k, Complex value) {
  if (k == 0) return;
  if (k < 0) {
    k = -k;
    value = std::conj(value);
  }
  if (k > n()) throw std::out_of_range("wavenumber beyond grid bandwidth");
  coeffs_[static_cast<std::size_t>(n() + k)] = value;
  coeffs_[static_cast<std::size_t>(n() - k)] = std::conj(value);
}

void SpectralField::symmetrize() {
  const int n = this->n();
  for (int k = 1; k <= n; ++k) {
    coeffs_[static_cast<std::size_t>(n - k)] = std::conj(coeffs_[static_cast<std::size_t>(n + k)]);
  }
  coeffs_[static_cast<std::size_t>(n)] = 0.0;
}

bool SpectralField::is_hermitian(double tolerance) const {
  for (int k = 1; k <= n(); ++k) {
    if (std::abs((*this)[k] - std::conj((*this)[-k])) > tolerance) return false;
  }
  return std::abs((*this)[0].imag()) <= tolerance;
}

bool SpectralField::is_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

double SpectralField::max_abs() const {
  double out = 0.0;
  for (Complex c : coeffs_) out = std::max(out, std::abs(c));
  return out;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  check_same_grid(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  check_same_grid(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(Complex scale) {
  for (Complex& c : coeffs_) c *= scale;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(Complex scale, SpectralField a) { return a *= scale; }

SpectralWorkspace::SpectralWorkspace(const Grid& grid)
    : grid_(grid),
      physical_(static_cast<std::size_t>(grid.m())),
      half_(static_cast<std::size_t>(grid.m() / 2 + 1)) {}

void SpectralWorkspace::load(const SpectralField& field) {
  if (!(field.grid() == grid_)) throw std::invalid_argument("workspace grid mismatch");
  std::fill(half_.begin(), half_.end(), Complex{});
  for (int k = 0; k <= grid_.n(); ++k) half_[static_cast<std::size_t>(k)] = field[k];
  fftw_execute_dft_c2r(plans_for(grid_.m()).backward,
                       reinterpret_cast<fftw_complex*>(half_.data()), physical_.data());
}

void SpectralWorkspace::store(SpectralField& out) {
  if (!(out.grid() == grid_)) throw std::invalid_argument("workspace grid mismatch");
  fftw_execute_dft_r2c(plans_for(grid_.m()).forward, physical_.data(),
                       reinterpret_cast<fftw_complex*>(half_.data()));
  const double inv = 1.0 / grid_.m();
  auto coeffs = out.mutable_coefficients();
  const int n = grid_.n();
  for (int k = 1; k <= n; ++k) {
    const Complex c = half_[static_cast<std::size_t>(k)] * inv;
    coeffs[static_cast<std::size_t>(n + k)] = c;
    coeffs[static_cast<std::size_t>(n - k)] = std::conj(c);
  }
  coeffs[static_cast<std::size_t>(n)] = 0.0;
}

std::vector<double> to_physical(const SpectralField& field) {
  SpectralWorkspace ws(field.grid());
  ws.load(field);
  return {ws.physical().begin(), ws.physical().end()};
}

SpectralField to_spectral(const Grid& grid, std::span<const double> samples) {
  if (samples.size() != static_cast<std::size_t>(grid.m())) {
    throw std::invalid_argument("expected M samples");
  }
  if (!std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("non-finite sample");
  }
  SpectralWorkspace ws(grid);
  std::copy(samples.begin(), samples.end(), ws.physical().begin());
  SpectralField out(grid);
  ws.store(out);
  return out;
}

double mean_of_samples(std::span<const double> samples) {
  double sum = 0.0;
  for (double v : samples) sum += v;
  return sum / static_cast<double>(samples.size());
}

SpectralField dealiased_product(std::span<const SpectralField> fields) {
  if (fields.empty()) throw std::invalid_argument("empty product");
  const Grid& grid = fields.front().grid();
  for (const auto& f : fields) check_same_grid(fields.front(), f);
  grid.require_degree(static_cast<int>(fields.size()));

  SpectralWorkspace ws(grid);
  std::vector<double> acc(static_cast<std::size_t>(grid.m()), 1.0);
  for (const auto& f : fields) {
    ws.load(f);
    auto p = ws.physical();
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] *= p[j];
  }
  std::copy(acc.begin(), acc.end(), ws.physical().begin());
  SpectralField out(grid);
  ws.store(out);
  return out;
}

SpectralField dealiased_power(const SpectralField& field, int degree) {
  if (degree < 1) throw std::invalid_argument("power degree must be >= 1");
  field.grid().require_degree(degree);
  SpectralWorkspace ws(field.grid());
  ws.load(field);
  for (double& v : ws.physical()) {
    const double base = v;
    for (int j = 1; j < degree; ++j) v *= base;
  }
  SpectralField out(field.grid());
  ws.store(out);
  return out;
}

SpectralField apply_multiplier(const SpectralField& field,
                               const std::function<Complex(int)>& symbol) {
  SpectralField out(field.grid());
  auto c = out.mutable_coefficients();
  const int n = field.n();
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    c[static_cast<std::size_t>(k + n)] = symbol(k) * field[k];
  }
  return out;
}

double sobolev_norm(const SpectralField& field, double s) {
  double sum = 0.0;
  const int n = field.n();
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    sum += std::pow(bracket(k), 2.0 * s) * std::norm(field[k]);
  }
  return std::sqrt(sum);
}

SpectralField airy_propagator(const SpectralField& field, double t, double gamma) {
  const double damping = std::exp(-gamma * t);
  return apply_multiplier(field, [&](int k) {
    const double k3 = static_cast<double>(k) * k * k;
    return std::polar(damping, k3 * t);
  });
}

}  // namespace gkdv
