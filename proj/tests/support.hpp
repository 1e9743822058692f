#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gkdv/random.hpp"
#include "gkdv/spectral.hpp"

namespace gkdv::testing {

// Random smooth-ish field: |u_k| = (0.5 + 0.5 U) <k>^{-decay}, uniform phases.
inline SpectralField random_field(const Grid& grid, std::uint64_t seed, double decay = 1.0) {
  SplitMix64 rng(seed);
  SpectralField u(grid);
  for (int k = 1; k <= grid.n(); ++k) {
    const double amp = (0.5 + 0.5 * rng.uniform()) * std::pow(bracket(k), -decay);
    u.set_mode(k, std::polar(amp, rng.phase()));
  }
  return u;
}

// Direct truncated convolution (a * b)_k, |k| <= N, mean dropped.
inline SpectralField brute_product(const SpectralField& a, const SpectralField& b) {
  const int n = a.n();
  SpectralField out(a.grid());
  auto c = out.mutable_coefficients();
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    Complex s = 0.0;
    for (int p = -n; p <= n; ++p) {
      const int q = k - p;
      if (q < -n || q > n) continue;
      s += a[p] * b[q];
    }
    c[static_cast<std::size_t>(k + n)] = s;
  }
  return out;
}

inline double max_diff(const SpectralField& a, const SpectralField& b) { return (a - b).max_abs(); }

}  // namespace gkdv::testing
