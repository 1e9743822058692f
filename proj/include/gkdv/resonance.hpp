#pragma once

// Frequency-interaction analysis: the dispersion function H_n, the case
// classification of n-tuples, the brute-force multilinear convolution
// T_sigma^n, the splits of the nonlinearity (R^1 / R^2 / NR and
// HL / HH / RE), and the normal-form operator with symbol k / H_n.
//
// Everything here enumerates ordered tuples (k_1..k_n) of nonzero
// wavenumbers with |k_j| <= N and nonzero sum k, |k| <= N. It is O(N^n) on
// purpose and serves as the oracle for the FFT paths.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gkdv/dynamics.hpp"
#include "gkdv/spectral.hpp"

namespace gkdv {

using WideInt = __int128;

std::string to_string(WideInt value);

/// (k_1, ..., k_n), all entries nonzero, n >= 2.
class FrequencyTuple {
 public:
  explicit FrequencyTuple(std::vector<std::int64_t> entries);

  std::size_t size() const { return k_.size(); }
  std::span<const std::int64_t> entries() const { return k_; }
  std::int64_t operator[](std::size_t i) const { return k_[i]; }

  /// k = sum k_j.
  std::int64_t total() const;
  /// j-th largest |k_i|, 1-based (k*_1 = k*).
  std::int64_t k_star(std::size_t j) const;

 private:
  std::vector<std::int64_t> k_;
};

/// (sum k_j)^3 - sum k_j^3 in exact 128-bit arithmetic. Throws OverflowError
/// instead of wrapping.
WideInt h_n(std::span<const std::int64_t> k);
inline WideInt h_n(const FrequencyTuple& t) { return h_n(t.entries()); }

/// Checks H_3 = 3 (k1+k2)(k1+k3)(k2+k3) for every nonzero |k_i| <= bound.
bool h3_factorization_check(int bound);

struct CaseConstants {
  double a = 0.25;
  double c = 0.25;
  double d = 0.25;

  static CaseConstants uniform(double v) { return {v, v, v}; }
};

/// Which alternatives of the resonance case analysis a tuple satisfies.
///   A: |H_n| >= cA (k*)^2
///   B: some k_j = k
///   C: k*_3 >= cC |k|            (n >= 3; for n = 3 this is |k_j| >= cC |k| for all j)
///   D: (k*_3)^2 k*_4 >= cD (k*)^2 (n >= 4)
struct CaseLabel {
  bool a = false;
  bool b = false;
  bool c = false;
  bool d = false;
  CaseConstants constants;

  bool any() const { return a || b || c || d; }
  std::string to_string() const;
};

CaseLabel classify_cases(const FrequencyTuple& tuple, const CaseConstants& constants);

/// Largest c with the tuple covered at cA = cC = cD = c (+inf when Case B
/// holds or the tuple is covered at every constant).
double case_margin(const FrequencyTuple& tuple);

struct CaseScanReport {
  int n = 0;
  int bound = 0;
  double certified_constant = 0.0;
  std::uint64_t tuples = 0;  // ordered tuples with nonzero sum
  std::uint64_t count_a = 0;
  std::uint64_t count_b = 0;
  std::uint64_t count_c = 0;
  std::uint64_t count_d = 0;
  CaseConstants constants;   // constants the counts refer to
  std::uint64_t uncovered = 0;
  std::vector<std::vector<std::int64_t>> uncovered_examples;  // first few
  std::vector<std::int64_t> worst_tuple;  // a tuple attaining the certified constant
};

/// Default cap on enumerated (unordered) tuples for scans.
inline constexpr std::uint64_t kDefaultScanBudget = 400'000'000ULL;

/// Exhaustive scan over all tuples with nonzero entries |k_i| <= bound and
/// nonzero sum. The certified constant is the minimum case_margin; counts and
/// uncovered tuples refer to `constants` (defaults to the certified constant).
CaseScanReport scan_cases(int n, int bound, std::optional<CaseConstants> constants = std::nullopt,
                          std::uint64_t budget = kDefaultScanBudget);

/// Largest c such that every tuple with |k_i| <= bound is covered at c.
double min_case_constant(int n, int bound, std::uint64_t budget = kDefaultScanBudget);

/// A multilinear symbol sigma(k, k_1..k_n) with its restriction Omega_k.
struct SymbolSpec {
  std::function<Complex(std::int64_t k, std::span<const std::int64_t> ks)> symbol;
  /// Empty means unrestricted.
  std::function<bool(std::int64_t k, std::span<const std::int64_t> ks)> restriction;
};

inline constexpr std::uint64_t kDefaultConvolutionBudget = 200'000'000ULL;

/// Number of inner iterations convolve_n would perform.
std::uint64_t convolution_cost(int n_fields, int bandwidth);

/// sum_{Omega_k} sigma(k, k_vec) prod_j (u_j)_{k_j}, for 0 < |k| <= N.
SpectralField convolve_n(std::span<const SpectralField> fields, const SymbolSpec& spec,
                         std::uint64_t budget = kDefaultConvolutionBudget);

/// Partition of ik g(u)^ by the number m of internal frequencies equal to k:
/// R^1 gets weight m (the multiplicity-counted sum, equal to the closed form
/// ik u_k int g'(u) dx / 2pi), R^2 = R - R^1 gets 1 - m on m >= 1 tuples and
/// NR the m = 0 tuples. Components are summed over the degrees of g with
/// their coefficients a_j.
struct ResonanceSplit {
  SpectralField full;  // ik g(u)^ by enumeration
  SpectralField r1;
  SpectralField r2;
  SpectralField nr;
};

ResonanceSplit decompose_r1_r2_nr(const SpectralField& u, const PolynomialNonlinearity& g,
                                  std::uint64_t budget = kDefaultConvolutionBudget);

/// R^1 from its closed form ik u_k int g'(u) dx / 2pi (FFT route).
SpectralField r1_closed_form(const SpectralField& u, const PolynomialNonlinearity& g);

struct RegionParams {
  /// Dominance: k*_1 >= lambda k*_2. Must exceed 1 so the dominant slot is unique.
  double lambda = 4.0;
  /// Case A threshold |H_n| >= c_a (k*)^2.
  double c_a = 0.25;

  void validate() const;
};

/// Partition of NR: HL (unique dominant frequency and |H_n| >= cA (k*_1)^2),
/// HH (no dominant frequency and |H_n| >= cA (k*)^2) and RE (the rest).
struct HighLowSplit {
  SpectralField nr;
  SpectralField hl;
  SpectralField hh;
  SpectralField re;
};

HighLowSplit decompose_hl_hh_re(const SpectralField& u, const PolynomialNonlinearity& g,
                                const RegionParams& params,
                                std::uint64_t budget = kDefaultConvolutionBudget);

/// Slot-1 high-low region: |k_1| >= lambda max_{j>1} |k_j|, k_2+..+k_n != 0,
/// |H_n| >= cA k_1^2.
bool in_high_low_region(std::int64_t k, std::span<const std::int64_t> ks,
                        const RegionParams& params);

/// HL^n[first, rest...]: symbol ik on the slot-1 region.
SpectralField high_low(const SpectralField& first, std::span<const SpectralField> rest,
                       const RegionParams& params,
                       std::uint64_t budget = kDefaultConvolutionBudget);

/// Normal-form operator T_NF^n[first, rest...]: symbol k / H_n on the slot-1
/// high-low region.
SpectralField t_nf(const SpectralField& first, std::span<const SpectralField> rest,
                   const RegionParams& params,
                   std::uint64_t budget = kDefaultConvolutionBudget);

struct IdentityResidual {
  double t;
  int degree;
  double residual;  // ||lhs - rhs||_{H^0}
  double scale;     // ||lhs||_{H^0}
};

/// Checks, at every interior sample and for every degree n of g,
///   (d_t - ik^3 + gamma) T_NF^n(W u0, u~, .., u~)
///     = -HL^n[W u0, u~, .., u~] + (n-1) T_NF^n[W u0, (d_t + d_x^3) u~, u~, ..]
/// with d_t by centered differences on the gauged trajectory.
std::vector<IdentityResidual> nf_time_identity_residual(const Trajectory& trajectory,
                                                        const Problem& problem,
                                                        const RegionParams& params);

/// v = u~ - W u0 - sum_n n a_n T_NF^n[W u0, u~, ..] - apply_gauge(F, shift)
/// at every sample of the trajectory.
std::vector<SpectralField> v_from_definition(const Trajectory& trajectory, const Problem& problem,
                                             const RegionParams& params);

/// sum_n n a_n T_NF^n[W u0, u~, .., u~] at one time.
SpectralField normal_form_correction(const SpectralField& linear, const SpectralField& gauged,
                                     const PolynomialNonlinearity& g, const RegionParams& params);

}  // namespace gkdv
