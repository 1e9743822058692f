#include "gkdv/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gkdv/error.hpp"
#include "gkdv/gauge.hpp"

namespace gkdv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t abs64(std::int64_t v) { return v < 0 ? -v : v; }

WideInt checked_mul(WideInt a, WideInt b) {
  WideInt out;
  if (__builtin_mul_overflow(a, b, &out)) throw OverflowError("H_n overflows 128-bit arithmetic");
  return out;
}

WideInt checked_add(WideInt a, WideInt b) {
  WideInt out;
  if (__builtin_add_overflow(a, b, &out)) throw OverflowError("H_n overflows 128-bit arithmetic");
  return out;
}

WideInt checked_cube(WideInt v) { return checked_mul(checked_mul(v, v), v); }

// H_n for small arguments; callers guarantee n * max|k| <= 2e6.
std::int64_t h_n_small(std::span<const std::int64_t> ks, std::int64_t k) {
  std::int64_t out = k * k * k;
  for (std::int64_t v : ks) out -= v * v * v;
  return out;
}

void require_small(int n_fields, int bandwidth) {
  if (static_cast<double>(n_fields) * bandwidth > 2e6) {
    throw OverflowError("bandwidth too large for 64-bit H_n in the enumeration");
  }
}

void check_fields(std::span<const SpectralField> fields) {
  if (fields.size() < 2) throw std::invalid_argument("multilinear operators need n >= 2 inputs");
  for (const auto& f : fields) {
    if (!(f.grid() == fields.front().grid())) throw std::invalid_argument("fields on different grids");
  }
}

void check_budget(int n_fields, int bandwidth, std::uint64_t budget) {
  const std::uint64_t cost = convolution_cost(n_fields, bandwidth);
  if (cost > budget) {
    throw BudgetError("direct " + std::to_string(n_fields) + "-fold convolution at N=" +
                      std::to_string(bandwidth) + " needs " + std::to_string(cost) +
                      " iterations, budget is " + std::to_string(budget));
  }
}

// Visits every ordered tuple (k_1..k_n) of nonzero wavenumbers with
// 1 <= k = sum k_j <= N whose coefficient product is nonzero. Negative k
// follow by Hermitian symmetry.
template <class Visit>
void for_each_tuple(std::span<const SpectralField> fields, Visit&& visit) {
  const int n = static_cast<int>(fields.size());
  const std::int64_t bw = fields.front().n();
  std::vector<std::int64_t> ks(static_cast<std::size_t>(n));

  auto rec = [&](auto& self, int slot, std::int64_t sum, Complex prod) -> void {
    const SpectralField& f = fields[static_cast<std::size_t>(slot)];
    if (slot == n - 1) {
      const std::int64_t lo = std::max(-bw, 1 - sum);
      const std::int64_t hi = std::min(bw, bw - sum);
      for (std::int64_t kn = lo; kn <= hi; ++kn) {
        if (kn == 0) continue;
        const Complex c = f[static_cast<int>(kn)];
        if (c == Complex{}) continue;
        ks[static_cast<std::size_t>(slot)] = kn;
        visit(sum + kn, std::span<const std::int64_t>(ks), prod * c);
      }
      return;
    }
    for (std::int64_t kj = -bw; kj <= bw; ++kj) {
      if (kj == 0) continue;
      const Complex c = f[static_cast<int>(kj)];
      if (c == Complex{}) continue;
      ks[static_cast<std::size_t>(slot)] = kj;
      self(self, slot + 1, sum + kj, prod * c);
    }
  };
  rec(rec, 0, 0, Complex(1.0, 0.0));
}

// Accumulates positive-k coefficients and completes the Hermitian half.
class Accumulator {
 public:
  explicit Accumulator(const Grid& grid) : field_(grid) {}
  void add(std::int64_t k, Complex v) {
    field_.mutable_coefficients()[static_cast<std::size_t>(k + field_.n())] += v;
  }
  SpectralField finish() {
    field_.symmetrize();
    return field_;
  }

 private:
  SpectralField field_;
};

std::vector<SpectralField> repeated(const SpectralField& u, int count) {
  return std::vector<SpectralField>(static_cast<std::size_t>(count), u);
}

std::vector<SpectralField> with_first(const SpectralField& first,
                                      std::span<const SpectralField> rest) {
  std::vector<SpectralField> all;
  all.reserve(rest.size() + 1);
  all.push_back(first);
  all.insert(all.end(), rest.begin(), rest.end());
  return all;
}

struct TopTwo {
  std::int64_t first = 0;
  std::int64_t second = 0;
};

TopTwo top_two(std::span<const std::int64_t> ks) {
  TopTwo t;
  for (std::int64_t v : ks) {
    const std::int64_t a = abs64(v);
    if (a > t.first) {
      t.second = t.first;
      t.first = a;
    } else if (a > t.second) {
      t.second = a;
    }
  }
  return t;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  long double r = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / i;
  return static_cast<std::uint64_t>(std::llround(r));
}

}  // namespace

std::string to_string(WideInt value) {
  if (value == 0) return "0";
  const bool neg = value < 0;
  unsigned __int128 v = neg ? -static_cast<unsigned __int128>(value) : value;
  std::string digits;
  while (v > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  if (neg) digits.push_back('-');
  return {digits.rbegin(), digits.rend()};
}

FrequencyTuple::FrequencyTuple(std::vector<std::int64_t> entries) : k_(std::move(entries)) {
  if (k_.size() < 2) throw std::invalid_argument("frequency tuples have n >= 2 entries");
  if (std::find(k_.begin(), k_.end(), 0) != k_.end()) {
    throw std::invalid_argument("frequency tuple entries must be nonzero");
  }
}

std::int64_t FrequencyTuple::total() const {
  std::int64_t s = 0;
  for (auto v : k_) s += v;
  return s;
}

std::int64_t FrequencyTuple::k_star(std::size_t j) const {
  if (j < 1 || j > k_.size()) throw std::out_of_range("k_star index");
  std::vector<std::int64_t> a;
  a.reserve(k_.size());
  for (auto v : k_) a.push_back(abs64(v));
  std::sort(a.begin(), a.end(), std::greater<>());
  return a[j - 1];
}

WideInt h_n(std::span<const std::int64_t> k) {
  WideInt sum = 0;
  WideInt cubes = 0;
  for (std::int64_t v : k) {
    sum = checked_add(sum, v);
    cubes = checked_add(cubes, checked_cube(v));
  }
  return checked_add(checked_cube(sum), -cubes);
}

bool h3_factorization_check(int bound) {
  for (std::int64_t a = -bound; a <= bound; ++a) {
    for (std::int64_t b = -bound; b <= bound; ++b) {
      for (std::int64_t c = -bound; c <= bound; ++c) {
        if (a == 0 || b == 0 || c == 0) continue;
        const std::int64_t ks[] = {a, b, c};
        if (h_n(ks) != WideInt(3) * (a + b) * (a + c) * (b + c)) return false;
      }
    }
  }
  return true;
}

std::string CaseLabel::to_string() const {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ",";
    s += name;
  };
  add(a, "A");
  add(b, "B");
  add(c, "C");
  add(d, "D");
  return s.empty() ? "none" : s;
}

namespace {

struct CaseRatios {
  bool b = false;
  double a = 0.0;                 // |H| / (k*)^2
  double c = -kInf;               // k*_3 / |k| (n >= 3)
  double d = -kInf;               // (k*_3)^2 k*_4 / (k*)^2 (n >= 4)
};

CaseRatios case_ratios(const FrequencyTuple& t) {
  CaseRatios r;
  const std::int64_t k = t.total();
  for (auto v : t.entries()) r.b = r.b || v == k;
  const double kstar = static_cast<double>(t.k_star(1));
  const WideInt h = h_n(t);
  const double habs = static_cast<double>(h < 0 ? -h : h);
  r.a = habs / (kstar * kstar);
  if (t.size() >= 3) {
    const double k3 = static_cast<double>(t.k_star(3));
    r.c = k == 0 ? kInf : k3 / static_cast<double>(abs64(k));
  }
  if (t.size() >= 4) {
    const double k3 = static_cast<double>(t.k_star(3));
    const double k4 = static_cast<double>(t.k_star(4));
    r.d = k3 * k3 * k4 / (kstar * kstar);
  }
  return r;
}

}  // namespace

CaseLabel classify_cases(const FrequencyTuple& tuple, const CaseConstants& constants) {
  const CaseRatios r = case_ratios(tuple);
  CaseLabel label;
  label.constants = constants;
  label.a = r.a >= constants.a;
  label.b = r.b;
  label.c = tuple.size() >= 3 && r.c >= constants.c;
  label.d = tuple.size() >= 4 && r.d >= constants.d;
  return label;
}

double case_margin(const FrequencyTuple& tuple) {
  const CaseRatios r = case_ratios(tuple);
  if (r.b) return kInf;
  return std::max({r.a, r.c, r.d});
}

CaseScanReport scan_cases(int n, int bound, std::optional<CaseConstants> constants,
                          std::uint64_t budget) {
  if (n < 2) throw std::invalid_argument("case analysis needs n >= 2");
  if (bound < 1) throw std::invalid_argument("scan bound K must be >= 1");
  const std::uint64_t values = 2 * static_cast<std::uint64_t>(bound);
  const std::uint64_t cost = binomial(values + n - 1, n);
  if (cost > budget) {
    int suggest = bound;
    while (suggest > 1 && binomial(2 * static_cast<std::uint64_t>(suggest) + n - 1, n) > budget) {
      --suggest;
    }
    throw BudgetError("case scan n=" + std::to_string(n) + " K=" + std::to_string(bound) +
                      " enumerates " + std::to_string(cost) + " tuples (budget " +
                      std::to_string(budget) + "); try K=" + std::to_string(suggest));
  }

  std::vector<std::int64_t> vals;
  for (std::int64_t v = -bound; v <= bound; ++v) {
    if (v != 0) vals.push_back(v);
  }

  // Pass 1 finds the certified constant over unordered tuples; pass 2
  // classifies at the requested constants with permutation multiplicities.
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> entries(static_cast<std::size_t>(n));
  std::vector<std::uint64_t> fact(static_cast<std::size_t>(n + 1), 1);
  for (int i = 1; i <= n; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * i;

  auto for_each_multiset = [&](auto&& visit) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      std::int64_t sum = 0;
      for (int i = 0; i < n; ++i) {
        entries[static_cast<std::size_t>(i)] = vals[idx[static_cast<std::size_t>(i)]];
        sum += entries[static_cast<std::size_t>(i)];
      }
      if (sum != 0) {
        std::uint64_t mult = fact[static_cast<std::size_t>(n)];
        std::size_t run = 1;
        for (int i = 1; i <= n; ++i) {
          if (i < n && idx[static_cast<std::size_t>(i)] == idx[static_cast<std::size_t>(i - 1)]) {
            ++run;
          } else {
            mult /= fact[run];
            run = 1;
          }
        }
        visit(FrequencyTuple(entries), mult);
      }
      // next nondecreasing index sequence
      int pos = n - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == vals.size() - 1) --pos;
      if (pos < 0) break;
      const std::size_t next = idx[static_cast<std::size_t>(pos)] + 1;
      for (int i = pos; i < n; ++i) idx[static_cast<std::size_t>(i)] = next;
    }
  };

  CaseScanReport report;
  report.n = n;
  report.bound = bound;
  report.certified_constant = kInf;
  for_each_multiset([&](const FrequencyTuple& t, std::uint64_t mult) {
    report.tuples += mult;
    const double m = case_margin(t);
    if (m < report.certified_constant) {
      report.certified_constant = m;
      report.worst_tuple.assign(t.entries().begin(), t.entries().end());
    }
  });

  report.constants = constants.value_or(CaseConstants::uniform(report.certified_constant));
  for_each_multiset([&](const FrequencyTuple& t, std::uint64_t mult) {
    const CaseLabel label = classify_cases(t, report.constants);
    if (label.a) report.count_a += mult;
    if (label.b) report.count_b += mult;
    if (label.c) report.count_c += mult;
    if (label.d) report.count_d += mult;
    if (!label.any()) {
      report.uncovered += mult;
      if (report.uncovered_examples.size() < 16) {
        report.uncovered_examples.emplace_back(t.entries().begin(), t.entries().end());
      }
    }
  });
  return report;
}

double min_case_constant(int n, int bound, std::uint64_t budget) {
  return scan_cases(n, bound, std::nullopt, budget).certified_constant;
}

std::uint64_t convolution_cost(int n_fields, int bandwidth) {
  long double cost = 2.0L * bandwidth + 1.0L;
  for (int i = 1; i < n_fields; ++i) cost *= 2.0L * bandwidth;
  if (cost > 1.8e19L) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(cost);
}

SpectralField convolve_n(std::span<const SpectralField> fields, const SymbolSpec& spec,
                         std::uint64_t budget) {
  check_fields(fields);
  const Grid& grid = fields.front().grid();
  check_budget(static_cast<int>(fields.size()), grid.n(), budget);
  Accumulator acc(grid);
  for_each_tuple(fields, [&](std::int64_t k, std::span<const std::int64_t> ks, Complex prod) {
    if (spec.restriction && !spec.restriction(k, ks)) return;
    acc.add(k, spec.symbol(k, ks) * prod);
  });
  return acc.finish();
}

ResonanceSplit decompose_r1_r2_nr(const SpectralField& u, const PolynomialNonlinearity& g,
                                  std::uint64_t budget) {
  const Grid& grid = u.grid();
  Accumulator full(grid), r1(grid), r2(grid), nr(grid);
  for (int degree : g.degrees()) {
    check_budget(degree, grid.n(), budget);
    const auto fields = repeated(u, degree);
    const double a = g.coefficient(degree);
    for_each_tuple(std::span<const SpectralField>(fields),
                   [&](std::int64_t k, std::span<const std::int64_t> ks, Complex prod) {
                     const Complex term = Complex(0.0, a * static_cast<double>(k)) * prod;
                     int hits = 0;
                     for (auto v : ks) hits += (v == k);
                     full.add(k, term);
                     if (hits == 0) {
                       nr.add(k, term);
                     } else {
                       r1.add(k, static_cast<double>(hits) * term);
                       r2.add(k, static_cast<double>(1 - hits) * term);
                     }
                   });
  }
  return {full.finish(), r1.finish(), r2.finish(), nr.finish()};
}

SpectralField r1_closed_form(const SpectralField& u, const PolynomialNonlinearity& g) {
  const double shift_rate = theta_rate(u, g) / (2.0 * std::numbers::pi);
  return apply_multiplier(u, [shift_rate](int k) { return Complex(0.0, k * shift_rate); });
}

void RegionParams::validate() const {
  if (!(lambda > 1.0)) throw std::invalid_argument("dominance factor lambda must exceed 1");
  if (!(c_a > 0.0)) throw std::invalid_argument("case-A constant must be positive");
}

HighLowSplit decompose_hl_hh_re(const SpectralField& u, const PolynomialNonlinearity& g,
                                const RegionParams& params, std::uint64_t budget) {
  params.validate();
  const Grid& grid = u.grid();
  Accumulator nr(grid), hl(grid), hh(grid), re(grid);
  for (int degree : g.degrees()) {
    check_budget(degree, grid.n(), budget);
    require_small(degree, grid.n());
    const auto fields = repeated(u, degree);
    const double a = g.coefficient(degree);
    for_each_tuple(std::span<const SpectralField>(fields),
                   [&](std::int64_t k, std::span<const std::int64_t> ks, Complex prod) {
                     for (auto v : ks) {
                       if (v == k) return;
                     }
                     const Complex term = Complex(0.0, a * static_cast<double>(k)) * prod;
                     nr.add(k, term);
                     const TopTwo top = top_two(ks);
                     const double kstar = static_cast<double>(top.first);
                     const double h = std::abs(static_cast<double>(h_n_small(ks, k)));
                     const bool case_a = h / (kstar * kstar) >= params.c_a;
                     const bool dominant =
                         static_cast<double>(top.first) >= params.lambda * static_cast<double>(top.second);
                     if (case_a && dominant) {
                       hl.add(k, term);
                     } else if (case_a) {
                       hh.add(k, term);
                     } else {
                       re.add(k, term);
                     }
                   });
  }
  return {nr.finish(), hl.finish(), hh.finish(), re.finish()};
}

bool in_high_low_region(std::int64_t k, std::span<const std::int64_t> ks,
                        const RegionParams& params) {
  const std::int64_t k1 = abs64(ks[0]);
  std::int64_t rest_max = 0;
  std::int64_t rest_sum = 0;
  for (std::size_t j = 1; j < ks.size(); ++j) {
    rest_max = std::max(rest_max, abs64(ks[j]));
    rest_sum += ks[j];
  }
  if (static_cast<double>(k1) < params.lambda * static_cast<double>(rest_max)) return false;
  if (rest_sum == 0) return false;
  const double h = std::abs(static_cast<double>(h_n_small(ks, k)));
  return h / (static_cast<double>(k1) * static_cast<double>(k1)) >= params.c_a;
}

namespace {

template <class Symbol>
SpectralField high_low_operator(const SpectralField& first, std::span<const SpectralField> rest,
                                const RegionParams& params, std::uint64_t budget, Symbol&& symbol) {
  params.validate();
  const auto fields = with_first(first, rest);
  check_fields(fields);
  const Grid& grid = first.grid();
  check_budget(static_cast<int>(fields.size()), grid.n(), budget);
  require_small(static_cast<int>(fields.size()), grid.n());
  Accumulator acc(grid);
  for_each_tuple(std::span<const SpectralField>(fields),
                 [&](std::int64_t k, std::span<const std::int64_t> ks, Complex prod) {
                   if (!in_high_low_region(k, ks, params)) return;
                   acc.add(k, symbol(k, ks) * prod);
                 });
  return acc.finish();
}

}  // namespace

SpectralField high_low(const SpectralField& first, std::span<const SpectralField> rest,
                       const RegionParams& params, std::uint64_t budget) {
  return high_low_operator(first, rest, params, budget,
                           [](std::int64_t k, std::span<const std::int64_t>) {
                             return Complex(0.0, static_cast<double>(k));
                           });
}

SpectralField t_nf(const SpectralField& first, std::span<const SpectralField> rest,
                   const RegionParams& params, std::uint64_t budget) {
  return high_low_operator(first, rest, params, budget,
                           [](std::int64_t k, std::span<const std::int64_t> ks) {
                             // Region guarantees |H_n| >= cA k_1^2 > 0.
                             return Complex(static_cast<double>(k) /
                                                static_cast<double>(h_n_small(ks, k)),
                                            0.0);
                           });
}

SpectralField normal_form_correction(const SpectralField& linear, const SpectralField& gauged,
                                     const PolynomialNonlinearity& g, const RegionParams& params) {
  SpectralField out(linear.grid());
  for (int degree : g.degrees()) {
    const auto rest = repeated(gauged, degree - 1);
    SpectralField term = t_nf(linear, rest, params);
    term *= degree * g.coefficient(degree);
    out += term;
  }
  return out;
}

std::vector<IdentityResidual> nf_time_identity_residual(const Trajectory& trajectory,
                                                        const Problem& problem,
                                                        const RegionParams& params) {
  const std::size_t count = trajectory.snapshots.size();
  if (count < 3) throw std::invalid_argument("normal-form identity check needs >= 3 snapshots");
  const auto gauged = gauged_snapshots(trajectory);
  const SpectralField& u0 = trajectory.snapshots.front();
  const double gamma = problem.gamma();

  std::vector<SpectralField> linear;
  linear.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    linear.push_back(airy_propagator(u0, trajectory.times[i], gamma));
  }

  std::vector<IdentityResidual> out;
  for (int degree : problem.g().degrees()) {
    std::vector<SpectralField> tnf;
    tnf.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      tnf.push_back(t_nf(linear[i], repeated(gauged[i], degree - 1), params));
    }
    for (std::size_t i = 1; i + 1 < count; ++i) {
      const double width = trajectory.times[i + 1] - trajectory.times[i - 1];
      SpectralField lhs = (1.0 / width) * (tnf[i + 1] - tnf[i - 1]);
      lhs += apply_multiplier(tnf[i], [gamma](int k) {
        return Complex(gamma, -static_cast<double>(k) * k * k);
      });

      // (d_t + d_x^3) u~ with d_x^3 -> -ik^3.
      SpectralField dt_gauged = (1.0 / width) * (gauged[i + 1] - gauged[i - 1]);
      dt_gauged -= apply_multiplier(gauged[i], [](int k) {
        return Complex(0.0, static_cast<double>(k) * k * k);
      });

      auto rest = repeated(gauged[i], degree - 1);
      SpectralField rhs = -1.0 * high_low(linear[i], rest, params);
      rest.front() = dt_gauged;
      rhs += static_cast<double>(degree - 1) * t_nf(linear[i], rest, params);

      out.push_back({trajectory.times[i], degree, sobolev_norm(lhs - rhs, 0.0),
                     sobolev_norm(lhs, 0.0)});
    }
  }
  return out;
}

std::vector<SpectralField> v_from_definition(const Trajectory& trajectory, const Problem& problem,
                                             const RegionParams& params) {
  if (trajectory.snapshots.empty()) throw std::invalid_argument("trajectory has no snapshots");
  const auto gauged = gauged_snapshots(trajectory);
  const SpectralField& u0 = trajectory.snapshots.front();
  const SpectralField steady = steady_state_linear(problem.forcing(), problem.gamma());
  std::vector<SpectralField> out;
  out.reserve(gauged.size());
  for (std::size_t i = 0; i < gauged.size(); ++i) {
    const SpectralField linear = airy_propagator(u0, trajectory.times[i], problem.gamma());
    SpectralField v = gauged[i] - linear;
    v -= normal_form_correction(linear, gauged[i], problem.g(), params);
    v -= apply_gauge(steady, translation(trajectory.phases[i]));
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace gkdv
