#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "fairdiv/errors.hpp"
#include "fairdiv/lp.hpp"
#include "fairdiv/rational.hpp"
#include "fairdiv/valuation.hpp"

namespace fairdiv {

inline constexpr int kDefaultExtensionLimit = 16;

// Pointwise minimum of a base valuation with a cap; preserves monotonicity
// and, for submodular bases, submodularity.
struct TruncatedValuation {
  ValuationSpec base;
  Rational cap;
};

inline TruncatedValuation truncate(ValuationSpec base, Rational cap) {
  if (cap < 0) throw ValidationError("truncation cap must be nonnegative");
  return TruncatedValuation{std::move(base), std::move(cap)};
}

inline Rational value_of_mask(const TruncatedValuation& v, std::uint64_t mask) {
  return std::min(value_of_mask(v.base, mask), v.cap);
}

// Dense table of a set function over a universe of m goods, indexed by mask.
struct ValueTable {
  int m = 0;
  std::vector<Rational> value;  // size 1 << m

  template <typename F>
  static ValueTable build(int m, F&& value_of, int limit = kDefaultExtensionLimit) {
    if (m > limit)
      throw CapabilityError("universe of " + std::to_string(m) +
                            " goods exceeds the enumeration limit of " + std::to_string(limit));
    ValueTable t;
    t.m = m;
    t.value.resize(std::uint64_t(1) << m);
    for (std::uint64_t mask = 0; mask < t.value.size(); ++mask)
      t.value[mask] = value_of(mask);
    return t;
  }

  static ValueTable build(const ValuationSpec& spec, int limit = kDefaultExtensionLimit) {
    return build(universe_size(spec), [&](std::uint64_t s) { return value_of_mask(spec, s); },
                 limit);
  }

  static ValueTable build(const TruncatedValuation& spec, int limit = kDefaultExtensionLimit) {
    return build(universe_size(spec.base),
                 [&](std::uint64_t s) { return value_of_mask(spec, s); }, limit);
  }

  ValueTable truncated(const Rational& cap) const {
    ValueTable t;
    t.m = m;
    t.value.resize(value.size());
    for (std::size_t s = 0; s < value.size(); ++s) t.value[s] = std::min(value[s], cap);
    return t;
  }
};

struct ConcaveExtensionResult {
  Rational value;
  // Optimal distribution over subsets: (mask, weight) pairs with weight > 0.
  std::vector<std::pair<std::uint64_t, Rational>> support;
};

// f^+(x): the LP over all 2^m subset weights alpha_S with sum 1 and exact
// per-good marginals x_i, maximizing the expected set value.
inline ConcaveExtensionResult concave_extension_value(const ValueTable& table,
                                                      const std::vector<Rational>& x) {
  const int m = table.m;
  if (static_cast<int>(x.size()) != m)
    throw ValidationError("point dimension does not match the good universe");
  for (const auto& xi : x)
    if (xi < 0 || xi > 1) throw ValidationError("extension point outside [0,1]^m");

  const std::uint64_t nsets = std::uint64_t(1) << m;
  lp::LinearProgram prog;
  prog.num_vars = static_cast<int>(nsets);
  prog.objective.assign(nsets, Rational(0));
  for (std::uint64_t s = 0; s < nsets; ++s) prog.objective[s] = table.value[s];
  prog.add_row(std::vector<Rational>(nsets, Rational(1)), lp::Sense::Eq, Rational(1));
  for (int i = 0; i < m; ++i) {
    std::vector<Rational> row(nsets, Rational(0));
    for (std::uint64_t s = 0; s < nsets; ++s)
      if (s >> i & 1) row[s] = 1;
    prog.add_row(std::move(row), lp::Sense::Eq, x[i]);
  }
  lp::LpSolution sol = lp::solve(prog);
  if (sol.status != lp::LpStatus::Optimal)
    throw InternalError("concave-extension LP must be feasible and bounded");
  ConcaveExtensionResult out;
  out.value = sol.objective;
  for (std::uint64_t s = 0; s < nsets; ++s)
    if (sol.primal[s] > 0) out.support.emplace_back(s, sol.primal[s]);
  return out;
}

inline ConcaveExtensionResult concave_extension_value(const ValuationSpec& spec,
                                                      const std::vector<Rational>& x,
                                                      int limit = kDefaultExtensionLimit) {
  return concave_extension_value(ValueTable::build(spec, limit), x);
}

inline ConcaveExtensionResult concave_extension_value(const TruncatedValuation& spec,
                                                      const std::vector<Rational>& x,
                                                      int limit = kDefaultExtensionLimit) {
  return concave_extension_value(ValueTable::build(spec, limit), x);
}

// Closed form of the concave extension of an SPLC valuation at the uniform
// point (1/n, ..., 1/n): per type, the full marginals of the first
// floor(k_j/n) copies plus the fractional remainder of the next one.
inline Rational mu_uniform(const SplcValuation& v, int n) {
  if (n < 1) throw ValidationError("agent count must be positive");
  Rational mu = 0;
  for (int j = 0; j < v.types; ++j) {
    const int whole = v.copies[j] / n;
    const int rem = v.copies[j] % n;
    mu += v.prefix_value(j, whole);
    if (rem != 0) mu += v.values[j][whole] * rat(rem, n);
  }
  return mu;
}

}  // namespace fairdiv
