#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <variant>
#include <vector>

#include "fairdiv/errors.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv {

// v(S) = sum of weights over S.
struct AdditiveValuation {
  std::vector<Rational> weights;
};

// v(S) = min(sum of weights over S, cap).
struct TruncatedAdditiveValuation {
  std::vector<Rational> weights;
  Rational cap;
};

// Good g covers covers[g], a subset of a finite element universe;
// v(S) = total weight of the union of covered elements.
struct CoverageValuation {
  std::vector<std::vector<int>> covers;
  std::vector<Rational> element_weights;
};

// Separable piecewise-linear concave valuation over `types` good types with
// copies[j] interchangeable copies of type j. The k-th copy of type j held in
// a bundle is worth values[j][k-1], nonincreasing in k. As a set function the
// universe lists every copy, type-major, and the value of a bundle depends
// only on its per-type counts.
struct SplcValuation {
  int types = 0;
  std::vector<int> copies;
  std::vector<std::vector<Rational>> values;

  int total_copies() const {
    return std::accumulate(copies.begin(), copies.end(), 0);
  }

  // Sum of the first `count` marginals of `type`.
  Rational prefix_value(int type, int count) const {
    Rational sum = 0;
    for (int k = 0; k < count; ++k) sum += values[type][k];
    return sum;
  }

  Rational value_of_counts(const std::vector<int>& counts) const {
    if (static_cast<int>(counts.size()) != types)
      throw ValidationError("copy-count vector length does not match type count");
    Rational sum = 0;
    for (int j = 0; j < types; ++j) {
      if (counts[j] < 0 || counts[j] > copies[j])
        throw ValidationError("copy count out of range");
      sum += prefix_value(j, counts[j]);
    }
    return sum;
  }

  Rational full_value() const {
    Rational sum = 0;
    for (int j = 0; j < types; ++j) sum += prefix_value(j, copies[j]);
    return sum;
  }

  // Type of the copy-universe good with the given index (type-major layout).
  int type_of_copy(int good) const {
    for (int j = 0; j < types; ++j) {
      if (good < copies[j]) return j;
      good -= copies[j];
    }
    throw ValidationError("good index outside the copy universe");
  }

  void check_valid() const {
    if (types <= 0) throw ValidationError("splc valuation needs at least one type");
    if (static_cast<int>(copies.size()) != types ||
        static_cast<int>(values.size()) != types)
      throw ValidationError("copies/values length does not match type count");
    for (int j = 0; j < types; ++j) {
      if (copies[j] <= 0) throw ValidationError("each type needs a positive copy count");
      if (static_cast<int>(values[j].size()) != copies[j])
        throw ValidationError("marginal list length does not match copy count");
      for (int k = 0; k < copies[j]; ++k) {
        if (values[j][k] < 0) throw ValidationError("negative marginal value");
        if (k > 0 && values[j][k] > values[j][k - 1])
          throw ValidationError("concavity violated");
      }
    }
  }
};

using ValuationSpec = std::variant<AdditiveValuation, SplcValuation,
                                   TruncatedAdditiveValuation, CoverageValuation>;

inline int universe_size(const ValuationSpec& spec) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SplcValuation>)
          return v.total_copies();
        else if constexpr (std::is_same_v<T, CoverageValuation>)
          return static_cast<int>(v.covers.size());
        else
          return static_cast<int>(v.weights.size());
      },
      spec);
}

inline void check_valid(const ValuationSpec& spec) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SplcValuation>) {
          v.check_valid();
        } else if constexpr (std::is_same_v<T, CoverageValuation>) {
          for (const auto& w : v.element_weights)
            if (w < 0) throw ValidationError("negative element weight");
          for (const auto& cov : v.covers)
            for (int e : cov)
              if (e < 0 || e >= static_cast<int>(v.element_weights.size()))
                throw ValidationError("coverage element index out of range");
        } else if constexpr (std::is_same_v<T, TruncatedAdditiveValuation>) {
          if (v.cap < 0) throw ValidationError("negative cap");
          for (const auto& w : v.weights)
            if (w < 0) throw ValidationError("negative weight");
        } else {
          for (const auto& w : v.weights)
            if (w < 0) throw ValidationError("negative weight");
        }
      },
      spec);
}

// Value of a bundle given as a list of distinct good indices.
inline Rational value_of_goods(const ValuationSpec& spec, const std::vector<int>& goods) {
  const int m = universe_size(spec);
  for (int g : goods)
    if (g < 0 || g >= m) throw ValidationError("good index out of range");
  return std::visit(
      [&](const auto& v) -> Rational {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AdditiveValuation>) {
          Rational sum = 0;
          for (int g : goods) sum += v.weights[g];
          return sum;
        } else if constexpr (std::is_same_v<T, TruncatedAdditiveValuation>) {
          Rational sum = 0;
          for (int g : goods) sum += v.weights[g];
          return std::min(sum, v.cap);
        } else if constexpr (std::is_same_v<T, CoverageValuation>) {
          std::vector<char> covered(v.element_weights.size(), 0);
          for (int g : goods)
            for (int e : v.covers[g]) covered[e] = 1;
          Rational sum = 0;
          for (std::size_t e = 0; e < covered.size(); ++e)
            if (covered[e]) sum += v.element_weights[e];
          return sum;
        } else {
          std::vector<int> counts(v.types, 0);
          for (int g : goods) counts[v.type_of_copy(g)]++;
          return v.value_of_counts(counts);
        }
      },
      spec);
}

// Value of a bundle given as a bitmask over the good universe (m <= 64).
inline Rational value_of_mask(const ValuationSpec& spec, std::uint64_t mask) {
  std::vector<int> goods;
  for (int g = 0; g < universe_size(spec); ++g)
    if (mask >> g & 1) goods.push_back(g);
  return value_of_goods(spec, goods);
}

inline Rational full_value(const ValuationSpec& spec) {
  std::vector<int> all(universe_size(spec));
  std::iota(all.begin(), all.end(), 0);
  return value_of_goods(spec, all);
}

// v(good | bundle) = v(bundle + good) - v(bundle). `bundle` must not already
// contain `good`.
inline Rational marginal(const ValuationSpec& spec, int good, const std::vector<int>& bundle) {
  for (int g : bundle)
    if (g == good) throw ValidationError("good already present in bundle");
  std::vector<int> with = bundle;
  with.push_back(good);
  return value_of_goods(spec, with) - value_of_goods(spec, bundle);
}

inline ValuationSpec scale(const ValuationSpec& spec, const Rational& alpha) {
  if (alpha < 0) throw ValidationError("scale factor must be nonnegative");
  ValuationSpec out = spec;
  std::visit(
      [&](auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SplcValuation>) {
          for (auto& row : v.values)
            for (auto& x : row) x *= alpha;
        } else if constexpr (std::is_same_v<T, CoverageValuation>) {
          for (auto& w : v.element_weights) w *= alpha;
        } else if constexpr (std::is_same_v<T, TruncatedAdditiveValuation>) {
          for (auto& w : v.weights) w *= alpha;
          v.cap *= alpha;
        } else {
          for (auto& w : v.weights) w *= alpha;
        }
      },
      out);
  return out;
}

// Linear extension of an SPLC valuation at a fractional copy vector:
// sum over (type, copy) of values[j][k] * x[j][k].
inline Rational linear_extension_value(const SplcValuation& v,
                                       const std::vector<std::vector<Rational>>& x) {
  if (static_cast<int>(x.size()) != v.types)
    throw ValidationError("fractional row has wrong number of types");
  Rational sum = 0;
  for (int j = 0; j < v.types; ++j) {
    if (static_cast<int>(x[j].size()) != v.copies[j])
      throw ValidationError("fractional row has wrong number of copies");
    for (int k = 0; k < v.copies[j]; ++k) {
      if (x[j][k] < 0 || x[j][k] > 1)
        throw ValidationError("fractional entry outside [0,1]");
      sum += v.values[j][k] * x[j][k];
    }
  }
  return sum;
}

}  // namespace fairdiv
