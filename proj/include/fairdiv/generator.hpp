#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fairdiv/errors.hpp"
#include "fairdiv/instance.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv::gen {

struct GenOptions {
  std::string family = "splc";  // splc | additive | truncated_additive | coverage
  int agents = 2;
  int min_types = 2, max_types = 3;    // splc
  int min_copies = 1, max_copies = 2;  // splc, per type
  int max_total_copies = 8;            // splc, cap on the copy universe
  int goods = 5;                       // non-splc m
  int universe = 4;                    // coverage element count
  int max_value = 10;
  std::vector<Rational> entitlements;  // empty = symmetric
};

namespace gen_detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  // Bounded draw; mt19937_64 output is standardized, so streams are
  // reproducible across platforms.
  std::uint64_t next(std::uint64_t bound) { return bound == 0 ? 0 : eng_() % bound; }
  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace gen_detail

inline Instance generate_instance(const GenOptions& opt, std::uint64_t seed) {
  gen_detail::Rng rng(seed);
  Instance inst;
  if (opt.entitlements.empty()) {
    inst.entitlements.assign(opt.agents, rat(1, opt.agents));
  } else {
    if (static_cast<int>(opt.entitlements.size()) != opt.agents)
      throw ValidationError("entitlement list length does not match agent count");
    inst.entitlements = opt.entitlements;
  }

  if (opt.family == "splc") {
    const int t = rng.range(opt.min_types, opt.max_types);
    std::vector<int> copies(t);
    int budget = opt.max_total_copies;
    for (int j = 0; j < t; ++j) {
      const int reserve = (t - 1 - j) * opt.min_copies;
      const int hi = std::min(opt.max_copies, budget - reserve);
      copies[j] = rng.range(opt.min_copies, std::max(opt.min_copies, hi));
      budget -= copies[j];
    }
    for (int i = 0; i < opt.agents; ++i) {
      SplcValuation v;
      v.types = t;
      v.copies = copies;
      v.values.resize(t);
      for (int j = 0; j < t; ++j) {
        for (int k = 0; k < copies[j]; ++k)
          v.values[j].push_back(Rational(rng.range(0, opt.max_value)));
        std::sort(v.values[j].rbegin(), v.values[j].rend());
      }
      inst.valuations.emplace_back(std::move(v));
    }
  } else if (opt.family == "additive") {
    for (int i = 0; i < opt.agents; ++i) {
      AdditiveValuation v;
      for (int g = 0; g < opt.goods; ++g)
        v.weights.push_back(Rational(rng.range(0, opt.max_value)));
      inst.valuations.emplace_back(std::move(v));
    }
  } else if (opt.family == "truncated_additive") {
    for (int i = 0; i < opt.agents; ++i) {
      TruncatedAdditiveValuation v;
      long total = 0;
      for (int g = 0; g < opt.goods; ++g) {
        const int w = rng.range(0, opt.max_value);
        total += w;
        v.weights.push_back(Rational(w));
      }
      v.cap = Rational(rng.range(0, static_cast<int>(total)));
      inst.valuations.emplace_back(std::move(v));
    }
  } else if (opt.family == "coverage") {
    for (int i = 0; i < opt.agents; ++i) {
      CoverageValuation v;
      for (int e = 0; e < opt.universe; ++e)
        v.element_weights.push_back(Rational(rng.range(0, opt.max_value)));
      for (int g = 0; g < opt.goods; ++g) {
        std::vector<int> cover;
        for (int e = 0; e < opt.universe; ++e)
          if (rng.next(2)) cover.push_back(e);
        v.covers.push_back(std::move(cover));
      }
      inst.valuations.emplace_back(std::move(v));
    }
  } else {
    throw ValidationError("unknown family: " + opt.family);
  }
  inst.check_valid();
  return inst;
}

// n agents, one good type with n copies; one copy is worth 1, further copies
// nothing. Every agent's maximin share equals her value for everything.
inline Instance fixture_splc_mms_high(int n) {
  if (n < 1) throw ValidationError("fixture needs at least one agent");
  Instance inst;
  inst.entitlements.assign(n, rat(1, n));
  for (int i = 0; i < n; ++i) {
    SplcValuation v;
    v.types = 1;
    v.copies = {n};
    v.values = {std::vector<Rational>(n, Rational(0))};
    v.values[0][0] = 1;
    inst.valuations.emplace_back(std::move(v));
  }
  inst.check_valid();
  return inst;
}

// Four agents, eight good types with four copies each; every maximin share is
// exactly 1, yet the uncapped greedy with a 1/2 stop threshold strands the
// agent holding only one large good. Agents and types are serialized in the
// order that makes the deterministic lex tie-break walk straight into the
// failing run: agent 2 (0-based) is the stranded one, her two big types are
// types 0 and 2, and type 1 is the block the additive agent exhausts.
inline Instance fixture_greedy_counter(const Rational& delta) {
  if (delta <= 0 || delta >= rat(1, 16))
    throw ValidationError("delta must lie strictly between 0 and 1/16");
  const Rational big = rat(1, 2) - delta;
  const Rational small = 2 * delta;
  const int t = 8, k = 4;
  auto zero_rows = [&] {
    std::vector<std::vector<Rational>> rows(t);
    for (auto& r : rows) r.assign(k, Rational(0));
    return rows;
  };
  Instance inst;
  inst.entitlements.assign(4, rat(1, 4));
  for (int i = 0; i < 4; ++i) {
    SplcValuation v;
    v.types = t;
    v.copies.assign(t, k);
    v.values = zero_rows();
    if (i == 0 || i == 1) {
      v.values[0][0] = big;
      v.values[0][1] = big;
      v.values[1][0] = big;
      v.values[1][1] = big;
      v.values[2][0] = small;
    } else if (i == 2) {
      v.values[0][0] = big;
      v.values[1][0] = small;
      v.values[2][0] = big;
    } else {
      for (int j = 0; j < t; ++j)
        for (int c = 0; c < k; ++c) v.values[j][c] = rat(1, 8);
    }
    inst.valuations.emplace_back(std::move(v));
  }
  inst.check_valid();
  return inst;
}

// Index (0-based) of the stranded agent in fixture_greedy_counter.
inline constexpr int kGreedyCounterStrandedAgent = 2;

}  // namespace fairdiv::gen
