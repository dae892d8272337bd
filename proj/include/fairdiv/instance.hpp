#pragma once

#include <string>
#include <vector>

#include "fairdiv/errors.hpp"
#include "fairdiv/rational.hpp"
#include "fairdiv/valuation.hpp"

namespace fairdiv {

// A fair-division instance: one entitlement and one valuation per agent.
// Entitlements are positive rationals summing to exactly 1; all agents share
// one good universe (the same types/copies for SPLC, the same m otherwise).
struct Instance {
  std::vector<Rational> entitlements;
  std::vector<ValuationSpec> valuations;

  int agent_count() const { return static_cast<int>(valuations.size()); }

  bool symmetric() const {
    for (int i = 1; i < agent_count(); ++i)
      if (entitlements[i] != entitlements[0]) return false;
    return true;
  }

  bool all_splc() const {
    for (const auto& v : valuations)
      if (!std::holds_alternative<SplcValuation>(v)) return false;
    return !valuations.empty();
  }

  const SplcValuation& splc(int agent) const {
    return std::get<SplcValuation>(valuations[agent]);
  }

  int universe_size() const { return fairdiv::universe_size(valuations[0]); }

  void check_valid() const {
    if (valuations.empty()) throw ValidationError("instance needs at least one agent");
    if (entitlements.size() != valuations.size())
      throw ValidationError("entitlements and valuations disagree on agent count");
    Rational total = 0;
    for (const auto& b : entitlements) {
      if (b <= 0) throw ValidationError("entitlements must be positive");
      total += b;
    }
    if (total != 1) throw ValidationError("entitlements sum != 1");
    for (const auto& v : valuations) fairdiv::check_valid(v);
    const bool splc0 = std::holds_alternative<SplcValuation>(valuations[0]);
    for (const auto& v : valuations) {
      if (std::holds_alternative<SplcValuation>(v) != splc0)
        throw ValidationError("mixed SPLC and non-SPLC valuations in one instance");
      if (splc0) {
        const auto& a = std::get<SplcValuation>(valuations[0]);
        const auto& b = std::get<SplcValuation>(v);
        if (a.types != b.types || a.copies != b.copies)
          throw ValidationError("SPLC agents disagree on the good universe");
      } else if (fairdiv::universe_size(v) != fairdiv::universe_size(valuations[0])) {
        throw ValidationError("agents disagree on the number of goods");
      }
    }
  }
};

// Integral allocation. For SPLC instances bundles[i][j] is the number of
// copies of type j that agent i holds; otherwise bundles[i] lists good
// indices. Under-allocation is permitted; no good copy may be assigned twice.
struct Allocation {
  std::vector<std::vector<int>> bundles;
};

inline void check_allocation(const Instance& inst, const Allocation& alloc) {
  if (static_cast<int>(alloc.bundles.size()) != inst.agent_count())
    throw ValidationError("allocation has " + std::to_string(alloc.bundles.size()) +
                          " bundles for " + std::to_string(inst.agent_count()) + " agents");
  if (inst.all_splc()) {
    const auto& v0 = inst.splc(0);
    std::vector<long> used(v0.types, 0);
    for (int i = 0; i < inst.agent_count(); ++i) {
      const auto& b = alloc.bundles[i];
      if (static_cast<int>(b.size()) != v0.types)
        throw ValidationError("bundle " + std::to_string(i) + " has wrong type count");
      for (int j = 0; j < v0.types; ++j) {
        if (b[j] < 0) throw ValidationError("negative copy count in bundle " + std::to_string(i));
        used[j] += b[j];
      }
    }
    for (int j = 0; j < v0.types; ++j)
      if (used[j] > v0.copies[j])
        throw ValidationError("type " + std::to_string(j) + " over-allocated: " +
                              std::to_string(used[j]) + " of " + std::to_string(v0.copies[j]) +
                              " copies");
  } else {
    const int m = inst.universe_size();
    std::vector<int> owner(m, -1);
    for (int i = 0; i < inst.agent_count(); ++i) {
      for (int g : alloc.bundles[i]) {
        if (g < 0 || g >= m)
          throw ValidationError("good index " + std::to_string(g) + " out of range in bundle " +
                                std::to_string(i));
        if (owner[g] != -1)
          throw ValidationError("good " + std::to_string(g) + " assigned to agents " +
                                std::to_string(owner[g]) + " and " + std::to_string(i));
        owner[g] = i;
      }
    }
  }
}

inline Rational allocation_value(const Instance& inst, const Allocation& alloc, int agent) {
  if (inst.all_splc())
    return inst.splc(agent).value_of_counts(alloc.bundles[agent]);
  return value_of_goods(inst.valuations[agent], alloc.bundles[agent]);
}

// Fractional allocation of SPLC copies: x[i][j][k] in [0,1] is the fraction
// of the k-th copy of type j held by agent i; per-type mass never exceeds
// the copy count.
struct FractionalAllocation {
  std::vector<std::vector<std::vector<Rational>>> x;

  static FractionalAllocation zeros(const Instance& inst) {
    const auto& v0 = inst.splc(0);
    FractionalAllocation f;
    f.x.assign(inst.agent_count(), {});
    for (auto& row : f.x) {
      row.resize(v0.types);
      for (int j = 0; j < v0.types; ++j) row[j].assign(v0.copies[j], Rational(0));
    }
    return f;
  }

  Rational agent_mass(int i, int j) const {
    Rational m = 0;
    for (const auto& e : x[i][j]) m += e;
    return m;
  }

  void check_valid(const Instance& inst) const {
    const auto& v0 = inst.splc(0);
    for (int j = 0; j < v0.types; ++j) {
      Rational total = 0;
      for (int i = 0; i < inst.agent_count(); ++i)
        for (int k = 0; k < v0.copies[j]; ++k) {
          if (x[i][j][k] < 0 || x[i][j][k] > 1)
            throw ValidationError("fractional entry outside [0,1]");
          total += x[i][j][k];
        }
      if (total > v0.copies[j]) throw ValidationError("type capacity exceeded");
    }
  }
};

inline Rational linear_extension_value(const Instance& inst, const FractionalAllocation& f,
                                       int agent) {
  return linear_extension_value(inst.splc(agent), f.x[agent]);
}

}  // namespace fairdiv
