#pragma once

// Exact share oracles for small instances: brute-force MMS, the Any Price
// Share set-LP, the truncated-concave-extension characterization of APS, and
// the allocation verifier.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fairdiv/errors.hpp"
#include "fairdiv/extensions.hpp"
#include "fairdiv/instance.hpp"
#include "fairdiv/lp.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv {

struct OracleLimits {
  int mms_max_agents = 4;
  int mms_max_goods = 10;  // total copies for SPLC instances
  int aps_max_goods = 14;  // also caps concave-extension universes
};

namespace share_detail {

inline void for_each_composition(int total, int parts, std::vector<int>& cur,
                                 const std::function<void(const std::vector<int>&)>& fn) {
  if (parts == 1) {
    cur.push_back(total);
    fn(cur);
    cur.pop_back();
    return;
  }
  for (int c = 0; c <= total; ++c) {
    cur.push_back(c);
    for_each_composition(total - c, parts - 1, cur, fn);
    cur.pop_back();
  }
}

// Max-min partition value for an SPLC valuation, by type-at-a-time DP over
// sorted part-value tuples. A state dominated pointwise by another (both
// sorted) can never finish better, so only the Pareto frontier is kept; this
// is what makes instances with many identical types (all marginals equal)
// tractable while staying exhaustive-equivalent.
inline Rational splc_mms_brute(const SplcValuation& v, int n) {
  std::vector<std::vector<Rational>> states{std::vector<Rational>(n, Rational(0))};
  for (int j = 0; j < v.types; ++j) {
    std::vector<Rational> prefix(v.copies[j] + 1);
    prefix[0] = 0;
    for (int k = 0; k < v.copies[j]; ++k) prefix[k + 1] = prefix[k] + v.values[j][k];

    std::vector<std::vector<Rational>> next;
    auto insert_filtered = [&](std::vector<Rational> cand) {
      std::sort(cand.begin(), cand.end());
      for (const auto& s : next) {
        bool dominated = true;
        for (int p = 0; p < n; ++p)
          if (s[p] < cand[p]) {
            dominated = false;
            break;
          }
        if (dominated) return;
      }
      next.erase(std::remove_if(next.begin(), next.end(),
                                [&](const std::vector<Rational>& s) {
                                  for (int p = 0; p < n; ++p)
                                    if (cand[p] < s[p]) return false;
                                  return true;
                                }),
                 next.end());
      next.push_back(std::move(cand));
    };

    std::vector<int> cur;
    for (const auto& state : states) {
      for_each_composition(v.copies[j], n, cur, [&](const std::vector<int>& comp) {
        std::vector<Rational> cand(n);
        for (int p = 0; p < n; ++p) cand[p] = state[p] + prefix[comp[p]];
        insert_filtered(std::move(cand));
      });
    }
    states = std::move(next);
  }
  Rational best = 0;
  for (const auto& s : states) best = std::max(best, s[0]);
  return best;
}

// Max-min partition value for a generic valuation via canonical set-partition
// enumeration (restricted growth: good g may open block p only if blocks
// 0..p-1 are in use). Empty blocks count as value zero.
inline Rational generic_mms_brute(const ValueTable& table, int n) {
  const int m = table.m;
  if (m < n) return 0;
  Rational best = 0;
  std::vector<std::uint64_t> parts(n, 0);
  std::function<void(int, int)> dfs = [&](int good, int used) {
    if (good == m) {
      Rational mn = table.value[parts[0]];
      for (int p = 1; p < n; ++p) mn = std::min(mn, table.value[parts[p]]);
      best = std::max(best, mn);
      return;
    }
    const int open_up_to = std::min(used, n - 1);
    for (int p = 0; p <= open_up_to; ++p) {
      parts[p] |= std::uint64_t(1) << good;
      dfs(good + 1, std::max(used, p + 1));
      parts[p] &= ~(std::uint64_t(1) << good);
    }
  };
  dfs(0, 0);
  return best;
}

inline std::vector<Rational> sorted_candidate_levels(const ValueTable& table) {
  std::vector<Rational> levels = table.value;
  levels.push_back(0);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

// Feasibility of the APS set program at level z: weights over the subsets
// worth at least z, summing to one, loading each good at most b.
inline bool aps_level_feasible(const ValueTable& table, const Rational& b, const Rational& z) {
  std::vector<std::uint64_t> cols;
  for (std::uint64_t s = 0; s < table.value.size(); ++s)
    if (table.value[s] >= z) cols.push_back(s);
  if (cols.empty()) return false;
  lp::LinearProgram prog;
  prog.num_vars = static_cast<int>(cols.size());
  prog.add_row(std::vector<Rational>(cols.size(), Rational(1)), lp::Sense::Eq, Rational(1));
  for (int i = 0; i < table.m; ++i) {
    std::vector<Rational> row(cols.size(), Rational(0));
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (cols[c] >> i & 1) row[c] = 1;
    prog.add_row(std::move(row), lp::Sense::LessEq, b);
  }
  return lp::check_feasibility(prog);
}

// Largest index in `levels` whose predicate holds; predicate must be monotone
// (true on a prefix) and true at index 0.
template <typename Pred>
int last_true_index(const std::vector<Rational>& levels, Pred&& pred) {
  int lo = 0, hi = static_cast<int>(levels.size()) - 1;
  while (lo < hi) {
    const int mid = lo + (hi - lo + 1) / 2;
    if (pred(levels[mid]))
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

}  // namespace share_detail

inline Rational exact_mms(const Instance& inst, int agent, const OracleLimits& limits = {}) {
  if (!inst.symmetric())
    throw ValidationError("MMS is defined for symmetric entitlements only");
  const int n = inst.agent_count();
  if (n == 1) return full_value(inst.valuations[agent]);
  if (n > limits.mms_max_agents)
    throw CapabilityError("MMS oracle limited to " + std::to_string(limits.mms_max_agents) +
                          " agents, got " + std::to_string(n));
  if (inst.all_splc()) {
    const auto& v = inst.splc(agent);
    if (v.total_copies() > limits.mms_max_goods)
      throw CapabilityError("MMS oracle limited to " + std::to_string(limits.mms_max_goods) +
                            " copies, got " + std::to_string(v.total_copies()));
    return share_detail::splc_mms_brute(v, n);
  }
  const int m = inst.universe_size();
  if (m > limits.mms_max_goods)
    throw CapabilityError("MMS oracle limited to " + std::to_string(limits.mms_max_goods) +
                          " goods, got " + std::to_string(m));
  return share_detail::generic_mms_brute(
      ValueTable::build(inst.valuations[agent], limits.mms_max_goods), n);
}

inline Rational exact_aps_from_table(const ValueTable& table, const Rational& b) {
  if (b <= 0) throw ValidationError("entitlement must be positive");
  const auto levels = share_detail::sorted_candidate_levels(table);
  const int idx = share_detail::last_true_index(
      levels, [&](const Rational& z) { return share_detail::aps_level_feasible(table, b, z); });
  return levels[idx];
}

inline Rational exact_aps(const ValuationSpec& spec, const Rational& b,
                          const OracleLimits& limits = {}) {
  return exact_aps_from_table(ValueTable::build(spec, limits.aps_max_goods), b);
}

inline Rational exact_aps(const Instance& inst, int agent, const OracleLimits& limits = {}) {
  return exact_aps(inst.valuations[agent], inst.entitlements[agent], limits);
}

// APS via the truncated concave closure: the largest level z whose truncation
// has extension value exactly z at the uniform entitlement point. Agrees with
// the set-LP oracle on every input.
inline Rational aps_via_truncated_extension_from_table(const ValueTable& table,
                                                       const Rational& b) {
  if (b <= 0 || b > 1) throw ValidationError("entitlement must lie in (0, 1]");
  const std::vector<Rational> point(table.m, b);
  const auto levels = share_detail::sorted_candidate_levels(table);
  const int idx = share_detail::last_true_index(levels, [&](const Rational& z) {
    return concave_extension_value(table.truncated(z), point).value == z;
  });
  return levels[idx];
}

inline Rational aps_via_truncated_extension(const ValuationSpec& spec, const Rational& b,
                                            const OracleLimits& limits = {}) {
  return aps_via_truncated_extension_from_table(ValueTable::build(spec, limits.aps_max_goods), b);
}

// Optimal support of the truncated extension LP at z = APS: every returned
// set has truncated value exactly z, weights sum to one, and no good carries
// more than b.
inline std::vector<std::pair<std::uint64_t, Rational>> support_sets_at_aps(
    const ValuationSpec& spec, const Rational& b, const OracleLimits& limits = {}) {
  const ValueTable table = ValueTable::build(spec, limits.aps_max_goods);
  const Rational z = exact_aps_from_table(table, b);
  const auto ext =
      concave_extension_value(table.truncated(z), std::vector<Rational>(table.m, b));
  if (ext.value != z)
    throw InternalError("truncated extension at the APS level must equal the level");
  return ext.support;
}

struct AgentShare {
  std::optional<Rational> mms, aps, mu;
  std::optional<Rational> achieved;
  std::optional<Rational> target;
  std::optional<Rational> ratio;  // achieved/target; absent when target is 0
  bool pass = true;
};

struct ShareReport {
  std::vector<AgentShare> agents;
  std::optional<Rational> factor;
  bool all_pass = true;
  // The ordering asserted by the property suite, emitted verbatim in reports.
  static constexpr const char* kTestedOrdering = "mms<=aps<=mu";
};

inline ShareReport verify(const Instance& inst, const Allocation& alloc,
                          const std::vector<Rational>& targets, const Rational& factor) {
  check_allocation(inst, alloc);
  if (static_cast<int>(targets.size()) != inst.agent_count())
    throw ValidationError("target vector length does not match agent count");
  ShareReport report;
  report.factor = factor;
  for (int i = 0; i < inst.agent_count(); ++i) {
    AgentShare a;
    a.achieved = allocation_value(inst, alloc, i);
    a.target = targets[i];
    if (targets[i] != 0) a.ratio = *a.achieved / targets[i];
    a.pass = *a.achieved >= factor * targets[i];
    report.all_pass = report.all_pass && a.pass;
    report.agents.push_back(std::move(a));
  }
  return report;
}

// Drop one agent and one good (a copy-universe index for SPLC) from a
// symmetric instance, renormalizing entitlements; used by the single-good
// reduction property suites.
inline Instance remove_agent_and_good(const Instance& inst, int drop_agent, int good) {
  if (!inst.symmetric()) throw ValidationError("single-good reduction needs symmetric agents");
  const int n = inst.agent_count();
  if (n < 2) throw ValidationError("cannot reduce a single-agent instance");
  Instance out;
  out.entitlements.assign(n - 1, rat(1, n - 1));
  for (int i = 0; i < n; ++i) {
    if (i == drop_agent) continue;
    ValuationSpec spec = inst.valuations[i];
    std::visit(
        [&](auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, SplcValuation>) {
            const int type = v.type_of_copy(good);
            v.copies[type] -= 1;
            v.values[type].pop_back();
            if (v.copies[type] == 0) {
              v.copies.erase(v.copies.begin() + type);
              v.values.erase(v.values.begin() + type);
              v.types -= 1;
            }
          } else if constexpr (std::is_same_v<T, CoverageValuation>) {
            v.covers.erase(v.covers.begin() + good);
          } else {
            v.weights.erase(v.weights.begin() + good);
          }
        },
        spec);
    out.valuations.push_back(std::move(spec));
  }
  return out;
}

}  // namespace fairdiv
