#pragma once

// Capped-marginal greedy for APS guarantees under submodular valuations, the
// geometric-search wrapper around it, the uncapped diagnostic variant, and
// the internal audit that replays a run against the analysis lemmas.

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairdiv/errors.hpp"
#include "fairdiv/instance.hpp"
#include "fairdiv/rational.hpp"
#include "fairdiv/valuation.hpp"

namespace fairdiv::subaps {

// Incremental bundle state over the instance's good universe (copy ids for
// SPLC). Marginal queries are O(1)-ish against the base spec; nothing is
// tabulated.
class BundleCursor {
 public:
  explicit BundleCursor(const ValuationSpec& spec) : spec_(&spec) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, SplcValuation>)
            counts_.assign(v.types, 0);
          else if constexpr (std::is_same_v<T, CoverageValuation>)
            covered_.assign(v.element_weights.size(), 0);
        },
        spec);
  }

  const Rational& value() const { return value_; }
  const std::vector<int>& splc_counts() const { return counts_; }

  Rational marginal(int good) const {
    return std::visit(
        [&](const auto& v) -> Rational {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, AdditiveValuation>) {
            return v.weights[good];
          } else if constexpr (std::is_same_v<T, TruncatedAdditiveValuation>) {
            return std::min(Rational(raw_sum_ + v.weights[good]), v.cap) -
                   std::min(raw_sum_, v.cap);
          } else if constexpr (std::is_same_v<T, CoverageValuation>) {
            Rational gain = 0;
            for (int e : v.covers[good])
              if (!covered_[e]) gain += v.element_weights[e];
            return gain;
          } else {
            const int type = v.type_of_copy(good);
            return counts_[type] < v.copies[type] ? v.values[type][counts_[type]] : Rational(0);
          }
        },
        *spec_);
  }

  void add(int good) {
    value_ += marginal(good);
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, AdditiveValuation>) {
            (void)v;
          } else if constexpr (std::is_same_v<T, TruncatedAdditiveValuation>) {
            raw_sum_ += v.weights[good];
          } else if constexpr (std::is_same_v<T, CoverageValuation>) {
            for (int e : v.covers[good]) covered_[e] = 1;
          } else {
            counts_[v.type_of_copy(good)] += 1;
          }
        },
        *spec_);
    goods_.push_back(good);
  }

  const std::vector<int>& goods() const { return goods_; }

 private:
  const ValuationSpec* spec_;
  Rational value_;
  Rational raw_sum_;           // truncated-additive underlying sum
  std::vector<int> counts_;    // splc per-type counts
  std::vector<char> covered_;  // coverage elements
  std::vector<int> goods_;
};

struct GreedyRound {
  int t = 0;
  int winner = 0;
  int good = 0;
  Rational rho;  // winning score at allocation time
  // Score each then-active agent saw for this good (capped marginal for the
  // capped rule, raw normalized marginal otherwise).
  std::vector<std::pair<int, Rational>> seen;
};

struct GreedyRoundLog {
  std::vector<GreedyRound> rounds;
  std::vector<Rational> beta;
  std::vector<char> active_at_end;  // per agent
  bool all_goods_allocated = false;
  std::vector<Rational> vhat_final;   // normalized+truncated bundle values
  std::vector<Rational> value_final;  // raw bundle values
  bool capped = true;
  Rational stop_factor;

  nlohmann::json to_json() const {
    nlohmann::json j;
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rounds) {
      nlohmann::json seen = nlohmann::json::object();
      for (const auto& [agent, score] : r.seen) seen[std::to_string(agent)] = to_string(score);
      rs.push_back({{"t", r.t},
                    {"winner", r.winner},
                    {"good", r.good},
                    {"rho", to_string(r.rho)},
                    {"seen", std::move(seen)}});
    }
    j["rounds"] = std::move(rs);
    nlohmann::json betas = nlohmann::json::array();
    for (const auto& b : beta) betas.push_back(to_string(b));
    j["beta"] = std::move(betas);
    j["capped"] = capped;
    j["stop_factor"] = to_string(stop_factor);
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& v : value_final) vals.push_back(to_string(v));
    j["value_final"] = std::move(vals);
    j["all_goods_allocated"] = all_goods_allocated;
    return j;
  }
};

struct GreedyOutcome {
  bool success = true;
  int failing_agent = -1;
  Allocation allocation;
  GreedyRoundLog log;
};

namespace greedy_detail {

inline Allocation bundles_to_allocation(const Instance& inst,
                                        const std::vector<BundleCursor>& cursors) {
  Allocation alloc;
  if (inst.all_splc()) {
    for (const auto& c : cursors) alloc.bundles.push_back(c.splc_counts());
  } else {
    for (const auto& c : cursors) {
      std::vector<int> goods = c.goods();
      std::sort(goods.begin(), goods.end());
      alloc.bundles.push_back(std::move(goods));
    }
  }
  return alloc;
}

// One run of the greedy: normalize each valuation so the guess beta_i maps to
// n*b_i, truncate there, then repeatedly hand the lexicographically first
// argmax (agent, good) pair its good, retiring agents that reach
// stop_factor * n * b_i. With `capped`, scores are clamped at (2/3) n b_i.
inline GreedyOutcome run(const Instance& inst, const std::vector<Rational>& beta, bool capped,
                         const Rational& stop_factor) {
  inst.check_valid();
  const int n = inst.agent_count();
  if (static_cast<int>(beta.size()) != n)
    throw ValidationError("beta vector length does not match agent count");
  for (const auto& b : beta)
    if (b < 0) throw ValidationError("beta must be nonnegative");
  if (stop_factor <= 0 || stop_factor > 1)
    throw ValidationError("stop factor must lie in (0, 1]");

  const int m = inst.universe_size();
  GreedyOutcome out;
  out.log.beta = beta;
  out.log.capped = capped;
  out.log.stop_factor = stop_factor;

  std::vector<Rational> nb(n), factor(n), cap23(n);
  std::vector<char> active(n, 0);
  std::vector<BundleCursor> cursors;
  cursors.reserve(n);
  for (int i = 0; i < n; ++i) {
    cursors.emplace_back(inst.valuations[i]);
    nb[i] = Rational(n) * inst.entitlements[i];
    cap23[i] = rat(2, 3) * nb[i];
    if (beta[i] > 0) {
      factor[i] = nb[i] / beta[i];
      active[i] = 1;
    }
  }

  auto vhat_of = [&](int i, const Rational& raw) {
    return std::min(nb[i], Rational(factor[i] * raw));
  };
  auto score_of = [&](int i, int good) {
    const Rational margin =
        vhat_of(i, cursors[i].value() + cursors[i].marginal(good)) -
        vhat_of(i, cursors[i].value());
    return capped ? std::min(cap23[i], margin) : margin;
  };

  std::vector<char> available(m, 1);
  int remaining = m;
  int round = 0;
  while (remaining > 0) {
    int best_agent = -1, best_good = -1;
    Rational best_score;
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (int g = 0; g < m; ++g) {
        if (!available[g]) continue;
        const Rational s = score_of(i, g);
        if (best_agent < 0 || s > best_score) {
          best_agent = i;
          best_good = g;
          best_score = s;
        }
      }
    }
    if (best_agent < 0) break;  // no active agent left

    GreedyRound rec;
    rec.t = ++round;
    rec.winner = best_agent;
    rec.good = best_good;
    rec.rho = best_score;
    for (int i = 0; i < n; ++i)
      if (active[i]) rec.seen.emplace_back(i, score_of(i, best_good));
    out.log.rounds.push_back(std::move(rec));

    cursors[best_agent].add(best_good);
    available[best_good] = 0;
    --remaining;
    if (vhat_of(best_agent, cursors[best_agent].value()) >= stop_factor * nb[best_agent])
      active[best_agent] = 0;
  }

  out.log.all_goods_allocated = remaining == 0;
  out.log.active_at_end = active;
  out.log.vhat_final.resize(n);
  out.log.value_final.resize(n);
  for (int i = 0; i < n; ++i) {
    out.log.value_final[i] = cursors[i].value();
    out.log.vhat_final[i] = beta[i] > 0 ? vhat_of(i, cursors[i].value()) : Rational(0);
  }
  for (int i = 0; i < n; ++i) {
    if (beta[i] > 0 && cursors[i].value() < stop_factor * beta[i]) {
      out.success = false;
      out.failing_agent = i;
      break;
    }
  }
  out.allocation = bundles_to_allocation(inst, cursors);
  return out;
}

}  // namespace greedy_detail

// One greedy pass with the capped selection rule and the 1/3 stop threshold.
// Returns either an allocation in which every agent holds at least beta_i/3,
// or the lowest-index agent whose guess provably exceeds her APS.
inline GreedyOutcome greedy_round(const Instance& inst, const std::vector<Rational>& beta) {
  return greedy_detail::run(inst, beta, true, rat(1, 3));
}

// Diagnostic: the same loop with the cap removed from the selection rule and
// a caller-chosen stop threshold. No approximation guarantee.
inline GreedyOutcome greedy_uncapped_variant(const Instance& inst,
                                             const std::vector<Rational>& beta,
                                             const Rational& stop_factor = rat(1, 3)) {
  return greedy_detail::run(inst, beta, false, stop_factor);
}

struct AuditReport {
  bool ok = true;
  std::vector<std::string> violations;

  void fail(std::string what) {
    ok = false;
    violations.push_back(std::move(what));
  }
};

// Replay a capped run against the analysis: per-agent winning-score sums stay
// under (2/3) n b_i, multi-good bundles are worth exactly their score sum,
// agents active at exhaustion saw at most (2/3) n (1-b_i) across the goods
// they lost, and (given oracle APS values) no agent with beta_i <= APS_i ends
// under a third; a returned failing agent must satisfy beta_i > APS_i.
inline AuditReport greedy_internal_audit(
    const Instance& inst, const GreedyOutcome& out,
    const std::optional<std::vector<Rational>>& oracle_aps = std::nullopt) {
  AuditReport report;
  if (!out.log.capped || out.log.stop_factor != rat(1, 3)) {
    report.fail("audit applies to capped runs with the 1/3 stop threshold");
    return report;
  }
  const int n = inst.agent_count();
  std::vector<Rational> rho_sum(n, Rational(0));
  std::vector<int> won(n, 0);
  std::vector<Rational> lost_seen(n, Rational(0));
  for (const auto& r : out.log.rounds) {
    rho_sum[r.winner] += r.rho;
    won[r.winner] += 1;
    for (const auto& [agent, score] : r.seen)
      if (agent != r.winner) lost_seen[agent] += score;
  }
  for (int i = 0; i < n; ++i) {
    if (out.log.beta[i] == 0) continue;
    const Rational nb = Rational(n) * inst.entitlements[i];
    if (rho_sum[i] > rat(2, 3) * nb)
      report.fail("agent " + std::to_string(i) + ": winning scores sum past (2/3) n b");
    if (won[i] > 1 && out.log.vhat_final[i] != rho_sum[i])
      report.fail("agent " + std::to_string(i) + ": multi-good bundle value != score sum");
    if (out.log.active_at_end[i] && out.log.all_goods_allocated) {
      if (lost_seen[i] > rat(2, 3) * Rational(n) * (1 - inst.entitlements[i]))
        report.fail("agent " + std::to_string(i) + ": lost-good scores exceed (2/3) n (1-b)");
    }
    if (oracle_aps) {
      if (out.log.beta[i] <= (*oracle_aps)[i] &&
          3 * out.log.vhat_final[i] < Rational(n) * inst.entitlements[i])
        report.fail("agent " + std::to_string(i) +
                    ": ended under a third despite beta within APS");
    }
  }
  if (!out.success && oracle_aps) {
    if (out.log.beta[out.failing_agent] <= (*oracle_aps)[out.failing_agent])
      report.fail("failing agent " + std::to_string(out.failing_agent) +
                  " certified although beta <= APS");
  }
  return report;
}

struct ThirdApsResult {
  Allocation allocation;
  std::vector<Rational> beta;  // final guesses
  int greedy_runs = 0;
  GreedyRoundLog final_log;
};

// Geometric search for APS guesses: start each beta_i at v_i(M); when the
// greedy certifies beta_k > APS_k, divide beta_k by (1+epsilon), except that
// a failure at beta_k <= v_k^min (the smallest positive singleton value)
// proves APS_k = 0 outright, retiring k with an empty guarantee. The
// resulting allocation gives every agent at least APS_i / (3 (1+epsilon)).
inline ThirdApsResult solve_third_aps(
    const Instance& inst, const Rational& epsilon,
    const std::function<void(const GreedyOutcome&)>& on_round = {}) {
  inst.check_valid();
  if (epsilon <= 0) throw ValidationError("epsilon must be positive");
  const int n = inst.agent_count();
  const int m = inst.universe_size();

  std::vector<Rational> beta(n), vmin(n, Rational(0));
  for (int i = 0; i < n; ++i) {
    beta[i] = full_value(inst.valuations[i]);
    BundleCursor cursor(inst.valuations[i]);
    for (int g = 0; g < m; ++g) {
      const Rational s = cursor.marginal(g);
      if (s > 0 && (vmin[i] == 0 || s < vmin[i])) vmin[i] = s;
    }
  }

  ThirdApsResult result;
  const Rational shrink = 1 + epsilon;
  for (int guard = 0;; ++guard) {
    if (guard > 100000) throw InternalError("beta search failed to terminate");
    GreedyOutcome out = greedy_round(inst, beta);
    ++result.greedy_runs;
    if (on_round) on_round(out);
    if (out.success) {
      result.allocation = std::move(out.allocation);
      result.beta = beta;
      result.final_log = std::move(out.log);
      return result;
    }
    const int k = out.failing_agent;
    if (beta[k] <= vmin[k])
      beta[k] = 0;  // APS_k < beta_k <= v_k^min forces APS_k = 0
    else
      beta[k] /= shrink;
  }
}

}  // namespace fairdiv::subaps
