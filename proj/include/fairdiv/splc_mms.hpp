#pragma once

// The 1/2-MMS pipeline for SPLC valuations with symmetric agents:
// closed-form share targets, single-good reductions, a welfare LP over the
// residual instance, fraction consolidation, dual prices, cycle cancellation
// on the price graph, and forest rounding. Every stage asserts its exact
// postcondition and throws InternalError on violation.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairdiv/errors.hpp"
#include "fairdiv/extensions.hpp"
#include "fairdiv/instance.hpp"
#include "fairdiv/lp.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv::splc {

// mu for an agent when only copies[j] copies of each type remain and n
// agents are active: the uniform concave-extension value of the reduced
// valuation.
inline Rational mu_uniform_reduced(const SplcValuation& v, const std::vector<int>& copies,
                                   int n) {
  Rational mu = 0;
  for (int j = 0; j < v.types; ++j) {
    const int whole = copies[j] / n;
    const int rem = copies[j] % n;
    mu += v.prefix_value(j, whole);
    if (rem != 0) mu += v.values[j][whole] * rat(rem, n);
  }
  return mu;
}

// Flat variable layout for the share/capacity LPs: one variable per
// (active agent, kept type, remaining copy).
struct VarMap {
  std::vector<int> agents;  // active agent ids, ascending
  std::vector<int> types;   // kept type ids, ascending
  std::vector<int> copies;  // remaining copies per kept type
  int num_vars = 0;
  std::vector<std::vector<int>> offset;  // [agent pos][type pos] -> first flat index

  static VarMap build(const Instance& inst, std::vector<int> agents, std::vector<int> types,
                      std::vector<int> copies) {
    VarMap m;
    m.agents = std::move(agents);
    m.types = std::move(types);
    m.copies = std::move(copies);
    m.offset.assign(m.agents.size(), std::vector<int>(m.types.size(), 0));
    int next = 0;
    for (std::size_t a = 0; a < m.agents.size(); ++a)
      for (std::size_t t = 0; t < m.types.size(); ++t) {
        m.offset[a][t] = next;
        next += m.copies[t];
      }
    m.num_vars = next;
    (void)inst;
    return m;
  }

  int index(int agent_pos, int type_pos, int copy) const {
    return offset[agent_pos][type_pos] + copy;
  }
};

namespace pipeline_detail {

inline VarMap full_map(const Instance& inst) {
  const auto& v0 = inst.splc(0);
  std::vector<int> agents(inst.agent_count());
  std::vector<int> types(v0.types);
  for (int i = 0; i < inst.agent_count(); ++i) agents[i] = i;
  for (int j = 0; j < v0.types; ++j) types[j] = j;
  return VarMap::build(inst, std::move(agents), std::move(types), v0.copies);
}

inline lp::LinearProgram build_lp(const Instance& inst, const VarMap& map,
                                  const std::vector<Rational>& mu, bool welfare_objective) {
  lp::LinearProgram prog;
  prog.num_vars = map.num_vars;
  prog.objective.assign(map.num_vars, Rational(0));
  prog.upper.assign(map.num_vars, Rational(1));
  for (std::size_t a = 0; a < map.agents.size(); ++a) {
    std::vector<Rational> row(map.num_vars, Rational(0));
    const auto& v = inst.splc(map.agents[a]);
    for (std::size_t t = 0; t < map.types.size(); ++t)
      for (int k = 0; k < map.copies[t]; ++k) {
        const Rational& val = v.values[map.types[t]][k];
        row[map.index(a, t, k)] = val;
        if (welfare_objective) prog.objective[map.index(a, t, k)] = val;
      }
    prog.add_row(std::move(row), lp::Sense::GreaterEq, mu[map.agents[a]]);
  }
  for (std::size_t t = 0; t < map.types.size(); ++t) {
    std::vector<Rational> row(map.num_vars, Rational(0));
    for (std::size_t a = 0; a < map.agents.size(); ++a)
      for (int k = 0; k < map.copies[t]; ++k) row[map.index(a, t, k)] = 1;
    prog.add_row(std::move(row), lp::Sense::LessEq, Rational(map.copies[t]));
  }
  return prog;
}

}  // namespace pipeline_detail

// LP (feasibility form): per-agent linear-extension value at least mu_i,
// per-type mass at most the copy count, x in [0,1].
inline lp::LinearProgram build_feasibility_lp(const Instance& inst,
                                              const std::vector<Rational>& mu) {
  if (!inst.all_splc()) throw ValidationError("SPLC pipeline needs SPLC valuations");
  if (static_cast<int>(mu.size()) != inst.agent_count())
    throw ValidationError("mu vector length does not match agent count");
  return pipeline_detail::build_lp(inst, pipeline_detail::full_map(inst), mu, false);
}

// Same constraints with the total-welfare objective.
inline lp::LinearProgram build_welfare_lp(const Instance& inst,
                                          const std::vector<Rational>& mu) {
  if (!inst.all_splc()) throw ValidationError("SPLC pipeline needs SPLC valuations");
  if (static_cast<int>(mu.size()) != inst.agent_count())
    throw ValidationError("mu vector length does not match agent count");
  return pipeline_detail::build_lp(inst, pipeline_detail::full_map(inst), mu, true);
}

// Push each agent's per-type mass onto the earliest copies, leaving at most
// one fractional entry (a prefix 1,...,1,f,0,...,0). Mass per (agent, type)
// is preserved; with nonincreasing marginals the agent's value never drops.
inline FractionalAllocation consolidate_fractions(const Instance& inst,
                                                  const FractionalAllocation& frac) {
  FractionalAllocation out = FractionalAllocation::zeros(inst);
  const auto& v0 = inst.splc(0);
  for (int i = 0; i < inst.agent_count(); ++i)
    for (int j = 0; j < v0.types; ++j) {
      Rational mass = 0;
      for (int k = 0; k < v0.copies[j]; ++k) {
        if (frac.x[i][j][k] < 0 || frac.x[i][j][k] > 1)
          throw ValidationError("fractional entry outside [0,1]");
        mass += frac.x[i][j][k];
      }
      for (int k = 0; k < v0.copies[j] && mass > 0; ++k) {
        out.x[i][j][k] = std::min(mass, Rational(1));
        mass -= out.x[i][j][k];
      }
      if (mass > 0) throw ValidationError("per-agent mass exceeds the copy count");
    }
  return out;
}

struct PriceInfo {
  std::vector<Rational> price;  // per type id; dual of the capacity row (0 for dropped types)
  std::vector<Rational> beta;   // per agent id; negated dual of the share row
};

// Capacity-row duals of an optimal welfare-LP solution, after asserting the
// bang-per-buck identity: every strictly fractional copy (i,j,k) of the given
// (consolidated) solution satisfies v_ijk * (1 + beta_i) = p_j exactly, and
// p_j > 0 on every type holding a fractional copy.
inline PriceInfo extract_duals_and_check_mbb(const lp::LpSolution& sol, const VarMap& map,
                                             const Instance& inst,
                                             const FractionalAllocation& frac) {
  if (sol.status != lp::LpStatus::Optimal)
    throw ValidationError("dual extraction needs an optimal solution");
  PriceInfo info;
  const auto& v0 = inst.splc(0);
  info.price.assign(v0.types, Rational(0));
  info.beta.assign(inst.agent_count(), Rational(0));
  const std::size_t na = map.agents.size();
  for (std::size_t a = 0; a < na; ++a) {
    info.beta[map.agents[a]] = -sol.duals[a];
    if (info.beta[map.agents[a]] < 0)
      throw InternalError("share-row dual has the wrong sign");
  }
  for (std::size_t t = 0; t < map.types.size(); ++t) {
    info.price[map.types[t]] = sol.duals[na + t];
    if (info.price[map.types[t]] < 0)
      throw InternalError("capacity-row dual has the wrong sign");
  }
  for (std::size_t a = 0; a < na; ++a) {
    const int i = map.agents[a];
    const auto& v = inst.splc(i);
    for (std::size_t t = 0; t < map.types.size(); ++t) {
      const int j = map.types[t];
      for (int k = 0; k < map.copies[t]; ++k) {
        const Rational& x = frac.x[i][j][k];
        if (x <= 0 || x >= 1) continue;
        if (v.values[j][k] * (1 + info.beta[i]) != info.price[j])
          throw InternalError("max bang-per-buck identity violated for a fractional copy");
        if (info.price[j] <= 0)
          throw InternalError("fractionally allocated type has nonpositive price");
      }
    }
  }
  return info;
}

struct PriceGraphEdge {
  int agent = 0;
  int type = 0;
  Rational weight;          // fraction * price, in (0, price]
  bool saturated = false;   // weight == price: the copy became whole
};

// Bipartite agents-vs-types graph of fractional holdings, weighted by
// fraction * price.
struct PriceGraph {
  std::vector<PriceGraphEdge> edges;
  std::vector<Rational> price;  // per type id
};

namespace pipeline_detail {

struct NodeSums {
  std::map<int, Rational> agent, type;
};

inline NodeSums node_sums(const PriceGraph& g) {
  NodeSums s;
  for (const auto& e : g.edges) {
    s.agent[e.agent] += e.weight;
    s.type[e.type] += e.weight;
  }
  return s;
}

// Some cycle among the given edges (ids into g.edges), as an edge sequence
// around the cycle; empty if the graph is a forest. Deterministic: nodes and
// adjacency are scanned in ascending order.
inline std::vector<int> find_cycle(const PriceGraph& g, const std::vector<int>& active) {
  // Node ids: agents as 2i, types as 2j+1.
  std::map<int, std::vector<std::pair<int, int>>> adj;  // node -> (neighbor, edge id)
  for (int id : active) {
    const auto& e = g.edges[id];
    adj[2 * e.agent].push_back({2 * e.type + 1, id});
    adj[2 * e.type + 1].push_back({2 * e.agent, id});
  }
  for (auto& [node, list] : adj) std::sort(list.begin(), list.end());

  std::map<int, int> parent_edge, parent_node;
  std::map<int, char> state;  // 0 unseen, 1 on stack, 2 done
  std::vector<int> cycle;
  std::function<bool(int)> dfs = [&](int u) {
    state[u] = 1;
    for (const auto& [w, id] : adj[u]) {
      if (parent_edge.count(u) && parent_edge[u] == id) continue;
      if (state[w] == 1) {
        // Back edge: walk the stack from u up to w.
        cycle.push_back(id);
        int cur = u;
        while (cur != w) {
          cycle.push_back(parent_edge[cur]);
          cur = parent_node[cur];
        }
        return true;
      }
      if (state[w] == 0) {
        parent_edge[w] = id;
        parent_node[w] = u;
        if (dfs(w)) return true;
      }
    }
    state[u] = 2;
    return false;
  };
  for (const auto& [node, list] : adj) {
    if (state[node] == 0 && dfs(node)) return cycle;
  }
  return {};
}

}  // namespace pipeline_detail

// Cancel every cycle among the strictly fractional edges by shifting weight
// delta around the cycle, alternating signs. delta is the minimum of the
// losing-edge weights and the gaining-edge headrooms (price - weight), so an
// edge either drops to zero (removed) or reaches its price (the copy becomes
// whole and leaves the fractional graph); either way the fractional edge
// count strictly decreases. Per-node incident weight sums are preserved
// exactly at every step.
inline PriceGraph cancel_cycles(PriceGraph g) {
  using pipeline_detail::node_sums;
  const auto initial = node_sums(g);
  for (;;) {
    std::vector<int> active;
    for (std::size_t id = 0; id < g.edges.size(); ++id)
      if (!g.edges[id].saturated) active.push_back(static_cast<int>(id));
    std::vector<int> cycle = pipeline_detail::find_cycle(g, active);
    if (cycle.empty()) break;

    // Orient so that the minimum-weight edge (ties by agent, then type) loses.
    int min_pos = 0;
    for (std::size_t p = 1; p < cycle.size(); ++p) {
      const auto& best = g.edges[cycle[min_pos]];
      const auto& cand = g.edges[cycle[p]];
      if (cand.weight < best.weight ||
          (cand.weight == best.weight &&
           std::pair(cand.agent, cand.type) < std::pair(best.agent, best.type)))
        min_pos = static_cast<int>(p);
    }
    std::optional<Rational> delta;
    for (std::size_t p = 0; p < cycle.size(); ++p) {
      const auto& e = g.edges[cycle[p]];
      const bool losing = (p % 2) == (min_pos % 2);
      const Rational room = losing ? e.weight : g.price[e.type] - e.weight;
      if (!delta || room < *delta) delta = room;
    }
    if (!delta || *delta <= 0) throw InternalError("cycle cancellation stalled");

    const std::size_t before = active.size();
    for (std::size_t p = 0; p < cycle.size(); ++p) {
      auto& e = g.edges[cycle[p]];
      const bool losing = (p % 2) == (min_pos % 2);
      e.weight += losing ? -*delta : *delta;
      if (e.weight < 0 || e.weight > g.price[e.type])
        throw InternalError("cycle cancellation pushed an edge out of range");
      if (e.weight == g.price[e.type]) e.saturated = true;
    }
    g.edges.erase(std::remove_if(g.edges.begin(), g.edges.end(),
                                 [](const PriceGraphEdge& e) { return e.weight == 0; }),
                  g.edges.end());
    std::size_t after = 0;
    for (const auto& e : g.edges)
      if (!e.saturated) ++after;
    if (after >= before) throw InternalError("cycle cancellation did not remove an edge");

    const auto now = node_sums(g);
    for (const auto& [node, sum] : initial.agent) {
      auto it = now.agent.find(node);
      if ((it == now.agent.end() ? Rational(0) : it->second) != sum)
        throw InternalError("cycle cancellation changed an agent's weight sum");
    }
    for (const auto& [node, sum] : initial.type) {
      auto it = now.type.find(node);
      if ((it == now.type.end() ? Rational(0) : it->second) != sum)
        throw InternalError("cycle cancellation changed a type's weight sum");
    }
  }
  return g;
}

// Convert a cancelled price graph back into a fractional allocation: the
// whole copies of the consolidated solution are kept, and each edge's
// fraction becomes weight/price on the next copy slot (a whole copy for
// saturated edges). Per-agent linear-extension values match `consolidated`
// exactly; division by a zero price cannot occur because every fractionally
// held type carries a positive dual.
inline FractionalAllocation reprice_to_allocation(const Instance& inst, const PriceGraph& g,
                                                  const FractionalAllocation& consolidated) {
  FractionalAllocation out = FractionalAllocation::zeros(inst);
  const auto& v0 = inst.splc(0);
  std::vector<std::vector<int>> whole(inst.agent_count(), std::vector<int>(v0.types, 0));
  for (int i = 0; i < inst.agent_count(); ++i)
    for (int j = 0; j < v0.types; ++j) {
      int q = 0;
      while (q < v0.copies[j] && consolidated.x[i][j][q] == 1) ++q;
      whole[i][j] = q;
      for (int k = 0; k < q; ++k) out.x[i][j][k] = 1;
      bool seen_fraction = false;
      for (int k = q; k < v0.copies[j]; ++k) {
        if (consolidated.x[i][j][k] == 0) continue;
        if (seen_fraction || consolidated.x[i][j][k] >= 1)
          throw ValidationError("fractional allocation is not consolidated");
        seen_fraction = true;
      }
    }
  for (const auto& e : g.edges) {
    if (g.price[e.type] <= 0) throw InternalError("priced edge on a type with price zero");
    const Rational f = e.weight / g.price[e.type];
    const int q = whole[e.agent][e.type];
    if (q >= v0.copies[e.type]) throw InternalError("no copy slot left for a priced edge");
    out.x[e.agent][e.type][q] = f;
  }
  out.check_valid(inst);
  for (int i = 0; i < inst.agent_count(); ++i)
    if (linear_extension_value(inst, out, i) != linear_extension_value(inst, consolidated, i))
      throw InternalError("repricing changed an agent's linear-extension value");
  return out;
}

// Round an acyclic consolidated fractional allocation: root every tree of the
// fractional-holdings graph at its lowest agent, grant each type node as one
// whole extra copy to its parent agent, and drop each agent's fraction of its
// parent type. Residual fractions on agentless type nodes stay unallocated.
inline Allocation round_forest(const Instance& inst, const FractionalAllocation& frac) {
  const auto& v0 = inst.splc(0);
  Allocation alloc;
  alloc.bundles.assign(inst.agent_count(), std::vector<int>(v0.types, 0));

  std::map<std::pair<int, int>, Rational> fraction;  // (agent, type) -> f in (0,1)
  for (int i = 0; i < inst.agent_count(); ++i)
    for (int j = 0; j < v0.types; ++j) {
      int q = 0;
      while (q < v0.copies[j] && frac.x[i][j][q] == 1) ++q;
      alloc.bundles[i][j] = q;
      bool seen_fraction = false;
      for (int k = q; k < v0.copies[j]; ++k) {
        if (frac.x[i][j][k] == 0) continue;
        if (seen_fraction || frac.x[i][j][k] >= 1)
          throw ValidationError("fractional allocation is not consolidated");
        seen_fraction = true;
        fraction[{i, j}] = frac.x[i][j][k];
      }
    }

  // Bipartite forest: agents as 2i, types as 2j+1.
  std::map<int, std::vector<int>> adj;
  for (const auto& [key, f] : fraction) {
    adj[2 * key.first].push_back(2 * key.second + 1);
    adj[2 * key.second + 1].push_back(2 * key.first);
  }
  for (auto& [node, list] : adj) std::sort(list.begin(), list.end());

  std::map<int, char> visited;
  for (const auto& [start, list0] : adj) {
    if (visited[start] || start % 2 != 0) continue;  // roots are agent nodes
    // BFS the whole component from the lowest agent node.
    std::vector<std::pair<int, int>> order{{start, -1}};
    visited[start] = 1;
    for (std::size_t head = 0; head < order.size(); ++head) {
      const auto [u, parent] = order[head];
      for (int w : adj[u]) {
        if (w == parent) continue;
        if (visited[w]) throw ValidationError("fractional allocation graph has a cycle");
        visited[w] = 1;
        order.push_back({w, u});
      }
    }
    for (const auto& [u, parent] : order) {
      if (u % 2 == 1) {
        if (parent < 0 || parent % 2 != 0)
          throw InternalError("type node without an agent parent");
        alloc.bundles[parent / 2][u / 2] += 1;
      }
    }
  }

  check_allocation(inst, alloc);
  return alloc;
}

struct Retirement {
  int agent = 0;
  int type = -1;  // -1: retired empty (zero target)
  Rational copy_value;
  Rational mu_at_retirement;
};

struct PipelineTrace {
  std::vector<Rational> mu_initial;
  std::vector<Retirement> retirements;
  std::vector<int> residual_agents;
  std::vector<int> residual_copies;
  std::vector<Rational> residual_mu;
  bool lp3_feasible = false;
  bool ran_lp = false;
  Rational lp_objective;
  std::vector<Rational> prices;  // per type
  std::vector<Rational> beta;    // per agent
  std::vector<PriceGraphEdge> graph_before, graph_after;
  std::vector<Rational> value_linear;  // per agent, after repricing
  std::vector<Rational> value_final;   // per agent, integral
  std::vector<Rational> guarantee;     // per agent: mu at retirement or residual mu
  bool mbb_ok = false;
  bool node_sums_ok = false;
  bool reprice_value_ok = false;
  bool rounding_loss_ok = false;

  nlohmann::json to_json() const {
    nlohmann::json j;
    auto rvec = [](const std::vector<Rational>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& x : v) a.push_back(to_string(x));
      return a;
    };
    auto edges = [](const std::vector<PriceGraphEdge>& es) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& e : es)
        a.push_back({{"agent", e.agent},
                     {"type", e.type},
                     {"weight", to_string(e.weight)},
                     {"saturated", e.saturated}});
      return a;
    };
    j["mu_initial"] = rvec(mu_initial);
    nlohmann::json rets = nlohmann::json::array();
    for (const auto& r : retirements)
      rets.push_back({{"agent", r.agent},
                      {"type", r.type},
                      {"copy_value", to_string(r.copy_value)},
                      {"mu", to_string(r.mu_at_retirement)}});
    j["single_good_phase"] = std::move(rets);
    j["residual_agents"] = residual_agents;
    j["residual_copies"] = residual_copies;
    j["residual_mu"] = rvec(residual_mu);
    j["lp3_feasible"] = lp3_feasible;
    if (ran_lp) {
      j["lp_objective"] = to_string(lp_objective);
      j["prices"] = rvec(prices);
      j["beta"] = rvec(beta);
      j["graph_before"] = edges(graph_before);
      j["graph_after"] = edges(graph_after);
      j["value_linear"] = rvec(value_linear);
    }
    j["value_final"] = rvec(value_final);
    j["guarantee"] = rvec(guarantee);
    j["invariants"] = {{"mbb", mbb_ok},
                       {"node_sums", node_sums_ok},
                       {"reprice_value", reprice_value_ok},
                       {"rounding_loss", rounding_loss_ok}};
    return j;
  }
};

enum class PipelineStatus { Solved, InfeasibleTargets };

struct PipelineResult {
  PipelineStatus status = PipelineStatus::Solved;
  Allocation allocation;
  PipelineTrace trace;
};

namespace pipeline_detail {

// Shared LP-relax-and-round phase over the residual instance. `mu` are the
// per-agent targets already fixed for the residue.
inline void run_lp_phase(const Instance& inst, const std::vector<int>& active,
                         const std::vector<int>& copies, const std::vector<Rational>& mu,
                         Allocation& bundles, PipelineTrace& trace, bool targets_are_upper_bounds) {
  const auto& v0 = inst.splc(0);
  std::vector<int> kept;
  for (int j = 0; j < v0.types; ++j) {
    if (copies[j] == 0) continue;
    bool valued = false;
    for (int i : active)
      if (inst.splc(i).values[j][0] > 0) valued = true;
    if (valued) kept.push_back(j);
  }
  std::vector<int> kept_copies;
  for (int j : kept) kept_copies.push_back(copies[j]);
  VarMap map = VarMap::build(inst, active, kept, kept_copies);

  trace.lp3_feasible = lp::check_feasibility(build_lp(inst, map, mu, false));
  if (!trace.lp3_feasible) {
    if (targets_are_upper_bounds)
      throw InternalError("share LP must be feasible at the uniform extension targets");
    return;  // caller reports InfeasibleTargets
  }

  lp::LpSolution sol = lp::solve(build_lp(inst, map, mu, true));
  if (sol.status != lp::LpStatus::Optimal)
    throw InternalError("welfare LP must be optimal once feasible");
  trace.ran_lp = true;
  trace.lp_objective = sol.objective;

  FractionalAllocation x = FractionalAllocation::zeros(inst);
  for (std::size_t a = 0; a < map.agents.size(); ++a)
    for (std::size_t t = 0; t < map.types.size(); ++t)
      for (int k = 0; k < map.copies[t]; ++k)
        x.x[map.agents[a]][map.types[t]][k] = sol.primal[map.index(a, t, k)];

  FractionalAllocation consolidated = consolidate_fractions(inst, x);
  for (int i : active)
    if (linear_extension_value(inst, consolidated, i) != linear_extension_value(inst, x, i))
      throw InternalError("consolidation changed an agent's value at the LP optimum");
  // Zero-valued copies carry no welfare and no share contribution; drop them
  // so every fractional holding has positive value and positive price.
  for (int i : active) {
    const auto& v = inst.splc(i);
    for (int j = 0; j < v0.types; ++j)
      for (int k = 0; k < v0.copies[j]; ++k)
        if (v.values[j][k] == 0) consolidated.x[i][j][k] = 0;
  }

  PriceInfo duals = extract_duals_and_check_mbb(sol, map, inst, consolidated);
  trace.mbb_ok = true;
  trace.prices = duals.price;
  trace.beta = duals.beta;

  PriceGraph graph;
  graph.price = duals.price;
  for (int i : active)
    for (int j = 0; j < v0.types; ++j) {
      int q = 0;
      while (q < v0.copies[j] && consolidated.x[i][j][q] == 1) ++q;
      if (q < v0.copies[j] && consolidated.x[i][j][q] > 0)
        graph.edges.push_back(
            {i, j, consolidated.x[i][j][q] * duals.price[j], false});
    }
  trace.graph_before = graph.edges;

  PriceGraph cancelled = cancel_cycles(graph);
  trace.node_sums_ok = true;  // cancel_cycles asserts sums at every step
  trace.graph_after = cancelled.edges;

  FractionalAllocation repriced = reprice_to_allocation(inst, cancelled, consolidated);
  trace.reprice_value_ok = true;  // reprice_to_allocation asserts value preservation
  trace.value_linear.assign(inst.agent_count(), Rational(0));
  for (int i : active) trace.value_linear[i] = linear_extension_value(inst, repriced, i);

  Allocation rounded = round_forest(inst, repriced);
  for (int i : active) {
    const auto& v = inst.splc(i);
    Rational max_val = 0;
    for (int j : kept) max_val = std::max(max_val, v.values[j][0]);
    const Rational got = v.value_of_counts(rounded.bundles[i]);
    if (got < linear_extension_value(inst, repriced, i) - max_val)
      throw InternalError("rounding lost more than one good's value");
  }
  trace.rounding_loss_ok = true;

  for (int i : active)
    for (int j = 0; j < v0.types; ++j) bundles.bundles[i][j] += rounded.bundles[i][j];
}

}  // namespace pipeline_detail

// Full polynomial-time pipeline: closed-form uniform-extension targets,
// single-good reductions with target recomputation on the reduced instance,
// then LP relaxation and rounding on the residue. Every agent ends with at
// least half her target as of retirement (or of the final residue).
inline PipelineResult solve_half_mms(const Instance& inst) {
  inst.check_valid();
  if (!inst.all_splc()) throw ValidationError("solve_half_mms needs SPLC valuations");
  if (!inst.symmetric()) throw ValidationError("solve_half_mms needs symmetric entitlements");
  const auto& v0 = inst.splc(0);
  const int n = inst.agent_count();

  PipelineResult result;
  result.allocation.bundles.assign(n, std::vector<int>(v0.types, 0));
  PipelineTrace& trace = result.trace;
  trace.guarantee.assign(n, Rational(0));

  std::vector<int> active(n);
  for (int i = 0; i < n; ++i) active[i] = i;
  std::vector<int> copies = v0.copies;

  std::vector<Rational> mu(n, Rational(0));
  auto recompute_mu = [&] {
    for (int i : active)
      mu[i] = mu_uniform_reduced(inst.splc(i), copies, static_cast<int>(active.size()));
  };
  recompute_mu();
  trace.mu_initial = mu;

  // Single-good phase. Zero-target agents retire empty; otherwise the
  // lexicographically smallest (agent, type) with a first copy worth at
  // least half the agent's current target takes that single copy.
  for (;;) {
    if (active.empty()) break;
    recompute_mu();
    bool changed = false;
    for (auto it = active.begin(); it != active.end();) {
      if (mu[*it] == 0) {
        trace.retirements.push_back({*it, -1, Rational(0), Rational(0)});
        it = active.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
    if (changed) continue;

    int pick_agent = -1, pick_type = -1;
    for (int i : active) {
      for (int j = 0; j < v0.types && pick_agent < 0; ++j)
        if (copies[j] >= 1 && 2 * inst.splc(i).values[j][0] >= mu[i]) {
          pick_agent = i;
          pick_type = j;
        }
      if (pick_agent >= 0) break;
    }
    if (pick_agent < 0) break;
    result.allocation.bundles[pick_agent][pick_type] += 1;
    trace.retirements.push_back(
        {pick_agent, pick_type, inst.splc(pick_agent).values[pick_type][0], mu[pick_agent]});
    trace.guarantee[pick_agent] = mu[pick_agent];
    active.erase(std::find(active.begin(), active.end(), pick_agent));
    copies[pick_type] -= 1;
  }

  trace.residual_agents = active;
  trace.residual_copies = copies;
  if (!active.empty()) {
    recompute_mu();
    for (int i : active) {
      trace.guarantee[i] = mu[i];
      trace.residual_mu.push_back(mu[i]);
    }
    pipeline_detail::run_lp_phase(inst, active, copies, mu, result.allocation, trace, true);
  }

  check_allocation(inst, result.allocation);
  trace.value_final.resize(n);
  for (int i = 0; i < n; ++i) {
    trace.value_final[i] = inst.splc(i).value_of_counts(result.allocation.bundles[i]);
    if (2 * trace.value_final[i] < trace.guarantee[i])
      throw InternalError("an agent ended below half her target");
  }
  return result;
}

// Same pipeline with caller-supplied targets, held fixed throughout (no
// recomputation). Infeasible targets are reported as a status, not an error.
inline PipelineResult solve_half_mms_given_targets(const Instance& inst,
                                                   const std::vector<Rational>& targets) {
  inst.check_valid();
  if (!inst.all_splc()) throw ValidationError("the SPLC pipeline needs SPLC valuations");
  if (!inst.symmetric()) throw ValidationError("the SPLC pipeline needs symmetric entitlements");
  if (static_cast<int>(targets.size()) != inst.agent_count())
    throw ValidationError("target vector length does not match agent count");
  for (const auto& t : targets)
    if (t < 0) throw ValidationError("targets must be nonnegative");

  const auto& v0 = inst.splc(0);
  const int n = inst.agent_count();
  PipelineResult result;
  result.allocation.bundles.assign(n, std::vector<int>(v0.types, 0));
  PipelineTrace& trace = result.trace;
  trace.mu_initial = targets;
  trace.guarantee = targets;

  std::vector<int> active(n);
  for (int i = 0; i < n; ++i) active[i] = i;
  std::vector<int> copies = v0.copies;
  std::vector<Rational> mu = targets;

  for (;;) {
    int pick_agent = -1, pick_type = -1;
    for (int i : active) {
      if (mu[i] == 0) continue;  // zero targets stay for the welfare LP
      for (int j = 0; j < v0.types && pick_agent < 0; ++j)
        if (copies[j] >= 1 && 2 * inst.splc(i).values[j][0] >= mu[i]) {
          pick_agent = i;
          pick_type = j;
        }
      if (pick_agent >= 0) break;
    }
    if (pick_agent < 0) break;
    result.allocation.bundles[pick_agent][pick_type] += 1;
    trace.retirements.push_back(
        {pick_agent, pick_type, inst.splc(pick_agent).values[pick_type][0], mu[pick_agent]});
    active.erase(std::find(active.begin(), active.end(), pick_agent));
    copies[pick_type] -= 1;
  }

  trace.residual_agents = active;
  trace.residual_copies = copies;
  if (!active.empty()) {
    for (int i : active) trace.residual_mu.push_back(mu[i]);
    pipeline_detail::run_lp_phase(inst, active, copies, mu, result.allocation, trace, false);
    if (!trace.lp3_feasible) {
      result.status = PipelineStatus::InfeasibleTargets;
      return result;
    }
  }

  check_allocation(inst, result.allocation);
  trace.value_final.resize(n);
  for (int i = 0; i < n; ++i)
    trace.value_final[i] = inst.splc(i).value_of_counts(result.allocation.bundles[i]);
  return result;
}

}  // namespace fairdiv::splc
