#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fairdiv/generator.hpp"
#include "fairdiv/shares.hpp"
#include "fairdiv/splc_mms.hpp"
#include "helpers.hpp"

using namespace fairdiv;
using testutil::rat;

namespace {

Instance two_agent_tie_instance() {
  // Both agents value both types; the welfare optimum shares copies
  // fractionally, exercising the dual checks.
  SplcValuation v;
  v.types = 2;
  v.copies = {2, 2};
  v.values = {{Rational(4), Rational(3)}, {Rational(4), Rational(3)}};
  return testutil::uniform_instance(2, ValuationSpec(v));
}

}  // namespace

TEST_CASE("share feasibility program") {
  SECTION("zero targets are always feasible") {
    auto inst = two_agent_tie_instance();
    CHECK(lp::check_feasibility(splc::build_feasibility_lp(inst, {Rational(0), Rational(0)})));
  }
  SECTION("two agents cannot both get the whole single copy") {
    auto inst = testutil::uniform_instance(2, testutil::splc_single_type({5}));
    CHECK_FALSE(lp::check_feasibility(splc::build_feasibility_lp(inst, {Rational(5), Rational(5)})));
  }
  SECTION("uniform-extension targets are feasible, with the explicit certificate") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const int n = 2 + static_cast<int>(seed % 2);
      auto inst = testutil::random_small_instance(seed, n, 8, "splc");
      std::vector<Rational> mu;
      for (int i = 0; i < n; ++i) mu.push_back(mu_uniform(inst.splc(i), n));
      CHECK(lp::check_feasibility(splc::build_feasibility_lp(inst, mu)));
      // The certificate: hand every agent k_j/n of each type, consolidated.
      const auto& v0 = inst.splc(0);
      FractionalAllocation x = FractionalAllocation::zeros(inst);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < v0.types; ++j) {
          Rational mass = rat(v0.copies[j], n);
          for (int k = 0; k < v0.copies[j] && mass > 0; ++k) {
            x.x[i][j][k] = std::min(mass, Rational(1));
            mass -= x.x[i][j][k];
          }
        }
      x.check_valid(inst);
      for (int i = 0; i < n; ++i) CHECK(linear_extension_value(inst, x, i) == mu[i]);
    }
  }
  SECTION("exact maximin targets are feasible") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const int n = 2;
      auto inst = testutil::random_small_instance(seed, n, 6, "splc");
      std::vector<Rational> targets;
      for (int i = 0; i < n; ++i) targets.push_back(exact_mms(inst, i));
      CHECK(lp::check_feasibility(splc::build_feasibility_lp(inst, targets)));
    }
  }
}

TEST_CASE("welfare program") {
  SECTION("single agent gets the full value") {
    auto inst = testutil::uniform_instance(1, testutil::splc_single_type({3, 2, 1}));
    const auto sol = lp::solve(splc::build_welfare_lp(inst, {Rational(0)}));
    REQUIRE(sol.status == lp::LpStatus::Optimal);
    CHECK(sol.objective == 6);
  }
  SECTION("infeasible targets surface as a status") {
    auto inst = testutil::uniform_instance(2, testutil::splc_single_type({5}));
    const auto sol = lp::solve(splc::build_welfare_lp(inst, {Rational(5), Rational(5)}));
    CHECK(sol.status == lp::LpStatus::Infeasible);
  }
  SECTION("share rows hold at the optimum") {
    auto inst = two_agent_tie_instance();
    std::vector<Rational> mu;
    for (int i = 0; i < 2; ++i) mu.push_back(mu_uniform(inst.splc(i), 2));
    const auto sol = lp::solve(splc::build_welfare_lp(inst, mu));
    REQUIRE(sol.status == lp::LpStatus::Optimal);
    const auto& v = inst.splc(0);
    for (int i = 0; i < 2; ++i) {
      Rational value = 0;
      int idx = i * 4;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) value += v.values[j][k] * sol.primal[idx++];
      CHECK(value >= mu[i]);
    }
  }
}

TEST_CASE("consolidation pushes mass to the earliest copies") {
  auto inst = testutil::uniform_instance(1, testutil::splc_single_type({3, 2}));
  SECTION("split halves merge into the first copy") {
    FractionalAllocation x = FractionalAllocation::zeros(inst);
    x.x[0][0] = {rat(1, 2), rat(1, 2)};
    const auto out = splc::consolidate_fractions(inst, x);
    CHECK(out.x[0][0] == std::vector<Rational>{Rational(1), Rational(0)});
    CHECK(linear_extension_value(inst, out, 0) == 3);
    CHECK(linear_extension_value(inst, x, 0) == rat(5, 2));  // weakly increased
  }
  SECTION("prefix rows and integral rows are unchanged") {
    FractionalAllocation x = FractionalAllocation::zeros(inst);
    x.x[0][0] = {Rational(1), rat(1, 3)};
    CHECK(splc::consolidate_fractions(inst, x).x == x.x);
    x.x[0][0] = {Rational(1), Rational(1)};
    CHECK(splc::consolidate_fractions(inst, x).x == x.x);
  }
  SECTION("mass per type is preserved") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto rnd = testutil::random_small_instance(seed, 2, 6, "splc");
      const auto& v0 = rnd.splc(0);
      FractionalAllocation x = FractionalAllocation::zeros(rnd);
      std::mt19937_64 eng(seed);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < v0.types; ++j)
          for (int k = 0; k < v0.copies[j]; ++k)
            x.x[i][j][k] = rat(static_cast<long>(eng() % 3), 4);
      const auto out = splc::consolidate_fractions(rnd, x);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < v0.types; ++j)
          CHECK(out.agent_mass(i, j) == x.agent_mass(i, j));
    }
  }
}

TEST_CASE("dual extraction asserts the bang-per-buck identity") {
  auto inst = two_agent_tie_instance();
  std::vector<Rational> mu;
  for (int i = 0; i < 2; ++i) mu.push_back(mu_uniform(inst.splc(i), 2));
  const auto& v0 = inst.splc(0);
  std::vector<int> agents{0, 1}, types{0, 1};
  const auto map = splc::VarMap::build(inst, agents, types, v0.copies);
  const auto sol = lp::solve(splc::pipeline_detail::build_lp(inst, map, mu, true));
  REQUIRE(sol.status == lp::LpStatus::Optimal);
  FractionalAllocation x = FractionalAllocation::zeros(inst);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) x.x[i][j][k] = sol.primal[map.index(i, j, k)];
  const auto consolidated = splc::consolidate_fractions(inst, x);
  const auto info = splc::extract_duals_and_check_mbb(sol, map, inst, consolidated);
  for (const auto& p : info.price) CHECK(p >= 0);
  for (const auto& b : info.beta) CHECK(b >= 0);
}

TEST_CASE("cycle cancellation") {
  SECTION("a forest passes through untouched") {
    splc::PriceGraph g;
    g.price = {Rational(5), Rational(5)};
    g.edges.push_back({0, 0, Rational(2), false});
    g.edges.push_back({1, 0, Rational(1), false});
    g.edges.push_back({1, 1, Rational(3), false});
    const auto out = splc::cancel_cycles(g);
    CHECK(out.edges.size() == 3);
  }
  SECTION("four-cycle with weights 1,2,3,2") {
    splc::PriceGraph g;
    g.price = {Rational(5), Rational(5)};
    g.edges.push_back({0, 0, Rational(1), false});  // a0 - t0 (minimum)
    g.edges.push_back({1, 0, Rational(2), false});  // t0 - a1
    g.edges.push_back({1, 1, Rational(3), false});  // a1 - t1
    g.edges.push_back({0, 1, Rational(2), false});  // t1 - a0
    const auto out = splc::cancel_cycles(g);
    CHECK(out.edges.size() < g.edges.size());
    // Node sums preserved.
    auto sum_agent = [&](const splc::PriceGraph& gr, int a) {
      Rational s = 0;
      for (const auto& e : gr.edges)
        if (e.agent == a) s += e.weight;
      return s;
    };
    auto sum_type = [&](const splc::PriceGraph& gr, int t) {
      Rational s = 0;
      for (const auto& e : gr.edges)
        if (e.type == t) s += e.weight;
      return s;
    };
    for (int a = 0; a < 2; ++a) CHECK(sum_agent(out, a) == sum_agent(g, a));
    for (int t = 0; t < 2; ++t) CHECK(sum_type(out, t) == sum_type(g, t));
  }
  SECTION("two disjoint cycles are both cancelled") {
    splc::PriceGraph g;
    g.price = {Rational(9), Rational(9), Rational(9), Rational(9)};
    for (int block = 0; block < 2; ++block) {
      const int a = 2 * block, t = 2 * block;
      g.edges.push_back({a, t, Rational(1 + block), false});
      g.edges.push_back({a + 1, t, Rational(2), false});
      g.edges.push_back({a + 1, t + 1, Rational(3), false});
      g.edges.push_back({a, t + 1, Rational(2), false});
    }
    const auto out = splc::cancel_cycles(g);
    // Acyclic among non-saturated edges: count <= nodes - components bound.
    std::vector<int> fractional;
    for (std::size_t i = 0; i < out.edges.size(); ++i)
      if (!out.edges[i].saturated) fractional.push_back(static_cast<int>(i));
    CHECK(splc::pipeline_detail::find_cycle(out, fractional).empty());
  }
  SECTION("saturation caps a gaining edge at one whole copy") {
    splc::PriceGraph g;
    g.price = {Rational(2), Rational(2)};
    for (auto [a, t, w] : {std::tuple{0, 0, 1L}, {1, 0, 1L}, {1, 1, 1L}, {0, 1, 1L}})
      g.edges.push_back({a, t, Rational(w), false});
    const auto out = splc::cancel_cycles(g);
    bool any_saturated = false;
    for (const auto& e : out.edges) any_saturated |= e.saturated;
    CHECK(any_saturated);
  }
}

TEST_CASE("repricing preserves every agent's linear value") {
  // Symmetric square: both agents hold half of each single-copy type.
  SplcValuation v;
  v.types = 2;
  v.copies = {1, 1};
  v.values = {{Rational(1)}, {Rational(1)}};
  auto inst = testutil::uniform_instance(2, ValuationSpec(v));
  FractionalAllocation consolidated = FractionalAllocation::zeros(inst);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) consolidated.x[i][j][0] = rat(1, 2);
  splc::PriceGraph g;
  g.price = {Rational(1), Rational(1)};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g.edges.push_back({i, j, rat(1, 2), false});
  const auto cancelled = splc::cancel_cycles(g);
  const auto repriced = splc::reprice_to_allocation(inst, cancelled, consolidated);
  for (int i = 0; i < 2; ++i) CHECK(linear_extension_value(inst, repriced, i) == 1);
  SECTION("identity when nothing was cancelled") {
    splc::PriceGraph forest;
    forest.price = {Rational(1), Rational(1)};
    forest.edges.push_back({0, 0, rat(1, 2), false});
    FractionalAllocation base = FractionalAllocation::zeros(inst);
    base.x[0][0][0] = rat(1, 2);
    const auto out = splc::reprice_to_allocation(inst, forest, base);
    CHECK(out.x == base.x);
  }
}

TEST_CASE("forest rounding") {
  SECTION("integral input is unchanged") {
    auto inst = testutil::uniform_instance(2, testutil::splc_single_type({3, 2}));
    FractionalAllocation x = FractionalAllocation::zeros(inst);
    x.x[0][0] = {Rational(1), Rational(0)};
    x.x[1][0] = {Rational(1), Rational(0)};
    const auto alloc = splc::round_forest(inst, x);
    CHECK(alloc.bundles[0][0] == 1);
    CHECK(alloc.bundles[1][0] == 1);
  }
  SECTION("a lone fractional copy becomes whole for its agent") {
    auto inst = testutil::uniform_instance(1, testutil::splc_single_type({3}));
    FractionalAllocation x = FractionalAllocation::zeros(inst);
    x.x[0][0][0] = rat(2, 3);
    const auto alloc = splc::round_forest(inst, x);
    CHECK(alloc.bundles[0][0] == 1);
  }
  SECTION("on a path, the child agent loses at most its parent fraction") {
    SplcValuation v;
    v.types = 1;
    v.copies = {1};
    v.values = {{Rational(6)}};
    auto inst = testutil::uniform_instance(2, ValuationSpec(v));
    FractionalAllocation x = FractionalAllocation::zeros(inst);
    x.x[0][0][0] = rat(1, 2);
    x.x[1][0][0] = rat(1, 2);
    const auto alloc = splc::round_forest(inst, x);
    // Root is agent 0; the type hangs off it, so agent 0 takes the copy.
    CHECK(alloc.bundles[0][0] == 1);
    CHECK(alloc.bundles[1][0] == 0);
    const Rational lost =
        linear_extension_value(inst, x, 1) - inst.splc(1).value_of_counts(alloc.bundles[1]);
    CHECK(lost <= 6);  // at most one good's value
  }
  SECTION("cyclic input is rejected") {
    SplcValuation v;
    v.types = 2;
    v.copies = {1, 1};
    v.values = {{Rational(1)}, {Rational(1)}};
    auto inst = testutil::uniform_instance(2, ValuationSpec(v));
    FractionalAllocation x = FractionalAllocation::zeros(inst);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) x.x[i][j][0] = rat(1, 2);
    CHECK_THROWS_AS(splc::round_forest(inst, x), ValidationError);
  }
}

TEST_CASE("half-mms pipeline end to end") {
  SECTION("unit-copies fixture: everyone gets one copy") {
    for (int n = 2; n <= 4; ++n) {
      auto inst = gen::fixture_splc_mms_high(n);
      const auto result = splc::solve_half_mms(inst);
      for (int i = 0; i < n; ++i) {
        CHECK(result.allocation.bundles[i][0] == 1);
        CHECK(result.trace.value_final[i] == 1);
      }
    }
  }
  SECTION("greedy counterexample fixture clears one half for everyone") {
    auto inst = gen::fixture_greedy_counter(rat(1, 32));
    const auto result = splc::solve_half_mms(inst);
    for (int i = 0; i < 4; ++i) CHECK(2 * result.trace.value_final[i] >= 1);
  }
  SECTION("random instances beat half the exact maximin share") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const int n = 2 + static_cast<int>(seed % 2);
      auto inst = testutil::random_small_instance(seed, n, 8, "splc");
      const auto result = splc::solve_half_mms(inst);
      CHECK((result.trace.residual_agents.empty() || result.trace.lp3_feasible));
      for (int i = 0; i < n; ++i) {
        const Rational mms = exact_mms(inst, i);
        CHECK(2 * result.trace.value_final[i] >= mms);
      }
    }
  }
  SECTION("rejects non-splc and asymmetric input") {
    CHECK_THROWS_AS(
        splc::solve_half_mms(testutil::uniform_instance(2, testutil::additive({1, 2}))),
        ValidationError);
    auto asym = testutil::instance_of(
        {rat(1, 4), rat(3, 4)},
        {ValuationSpec(testutil::splc_single_type({1})), ValuationSpec(testutil::splc_single_type({1}))});
    CHECK_THROWS_AS(splc::solve_half_mms(asym), ValidationError);
  }
}

TEST_CASE("pipeline with caller-supplied targets") {
  SECTION("exact maximin targets give a half-mms allocation") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      auto inst = testutil::random_small_instance(seed, 2, 6, "splc");
      std::vector<Rational> targets;
      for (int i = 0; i < 2; ++i) targets.push_back(exact_mms(inst, i));
      const auto result = splc::solve_half_mms_given_targets(inst, targets);
      REQUIRE(result.status == splc::PipelineStatus::Solved);
      for (int i = 0; i < 2; ++i) CHECK(2 * result.trace.value_final[i] >= targets[i]);
    }
  }
  SECTION("zero targets run the welfare rounding") {
    auto inst = two_agent_tie_instance();
    const auto result = splc::solve_half_mms_given_targets(inst, {Rational(0), Rational(0)});
    REQUIRE(result.status == splc::PipelineStatus::Solved);
    CHECK(result.trace.retirements.empty());
    CHECK(result.trace.ran_lp);
  }
  SECTION("oversized targets report infeasibility") {
    auto inst = testutil::uniform_instance(2, testutil::splc_single_type({5}));
    const auto result = splc::solve_half_mms_given_targets(inst, {Rational(5), Rational(5)});
    CHECK(result.status == splc::PipelineStatus::InfeasibleTargets);
  }
  SECTION("uniform-extension targets match the full pipeline when no reduction fires") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      auto inst = testutil::random_small_instance(seed, 2, 8, "splc");
      std::vector<Rational> mu;
      for (int i = 0; i < 2; ++i) mu.push_back(mu_uniform(inst.splc(i), 2));
      const auto full = splc::solve_half_mms(inst);
      if (!full.trace.retirements.empty()) continue;
      const auto given = splc::solve_half_mms_given_targets(inst, mu);
      REQUIRE(given.status == splc::PipelineStatus::Solved);
      CHECK(given.allocation.bundles == full.allocation.bundles);
    }
  }
}

TEST_CASE("trace invariants are recorded") {
  auto inst = two_agent_tie_instance();
  const auto result = splc::solve_half_mms(inst);
  const auto& t = result.trace;
  CHECK(t.lp3_feasible);
  if (t.ran_lp) {
    CHECK(t.mbb_ok);
    CHECK(t.node_sums_ok);
    CHECK(t.reprice_value_ok);
    CHECK(t.rounding_loss_ok);
  }
  const auto doc = t.to_json();
  CHECK(doc.contains("invariants"));
}
