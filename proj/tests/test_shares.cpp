#include <catch2/catch_amalgamated.hpp>

#include "fairdiv/generator.hpp"
#include "fairdiv/shares.hpp"
#include "helpers.hpp"

using namespace fairdiv;
using testutil::rat;

TEST_CASE("exact mms examples") {
  SECTION("n unit copies of one good: every bundle of the best partition is a copy") {
    for (int n = 2; n <= 4; ++n) {
      auto inst = gen::fixture_splc_mms_high(n);
      CHECK(exact_mms(inst, 0) == 1);
      CHECK(inst.splc(0).full_value() == 1);
    }
  }
  SECTION("single agent takes everything") {
    auto inst = testutil::uniform_instance(1, testutil::additive({3, 2, 2}));
    CHECK(exact_mms(inst, 0) == 7);
  }
  SECTION("additive 3,2,2,1 for two agents") {
    auto inst = testutil::uniform_instance(2, testutil::additive({3, 2, 2, 1}));
    CHECK(exact_mms(inst, 0) == 4);
  }
  SECTION("count-based search agrees with set-partition enumeration") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto inst = testutil::random_small_instance(seed, 2 + seed % 2, 6, "splc");
      const ValueTable table = ValueTable::build(inst.valuations[0]);
      const Rational via_sets =
          fairdiv::share_detail::generic_mms_brute(table, inst.agent_count());
      CHECK(exact_mms(inst, 0) == via_sets);
    }
  }
  SECTION("limits are enforced") {
    auto inst = testutil::uniform_instance(2, testutil::additive({1, 1, 1}));
    OracleLimits tight;
    tight.mms_max_goods = 2;
    CHECK_THROWS_AS(exact_mms(inst, 0, tight), CapabilityError);
    auto asym = testutil::instance_of({rat(1, 4), rat(3, 4)},
                                      {testutil::additive({1}), testutil::additive({1})});
    CHECK_THROWS_AS(exact_mms(asym, 0), ValidationError);
  }
}

TEST_CASE("exact aps examples") {
  SECTION("full entitlement takes everything") {
    auto inst = testutil::uniform_instance(1, testutil::additive({3, 4}));
    CHECK(exact_aps(inst, 0) == 7);
  }
  SECTION("three unit goods at budget one half") {
    CHECK(exact_aps(ValuationSpec(testutil::additive({1, 1, 1})), rat(1, 2)) == 1);
  }
  SECTION("unit copies fixture") {
    for (int n = 2; n <= 4; ++n) {
      auto inst = gen::fixture_splc_mms_high(n);
      CHECK(exact_aps(inst, 0) == 1);
    }
  }
}

TEST_CASE("aps via the truncated concave extension agrees with the set program") {
  CHECK(aps_via_truncated_extension(ValuationSpec(testutil::additive({1, 1, 1})), rat(1, 2)) == 1);
  CHECK(aps_via_truncated_extension(ValuationSpec(testutil::additive({0, 0})), rat(1, 2)) == 0);
  TruncatedAdditiveValuation trunc;
  trunc.weights = {Rational(5), Rational(5)};
  trunc.cap = 7;
  CHECK(exact_aps(ValuationSpec(trunc), rat(1, 2)) == 5);
  CHECK(aps_via_truncated_extension(ValuationSpec(trunc), rat(1, 2)) == 5);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto inst = testutil::random_small_instance(seed, 2, 5);
    const Rational b = seed % 2 ? rat(1, 2) : rat(1, 3);
    CHECK(aps_via_truncated_extension(inst.valuations[0], b) ==
          exact_aps(inst.valuations[0], b));
  }
}

TEST_CASE("aps support sets satisfy the characterization") {
  auto check_support = [](const ValuationSpec& spec, const Rational& b) {
    const Rational z = exact_aps(spec, b);
    const auto support = support_sets_at_aps(spec, b);
    Rational total = 0;
    const int m = universe_size(spec);
    std::vector<Rational> load(m, Rational(0));
    for (const auto& [mask, alpha] : support) {
      CHECK(alpha > 0);
      total += alpha;
      CHECK(std::min(value_of_mask(spec, mask), z) == z);
      for (int i = 0; i < m; ++i)
        if (mask >> i & 1) load[i] += alpha;
    }
    CHECK(total == 1);
    for (int i = 0; i < m; ++i) CHECK(load[i] <= b);
  };
  check_support(ValuationSpec(testutil::additive({1, 1, 1})), rat(1, 2));
  check_support(ValuationSpec(testutil::additive({3, 2, 2, 1})), rat(1, 2));
  check_support(ValuationSpec(testutil::additive({5, 4})), Rational(1));
  SECTION("zero valuation: the empty set carries the weight") {
    const auto support = support_sets_at_aps(ValuationSpec(testutil::additive({0, 0})), rat(1, 2));
    Rational total = 0;
    for (const auto& [mask, alpha] : support) total += alpha;
    CHECK(total == 1);
  }
}

TEST_CASE("aps scale-freeness and cap retention on random instances") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto inst = testutil::random_small_instance(seed, 2, 5);
    const auto& spec = inst.valuations[0];
    const Rational b = seed % 2 ? rat(1, 2) : rat(2, 5);
    const Rational aps = exact_aps(spec, b);
    for (const Rational alpha : {rat(0, 1), rat(1, 2), rat(2, 1), rat(3, 7)})
      CHECK(exact_aps(scale(spec, alpha), b) == alpha * aps);
    const ValueTable capped = ValueTable::build(spec).truncated(aps);
    CHECK(exact_aps_from_table(capped, b) == aps);
  }
}

TEST_CASE("share ordering and single-good reductions on symmetric instances") {
  int tested = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 2 + static_cast<int>(seed % 2);
    auto inst = testutil::random_small_instance(seed, n, 6);
    const int m = inst.universe_size();
    for (int agent = 0; agent < 1; ++agent) {
      const Rational mms = exact_mms(inst, agent);
      const Rational aps = exact_aps(inst, agent);
      CHECK(aps >= mms);
      if (inst.all_splc()) CHECK(mu_uniform(inst.splc(agent), n) >= aps);
      for (int g = 0; g < m; ++g) {
        const Instance reduced = remove_agent_and_good(inst, n - 1, g);
        CHECK(exact_mms(reduced, agent) >= mms);
        CHECK(exact_aps(reduced, agent) >= aps);
        ++tested;
      }
    }
  }
  CHECK(tested > 50);
}

TEST_CASE("verifier") {
  auto inst = gen::fixture_splc_mms_high(3);
  const std::vector<Rational> targets(3, Rational(1));
  SECTION("one copy each passes at factor one") {
    const Allocation perfect{{{1}, {1}, {1}}};
    const ShareReport report = verify(inst, perfect, targets, Rational(1));
    CHECK(report.all_pass);
    for (const auto& a : report.agents) {
      CHECK(a.pass);
      CHECK(*a.ratio == 1);
    }
  }
  SECTION("empty allocation fails positive targets") {
    const Allocation empty{{{0}, {0}, {0}}};
    const ShareReport report = verify(inst, empty, targets, rat(1, 2));
    CHECK_FALSE(report.all_pass);
    for (const auto& a : report.agents) CHECK_FALSE(a.pass);
  }
  SECTION("invalid allocations are rejected with a description") {
    const Allocation overfull{{{2}, {1}, {1}}};
    CHECK_THROWS_AS(verify(inst, overfull, targets, Rational(1)), ValidationError);
  }
  SECTION("zero target counts as a pass") {
    auto zero = testutil::uniform_instance(2, testutil::additive({0, 0}));
    const ShareReport report =
        verify(zero, Allocation{{{}, {}}}, {Rational(0), Rational(0)}, Rational(1));
    CHECK(report.all_pass);
    CHECK_FALSE(report.agents[0].ratio.has_value());
  }
}
