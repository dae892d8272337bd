#pragma once

#include <vector>

#include "fairdiv/generator.hpp"
#include "fairdiv/instance.hpp"

namespace testutil {

using fairdiv::Instance;
using fairdiv::Rational;
using fairdiv::rat;

inline fairdiv::AdditiveValuation additive(std::vector<long> weights) {
  fairdiv::AdditiveValuation v;
  for (long w : weights) v.weights.push_back(Rational(w));
  return v;
}

inline fairdiv::SplcValuation splc_single_type(std::vector<long> marginals) {
  fairdiv::SplcValuation v;
  v.types = 1;
  v.copies = {static_cast<int>(marginals.size())};
  v.values.resize(1);
  for (long m : marginals) v.values[0].push_back(Rational(m));
  return v;
}

// Symmetric instance where every agent has the same valuation.
inline Instance uniform_instance(int n, fairdiv::ValuationSpec spec) {
  Instance inst;
  inst.entitlements.assign(n, rat(1, n));
  for (int i = 0; i < n; ++i) inst.valuations.push_back(spec);
  inst.check_valid();
  return inst;
}

inline Instance instance_of(std::vector<Rational> entitlements,
                            std::vector<fairdiv::ValuationSpec> specs) {
  Instance inst;
  inst.entitlements = std::move(entitlements);
  inst.valuations = std::move(specs);
  inst.check_valid();
  return inst;
}

// Deterministic mixed-family small instances for property suites.
inline Instance random_small_instance(std::uint64_t seed, int n, int goods,
                                      const char* family = nullptr) {
  fairdiv::gen::GenOptions opt;
  const char* families[] = {"additive", "splc", "truncated_additive", "coverage"};
  opt.family = family ? family : families[seed % 4];
  opt.agents = n;
  opt.goods = goods;
  opt.universe = 3 + static_cast<int>(seed % 3);
  opt.min_types = 1;
  opt.max_types = 3;
  opt.min_copies = 1;
  opt.max_copies = 3;
  opt.max_total_copies = goods;
  opt.max_value = 8;
  return fairdiv::gen::generate_instance(opt, seed);
}

}  // namespace testutil
