#pragma once

#include <chrono>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairdiv/errors.hpp"
#include "fairdiv/generator.hpp"
#include "fairdiv/instance.hpp"
#include "fairdiv/shares.hpp"
#include "fairdiv/splc_mms.hpp"
#include "fairdiv/sub_aps.hpp"

namespace fairdiv::bench {

struct BenchRunSpec {
  gen::GenOptions gen;
  int count = 1;
  std::uint64_t seed = 0;
  std::string algo = "splc-mms";  // splc-mms | sub-aps
  Rational epsilon = rat(1, 20);
};

struct BenchConfig {
  std::vector<BenchRunSpec> runs;
  OracleLimits limits;
};

struct BenchRecord {
  std::string id;
  std::uint64_t seed = 0;
  std::string family;
  int agents = 0;
  int size = 0;  // total copies for splc, m otherwise
  std::string algo;
  std::optional<Rational> worst_ratio;  // absent: flagged over-limit or all-zero targets
  bool over_limit = false;
  long long runtime_ms = 0;
};

inline BenchConfig parse_bench_config(const nlohmann::json& doc) {
  BenchConfig cfg;
  auto rational_field = [](const nlohmann::json& node, const char* key, const Rational& dflt) {
    if (!node.contains(key)) return dflt;
    auto r = try_parse_rational(node[key].get<std::string>());
    if (!r) throw ParseError(key, "not a valid rational");
    return *r;
  };
  if (doc.contains("limits")) {
    const auto& lim = doc["limits"];
    cfg.limits.mms_max_agents = lim.value("mms_max_agents", cfg.limits.mms_max_agents);
    cfg.limits.mms_max_goods = lim.value("mms_max_goods", cfg.limits.mms_max_goods);
    cfg.limits.aps_max_goods = lim.value("aps_max_goods", cfg.limits.aps_max_goods);
  }
  if (!doc.contains("runs")) return cfg;
  for (const auto& node : doc["runs"]) {
    BenchRunSpec spec;
    spec.gen.family = node.value("family", spec.gen.family);
    spec.gen.agents = node.value("agents", spec.gen.agents);
    spec.gen.min_types = node.value("min_types", spec.gen.min_types);
    spec.gen.max_types = node.value("max_types", spec.gen.max_types);
    spec.gen.min_copies = node.value("min_copies", spec.gen.min_copies);
    spec.gen.max_copies = node.value("max_copies", spec.gen.max_copies);
    spec.gen.max_total_copies = node.value("max_total_copies", spec.gen.max_total_copies);
    spec.gen.goods = node.value("goods", spec.gen.goods);
    spec.gen.universe = node.value("universe", spec.gen.universe);
    spec.gen.max_value = node.value("max_value", spec.gen.max_value);
    if (node.contains("entitlements"))
      for (const auto& e : node["entitlements"]) {
        auto r = try_parse_rational(e.get<std::string>());
        if (!r) throw ParseError("entitlements", "not a valid rational");
        spec.gen.entitlements.push_back(*r);
      }
    spec.count = node.value("count", spec.count);
    spec.seed = node.value("seed", spec.seed);
    spec.algo = node.value("algo", spec.algo);
    spec.epsilon = rational_field(node, "epsilon", spec.epsilon);
    cfg.runs.push_back(std::move(spec));
  }
  return cfg;
}

inline std::vector<BenchRecord> run_bench(const BenchConfig& cfg) {
  std::vector<BenchRecord> records;
  for (const auto& run : cfg.runs) {
    for (int idx = 0; idx < run.count; ++idx) {
      const std::uint64_t seed = run.seed + static_cast<std::uint64_t>(idx);
      const Instance inst = gen::generate_instance(run.gen, seed);
      BenchRecord rec;
      {
        std::ostringstream id;
        id << run.gen.family << "-" << run.algo << "-" << seed;
        rec.id = id.str();
      }
      rec.seed = seed;
      rec.family = run.gen.family;
      rec.agents = inst.agent_count();
      rec.size = inst.universe_size();
      rec.algo = run.algo;

      const auto start = std::chrono::steady_clock::now();
      Allocation alloc;
      if (run.algo == "splc-mms") {
        alloc = splc::solve_half_mms(inst).allocation;
      } else if (run.algo == "sub-aps") {
        alloc = subaps::solve_third_aps(inst, run.epsilon).allocation;
      } else {
        throw ValidationError("unknown algorithm: " + run.algo);
      }
      rec.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();

      try {
        std::optional<Rational> worst;
        for (int i = 0; i < inst.agent_count(); ++i) {
          const Rational target = run.algo == "splc-mms" ? exact_mms(inst, i, cfg.limits)
                                                         : exact_aps(inst, i, cfg.limits);
          if (target == 0) continue;  // 0/0 counts as a pass
          const Rational ratio = allocation_value(inst, alloc, i) / target;
          if (!worst || ratio < *worst) worst = ratio;
        }
        rec.worst_ratio = worst;
      } catch (const CapabilityError&) {
        rec.over_limit = true;
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

inline std::string write_csv(const std::vector<BenchRecord>& records) {
  std::ostringstream out;
  out << "id,seed,family,n,size,algo,worst_ratio,runtime_ms\n";
  for (const auto& r : records) {
    out << r.id << "," << r.seed << "," << r.family << "," << r.agents << "," << r.size << ","
        << r.algo << ",";
    if (r.over_limit)
      out << "over_limit";
    else if (!r.worst_ratio)
      out << "inf";
    else
      out << to_string(*r.worst_ratio);
    out << "," << r.runtime_ms << "\n";
  }
  return out.str();
}

}  // namespace fairdiv::bench
