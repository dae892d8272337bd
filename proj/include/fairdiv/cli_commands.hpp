#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairdiv/bench.hpp"
#include "fairdiv/errors.hpp"
#include "fairdiv/generator.hpp"
#include "fairdiv/json_io.hpp"
#include "fairdiv/shares.hpp"
#include "fairdiv/splc_mms.hpp"
#include "fairdiv/sub_aps.hpp"

namespace fairdiv::cli {

// Exit codes: 0 success/pass, 1 guarantee failure, 2 validation error,
// 3 capability limit.
inline constexpr int kOk = 0;
inline constexpr int kGuaranteeFail = 1;
inline constexpr int kValidationError = 2;
inline constexpr int kCapabilityLimit = 3;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  if (auto dir = std::filesystem::path(path).parent_path(); !dir.empty())
    std::filesystem::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << content;
}

inline nlohmann::json share_report_to_json(const ShareReport& report) {
  nlohmann::json doc;
  auto opt = [](const std::optional<Rational>& r) {
    return r ? nlohmann::json(to_string(*r)) : nlohmann::json(nullptr);
  };
  doc["ordering"] = ShareReport::kTestedOrdering;
  if (report.factor) doc["factor"] = to_string(*report.factor);
  doc["all_pass"] = report.all_pass;
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : report.agents) {
    nlohmann::json row;
    row["mms"] = opt(a.mms);
    row["aps"] = opt(a.aps);
    row["mu"] = opt(a.mu);
    if (a.achieved) {
      row["achieved"] = opt(a.achieved);
      row["target"] = opt(a.target);
      row["ratio"] = opt(a.ratio);
      row["pass"] = a.pass;
    }
    agents.push_back(std::move(row));
  }
  doc["agents"] = std::move(agents);
  return doc;
}

struct GenArgs {
  gen::GenOptions options;
  std::uint64_t seed = 0;
  int count = 1;
  std::string out_dir = ".";
  std::string fixture;  // empty | splc-mms-high | greedy-counter
  int fixture_agents = 3;
  Rational delta = rat(1, 32);
};

inline int run_gen(const GenArgs& args, std::ostream& out = std::cout) {
  namespace fs = std::filesystem;
  fs::create_directories(args.out_dir);
  if (!args.fixture.empty()) {
    Instance inst;
    std::string name;
    if (args.fixture == "splc-mms-high") {
      inst = gen::fixture_splc_mms_high(args.fixture_agents);
      name = "splc-mms-high.json";
    } else if (args.fixture == "greedy-counter") {
      inst = gen::fixture_greedy_counter(args.delta);
      name = "greedy-half-splc-counter.json";
    } else {
      throw ValidationError("unknown fixture: " + args.fixture);
    }
    const std::string path = (fs::path(args.out_dir) / name).string();
    write_file(path, write_instance(inst));
    out << path << "\n";
    return kOk;
  }
  for (int idx = 0; idx < args.count; ++idx) {
    const std::uint64_t seed = args.seed + static_cast<std::uint64_t>(idx);
    const Instance inst = gen::generate_instance(args.options, seed);
    std::ostringstream name;
    name << args.options.family << "_s" << seed << ".json";
    const std::string path = (fs::path(args.out_dir) / name.str()).string();
    write_file(path, write_instance(inst));
    out << path << "\n";
  }
  const fs::path fixdir = fs::path(args.out_dir) / "fixtures";
  write_file((fixdir / "splc-mms-high.json").string(),
             write_instance(gen::fixture_splc_mms_high(3)));
  write_file((fixdir / "greedy-half-splc-counter.json").string(),
             write_instance(gen::fixture_greedy_counter(rat(1, 32))));
  return kOk;
}

struct SharesArgs {
  std::string instance_path;
  std::string which = "all";  // mms | aps | mu | all
  OracleLimits limits;
};

inline int run_shares(const SharesArgs& args, std::ostream& out = std::cout) {
  const Instance inst = parse_instance(read_file(args.instance_path));
  const bool want_mms = args.which == "mms" || args.which == "all";
  const bool want_aps = args.which == "aps" || args.which == "all";
  const bool want_mu = args.which == "mu" || args.which == "all";
  if (args.which != "mms" && args.which != "aps" && args.which != "mu" && args.which != "all")
    throw ValidationError("unknown share selector: " + args.which);
  if (args.which == "mu" && !inst.all_splc())
    throw ValidationError("mu is defined by the SPLC closed form; instance is not SPLC");
  ShareReport report;
  for (int i = 0; i < inst.agent_count(); ++i) {
    AgentShare a;
    if (want_mms) a.mms = exact_mms(inst, i, args.limits);
    if (want_aps) a.aps = exact_aps(inst, i, args.limits);
    if (want_mu && inst.all_splc())
      a.mu = mu_uniform(inst.splc(i), inst.agent_count());
    report.agents.push_back(std::move(a));
  }
  out << share_report_to_json(report).dump(2) << "\n";
  return kOk;
}

struct SolveArgs {
  std::string instance_path;
  std::string algo;  // splc-mms | sub-aps
  Rational epsilon = rat(1, 20);
  std::string out_path;
  std::string trace_path;
};

inline int run_solve(const SolveArgs& args, std::ostream& out = std::cout) {
  const Instance inst = parse_instance(read_file(args.instance_path));
  Allocation alloc;
  nlohmann::json trace;
  if (args.algo == "splc-mms") {
    splc::PipelineResult result = splc::solve_half_mms(inst);
    alloc = std::move(result.allocation);
    trace = result.trace.to_json();
  } else if (args.algo == "sub-aps") {
    subaps::ThirdApsResult result = subaps::solve_third_aps(inst, args.epsilon);
    alloc = std::move(result.allocation);
    trace["greedy_runs"] = result.greedy_runs;
    trace["final_log"] = result.final_log.to_json();
    nlohmann::json betas = nlohmann::json::array();
    for (const auto& b : result.beta) betas.push_back(to_string(b));
    trace["beta_final"] = std::move(betas);
  } else {
    throw ValidationError("unknown algorithm: " + args.algo);
  }
  const std::string doc = write_allocation(alloc);
  if (args.out_path.empty())
    out << doc;
  else
    write_file(args.out_path, doc);
  if (!args.trace_path.empty()) write_file(args.trace_path, trace.dump(2) + "\n");
  return kOk;
}

struct VerifyArgs {
  std::string instance_path;
  std::string allocation_path;
  Rational factor = 1;
  std::string target = "mms";  // mms | aps | mu | path to a {"targets": [...]} file
  OracleLimits limits;
};

inline int run_verify(const VerifyArgs& args, std::ostream& out = std::cout) {
  const Instance inst = parse_instance(read_file(args.instance_path));
  const Allocation alloc = parse_allocation(read_file(args.allocation_path));
  std::vector<Rational> targets;
  if (args.target == "mms") {
    for (int i = 0; i < inst.agent_count(); ++i) targets.push_back(exact_mms(inst, i, args.limits));
  } else if (args.target == "aps") {
    for (int i = 0; i < inst.agent_count(); ++i) targets.push_back(exact_aps(inst, i, args.limits));
  } else if (args.target == "mu") {
    if (!inst.all_splc())
      throw ValidationError("mu targets need an SPLC instance");
    for (int i = 0; i < inst.agent_count(); ++i)
      targets.push_back(mu_uniform(inst.splc(i), inst.agent_count()));
  } else {
    nlohmann::json doc = nlohmann::json::parse(read_file(args.target), nullptr, false);
    if (doc.is_discarded() || !doc.contains("targets"))
      throw ParseError("$", "target file needs a \"targets\" array");
    for (const auto& t : doc["targets"]) {
      auto r = try_parse_rational(t.get<std::string>());
      if (!r) throw ParseError("$.targets", "not a valid rational");
      targets.push_back(*r);
    }
  }
  ShareReport report = verify(inst, alloc, targets, args.factor);
  out << share_report_to_json(report).dump(2) << "\n";
  return report.all_pass ? kOk : kGuaranteeFail;
}

struct BenchArgs {
  std::string config_path;
  std::string out_path;
};

inline int run_bench(const BenchArgs& args, std::ostream& out = std::cout) {
  nlohmann::json doc = nlohmann::json::parse(read_file(args.config_path), nullptr, false);
  if (doc.is_discarded()) throw ParseError("$", "bench config is not valid JSON");
  const bench::BenchConfig cfg = bench::parse_bench_config(doc);
  const std::string csv = bench::write_csv(bench::run_bench(cfg));
  if (args.out_path.empty())
    out << csv;
  else
    write_file(args.out_path, csv);
  return kOk;
}

}  // namespace fairdiv::cli
