// fairshare: generate, solve, verify and benchmark fair-division instances
// with exact rational arithmetic end to end.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fairdiv/cli_commands.hpp"

namespace {

fairdiv::Rational parse_rational_flag(const std::string& text, const std::string& flag) {
  auto r = fairdiv::try_parse_rational(text);
  if (!r) throw fairdiv::ValidationError(flag + ": not a valid rational: " + text);
  return *r;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fairdiv;

  CLI::App app{"fairshare: fair division solvers with exact share oracles"};
  app.require_subcommand(1);

  cli::GenArgs gen_args;
  std::string gen_entitlements;
  std::string gen_delta = "1/32";
  auto* gen_cmd = app.add_subcommand("gen", "generate instance files (plus the two fixtures)");
  gen_cmd->add_option("--family", gen_args.options.family,
                      "splc | additive | truncated_additive | coverage");
  gen_cmd->add_option("--n", gen_args.options.agents, "agent count");
  gen_cmd->add_option("--goods", gen_args.options.goods, "good count (non-SPLC families)");
  gen_cmd->add_option("--universe", gen_args.options.universe, "coverage element count");
  gen_cmd->add_option("--min-types", gen_args.options.min_types, "SPLC: minimum type count");
  gen_cmd->add_option("--max-types", gen_args.options.max_types, "SPLC: maximum type count");
  gen_cmd->add_option("--min-copies", gen_args.options.min_copies, "SPLC: min copies per type");
  gen_cmd->add_option("--max-copies", gen_args.options.max_copies, "SPLC: max copies per type");
  gen_cmd->add_option("--max-total-copies", gen_args.options.max_total_copies,
                      "SPLC: cap on the copy universe");
  gen_cmd->add_option("--max-value", gen_args.options.max_value, "largest integer marginal");
  gen_cmd->add_option("--entitlements", gen_entitlements,
                      "comma-separated rationals (default symmetric)");
  gen_cmd->add_option("--seed", gen_args.seed, "PRNG seed");
  gen_cmd->add_option("--count", gen_args.count, "instances to generate");
  gen_cmd->add_option("--out", gen_args.out_dir, "output directory");
  gen_cmd->add_option("--fixture", gen_args.fixture,
                      "emit one fixture instead: splc-mms-high | greedy-counter");
  gen_cmd->add_option("--fixture-n", gen_args.fixture_agents, "agents for splc-mms-high");
  gen_cmd->add_option("--delta", gen_delta, "delta for greedy-counter (in (0, 1/16))");

  cli::SharesArgs shares_args;
  auto* shares_cmd = app.add_subcommand("shares", "compute exact share values");
  shares_cmd->add_option("--instance", shares_args.instance_path, "instance file")->required();
  shares_cmd->add_option("--which", shares_args.which, "mms | aps | mu | all");
  shares_cmd->add_option("--limit-mms-n", shares_args.limits.mms_max_agents,
                         "MMS oracle agent limit");
  shares_cmd->add_option("--limit-mms-m", shares_args.limits.mms_max_goods,
                         "MMS oracle good/copy limit");
  shares_cmd->add_option("--limit-aps-m", shares_args.limits.aps_max_goods,
                         "APS/extension good limit");

  cli::SolveArgs solve_args;
  std::string solve_epsilon = "1/20";
  auto* solve_cmd = app.add_subcommand("solve", "run a solver on an instance");
  solve_cmd->add_option("--instance", solve_args.instance_path, "instance file")->required();
  solve_cmd->add_option("--algo", solve_args.algo, "splc-mms | sub-aps")->required();
  solve_cmd->add_option("--epsilon", solve_epsilon, "sub-aps accuracy parameter");
  solve_cmd->add_option("--out", solve_args.out_path, "allocation output file (default stdout)");
  solve_cmd->add_option("--trace", solve_args.trace_path, "write the diagnostic trace JSON here");

  cli::VerifyArgs verify_args;
  std::string verify_factor = "1";
  auto* verify_cmd = app.add_subcommand("verify", "check an allocation against share targets");
  verify_cmd->add_option("--instance", verify_args.instance_path, "instance file")->required();
  verify_cmd->add_option("--allocation", verify_args.allocation_path, "allocation file")
      ->required();
  verify_cmd->add_option("--factor", verify_factor, "required fraction of the target");
  verify_cmd->add_option("--target", verify_args.target,
                         "mms | aps | mu | path to a {\"targets\": [...]} file");
  verify_cmd->add_option("--limit-mms-n", verify_args.limits.mms_max_agents,
                         "MMS oracle agent limit");
  verify_cmd->add_option("--limit-mms-m", verify_args.limits.mms_max_goods,
                         "MMS oracle good/copy limit");
  verify_cmd->add_option("--limit-aps-m", verify_args.limits.aps_max_goods,
                         "APS/extension good limit");

  cli::BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark config, emit CSV");
  bench_cmd->add_option("--config", bench_args.config_path, "bench config JSON")->required();
  bench_cmd->add_option("--out", bench_args.out_path, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kValidationError;
  }

  try {
    if (gen_cmd->parsed()) {
      gen_args.delta = parse_rational_flag(gen_delta, "--delta");
      if (!gen_entitlements.empty()) {
        std::stringstream ss(gen_entitlements);
        std::string item;
        while (std::getline(ss, item, ','))
          gen_args.options.entitlements.push_back(parse_rational_flag(item, "--entitlements"));
      }
      return cli::run_gen(gen_args);
    }
    if (shares_cmd->parsed()) return cli::run_shares(shares_args);
    if (solve_cmd->parsed()) {
      solve_args.epsilon = parse_rational_flag(solve_epsilon, "--epsilon");
      return cli::run_solve(solve_args);
    }
    if (verify_cmd->parsed()) {
      verify_args.factor = parse_rational_flag(verify_factor, "--factor");
      return cli::run_verify(verify_args);
    }
    if (bench_cmd->parsed()) return cli::run_bench(bench_args);
  } catch (const CapabilityError& e) {
    std::cerr << "capability limit: " << e.what() << "\n";
    return cli::kCapabilityLimit;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return cli::kValidationError;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return cli::kValidationError;
  } catch (const InternalError& e) {
    std::cerr << "internal invariant violation: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kValidationError;
  }
  return cli::kOk;
}
