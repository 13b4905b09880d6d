#include <iostream>

#include <CLI11.hpp>

#include "cyclesched_tools/cli.hpp"

int main(int argc, char** argv) {
  using cyclesched::cli::CliCommand;
  using cyclesched::cli::Verb;

  CLI::App app{"Trace-driven scheduler simulator for cyclic training jobs"};
  app.require_subcommand(1);

  CliCommand cmd;
  std::uint64_t seed = 0;
  std::string policy;
  std::string trace, config, out, spec, events;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Output directory")->required();
    sub->add_option("--seed", seed, "RNG seed override");
  };

  auto* simulate = app.add_subcommand("simulate", "Run one policy over a trace");
  simulate->add_option("--trace", trace, "Workload trace (JSONL)")->required();
  simulate->add_option("--config", config, "Simulator config (JSON)");
  simulate->add_option("--policy", policy, "ISOLATED | PACK | SPREAD | SPREAD_BACKFILL");
  add_common(simulate);

  auto* compare = app.add_subcommand("compare", "Run all four policies over a trace");
  compare->add_option("--trace", trace, "Workload trace (JSONL)")->required();
  compare->add_option("--config", config, "Simulator config (JSON)");
  add_common(compare);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic trace");
  synth->add_option("--spec", spec, "Generator spec (JSON)")->required();
  add_common(synth);

  auto* profile = app.add_subcommand("profile", "Recover a periodic profile from an event log");
  profile->add_option("--events", events, "Execution events (JSONL)")->required();
  profile->add_option("--config", config, "Simulator config (JSON), for slot_len");
  add_common(profile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << cyclesched::cli::error_object("UsageError", e.what(), cyclesched::cli::kUsage) << '\n';
    return cyclesched::cli::kUsage;
  }

  if (simulate->parsed()) cmd.verb = Verb::Simulate;
  if (compare->parsed()) cmd.verb = Verb::Compare;
  if (synth->parsed()) cmd.verb = Verb::Synth;
  if (profile->parsed()) cmd.verb = Verb::Profile;
  cmd.trace = trace;
  cmd.config = config;
  cmd.out = out;
  cmd.spec = spec;
  cmd.events = events;
  for (auto* sub : {simulate, compare, synth, profile}) {
    if (sub->parsed() && sub->count("--seed") > 0) cmd.seed = seed;
  }
  if (!policy.empty()) cmd.policy = policy;
  return cyclesched::cli::execute(cmd, std::cerr);
}
