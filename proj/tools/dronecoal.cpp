#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dronecoal/bench.hpp"
#include "dronecoal/io.hpp"
#include "dronecoal/markov.hpp"

using namespace dronecoal;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;
constexpr const char* kOutputDirEnv = "DRONECOAL_OUTPUT_DIR";

struct ScenarioArgs {
  std::string file;
  std::string setting = "S1";
  std::string environment = "urban";
  std::string types = "12:3,18:3";
  std::uint64_t seed = 42;

  void add(CLI::App* cmd) {
    cmd->add_option("--scenario", file, "Scenario file (overrides the generation flags)");
    cmd->add_option("--setting", setting, "S1..S4")->capture_default_str();
    cmd->add_option("--env", environment, "urban | dense_urban | high_rise_urban")
        ->capture_default_str();
    cmd->add_option("--types", types, "Type set as mu:sigma pairs")->capture_default_str();
    cmd->add_option("--seed", seed, "Generation seed")->capture_default_str();
  }

  Scenario load() const {
    if (!file.empty()) return load_scenario(file);
    return generate(setting_by_name(setting), environment_preset(environment),
                    parse_type_set(types), seed);
  }
};

int cmd_generate(const ScenarioArgs& args, const std::string& out) {
  const auto s = args.load();
  if (out.empty() || out == "-") {
    std::cout << scenario_to_text(s);
  } else {
    save_scenario(out, s);
    std::cerr << fmt::format("wrote {} ({} drones, {} users)\n", out, s.num_drones(),
                             s.num_users());
  }
  return 0;
}

int cmd_markov(const ScenarioArgs& args, const std::string& beliefs_kind, bool stay_on_veto,
               const std::string& out) {
  const auto s = args.load();
  PayoffModel model(s);
  BeliefState beliefs;
  if (beliefs_kind == "truth") beliefs = BeliefState::point_mass_truth(s);
  else if (beliefs_kind == "uniform") beliefs = BeliefState::uniform(s);
  else throw std::invalid_argument("--beliefs must be truth or uniform");
  auto chain = build_chain(beliefs, model, stay_on_veto ? VetoRule::StayOnVeto : VetoRule::NextBest);
  formation_probabilities(chain);
  std::vector<double> totals;
  for (const auto& st : chain.states) totals.push_back(structure_total(st, model));

  std::cout << fmt::format("{} states, {} absorbing\n", chain.states.size(), chain.absorbing.size());
  for (int a : chain.absorbing)
    std::cout << fmt::format("  {:<24} pi={:.6f} total={:.6g}\n", chain.states[a].to_string(),
                             chain.formation_probs[a], totals[a]);
  if (!out.empty()) {
    std::ostringstream os;
    write_markov_audit(os, chain, totals);
    write_file(out, os.str());
  }
  return 0;
}

void print_summary(const std::vector<RegimeResult>& results, const RunManifest& m) {
  const auto best = aggregate(results, m, AggregateMode::BestStable);
  const auto expected = aggregate(results, m, AggregateMode::Expected);
  std::cout << fmt::format("{:<8}{:<16}{:>6}{:>16}{:>14}{:>16}\n", "setting", "regime", "n",
                           "best_stable", "std", "expected");
  for (std::size_t i = 0; i < best.size(); ++i)
    std::cout << fmt::format("{:<8}{:<16}{:>6}{:>16.6g}{:>14.4g}{:>16.6g}\n", best[i].setting,
                             regime_name(best[i].regime), best[i].topologies, best[i].mean,
                             best[i].std_dev, expected[i].mean);
}

int cmd_report(const std::string& dir) {
  const std::filesystem::path root(dir);
  const auto manifest = manifest_from_text(read_file(root / "manifest.json"));
  const auto results = results_from_text(read_file(root / "results.jsonl"));
  emit_outputs(results, manifest, root);
  print_summary(results, manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coalition formation benchmark for cooperating drone base stations"};
  app.require_subcommand(1);

  ScenarioArgs gen_args;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a scenario file");
  gen_args.add(gen);
  gen->add_option("-o,--out", gen_out, "Output path ('-' for stdout)");

  std::string manifest_path;
  RunManifest m;
  std::vector<std::string> regimes;
  bool strict = false;
  auto* run = app.add_subcommand("run", "Execute a run manifest");
  run->add_option("--manifest", manifest_path, "Manifest file; flags below override it");
  run->add_option("--settings", m.settings, "Settings to run");
  run->add_option("--env", m.environment);
  run->add_option("--types", m.types);
  run->add_option("--topologies", m.topologies);
  run->add_option("--repetitions", m.repetitions);
  run->add_option("--seed", m.seed);
  run->add_option("--regimes", regimes, "baseline full_info proposed social_optimal");
  run->add_option("--output-dir", m.output_dir);
  run->add_option("--epsilon", m.epsilon);
  run->add_option("--init-grand-rounds", m.init_grand_rounds);
  run->add_option("--max-rounds", m.max_rounds);
  run->add_option("--stability-window", m.stability_window);
  bool full_horizon = false;
  run->add_flag("--full-horizon", full_horizon, "Play every round up to --max-rounds");
  run->add_option("--belief-window", m.belief_window, "0 keeps every sample");
  run->add_option("--max-proposals", m.max_proposals);
  run->add_option("--social-optimal-cap", m.social_optimal_cap);
  std::string rationality;
  run->add_option("--social-rationality", rationality, "strict | weak | none");
  run->add_flag("--markov-audit", m.markov_audit, "Write one chain audit per topology");
  run->add_option("--threads", m.threads);
  run->add_flag("--strict", strict, "Exit 3 when any run fails to converge");

  ScenarioArgs markov_args;
  std::string beliefs_kind = "truth";
  std::string markov_out;
  bool stay_on_veto = false;
  auto* markov = app.add_subcommand("markov", "Best-reply Markov chain of one scenario");
  markov_args.add(markov);
  markov->add_option("--beliefs", beliefs_kind, "truth | uniform")->capture_default_str();
  markov->add_flag("--stay-on-veto", stay_on_veto, "A refused best reply means staying put");
  markov->add_option("-o,--out", markov_out, "Audit file");

  std::string report_dir = "results";
  auto* report = app.add_subcommand("report", "Re-aggregate an existing results directory");
  report->add_option("dir", report_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) return cmd_generate(gen_args, gen_out);
    if (*markov) return cmd_markov(markov_args, beliefs_kind, stay_on_veto, markov_out);
    if (*report) return cmd_report(report_dir);

    RunManifest manifest =
        manifest_path.empty() ? RunManifest{} : manifest_from_text(read_file(manifest_path));
    // Explicit flags win over the manifest file.
    for (const auto* opt : run->get_options()) {
      if (opt->count() == 0) continue;
      const auto name = opt->get_name();
      if (name == "--settings") manifest.settings = m.settings;
      else if (name == "--env") manifest.environment = m.environment;
      else if (name == "--types") manifest.types = m.types;
      else if (name == "--topologies") manifest.topologies = m.topologies;
      else if (name == "--repetitions") manifest.repetitions = m.repetitions;
      else if (name == "--seed") manifest.seed = m.seed;
      else if (name == "--output-dir") manifest.output_dir = m.output_dir;
      else if (name == "--epsilon") manifest.epsilon = m.epsilon;
      else if (name == "--init-grand-rounds") manifest.init_grand_rounds = m.init_grand_rounds;
      else if (name == "--max-rounds") manifest.max_rounds = m.max_rounds;
      else if (name == "--stability-window") manifest.stability_window = m.stability_window;
      else if (name == "--full-horizon") manifest.stop_on_convergence = !full_horizon;
      else if (name == "--belief-window") manifest.belief_window = m.belief_window;
      else if (name == "--max-proposals") manifest.max_proposals = m.max_proposals;
      else if (name == "--social-optimal-cap") manifest.social_optimal_cap = m.social_optimal_cap;
      else if (name == "--social-rationality")
        manifest.social_rationality = parse_rationality(rationality);
      else if (name == "--markov-audit") manifest.markov_audit = m.markov_audit;
      else if (name == "--threads") manifest.threads = m.threads;
      else if (name == "--regimes") {
        manifest.regimes.clear();
        for (const auto& r : regimes) manifest.regimes.push_back(parse_regime(r));
      }
    }
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) manifest.output_dir = dir;
    validate(manifest);
    try {
      prepare_output_dir(manifest.output_dir);
    } catch (const std::exception& e) {
      throw std::invalid_argument(e.what());
    }

    const auto results = manifest.regimes.empty() ? std::vector<RegimeResult>{}
                                                  : run_manifest(manifest);
    const auto files = emit_outputs(results, manifest, manifest.output_dir);
    if (!results.empty()) print_summary(results, manifest);
    for (const auto& r : results)
      if (!r.notice.empty())
        std::cerr << fmt::format("{} t{} {}: {}\n", r.setting, r.topology, regime_name(r.regime),
                                 r.notice);
    std::cerr << fmt::format("wrote {} files to {}\n", files.size(), manifest.output_dir);
    if (strict && !all_converged(results)) {
      std::cerr << "non-convergence detected\n";
      return kExitNotConverged;
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
