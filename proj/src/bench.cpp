#include "dronecoal/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "dronecoal/io.hpp"
#include "dronecoal/markov.hpp"

namespace dronecoal {

using nlohmann::ordered_json;

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::Baseline: return "baseline";
    case Regime::FullInfo: return "full_info";
    case Regime::Proposed: return "proposed";
    case Regime::SocialOptimal: return "social_optimal";
  }
  return "?";
}

Regime parse_regime(std::string_view name) {
  for (Regime r : all_regimes())
    if (regime_name(r) == name) return r;
  throw std::invalid_argument("unknown regime '" + std::string(name) + "'");
}

const std::vector<Regime>& all_regimes() {
  static const std::vector<Regime> regimes{Regime::Baseline, Regime::FullInfo, Regime::Proposed,
                                           Regime::SocialOptimal};
  return regimes;
}

std::string_view rationality_name(Rationality r) {
  switch (r) {
    case Rationality::Strict: return "strict";
    case Rationality::Weak: return "weak";
    case Rationality::None: return "none";
  }
  return "?";
}

Rationality parse_rationality(std::string_view name) {
  for (Rationality r : {Rationality::Strict, Rationality::Weak, Rationality::None})
    if (rationality_name(r) == name) return r;
  throw std::invalid_argument("unknown rationality '" + std::string(name) + "'");
}

void validate(const RunManifest& m) {
  if (m.settings.empty()) throw std::invalid_argument("manifest: no settings");
  for (const auto& s : m.settings) setting_by_name(s);
  environment_preset(m.environment);
  validate(parse_type_set(m.types));
  if (m.topologies < 1 || m.repetitions < 1)
    throw std::invalid_argument("manifest: topologies and repetitions must be >= 1");
  if (m.belief_window < 0) throw std::invalid_argument("manifest: belief_window must be >= 0");
  if (m.enumeration_cap < 1 || m.social_optimal_cap < 1 || m.threads < 0)
    throw std::invalid_argument("manifest: caps must be >= 1 and threads >= 0");
  validate(dynamics_config(m, 0));
  if (m.output_dir.empty()) throw std::invalid_argument("manifest: empty output_dir");
}

std::string manifest_to_text(const RunManifest& m) {
  ordered_json j;
  j["settings"] = m.settings;
  j["environment"] = m.environment;
  j["types"] = m.types;
  j["topologies"] = m.topologies;
  j["repetitions"] = m.repetitions;
  j["seed"] = m.seed;
  std::vector<std::string> regimes;
  for (Regime r : m.regimes) regimes.emplace_back(regime_name(r));
  j["regimes"] = regimes;
  j["output_dir"] = m.output_dir;
  j["epsilon"] = m.epsilon;
  j["init_grand_rounds"] = m.init_grand_rounds;
  j["max_rounds"] = m.max_rounds;
  j["stability_window"] = m.stability_window;
  j["stop_on_convergence"] = m.stop_on_convergence;
  j["belief_window"] = m.belief_window;
  j["max_proposals"] = m.max_proposals;
  j["veto_rule"] = m.veto_rule == VetoRule::NextBest ? "next_best" : "stay_on_veto";
  j["enumeration_cap"] = m.enumeration_cap;
  j["social_optimal_cap"] = m.social_optimal_cap;
  j["social_rationality"] = rationality_name(m.social_rationality);
  j["markov_audit"] = m.markov_audit;
  j["threads"] = m.threads;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_text(const std::string& text) {
  RunManifest m;
  try {
    const auto j = ordered_json::parse(text);
    const std::map<std::string, int> known{
        {"settings", 0}, {"environment", 0}, {"types", 0}, {"topologies", 0},
        {"repetitions", 0}, {"seed", 0}, {"regimes", 0}, {"output_dir", 0},
        {"epsilon", 0}, {"init_grand_rounds", 0}, {"max_rounds", 0},
        {"stability_window", 0}, {"stop_on_convergence", 0}, {"belief_window", 0}, {"max_proposals", 0},
        {"veto_rule", 0}, {"enumeration_cap", 0}, {"social_optimal_cap", 0},
        {"social_rationality", 0}, {"markov_audit", 0}, {"threads", 0}};
    for (const auto& [key, value] : j.items())
      if (!known.contains(key)) throw std::invalid_argument("manifest: unknown key '" + key + "'");
    m.settings = j.value("settings", m.settings);
    m.environment = j.value("environment", m.environment);
    m.types = j.value("types", m.types);
    m.topologies = j.value("topologies", m.topologies);
    m.repetitions = j.value("repetitions", m.repetitions);
    m.seed = j.value("seed", m.seed);
    if (j.contains("regimes")) {
      m.regimes.clear();
      for (const auto& r : j.at("regimes")) m.regimes.push_back(parse_regime(r.get<std::string>()));
    }
    m.output_dir = j.value("output_dir", m.output_dir);
    m.epsilon = j.value("epsilon", m.epsilon);
    m.init_grand_rounds = j.value("init_grand_rounds", m.init_grand_rounds);
    m.max_rounds = j.value("max_rounds", m.max_rounds);
    m.stability_window = j.value("stability_window", m.stability_window);
    m.stop_on_convergence = j.value("stop_on_convergence", m.stop_on_convergence);
    m.belief_window = j.value("belief_window", m.belief_window);
    m.max_proposals = j.value("max_proposals", m.max_proposals);
    if (j.contains("veto_rule")) {
      const auto rule = j.at("veto_rule").get<std::string>();
      if (rule == "next_best") m.veto_rule = VetoRule::NextBest;
      else if (rule == "stay_on_veto") m.veto_rule = VetoRule::StayOnVeto;
      else throw std::invalid_argument("manifest: unknown veto_rule '" + rule + "'");
    }
    m.enumeration_cap = j.value("enumeration_cap", m.enumeration_cap);
    m.social_optimal_cap = j.value("social_optimal_cap", m.social_optimal_cap);
    if (j.contains("social_rationality"))
      m.social_rationality = parse_rationality(j.at("social_rationality").get<std::string>());
    m.markov_audit = j.value("markov_audit", m.markov_audit);
    m.threads = j.value("threads", m.threads);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  }
  return m;
}

namespace {

std::uint64_t mix_seed(std::initializer_list<std::uint32_t> words) {
  std::seed_seq seq(words);
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

std::uint64_t topology_seed(std::uint64_t master, std::string_view setting, int topology) {
  const auto& settings = standard_settings();
  const auto it = std::find_if(settings.begin(), settings.end(),
                               [&](const SimulationSetting& s) { return s.name == setting; });
  if (it == settings.end())
    throw std::invalid_argument("unknown setting '" + std::string(setting) + "'");
  const auto index = static_cast<std::uint32_t>(it - settings.begin()) + 1;
  return mix_seed({lo(master), hi(master), index, static_cast<std::uint32_t>(topology)});
}

std::uint64_t run_seed(std::uint64_t topology_seed, Regime regime, int repetition) {
  return mix_seed({lo(topology_seed), hi(topology_seed),
                   static_cast<std::uint32_t>(regime) + 101,
                   static_cast<std::uint32_t>(repetition)});
}

DynamicsConfig dynamics_config(const RunManifest& m, std::uint64_t seed) {
  DynamicsConfig c;
  c.epsilon = m.epsilon;
  c.init_grand_rounds = m.init_grand_rounds;
  c.max_rounds = m.max_rounds;
  c.stability_window = m.stability_window;
  c.stop_on_convergence = m.stop_on_convergence;
  c.seed = seed;
  c.belief_window = m.belief_window == 0 ? kUnboundedWindow
                                         : static_cast<std::size_t>(m.belief_window);
  c.best_reply.max_proposals = m.max_proposals;
  c.best_reply.veto_rule = m.veto_rule;
  return c;
}

double structure_total(const CoalitionStructure& structure, PayoffModel& model) {
  double total = 0.0;
  for (const auto& block : structure.blocks()) total += model.full_information_total(block);
  return total;
}

std::vector<double> structure_rates(const CoalitionStructure& structure, PayoffModel& model) {
  std::vector<double> rates(structure.num_drones());
  for (int d = 0; d < structure.num_drones(); ++d)
    rates[d] = model.full_information_payoff(d, structure.coalition_of(d));
  return rates;
}

double best_stable_rate(const std::vector<StableOutcome>& outcomes) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& o : outcomes)
    if (o.probability > 0.0) best = std::max(best, o.total_rate);
  if (!std::isfinite(best)) throw std::invalid_argument("best_stable_rate: no reachable outcome");
  return best;
}

double expected_rate(const std::vector<StableOutcome>& outcomes) {
  double total = 0.0;
  for (const auto& o : outcomes) total += o.probability * o.total_rate;
  return total;
}

namespace {

void run_baseline(const Scenario& s, RegimeResult& out) {
  out.per_drone = baseline_rates(s);
  out.total_rate = std::accumulate(out.per_drone.begin(), out.per_drone.end(), 0.0);
  out.final_structure = CoalitionStructure::singletons(s.num_drones()).to_string();
}

void run_full_info(const Scenario& s, const RunManifest& m, RegimeResult& out) {
  PayoffModel model(s);
  const auto beliefs = BeliefState::point_mass_truth(s);
  const int drones = s.num_drones();
  const auto start = CoalitionStructure::singletons(drones);

  std::map<std::string, int> finals;
  for (int rep = 0; rep < m.repetitions; ++rep) {
    auto rng = RngStreams::from_seed(run_seed(out.scenario_seed, Regime::FullInfo, rep));
    BestReplyOptions options;
    options.max_proposals = m.max_proposals;
    options.veto_rule = m.veto_rule;
    const auto br = run_best_reply(start, beliefs, model, rng.proposer, rng.tie_break, options);
    RunRecord rec;
    rec.repetition = rep;
    rec.final_structure = br.structure.to_string();
    rec.total_rate = structure_total(br.structure, model);
    rec.best_reply_moves = br.moves;
    rec.converged = br.converged;
    if (br.converged) ++finals[rec.final_structure];
    out.runs.push_back(std::move(rec));
  }

  bool have_chain = false;
  if (drones <= m.enumeration_cap) {
    auto chain = build_chain(beliefs, model, m.veto_rule, m.enumeration_cap);
    try {
      const auto probs = formation_probabilities(chain);
      for (int a : chain.absorbing)
        out.stable.push_back({chain.states[a].to_string(), structure_total(chain.states[a], model),
                              probs[a]});
      have_chain = true;
      if (m.markov_audit) {
        std::vector<double> totals;
        for (const auto& st : chain.states) totals.push_back(structure_total(st, model));
        std::ostringstream os;
        write_markov_audit(os, chain, totals);
        out.markov_audit = os.str();
      }
    } catch (const TrappedClassError& e) {
      out.notice = e.what();
    }
  } else {
    out.notice = "chain skipped: drones exceed the enumeration cap";
  }
  if (!have_chain) {
    // Empirical absorption frequencies of the simulated runs.
    int converged = 0;
    for (const auto& [name, count] : finals) converged += count;
    for (const auto& [name, count] : finals)
      out.stable.push_back({name, structure_total(CoalitionStructure::parse(name), model),
                            static_cast<double>(count) / converged});
    out.fallback = true;
  }
  if (out.stable.empty()) {
    out.skipped = true;
    out.notice += out.notice.empty() ? "no stable structure found" : "; no stable structure found";
    return;
  }

  const StableOutcome* best = nullptr;
  for (const auto& o : out.stable)
    if (o.probability > 0.0 && (!best || o.total_rate > best->total_rate)) best = &o;
  const auto structure = CoalitionStructure::parse(best->structure);
  out.final_structure = best->structure;
  out.per_drone = structure_rates(structure, model);
  out.total_rate = best->total_rate;
  out.expected_total = expected_rate(out.stable);
}

void run_proposed(const Scenario& s, const RunManifest& m, RegimeResult& out) {
  PayoffModel truth(s);
  out.per_drone.assign(s.num_drones(), 0.0);
  std::map<std::string, int> finals;
  for (int rep = 0; rep < m.repetitions; ++rep) {
    const auto game =
        run_repeated_game(s, dynamics_config(m, run_seed(out.scenario_seed, Regime::Proposed, rep)));
    RunRecord rec;
    rec.repetition = rep;
    rec.final_structure = game.final_structure.to_string();
    rec.total_rate = structure_total(game.final_structure, truth);
    rec.rounds = static_cast<int>(game.rounds.size());
    rec.converged = game.converged && game.all_best_replies_converged;
    for (const auto& r : game.rounds) {
      rec.best_reply_moves = std::max(rec.best_reply_moves, r.best_reply_moves);
      rec.frobenius.push_back(r.frobenius_per_type);
    }
    const auto rates = structure_rates(game.final_structure, truth);
    for (std::size_t d = 0; d < rates.size(); ++d) out.per_drone[d] += rates[d] / m.repetitions;
    out.total_rate += rec.total_rate / m.repetitions;
    ++finals[rec.final_structure];
    out.runs.push_back(std::move(rec));
  }
  // Most frequent final structure; ties go to the first in name order.
  int most = 0;
  for (const auto& [name, count] : finals)
    if (count > most) {
      most = count;
      out.final_structure = name;
    }
}

void run_social_optimal(const Scenario& s, const RunManifest& m, RegimeResult& out) {
  const int drones = s.num_drones();
  if (drones > m.social_optimal_cap) {
    out.skipped = true;
    out.notice = fmt::format("skipped: {} drones exceed the social-optimal cap {}", drones,
                             m.social_optimal_cap);
    return;
  }
  PayoffModel model(s);
  const auto baseline = baseline_rates(s);
  const CoalitionStructure* best = nullptr;
  const CoalitionStructure* best_any = nullptr;
  double best_total = 0.0;
  double best_any_total = 0.0;
  const auto structures = enumerate_structures(drones, m.social_optimal_cap);
  for (const auto& w : structures) {
    const auto rates = structure_rates(w, model);
    const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
    if (!best_any || total > best_any_total) {
      best_any = &w;
      best_any_total = total;
    }
    bool rational = true;
    for (int d = 0; d < drones; ++d) {
      if (m.social_rationality == Rationality::Strict) rational = rational && rates[d] > baseline[d];
      if (m.social_rationality == Rationality::Weak) rational = rational && rates[d] >= baseline[d];
    }
    if (rational && (!best || total > best_total)) {
      best = &w;
      best_total = total;
    }
  }
  if (!best) {
    out.fallback = true;
    out.notice = "no individually rational structure; unconstrained maximum used";
    best = best_any;
    best_total = best_any_total;
  }
  out.final_structure = best->to_string();
  out.per_drone = structure_rates(*best, model);
  out.total_rate = best_total;
}

}  // namespace

RegimeResult run_regime(const Scenario& scenario, Regime regime, const RunManifest& manifest) {
  validate(scenario);
  RegimeResult out;
  out.regime = regime;
  out.scenario_seed = scenario.seed;
  out.drones = scenario.num_drones();
  switch (regime) {
    case Regime::Baseline: run_baseline(scenario, out); break;
    case Regime::FullInfo: run_full_info(scenario, manifest, out); break;
    case Regime::Proposed: run_proposed(scenario, manifest, out); break;
    case Regime::SocialOptimal: run_social_optimal(scenario, manifest, out); break;
  }
  if (regime != Regime::FullInfo || out.skipped) out.expected_total = out.total_rate;
  return out;
}

std::vector<RegimeResult> run_manifest(const RunManifest& m) {
  validate(m);
  const auto env = environment_preset(m.environment);
  const auto types = parse_type_set(m.types);
  struct Job {
    std::string setting;
    int topology;
  };
  std::vector<Job> jobs;
  for (const auto& s : m.settings)
    for (int t = 0; t < m.topologies; ++t) jobs.push_back({s, t});

  std::vector<std::vector<RegimeResult>> slots(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto setting = setting_by_name(jobs[i].setting);
        const auto scenario = generate(setting, env, types,
                                       topology_seed(m.seed, setting.name, jobs[i].topology));
        for (Regime r : m.regimes) {
          auto res = run_regime(scenario, r, m);
          res.setting = setting.name;
          res.topology = jobs[i].topology;
          slots[i].push_back(std::move(res));
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  unsigned threads = m.threads > 0 ? static_cast<unsigned>(m.threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<RegimeResult> results;
  for (auto& slot : slots)
    for (auto& r : slot) results.push_back(std::move(r));
  return results;
}

double regime_total(const RegimeResult& r, AggregateMode mode) {
  if (r.regime == Regime::FullInfo && !r.stable.empty())
    return mode == AggregateMode::BestStable ? best_stable_rate(r.stable) : expected_rate(r.stable);
  return r.total_rate;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  if (v.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / (v.size() - 1))};
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

}  // namespace

std::vector<SummaryRow> aggregate(const std::vector<RegimeResult>& results,
                                  const RunManifest& m, AggregateMode mode) {
  std::vector<SummaryRow> rows;
  for (const auto& setting : m.settings) {
    for (Regime regime : m.regimes) {
      SummaryRow row;
      row.setting = setting;
      row.regime = regime;
      std::vector<double> totals;
      for (const auto& r : results) {
        if (r.setting != setting || r.regime != regime) continue;
        if (r.skipped) {
          ++row.skipped;
          continue;
        }
        if (r.fallback) ++row.fallbacks;
        totals.push_back(regime_total(r, mode));
      }
      row.topologies = static_cast<int>(totals.size());
      std::tie(row.mean, row.std_dev) = mean_std(totals);
      rows.push_back(row);
    }
  }
  return rows;
}

void prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " +
                                   ec.message());
  const auto probe = dir / ".write_probe";
  write_file(probe, "");
  std::filesystem::remove(probe, ec);
}

std::string results_to_text(const std::vector<RegimeResult>& results) {
  std::string text;
  for (const auto& r : results) {
    ordered_json j;
    j["setting"] = r.setting;
    j["topology"] = r.topology;
    j["scenario_seed"] = r.scenario_seed;
    j["regime"] = regime_name(r.regime);
    j["drones"] = r.drones;
    j["total_rate"] = r.total_rate;
    j["expected_total"] = r.expected_total;
    j["per_drone"] = r.per_drone;
    j["final_structure"] = r.final_structure;
    ordered_json stable = ordered_json::array();
    for (const auto& o : r.stable)
      stable.push_back({{"structure", o.structure},
                        {"total_rate", o.total_rate},
                        {"probability", o.probability}});
    j["stable"] = stable;
    ordered_json runs = ordered_json::array();
    for (const auto& run : r.runs)
      runs.push_back({{"repetition", run.repetition},
                      {"final_structure", run.final_structure},
                      {"total_rate", run.total_rate},
                      {"rounds", run.rounds},
                      {"best_reply_moves", run.best_reply_moves},
                      {"converged", run.converged},
                      {"frobenius", run.frobenius}});
    j["runs"] = runs;
    j["skipped"] = r.skipped;
    j["fallback"] = r.fallback;
    j["notice"] = r.notice;
    text += j.dump() + "\n";
  }
  return text;
}

std::vector<RegimeResult> results_from_text(const std::string& text) {
  std::vector<RegimeResult> results;
  std::istringstream in(text);
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = ordered_json::parse(line);
      RegimeResult r;
      r.setting = j.at("setting").get<std::string>();
      r.topology = j.at("topology").get<int>();
      r.scenario_seed = j.at("scenario_seed").get<std::uint64_t>();
      r.regime = parse_regime(j.at("regime").get<std::string>());
      r.drones = j.at("drones").get<int>();
      r.total_rate = j.at("total_rate").get<double>();
      r.expected_total = j.at("expected_total").get<double>();
      r.per_drone = j.at("per_drone").get<std::vector<double>>();
      r.final_structure = j.at("final_structure").get<std::string>();
      for (const auto& o : j.at("stable"))
        r.stable.push_back({o.at("structure").get<std::string>(), o.at("total_rate").get<double>(),
                            o.at("probability").get<double>()});
      for (const auto& run : j.at("runs")) {
        RunRecord rec;
        rec.repetition = run.at("repetition").get<int>();
        rec.final_structure = run.at("final_structure").get<std::string>();
        rec.total_rate = run.at("total_rate").get<double>();
        rec.rounds = run.at("rounds").get<int>();
        rec.best_reply_moves = run.at("best_reply_moves").get<int>();
        rec.converged = run.at("converged").get<bool>();
        rec.frobenius = run.at("frobenius").get<std::vector<std::vector<double>>>();
        r.runs.push_back(std::move(rec));
      }
      r.skipped = j.at("skipped").get<bool>();
      r.fallback = j.at("fallback").get<bool>();
      r.notice = j.at("notice").get<std::string>();
      results.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("results file: ") + e.what());
  }
  return results;
}

bool all_converged(const std::vector<RegimeResult>& results) {
  for (const auto& r : results)
    for (const auto& run : r.runs)
      if (!run.converged) return false;
  return true;
}

namespace {

std::string summary_csv(const std::vector<RegimeResult>& results, const RunManifest& m) {
  const auto best = aggregate(results, m, AggregateMode::BestStable);
  const auto expected = aggregate(results, m, AggregateMode::Expected);
  std::string out =
      "setting,environment,types,regime,topologies,skipped,fallbacks,"
      "mean_best_stable,std_best_stable,mean_expected,std_expected\n";
  for (std::size_t i = 0; i < best.size(); ++i) {
    const auto& b = best[i];
    out += fmt::format("{},{},\"{}\",{},{},{},{},{},{},{},{}\n", b.setting, m.environment, m.types,
                       regime_name(b.regime), b.topologies, b.skipped, b.fallbacks, num(b.mean),
                       num(b.std_dev), num(expected[i].mean), num(expected[i].std_dev));
  }
  return out;
}

std::string per_drone_csv(const std::vector<RegimeResult>& results, const RunManifest& m) {
  std::string largest;
  int most = -1;
  for (const auto& name : m.settings) {
    const auto s = setting_by_name(name);
    if (s.drones > most) {
      most = s.drones;
      largest = name;
    }
  }
  std::string out = "setting,regime,drone,mean_rate,std_rate\n";
  for (Regime regime : m.regimes) {
    std::vector<std::vector<double>> per(most);
    for (const auto& r : results) {
      if (r.setting != largest || r.regime != regime || r.skipped) continue;
      for (std::size_t d = 0; d < r.per_drone.size(); ++d) per[d].push_back(r.per_drone[d]);
    }
    for (int d = 0; d < most; ++d) {
      const auto [mean, sd] = mean_std(per[d]);
      out += fmt::format("{},{},{},{},{}\n", largest, regime_name(regime), d, num(mean), num(sd));
    }
  }
  return out;
}

std::string runs_csv(const std::vector<RegimeResult>& results) {
  std::string out =
      "setting,topology,scenario_seed,regime,repetition,final_structure,total_rate,rounds,"
      "best_reply_moves,converged\n";
  for (const auto& r : results) {
    if (r.runs.empty()) {
      out += fmt::format("{},{},{},{},,\"{}\",{},,,\n", r.setting, r.topology, r.scenario_seed,
                         regime_name(r.regime), r.final_structure, num(r.total_rate));
      continue;
    }
    for (const auto& run : r.runs)
      out += fmt::format("{},{},{},{},{},\"{}\",{},{},{},{}\n", r.setting, r.topology,
                         r.scenario_seed, regime_name(r.regime), run.repetition,
                         run.final_structure, num(run.total_rate), run.rounds,
                         run.best_reply_moves, run.converged ? 1 : 0);
  }
  return out;
}

/// Mean Frobenius norms per round over every proposed run, holding each run's
/// last value once it stopped.
std::string convergence_csv(const std::vector<RegimeResult>& results, const RunManifest& m) {
  const auto types = parse_type_set(m.types);
  std::string out = "setting,round";
  for (const auto& t : types) out += fmt::format(",type_{}", t.id);
  out += ",mean\n";
  for (const auto& setting : m.settings) {
    std::vector<std::vector<double>> sums(m.max_rounds, std::vector<double>(types.size(), 0.0));
    int runs = 0;
    for (const auto& r : results) {
      if (r.setting != setting || r.regime != Regime::Proposed) continue;
      for (const auto& run : r.runs) {
        if (run.frobenius.empty()) continue;
        ++runs;
        for (int k = 0; k < m.max_rounds; ++k) {
          const auto& row = run.frobenius[std::min<std::size_t>(k, run.frobenius.size() - 1)];
          for (std::size_t t = 0; t < types.size(); ++t) sums[k][t] += row[t];
        }
      }
    }
    if (runs == 0) continue;
    for (int k = 0; k < m.max_rounds; ++k) {
      out += fmt::format("{},{}", setting, k + 1);
      double mean = 0.0;
      for (std::size_t t = 0; t < types.size(); ++t) {
        const double v = sums[k][t] / runs;
        mean += v / types.size();
        out += "," + num(v);
      }
      out += "," + num(mean) + "\n";
    }
  }
  return out;
}

}  // namespace

std::vector<std::filesystem::path> emit_outputs(const std::vector<RegimeResult>& results,
                                                const RunManifest& m,
                                                const std::filesystem::path& dir) {
  prepare_output_dir(dir);
  std::vector<std::filesystem::path> written;
  const auto put = [&](const std::filesystem::path& path, const std::string& text) {
    write_file(path, text);
    written.push_back(path);
  };
  put(dir / "manifest.json", manifest_to_text(m));
  if (m.regimes.empty()) return written;

  put(dir / "summary.csv", summary_csv(results, m));
  put(dir / "per_drone.csv", per_drone_csv(results, m));
  put(dir / "runs.csv", runs_csv(results));
  put(dir / "results.jsonl", results_to_text(results));
  if (std::find(m.regimes.begin(), m.regimes.end(), Regime::Proposed) != m.regimes.end())
    put(dir / "convergence.csv", convergence_csv(results, m));
  for (const auto& r : results) {
    if (r.markov_audit.empty()) continue;
    std::filesystem::create_directories(dir / "markov");
    put(dir / "markov" / fmt::format("{}_t{:03}.json", r.setting, r.topology), r.markov_audit);
  }
  return written;
}

}  // namespace dronecoal
