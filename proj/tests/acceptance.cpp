// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include <fmt/format.h>

#include "dronecoal/allocation.hpp"
#include "dronecoal/bench.hpp"
#include "dronecoal/dynamics.hpp"
#include "dronecoal/io.hpp"
#include "dronecoal/learning.hpp"
#include "dronecoal/markov.hpp"
#include "fixtures.hpp"

using namespace dronecoal;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& body,
            double limit_s = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0 && secs >= limit_s) {
    v.pass = false;
    v.detail += fmt::format("; over the {} s budget", limit_s);
  }
  if (!v.pass) ++failures;
  std::cout << fmt::format("{} {:>2} {}: {} ({:.2f} s)\n", v.pass ? "PASS" : "FAIL", id, name,
                           v.detail, secs)
            << std::flush;
}

double brute_force_matching(const Eigen::MatrixXd& w) {
  const bool rows_small = w.rows() <= w.cols();
  const int small = static_cast<int>(std::min(w.rows(), w.cols()));
  const int large = static_cast<int>(std::max(w.rows(), w.cols()));
  std::vector<int> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1.0;
  do {
    double total = 0.0;
    for (int i = 0; i < small; ++i) total += rows_small ? w(i, perm[i]) : w(perm[i], i);
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

bool scan_stable(const CoalitionStructure& w, const BeliefState& b, PayoffModel& m) {
  for (int d = 0; d < w.num_drones(); ++d) {
    const Coalition& own = w.coalition_of(d);
    const double stay = m.expected_payoff(d, own, b);
    std::vector<Coalition> targets;
    for (const auto& blk : w.blocks())
      if (blk != own) targets.push_back(blk);
    if (own.size() > 1) targets.push_back({});
    for (const auto& t : targets) {
      Coalition joined = t;
      joined.push_back(d);
      std::sort(joined.begin(), joined.end());
      if (!(m.expected_payoff(d, joined, b) > stay)) continue;
      bool consent = true;
      for (int j : t) consent &= m.expected_payoff(j, joined, b) >= m.expected_payoff(j, t, b);
      if (consent) return false;
    }
  }
  return true;
}

Eigen::VectorXd point_mass(Eigen::Index n, Eigen::Index at) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v(at) = 1.0;
  return v;
}

// Per-round Frobenius mean of one run, holding the last value to `rounds`.
std::vector<double> held_series(const RunRecord& run, int rounds) {
  std::vector<double> out(rounds, 0.0);
  double last = 0.0;
  for (int r = 0; r < rounds; ++r) {
    if (r < static_cast<int>(run.frobenius.size())) {
      const auto& per_type = run.frobenius[r];
      last = std::accumulate(per_type.begin(), per_type.end(), 0.0) / per_type.size();
    }
    out[r] = last;
  }
  return out;
}

Verdict bell_numbers() {
  const std::vector<std::size_t> want{1, 2, 5, 15, 52, 203};
  const auto oracle = fixtures::bell_numbers(6);
  std::string got;
  bool ok = true;
  for (int d = 1; d <= 6; ++d) {
    const auto n = enumerate_structures(d).size();
    ok &= n == want[d - 1] && static_cast<long long>(n) == oracle[d];
    got += fmt::format("{}{}", d > 1 ? "," : "", n);
  }
  return {ok, "D=1..6 -> " + got};
}

Verdict matching_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 6), ints(0, 20);
  std::uniform_real_distribution<double> reals(0.0, 1.0);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::MatrixXd w(dim(rng), dim(rng));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        w(i, j) = trial % 2 ? static_cast<double>(ints(rng)) : reals(rng);
    const auto m = max_weight_matching(w);
    std::set<int> rows, cols;
    for (auto [r, c] : m) rows.insert(r), cols.insert(c);
    const bool valid = rows.size() == m.size() && cols.size() == m.size() &&
                       static_cast<Eigen::Index>(m.size()) == std::min(w.rows(), w.cols());
    // integer instances compare exactly; real ones up to summation order
    const double got = matching_weight(w, m), want = brute_force_matching(w);
    const bool equal = trial % 2 ? got == want : std::abs(got - want) <= 1e-12 * std::max(1.0, want);
    bad += !(valid && equal);
  }
  return {bad == 0, fmt::format("{} of 1000 matrices disagree with brute force", bad)};
}

Verdict waterfill_kkt() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logg(-4.0, 4.0), budget(0.0, 100.0);
  std::uniform_int_distribution<int> size(1, 16);
  double worst_level = 0.0, worst_budget = 0.0;
  int inactive_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> g(size(rng));
    for (auto& x : g) x = std::pow(10.0, logg(rng));
    const double b = budget(rng);
    const auto pw = waterfill(g, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      sum += pw.p[i];
      if (pw.p[i] > 0)
        worst_level = std::max(worst_level, std::abs(pw.p[i] + 1 / g[i] - pw.water_level) / pw.water_level);
      else if (1 / g[i] < pw.water_level * (1 - 1e-9))
        ++inactive_bad;
    }
    if (b > 0) worst_budget = std::max(worst_budget, std::abs(sum - b) / b);
  }
  const std::vector<double> hand{1.0, 0.5};
  const auto h = waterfill(hand, 3.0);
  const bool hand_ok = std::abs(h.p[0] - 2.0) <= 1e-12 && std::abs(h.p[1] - 1.0) <= 1e-12;
  return {worst_level <= 1e-9 && worst_budget <= 1e-9 && inactive_bad == 0 && hand_ok,
          fmt::format("max level error {:.2e}, max budget error {:.2e}, inactive violations {}, "
                      "[1,0.5]/3 -> [{}, {}]",
                      worst_level, worst_budget, inactive_bad, h.p[0], h.p[1])};
}

Verdict closed_forms() {
  const double kl = kl_gaussian(12, 3, 18, 3);
  const std::vector<double> x{1, 2, 3};
  const auto e = mle_gaussian(x);
  const bool ok = std::abs(kl - 2.0) <= 1e-12 && e.mu == 2.0 && e.sigma2 == 2.0 / 3.0;
  return {ok, fmt::format("KL = {:.15g}, MLE = ({}, {:.17g})", kl, e.mu, e.sigma2)};
}

Verdict stability_cross_check() {
  int mismatched = 0, escaped = 0, runs = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto s = fixtures::seeded(i % 2 ? "S2" : "S1", 5000 + i);
    PayoffModel m(s);
    const auto b = BeliefState::point_mass_truth(s);
    const auto chain = build_chain(b, m);
    std::vector<int> stable;
    for (int k = 0; k < static_cast<int>(chain.states.size()); ++k)
      if (scan_stable(chain.states[k], b, m)) stable.push_back(k);
    mismatched += chain.absorbing != stable;
    for (int k = 0; k < static_cast<int>(chain.states.size()); ++k) {
      std::mt19937_64 p(i * 131 + k), t(i * 131 + k + 7);
      const auto r = run_best_reply(chain.states[k], b, m, p, t);
      ++runs;
      escaped += !r.converged ||
                 !std::binary_search(stable.begin(), stable.end(), chain.index_of(r.structure));
    }
  }
  return {mismatched == 0 && escaped == 0,
          fmt::format("50 scenarios: {} absorbing-set mismatches; {} of {} best-reply runs outside the set",
                      mismatched, escaped, runs)};
}

Verdict markov_oracle() {
  struct Fx {
    Scenario s;
    int start;
  };
  std::vector<Fx> fx;
  int two_absorbing = 0;
  std::string two_example;
  for (std::uint64_t seed = 0; seed < 2000 && fx.size() < 10; ++seed) {
    const auto s = fixtures::seeded("S2", seed);
    PayoffModel m(s);
    auto chain = build_chain(BeliefState::point_mass_truth(s), m);
    if (chain.absorbing.size() < 2) continue;
    for (int start = 0; start < static_cast<int>(chain.states.size()); ++start) {
      const auto p = formation_probabilities(chain, point_mass(chain.states.size(), start));
      std::vector<int> reached;
      for (int a : chain.absorbing)
        if (p[a] > 0.02) reached.push_back(a);
      if (reached.size() < 2) continue;
      fx.push_back({s, start});
      if (reached.size() == 2) {
        ++two_absorbing;
        if (two_example.empty())
          two_example = fmt::format("{} -> {} {:.3f} / {} {:.3f}", chain.states[start].to_string(),
                                    chain.states[reached[0]].to_string(), p[reached[0]],
                                    chain.states[reached[1]].to_string(), p[reached[1]]);
      }
      break;
    }
  }
  int outside = 0, entries = 0;
  for (std::size_t f = 0; f < fx.size(); ++f) {
    PayoffModel m(fx[f].s);
    const auto b = BeliefState::point_mass_truth(fx[f].s);
    auto chain = build_chain(b, m);
    const auto p = formation_probabilities(chain, point_mass(chain.states.size(), fx[f].start));
    const int n = 10000;
    std::vector<int> hits(chain.states.size(), 0);
    std::mt19937_64 pr(f + 1), tie(f + 1001);
    for (int k = 0; k < n; ++k) ++hits[chain.index_of(run_best_reply(chain.states[fx[f].start], b, m, pr, tie).structure)];
    for (std::size_t j = 0; j < hits.size(); ++j) {
      const double freq = static_cast<double>(hits[j]) / n;
      ++entries;
      outside += std::abs(freq - p[j]) > 3.0 * std::sqrt(p[j] * (1 - p[j]) / n) + 1e-12;
    }
  }
  return {fx.size() == 10 && outside == 0 && two_absorbing > 0,
          fmt::format("{} fixtures, {} of {} probabilities outside 3 sigma; {} fixtures with exactly two "
                      "absorbing outcomes, e.g. {}",
                      fx.size(), outside, entries, two_absorbing, two_example)};
}

RunManifest sweep_manifest() {
  RunManifest m;
  m.settings = {"S1", "S2", "S3", "S4"};
  m.topologies = 100;
  m.repetitions = 30;
  m.seed = 1;
  return m;
}

std::vector<RegimeResult> sweep_results;

Verdict dominance() {
  const auto m = sweep_manifest();
  sweep_results = run_manifest(m);
  std::map<std::pair<std::string, int>, std::map<Regime, const RegimeResult*>> by_topology;
  for (const auto& r : sweep_results) by_topology[{r.setting, r.topology}][r.regime] = &r;
  int violations = 0, ir_violations = 0, skipped = 0;
  for (const auto& [key, regimes] : by_topology) {
    const auto* base = regimes.at(Regime::Baseline);
    const auto* full = regimes.at(Regime::FullInfo);
    const auto* social = regimes.at(Regime::SocialOptimal);
    if (social->skipped) {
      ++skipped;
      continue;
    }
    const double best = regime_total(*full, AggregateMode::BestStable);
    violations += !(social->total_rate >= best && best >= base->total_rate);
    for (std::size_t d = 0; d < base->per_drone.size(); ++d)
      ir_violations += full->per_drone[d] < base->per_drone[d];
  }
  const auto best = aggregate(sweep_results, m, AggregateMode::BestStable);
  std::string means;
  bool ordered = true;
  for (const auto& setting : m.settings) {
    std::map<Regime, double> mean;
    for (const auto& row : best)
      if (row.setting == setting) mean[row.regime] = row.mean;
    ordered &= mean[Regime::Baseline] < mean[Regime::FullInfo] &&
               mean[Regime::FullInfo] < mean[Regime::SocialOptimal];
    means += fmt::format(" {}: {:.4f} < {:.4f} < {:.4f};", setting, mean[Regime::Baseline],
                         mean[Regime::FullInfo], mean[Regime::SocialOptimal]);
  }
  return {violations == 0 && ir_violations == 0 && skipped == 0 && ordered,
          fmt::format("{} topologies, {} dominance violations, {} drones below baseline, {} skipped; "
                      "means{}",
                      by_topology.size(), violations, ir_violations, skipped, means)};
}

Verdict learning_convergence() {
  auto m = sweep_manifest();
  m.settings = {"S1"};
  m.regimes = {Regime::Proposed};
  m.max_rounds = 100;
  m.repetitions = 10;
  m.epsilon = 0.1;
  m.stop_on_convergence = false;
  const int rounds = m.max_rounds;

  auto run_types = [&](const std::string& types, int& zero_topologies) {
    m.types = types;
    const auto results = run_manifest(m);
    double area = 0.0;
    zero_topologies = 0;
    for (const auto& r : results) {
      double final_mean = 0.0;
      for (const auto& run : r.runs) {
        const auto series = held_series(run, rounds);
        final_mean += series.back() / r.runs.size();
        area += std::accumulate(series.begin(), series.end(), 0.0) / rounds;
      }
      zero_topologies += final_mean == 0.0;
    }
    return area / (results.size() * m.repetitions);
  };
  int zero3 = 0, zero6 = 0;
  const double mean3 = run_types("12:3,18:3", zero3);
  const double mean6 = run_types("12:6,18:6", zero6);
  return {zero3 >= 90 && mean6 > mean3,
          fmt::format("sigma 3: norm 0 at round 100 on {}/100 topologies, 100-round mean {:.4f}; "
                      "sigma 6: {}/100, mean {:.4f}",
                      zero3, mean3, zero6, mean6)};
}

Verdict best_reply_budget() {
  int total = 0, within = 0, worst = 0;
  for (const auto& r : sweep_results) {
    if (r.regime != Regime::FullInfo && r.regime != Regime::Proposed) continue;
    for (const auto& run : r.runs) {
      ++total;
      within += run.best_reply_moves <= 50;
      worst = std::max(worst, run.best_reply_moves);
    }
  }
  const double share = total ? static_cast<double>(within) / total : 0.0;
  return {total > 0 && share >= 0.95,
          fmt::format("{} of {} runs ({:.2f}%) within 50 moves; largest {}", within, total,
                      100 * share, worst)};
}

Verdict determinism() {
  RunManifest m;
  m.settings = {"S1", "S2", "S4"};
  m.topologies = 10;
  m.repetitions = 5;
  m.seed = 99;
  m.markov_audit = true;
  const auto root = fs::temp_directory_path() / "dronecoal_acceptance";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> trees;
  for (int threads : {1, 1, 4}) {
    m.threads = threads;
    const auto dir = root / std::to_string(trees.size());
    prepare_output_dir(dir);
    emit_outputs(run_manifest(m), m, dir);
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file() && e.path().filename() != "manifest.json")
        files[fs::relative(e.path(), dir).string()] = read_file(e.path());
    trees.push_back(std::move(files));
  }
  fs::remove_all(root);
  int csv = 0;
  for (const auto& [name, body] : trees[0]) csv += name.ends_with(".csv");
  return {trees[0] == trees[1] && trees[0] == trees[2] && csv >= 4,
          fmt::format("{} files ({} CSV) identical across two runs and a 4-thread run",
                      trees[0].size(), csv)};
}

}  // namespace

int main() {
  report(1, "partition enumeration", bell_numbers, 1.0);
  report(2, "matching oracle", matching_oracle, 10.0);
  report(3, "water-filling KKT", waterfill_kkt);
  report(4, "KL/MLE closed forms", closed_forms);
  report(5, "stability cross-check", stability_cross_check, 120.0);
  report(6, "Markov oracle", markov_oracle);
  report(7, "dominance chain", dominance, 3600.0);
  report(8, "learning convergence", learning_convergence);
  report(9, "best-reply convergence budget", best_reply_budget);
  report(10, "determinism", determinism);
  std::cout << (failures ? fmt::format("{} criteria failed\n", failures) : "all criteria passed\n");
  return failures ? 1 : 0;
}
