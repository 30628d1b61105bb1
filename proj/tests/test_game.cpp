#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "dronecoal/allocation.hpp"
#include "dronecoal/game.hpp"
#include "fixtures.hpp"

using namespace dronecoal;

namespace {

// Two drones whose users sit under the other drone: pooling lets each
// serve the nearby users, and both gain.
Scenario swapped_pair() {
  return fixtures::build({{0, 0, 2, 1}, {1500, 0, 2, 1}},
                         {{1490, 10, 0}, {1510, -10, 0}, {10, 10, 1}, {-10, -10, 1}});
}

// Far-apart drones serving their own users.
Scenario separated_pair() {
  return fixtures::build({{0, 0, 2, 1}, {3500, 3500, 2, 2}},
                         {{10, 0, 0}, {0, 10, 0}, {3510, 3500, 1}, {3500, 3510, 1}});
}

BeliefState random_beliefs(int drones, const Scenario& s, std::mt19937_64& rng) {
  auto b = BeliefState::point_mass_truth(s);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < drones; ++i)
    for (int j = 0; j < drones; ++j) {
      if (i == j) continue;
      std::vector<double> row(s.type_set.size());
      double sum = 0;
      for (auto& x : row) sum += x = u(rng);
      for (auto& x : row) x /= sum;
      row.back() = 1.0;
      for (std::size_t k = 0; k + 1 < row.size(); ++k) row.back() -= row[k];
      if (row.back() < 0) row.back() = 0;
      b.set_row(i, j, row);
    }
  return b;
}

// Deviation scan written from the definition.
bool scan_stable(const CoalitionStructure& w, const BeliefState& b, PayoffModel& m) {
  const int n = w.num_drones();
  for (int d = 0; d < n; ++d) {
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
      for (int j : t)
        if (m.expected_payoff(j, joined, b) < m.expected_payoff(j, t, b)) consent = false;
      if (consent) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("structure counts follow the Bell numbers") {
  const auto bell = fixtures::bell_numbers(8);
  CHECK(bell == std::vector<long long>{1, 1, 2, 5, 15, 52, 203, 877, 4140});
  for (int d = 0; d <= 8; ++d) {
    const auto all = enumerate_structures(d);
    CHECK(static_cast<long long>(all.size()) == bell[d]);
    std::set<std::string> names;
    for (const auto& w : all) names.insert(w.to_string());
    CHECK(static_cast<long long>(names.size()) == bell[d]);
  }
  CHECK(enumerate_structures(4).size() == 15);
  CHECK_THROWS_AS(enumerate_structures(9), std::invalid_argument);
  CHECK(enumerate_structures(9, 9).size() == 21147);
}

TEST_CASE("structure notation and canonical form") {
  const CoalitionStructure w({{3, 1}, {0}, {2}});
  CHECK(w.to_string() == "{0}{1,3}{2}");
  CHECK(CoalitionStructure::parse("{0}{1,3}{2}") == w);
  CHECK(CoalitionStructure::parse(" {2} {1,3} {0} ") == w);
  CHECK(w.block_of(3) == 1);
  CHECK(w.with_move(2, 1).to_string() == "{0}{1,2,3}");
  CHECK(w.with_move(3, -1).to_string() == "{0}{1}{2}{3}");
  CHECK(CoalitionStructure::singletons(3).to_string() == "{0}{1}{2}");
  CHECK(CoalitionStructure::grand(3).to_string() == "{0,1,2}");
  CHECK_THROWS_AS(CoalitionStructure({{0, 1}, {1}}), std::invalid_argument);
  CHECK_THROWS_AS(CoalitionStructure({{0}, {2}}), std::invalid_argument);
  CHECK_THROWS_AS(CoalitionStructure::parse("{0}{1"), std::invalid_argument);
  for (const auto& s : enumerate_structures(5))
    CHECK(CoalitionStructure::parse(s.to_string()) == s);
}

TEST_CASE("joint belief") {
  BeliefState b(3, 2);
  CHECK(joint_belief(0, {}, {}, b) == 1.0);
  const std::vector<int> members{1, 2};
  for (int t1 = 0; t1 < 2; ++t1)
    for (int t2 = 0; t2 < 2; ++t2) {
      const std::vector<int> types{t1, t2};
      CHECK(joint_belief(0, members, types, b) == doctest::Approx(0.25).epsilon(1e-15));
    }
  const std::vector<double> r1{0.7, 0.3}, r2{0.4, 0.6};
  b.set_row(0, 1, r1);
  b.set_row(0, 2, r2);
  const std::vector<int> t12{0, 1};
  CHECK(joint_belief(0, members, t12, b) == doctest::Approx(0.42).epsilon(1e-15));
  const std::vector<int> self{0};
  const std::vector<int> t0{0};
  CHECK_THROWS_AS(joint_belief(0, self, t0, b), std::invalid_argument);
  const std::vector<double> off{0.7, 0.4};
  CHECK_THROWS_AS(b.set_row(0, 1, off), std::invalid_argument);
}

TEST_CASE("joint beliefs sum to one over the type space") {
  const auto s = fixtures::seeded("S2", 4, "10:2,14:2,20:2");
  std::mt19937_64 rng(2);
  const auto b = random_beliefs(4, s, rng);
  for (int obs = 0; obs < 4; ++obs) {
    std::vector<int> others;
    for (int j = 0; j < 4; ++j)
      if (j != obs) others.push_back(j);
    double total = 0.0;
    std::vector<int> t(3, 0);
    for (int code = 0; code < 27; ++code) {
      t = {code % 3, code / 3 % 3, code / 9};
      total += joint_belief(obs, others, t, b);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("belief state basics") {
  const auto s = fixtures::seeded("S1", 3);
  const auto u = BeliefState::uniform(s);
  const auto t = BeliefState::point_mass_truth(s);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double su = 0, st = 0;
      for (int k = 0; k < 2; ++k) su += u.prob(i, j, k), st += t.prob(i, j, k);
      CHECK(su == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(st == 1.0);
      if (i == j) CHECK(u.prob(i, i, s.type_index(s.drones[i].true_type)) == 1.0);
      else CHECK(u.prob(i, j, 0) == 0.5);
      CHECK(t.argmax(i, j) == s.type_index(s.drones[j].true_type));
    }
  CHECK(u.fingerprint() != t.fingerprint());
  CHECK(BeliefState::uniform(s).fingerprint() == u.fingerprint());
}

TEST_CASE("expected payoff") {
  const auto s = fixtures::seeded("S1", 42);
  PayoffModel m(s);
  const auto base = baseline_rates(s);
  const auto uniform = BeliefState::uniform(s);
  const auto truth = BeliefState::point_mass_truth(s);

  for (int d = 0; d < 3; ++d) CHECK(m.expected_payoff(d, {d}, uniform) == doctest::Approx(base[d]).epsilon(1e-12));

  for (const Coalition& c : {Coalition{0, 1}, Coalition{1, 2}, Coalition{0, 1, 2}}) {
    std::vector<double> powers;
    for (int d : c) powers.push_back(s.true_power(d));
    const auto r = evaluate_coalition(c, s, powers);
    for (int d : c) {
      CHECK(m.expected_payoff(d, c, truth) == r.per_drone_rate.at(d));
      CHECK(m.full_information_payoff(d, c) == r.per_drone_rate.at(d));
    }
  }

  // two members, uniform over two types: the mean of two conditional rates
  const Coalition c{0, 1};
  double mean = 0.0;
  for (double mu1 : {12.0, 18.0}) {
    const std::vector<double> p{s.true_power(0), mu1};
    mean += 0.5 * evaluate_coalition(c, s, p).per_drone_rate.at(0);
  }
  CHECK(m.expected_payoff(0, c, uniform) == doctest::Approx(mean).epsilon(1e-12));
  CHECK(expected_payoff(0, c, uniform, m) == doctest::Approx(mean).epsilon(1e-12));

  // another drone's view of drone 0 in the same coalition
  double seen = 0.0;
  for (double mu0 : {12.0, 18.0}) {
    const std::vector<double> p{mu0, s.true_power(1)};
    seen += 0.5 * evaluate_coalition(c, s, p).per_drone_rate.at(0);
  }
  CHECK(m.believed_payoff(1, 0, c, uniform) == doctest::Approx(seen).epsilon(1e-12));
  CHECK_THROWS_AS(m.expected_payoff(2, c, uniform), std::invalid_argument);
}

TEST_CASE("type-profile cap") {
  const auto s = fixtures::seeded("S1", 42);
  PayoffModel m(s, PayoffLimits{1});
  const auto u = BeliefState::uniform(s);
  CHECK_NOTHROW(m.expected_payoff(0, {0}, u));
  CHECK_THROWS_AS(m.expected_payoff(0, {0, 1}, u), std::length_error);
}

TEST_CASE("Nash stability on constructed fixtures") {
  {
    const auto s = separated_pair();
    PayoffModel m(s);
    const auto b = BeliefState::point_mass_truth(s);
    CHECK(is_nash_stable(CoalitionStructure::singletons(2), b, m).stable);
  }
  {
    const auto s = swapped_pair();
    PayoffModel m(s);
    const auto b = BeliefState::point_mass_truth(s);
    const Coalition both{0, 1};
    CHECK(m.expected_payoff(0, both, b) > m.expected_payoff(0, {0}, b));
    CHECK(m.expected_payoff(1, both, b) > m.expected_payoff(1, {1}, b));
    const auto v = is_nash_stable(CoalitionStructure::singletons(2), b, m);
    CHECK_FALSE(v.stable);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->drone == 0);
    CHECK(v.witness->target == Coalition{1});
    CHECK(is_nash_stable(CoalitionStructure::grand(2), b, m).stable);
  }
}

TEST_CASE("Nash stability agrees with a deviation scan") {
  std::mt19937_64 rng(13);
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto s = fixtures::seeded(seed % 2 ? "S2" : "S1", seed);
    PayoffModel m(s);
    for (int variant = 0; variant < 3; ++variant) {
      const auto b = variant == 0   ? BeliefState::point_mass_truth(s)
                     : variant == 1 ? BeliefState::uniform(s)
                                    : random_beliefs(s.num_drones(), s, rng);
      for (const auto& w : enumerate_structures(s.num_drones()))
        CHECK(is_nash_stable(w, b, m).stable == scan_stable(w, b, m));
    }
  }
}

TEST_CASE("best reply outcomes") {
  const auto s = swapped_pair();
  PayoffModel m(s);
  const auto b = BeliefState::point_mass_truth(s);
  const auto out = best_reply_outcomes(CoalitionStructure::singletons(2), 0, b, m);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == CoalitionStructure::grand(2));
  CHECK(best_reply_outcomes(CoalitionStructure::grand(2), 1, b, m).empty());
}

TEST_CASE("Bayesian core, trivial cases") {
  const auto one = fixtures::build({{0, 0, 2, 1}}, {{10, 0, 0}, {0, 10, 0}});
  PayoffModel m1(one);
  const auto b1 = BeliefState::uniform(one);
  CHECK(bayesian_core(b1, m1, CoreKind::Weak).in_core);
  CHECK(bayesian_core(b1, m1, CoreKind::Strong).in_core);

  // drone 0 carries more power and would donate it to drone 1: it blocks alone
  const auto s = fixtures::build({{0, 0, 2, 2}, {3500, 3500, 2, 1}},
                                 {{10, 0, 0}, {0, 10, 0}, {3510, 3500, 1}, {3500, 3510, 1}});
  PayoffModel m(s);
  const auto truth = BeliefState::point_mass_truth(s);
  const Coalition grand{0, 1};
  REQUIRE(m.expected_payoff(0, {0}, truth) > m.expected_payoff(0, grand, truth));
  const auto v = bayesian_core(truth, m, CoreKind::Weak);
  CHECK_FALSE(v.in_core);
  CHECK(v.blocking == Coalition{0});
  CHECK_FALSE(bayesian_core(truth, m, CoreKind::Strong).in_core);

  const auto big = fixtures::seeded("S4", 1);
  PayoffModel mb(big);
  CHECK_THROWS_AS(bayesian_core(BeliefState::uniform(big), mb, CoreKind::Weak, 5),
                  std::invalid_argument);
}

TEST_CASE("strong core membership implies weak core membership") {
  std::mt19937_64 rng(21);
  int weak_in = 0, strong_in = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = fixtures::seeded(seed % 2 ? "S2" : "S1", 100 + seed);
    PayoffModel m(s);
    for (int variant = 0; variant < 2; ++variant) {
      const auto b = variant ? random_beliefs(s.num_drones(), s, rng) : BeliefState::uniform(s);
      const bool weak = bayesian_core(b, m, CoreKind::Weak).in_core;
      const bool strong = bayesian_core(b, m, CoreKind::Strong).in_core;
      if (strong) CHECK(weak);
      weak_in += weak;
      strong_in += strong;

      // weak verdict against a direct subset scan
      const int n = s.num_drones();
      Coalition grand(n);
      for (int i = 0; i < n; ++i) grand[i] = i;
      bool blocked = false;
      for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        Coalition sub;
        for (int i = 0; i < n; ++i)
          if (mask >> i & 1) sub.push_back(i);
        bool all = true;
        for (int d : sub)
          if (m.expected_payoff(d, sub, b) < m.expected_payoff(d, grand, b)) all = false;
        blocked |= all;
      }
      CHECK(weak == !blocked);
    }
  }
  CHECK(strong_in <= weak_in);
}
