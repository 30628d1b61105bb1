#include "dronecoal/game.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "dronecoal/allocation.hpp"

namespace dronecoal {

CoalitionMask to_mask(std::span<const int> coalition) {
  CoalitionMask mask = 0;
  for (int d : coalition) {
    if (d < 0 || d >= 32) throw std::out_of_range("coalition mask holds drones 0..31");
    mask |= CoalitionMask{1} << d;
  }
  return mask;
}

Coalition from_mask(CoalitionMask mask) {
  Coalition c;
  for (int d = 0; mask != 0; ++d, mask >>= 1)
    if (mask & 1U) c.push_back(d);
  return c;
}

// ---------------------------------------------------------------------------
// CoalitionStructure

CoalitionStructure::CoalitionStructure(std::vector<Coalition> blocks) {
  int total = 0;
  for (auto& b : blocks) {
    if (b.empty()) throw std::invalid_argument("coalition structure: empty block");
    std::sort(b.begin(), b.end());
    total += static_cast<int>(b.size());
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const Coalition& a, const Coalition& b) { return a.front() < b.front(); });
  owner_.assign(total, -1);
  for (int k = 0; k < static_cast<int>(blocks.size()); ++k) {
    for (int d : blocks[k]) {
      if (d < 0 || d >= total || owner_[d] != -1)
        throw std::invalid_argument("coalition structure: blocks must partition 0..D-1");
      owner_[d] = k;
    }
  }
  blocks_ = std::move(blocks);
}

CoalitionStructure CoalitionStructure::singletons(int drones) {
  std::vector<Coalition> blocks;
  for (int d = 0; d < drones; ++d) blocks.push_back({d});
  return CoalitionStructure(std::move(blocks));
}

CoalitionStructure CoalitionStructure::grand(int drones) {
  if (drones == 0) return CoalitionStructure();
  Coalition all(drones);
  for (int d = 0; d < drones; ++d) all[d] = d;
  return CoalitionStructure({all});
}

CoalitionStructure CoalitionStructure::parse(std::string_view text) {
  std::vector<Coalition> blocks;
  std::size_t i = 0;
  const auto fail = [&] {
    throw std::invalid_argument("bad coalition structure '" + std::string(text) + "'");
  };
  while (i < text.size()) {
    if (text[i] == ' ') {
      ++i;
      continue;
    }
    if (text[i] != '{') fail();
    const auto close = text.find('}', i);
    if (close == std::string_view::npos) fail();
    Coalition block;
    std::string inner(text.substr(i + 1, close - i - 1));
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        block.push_back(std::stoi(item, &used));
        if (used != item.size()) fail();
      } catch (const std::logic_error&) {
        fail();
      }
    }
    blocks.push_back(std::move(block));
    i = close + 1;
  }
  return CoalitionStructure(std::move(blocks));
}

CoalitionStructure CoalitionStructure::with_move(int drone, int target) const {
  const int from = block_of(drone);
  if (target == from) return *this;
  std::vector<Coalition> blocks = blocks_;
  if (target >= 0) blocks.at(target).push_back(drone);
  else blocks.push_back({drone});
  auto& src = blocks[from];
  src.erase(std::find(src.begin(), src.end(), drone));
  if (src.empty()) blocks.erase(blocks.begin() + from);
  return CoalitionStructure(std::move(blocks));
}

std::string CoalitionStructure::to_string() const {
  std::string out;
  for (const auto& b : blocks_) {
    out += '{';
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(b[i]);
    }
    out += '}';
  }
  return out;
}

std::vector<CoalitionStructure> enumerate_structures(int d, int cap) {
  if (d < 0) throw std::invalid_argument("enumerate_structures: negative drone count");
  if (d > cap)
    throw std::invalid_argument("enumerate_structures: " + std::to_string(d) +
                                " drones exceeds the enumeration cap of " +
                                std::to_string(cap) + "; raise the cap explicitly");
  std::vector<CoalitionStructure> out;
  if (d == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<int> label(d, 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == d) {
      std::vector<Coalition> blocks(used);
      for (int k = 0; k < d; ++k) blocks[label[k]].push_back(k);
      out.emplace_back(std::move(blocks));
      return;
    }
    for (int b = 0; b <= used; ++b) {
      label[i] = b;
      rec(i + 1, std::max(used, b + 1));
    }
  };
  label[0] = 0;
  rec(1, 1);
  return out;
}

// ---------------------------------------------------------------------------
// BeliefState

BeliefState::BeliefState(int drones, int types)
    : drones_(drones), types_(types),
      table_(static_cast<std::size_t>(drones) * drones * types, 1.0 / types) {
  if (drones < 0 || types < 1)
    throw std::invalid_argument("BeliefState: need >= 0 drones and >= 1 type");
}

BeliefState BeliefState::uniform(const Scenario& scenario) {
  BeliefState b(scenario.num_drones(), static_cast<int>(scenario.type_set.size()));
  std::vector<double> point(b.types_, 0.0);
  for (int d = 0; d < b.drones_; ++d) {
    std::fill(point.begin(), point.end(), 0.0);
    point[scenario.type_index(scenario.drones[d].true_type)] = 1.0;
    b.set_row(d, d, point);
  }
  return b;
}

BeliefState BeliefState::point_mass_truth(const Scenario& scenario) {
  BeliefState b(scenario.num_drones(), static_cast<int>(scenario.type_set.size()));
  std::vector<double> point(b.types_, 0.0);
  for (int j = 0; j < b.drones_; ++j) {
    std::fill(point.begin(), point.end(), 0.0);
    point[scenario.type_index(scenario.drones[j].true_type)] = 1.0;
    for (int d = 0; d < b.drones_; ++d) b.set_row(d, j, point);
  }
  return b;
}

void BeliefState::set_row(int observer, int observed, std::span<const double> probs) {
  if (observer < 0 || observer >= drones_ || observed < 0 || observed >= drones_)
    throw std::out_of_range("BeliefState::set_row: drone out of range");
  if (static_cast<int>(probs.size()) != types_)
    throw std::invalid_argument("BeliefState::set_row: wrong number of types");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("BeliefState::set_row: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("BeliefState::set_row: probabilities must sum to 1");
  std::copy(probs.begin(), probs.end(), table_.begin() + offset(observer, observed));
}

int BeliefState::argmax(int observer, int observed) const {
  const auto r = row(observer, observed);
  return static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
}

std::uint64_t BeliefState::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : table_) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

double joint_belief(int observer, std::span<const int> members,
                    std::span<const int> type_indices, const BeliefState& beliefs) {
  if (members.size() != type_indices.size())
    throw std::invalid_argument("joint_belief: one type per member required");
  double p = 1.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i] == observer)
      throw std::invalid_argument("joint_belief: members must exclude the observer");
    p *= beliefs.prob(observer, members[i], type_indices[i]);
  }
  return p;
}

// ---------------------------------------------------------------------------
// PayoffModel

PayoffModel::PayoffModel(const Scenario& scenario, PayoffLimits limits)
    : scenario_(&scenario), limits_(limits) {
  if (scenario.num_drones() > 32)
    throw std::invalid_argument("PayoffModel supports at most 32 drones");
  if (scenario.type_set.size() > 16)
    throw std::invalid_argument("PayoffModel supports at most 16 types");
  for (const auto& d : scenario.drones)
    true_type_index_.push_back(scenario.type_index(d.true_type));
}

const std::vector<double>& PayoffModel::member_rates(const Coalition& coalition,
                                                     std::span<const int> type_indices) {
  if (coalition.size() > 16)
    throw std::invalid_argument("member_rates: coalition larger than 16 drones");
  Key key{to_mask(coalition), 0};
  for (std::size_t i = 0; i < coalition.size(); ++i)
    key.profile |= static_cast<std::uint64_t>(type_indices[i]) << (4 * i);
  if (auto it = rates_.find(key); it != rates_.end()) return it->second;

  std::vector<double> powers(coalition.size());
  for (std::size_t i = 0; i < coalition.size(); ++i)
    powers[i] = scenario_->type_set.at(type_indices[i]).mu;
  const auto alloc = evaluate_coalition(coalition, *scenario_, powers);
  std::vector<double> rates(coalition.size());
  for (std::size_t i = 0; i < coalition.size(); ++i)
    rates[i] = alloc.per_drone_rate.at(coalition[i]);
  return rates_.emplace(key, std::move(rates)).first->second;
}

double PayoffModel::believed_payoff(int evaluator, int target, const Coalition& coalition,
                                    const BeliefState& beliefs) {
  const auto pos_of = [&](int d) {
    const auto it = std::find(coalition.begin(), coalition.end(), d);
    if (it == coalition.end())
      throw std::invalid_argument("believed_payoff: drone is not a coalition member");
    return static_cast<std::size_t>(it - coalition.begin());
  };
  const auto evaluator_pos = pos_of(evaluator);
  const auto target_pos = pos_of(target);

  if (beliefs.table() != cached_table_) {
    cached_table_ = beliefs.table();
    believed_.clear();
  }
  const BeliefKey bkey{evaluator, target, to_mask(coalition)};
  if (auto it = believed_.find(bkey); it != believed_.end()) return it->second;

  const int m = beliefs.num_types();
  const auto others = coalition.size() - 1;
  double profiles = 1.0;
  for (std::size_t i = 0; i < others; ++i) profiles *= m;
  if (profiles > static_cast<double>(limits_.max_type_profiles))
    throw std::length_error("believed_payoff: type space of " +
                            std::to_string(static_cast<long long>(profiles)) +
                            " profiles exceeds the configured cap");

  std::vector<int> types(coalition.size(), 0);
  types[evaluator_pos] = true_type_index_.at(evaluator);
  double total = 0.0;
  while (true) {
    double weight = 1.0;
    for (std::size_t i = 0; i < coalition.size() && weight != 0.0; ++i)
      if (i != evaluator_pos) weight *= beliefs.prob(evaluator, coalition[i], types[i]);
    if (weight != 0.0) total += weight * member_rates(coalition, types)[target_pos];
    // Odometer over every member except the evaluator.
    std::size_t i = 0;
    for (; i < coalition.size(); ++i) {
      if (i == evaluator_pos) continue;
      if (++types[i] < m) break;
      types[i] = 0;
    }
    if (i == coalition.size()) break;
  }
  believed_.emplace(bkey, total);
  return total;
}

double PayoffModel::full_information_payoff(int drone, const Coalition& coalition) {
  std::vector<int> types(coalition.size());
  std::size_t pos = coalition.size();
  for (std::size_t i = 0; i < coalition.size(); ++i) {
    types[i] = true_type_index_.at(coalition[i]);
    if (coalition[i] == drone) pos = i;
  }
  if (pos == coalition.size())
    throw std::invalid_argument("full_information_payoff: drone is not a member");
  return member_rates(coalition, types)[pos];
}

double PayoffModel::full_information_total(const Coalition& coalition) {
  std::vector<int> types(coalition.size());
  for (std::size_t i = 0; i < coalition.size(); ++i)
    types[i] = true_type_index_.at(coalition[i]);
  double total = 0.0;
  for (double r : member_rates(coalition, types)) total += r;
  return total;
}

double expected_payoff(int observer, const Coalition& coalition,
                       const BeliefState& beliefs, PayoffModel& model) {
  return model.expected_payoff(observer, coalition, beliefs);
}

// ---------------------------------------------------------------------------
// Preferences and stability

ProposerView evaluate_options(const CoalitionStructure& structure, int proposer,
                              const BeliefState& beliefs, PayoffModel& model) {
  ProposerView view;
  const int own = structure.block_of(proposer);
  const auto& blocks = structure.blocks();
  view.current_payoff = model.expected_payoff(proposer, blocks[own], beliefs);

  for (int k = 0; k < static_cast<int>(blocks.size()); ++k) {
    if (k == own) continue;
    MoveOption opt;
    opt.target_block = k;
    opt.joined = blocks[k];
    opt.joined.insert(std::upper_bound(opt.joined.begin(), opt.joined.end(), proposer),
                      proposer);
    opt.proposer_payoff = model.expected_payoff(proposer, opt.joined, beliefs);
    for (int j : blocks[k]) {
      if (model.expected_payoff(j, opt.joined, beliefs) <
          model.expected_payoff(j, blocks[k], beliefs)) {
        opt.accepted = false;
        break;
      }
    }
    view.options.push_back(std::move(opt));
  }
  if (blocks[own].size() > 1) {
    MoveOption alone;
    alone.joined = {proposer};
    alone.proposer_payoff = model.expected_payoff(proposer, alone.joined, beliefs);
    view.options.push_back(std::move(alone));
  }
  return view;
}

std::vector<CoalitionStructure> best_reply_outcomes(const CoalitionStructure& structure,
                                                    int proposer,
                                                    const BeliefState& beliefs,
                                                    PayoffModel& model, VetoRule rule) {
  const auto view = evaluate_options(structure, proposer, beliefs, model);
  const bool need_consent = rule == VetoRule::NextBest;
  double best = view.current_payoff;
  bool any = false;
  for (const auto& opt : view.options) {
    if (need_consent && !opt.accepted) continue;
    if (opt.proposer_payoff > best || (any && opt.proposer_payoff == best)) {
      best = opt.proposer_payoff;
      any = true;
    }
  }
  std::vector<CoalitionStructure> outcomes;
  if (!any) return outcomes;
  for (const auto& opt : view.options) {
    if (need_consent && !opt.accepted) continue;
    if (opt.proposer_payoff != best) continue;
    outcomes.push_back(opt.accepted ? structure.with_move(proposer, opt.target_block)
                                    : structure);
  }
  return outcomes;
}

StabilityVerdict is_nash_stable(const CoalitionStructure& structure,
                                const BeliefState& beliefs, PayoffModel& model) {
  for (int d = 0; d < structure.num_drones(); ++d) {
    const auto view = evaluate_options(structure, d, beliefs, model);
    for (const auto& opt : view.options) {
      if (opt.accepted && opt.proposer_payoff > view.current_payoff) {
        Deviation dev{d, {}};
        if (opt.target_block >= 0) dev.target = structure.blocks()[opt.target_block];
        return {false, dev};
      }
    }
  }
  return {};
}

CoreVerdict bayesian_core(const BeliefState& beliefs, PayoffModel& model, CoreKind kind,
                          int cap) {
  const int n = model.scenario().num_drones();
  if (n > cap)
    throw std::invalid_argument("bayesian_core: " + std::to_string(n) +
                                " drones exceeds the enumeration cap");
  const Coalition grand = CoalitionStructure::grand(n).blocks().empty()
                              ? Coalition{}
                              : CoalitionStructure::grand(n).blocks().front();
  const CoalitionMask full = n == 32 ? ~CoalitionMask{0} : (CoalitionMask{1} << n) - 1;

  std::vector<CoalitionMask> subsets;
  for (CoalitionMask s = 1; s < full; ++s) subsets.push_back(s);
  std::stable_sort(subsets.begin(), subsets.end(), [](CoalitionMask a, CoalitionMask b) {
    return std::popcount(a) < std::popcount(b);
  });

  for (CoalitionMask s : subsets) {
    const Coalition members = from_mask(s);
    bool weak_block = true;
    for (int d : members) {
      if (model.expected_payoff(d, members, beliefs) <
          model.expected_payoff(d, grand, beliefs)) {
        weak_block = false;
        break;
      }
    }
    bool blocks = weak_block;
    if (!blocks && kind == CoreKind::Strong) {
      for (int d : members) {
        bool all_prefer = true;
        for (int j : members) {
          if (model.believed_payoff(d, j, members, beliefs) <
              model.believed_payoff(d, j, grand, beliefs)) {
            all_prefer = false;
            break;
          }
        }
        if (all_prefer) {
          blocks = true;
          break;
        }
      }
    }
    if (blocks) return {false, members};
  }
  return {};
}

}  // namespace dronecoal
