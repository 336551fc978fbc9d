#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "storegrid/generators.hpp"
#include "storegrid/parallel.hpp"
#include "storegrid/rng.hpp"
#include "storegrid/trajectory.hpp"

namespace storegrid {

/// Terminal reward weights. Discounting is fixed at 1.
struct RewardSpec {
  double w_items = 1.0;
  double w_checkout = 0.5;
  double w_budget = 0.5;
  double w_wrong = 0.25;
  int horizon = 0;  // 0: four times the TSP trajectory length

  void validate() const {
    if (w_items < 0 || w_checkout < 0 || w_budget < 0 || w_wrong < 0)
      throw ValidationError("reward weights must be non-negative");
    if (horizon < 0) throw ValidationError("horizon must be non-negative");
  }
  double default_min_reward() const { return w_items + w_checkout; }
};

inline double completion_fraction(int collected, int basket_size) {
  return basket_size == 0 ? 1.0 : static_cast<double>(collected) / basket_size;
}

inline double budget_term(const RewardSpec& spec, const Basket& basket, int steps) {
  if (!basket.budget) return 0.0;
  const double b = *basket.budget;
  return spec.w_budget * std::max(0.0, 1.0 - std::abs(steps - b) / b);
}

/// Reward of an ended episode: item completion, wrong-pickup penalty,
/// correct checkout, and closeness to the step budget when one is set. An
/// empty basket counts as fully collected.
inline double terminal_reward(const EpisodeSummary& s, const RewardSpec& spec, const Basket& basket) {
  const bool correct = s.checked_out && s.checkout == basket.checkout;
  return spec.w_items * completion_fraction(s.collected, s.basket_size) - spec.w_wrong * s.wrong +
         spec.w_checkout * (correct ? 1.0 : 0.0) + budget_term(spec, basket, s.steps);
}

/// Soft-optimal, time-indexed policy over (cell, heading, remaining items).
/// Stores the soft value V_t(s) for every slice; action probabilities are
/// exp((Q_t(s,a) - V_t(s)) / tau).
class SoftPolicy {
 public:
  SoftPolicy(const Layout& layout, Basket basket, RewardSpec spec, double tau, int horizon)
      : layout_(&layout), basket_(std::move(basket)), spec_(spec), tau_(tau), horizon_(horizon) {
    walk_index_.assign(static_cast<std::size_t>(layout.cell_count()), -1);
    for (Cell c : layout.walkable_cells()) {
      walk_index_[static_cast<std::size_t>(layout.index(c))] = static_cast<int>(walk_cells_.size());
      walk_cells_.push_back(c);
    }
    masks_ = 1u << basket_.items.size();
    states_ = walk_cells_.size() * 4 * masks_;
    build_transitions();
  }

  const Layout& layout() const { return *layout_; }
  const Basket& basket() const { return basket_; }
  const RewardSpec& spec() const { return spec_; }
  double tau() const { return tau_; }
  int horizon() const { return horizon_; }
  std::size_t state_count() const { return states_; }
  std::uint32_t full_mask() const { return masks_ - 1; }

  std::size_t state_index(AgentState s, std::uint32_t remaining) const {
    const int w = walk_index_.at(static_cast<std::size_t>(layout_->index(s.cell)));
    if (w < 0) throw ValidationError("state cell " + to_string(s.cell) + " is not walkable");
    return (static_cast<std::size_t>(w) * 4 + static_cast<std::size_t>(s.heading)) * masks_ + remaining;
  }
  AgentState state_at(std::size_t idx, std::uint32_t* remaining = nullptr) const {
    if (remaining) *remaining = static_cast<std::uint32_t>(idx % masks_);
    idx /= masks_;
    return {walk_cells_[idx / 4], static_cast<Heading>(idx % 4)};
  }

  double value(int t, AgentState s, std::uint32_t remaining) const {
    return values_.at(static_cast<std::size_t>(t) * states_ + state_index(s, remaining));
  }

  /// Q_t(s, a): immediate reward plus the value of what follows.
  double q_value(int t, std::size_t s, Action a) const {
    const Transition& tr = transitions_[(s / masks_) * 4 + static_cast<std::size_t>(a)];
    const std::uint32_t mask = static_cast<std::uint32_t>(s % masks_);
    switch (tr.kind) {
      case Transition::Kind::checkout:
        return terminal_value(mask, tr.target == basket_.checkout, t + 1);
      case Transition::Kind::shelf: {
        const int pos = item_position(tr.target);
        if (pos >= 0 && (mask >> pos) & 1u)
          return slice_value(t + 1, tr.next * masks_ + (mask & ~(1u << pos)));
        return -spec_.w_wrong + slice_value(t + 1, tr.next * masks_ + mask);
      }
      case Transition::Kind::none: break;
    }
    return slice_value(t + 1, tr.next * masks_ + mask);
  }

  std::array<double, 4> action_probabilities(int t, std::size_t s) const {
    std::array<double, 4> p{};
    const double v = slice_value(t, s);
    for (Action a : kActions)
      p[static_cast<std::size_t>(a)] = std::exp((q_value(t, s, a) - v) / tau_);
    return p;
  }
  std::array<double, 4> action_probabilities(int t, AgentState s, std::uint32_t remaining) const {
    return action_probabilities(t, state_index(s, remaining));
  }

  /// Largest |V_t(s) - tau log sum_a exp(Q_t(s,a)/tau)| over all slices.
  double bellman_residual() const {
    double worst = 0.0;
    for (int t = 0; t < horizon_; ++t)
      for (std::size_t s = 0; s < states_; ++s) worst = std::max(worst, std::abs(slice_value(t, s) - backup(t, s)));
    for (std::size_t s = 0; s < states_; ++s) {
      std::uint32_t mask = 0;
      state_at(s, &mask);
      worst = std::max(worst, std::abs(slice_value(horizon_, s) - timeout_value(mask)));
    }
    return worst;
  }

  /// Backward induction from the horizon.
  void solve() {
    values_.assign(static_cast<std::size_t>(horizon_ + 1) * states_, 0.0);
    for (std::size_t s = 0; s < states_; ++s) values_[static_cast<std::size_t>(horizon_) * states_ + s] =
        timeout_value(static_cast<std::uint32_t>(s % masks_));
    for (int t = horizon_ - 1; t >= 0; --t) {
      for (std::size_t s = 0; s < states_; ++s) {
        const double v = backup(t, s);
        if (!std::isfinite(v)) {
          std::uint32_t mask = 0;
          const AgentState st = state_at(s, &mask);
          throw RuntimeError("non-finite soft value at t=" + std::to_string(t) + " cell " + to_string(st.cell) +
                             " heading " + std::string(1, heading_char(st.heading)) + " mask " +
                             std::to_string(mask));
        }
        values_[static_cast<std::size_t>(t) * states_ + s] = v;
      }
    }
  }

  const std::vector<double>& raw_values() const { return values_; }
  std::vector<double>& raw_values() { return values_; }

 private:
  struct Transition {
    enum class Kind : std::uint8_t { none, shelf, checkout };
    std::size_t next = 0;  // (walk index * 4 + heading)
    Kind kind = Kind::none;
    int target = -1;
  };

  void build_transitions() {
    transitions_.resize(walk_cells_.size() * 4 * 4);
    for (std::size_t w = 0; w < walk_cells_.size(); ++w) {
      for (Heading h : kHeadings) {
        for (Action a : kActions) {
          const StepResult r = apply_action(*layout_, {walk_cells_[w], h}, a);
          Transition tr;
          const int nw = walk_index_[static_cast<std::size_t>(layout_->index(r.next.cell))];
          tr.next = static_cast<std::size_t>(nw) * 4 + static_cast<std::size_t>(r.next.heading);
          if (r.event == StepEvent::pickup) tr.kind = Transition::Kind::shelf;
          if (r.event == StepEvent::checkout) tr.kind = Transition::Kind::checkout;
          tr.target = r.target;
          transitions_[(w * 4 + static_cast<std::size_t>(h)) * 4 + static_cast<std::size_t>(a)] = tr;
        }
      }
    }
  }

  int item_position(int category) const {
    for (std::size_t i = 0; i < basket_.items.size(); ++i)
      if (basket_.items[i] == category) return static_cast<int>(i);
    return -1;
  }

  double collected_fraction(std::uint32_t remaining) const {
    const int size = static_cast<int>(basket_.items.size());
    return completion_fraction(size - std::popcount(remaining), size);
  }

  double terminal_value(std::uint32_t remaining, bool correct_checkout, int steps) const {
    return spec_.w_items * collected_fraction(remaining) + (correct_checkout ? spec_.w_checkout : 0.0) +
           budget_term(spec_, basket_, steps);
  }
  double timeout_value(std::uint32_t remaining) const { return terminal_value(remaining, false, horizon_); }

  double slice_value(int t, std::size_t s) const { return values_[static_cast<std::size_t>(t) * states_ + s]; }

  double backup(int t, std::size_t s) const {
    std::array<double, 4> q{};
    double hi = -std::numeric_limits<double>::infinity();
    for (Action a : kActions) {
      q[static_cast<std::size_t>(a)] = q_value(t, s, a);
      hi = std::max(hi, q[static_cast<std::size_t>(a)]);
    }
    double sum = 0.0;
    for (double v : q) sum += std::exp((v - hi) / tau_);
    return hi + tau_ * std::log(sum);
  }

  const Layout* layout_;
  Basket basket_;
  RewardSpec spec_;
  double tau_;
  int horizon_;
  std::vector<int> walk_index_;
  std::vector<Cell> walk_cells_;
  std::uint32_t masks_ = 1;
  std::size_t states_ = 0;
  std::vector<Transition> transitions_;
  std::vector<double> values_;
};

/// Horizon used when the spec leaves it at 0: four times the length of the
/// TSP trajectory (in actions) for this basket.
inline int resolve_horizon(const Layout& layout, const Basket& basket, const RewardSpec& spec) {
  if (spec.horizon > 0) return spec.horizon;
  return 4 * static_cast<int>(gen_tsp(layout, basket).length());
}

SoftPolicy soft_value_iteration(const Layout& layout, const Basket& basket, const RewardSpec& spec,
                                double tau);

struct RolloutResult {
  Trajectory trajectory;
  double reward = 0.0;
  bool retained = false;
};

/// Samples one episode from the policy. Retained iff its terminal reward
/// reaches `min_reward`.
RolloutResult rollout(const SoftPolicy& policy, Rng& rng, std::optional<double> min_reward = std::nullopt);

struct RolloutBatch {
  std::vector<Trajectory> trajectories;
  std::size_t attempts = 0;
  double retention_rate = 0.0;
  std::optional<std::string> warning;
};

/// Draws `count` retained trajectories. Trajectory i draws all its attempts
/// from one generator seeded with (seed, i), so the result does not depend
/// on `workers`. A probe batch estimates the retention rate first; below 1 %
/// a warning is attached, at 0 % sampling is refused.
RolloutBatch sample_retained(const SoftPolicy& policy, std::size_t count, std::uint64_t seed,
                             std::optional<double> min_reward = std::nullopt, int workers = 1,
                             std::size_t probe = 500, std::size_t max_attempts = 1000000);

// ---------------------------------------------------------------------------
// Policy cache: little-endian binary file
//   8 bytes  magic "SGPOLICY"
//   u32      format version (1)
//   u64      key (see policy_key)
//   i32      horizon
//   u64      state count per slice
//   f64[]    (horizon + 1) * state count soft values, slice-major

inline constexpr char kPolicyMagic[8] = {'S', 'G', 'P', 'O', 'L', 'I', 'C', 'Y'};
inline constexpr std::uint32_t kPolicyVersion = 1;

std::uint64_t policy_key(const Layout& layout, const Basket& basket, const RewardSpec& spec, double tau);

void save_policy(const SoftPolicy& policy, const std::filesystem::path& path);

/// Returns nullopt when the file is missing or was solved for other inputs.
/// Throws ValidationError on a corrupt file.
std::optional<SoftPolicy> load_policy(const std::filesystem::path& path, const Layout& layout,
                                      const Basket& basket, const RewardSpec& spec, double tau);

/// Loads from `cache_dir` when possible, otherwise solves and stores.
SoftPolicy solve_cached(const std::filesystem::path& cache_dir, const Layout& layout, const Basket& basket,
                        const RewardSpec& spec, double tau);

}  // namespace storegrid
