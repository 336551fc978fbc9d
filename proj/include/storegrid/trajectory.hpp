#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "storegrid/layout.hpp"

namespace storegrid {

struct AgentState {
  Cell cell;
  Heading heading = Heading::north;
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

enum class StepEvent : std::uint8_t { none, pickup, checkout };

struct StepResult {
  AgentState next;
  StepEvent event = StepEvent::none;
  int target = -1;  // category for pickups, checkout index for checkouts
};

/// Gridworld step rule. Forward into anything but a walkable cell leaves the
/// agent in place; interacting with a stocked shelf is a pickup, with a
/// checkout ends the trip, with anything else does nothing.
StepResult apply_action(const Layout& layout, AgentState s, Action a);

struct TrajectoryStep {
  AgentState state;  // state in which `action` is taken
  Action action = Action::forward;
  friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

struct Pickup {
  int step = 0;
  int category = 0;
  bool flagged = false;  // attributed without an actual approach
  friend bool operator==(const Pickup&, const Pickup&) = default;
};

/// A shopping trip as (state, action) pairs plus the conditions it was
/// generated or observed under.
struct Trajectory {
  std::string id;
  Basket conditions;
  std::vector<TrajectoryStep> steps;
  std::vector<Pickup> pickups;

  std::size_t length() const { return steps.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Number of forward actions that actually changed cell.
inline int move_count(const Trajectory& t) {
  int moves = 0;
  for (std::size_t i = 1; i < t.steps.size(); ++i)
    if (t.steps[i].state.cell != t.steps[i - 1].state.cell) ++moves;
  return moves;
}

/// Outcome of replaying a trajectory under the layout dynamics.
struct EpisodeSummary {
  int basket_size = 0;
  int collected = 0;  // distinct basket items picked up
  int wrong = 0;      // pickups of non-basket or already-collected items
  bool checked_out = false;
  int checkout = -1;
  int steps = 0;
};

EpisodeSummary summarize(const Layout& layout, const Trajectory& t);

/// Lists every violated trajectory invariant; empty means valid. A trip must
/// start at the entrance, follow the step rule, and end with a checkout
/// action (or stop exactly at `step_limit`).
std::vector<std::string> check_trajectory(const Layout& layout, const Trajectory& t,
                                          std::optional<int> step_limit = std::nullopt);

/// Appends actions for a planned route: walk cell paths, turn to face shelves
/// and checkouts, interact. Turns take the shorter rotation; a reversal is
/// two right turns.
class RouteBuilder {
 public:
  RouteBuilder(const Layout& layout, Basket conditions)
      : layout_(&layout), state_{layout.entrance(), layout.start_heading()} {
    traj_.conditions = std::move(conditions);
  }

  Cell position() const { return state_.cell; }
  AgentState state() const { return state_; }

  void face(Cell target) {
    const Heading want = heading_towards(state_.cell, target);
    const int diff = (static_cast<int>(want) - static_cast<int>(state_.heading) + 4) % 4;
    if (diff == 3) {
      push(Action::left);
    } else {
      for (int i = 0; i < diff; ++i) push(Action::right);
    }
  }

  /// `path` starts at the current cell; each further cell must be adjacent.
  void walk(std::span<const Cell> path) {
    if (path.empty()) return;
    if (path.front() != state_.cell)
      throw ValidationError("route segment starts at " + to_string(path.front()) +
                            " but the agent is at " + to_string(state_.cell));
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (path[i] == state_.cell) continue;
      if (!layout_->walkable(path[i]))
        throw ValidationError("route enters non-walkable cell " + to_string(path[i]));
      face(path[i]);
      push(Action::forward);
    }
  }

  void pickup(Cell shelf, bool flagged = false) {
    face(shelf);
    const int cat = layout_->category_at(shelf);
    traj_.pickups.push_back({static_cast<int>(traj_.steps.size()), cat, flagged});
    push(Action::interact);
  }

  /// Records a pickup that has no physical interaction (ingest fallback).
  void flagged_pickup(int category) {
    traj_.pickups.push_back({static_cast<int>(traj_.steps.size()), category, true});
  }

  void checkout() {
    const Cell target = layout_->checkouts().at(static_cast<std::size_t>(traj_.conditions.checkout));
    face(target);
    push(Action::interact);
  }

  Trajectory finish(std::string id = {}) {
    traj_.id = std::move(id);
    for (Pickup& p : traj_.pickups)
      if (p.step >= static_cast<int>(traj_.steps.size()))
        p.step = static_cast<int>(traj_.steps.size()) - 1;
    return std::move(traj_);
  }

 private:
  void push(Action a) {
    traj_.steps.push_back({state_, a});
    state_ = apply_action(*layout_, state_, a).next;
  }

  const Layout* layout_;
  AgentState state_;
  Trajectory traj_;
};

// ---------------------------------------------------------------------------
// Processed-trajectory records: one JSON object per line.

nlohmann::ordered_json basket_to_json(const Layout& layout, const Basket& b);

Basket basket_from_json(const Layout& layout, const nlohmann::json& j);

nlohmann::ordered_json trajectory_to_json(const Layout& layout, const Trajectory& t);

Trajectory trajectory_from_json(const Layout& layout, const nlohmann::json& j);

inline void write_trajectories(std::ostream& out, const Layout& layout, std::span<const Trajectory> trajs) {
  for (const auto& t : trajs) out << trajectory_to_json(layout, t).dump() << '\n';
}

inline void write_trajectories(const std::filesystem::path& path, const Layout& layout,
                               std::span<const Trajectory> trajs) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  write_trajectories(out, layout, trajs);
}

std::vector<Trajectory> read_trajectories(std::istream& in, const Layout& layout);

inline std::vector<Trajectory> read_trajectories(const std::filesystem::path& path, const Layout& layout) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trajectory file " + path.string());
  return read_trajectories(in, layout);
}

}  // namespace storegrid
