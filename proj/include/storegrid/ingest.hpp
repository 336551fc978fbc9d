#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "storegrid/nav.hpp"
#include "storegrid/trajectory.hpp"

namespace storegrid {

struct Sample {
  double t = 0.0;  // seconds
  double x = 0.0;  // meters, column axis
  double y = 0.0;  // meters, row axis
  friend bool operator==(const Sample&, const Sample&) = default;
};

/// A continuous position log for one customer, as recorded upstream.
struct RawTrajectory {
  std::string id;
  std::vector<Sample> samples;
  std::optional<std::vector<int>> basket;  // purchased category indices
  std::optional<double> checkout_ts;
  friend bool operator==(const RawTrajectory&, const RawTrajectory&) = default;
};

enum class RejectReason { no_basket, empty_after_trim, unreachable_point };

std::string_view reject_reason_name(RejectReason r);

struct Rejection {
  RejectReason reason;
  std::string detail;
};

using PreprocessResult = std::variant<Trajectory, Rejection>;

/// Continuous point to grid cell: floor(coordinate / cell size).
inline Cell discretize(const Layout& layout, double x, double y) {
  return {static_cast<int>(std::floor(x / layout.cell_size())),
          static_cast<int>(std::floor(y / layout.cell_size()))};
}

namespace detail {

inline bool touches_checkout(const Layout& layout, Cell c) {
  for (Heading h : kHeadings)
    if (layout.kind(neighbour(c, h)) == CellKind::checkout) return true;
  return false;
}

inline bool touches_any(const Layout& layout, Cell c, const std::vector<int>& cats) {
  for (int cat : cats)
    if (layout.touches_category(c, cat)) return true;
  return false;
}

}  // namespace detail

/// Grid-aligns a raw log: trim, discretize, snap, normalize endpoints, and
/// convert to actions. Pickups are not inferred here; see infer_pickups().
PreprocessResult preprocess(const RawTrajectory& raw, const Layout& layout);

/// Radius (in cells) within which a customer counts as approaching a shelf.
inline constexpr int kApproachRadius = 1;

struct PickupAttribution {
  int category = 0;
  int step = 0;      // index into the input trajectory's steps
  int distance = 0;  // Manhattan distance to the nearest shelf of the item
  bool flagged = false;
};

/// For each basket item, the step of closest approach to any of its shelves;
/// ties go to the latest step. Items never within the approach radius are
/// still attributed (at their global minimum) but flagged.
std::vector<PickupAttribution> attribute_pickups(const Trajectory& traj, const Layout& layout);

/// Inserts pickup actions at the attributed approach points and rebuilds a
/// consistent action sequence around them.
Trajectory infer_pickups(const Trajectory& traj, const Layout& layout);

// ---------------------------------------------------------------------------
// Raw log records: one JSON object per line.

RawTrajectory raw_from_json(const Layout& layout, const nlohmann::json& j);

nlohmann::ordered_json raw_to_json(const Layout& layout, const RawTrajectory& r);

std::vector<RawTrajectory> read_raw_trajectories(std::istream& in, const Layout& layout);

}  // namespace storegrid
