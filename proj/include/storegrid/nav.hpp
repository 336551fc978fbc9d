#pragma once

#include <climits>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "storegrid/layout.hpp"

namespace storegrid {

inline constexpr int kUnreachable = INT_MAX;

/// Breadth-first step counts from one or more source cells over walkable
/// cells. Turns are free; a step is one move between 4-adjacent cells.
class DistanceField {
 public:
  DistanceField(const Layout& layout, std::span<const Cell> sources)
      : width_(layout.width()), dist_(static_cast<std::size_t>(layout.cell_count()), kUnreachable) {
    std::deque<Cell> queue;
    for (Cell s : sources) {
      if (!layout.walkable(s))
        throw ValidationError("distance source " + to_string(s) + " is not walkable");
      if (dist_[idx(s)] != 0) {
        dist_[idx(s)] = 0;
        queue.push_back(s);
      }
    }
    if (!sources.empty()) source_ = sources.front();
    while (!queue.empty()) {
      const Cell c = queue.front();
      queue.pop_front();
      const int d = dist_[idx(c)] + 1;
      for (Heading h : kHeadings) {
        const Cell n = neighbour(c, h);
        if (layout.walkable(n) && dist_[idx(n)] == kUnreachable) {
          dist_[idx(n)] = d;
          queue.push_back(n);
        }
      }
    }
  }

  DistanceField(const Layout& layout, Cell source)
      : DistanceField(layout, std::span<const Cell>(&source, 1)) {}

  Cell source() const { return source_; }
  /// kUnreachable for walls, shelves and disconnected cells.
  int at(Cell c) const { return dist_[idx(c)]; }
  const std::vector<int>& values() const { return dist_; }

  /// Walks downhill from `from` to the nearest source, preferring N, E, S, W
  /// among equally short continuations. Includes both endpoints.
  std::optional<std::vector<Cell>> path_from(const Layout& layout, Cell from) const {
    if (!layout.in_bounds(from) || at(from) == kUnreachable) return std::nullopt;
    std::vector<Cell> path{from};
    Cell c = from;
    while (at(c) > 0) {
      const int want = at(c) - 1;
      for (Heading h : kHeadings) {
        const Cell n = neighbour(c, h);
        if (layout.in_bounds(n) && at(n) == want) {
          c = n;
          break;
        }
      }
      path.push_back(c);
    }
    return path;
  }

 private:
  std::size_t idx(Cell c) const { return static_cast<std::size_t>(c.row * width_ + c.col); }

  int width_;
  Cell source_{};
  std::vector<int> dist_;
};

/// Minimal-length 4-connected walkable path from `a` to `b` (both included),
/// or nullopt when `b` cannot be reached. Among equal-length paths, each step
/// prefers the N, E, S, W neighbour in that order.
inline std::optional<std::vector<Cell>> shortest_path(const Layout& layout, Cell a, Cell b) {
  if (!layout.walkable(a)) throw ValidationError("path start " + to_string(a) + " is not walkable");
  if (!layout.walkable(b)) throw ValidationError("path end " + to_string(b) + " is not walkable");
  const DistanceField to_b(layout, b);
  return to_b.path_from(layout, a);
}

struct DistanceMatrix {
  std::vector<std::vector<int>> steps;
  std::vector<std::pair<int, int>> unreachable;  // index pairs (i < j)

  bool all_reachable() const { return unreachable.empty(); }
};

DistanceMatrix waypoint_distances(const Layout& layout, std::span<const Cell> waypoints);

/// Nearest walkable cell to an arbitrary in-bounds cell, measured by
/// 4-connected breadth-first distance through any cell kind. Walkable cells
/// map to themselves; ties resolve by N, E, S, W expansion order.
std::optional<Cell> nearest_walkable(const Layout& layout, Cell c);

}  // namespace storegrid
