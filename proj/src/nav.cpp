#include "storegrid/nav.hpp"

namespace storegrid {

DistanceMatrix waypoint_distances(const Layout& layout, std::span<const Cell> waypoints) {
  DistanceMatrix m;
  const std::size_t n = waypoints.size();
  m.steps.assign(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    const DistanceField f(layout, waypoints[i]);
    for (std::size_t j = 0; j < n; ++j) m.steps[i][j] = f.at(waypoints[j]);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (m.steps[i][j] == kUnreachable) m.unreachable.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return m;
}

std::optional<Cell> nearest_walkable(const Layout& layout, Cell c) {
  if (!layout.in_bounds(c)) return std::nullopt;
  if (layout.walkable(c)) return c;
  std::vector<char> seen(static_cast<std::size_t>(layout.cell_count()), 0);
  std::deque<Cell> queue{c};
  seen[static_cast<std::size_t>(layout.index(c))] = 1;
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    for (Heading h : kHeadings) {
      const Cell n = neighbour(cur, h);
      if (!layout.in_bounds(n) || seen[static_cast<std::size_t>(layout.index(n))]) continue;
      if (layout.walkable(n)) return n;
      seen[static_cast<std::size_t>(layout.index(n))] = 1;
      queue.push_back(n);
    }
  }
  return std::nullopt;
}

}  // namespace storegrid
