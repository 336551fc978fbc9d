#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "storegrid/error.hpp"

namespace storegrid {

/// Grid coordinate, (column, row) with the origin at the top-left corner.
/// Ordering is row-major scan order so that sorted containers of cells
/// iterate the way the grid is read.
struct Cell {
  int col = 0;
  int row = 0;

  friend constexpr bool operator==(const Cell&, const Cell&) = default;
  friend constexpr std::strong_ordering operator<=>(const Cell& a, const Cell& b) {
    if (auto c = a.row <=> b.row; c != 0) return c;
    return a.col <=> b.col;
  }
};

inline std::string to_string(const Cell& c) {
  return "(" + std::to_string(c.col) + "," + std::to_string(c.row) + ")";
}

enum class Heading : std::uint8_t { north = 0, east = 1, south = 2, west = 3 };

/// Neighbour order used for every deterministic tie-break: N, E, S, W.
inline constexpr std::array<Heading, 4> kHeadings = {Heading::north, Heading::east,
                                                     Heading::south, Heading::west};

constexpr Cell offset(Heading h) {
  switch (h) {
    case Heading::north: return {0, -1};
    case Heading::east: return {1, 0};
    case Heading::south: return {0, 1};
    case Heading::west: return {-1, 0};
  }
  return {0, 0};
}

constexpr Cell neighbour(Cell c, Heading h) {
  const Cell d = offset(h);
  return {c.col + d.col, c.row + d.row};
}

constexpr Heading turn_left(Heading h) {
  return static_cast<Heading>((static_cast<int>(h) + 3) % 4);
}
constexpr Heading turn_right(Heading h) {
  return static_cast<Heading>((static_cast<int>(h) + 1) % 4);
}

constexpr int manhattan(Cell a, Cell b) {
  return (a.col > b.col ? a.col - b.col : b.col - a.col) +
         (a.row > b.row ? a.row - b.row : b.row - a.row);
}

constexpr bool adjacent(Cell a, Cell b) { return manhattan(a, b) == 1; }

/// Heading that points from `from` to the 4-neighbour `to`.
inline Heading heading_towards(Cell from, Cell to) {
  for (Heading h : kHeadings)
    if (neighbour(from, h) == to) return h;
  throw ValidationError("cells " + to_string(from) + " and " + to_string(to) +
                        " are not 4-adjacent");
}

inline char heading_char(Heading h) { return "NESW"[static_cast<int>(h)]; }

inline Heading heading_from_char(char c) {
  switch (c) {
    case 'N': return Heading::north;
    case 'E': return Heading::east;
    case 'S': return Heading::south;
    case 'W': return Heading::west;
    default: throw ValidationError(std::string("unknown heading '") + c + "'");
  }
}

/// The agent's discrete action set.
enum class Action : std::uint8_t { forward = 0, left = 1, right = 2, interact = 3 };

inline constexpr std::array<Action, 4> kActions = {Action::forward, Action::left,
                                                   Action::right, Action::interact};

inline std::string_view action_name(Action a) {
  switch (a) {
    case Action::forward: return "forward";
    case Action::left: return "left";
    case Action::right: return "right";
    case Action::interact: return "interact";
  }
  return "?";
}

inline Action action_from_name(std::string_view s) {
  for (Action a : kActions)
    if (action_name(a) == s) return a;
  throw ValidationError("unknown action '" + std::string(s) + "'");
}

}  // namespace storegrid
