#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <cstdio>
#include <fstream>
#include <limits>
#include <span>
#include <vector>

#include "storegrid/layout.hpp"
#include "storegrid/trajectory.hpp"

namespace storegrid {

/// Probability mass over the cells of a grid, row-major.
struct GridDistribution {
  int width = 0;
  int height = 0;
  std::vector<double> mass;

  double at(Cell c) const { return mass[static_cast<std::size_t>(c.row * width + c.col)]; }
  double total() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
  }
  friend bool operator==(const GridDistribution&, const GridDistribution&) = default;
};

/// Per-step occupancy of a trajectory set: every step's cell counts once,
/// revisits included, normalized to total mass 1.
GridDistribution occupancy(std::span<const Trajectory> trajs, const Layout& layout);

namespace detail {

inline void require_same_shape(const GridDistribution& p, const GridDistribution& q) {
  if (p.width != q.width || p.height != q.height || p.mass.size() != q.mass.size())
    throw ValidationError("distribution shapes differ: " + std::to_string(p.width) + "x" + std::to_string(p.height) +
                          " vs " + std::to_string(q.width) + "x" + std::to_string(q.height));
}

}  // namespace detail

/// Jensen-Shannon divergence in bits, so the result lies in [0, 1].
double jsd(const GridDistribution& p, const GridDistribution& q);

/// Exact earth mover's distance between two mass-1 grids. Ground distance
/// is the Euclidean distance between cell centres divided by the grid
/// diagonal ((width-1, height-1)), so the result lies in [0, 1].
///
/// Mass shared by both grids at a cell stays put (optimal for a metric
/// ground cost); the remainder is moved by successive shortest paths on the
/// bipartite transport network with Dijkstra and node potentials.
double wasserstein(const GridDistribution& p, const GridDistribution& q);

/// Fraction of trajectories that come within one cell (4-adjacent) of
/// each shelf. Defined on shelf cells only.
struct ShelfTraffic {
  int width = 0;
  int height = 0;
  std::vector<Cell> shelves;            // scan order
  std::vector<double> theta;            // parallel to `shelves`
  std::vector<std::size_t> visits;      // parallel to `shelves`
  std::size_t trajectories = 0;

  double at(Cell c) const {
    const auto it = std::lower_bound(shelves.begin(), shelves.end(), c);
    if (it == shelves.end() || *it != c) throw ValidationError("no shelf at " + to_string(c));
    return theta[static_cast<std::size_t>(it - shelves.begin())];
  }

  /// Traffic renormalized over shelves, as a distribution on the grid.
  GridDistribution as_distribution() const {
    GridDistribution d{width, height, std::vector<double>(static_cast<std::size_t>(width * height), 0.0)};
    double total = 0.0;
    for (double t : theta) total += t;
    if (total <= 0.0) throw ValidationError("shelf traffic is zero everywhere; cannot normalize");
    for (std::size_t i = 0; i < shelves.size(); ++i)
      d.mass[static_cast<std::size_t>(shelves[i].row * width + shelves[i].col)] = theta[i] / total;
    return d;
  }
};

ShelfTraffic shelf_traffic(std::span<const Trajectory> trajs, const Layout& layout);

// ---------------------------------------------------------------------------
// Export

/// Binary PGM, brightest cell = largest value.
void write_pgm(const std::filesystem::path& path, const GridDistribution& d);

/// One row of comma-separated values per grid row, %.9g precision.
void write_grid_csv(const std::filesystem::path& path, const GridDistribution& d);

}  // namespace storegrid
