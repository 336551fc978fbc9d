#include "storegrid/analytics.hpp"

namespace storegrid {

GridDistribution occupancy(std::span<const Trajectory> trajs, const Layout& layout) {
  if (trajs.empty()) throw ValidationError("occupancy of an empty trajectory set");
  GridDistribution d{layout.width(), layout.height(), std::vector<double>(static_cast<std::size_t>(layout.cell_count()), 0.0)};
  std::vector<std::uint64_t> counts(d.mass.size(), 0);
  std::uint64_t total = 0;
  for (const auto& t : trajs)
    for (const auto& s : t.steps) {
      if (!layout.walkable(s.state.cell))
        throw ValidationError("trajectory " + t.id + " occupies non-walkable cell " + to_string(s.state.cell));
      ++counts[static_cast<std::size_t>(layout.index(s.state.cell))];
      ++total;
    }
  if (total == 0) throw ValidationError("occupancy of trajectories without steps");
  for (std::size_t i = 0; i < counts.size(); ++i)
    d.mass[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return d;
}

double jsd(const GridDistribution& p, const GridDistribution& q) {
  detail::require_same_shape(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    const double a = p.mass[i], b = q.mass[i], m = 0.5 * (a + b);
    if (a > 0) sum += 0.5 * a * std::log2(a / m);
    if (b > 0) sum += 0.5 * b * std::log2(b / m);
  }
  return std::clamp(sum, 0.0, 1.0);
}

double wasserstein(const GridDistribution& p, const GridDistribution& q) {
  detail::require_same_shape(p, q);
  const double mp = p.total(), mq = q.total();
  if (std::abs(mp - mq) > 1e-6)
    throw ValidationError("wasserstein: masses differ (" + std::to_string(mp) + " vs " + std::to_string(mq) + ")");
  const double diag = std::hypot(static_cast<double>(p.width - 1), static_cast<double>(p.height - 1));
  if (diag == 0.0) return 0.0;

  std::vector<int> src, dst;
  std::vector<double> supply, demand;
  const double scale = mq > 0 ? mp / mq : 1.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    const double a = p.mass[i], b = q.mass[i] * scale;
    if (a > b && a - b > 1e-15) {
      src.push_back(static_cast<int>(i));
      supply.push_back(a - b);
    } else if (b > a && b - a > 1e-15) {
      dst.push_back(static_cast<int>(i));
      demand.push_back(b - a);
    }
  }
  const std::size_t n = src.size(), m = dst.size();
  if (n == 0 || m == 0) return 0.0;

  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const int a = src[i], b = dst[j];
      cost[i * m + j] = std::hypot(static_cast<double>(a % p.width - b % p.width),
                                   static_cast<double>(a / p.width - b / p.width)) / diag;
    }

  constexpr double kEps = 1e-15;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> flow(n * m, 0.0);
  std::vector<double> pot(n + m, 0.0);  // sources first, then sinks
  std::vector<double> dist(n + m);
  std::vector<int> pred(n + m);
  std::vector<char> done(n + m);
  double remaining = 0.0;
  for (double d : demand) remaining += d;

  while (remaining > 1e-13) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(pred.begin(), pred.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      if (supply[i] > kEps) dist[i] = 0.0;
    for (;;) {
      std::size_t u = n + m;
      double best = kInf;
      for (std::size_t k = 0; k < n + m; ++k)
        if (!done[k] && dist[k] < best) {
          best = dist[k];
          u = k;
        }
      if (u == n + m) break;
      done[u] = 1;
      if (u < n) {
        for (std::size_t j = 0; j < m; ++j) {
          const double rc = std::max(0.0, cost[u * m + j] + pot[u] - pot[n + j]);
          if (dist[u] + rc < dist[n + j]) {
            dist[n + j] = dist[u] + rc;
            pred[n + j] = static_cast<int>(u);
          }
        }
      } else {
        const std::size_t j = u - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (flow[i * m + j] <= kEps) continue;
          const double rc = std::max(0.0, -cost[i * m + j] + pot[u] - pot[i]);
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            pred[i] = static_cast<int>(u);
          }
        }
      }
    }
    std::size_t sink = n + m;
    for (std::size_t j = 0; j < m; ++j)
      if (demand[j] > kEps && dist[n + j] < kInf && (sink == n + m || dist[n + j] < dist[sink])) sink = n + j;
    if (sink == n + m) break;

    double delta = demand[sink - n];
    std::size_t v = sink;
    while (pred[v] >= 0) {
      const std::size_t u = static_cast<std::size_t>(pred[v]);
      if (u >= n) delta = std::min(delta, flow[v * m + (u - n)]);  // undoing flow v -> u
      v = u;
    }
    delta = std::min(delta, supply[v]);

    v = sink;
    while (pred[v] >= 0) {
      const std::size_t u = static_cast<std::size_t>(pred[v]);
      if (u < n)
        flow[u * m + (v - n)] += delta;
      else
        flow[v * m + (u - n)] -= delta;
      v = u;
    }
    supply[v] -= delta;
    demand[sink - n] -= delta;
    remaining -= delta;
    for (std::size_t k = 0; k < n + m; ++k)
      if (dist[k] < kInf) pot[k] += dist[k];
  }

  double total = 0.0;
  for (std::size_t k = 0; k < n * m; ++k)
    if (flow[k] > 0) total += flow[k] * cost[k];
  return total;
}

ShelfTraffic shelf_traffic(std::span<const Trajectory> trajs, const Layout& layout) {
  if (trajs.empty()) throw ValidationError("shelf traffic of an empty trajectory set");
  ShelfTraffic st{layout.width(), layout.height(), layout.shelves(), {}, {}, trajs.size()};
  std::vector<int> slot(static_cast<std::size_t>(layout.cell_count()), -1);
  for (std::size_t i = 0; i < st.shelves.size(); ++i) slot[static_cast<std::size_t>(layout.index(st.shelves[i]))] = static_cast<int>(i);
  st.visits.assign(st.shelves.size(), 0);
  std::vector<std::size_t> last_seen(st.shelves.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t ti = 0; ti < trajs.size(); ++ti) {
    for (const auto& step : trajs[ti].steps) {
      for (Heading h : kHeadings) {
        const Cell n = neighbour(step.state.cell, h);
        if (!layout.in_bounds(n)) continue;
        const int k = slot[static_cast<std::size_t>(layout.index(n))];
        if (k >= 0 && last_seen[static_cast<std::size_t>(k)] != ti) {
          last_seen[static_cast<std::size_t>(k)] = ti;
          ++st.visits[static_cast<std::size_t>(k)];
        }
      }
    }
  }
  for (std::size_t v : st.visits) st.theta.push_back(static_cast<double>(v) / static_cast<double>(trajs.size()));
  return st;
}

void write_pgm(const std::filesystem::path& path, const GridDistribution& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << "P5\n" << d.width << ' ' << d.height << "\n255\n";
  const double hi = d.mass.empty() ? 0.0 : *std::max_element(d.mass.begin(), d.mass.end());
  for (double m : d.mass) {
    const int v = hi > 0 ? static_cast<int>(std::lround(255.0 * m / hi)) : 0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::clamp(v, 0, 255))));
  }
}

void write_grid_csv(const std::filesystem::path& path, const GridDistribution& d) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  char buf[32];
  for (int r = 0; r < d.height; ++r) {
    for (int c = 0; c < d.width; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", d.mass[static_cast<std::size_t>(r * d.width + c)]);
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace storegrid
