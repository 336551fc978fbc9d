#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "storegrid/nav.hpp"
#include "storegrid/rng.hpp"
#include "storegrid/trajectory.hpp"

namespace storegrid {

inline constexpr int kDefaultTspCap = 15;

namespace detail {

/// Shelf cell holding `cat` next to `c`, first in N, E, S, W order.
inline Cell facing_shelf(const Layout& layout, Cell c, int cat) {
  for (Heading h : kHeadings)
    if (layout.category_at(neighbour(c, h)) == cat) return neighbour(c, h);
  throw RuntimeError("no shelf of category '" + layout.category(cat).id + "' next to " + to_string(c));
}

inline std::vector<Cell> checkout_approaches(const Layout& layout, int checkout) {
  return layout.approach_cells(layout.checkouts().at(static_cast<std::size_t>(checkout)));
}

/// Builds the trajectory for a fixed sequence of stops.
Trajectory build_route(const Layout& layout, const Basket& basket, std::span<const int> order,
                       std::span<const Cell> stops, std::span<const std::vector<Cell>> segments);

}  // namespace detail

/// Candidate pickup cells of every basket item (walkable cells next to one of
/// its shelves) plus the distance fields a route planner needs.
class RoutingContext {
 public:
  RoutingContext(const Layout& layout, const Basket& basket)
      : layout_(&layout), basket_(basket), entrance_field_(layout, layout.entrance()) {
    check_basket(layout, basket);
    const auto approaches = detail::checkout_approaches(layout, basket.checkout);
    checkout_field_ = std::make_unique<DistanceField>(layout, approaches);
    if (checkout_field_->at(layout.entrance()) == kUnreachable)
      throw RuntimeError("checkout " + std::to_string(basket.checkout) + " is unreachable");
    for (std::size_t i = 0; i < basket.items.size(); ++i) {
      std::vector<Cell> cand;
      for (Cell c : layout.approach_cells_of_category(basket.items[i]))
        if (entrance_field_.at(c) != kUnreachable) cand.push_back(c);
      if (cand.empty())
        throw RuntimeError("basket item '" + layout.category(basket.items[i]).id + "' is unreachable");
      for (Cell c : cand) {
        node_item_.push_back(static_cast<int>(i));
        node_cell_.push_back(c);
        fields_.emplace_back(layout, c);
      }
      candidates_.push_back(std::move(cand));
    }
  }

  const Layout& layout() const { return *layout_; }
  const Basket& basket() const { return basket_; }
  std::size_t item_count() const { return basket_.items.size(); }
  const std::vector<Cell>& candidates(std::size_t item) const { return candidates_[item]; }
  std::size_t node_count() const { return node_cell_.size(); }
  int node_item(std::size_t n) const { return node_item_[n]; }
  Cell node_cell(std::size_t n) const { return node_cell_[n]; }
  const DistanceField& node_field(std::size_t n) const { return fields_[n]; }
  const DistanceField& entrance_field() const { return entrance_field_; }
  /// Multi-source field from the walkable cells next to the basket's checkout.
  const DistanceField& checkout_field() const { return *checkout_field_; }

  int node_distance(std::size_t a, std::size_t b) const { return fields_[a].at(node_cell_[b]); }

  /// Field rooted at `c`, which must be the entrance or a candidate node.
  const DistanceField& field_at(Cell c) const {
    if (c == layout_->entrance()) return entrance_field_;
    for (std::size_t n = 0; n < node_cell_.size(); ++n)
      if (node_cell_[n] == c) return fields_[n];
    throw RuntimeError("no distance field rooted at " + to_string(c));
  }

 private:
  const Layout* layout_;
  Basket basket_;
  DistanceField entrance_field_;
  std::unique_ptr<DistanceField> checkout_field_;
  std::vector<std::vector<Cell>> candidates_;
  std::vector<int> node_item_;
  std::vector<Cell> node_cell_;
  std::vector<DistanceField> fields_;
};

/// An entrance -> items -> checkout route. `order` holds category indices.
struct RoutePlan {
  std::vector<int> order;
  std::vector<Cell> stops;
  Cell checkout_cell;
  int length = 0;  // cell steps
};

/// Exact shortest open route entrance -> one pickup cell per item (any
/// order, any of the item's cells) -> checkout, by Held-Karp over the
/// expanded node set.
RoutePlan plan_tsp(const RoutingContext& ctx, int cap = kDefaultTspCap);

/// Shortest-path segments between consecutive stops of a plan.
std::vector<std::vector<Cell>> plan_segments(const RoutingContext& ctx, const RoutePlan& plan);

inline Trajectory gen_tsp(const Layout& layout, const Basket& basket, int cap = kDefaultTspCap) {
  const RoutingContext ctx(layout, basket);
  const RoutePlan plan = plan_tsp(ctx, cap);
  const auto segs = plan_segments(ctx, plan);
  return detail::build_route(layout, basket, plan.order, plan.stops, segs);
}

// ---------------------------------------------------------------------------
// Probabilistic nearest neighbour

/// Selection law for the next item: probability proportional to
/// d^-exponent, d being the step distance from `current` to the item's
/// nearest pickup cell. Items at distance 0 take all the mass.
std::vector<double> pnn_probabilities(const Layout& layout, Cell current,
                                      std::span<const int> remaining, double exponent = 1.0);

/// Draws an index into `remaining` according to pnn_probabilities().
inline std::size_t pnn_choose(const Layout& layout, Cell current, std::span<const int> remaining, Rng& rng,
                              double exponent = 1.0) {
  const auto p = pnn_probabilities(layout, current, remaining, exponent);
  return sample_index(rng, p);
}

Trajectory gen_pnn(const Layout& layout, const Basket& basket, Rng& rng, double exponent = 1.0);

// ---------------------------------------------------------------------------
// Synthetic human shoppers

/// Stand-in ground truth. A shopper draws an item order with probability
/// proportional to exp(-(L_order - L*) / spread), then walks each leg through
/// a via-cell drawn with probability proportional to exp(-detour / spread).
/// At spread 0 every leg stays shortest and only optimal orders are used.
class NoisyHumanModel {
 public:
  static constexpr std::size_t kMaxItems = 8;

  NoisyHumanModel(const Layout& layout, double spread) : layout_(&layout), spread_(spread) {
    if (!(spread >= 0.0)) throw ValidationError("human spread must be non-negative");
  }

  double spread() const { return spread_; }

  /// Per-basket routing data; build once and reuse across draws.
  struct Plan {
    std::unique_ptr<RoutingContext> ctx;
    std::vector<std::vector<int>> orders;  // basket positions
    std::vector<std::vector<std::size_t>> stops;  // node per position, optimal for the order
    std::vector<int> lengths;
    int best = 0;
    int tsp_length = 0;
    std::vector<DistanceField> checkout_fields;  // one per checkout approach cell
    std::vector<Cell> checkout_cells;
  };

  Plan prepare(const Basket& basket) const {
    Plan p;
    p.ctx = std::make_unique<RoutingContext>(*layout_, basket);
    const RoutingContext& ctx = *p.ctx;
    const std::size_t k = ctx.item_count();
    if (k > kMaxItems)
      throw CapacityError("human model enumerates orders for at most " + std::to_string(kMaxItems) + " items");
    for (Cell c : detail::checkout_approaches(*layout_, basket.checkout)) {
      if (ctx.entrance_field().at(c) == kUnreachable) continue;
      p.checkout_cells.push_back(c);
      p.checkout_fields.emplace_back(*layout_, c);
    }
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      const auto [len, nodes] = best_stops(ctx, perm);
      p.orders.push_back(perm);
      p.stops.push_back(nodes);
      p.lengths.push_back(len);
    } while (std::next_permutation(perm.begin(), perm.end()));
    p.best = *std::min_element(p.lengths.begin(), p.lengths.end());
    p.tsp_length = p.best;
    return p;
  }

  Trajectory generate(const Plan& p, Rng& rng) const {
    const RoutingContext& ctx = *p.ctx;
    std::vector<double> w(p.lengths.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = boltzmann(static_cast<double>(p.lengths[i] - p.best));
    const std::size_t o = sample_index(rng, w);

    std::vector<int> order;
    std::vector<Cell> stops;
    std::vector<std::vector<Cell>> segs;
    const DistanceField* from_field = &ctx.entrance_field();
    Cell from = layout_->entrance();
    for (std::size_t i = 0; i < p.orders[o].size(); ++i) {
      const std::size_t node = p.stops[o][i];
      order.push_back(ctx.basket().items[static_cast<std::size_t>(p.orders[o][i])]);
      stops.push_back(ctx.node_cell(node));
      segs.push_back(leg(*from_field, ctx.node_field(node), from, ctx.node_cell(node), rng));
      from_field = &ctx.node_field(node);
      from = ctx.node_cell(node);
    }
    // Final leg ends at the checkout-side cell nearest to the last stop.
    std::size_t ci = 0;
    for (std::size_t c = 1; c < p.checkout_cells.size(); ++c)
      if (from_field->at(p.checkout_cells[c]) < from_field->at(p.checkout_cells[ci])) ci = c;
    segs.push_back(leg(*from_field, p.checkout_fields[ci], from, p.checkout_cells[ci], rng));
    return detail::build_route(*layout_, ctx.basket(), order, stops, segs);
  }

  Trajectory generate(const Basket& basket, Rng& rng) const { return generate(prepare(basket), rng); }

 private:
  double boltzmann(double excess) const {
    if (spread_ == 0.0) return excess == 0.0 ? 1.0 : 0.0;
    return std::exp(-excess / spread_);
  }

  /// Optimal pickup cells for a fixed item order (dynamic program along the order).
  static std::pair<int, std::vector<std::size_t>> best_stops(const RoutingContext& ctx,
                                                             const std::vector<int>& perm) {
    const std::size_t n = ctx.node_count();
    std::vector<int> cost(n, kUnreachable);
    std::vector<std::vector<int>> back(perm.size(), std::vector<int>(n, -1));
    for (std::size_t v = 0; v < n; ++v)
      if (ctx.node_item(v) == perm[0]) cost[v] = ctx.entrance_field().at(ctx.node_cell(v));
    for (std::size_t i = 1; i < perm.size(); ++i) {
      std::vector<int> next(n, kUnreachable);
      for (std::size_t v = 0; v < n; ++v) {
        if (ctx.node_item(v) != perm[i]) continue;
        for (std::size_t u = 0; u < n; ++u) {
          if (ctx.node_item(u) != perm[i - 1] || cost[u] == kUnreachable) continue;
          const int d = ctx.node_distance(u, v);
          if (d != kUnreachable && cost[u] + d < next[v]) {
            next[v] = cost[u] + d;
            back[i][v] = static_cast<int>(u);
          }
        }
      }
      cost = std::move(next);
    }
    int best = kUnreachable;
    std::size_t last = 0;
    if (perm.empty()) return {ctx.checkout_field().at(ctx.layout().entrance()), {}};
    for (std::size_t v = 0; v < n; ++v) {
      if (cost[v] == kUnreachable) continue;
      const int tail = ctx.checkout_field().at(ctx.node_cell(v));
      if (tail != kUnreachable && cost[v] + tail < best) {
        best = cost[v] + tail;
        last = v;
      }
    }
    std::vector<std::size_t> nodes(perm.size());
    std::size_t cur = last;
    for (std::size_t i = perm.size(); i-- > 0;) {
      nodes[i] = cur;
      if (i > 0) cur = static_cast<std::size_t>(back[i][cur]);
    }
    return {best, nodes};
  }

  std::vector<Cell> leg(const DistanceField& from_field, const DistanceField& to_field, Cell from, Cell to,
                        Rng& rng) const {
    const int direct = from_field.at(to);
    std::vector<double> w(static_cast<std::size_t>(layout_->cell_count()), 0.0);
    for (int i = 0; i < layout_->cell_count(); ++i) {
      const Cell v = layout_->cell_at(i);
      const int a = from_field.at(v);
      const int b = to_field.at(v);
      if (a == kUnreachable || b == kUnreachable) continue;
      w[static_cast<std::size_t>(i)] = boltzmann(static_cast<double>(a + b - direct));
    }
    const Cell via = layout_->cell_at(static_cast<int>(sample_index(rng, w)));
    auto first = *from_field.path_from(*layout_, via);  // via -> from
    std::reverse(first.begin(), first.end());
    const auto second = *to_field.path_from(*layout_, via);  // via -> to
    first.insert(first.end(), second.begin() + 1, second.end());
    (void)from;
    return first;
  }

  const Layout* layout_;
  double spread_;
};

struct HumanCalibration {
  double spread = 0.0;
  double achieved_ratio = 1.0;  // mean human/TSP step ratio on the calibration batch
  int batch = 0;
};

/// Mean ratio of human route steps to TSP route steps over `batch` draws
/// cycling through `plans`, with draw i seeded from (seed, i).
double mean_detour_ratio(const NoisyHumanModel& model, std::span<const NoisyHumanModel::Plan> plans,
                         int batch, std::uint64_t seed);

/// Finds the spread at which the mean human/TSP length ratio over the
/// calibration batch equals 1 + detour_target (bisection with common random
/// numbers). Throws CalibrationError with the closest ratio reached.
HumanCalibration calibrate_human(const Layout& layout, std::span<const Basket> baskets,
                                 double detour_target, std::uint64_t seed, int batch = 2000,
                                 double tolerance = 0.002);

// ---------------------------------------------------------------------------

/// Exactly `target` draws with replacement from `trajs`.
std::vector<Trajectory> upsample(std::span<const Trajectory> trajs, std::size_t target, Rng& rng);

}  // namespace storegrid
