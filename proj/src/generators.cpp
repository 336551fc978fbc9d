#include "storegrid/generators.hpp"

namespace storegrid {

namespace detail {

Trajectory build_route(const Layout& layout, const Basket& basket, std::span<const int> order,
                       std::span<const Cell> stops, std::span<const std::vector<Cell>> segments) {
  RouteBuilder b(layout, basket);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    b.walk(segments[i]);
    if (i < order.size()) b.pickup(facing_shelf(layout, stops[i], order[i]));
  }
  b.checkout();
  return b.finish();
}

}  // namespace detail

RoutePlan plan_tsp(const RoutingContext& ctx, int cap) {
  const Layout& layout = ctx.layout();
  const std::size_t k = ctx.item_count();
  if (static_cast<int>(k) > cap)
    throw CapacityError("basket has " + std::to_string(k) + " items, exact solver cap is " + std::to_string(cap));
  RoutePlan plan;
  if (k == 0) {
    plan.length = ctx.checkout_field().at(layout.entrance());
    plan.checkout_cell = ctx.checkout_field().path_from(layout, layout.entrance())->back();
    return plan;
  }
  const std::size_t n = ctx.node_count();
  const std::size_t full = (std::size_t{1} << k) - 1;
  constexpr int kInf = kUnreachable;
  std::vector<int> dp((full + 1) * n, kInf);
  std::vector<int> parent((full + 1) * n, -1);
  auto at = [&](std::size_t mask, std::size_t node) -> std::size_t { return mask * n + node; };

  for (std::size_t v = 0; v < n; ++v) {
    const int d = ctx.entrance_field().at(ctx.node_cell(v));
    dp[at(std::size_t{1} << ctx.node_item(v), v)] = d;
  }
  for (std::size_t mask = 1; mask <= full; ++mask) {
    for (std::size_t u = 0; u < n; ++u) {
      const int cur = dp[at(mask, u)];
      if (cur == kInf) continue;
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t bit = std::size_t{1} << ctx.node_item(v);
        if (mask & bit) continue;
        const int d = ctx.node_distance(u, v);
        if (d == kInf) continue;
        int& slot = dp[at(mask | bit, v)];
        if (cur + d < slot) {
          slot = cur + d;
          parent[at(mask | bit, v)] = static_cast<int>(u);
        }
      }
    }
  }
  int best = kInf;
  std::size_t last = 0;
  for (std::size_t u = 0; u < n; ++u) {
    const int base = dp[at(full, u)];
    const int tail = ctx.checkout_field().at(ctx.node_cell(u));
    if (base == kInf || tail == kInf) continue;
    if (base + tail < best) {
      best = base + tail;
      last = u;
    }
  }
  if (best == kInf) throw RuntimeError("no complete route exists for this basket");

  std::vector<std::size_t> nodes;
  std::size_t mask = full;
  for (int u = static_cast<int>(last); u >= 0;) {
    nodes.push_back(static_cast<std::size_t>(u));
    const int p = parent[at(mask, static_cast<std::size_t>(u))];
    mask &= ~(std::size_t{1} << ctx.node_item(static_cast<std::size_t>(u)));
    u = p;
  }
  std::reverse(nodes.begin(), nodes.end());
  for (std::size_t u : nodes) {
    plan.order.push_back(ctx.basket().items[static_cast<std::size_t>(ctx.node_item(u))]);
    plan.stops.push_back(ctx.node_cell(u));
  }
  plan.length = best;
  plan.checkout_cell = ctx.checkout_field().path_from(layout, plan.stops.back())->back();
  return plan;
}

std::vector<std::vector<Cell>> plan_segments(const RoutingContext& ctx, const RoutePlan& plan) {
  const Layout& layout = ctx.layout();
  std::vector<std::vector<Cell>> segs;
  Cell from = layout.entrance();
  for (Cell stop : plan.stops) {
    segs.push_back(*shortest_path(layout, from, stop));
    from = stop;
  }
  segs.push_back(*ctx.checkout_field().path_from(layout, from));
  return segs;
}

std::vector<double> pnn_probabilities(const Layout& layout, Cell current,
                                      std::span<const int> remaining, double exponent) {
  const DistanceField field(layout, current);
  std::vector<int> dist;
  for (int item : remaining) {
    int d = kUnreachable;
    for (Cell c : layout.approach_cells_of_category(item)) d = std::min(d, field.at(c));
    if (d == kUnreachable) throw RuntimeError("basket item '" + layout.category(item).id + "' is unreachable");
    dist.push_back(d);
  }
  std::vector<double> p(dist.size(), 0.0);
  const auto zeros = std::count(dist.begin(), dist.end(), 0);
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (zeros > 0)
      p[i] = dist[i] == 0 ? 1.0 : 0.0;
    else
      p[i] = std::pow(static_cast<double>(dist[i]), -exponent);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

Trajectory gen_pnn(const Layout& layout, const Basket& basket, Rng& rng, double exponent) {
  check_basket(layout, basket);
  RouteBuilder b(layout, basket);
  std::vector<int> remaining = basket.items;
  while (!remaining.empty()) {
    const std::size_t pick = pnn_choose(layout, b.position(), remaining, rng, exponent);
    const int item = remaining[pick];
    const DistanceField field(layout, b.position());
    Cell target{};
    int best = kUnreachable;
    for (Cell c : layout.approach_cells_of_category(item))
      if (field.at(c) < best) {
        best = field.at(c);
        target = c;
      }
    b.walk(*shortest_path(layout, b.position(), target));
    b.pickup(detail::facing_shelf(layout, target, item));
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  const DistanceField to_checkout(layout, detail::checkout_approaches(layout, basket.checkout));
  const auto tail = to_checkout.path_from(layout, b.position());
  if (!tail) throw RuntimeError("checkout unreachable");
  b.walk(*tail);
  b.checkout();
  return b.finish();
}

double mean_detour_ratio(const NoisyHumanModel& model, std::span<const NoisyHumanModel::Plan> plans,
                         int batch, std::uint64_t seed) {
  double sum = 0.0;
  for (int i = 0; i < batch; ++i) {
    const auto& p = plans[static_cast<std::size_t>(i) % plans.size()];
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    const Trajectory t = model.generate(p, rng);
    sum += static_cast<double>(move_count(t)) / std::max(1, p.tsp_length);
  }
  return sum / batch;
}

HumanCalibration calibrate_human(const Layout& layout, std::span<const Basket> baskets,
                                 double detour_target, std::uint64_t seed, int batch,
                                 double tolerance) {
  if (!(detour_target >= 0.0)) throw ValidationError("detour target must be >= 0");
  if (baskets.empty()) throw ValidationError("calibration needs at least one basket");
  std::vector<NoisyHumanModel::Plan> plans;
  const NoisyHumanModel probe(layout, 0.0);
  for (const Basket& b : baskets) plans.push_back(probe.prepare(b));

  auto ratio_at = [&](double spread) {
    const NoisyHumanModel m(layout, spread);
    return mean_detour_ratio(m, plans, batch, seed);
  };
  const double target = 1.0 + detour_target;
  HumanCalibration cal{0.0, ratio_at(0.0), batch};
  if (cal.achieved_ratio >= target - tolerance) return cal;

  double lo = 0.0, hi = 1.0, r_hi = ratio_at(hi);
  while (r_hi < target) {
    if (hi > 1e4) throw CalibrationError("human detour target " + std::to_string(detour_target) +
                                             " unreachable; best ratio " + std::to_string(r_hi), r_hi);
    lo = hi;
    hi *= 2.0;
    r_hi = ratio_at(hi);
  }
  cal = {hi, r_hi, batch};
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = ratio_at(mid);
    if (std::abs(r - target) < std::abs(cal.achieved_ratio - target)) cal = {mid, r, batch};
    if (std::abs(r - target) <= tolerance) break;
    (r < target ? lo : hi) = mid;
  }
  if (std::abs(cal.achieved_ratio - target) > 10 * tolerance)
    throw CalibrationError("human calibration did not converge", cal.achieved_ratio);
  return cal;
}

std::vector<Trajectory> upsample(std::span<const Trajectory> trajs, std::size_t target, Rng& rng) {
  if (trajs.empty()) throw ValidationError("upsample: empty input");
  if (target == 0) throw ValidationError("upsample: target must be positive");
  std::vector<Trajectory> out;
  out.reserve(target);
  for (std::size_t i = 0; i < target; ++i) out.push_back(trajs[uniform_index(rng, trajs.size())]);
  return out;
}

}  // namespace storegrid
