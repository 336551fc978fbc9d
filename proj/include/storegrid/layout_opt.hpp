#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "storegrid/analytics.hpp"
#include "storegrid/clustering.hpp"
#include "storegrid/parallel.hpp"
#include "storegrid/rng.hpp"

namespace storegrid {

/// Expected impulse profit of a product: rate x price x margin. Not
/// computable for an Inf rate.
inline std::optional<double> impulse_profit(double rate, double price, double margin) {
  if (std::isinf(rate) || std::isnan(rate)) return std::nullopt;
  return rate * price * margin;
}

inline std::optional<double> impulse_profit(const ImpulseRate& r, const Layout& layout) {
  const Category& c = layout.category(r.category);
  return impulse_profit(r.rate, c.price, c.margin);
}

/// Sum over shelves b and products p of rho_p * i_p * x_bp * theta_b for the
/// layout's placement, counting only products that have a rate.
std::optional<double> objective(const Layout& layout, std::span<const ImpulseRate> rates,
                                const ShelfTraffic& theta);

/// The n unoccupied shelves with the highest traffic; ties go to the
/// earlier shelf in row-major order.
std::vector<Cell> rank_unoccupied_shelves(const Layout& layout, const ShelfTraffic& theta, std::size_t n);

struct LayoutEvaluation {
  double monte_carlo = 0.0;  // mean sampled impulse profit per trajectory
  double std_error = 0.0;
  double expected = 0.0;     // closed form: sum_p visit_p * min(1, i_p) * rho_p
  std::size_t trajectories = 0;
};

namespace detail {

inline double purchase_probability(double rate) { return std::isinf(rate) ? 1.0 : std::min(1.0, rate); }

}  // namespace detail

/// Average impulse profit per customer: every trajectory gets one purchase
/// opportunity per impulse product whose shelf it passes next to, taken
/// with probability min(1, i_p). Draw i uses a seed derived from (seed, i).
LayoutEvaluation evaluate_layout(const Layout& layout, std::span<const Trajectory> trajs,
                                 std::span<const ImpulseRate> rates, std::uint64_t seed, int workers = 1);

// ---------------------------------------------------------------------------
// Repositioning pipeline

/// Trajectories produced by one method for a cluster's essential baskets.
struct MethodTrajectories {
  std::string method;
  std::vector<Trajectory> essential;
};

struct MethodChoice {
  std::string method;
  std::vector<ImpulseRate> rates;
  bool fallback = false;   // ranked by purchase probability (some rate is Inf)
  int product = -1;
  std::vector<Cell> shelves;
  LayoutEvaluation original_own;
  LayoutEvaluation suggested_own;
  LayoutEvaluation suggested_truth;
};

struct ProfitReport {
  std::string truth;
  std::vector<MethodChoice> methods;  // the ground-truth method is last
};

/// Step 1: the impulse product with the highest expected profit, or the
/// highest purchase probability when any rate is Inf. Ties go to the lower
/// category index.
std::pair<int, bool> choose_impulse_product(const Layout& layout, std::span<const ImpulseRate> rates);

struct UseCase3Options {
  std::size_t shelves = 2;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Steps 1-4 for every method: rates and traffic from the method's own
/// essential trajectories, product choice, top shelves, move, evaluation.
/// The last entry of `methods` is the ground truth; its rates are used to
/// evaluate every suggested layout on `holdout`.
inline ProfitReport run_usecase3(const ClusterProfile& cluster, std::span<const MethodTrajectories> methods,
                                 const Layout& layout, std::span<const Trajectory> holdout,
                                 const UseCase3Options& opt = {}) {
  if (cluster.impulse_products().empty()) throw ValidationError("cluster has no impulse products");
  if (methods.empty()) throw ValidationError("no methods to compare");
  ProfitReport report;
  report.truth = methods.back().method;
  const ClusterProfile truth = impulse_rates(cluster, methods.back().essential, layout);

  for (std::size_t m = 0; m < methods.size(); ++m) {
    const auto& mt = methods[m];
    MethodChoice ch;
    ch.method = mt.method;
    const ClusterProfile own = impulse_rates(cluster, mt.essential, layout);
    ch.rates = own.rates;
    const ShelfTraffic theta = shelf_traffic(mt.essential, layout);
    std::tie(ch.product, ch.fallback) = choose_impulse_product(layout, ch.rates);
    ch.shelves = rank_unoccupied_shelves(layout, theta, opt.shelves);
    const Layout moved = reposition(layout, ch.product, ch.shelves, RepositionMode::move);
    const std::uint64_t s = derive_seed(opt.seed, {m});
    ch.original_own = evaluate_layout(layout, mt.essential, ch.rates, derive_seed(s, {0}), opt.workers);
    ch.suggested_own = evaluate_layout(moved, mt.essential, ch.rates, derive_seed(s, {1}), opt.workers);
    ch.suggested_truth = evaluate_layout(moved, holdout, truth.rates, derive_seed(s, {2}), opt.workers);
    report.methods.push_back(std::move(ch));
  }
  return report;
}

inline std::string format_money(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

/// Table-7-shaped rows: one column per method, three layout rows.
std::string profit_table_csv(const ProfitReport& r);

nlohmann::ordered_json profit_report_json(const Layout& layout, const ProfitReport& r);

}  // namespace storegrid
