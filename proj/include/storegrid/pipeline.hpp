#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "storegrid/analytics.hpp"
#include "storegrid/clustering.hpp"
#include "storegrid/generators.hpp"
#include "storegrid/maxent.hpp"
#include "storegrid/parallel.hpp"

namespace storegrid {

enum class Method { tsp, pnn, maxent, human };

std::string_view method_name(Method m);

inline Method method_from_name(std::string_view s) {
  for (Method m : {Method::tsp, Method::pnn, Method::maxent, Method::human})
    if (method_name(m) == s) return m;
  throw ValidationError("unknown method '" + std::string(s) + "' (expected tsp, pnn, maxent or human)");
}

// ---------------------------------------------------------------------------
// Basket mixes

struct BasketMix {
  std::vector<WeightedBasket> baskets;
  std::vector<double> checkout_weights;
};

BasketMix basket_mix_from_json(const Layout& layout, const nlohmann::json& j);

BasketMix load_basket_mix(const Layout& layout, const std::filesystem::path& path);

inline Basket sample_basket(const BasketMix& mix, Rng& rng) {
  std::vector<double> w;
  for (const auto& b : mix.baskets) w.push_back(b.weight);
  const auto& b = mix.baskets[sample_index(rng, w)];
  return make_basket(b.items, static_cast<int>(sample_index(rng, mix.checkout_weights)));
}

/// `count` basket/checkout conditions; condition i depends only on (seed, i).
std::vector<Basket> sample_conditions(const BasketMix& mix, std::size_t count, std::uint64_t seed);

/// Conditions for a cluster's essential-only baskets.
std::vector<Basket> sample_essential_conditions(const ClusterProfile& cluster,
                                                std::span<const double> checkout_weights, std::size_t count,
                                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Generation. Trajectory i of every method depends only on (seed, i), never
// on the number of workers.

namespace detail {

inline std::string basket_key(const Basket& b) {
  std::string k;
  for (int i : b.items) k += std::to_string(i) + ",";
  k += "|" + std::to_string(b.checkout) + "|" + (b.budget ? std::to_string(*b.budget) : "-");
  return k;
}

inline void set_ids(std::vector<Trajectory>& ts, Method m) {
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i].id = std::string(method_name(m)) + "-" + std::to_string(i);
}

}  // namespace detail

std::vector<Trajectory> generate_tsp(const Layout& layout, std::span<const Basket> conditions,
                                     int cap = kDefaultTspCap);

std::vector<Trajectory> generate_pnn(const Layout& layout, std::span<const Basket> conditions,
                                     std::uint64_t seed, double exponent = 1.0, int workers = 1);

struct HumanSettings {
  double detour_target = 0.28;
  std::size_t calibration_baskets = 400;
  int calibration_batch = 2000;
};

/// Calibrates the human model on baskets drawn from `conditions` (so the
/// calibration batch follows the same basket frequencies).
HumanCalibration calibrate_on(const Layout& layout, std::span<const Basket> conditions,
                              const HumanSettings& hs, std::uint64_t seed);

std::vector<Trajectory> generate_human(const Layout& layout, std::span<const Basket> conditions, double spread,
                                       std::uint64_t seed, int workers = 1);

struct MaxEntSettings {
  double tau = 0.005;
  RewardSpec reward;
  int horizon_factor = 2;  // horizon = factor x budget when a budget is set
  std::optional<double> min_reward;
  std::size_t probe = 100;
  std::optional<std::filesystem::path> cache_dir;
};

struct MaxEntRun {
  std::vector<Trajectory> trajectories;
  std::size_t attempts = 0;
  std::size_t policies = 0;
  std::vector<std::string> warnings;
  double retention_rate() const {
    return attempts ? static_cast<double>(trajectories.size()) / static_cast<double>(attempts) : 1.0;
  }
};

/// Copies `conditions` with each budget set to the action length of the
/// matching reference trajectory.
inline std::vector<Basket> matched_budgets(std::span<const Basket> conditions, std::span<const Trajectory> reference) {
  if (conditions.size() != reference.size()) throw ValidationError("matched budgets need one reference per condition");
  std::vector<Basket> out(conditions.begin(), conditions.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].budget = static_cast<int>(reference[i].length());
  return out;
}

/// Copies `conditions` with budget = round(ratio x TSP action length).
std::vector<Basket> ratio_budgets(const Layout& layout, std::span<const Basket> conditions, double ratio);

/// Solves one policy per distinct (basket, checkout, budget) and samples the
/// retained trajectories for every condition that uses it.
MaxEntRun generate_maxent(const Layout& layout, std::span<const Basket> conditions, const MaxEntSettings& ms,
                          std::uint64_t seed, int workers = 1);

// ---------------------------------------------------------------------------
// Divergence tables

struct DivergenceRow {
  std::string method;
  double jsd_pooled = 0.0;  // metric of the pooled ("average") heatmaps
  double wd_pooled = 0.0;
  double jsd_mean = 0.0;    // per-basket metric, averaged with basket weights
  double wd_mean = 0.0;
};

namespace detail {

inline std::string condition_key(const Basket& b) {
  Basket c = b;
  c.budget.reset();
  return basket_key(c);
}

}  // namespace detail

/// Compares each method's trajectories with `reference`. Per-basket
/// averages group trajectories by (items, checkout) and weight each group by
/// its share of the reference set. Baskets missing from a method are skipped
/// for that method.
DivergenceRow divergence(const Layout& layout, std::span<const Trajectory> reference,
                         std::span<const Trajectory> method, std::string name, int workers = 1);

/// Rows in the order: metric, pooled heatmap / per-basket mean; one column
/// per method.
std::string divergence_table_csv(std::span<const DivergenceRow> rows);

}  // namespace storegrid
