#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "storegrid/config.hpp"
#include "storegrid/layout_opt.hpp"
#include "storegrid/pipeline.hpp"

namespace storegrid {

// Seed streams derived from an experiment seed.
namespace stream {
inline constexpr std::uint64_t conditions = 0;
inline constexpr std::uint64_t pnn = 1;
inline constexpr std::uint64_t human = 2;
inline constexpr std::uint64_t calibration = 3;
inline constexpr std::uint64_t maxent = 4;
inline constexpr std::uint64_t essential = 10;
inline constexpr std::uint64_t holdout_conditions = 11;
inline constexpr std::uint64_t holdout = 12;
inline constexpr std::uint64_t evaluation = 13;
}  // namespace stream

struct MethodOutput {
  Method method = Method::tsp;
  std::vector<Trajectory> trajectories;
  nlohmann::ordered_json info = nlohmann::ordered_json::object();  // goes into the manifest
  double seconds = 0.0;                                              // kept out of the manifest
};

struct GenerationResult {
  std::vector<MethodOutput> outputs;  // in the configured method order
  std::optional<HumanCalibration> calibration;

  const MethodOutput& get(Method m) const {
    for (const auto& o : outputs)
      if (o.method == m) return o;
    throw ValidationError("method " + std::string(method_name(m)) + " was not generated");
  }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double mean_length(std::span<const Trajectory> ts) {
  if (ts.empty()) return 0.0;
  double s = 0.0;
  for (const auto& t : ts) s += static_cast<double>(t.length());
  return s / static_cast<double>(ts.size());
}

}  // namespace detail

/// Basket conditions drawn from the configured basket mix.
inline std::vector<Basket> experiment_conditions(const Layout& layout, const ExperimentConfig& cfg,
                                                 std::uint64_t seed) {
  if (cfg.basket_mix.empty()) throw ValidationError("no basket mix configured");
  const BasketMix mix = load_basket_mix(layout, cfg.resolve(cfg.basket_mix));
  return sample_conditions(mix, cfg.count, derive_seed(seed, {stream::conditions}));
}

/// Runs every configured method on `conditions`. Synthetic humans are also
/// produced (but not returned) when MaxEnt budgets are matched to them.
GenerationResult generate_methods(const Layout& layout, std::span<const Basket> conditions,
                                  const ExperimentConfig& cfg, std::uint64_t seed, int workers = 1);

// ---------------------------------------------------------------------------
// Use case 3 with synthetic humans as the ground truth

struct UseCase3Run {
  ClusterProfile cluster;
  std::vector<Basket> conditions;
  GenerationResult generation;
  std::vector<Trajectory> holdout;
  ProfitReport report;
};

/// Essential-product trajectories for every method, held-out synthetic
/// humans (same calibrated spread, fresh baskets and seeds), and the
/// repositioning comparison. Humans are always the ground truth.
UseCase3Run run_usecase3_experiment(const Layout& layout, const ClusterProfile& cluster,
                                    std::span<const double> checkout_weights, ExperimentConfig cfg,
                                    std::uint64_t seed, int workers = 1);

/// Table-4-shaped impulse rates: one row per impulse product, one column
/// per method.
std::string impulse_table_csv(const Layout& layout, const ClusterProfile& cluster,
                              std::span<const std::pair<std::string, ClusterProfile>> per_method);

}  // namespace storegrid
