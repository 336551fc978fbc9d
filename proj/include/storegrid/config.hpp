#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "storegrid/pipeline.hpp"

namespace storegrid {

enum class BudgetMode { none, ratio, matched };

std::string_view budget_mode_name(BudgetMode m);

inline BudgetMode budget_mode_from_name(std::string_view s) {
  for (BudgetMode m : {BudgetMode::none, BudgetMode::ratio, BudgetMode::matched})
    if (budget_mode_name(m) == s) return m;
  throw ValidationError("unknown budget mode '" + std::string(s) + "' (expected none, ratio or matched)");
}

/// One experiment: where the inputs live, which methods run, and every
/// parameter and seed. Relative paths resolve against `base_dir`.
struct ExperimentConfig {
  std::filesystem::path base_dir;
  std::string layout;
  std::string basket_mix;
  std::vector<Method> methods{Method::tsp, Method::pnn, Method::maxent, Method::human};
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  std::string output = "run";

  HumanSettings human;
  double pnn_exponent = 1.0;

  double tau = 0.005;
  BudgetMode budget = BudgetMode::matched;
  double budget_ratio = 1.38;
  int horizon_factor = 2;
  std::optional<double> min_reward;
  RewardSpec reward;
  std::optional<std::string> policy_cache;

  // Use case 3
  std::string cluster;
  std::size_t essential_count = 5000;
  std::size_t holdout_count = 5000;
  std::size_t shelves = 2;

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }

  MaxEntSettings maxent_settings() const {
    MaxEntSettings ms;
    ms.tau = tau;
    ms.reward = reward;
    ms.horizon_factor = horizon_factor;
    ms.min_reward = min_reward;
    if (policy_cache) ms.cache_dir = resolve(*policy_cache);
    return ms;
  }

  bool has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

  void validate() const {
    if (count == 0) throw ValidationError("count must be positive");
    if (!(tau > 0)) throw ValidationError("tau must be positive");
    if (!(pnn_exponent >= 0)) throw ValidationError("pnn exponent must be non-negative");
    if (!(human.detour_target >= 0)) throw ValidationError("detour target must be non-negative");
    if (!(budget_ratio > 0)) throw ValidationError("budget ratio must be positive");
    if (horizon_factor < 1) throw ValidationError("horizon factor must be at least 1");
    if (methods.empty()) throw ValidationError("no methods selected");
    reward.validate();
  }

  /// Canonical form: every effective setting, paths as given. Worker counts
  /// are deliberately absent because they never change results.
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["layout"] = layout;
    j["basket_mix"] = basket_mix;
    auto ms = nlohmann::json::array();
    for (Method m : methods) ms.push_back(std::string(method_name(m)));
    j["methods"] = ms;
    j["count"] = count;
    j["seed"] = seed;
    j["human"] = {{"detour_target", human.detour_target},
                  {"calibration_baskets", human.calibration_baskets},
                  {"calibration_batch", human.calibration_batch}};
    j["pnn"] = {{"exponent", pnn_exponent}};
    nlohmann::json me = {{"tau", tau},
                         {"budget", std::string(budget_mode_name(budget))},
                         {"budget_ratio", budget_ratio},
                         {"horizon_factor", horizon_factor},
                         {"w_items", reward.w_items},
                         {"w_checkout", reward.w_checkout},
                         {"w_budget", reward.w_budget},
                         {"w_wrong", reward.w_wrong},
                         {"horizon", reward.horizon}};
    me["min_reward"] = min_reward ? nlohmann::json(*min_reward) : nlohmann::json(nullptr);
    j["maxent"] = me;
    j["usecase"] = {{"cluster", cluster},
                    {"essential_count", essential_count},
                    {"holdout_count", holdout_count},
                    {"shelves", shelves}};
    return j;
  }

  std::uint64_t hash() const { return fnv1a(to_json().dump()); }
};

ExperimentConfig config_from_json(const nlohmann::json& j, std::filesystem::path base_dir);

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace storegrid
