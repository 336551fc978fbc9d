#include "storegrid/config.hpp"

namespace storegrid {

std::string_view budget_mode_name(BudgetMode m) {
  switch (m) {
    case BudgetMode::none: return "none";
    case BudgetMode::ratio: return "ratio";
    case BudgetMode::matched: return "matched";
  }
  return "?";
}

ExperimentConfig config_from_json(const nlohmann::json& j, std::filesystem::path base_dir) {
  ExperimentConfig c;
  c.base_dir = std::move(base_dir);
  try {
    detail::reject_unknown_keys(j, {"layout", "basket_mix", "methods", "count", "seed", "output", "human", "pnn",
                                    "maxent", "usecase", "policy_cache"},
                                "experiment config");
    c.layout = j.value("layout", c.layout);
    c.basket_mix = j.value("basket_mix", c.basket_mix);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(method_from_name(m.get<std::string>()));
    }
    c.count = j.value("count", c.count);
    c.seed = j.value("seed", c.seed);
    c.output = j.value("output", c.output);
    if (j.contains("policy_cache") && !j.at("policy_cache").is_null())
      c.policy_cache = j.at("policy_cache").get<std::string>();
    if (j.contains("human")) {
      const auto& h = j.at("human");
      detail::reject_unknown_keys(h, {"detour_target", "calibration_baskets", "calibration_batch"}, "human settings");
      c.human.detour_target = h.value("detour_target", c.human.detour_target);
      c.human.calibration_baskets = h.value("calibration_baskets", c.human.calibration_baskets);
      c.human.calibration_batch = h.value("calibration_batch", c.human.calibration_batch);
    }
    if (j.contains("pnn")) {
      detail::reject_unknown_keys(j.at("pnn"), {"exponent"}, "pnn settings");
      c.pnn_exponent = j.at("pnn").value("exponent", c.pnn_exponent);
    }
    if (j.contains("maxent")) {
      const auto& m = j.at("maxent");
      detail::reject_unknown_keys(m, {"tau", "budget", "budget_ratio", "horizon_factor", "min_reward", "w_items",
                                      "w_checkout", "w_budget", "w_wrong", "horizon"},
                                  "maxent settings");
      c.tau = m.value("tau", c.tau);
      if (m.contains("budget")) c.budget = budget_mode_from_name(m.at("budget").get<std::string>());
      c.budget_ratio = m.value("budget_ratio", c.budget_ratio);
      c.horizon_factor = m.value("horizon_factor", c.horizon_factor);
      if (m.contains("min_reward") && !m.at("min_reward").is_null()) c.min_reward = m.at("min_reward").get<double>();
      c.reward.w_items = m.value("w_items", c.reward.w_items);
      c.reward.w_checkout = m.value("w_checkout", c.reward.w_checkout);
      c.reward.w_budget = m.value("w_budget", c.reward.w_budget);
      c.reward.w_wrong = m.value("w_wrong", c.reward.w_wrong);
      c.reward.horizon = m.value("horizon", c.reward.horizon);
    }
    if (j.contains("usecase")) {
      const auto& u = j.at("usecase");
      detail::reject_unknown_keys(u, {"cluster", "essential_count", "holdout_count", "shelves"}, "usecase settings");
      c.cluster = u.value("cluster", c.cluster);
      c.essential_count = u.value("essential_count", c.essential_count);
      c.holdout_count = u.value("holdout_count", c.holdout_count);
      c.shelves = u.value("shelves", c.shelves);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in), path.parent_path());
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace storegrid
