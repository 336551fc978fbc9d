#include "storegrid/experiment.hpp"

namespace storegrid {

GenerationResult generate_methods(const Layout& layout, std::span<const Basket> conditions,
                                  const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  GenerationResult res;

  std::optional<MethodOutput> human;
  const bool need_human = cfg.has(Method::human) || (cfg.has(Method::maxent) && cfg.budget == BudgetMode::matched);
  if (need_human) {
    const auto t0 = clock::now();
    res.calibration = calibrate_on(layout, conditions, cfg.human, derive_seed(seed, {stream::calibration}));
    MethodOutput o;
    o.method = Method::human;
    o.trajectories = generate_human(layout, conditions, res.calibration->spread, derive_seed(seed, {stream::human}),
                                    workers);
    o.info["detour_target"] = cfg.human.detour_target;
    o.info["spread"] = res.calibration->spread;
    o.info["calibrated_ratio"] = res.calibration->achieved_ratio;
    o.seconds = detail::seconds_since(t0);
    human = std::move(o);
  }

  for (Method m : cfg.methods) {
    const auto t0 = clock::now();
    MethodOutput o;
    o.method = m;
    switch (m) {
      case Method::tsp:
        o.trajectories = generate_tsp(layout, conditions);
        break;
      case Method::pnn:
        o.trajectories = generate_pnn(layout, conditions, derive_seed(seed, {stream::pnn}), cfg.pnn_exponent, workers);
        o.info["exponent"] = cfg.pnn_exponent;
        break;
      case Method::human:
        o = *human;
        break;
      case Method::maxent: {
        std::vector<Basket> conds(conditions.begin(), conditions.end());
        if (cfg.budget == BudgetMode::matched) conds = matched_budgets(conditions, human->trajectories);
        if (cfg.budget == BudgetMode::ratio) conds = ratio_budgets(layout, conditions, cfg.budget_ratio);
        MaxEntRun run = generate_maxent(layout, conds, cfg.maxent_settings(), derive_seed(seed, {stream::maxent}),
                                        workers);
        const double retention = run.retention_rate();
        o.trajectories = std::move(run.trajectories);
        o.info["tau"] = cfg.tau;
        o.info["budget"] = std::string(budget_mode_name(cfg.budget));
        o.info["policies"] = run.policies;
        o.info["attempts"] = run.attempts;
        o.info["retention_rate"] = retention;
        o.info["warnings"] = run.warnings;
        break;
      }
    }
    if (m != Method::human) o.seconds = detail::seconds_since(t0);
    if (!o.info.contains("retention_rate")) o.info["retention_rate"] = 1.0;
    o.info["count"] = o.trajectories.size();
    o.info["mean_length"] = detail::mean_length(o.trajectories);
    res.outputs.push_back(std::move(o));
  }
  return res;
}

UseCase3Run run_usecase3_experiment(const Layout& layout, const ClusterProfile& cluster,
                                    std::span<const double> checkout_weights, ExperimentConfig cfg,
                                    std::uint64_t seed, int workers) {
  UseCase3Run out;
  out.cluster = cluster;
  std::vector<Method> order;
  for (Method m : cfg.methods)
    if (m != Method::human) order.push_back(m);
  order.push_back(Method::human);
  cfg.methods = order;

  out.conditions = sample_essential_conditions(cluster, checkout_weights, cfg.essential_count,
                                               derive_seed(seed, {stream::essential}));
  out.generation = generate_methods(layout, out.conditions, cfg, seed, workers);

  const auto holdout_conds = sample_essential_conditions(cluster, checkout_weights, cfg.holdout_count,
                                                         derive_seed(seed, {stream::holdout_conditions}));
  out.holdout = generate_human(layout, holdout_conds, out.generation.calibration->spread,
                               derive_seed(seed, {stream::holdout}), workers);

  std::vector<MethodTrajectories> mts;
  for (const auto& o : out.generation.outputs) mts.push_back({std::string(method_name(o.method)), o.trajectories});
  out.report = run_usecase3(cluster, mts, layout, out.holdout,
                            {cfg.shelves, derive_seed(seed, {stream::evaluation}), workers});
  return out;
}

std::string impulse_table_csv(const Layout& layout, const ClusterProfile& cluster,
                              std::span<const std::pair<std::string, ClusterProfile>> per_method) {
  std::string out = "product,purchase";
  for (const auto& [name, p] : per_method) out += "," + name;
  out += "\n";
  char buf[64];
  for (int c : cluster.impulse_products()) {
    std::snprintf(buf, sizeof buf, "%.6g", cluster.purchase[static_cast<std::size_t>(c)]);
    out += layout.category(c).id + "," + buf;
    for (const auto& [name, p] : per_method) {
      for (const auto& r : p.rates) {
        if (r.category != c) continue;
        if (r.is_inf()) {
          out += ",Inf";
        } else {
          std::snprintf(buf, sizeof buf, ",%.6g", r.rate);
          out += buf;
        }
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace storegrid
