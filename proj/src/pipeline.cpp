#include "storegrid/pipeline.hpp"

namespace storegrid {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::tsp: return "tsp";
    case Method::pnn: return "pnn";
    case Method::maxent: return "maxent";
    case Method::human: return "human";
  }
  return "?";
}

BasketMix basket_mix_from_json(const Layout& layout, const nlohmann::json& j) {
  try {
    detail::reject_unknown_keys(j, {"format", "version", "checkout_weights", "baskets"}, "basket mix");
    if (j.value("format", std::string{}) != "storegrid-basket-mix")
      throw ValidationError("basket mix: format must be \"storegrid-basket-mix\"");
    BasketMix mix;
    mix.checkout_weights = j.at("checkout_weights").get<std::vector<double>>();
    if (mix.checkout_weights.size() != layout.checkouts().size())
      throw ValidationError("basket mix: " + std::to_string(mix.checkout_weights.size()) + " checkout weights for " +
                            std::to_string(layout.checkouts().size()) + " checkouts");
    for (const auto& b : j.at("baskets")) {
      WeightedBasket wb;
      for (const auto& s : b.at("items")) wb.items.push_back(layout.category_index(s.get<std::string>()));
      std::sort(wb.items.begin(), wb.items.end());
      wb.weight = b.at("weight").get<double>();
      if (!(wb.weight > 0)) throw ValidationError("basket mix: weights must be positive");
      mix.baskets.push_back(std::move(wb));
    }
    if (mix.baskets.empty()) throw ValidationError("basket mix has no baskets");
    return mix;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed basket mix: ") + e.what());
  }
}

BasketMix load_basket_mix(const Layout& layout, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open basket mix " + path.string());
  try {
    return basket_mix_from_json(layout, nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<Basket> sample_conditions(const BasketMix& mix, std::size_t count, std::uint64_t seed) {
  std::vector<Basket> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, {i}));
    out.push_back(sample_basket(mix, rng));
  }
  return out;
}

std::vector<Basket> sample_essential_conditions(const ClusterProfile& cluster,
                                                std::span<const double> checkout_weights, std::size_t count,
                                                std::uint64_t seed) {
  std::vector<Basket> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, {i}));
    out.push_back(sample_essential_basket(cluster, checkout_weights, rng));
  }
  return out;
}

std::vector<Trajectory> generate_tsp(const Layout& layout, std::span<const Basket> conditions,
                                     int cap) {
  std::map<std::string, Trajectory> cache;
  std::vector<Trajectory> out;
  out.reserve(conditions.size());
  for (const Basket& b : conditions) {
    auto [it, fresh] = cache.try_emplace(detail::basket_key(b));
    if (fresh) it->second = gen_tsp(layout, b, cap);
    out.push_back(it->second);
  }
  detail::set_ids(out, Method::tsp);
  return out;
}

std::vector<Trajectory> generate_pnn(const Layout& layout, std::span<const Basket> conditions,
                                     std::uint64_t seed, double exponent, int workers) {
  std::vector<Trajectory> out(conditions.size());
  parallel_for(conditions.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {i}));
    out[i] = gen_pnn(layout, conditions[i], rng, exponent);
  });
  detail::set_ids(out, Method::pnn);
  return out;
}

HumanCalibration calibrate_on(const Layout& layout, std::span<const Basket> conditions,
                              const HumanSettings& hs, std::uint64_t seed) {
  if (conditions.empty()) throw ValidationError("no conditions to calibrate on");
  std::vector<Basket> pick;
  Rng rng(derive_seed(seed, {0x63616cULL}));
  for (std::size_t i = 0; i < hs.calibration_baskets; ++i) pick.push_back(conditions[uniform_index(rng, conditions.size())]);
  return calibrate_human(layout, pick, hs.detour_target, derive_seed(seed, {0x626174ULL}), hs.calibration_batch);
}

std::vector<Trajectory> generate_human(const Layout& layout, std::span<const Basket> conditions, double spread,
                                       std::uint64_t seed, int workers) {
  const NoisyHumanModel model(layout, spread);
  std::map<std::string, std::size_t> slot;
  std::vector<NoisyHumanModel::Plan> plans;
  std::vector<std::size_t> plan_of(conditions.size());
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    auto [it, fresh] = slot.try_emplace(detail::basket_key(conditions[i]), plans.size());
    if (fresh) plans.push_back(model.prepare(conditions[i]));
    plan_of[i] = it->second;
  }
  std::vector<Trajectory> out(conditions.size());
  parallel_for(conditions.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {i}));
    out[i] = model.generate(plans[plan_of[i]], rng);
  });
  detail::set_ids(out, Method::human);
  return out;
}

std::vector<Basket> ratio_budgets(const Layout& layout, std::span<const Basket> conditions, double ratio) {
  const auto tsp = generate_tsp(layout, conditions);
  std::vector<Basket> out(conditions.begin(), conditions.end());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].budget = std::max(1, static_cast<int>(std::lround(ratio * static_cast<double>(tsp[i].length()))));
  return out;
}

MaxEntRun generate_maxent(const Layout& layout, std::span<const Basket> conditions, const MaxEntSettings& ms,
                          std::uint64_t seed, int workers) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < conditions.size(); ++i) groups[detail::basket_key(conditions[i])].push_back(i);
  std::vector<std::pair<std::string, std::vector<std::size_t>>> work(groups.begin(), groups.end());

  MaxEntRun run;
  run.trajectories.resize(conditions.size());
  std::vector<std::size_t> attempts(work.size(), 0);
  std::vector<std::optional<std::string>> warnings(work.size());
  parallel_for(work.size(), workers, [&](std::size_t g) {
    const auto& [key, members] = work[g];
    const Basket& b = conditions[members.front()];
    RewardSpec spec = ms.reward;
    if (b.budget && spec.horizon == 0) spec.horizon = ms.horizon_factor * *b.budget;
    const SoftPolicy policy = ms.cache_dir ? solve_cached(*ms.cache_dir, layout, b, spec, ms.tau)
                                           : soft_value_iteration(layout, b, spec, ms.tau);
    const std::uint64_t gs = derive_seed(seed, {fnv1a(key)});
    RolloutBatch batch = sample_retained(policy, members.size(), gs, ms.min_reward, 1, ms.probe);
    for (std::size_t j = 0; j < members.size(); ++j) run.trajectories[members[j]] = std::move(batch.trajectories[j]);
    attempts[g] = batch.attempts;
    if (batch.warning) warnings[g] = key + ": " + *batch.warning;
  });
  for (std::size_t g = 0; g < work.size(); ++g) {
    run.attempts += attempts[g];
    if (warnings[g]) run.warnings.push_back(*warnings[g]);
  }
  run.policies = work.size();
  detail::set_ids(run.trajectories, Method::maxent);
  return run;
}

DivergenceRow divergence(const Layout& layout, std::span<const Trajectory> reference,
                         std::span<const Trajectory> method, std::string name, int workers) {
  DivergenceRow row;
  row.method = std::move(name);
  const auto ref = occupancy(reference, layout);
  const auto got = occupancy(method, layout);
  row.jsd_pooled = jsd(ref, got);
  row.wd_pooled = wasserstein(ref, got);

  std::map<std::string, std::vector<Trajectory>> rg, mg;
  for (const auto& t : reference) rg[detail::condition_key(t.conditions)].push_back(t);
  for (const auto& t : method) mg[detail::condition_key(t.conditions)].push_back(t);
  std::vector<std::string> keys;
  for (const auto& [k, v] : rg)
    if (mg.count(k)) keys.push_back(k);
  std::vector<double> js(keys.size()), wd(keys.size()), w(keys.size());
  parallel_for(keys.size(), workers, [&](std::size_t i) {
    const auto a = occupancy(rg[keys[i]], layout);
    const auto b = occupancy(mg[keys[i]], layout);
    js[i] = jsd(a, b);
    wd[i] = wasserstein(a, b);
    w[i] = static_cast<double>(rg[keys[i]].size());
  });
  double ws = 0.0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    row.jsd_mean += w[i] * js[i];
    row.wd_mean += w[i] * wd[i];
    ws += w[i];
  }
  if (ws > 0) {
    row.jsd_mean /= ws;
    row.wd_mean /= ws;
  }
  return row;
}

std::string divergence_table_csv(std::span<const DivergenceRow> rows) {
  std::string out = "metric";
  for (const auto& r : rows) out += "," + r.method;
  out += "\n";
  char buf[32];
  auto line = [&](const char* name, double DivergenceRow::*f) {
    out += name;
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, ",%.6f", r.*f);
      out += buf;
    }
    out += "\n";
  };
  line("average JSD", &DivergenceRow::jsd_mean);
  line("average WD", &DivergenceRow::wd_mean);
  line("JSD of average heatmap", &DivergenceRow::jsd_pooled);
  line("WD of average heatmap", &DivergenceRow::wd_pooled);
  return out;
}

}  // namespace storegrid
