#include "storegrid/maxent.hpp"

namespace storegrid {

SoftPolicy soft_value_iteration(const Layout& layout, const Basket& basket, const RewardSpec& spec,
                                double tau) {
  spec.validate();
  check_basket(layout, basket);
  if (!(tau > 0.0)) throw ValidationError("temperature must be positive");
  if (basket.items.size() > 16) throw CapacityError("soft value iteration supports at most 16 basket items");
  SoftPolicy policy(layout, basket, spec, tau, resolve_horizon(layout, basket, spec));
  policy.solve();
  return policy;
}

RolloutResult rollout(const SoftPolicy& policy, Rng& rng, std::optional<double> min_reward) {
  const Layout& layout = policy.layout();
  const Basket& basket = policy.basket();
  RolloutResult out;
  Trajectory& t = out.trajectory;
  t.conditions = basket;
  AgentState s{layout.entrance(), layout.start_heading()};
  std::uint32_t mask = policy.full_mask();
  for (int step = 0; step < policy.horizon(); ++step) {
    const auto p = policy.action_probabilities(step, s, mask);
    const Action a = kActions[sample_index(rng, p)];
    t.steps.push_back({s, a});
    const StepResult r = apply_action(layout, s, a);
    if (r.event == StepEvent::pickup) {
      t.pickups.push_back({step, r.target, false});
      for (std::size_t i = 0; i < basket.items.size(); ++i)
        if (basket.items[i] == r.target) mask &= ~(1u << i);
    }
    s = r.next;
    if (r.event == StepEvent::checkout) break;
  }
  out.reward = terminal_reward(summarize(layout, t), policy.spec(), basket);
  out.retained = out.reward >= min_reward.value_or(policy.spec().default_min_reward()) - 1e-9;
  return out;
}

RolloutBatch sample_retained(const SoftPolicy& policy, std::size_t count, std::uint64_t seed,
                             std::optional<double> min_reward, int workers,
                             std::size_t probe, std::size_t max_attempts) {
  RolloutBatch batch;
  std::size_t probe_kept = 0;
  for (std::size_t j = 0; j < probe; ++j) {
    Rng rng(derive_seed(seed, {~std::uint64_t{0}, j}));
    probe_kept += rollout(policy, rng, min_reward).retained ? 1 : 0;
  }
  const double probe_rate = probe ? static_cast<double>(probe_kept) / static_cast<double>(probe) : 1.0;
  if (probe && probe_kept == 0)
    throw RuntimeError("no rollout in a probe batch of " + std::to_string(probe) + " met the reward threshold");
  if (probe_rate < 0.01)
    batch.warning = "low retention rate " + std::to_string(probe_rate) + " (threshold 0.01)";

  batch.trajectories.resize(count);
  std::vector<std::size_t> attempts(count, 0);
  parallel_for(count, workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {i}));
    for (std::size_t j = 0; j < max_attempts; ++j) {
      RolloutResult r = rollout(policy, rng, min_reward);
      if (r.retained) {
        attempts[i] = j + 1;
        batch.trajectories[i] = std::move(r.trajectory);
        return;
      }
    }
    throw RuntimeError("rollout " + std::to_string(i) + " not retained within " + std::to_string(max_attempts) +
                       " attempts");
  });
  for (std::size_t a : attempts) batch.attempts += a;
  batch.retention_rate = batch.attempts ? static_cast<double>(count) / static_cast<double>(batch.attempts) : 1.0;
  return batch;
}

std::uint64_t policy_key(const Layout& layout, const Basket& basket, const RewardSpec& spec, double tau) {
  std::string k = hex64(layout_hash(layout));
  for (int i : basket.items) k += "|i" + std::to_string(i);
  k += "|c" + std::to_string(basket.checkout);
  k += "|b" + (basket.budget ? std::to_string(*basket.budget) : std::string("-"));
  auto bits = [](double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, sizeof u);
    return hex64(u);
  };
  k += "|" + bits(spec.w_items) + bits(spec.w_checkout) + bits(spec.w_budget) + bits(spec.w_wrong);
  k += "|h" + std::to_string(spec.horizon) + "|t" + bits(tau);
  return fnv1a(k);
}

void save_policy(const SoftPolicy& policy, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write policy cache " + path.string());
  const std::uint64_t key = policy_key(policy.layout(), policy.basket(), policy.spec(), policy.tau());
  const std::int32_t horizon = policy.horizon();
  const std::uint64_t states = policy.state_count();
  out.write(kPolicyMagic, sizeof kPolicyMagic);
  out.write(reinterpret_cast<const char*>(&kPolicyVersion), sizeof kPolicyVersion);
  out.write(reinterpret_cast<const char*>(&key), sizeof key);
  out.write(reinterpret_cast<const char*>(&horizon), sizeof horizon);
  out.write(reinterpret_cast<const char*>(&states), sizeof states);
  const auto& v = policy.raw_values();
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!out) throw RuntimeError("failed writing policy cache " + path.string());
}

std::optional<SoftPolicy> load_policy(const std::filesystem::path& path, const Layout& layout,
                                      const Basket& basket, const RewardSpec& spec, double tau) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t key = 0, states = 0;
  std::int32_t horizon = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&key), sizeof key);
  in.read(reinterpret_cast<char*>(&horizon), sizeof horizon);
  in.read(reinterpret_cast<char*>(&states), sizeof states);
  if (!in || std::memcmp(magic, kPolicyMagic, sizeof magic) != 0)
    throw ValidationError("not a policy cache file: " + path.string());
  if (version != kPolicyVersion) throw ValidationError("unsupported policy cache version " + std::to_string(version));
  if (key != policy_key(layout, basket, spec, tau)) return std::nullopt;
  SoftPolicy policy(layout, basket, spec, tau, horizon);
  if (policy.state_count() != states) throw ValidationError("policy cache state count mismatch");
  auto& v = policy.raw_values();
  v.resize(static_cast<std::size_t>(horizon + 1) * states);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw ValidationError("truncated policy cache " + path.string());
  return policy;
}

SoftPolicy solve_cached(const std::filesystem::path& cache_dir, const Layout& layout, const Basket& basket,
                        const RewardSpec& spec, double tau) {
  const auto file = cache_dir / (hex64(policy_key(layout, basket, spec, tau)) + ".sgpol");
  if (auto p = load_policy(file, layout, basket, spec, tau)) return std::move(*p);
  SoftPolicy p = soft_value_iteration(layout, basket, spec, tau);
  std::filesystem::create_directories(cache_dir);
  save_policy(p, file);
  return p;
}

}  // namespace storegrid
