#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace storegrid;

namespace {

const Layout& open_room() {
  static const Layout l = load_layout_file(fixture::data_path("open_room.json"));
  return l;
}

double log_sum_exp(const std::vector<double>& x, double tau) {
  const double hi = *std::max_element(x.begin(), x.end());
  double s = 0;
  for (double v : x) s += std::exp((v - hi) / tau);
  return hi + tau * std::log(s);
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("storegrid_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(Reward, WorkedExamples) {
  const RewardSpec spec;
  EpisodeSummary s;
  s.basket_size = 2;
  s.collected = 1;
  s.wrong = 1;
  s.checked_out = true;
  s.checkout = 0;
  s.steps = 10;
  EXPECT_DOUBLE_EQ(terminal_reward(s, spec, make_basket({1, 2}, 0, 8)), 0.5 - 0.25 + 0.5 + 0.5 * 0.75);
  EXPECT_DOUBLE_EQ(terminal_reward(s, spec, make_basket({1, 2}, 1)), 0.5 - 0.25);

  EpisodeSummary quarter;
  quarter.basket_size = 4;
  quarter.collected = 1;
  quarter.steps = 30;
  EXPECT_DOUBLE_EQ(terminal_reward(quarter, spec, make_basket({0, 1, 2, 3}, 0)), 0.25);

  EpisodeSummary empty;
  empty.checked_out = true;
  empty.checkout = 0;
  empty.steps = 5;
  EXPECT_DOUBLE_EQ(terminal_reward(empty, spec, make_basket({}, 0, 5)), 1.0 + 0.5 + 0.5);
  // far outside the budget the budget term is zero, never negative
  empty.steps = 50;
  EXPECT_DOUBLE_EQ(terminal_reward(empty, spec, make_basket({}, 0, 5)), 1.5);
  EXPECT_DOUBLE_EQ(spec.default_min_reward(), 1.5);
}

TEST(Reward, NegativeWeightsRejected) {
  RewardSpec spec;
  spec.w_wrong = -1;
  EXPECT_THROW(soft_value_iteration(open_room(), make_basket({0}, 0), spec, 0.5), ValidationError);
  EXPECT_THROW(soft_value_iteration(open_room(), make_basket({0}, 0), RewardSpec{}, 0.0), ValidationError);
}

TEST(SoftPolicy, EqualRewardsGiveUniformSequences) {
  RewardSpec flat{0, 0, 0, 0, 5};
  const SoftPolicy p = soft_value_iteration(open_room(), make_basket({0}, 0), flat, 0.3);
  const auto seqs = oracle::enumerate_sequences(open_room(), make_basket({0}, 0), flat, 5);
  for (const auto& q : seqs) ASSERT_NEAR(oracle::sequence_probability(p, q.actions), 1.0 / seqs.size(), 1e-12);
}

TEST(SoftPolicy, BellmanResidualAndNormalization) {
  const Layout& s = fixture::store();
  const SoftPolicy p = soft_value_iteration(s, fixture::basket(s, "hot_coffee,bakery", 0, 60), RewardSpec{}, 0.05);
  EXPECT_LE(p.bellman_residual(), 1e-9);
  for (int t : {0, p.horizon() / 2, p.horizon() - 1})
    for (std::size_t st = 0; st < p.state_count(); st += 7) {
      const auto pr = p.action_probabilities(t, st);
      ASSERT_NEAR(std::accumulate(pr.begin(), pr.end(), 0.0), 1.0, 1e-9);
    }
}

TEST(SoftPolicy, LastStepIsUniformWhereNothingCanHappen) {
  const Layout& l = open_room();
  RewardSpec spec;
  spec.horizon = 6;
  const SoftPolicy p = soft_value_iteration(l, make_basket({0}, 0), spec, 0.5);
  // (2,2) facing south looks at a wall: every action leads to a timeout
  const auto pr = p.action_probabilities(p.horizon() - 1, AgentState{{2, 2}, Heading::south}, p.full_mask());
  double entropy = 0;
  for (double x : pr) entropy -= x * std::log(x);
  EXPECT_NEAR(entropy, std::log(4.0), 1e-12);
}

TEST(SoftPolicy, LowTemperatureFollowsShortestRoute) {
  const Layout& s = fixture::store();
  for (const char* items : {"bakery", "hot_coffee,bakery", "soft_drinks,hot_food"}) {
    Basket b = fixture::basket(s, items, 1);
    const Trajectory tsp = gen_tsp(s, b);
    b.budget = static_cast<int>(tsp.length());
    const SoftPolicy p = soft_value_iteration(s, b, RewardSpec{}, 1e-3);
    const double best = RewardSpec{}.w_items + RewardSpec{}.w_checkout + RewardSpec{}.w_budget;
    for (int i = 0; i < 50; ++i) {
      Rng rng(derive_seed(1, {static_cast<std::uint64_t>(i)}));
      const RolloutResult r = rollout(p, rng);
      ASSERT_NEAR(r.reward, best, 1e-9) << items;
      ASSERT_EQ(r.trajectory.length(), tsp.length()) << items;
      ASSERT_EQ(move_count(r.trajectory), move_count(tsp)) << items;
    }
  }
}

namespace {

void expect_exact_distribution(const Layout& l, const Basket& b, const RewardSpec& spec, double tau) {
  const SoftPolicy p = soft_value_iteration(l, b, spec, tau);
  const auto seqs = oracle::enumerate_sequences(l, b, spec, p.horizon());
  std::vector<double> rewards;
  for (const auto& q : seqs) rewards.push_back(q.reward);
  const double v0 = log_sum_exp(rewards, tau);
  EXPECT_NEAR(p.value(0, {l.entrance(), l.start_heading()}, p.full_mask()), v0, 1e-9);

  double total = 0;
  std::map<long long, std::vector<double>> by_reward;
  for (const auto& q : seqs) {
    const double prob = oracle::sequence_probability(p, q.actions);
    total += prob;
    ASSERT_NEAR(prob, std::exp((q.reward - v0) / tau), 1e-9) << oracle::sequence_key(q.actions);
    by_reward[std::llround(q.reward * 1e9)].push_back(prob);
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  // equal reward, equal probability: e.g. left-right and right-left idles
  for (const auto& [r, ps] : by_reward)
    for (double x : ps) ASSERT_NEAR(x, ps.front(), 1e-12);
}

}  // namespace

TEST(SoftPolicy, MatchesExhaustiveEnumeration) {
  const Layout& l = open_room();
  RewardSpec spec;
  spec.horizon = 6;
  expect_exact_distribution(l, make_basket({0}, 0), spec, 0.5);
  expect_exact_distribution(l, make_basket({0}, 0, 5), spec, 0.5);
  expect_exact_distribution(l, make_basket({0}, 0, 5), spec, 0.2);
  expect_exact_distribution(l, make_basket({0, 1}, 0, 6), spec, 0.7);
  spec.horizon = 5;
  expect_exact_distribution(l, make_basket({}, 0), spec, 0.5);
}

TEST(SoftPolicy, RolloutsMatchSequenceProbabilities) {
  const Layout& l = open_room();
  RewardSpec spec;
  spec.horizon = 6;
  const SoftPolicy p = soft_value_iteration(l, make_basket({0}, 0, 5), spec, 0.5);
  std::map<std::string, int> counts;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(77, {static_cast<std::uint64_t>(i)}));
    ++counts[oracle::sequence_key(rollout(p, rng).trajectory)];
  }
  for (const auto& [key, c] : counts) {
    if (c < 400) continue;
    std::vector<Action> acts;
    for (char ch : key) acts.push_back(static_cast<Action>(ch - '0'));
    const double q = oracle::sequence_probability(p, acts);
    EXPECT_NEAR(c / static_cast<double>(n), q, 5 * std::sqrt(q * (1 - q) / n) + 1e-4) << key;
  }
}

TEST(SoftPolicy, LongerBudgetGivesLongerTrips) {
  const Layout& s = fixture::store();
  Basket b = fixture::basket(s, "hot_coffee,bakery", 0);
  const auto tsp_len = static_cast<int>(gen_tsp(s, b).length());
  double prev = 0;
  for (double f : {1.0, 1.3, 1.6}) {
    b.budget = static_cast<int>(std::lround(f * tsp_len));
    RewardSpec spec;
    spec.horizon = 2 * *b.budget;
    const SoftPolicy p = soft_value_iteration(s, b, spec, 0.005);
    const RolloutBatch batch = sample_retained(p, 200, 4);
    double mean = 0;
    for (const auto& t : batch.trajectories) {
      mean += static_cast<double>(t.length());
      ASSERT_LE(static_cast<int>(t.length()), spec.horizon);
    }
    mean /= 200;
    EXPECT_GT(mean, prev);
    EXPECT_GE(mean, tsp_len);
    prev = mean;
  }
}

TEST(Sampling, RetainedTrajectoriesCompleteTheBasket) {
  const Layout& s = fixture::store();
  Basket b = fixture::basket(s, "hot_coffee,bakery,fruits_yogurt", 1);
  b.budget = static_cast<int>(std::lround(1.38 * static_cast<double>(gen_tsp(s, b).length())));
  const SoftPolicy p = soft_value_iteration(s, b, RewardSpec{}, 0.005);
  const RolloutBatch batch = sample_retained(p, 300, 21, std::nullopt, 1);
  ASSERT_EQ(batch.trajectories.size(), 300u);
  EXPECT_GT(batch.retention_rate, 0.0);
  EXPECT_LE(batch.retention_rate, 1.0);
  for (const auto& t : batch.trajectories) {
    ASSERT_TRUE(check_trajectory(s, t).empty());
    const EpisodeSummary sum = summarize(s, t);
    ASSERT_EQ(sum.collected, 3);
    ASSERT_TRUE(sum.checked_out);
    ASSERT_EQ(sum.checkout, 1);
  }
  const RolloutBatch again = sample_retained(p, 300, 21, std::nullopt, 3);
  EXPECT_EQ(again.trajectories, batch.trajectories);
  EXPECT_EQ(again.attempts, batch.attempts);
}

TEST(Sampling, UnreachableThresholdRefused) {
  const Layout& l = open_room();
  RewardSpec spec;
  spec.horizon = 6;
  const SoftPolicy p = soft_value_iteration(l, make_basket({0}, 0), spec, 0.5);
  EXPECT_THROW(sample_retained(p, 5, 1, 10.0), RuntimeError);
}

TEST(Sampling, EssentialTripsSometimesPassImpulseShelves) {
  const Layout& s = fixture::store();
  std::vector<Trajectory> all;
  for (int checkout = 0; checkout < 2; ++checkout) {
    Basket b = fixture::basket(s, "hot_coffee,bakery", checkout);
    b.budget = static_cast<int>(std::lround(1.38 * static_cast<double>(gen_tsp(s, b).length())));
    RewardSpec spec;
    spec.horizon = 2 * *b.budget;
    const SoftPolicy p = soft_value_iteration(s, b, spec, 0.005);
    auto batch = sample_retained(p, 5000, 8 + static_cast<std::uint64_t>(checkout));
    all.insert(all.end(), batch.trajectories.begin(), batch.trajectories.end());
  }
  const ShelfTraffic traffic = shelf_traffic(all, s);
  double visits = 0;
  for (const char* id : {"soft_drinks", "fruits_yogurt"})
    for (Cell c : s.shelves_of(s.category_index(id))) visits += traffic.at(c);
  EXPECT_GT(visits, 0.0);
}

TEST(PolicyCache, RoundTrip) {
  const Layout& l = open_room();
  RewardSpec spec;
  spec.horizon = 6;
  const Basket b = make_basket({0}, 0, 5);
  const auto dir = scratch("cache");
  const SoftPolicy solved = solve_cached(dir, l, b, spec, 0.5);
  ASSERT_EQ(std::distance(std::filesystem::directory_iterator(dir), {}), 1);
  const SoftPolicy loaded = solve_cached(dir, l, b, spec, 0.5);
  EXPECT_EQ(loaded.raw_values(), solved.raw_values());

  const auto file = std::filesystem::directory_iterator(dir)->path();
  EXPECT_FALSE(load_policy(file, l, b, spec, 0.25).has_value());
  EXPECT_FALSE(load_policy(dir / "missing.sgpol", l, b, spec, 0.5).has_value());
  {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << "garbage!";
  }
  EXPECT_THROW(load_policy(file, l, b, spec, 0.5), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST(Generation, WorkerCountDoesNotMatter) {
  const Layout& s = fixture::store();
  const std::vector<Basket> conds{fixture::basket(s, "bakery", 0, 40), fixture::basket(s, "hot_food", 1, 50),
                                  fixture::basket(s, "bakery", 0, 40)};
  MaxEntSettings ms;
  ms.tau = 0.01;
  const MaxEntRun a = generate_maxent(s, conds, ms, 3, 1);
  const MaxEntRun b = generate_maxent(s, conds, ms, 3, 2);
  EXPECT_EQ(a.trajectories, b.trajectories);
  EXPECT_EQ(a.policies, 2u);
  EXPECT_EQ(a.trajectories[0].id, "maxent-0");
}
