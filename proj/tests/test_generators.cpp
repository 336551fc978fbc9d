#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace storegrid;
using fixture::make_layout;

namespace {

std::vector<Basket> mix_conditions(std::size_t n, std::uint64_t seed) {
  const BasketMix mix = load_basket_mix(fixture::store(), fixture::data_path("basket_mix.json"));
  return sample_conditions(mix, n, seed);
}

double mean_moves(const std::vector<Trajectory>& ts) {
  double s = 0;
  for (const auto& t : ts) s += move_count(t);
  return s / static_cast<double>(ts.size());
}

}  // namespace

TEST(Tsp, MatchesBruteForceOnFixtureStore) {
  const Layout& s = fixture::store();
  const std::vector<std::string> baskets{"bakery", "hot_coffee,bakery", "soft_drinks,cold_food,hot_food",
                                         "fountain_drinks,energy_drinks,cold_coffee,snack_bars", ""};
  for (const auto& items : baskets)
    for (int checkout = 0; checkout < 2; ++checkout) {
      const Basket b = fixture::basket(s, items, checkout);
      const RoutingContext ctx(s, b);
      const RoutePlan plan = plan_tsp(ctx);
      const auto expected = oracle::brute_force_route(s, b);
      ASSERT_TRUE(expected);
      EXPECT_EQ(plan.length, *expected) << items << " @" << checkout;
      const Trajectory t = gen_tsp(s, b);
      EXPECT_EQ(move_count(t), plan.length);
      EXPECT_TRUE(check_trajectory(s, t).empty());
      const EpisodeSummary sum = summarize(s, t);
      EXPECT_EQ(sum.collected, static_cast<int>(b.items.size()));
      EXPECT_EQ(sum.wrong, 0);
      EXPECT_EQ(sum.checkout, checkout);
    }
}

TEST(Tsp, MatchesBruteForceOnRandomLayouts) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 15; ++trial) {
    const Layout l = oracle::random_layout(rng, 9, 9, 5);
    for (int k = 0; k <= 3; ++k) {
      std::vector<int> items;
      for (int i = 0; i < k; ++i) items.push_back(static_cast<int>(rng() % 5));
      const Basket b = make_basket(items, 0);
      const auto expected = oracle::brute_force_route(l, b);
      if (!expected) {
        EXPECT_THROW(gen_tsp(l, b), RuntimeError);
        continue;
      }
      const Trajectory t = gen_tsp(l, b);
      EXPECT_EQ(move_count(t), *expected);
      EXPECT_TRUE(check_trajectory(l, t).empty());
    }
  }
}

TEST(Tsp, EmptyBasketGoesStraightToCheckout) {
  const Layout l = make_layout({"#S#S###", "E.....C", "#######"}, {{"a", {{1, 0}}}, {"b", {{3, 0}}}});
  const Trajectory t = gen_tsp(l, make_basket({}, 0));
  EXPECT_TRUE(t.pickups.empty());
  EXPECT_EQ(move_count(t), 5);
  // right, five forwards, interact
  EXPECT_EQ(t.length(), 7u);
}

TEST(Tsp, CapacityCapIsEnforced) {
  const Layout& s = fixture::store();
  std::vector<int> all;
  for (int c = 0; c < s.category_count(); ++c) all.push_back(c);
  EXPECT_THROW(gen_tsp(s, make_basket(all, 0), 5), CapacityError);
}

TEST(Tsp, EssentialBasketsAvoidImpulseShelves) {
  const Layout& s = fixture::store();
  std::vector<Trajectory> ts;
  for (const char* items : {"bakery", "hot_coffee,bakery", "hot_coffee"})
    for (int checkout = 0; checkout < 2; ++checkout) ts.push_back(gen_tsp(s, fixture::basket(s, items, checkout)));
  const ShelfTraffic traffic = shelf_traffic(ts, s);
  for (const char* id : {"soft_drinks", "fruits_yogurt"})
    for (Cell c : s.shelves_of(s.category_index(id))) EXPECT_EQ(traffic.at(c), 0.0) << id << to_string(c);
}

TEST(Pnn, InverseDistanceLaw) {
  const Layout l = make_layout({"#S#S###", "E.....C", "#######"}, {{"a", {{1, 0}}}, {"b", {{3, 0}}}});
  const std::vector<int> remaining{0, 1};
  const auto p = pnn_probabilities(l, l.entrance(), remaining);
  EXPECT_NEAR(p[0], 0.75, 1e-12);
  EXPECT_NEAR(p[1], 0.25, 1e-12);
  const auto sq = pnn_probabilities(l, l.entrance(), remaining, 2.0);
  EXPECT_NEAR(sq[0], 0.9, 1e-12);
  const auto flat = pnn_probabilities(l, l.entrance(), remaining, 0.0);
  EXPECT_NEAR(flat[0], 0.5, 1e-12);
  // standing at an approach cell takes all the mass
  const auto here = pnn_probabilities(l, {3, 1}, remaining);
  EXPECT_EQ(here[1], 1.0);
}

TEST(Pnn, EmpiricalFrequencies) {
  const Layout l = make_layout({"#S#S###", "E.....C", "#######"}, {{"a", {{1, 0}}}, {"b", {{3, 0}}}});
  const Basket b = make_basket({0, 1}, 0);
  int first_a = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(5, {static_cast<std::uint64_t>(i)}));
    const Trajectory t = gen_pnn(l, b, rng);
    ASSERT_EQ(t.pickups.size(), 2u);
    first_a += t.pickups[0].category == 0 ? 1 : 0;
  }
  EXPECT_NEAR(first_a / static_cast<double>(n), 0.75, 0.01);
}

TEST(Pnn, TrajectoriesAreValidAndDeterministic) {
  const Layout& s = fixture::store();
  const auto conds = mix_conditions(200, 3);
  const auto a = generate_pnn(s, conds, 11, 1.0, 1);
  const auto b = generate_pnn(s, conds, 11, 1.0, 3);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(check_trajectory(s, a[i]).empty());
    EXPECT_EQ(summarize(s, a[i]).collected, static_cast<int>(conds[i].items.size()));
  }
}

TEST(Human, ZeroSpreadIsOptimal) {
  const Layout& s = fixture::store();
  const auto conds = mix_conditions(100, 4);
  const auto human = generate_human(s, conds, 0.0, 9);
  const auto tsp = generate_tsp(s, conds);
  for (std::size_t i = 0; i < conds.size(); ++i) {
    EXPECT_EQ(move_count(human[i]), move_count(tsp[i]));
    EXPECT_TRUE(check_trajectory(s, human[i]).empty());
  }
}

TEST(Human, CalibrationHitsDetourTargets) {
  const Layout& s = fixture::store();
  const auto conds = mix_conditions(400, 6);
  const auto tsp = generate_tsp(s, conds);

  const HumanCalibration zero = calibrate_on(s, conds, {0.0, 200, 1000}, 1);
  EXPECT_EQ(zero.spread, 0.0);
  EXPECT_NEAR(zero.achieved_ratio, 1.0, 0.02);

  const HumanCalibration cal = calibrate_on(s, conds, {0.28, 200, 1000}, 1);
  EXPECT_GT(cal.spread, 0.0);
  // fresh draws, independent of the calibration batch
  const auto human = generate_human(s, conds, cal.spread, 12345);
  double ratio = 0;
  for (std::size_t i = 0; i < conds.size(); ++i)
    ratio += static_cast<double>(move_count(human[i])) / std::max(1, move_count(tsp[i]));
  ratio /= static_cast<double>(conds.size());
  EXPECT_NEAR(ratio, 1.28, 0.03);
  for (const auto& t : human) EXPECT_TRUE(check_trajectory(s, t).empty());
}

TEST(Human, UnreachableTargetFails) {
  // the only detour is back through the entrance, so the length ratio
  // saturates near 2
  const Layout l = make_layout({"#S##", "E.C#", "####"}, {{"a", {{1, 0}}}});
  const std::vector<Basket> b{make_basket({0}, 0)};
  EXPECT_THROW(calibrate_human(l, b, 3.0, 1, 200), CalibrationError);
}

TEST(Generators, LengthOrdering) {
  const Layout& s = fixture::store();
  const auto conds = mix_conditions(300, 8);
  const auto tsp = generate_tsp(s, conds);
  const auto pnn = generate_pnn(s, conds, 2);
  const HumanCalibration cal = calibrate_on(s, conds, {0.28, 200, 1000}, 2);
  const auto human = generate_human(s, conds, cal.spread, 3);
  for (std::size_t i = 0; i < conds.size(); ++i) EXPECT_LE(move_count(tsp[i]), move_count(pnn[i]));
  EXPECT_LE(mean_moves(tsp), mean_moves(pnn));
  EXPECT_LE(mean_moves(pnn), mean_moves(human));
}

TEST(Upsample, ExactCountFromInput) {
  const Layout& s = fixture::store();
  const auto src = generate_tsp(s, mix_conditions(7, 1));
  Rng a(3), b(3);
  const auto up = upsample(src, 50, a);
  EXPECT_EQ(up.size(), 50u);
  for (const auto& t : up) EXPECT_NE(std::find(src.begin(), src.end(), t), src.end());
  EXPECT_EQ(up, upsample(src, 50, b));
  Rng c(3);
  EXPECT_EQ(upsample(src, 3, c).size(), 3u);
  EXPECT_THROW(upsample(std::span<const Trajectory>{}, 3, c), ValidationError);
  EXPECT_THROW(upsample(src, 0, c), ValidationError);
}
