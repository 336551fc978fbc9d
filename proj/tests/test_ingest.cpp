#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support/fixtures.hpp"

using namespace storegrid;
using fixture::make_layout;

namespace {

// Corridor along row 1, shelves of "a" above it, "b" far below.
const Layout& corridor() {
  static const Layout l = make_layout({"##S#S##", "E.....C", "#.###.#", "#S#####"},
                                      {{"a", {{2, 0}, {4, 0}}}, {"b", {{1, 3}}}});
  return l;
}

const Layout& corridor_single() {
  static const Layout l = make_layout({"##S#S##", "E.....C", "#.###.#", "#S#####"},
                                      {{"a", {{2, 0}}}, {"b", {{1, 3}}}});
  return l;
}

Sample at(double t, Cell c, double size = 0.5) { return {t, (c.col + 0.5) * size, (c.row + 0.5) * size}; }

RawTrajectory walk_row(std::vector<int> basket) {
  RawTrajectory r;
  r.id = "walk";
  for (int col = 1; col <= 5; ++col) r.samples.push_back(at(col, {col, 1}));
  r.basket = std::move(basket);
  return r;
}

Trajectory processed(const Layout& l, const RawTrajectory& r) {
  const auto res = preprocess(r, l);
  if (!std::holds_alternative<Trajectory>(res)) throw std::runtime_error(std::get<Rejection>(res).detail);
  return std::get<Trajectory>(res);
}

}  // namespace

TEST(Discretize, FloorsByCellSize) {
  const Layout& s = fixture::store();
  EXPECT_EQ(discretize(s, 0.3, 0.4), (Cell{0, 0}));
  EXPECT_EQ(discretize(s, 0.5, 0.99), (Cell{1, 1}));
  EXPECT_EQ(discretize(s, 7.9, 17.6), (Cell{15, 35}));
}

TEST(Preprocess, ProducesValidTrajectory) {
  const Layout& l = corridor_single();
  const Trajectory t = processed(l, walk_row({0}));
  EXPECT_TRUE(check_trajectory(l, t).empty());
  EXPECT_EQ(t.steps.front().state.cell, l.entrance());
  EXPECT_EQ(t.steps.back().action, Action::interact);
  EXPECT_EQ(t.conditions.checkout, 0);
  EXPECT_EQ(t.conditions.items, std::vector<int>{0});
  EXPECT_EQ(move_count(t), 5);
}

TEST(Preprocess, SnapsShelfSamplesAndDropsOutOfBounds) {
  const Layout& l = corridor_single();
  RawTrajectory r = walk_row({0});
  r.samples.insert(r.samples.begin() + 1, at(1.5, {2, 0}));       // inside a shelf
  r.samples.push_back({6.0, -3.0, 100.0});                         // off the map
  const Trajectory t = processed(l, r);
  EXPECT_TRUE(check_trajectory(l, t).empty());
  for (const auto& st : t.steps) EXPECT_TRUE(l.walkable(st.state.cell));
  EXPECT_EQ(move_count(t), 5);
}

TEST(Preprocess, RejectsMissingBasket) {
  RawTrajectory r = walk_row({0});
  r.basket.reset();
  const auto res = preprocess(r, corridor_single());
  ASSERT_TRUE(std::holds_alternative<Rejection>(res));
  EXPECT_EQ(std::get<Rejection>(res).reason, RejectReason::no_basket);
}

TEST(Preprocess, RejectsEmptyAfterTrim) {
  RawTrajectory r = walk_row({0});
  r.samples = {{1.0, 100.0, 100.0}};
  const auto res = preprocess(r, corridor_single());
  ASSERT_TRUE(std::holds_alternative<Rejection>(res));
  EXPECT_EQ(std::get<Rejection>(res).reason, RejectReason::empty_after_trim);
}

TEST(Preprocess, NonIncreasingTimestampsThrow) {
  RawTrajectory r = walk_row({0});
  r.samples[2].t = r.samples[1].t;
  EXPECT_THROW(preprocess(r, corridor_single()), ValidationError);
}

TEST(Preprocess, CheckoutTimestampTrims) {
  RawTrajectory r = walk_row({0});
  r.checkout_ts = 3.0;
  const Trajectory t = processed(corridor_single(), r);
  // the log stops at (3,1); the route is extended to the checkout anyway
  EXPECT_TRUE(check_trajectory(corridor_single(), t).empty());
  EXPECT_EQ(move_count(t), 5);
}

TEST(Pickups, ClosestApproachStep) {
  const Layout& l = corridor_single();
  const Trajectory t = processed(l, walk_row({0}));
  // steps: right at (0,1), then forwards at (0,1) (1,1) (2,1) (3,1) (4,1), interact at (5,1)
  const auto a = attribute_pickups(t, l);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].step, 3);
  EXPECT_EQ(a[0].distance, 1);
  EXPECT_FALSE(a[0].flagged);
}

TEST(Pickups, TiesGoToLatestStep) {
  const Layout& l = corridor();
  const Trajectory t = processed(l, walk_row({0}));
  const auto a = attribute_pickups(t, l);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].step, 5);  // (4,1) is as close as (2,1) and later
}

TEST(Pickups, FarItemIsFlagged) {
  const Layout& l = corridor_single();
  const Trajectory t = processed(l, walk_row({1}));
  const auto a = attribute_pickups(t, l);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_TRUE(a[0].flagged);
  EXPECT_EQ(a[0].distance, 2);
  EXPECT_EQ(a[0].step, 2);  // the single step taken from (1,1)
}

TEST(Pickups, EmptyBasketHasNoPickups) {
  const Layout& l = corridor_single();
  const Trajectory t = processed(l, walk_row({}));
  EXPECT_TRUE(attribute_pickups(t, l).empty());
  const Trajectory inferred = infer_pickups(t, l);
  EXPECT_TRUE(inferred.pickups.empty());
  EXPECT_EQ(inferred.steps, t.steps);
}

TEST(Pickups, InferredTrajectoryIsConsistent) {
  const Layout& l = corridor_single();
  const Trajectory t = infer_pickups(processed(l, walk_row({0, 1})), l);
  EXPECT_TRUE(check_trajectory(l, t).empty());
  ASSERT_EQ(t.pickups.size(), 2u);
  int real = 0;
  for (const auto& p : t.pickups) real += p.flagged ? 0 : 1;
  EXPECT_EQ(real, 1);
  const EpisodeSummary s = summarize(l, t);
  EXPECT_EQ(s.collected, 1);
  EXPECT_TRUE(s.checked_out);
}

TEST(Preprocess, RandomLogsOnFixtureStore) {
  const Layout& s = fixture::store();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ux(-0.5, s.width() * s.cell_size() + 0.5);
  std::uniform_real_distribution<double> uy(-0.5, s.height() * s.cell_size() + 0.5);
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    RawTrajectory r;
    r.id = "r" + std::to_string(i);
    const int n = 1 + static_cast<int>(rng() % 15);
    for (int k = 0; k < n; ++k) r.samples.push_back({static_cast<double>(k), ux(rng), uy(rng)});
    if (rng() % 10 != 0) {
      std::vector<int> items;
      for (int c = 0; c < s.category_count(); ++c)
        if (rng() % 4 == 0) items.push_back(c);
      r.basket = items;
    }
    const auto a = preprocess(r, s);
    const auto b = preprocess(r, s);
    ASSERT_EQ(a.index(), b.index());
    if (const auto* t = std::get_if<Trajectory>(&a)) {
      ++accepted;
      ASSERT_EQ(*t, std::get<Trajectory>(b));
      ASSERT_TRUE(check_trajectory(s, *t).empty()) << r.id;
      const Trajectory inferred = infer_pickups(*t, s);
      ASSERT_TRUE(check_trajectory(s, inferred).empty()) << r.id;
      ASSERT_EQ(inferred.pickups.size(), t->conditions.items.size());
      ASSERT_EQ(inferred, infer_pickups(*t, s));
    } else {
      const auto reason = std::get<Rejection>(a).reason;
      ASSERT_EQ(reason, r.basket ? RejectReason::empty_after_trim : RejectReason::no_basket);
    }
  }
  EXPECT_GT(accepted, 800);
}

TEST(Records, RawRoundTrip) {
  const Layout& l = corridor_single();
  RawTrajectory r = walk_row({0, 1});
  r.checkout_ts = 4.5;
  const RawTrajectory back = raw_from_json(l, nlohmann::json::parse(raw_to_json(l, r).dump()));
  EXPECT_EQ(back, r);

  auto j = nlohmann::json::parse(raw_to_json(l, r).dump());
  j["extra"] = 1;
  EXPECT_THROW(raw_from_json(l, j), ValidationError);
  j.erase("extra");
  j["samples"][0] = {1.0, 2.0};
  EXPECT_THROW(raw_from_json(l, j), ValidationError);
}

TEST(Records, TrajectoryRoundTrip) {
  const Layout& l = corridor_single();
  const Trajectory t = infer_pickups(processed(l, walk_row({0, 1})), l);
  std::stringstream buf;
  write_trajectories(buf, l, std::span<const Trajectory>(&t, 1));
  const auto back = read_trajectories(buf, l);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], t);

  std::stringstream bad("{\"id\":\"x\",\"conditions\":{\"items\":[],\"checkout\":0},\"steps\":[[0,1,\"Q\",\"forward\"]],"
                        "\"pickups\":[]}\n");
  EXPECT_THROW(read_trajectories(bad, l), ValidationError);
  std::stringstream garbage("not json\n");
  EXPECT_THROW(read_trajectories(garbage, l), ValidationError);
}
