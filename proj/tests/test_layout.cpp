#include <gtest/gtest.h>

#include "support/fixtures.hpp"

using namespace storegrid;
using fixture::make_layout;

TEST(Layout, FixtureStoreLoads) {
  const Layout& s = fixture::store();
  EXPECT_EQ(s.width(), 16);
  EXPECT_EQ(s.height(), 36);
  EXPECT_EQ(s.category_count(), 11);
  ASSERT_EQ(s.checkouts().size(), 2u);
  EXPECT_EQ(s.checkouts()[0], (Cell{9, 5}));
  EXPECT_DOUBLE_EQ(s.cell_size(), 0.5);
}

TEST(Layout, MinimalRoomIsValid) {
  const Layout l = make_layout({"###", "E.C", "###"});
  EXPECT_EQ(l.entrance(), (Cell{0, 1}));
  EXPECT_EQ(l.checkouts().size(), 1u);
  EXPECT_TRUE(l.shelves().empty());
}

TEST(Layout, ShelfOnEntranceReportsCoordinate) {
  auto doc = fixture::layout_doc({"#S#", "..C", "###"});
  doc["entrance"] = {1, 0};
  try {
    parse_layout(doc);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("(1,0)"), std::string::npos) << e.what();
  }
}

TEST(Layout, UnreachableFloorRejected) {
  EXPECT_THROW(make_layout({"#####", "E.#.C", "#####"}), ValidationError);
  EXPECT_THROW(make_layout({"######", "E.C#.#", "######"}), ValidationError);
}

TEST(Layout, UnknownCategoryAndFieldRejected) {
  auto doc = fixture::layout_doc({"#S#", "E.C", "###"}, {{"a", {{1, 0}}}});
  doc["placements"]["ghost"] = nlohmann::json::array({nlohmann::json::array({1, 0})});
  EXPECT_THROW(parse_layout(doc), ValidationError);

  auto doc2 = fixture::layout_doc({"#S#", "E.C", "###"}, {{"a", {{1, 0}}}});
  doc2["colour"] = "red";
  EXPECT_THROW(parse_layout(doc2), ValidationError);

  auto doc3 = fixture::layout_doc({"#S#", "E.C", "###"}, {{"a", {{1, 0}}}});
  doc3["version"] = 2;
  EXPECT_THROW(parse_layout(doc3), ValidationError);
}

TEST(Layout, PlacementMustBeOnShelf) {
  EXPECT_THROW(make_layout({"#S#", "E.C", "###"}, {{"a", {{1, 1}}}}), ValidationError);
}

TEST(Layout, TwoCategoriesOnOneShelfRejected) {
  EXPECT_THROW(make_layout({"#S#", "E.C", "###"}, {{"a", {{1, 0}}}, {"b", {{1, 0}}}}), ValidationError);
}

TEST(Layout, PerUnitProfitIsPriceTimesMargin) {
  for (const auto& c : fixture::store().categories()) {
    EXPECT_EQ(c.per_unit_profit(), c.price * c.margin);
    EXPECT_GE(c.price, 0.0);
    EXPECT_GE(c.margin, 0.0);
    EXPECT_LE(c.margin, 1.0);
  }
}

TEST(Layout, RoundTripIsIdempotent) {
  const Layout& s = fixture::store();
  const std::string once = serialize_layout(s);
  const Layout back = load_layout(once);
  EXPECT_EQ(back, s);
  EXPECT_EQ(serialize_layout(back), once);
  EXPECT_EQ(layout_hash(back), layout_hash(s));
}

TEST(Reposition, MovesCategoryAndKeepsOriginal) {
  const Layout& s = fixture::store();
  const int sd = s.category_index("soft_drinks");
  const auto before = s.shelves_of(sd);
  const auto free = s.unoccupied_shelves();
  const std::vector<Cell> targets{free[0], free[1]};
  const Layout moved = reposition(s, sd, targets);
  EXPECT_EQ(moved.shelves_of(sd), targets);
  for (Cell c : before) EXPECT_EQ(moved.category_at(c), -1);
  EXPECT_EQ(s.shelves_of(sd), before);

  for (int i = 0; i < s.cell_count(); ++i) EXPECT_EQ(moved.kind(s.cell_at(i)), s.kind(s.cell_at(i)));
  EXPECT_EQ(moved.entrance(), s.entrance());
  EXPECT_EQ(moved.checkouts(), s.checkouts());
  // reachability still holds: every walkable cell reached from the entrance
  const DistanceField f(moved, std::vector<Cell>{moved.entrance()});
  for (Cell c : moved.walkable_cells()) EXPECT_NE(f.at(c), kUnreachable);
}

TEST(Reposition, AddModeKeepsOldShelves) {
  const Layout& s = fixture::store();
  const int sd = s.category_index("soft_drinks");
  const auto free = s.unoccupied_shelves();
  const std::vector<Cell> targets{free[0]};
  const Layout added = reposition(s, sd, targets, RepositionMode::add);
  EXPECT_EQ(added.shelves_of(sd).size(), s.shelves_of(sd).size() + 1);
}

TEST(Reposition, OntoOwnShelvesIsIdentity) {
  const Layout& s = fixture::store();
  const int fy = s.category_index("fruits_yogurt");
  EXPECT_EQ(reposition(s, fy, s.shelves_of(fy)), s);
}

TEST(Reposition, OccupiedOrNonShelfTargetRejected) {
  const Layout& s = fixture::store();
  const int sd = s.category_index("soft_drinks");
  const std::vector<Cell> occupied{s.shelves_of(s.category_index("bakery")).front()};
  EXPECT_THROW(reposition(s, sd, occupied), ValidationError);
  const std::vector<Cell> floor{s.entrance()};
  EXPECT_THROW(reposition(s, sd, floor), ValidationError);
  EXPECT_THROW(reposition(s, 99, occupied), ValidationError);
}

TEST(Basket, Validation) {
  const Layout& s = fixture::store();
  EXPECT_NO_THROW(check_basket(s, fixture::basket(s, "bakery,hot_coffee", 1)));
  EXPECT_THROW(check_basket(s, make_basket({0}, 2)), ValidationError);
  EXPECT_THROW(check_basket(s, make_basket({42}, 0)), ValidationError);
  EXPECT_THROW(check_basket(s, make_basket({0}, 0, 0)), ValidationError);
  EXPECT_THROW(parse_items(s, "bakery,unicorns"), ValidationError);
  EXPECT_EQ(parse_items(s, " bakery , hot_coffee,bakery"), parse_items(s, "hot_coffee,bakery"));
}
