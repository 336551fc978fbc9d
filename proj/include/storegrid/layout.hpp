#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "storegrid/error.hpp"
#include "storegrid/grid.hpp"

namespace storegrid {

enum class CellKind : std::uint8_t { floor, wall, shelf, entrance, checkout };

char kind_char(CellKind k);

std::optional<CellKind> kind_from_char(char c);

/// A product category. Each shelf cell holds at most one category; a
/// category may span several shelf cells.
struct Category {
  std::string id;    // slug used in files and on the command line
  std::string name;  // display name
  double price = 0.0;
  double margin = 0.05;

  double per_unit_profit() const { return price * margin; }
  friend bool operator==(const Category&, const Category&) = default;
};

/// Shopping conditions for one trip: which categories to buy, at which
/// checkout to pay, and optionally how many actions the trip should take.
struct Basket {
  std::vector<int> items;  // sorted, unique category indices
  int checkout = 0;        // index into Layout::checkouts()
  std::optional<int> budget;

  friend bool operator==(const Basket&, const Basket&) = default;
};

inline Basket make_basket(std::vector<int> items, int checkout,
                          std::optional<int> budget = std::nullopt) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return Basket{std::move(items), checkout, budget};
}

/// Raw, unvalidated description of a store. `Layout` is built from this.
struct LayoutSpec {
  std::string name;
  std::string notes;
  int width = 0;
  int height = 0;
  double cell_size = 0.5;
  std::vector<std::string> rows;
  std::optional<Cell> entrance;             // defaults to the 'E' cell
  std::optional<std::vector<Cell>> checkouts;  // defaults to 'C' cells in scan order
  std::vector<Category> categories;
  std::vector<std::pair<std::string, std::vector<Cell>>> placements;
};

/// The discretized store. Immutable once constructed; every invariant is
/// checked by the constructor and violations are reported with coordinates.
class Layout {
 public:
  explicit Layout(const LayoutSpec& spec);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  const std::string& name() const { return name_; }
  const std::string& notes() const { return notes_; }
  int cell_count() const { return width_ * height_; }

  bool in_bounds(Cell c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }
  int index(Cell c) const { return c.row * width_ + c.col; }
  Cell cell_at(int idx) const { return {idx % width_, idx / width_}; }

  /// Out-of-bounds cells behave as walls.
  CellKind kind(Cell c) const {
    return in_bounds(c) ? kinds_[static_cast<std::size_t>(index(c))] : CellKind::wall;
  }
  bool walkable(Cell c) const {
    const CellKind k = kind(c);
    return k == CellKind::floor || k == CellKind::entrance;
  }

  /// Category index on a shelf cell, or -1.
  int category_at(Cell c) const {
    return in_bounds(c) ? placement_[static_cast<std::size_t>(index(c))] : -1;
  }

  const std::vector<Category>& categories() const { return categories_; }
  int category_count() const { return static_cast<int>(categories_.size()); }
  int category_index(std::string_view id) const {
    for (std::size_t i = 0; i < categories_.size(); ++i)
      if (categories_[i].id == id) return static_cast<int>(i);
    throw ValidationError("unknown category '" + std::string(id) + "'");
  }
  const Category& category(int idx) const { return categories_.at(static_cast<std::size_t>(idx)); }

  /// Shelf cells holding `cat`, in scan order.
  std::vector<Cell> shelves_of(int cat) const {
    std::vector<Cell> out;
    for (int i = 0; i < cell_count(); ++i)
      if (placement_[static_cast<std::size_t>(i)] == cat) out.push_back(cell_at(i));
    return out;
  }
  std::vector<Cell> shelves() const { return cells_of_kind(CellKind::shelf); }
  std::vector<Cell> unoccupied_shelves() const {
    std::vector<Cell> out;
    for (Cell c : shelves())
      if (category_at(c) < 0) out.push_back(c);
    return out;
  }
  std::vector<Cell> walkable_cells() const {
    std::vector<Cell> out;
    for (int i = 0; i < cell_count(); ++i)
      if (walkable(cell_at(i))) out.push_back(cell_at(i));
    return out;
  }

  Cell entrance() const { return entrance_; }
  Heading start_heading() const { return Heading::north; }
  const std::vector<Cell>& checkouts() const { return checkouts_; }
  int checkout_index(Cell c) const {
    for (std::size_t i = 0; i < checkouts_.size(); ++i)
      if (checkouts_[i] == c) return static_cast<int>(i);
    return -1;
  }

  /// Walkable 4-neighbours of `target`, in N, E, S, W order.
  std::vector<Cell> approach_cells(Cell target) const {
    std::vector<Cell> out;
    for (Heading h : kHeadings)
      if (walkable(neighbour(target, h))) out.push_back(neighbour(target, h));
    return out;
  }

  /// Walkable cells 4-adjacent to any shelf of `cat`, in scan order.
  std::vector<Cell> approach_cells_of_category(int cat) const {
    std::vector<Cell> out;
    for (Cell s : shelves_of(cat))
      for (Cell a : approach_cells(s)) out.push_back(a);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// True when `c` is 4-adjacent to a shelf holding `cat`.
  bool touches_category(Cell c, int cat) const {
    for (Heading h : kHeadings)
      if (category_at(neighbour(c, h)) == cat) return true;
    return false;
  }

  /// Spec that reproduces this layout exactly.
  LayoutSpec spec() const;

  friend bool operator==(const Layout& a, const Layout& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.cell_size_ == b.cell_size_ &&
           a.kinds_ == b.kinds_ && a.placement_ == b.placement_ &&
           a.categories_ == b.categories_ && a.checkouts_ == b.checkouts_ &&
           a.entrance_ == b.entrance_ && a.name_ == b.name_ && a.notes_ == b.notes_;
  }

 private:
  std::vector<Cell> cells_of_kind(CellKind k) const {
    std::vector<Cell> out;
    for (int i = 0; i < cell_count(); ++i)
      if (kinds_[static_cast<std::size_t>(i)] == k) out.push_back(cell_at(i));
    return out;
  }

  std::string name_;
  std::string notes_;
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.5;
  std::vector<CellKind> kinds_;
  std::vector<int> placement_;
  std::vector<Category> categories_;
  std::vector<Cell> checkouts_;
  Cell entrance_{};
};

namespace detail {

inline void fail(std::vector<std::string>& issues, std::string msg) {
  issues.push_back(std::move(msg));
}

}  // namespace detail



// ---------------------------------------------------------------------------
// Layout file (JSON)

inline constexpr std::string_view kLayoutFormat = "storegrid-layout";
inline constexpr int kLayoutVersion = 1;

namespace detail {

inline Cell cell_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ValidationError("expected a [column, row] pair, got " + j.dump());
  return {j[0].get<int>(), j[1].get<int>()};
}

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                                std::string_view where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ValidationError("unknown field '" + it.key() + "' in " + std::string(where));
}

template <typename T>
T required(const nlohmann::json& j, const char* key, std::string_view where) {
  if (!j.contains(key)) throw ValidationError("missing field '" + std::string(key) + "' in " + std::string(where));
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad field '" + std::string(key) + "' in " + std::string(where) + ": " + e.what());
  }
}

}  // namespace detail

Layout parse_layout(const nlohmann::json& doc);

Layout load_layout(std::string_view text);

Layout load_layout_file(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const Layout& layout);

inline std::string serialize_layout(const Layout& layout) { return to_json(layout).dump(2) + "\n"; }

/// FNV-1a over the canonical serialization; used to key caches and manifests.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ull);

inline std::uint64_t layout_hash(const Layout& layout) { return fnv1a(to_json(layout).dump()); }

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

enum class RepositionMode { move, add };

/// Returns a copy of `layout` in which `category` sits on `targets`. In the
/// default move mode its previous shelves are vacated.
Layout reposition(const Layout& layout, int category, std::span<const Cell> targets,
                  RepositionMode mode = RepositionMode::move);

/// Checks that every category id in `basket` is valid for `layout`.
void check_basket(const Layout& layout, const Basket& basket);

/// Parses "hot_coffee,bakery" into category indices.
std::vector<int> parse_items(const Layout& layout, std::string_view csv);

}  // namespace storegrid
