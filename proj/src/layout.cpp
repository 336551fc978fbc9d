#include "storegrid/layout.hpp"

namespace storegrid {

char kind_char(CellKind k) {
  switch (k) {
    case CellKind::floor: return '.';
    case CellKind::wall: return '#';
    case CellKind::shelf: return 'S';
    case CellKind::entrance: return 'E';
    case CellKind::checkout: return 'C';
  }
  return '?';
}

std::optional<CellKind> kind_from_char(char c) {
  switch (c) {
    case '.': return CellKind::floor;
    case '#': return CellKind::wall;
    case 'S': return CellKind::shelf;
    case 'E': return CellKind::entrance;
    case 'C': return CellKind::checkout;
    default: return std::nullopt;
  }
}

Layout::Layout(const LayoutSpec& spec)
    : name_(spec.name),
      notes_(spec.notes),
      width_(spec.width),
      height_(spec.height),
      cell_size_(spec.cell_size),
      categories_(spec.categories) {
  std::vector<std::string> issues;
  if (width_ <= 0 || height_ <= 0)
    throw ValidationError("layout dimensions must be positive, got " + std::to_string(width_) +
                          "x" + std::to_string(height_));
  if (!(cell_size_ > 0.0)) throw ValidationError("cell size must be positive");
  if (static_cast<int>(spec.rows.size()) != height_)
    throw ValidationError("grid has " + std::to_string(spec.rows.size()) + " rows, expected " +
                          std::to_string(height_));

  kinds_.assign(static_cast<std::size_t>(width_ * height_), CellKind::wall);
  placement_.assign(kinds_.size(), -1);
  std::vector<Cell> entrances, grid_checkouts;
  for (int r = 0; r < height_; ++r) {
    const std::string& row = spec.rows[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.size()) != width_)
      throw ValidationError("grid row " + std::to_string(r) + " has " +
                            std::to_string(row.size()) + " cells, expected " +
                            std::to_string(width_));
    for (int c = 0; c < width_; ++c) {
      const auto k = kind_from_char(row[static_cast<std::size_t>(c)]);
      if (!k) {
        detail::fail(issues, "unknown cell kind '" + std::string(1, row[static_cast<std::size_t>(c)]) +
                                 "' at " + to_string(Cell{c, r}));
        continue;
      }
      kinds_[static_cast<std::size_t>(index({c, r}))] = *k;
      if (*k == CellKind::entrance) entrances.push_back({c, r});
      if (*k == CellKind::checkout) grid_checkouts.push_back({c, r});
    }
  }

  if (entrances.size() != 1) {
    std::string where;
    for (Cell e : entrances) where += " " + to_string(e);
    detail::fail(issues, "layout must have exactly one entrance, found " +
                             std::to_string(entrances.size()) + where);
  } else {
    entrance_ = entrances.front();
  }
  if (spec.entrance && (entrances.empty() || *spec.entrance != entrance_)) {
    const CellKind k = kind(*spec.entrance);
    detail::fail(issues, "entrance " + to_string(*spec.entrance) + " is a '" +
                             std::string(1, kind_char(k)) + "' cell, not the grid entrance");
  }

  checkouts_ = spec.checkouts ? *spec.checkouts : grid_checkouts;
  if (checkouts_.empty()) detail::fail(issues, "layout must have at least one checkout");
  {
    auto listed = checkouts_;
    std::sort(listed.begin(), listed.end());
    for (std::size_t i = 1; i < listed.size(); ++i)
      if (listed[i] == listed[i - 1]) detail::fail(issues, "duplicate checkout " + to_string(listed[i]));
    for (Cell c : checkouts_)
      if (kind(c) != CellKind::checkout)
        detail::fail(issues, "checkout " + to_string(c) + " is a '" +
                                 std::string(1, kind_char(kind(c))) + "' cell");
    for (Cell c : grid_checkouts)
      if (std::find(checkouts_.begin(), checkouts_.end(), c) == checkouts_.end())
        detail::fail(issues, "grid checkout " + to_string(c) + " missing from checkout list");
  }
  for (Cell c : checkouts_)
    if (kind(c) == CellKind::checkout && approach_cells(c).empty())
      detail::fail(issues, "checkout " + to_string(c) + " has no walkable neighbour");

  for (std::size_t i = 0; i < categories_.size(); ++i) {
    const Category& cat = categories_[i];
    if (cat.id.empty()) detail::fail(issues, "category " + std::to_string(i) + " has an empty id");
    for (std::size_t j = 0; j < i; ++j)
      if (categories_[j].id == cat.id) detail::fail(issues, "duplicate category id '" + cat.id + "'");
    if (!(cat.price >= 0.0)) detail::fail(issues, "category '" + cat.id + "' has negative price");
    if (!(cat.margin >= 0.0 && cat.margin <= 1.0))
      detail::fail(issues, "category '" + cat.id + "' margin outside [0, 1]");
  }

  for (const auto& [id, cells] : spec.placements) {
    int cat = -1;
    for (std::size_t i = 0; i < categories_.size(); ++i)
      if (categories_[i].id == id) cat = static_cast<int>(i);
    if (cat < 0) {
      detail::fail(issues, "placement names unknown category '" + id + "'");
      continue;
    }
    for (Cell c : cells) {
      if (!in_bounds(c)) {
        detail::fail(issues, "placement of '" + id + "' at " + to_string(c) + " is out of bounds");
        continue;
      }
      const CellKind k = kind(c);
      if (k != CellKind::shelf) {
        detail::fail(issues, "placement of '" + id + "' at " + to_string(c) + " overlaps a '" +
                                 std::string(1, kind_char(k)) + "' cell");
        continue;
      }
      int& slot = placement_[static_cast<std::size_t>(index(c))];
      if (slot >= 0 && slot != cat)
        detail::fail(issues, "shelf " + to_string(c) + " holds both '" +
                                 categories_[static_cast<std::size_t>(slot)].id + "' and '" + id + "'");
      else
        slot = cat;
    }
  }

  if (entrances.size() == 1) {
    std::vector<char> seen(kinds_.size(), 0);
    std::deque<Cell> queue{entrance_};
    seen[static_cast<std::size_t>(index(entrance_))] = 1;
    while (!queue.empty()) {
      const Cell c = queue.front();
      queue.pop_front();
      for (Heading h : kHeadings) {
        const Cell n = neighbour(c, h);
        if (walkable(n) && !seen[static_cast<std::size_t>(index(n))]) {
          seen[static_cast<std::size_t>(index(n))] = 1;
          queue.push_back(n);
        }
      }
    }
    for (int i = 0; i < cell_count(); ++i)
      if (kinds_[static_cast<std::size_t>(i)] == CellKind::floor && !seen[static_cast<std::size_t>(i)])
        detail::fail(issues, "floor cell " + to_string(cell_at(i)) + " is unreachable from the entrance");
  }

  if (!issues.empty()) {
    std::string msg = "invalid layout";
    if (!name_.empty()) msg += " '" + name_ + "'";
    msg += ":";
    for (const auto& s : issues) msg += "\n  " + s;
    throw ValidationError(msg);
  }
}

LayoutSpec Layout::spec() const {
  LayoutSpec s;
  s.name = name_;
  s.notes = notes_;
  s.width = width_;
  s.height = height_;
  s.cell_size = cell_size_;
  for (int r = 0; r < height_; ++r) {
    std::string row;
    for (int c = 0; c < width_; ++c) row.push_back(kind_char(kind({c, r})));
    s.rows.push_back(std::move(row));
  }
  s.entrance = entrance_;
  s.checkouts = checkouts_;
  s.categories = categories_;
  for (int cat = 0; cat < category_count(); ++cat)
    s.placements.emplace_back(categories_[static_cast<std::size_t>(cat)].id, shelves_of(cat));
  return s;
}

Layout parse_layout(const nlohmann::json& doc) {
  using detail::required;
  if (!doc.is_object()) throw ValidationError("layout document must be an object");
  detail::reject_unknown_keys(doc,
                              {"format", "version", "name", "notes", "width", "height", "cell_size_m",
                               "entrance", "checkouts", "grid", "categories", "placements"},
                              "layout");
  if (required<std::string>(doc, "format", "layout") != kLayoutFormat)
    throw ValidationError("not a storegrid layout document");
  const int version = required<int>(doc, "version", "layout");
  if (version != kLayoutVersion)
    throw ValidationError("unsupported layout version " + std::to_string(version));

  LayoutSpec s;
  s.name = doc.value("name", std::string{});
  s.notes = doc.value("notes", std::string{});
  s.width = required<int>(doc, "width", "layout");
  s.height = required<int>(doc, "height", "layout");
  s.cell_size = doc.contains("cell_size_m") ? required<double>(doc, "cell_size_m", "layout") : 0.5;
  s.rows = required<std::vector<std::string>>(doc, "grid", "layout");
  if (!doc.contains("entrance")) throw ValidationError("missing field 'entrance' in layout");
  s.entrance = detail::cell_from_json(doc.at("entrance"));
  if (!doc.contains("checkouts") || !doc.at("checkouts").is_array())
    throw ValidationError("missing field 'checkouts' in layout");
  std::vector<Cell> checkouts;
  for (const auto& c : doc.at("checkouts")) checkouts.push_back(detail::cell_from_json(c));
  s.checkouts = std::move(checkouts);

  if (doc.contains("categories")) {
    for (const auto& c : doc.at("categories")) {
      detail::reject_unknown_keys(c, {"id", "name", "price", "margin"}, "category");
      Category cat;
      cat.id = required<std::string>(c, "id", "category");
      cat.name = c.value("name", cat.id);
      cat.price = required<double>(c, "price", "category");
      cat.margin = c.contains("margin") ? required<double>(c, "margin", "category") : 0.05;
      s.categories.push_back(std::move(cat));
    }
  }
  if (doc.contains("placements")) {
    const auto& p = doc.at("placements");
    if (!p.is_object()) throw ValidationError("'placements' must map category id to cell lists");
    for (auto it = p.begin(); it != p.end(); ++it) {
      std::vector<Cell> cells;
      for (const auto& c : it.value()) cells.push_back(detail::cell_from_json(c));
      s.placements.emplace_back(it.key(), std::move(cells));
    }
  }
  return Layout(s);
}

Layout load_layout(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("layout does not parse: ") + e.what());
  }
  return parse_layout(doc);
}

Layout load_layout_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open layout file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_layout(buf.str());
}

nlohmann::ordered_json to_json(const Layout& layout) {
  nlohmann::ordered_json j;
  j["format"] = kLayoutFormat;
  j["version"] = kLayoutVersion;
  j["name"] = layout.name();
  j["notes"] = layout.notes();
  j["width"] = layout.width();
  j["height"] = layout.height();
  j["cell_size_m"] = layout.cell_size();
  j["entrance"] = {layout.entrance().col, layout.entrance().row};
  j["checkouts"] = nlohmann::ordered_json::array();
  for (Cell c : layout.checkouts()) j["checkouts"].push_back({c.col, c.row});
  const LayoutSpec s = layout.spec();
  j["grid"] = s.rows;
  j["categories"] = nlohmann::ordered_json::array();
  for (const auto& c : layout.categories())
    j["categories"].push_back({{"id", c.id}, {"name", c.name}, {"price", c.price}, {"margin", c.margin}});
  j["placements"] = nlohmann::ordered_json::object();
  for (const auto& [id, cells] : s.placements) {
    auto arr = nlohmann::ordered_json::array();
    for (Cell c : cells) arr.push_back({c.col, c.row});
    j["placements"][id] = std::move(arr);
  }
  return j;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

Layout reposition(const Layout& layout, int category, std::span<const Cell> targets,
                  RepositionMode mode) {
  if (category < 0 || category >= layout.category_count())
    throw ValidationError("reposition: unknown category index " + std::to_string(category));
  for (Cell t : targets) {
    if (layout.kind(t) != CellKind::shelf)
      throw ValidationError("reposition: target " + to_string(t) + " is not a shelf cell");
    const int held = layout.category_at(t);
    if (held >= 0 && held != category)
      throw ValidationError("reposition: target " + to_string(t) + " is occupied by '" +
                            layout.category(held).id + "'");
  }
  LayoutSpec s = layout.spec();
  const std::string& id = layout.category(category).id;
  for (auto& [pid, cells] : s.placements) {
    if (pid != id) continue;
    if (mode == RepositionMode::move) cells.clear();
    for (Cell t : targets)
      if (std::find(cells.begin(), cells.end(), t) == cells.end()) cells.push_back(t);
    std::sort(cells.begin(), cells.end());
  }
  return Layout(s);
}

void check_basket(const Layout& layout, const Basket& basket) {
  for (int item : basket.items)
    if (item < 0 || item >= layout.category_count())
      throw ValidationError("basket item index " + std::to_string(item) + " is not a category");
  if (basket.checkout < 0 || basket.checkout >= static_cast<int>(layout.checkouts().size()))
    throw ValidationError("basket checkout " + std::to_string(basket.checkout) + " does not exist");
  if (basket.budget && *basket.budget <= 0) throw ValidationError("basket budget must be positive");
  if (!std::is_sorted(basket.items.begin(), basket.items.end()) ||
      std::adjacent_find(basket.items.begin(), basket.items.end()) != basket.items.end())
    throw ValidationError("basket items must be sorted and unique");
}

std::vector<int> parse_items(const Layout& layout, std::string_view csv) {
  std::vector<int> items;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t end = std::min(csv.find(',', start), csv.size());
    std::string_view tok = csv.substr(start, end - start);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (!tok.empty()) items.push_back(layout.category_index(tok));
    start = end + 1;
  }
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

}  // namespace storegrid
