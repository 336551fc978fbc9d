#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "storegrid/storegrid.hpp"

namespace fixture {

using namespace storegrid;

inline std::string data_path(const std::string& name) { return std::string(STOREGRID_DATA_DIR) + "/" + name; }

/// Layout document from grid rows; categories are created for every key of
/// `placements` with price 1 and margin 0.05.
inline nlohmann::json layout_doc(const std::vector<std::string>& rows,
                                 const std::map<std::string, std::vector<Cell>>& placements = {}) {
  nlohmann::json j;
  j["format"] = "storegrid-layout";
  j["version"] = 1;
  j["name"] = "fixture";
  j["width"] = rows.empty() ? 0 : rows.front().size();
  j["height"] = rows.size();
  j["grid"] = rows;
  j["checkouts"] = nlohmann::json::array();
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (rows[r][c] == 'E') j["entrance"] = {c, r};
      if (rows[r][c] == 'C') j["checkouts"].push_back({c, r});
    }
  j["categories"] = nlohmann::json::array();
  j["placements"] = nlohmann::json::object();
  for (const auto& [id, cells] : placements) {
    j["categories"].push_back({{"id", id}, {"name", id}, {"price", 1.0}, {"margin", 0.05}});
    auto arr = nlohmann::json::array();
    for (Cell c : cells) arr.push_back({c.col, c.row});
    j["placements"][id] = arr;
  }
  return j;
}

inline Layout make_layout(const std::vector<std::string>& rows,
                          const std::map<std::string, std::vector<Cell>>& placements = {}) {
  return parse_layout(layout_doc(rows, placements));
}

inline const Layout& store() {
  static const Layout layout = load_layout_file(data_path("store.json"));
  return layout;
}

inline Basket basket(const Layout& layout, const std::string& items, int checkout = 0,
                     std::optional<int> budget = std::nullopt) {
  return make_basket(parse_items(layout, items), checkout, budget);
}

}  // namespace fixture
