#include "storegrid/ingest.hpp"

namespace storegrid {

std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::no_basket: return "no-basket";
    case RejectReason::empty_after_trim: return "empty-after-trim";
    case RejectReason::unreachable_point: return "unreachable-point";
  }
  return "?";
}

PreprocessResult preprocess(const RawTrajectory& raw, const Layout& layout) {
  if (!raw.basket) return Rejection{RejectReason::no_basket, "record " + raw.id + " has no basket"};
  for (std::size_t i = 1; i < raw.samples.size(); ++i)
    if (!(raw.samples[i].t > raw.samples[i - 1].t))
      throw ValidationError("record " + raw.id + ": timestamps not strictly increasing at sample " +
                            std::to_string(i));
  std::vector<int> items = *raw.basket;
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  for (int i : items)
    if (i < 0 || i >= layout.category_count())
      throw ValidationError("record " + raw.id + ": unknown basket category");

  std::vector<Cell> cells;
  for (const Sample& s : raw.samples) {
    if (raw.checkout_ts && s.t > *raw.checkout_ts) break;
    const Cell c = discretize(layout, s.x, s.y);
    if (!layout.in_bounds(c)) continue;
    const auto snapped = nearest_walkable(layout, c);
    if (!snapped)
      return Rejection{RejectReason::unreachable_point, "no walkable cell near " + to_string(c)};
    if (cells.empty() || cells.back() != *snapped) cells.push_back(*snapped);
  }

  if (!raw.checkout_ts) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!detail::touches_checkout(layout, cells[i])) continue;
      bool later_approach = false;
      for (std::size_t j = i + 1; j < cells.size() && !later_approach; ++j)
        later_approach = detail::touches_any(layout, cells[j], items);
      if (!later_approach) {
        cells.resize(i + 1);
        break;
      }
    }
  }
  if (cells.empty()) return Rejection{RejectReason::empty_after_trim, "record " + raw.id + " has no usable samples"};

  // Checkout: the one closest to where the log ends.
  const DistanceField from_end(layout, cells.back());
  int checkout = 0;
  int best = kUnreachable;
  Cell best_cell{};
  for (std::size_t k = 0; k < layout.checkouts().size(); ++k) {
    for (Cell a : layout.approach_cells(layout.checkouts()[k])) {
      if (from_end.at(a) < best) {
        best = from_end.at(a);
        checkout = static_cast<int>(k);
        best_cell = a;
      }
    }
  }
  if (best == kUnreachable)
    return Rejection{RejectReason::unreachable_point, "no checkout reachable from " + to_string(cells.back())};

  std::vector<Cell> route{layout.entrance()};
  auto extend = [&](Cell to) -> bool {
    const auto seg = shortest_path(layout, route.back(), to);
    if (!seg) return false;
    route.insert(route.end(), seg->begin() + 1, seg->end());
    return true;
  };
  for (Cell c : cells)
    if (!extend(c)) return Rejection{RejectReason::unreachable_point, to_string(c) + " is not reachable"};
  if (!extend(best_cell)) return Rejection{RejectReason::unreachable_point, "checkout not reachable"};

  RouteBuilder b(layout, Basket{items, checkout, std::nullopt});
  b.walk(route);
  b.checkout();
  return b.finish(raw.id);
}

std::vector<PickupAttribution> attribute_pickups(const Trajectory& traj, const Layout& layout) {
  std::vector<PickupAttribution> out;
  for (int item : traj.conditions.items) {
    const auto shelves = layout.shelves_of(item);
    PickupAttribution a{item, 0, kUnreachable, true};
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      int d = kUnreachable;
      for (Cell s : shelves) d = std::min(d, manhattan(traj.steps[i].state.cell, s));
      if (d <= a.distance) {
        a.distance = d;
        a.step = static_cast<int>(i);
      }
    }
    a.flagged = a.distance > kApproachRadius;
    out.push_back(a);
  }
  return out;
}

Trajectory infer_pickups(const Trajectory& traj, const Layout& layout) {
  if (traj.steps.empty()) return traj;
  const auto attributions = attribute_pickups(traj, layout);

  RouteBuilder b(layout, traj.conditions);
  const StepResult last = apply_action(layout, traj.steps.back().state, traj.steps.back().action);
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const Cell c = traj.steps[i].state.cell;
    if (c != b.position()) {
      const Cell path[] = {b.position(), c};
      b.walk(path);
    }
    for (const auto& a : attributions) {
      if (a.step != static_cast<int>(i)) continue;
      if (a.flagged) {
        b.flagged_pickup(a.category);
        continue;
      }
      for (Heading h : kHeadings) {
        const Cell n = neighbour(c, h);
        if (layout.category_at(n) == a.category) {
          b.pickup(n);
          break;
        }
      }
    }
  }
  const Cell end = apply_action(layout, traj.steps.back().state, traj.steps.back().action).next.cell;
  if (end != b.position()) {
    const Cell path[] = {b.position(), end};
    b.walk(path);
  }
  if (last.event == StepEvent::checkout) b.checkout();
  return b.finish(traj.id);
}

RawTrajectory raw_from_json(const Layout& layout, const nlohmann::json& j) {
  try {
    detail::reject_unknown_keys(j, {"id", "samples", "basket", "checkout_ts"}, "raw trajectory record");
    RawTrajectory r;
    r.id = j.value("id", std::string{});
    for (const auto& s : j.at("samples")) {
      if (!s.is_array() || s.size() != 3) throw ValidationError("sample must be [t, x, y]");
      r.samples.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
    }
    if (j.contains("basket") && !j.at("basket").is_null()) {
      std::vector<int> items;
      for (const auto& b : j.at("basket")) items.push_back(layout.category_index(b.get<std::string>()));
      r.basket = std::move(items);
    }
    if (j.contains("checkout_ts") && !j.at("checkout_ts").is_null()) r.checkout_ts = j.at("checkout_ts").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed raw trajectory record: ") + e.what());
  }
}

nlohmann::ordered_json raw_to_json(const Layout& layout, const RawTrajectory& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  auto samples = nlohmann::ordered_json::array();
  for (const auto& s : r.samples) samples.push_back({s.t, s.x, s.y});
  j["samples"] = std::move(samples);
  if (r.basket) {
    auto b = nlohmann::ordered_json::array();
    for (int i : *r.basket) b.push_back(layout.category(i).id);
    j["basket"] = std::move(b);
  } else {
    j["basket"] = nullptr;
  }
  j["checkout_ts"] = r.checkout_ts ? nlohmann::ordered_json(*r.checkout_ts) : nlohmann::ordered_json(nullptr);
  return j;
}

std::vector<RawTrajectory> read_raw_trajectories(std::istream& in, const Layout& layout) {
  std::vector<RawTrajectory> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(raw_from_json(layout, nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace storegrid
