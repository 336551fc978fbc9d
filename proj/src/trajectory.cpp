#include "storegrid/trajectory.hpp"

namespace storegrid {

StepResult apply_action(const Layout& layout, AgentState s, Action a) {
  StepResult r{s};
  switch (a) {
    case Action::forward: {
      const Cell n = neighbour(s.cell, s.heading);
      if (layout.walkable(n)) r.next.cell = n;
      break;
    }
    case Action::left: r.next.heading = turn_left(s.heading); break;
    case Action::right: r.next.heading = turn_right(s.heading); break;
    case Action::interact: {
      const Cell f = neighbour(s.cell, s.heading);
      const CellKind k = layout.kind(f);
      if (k == CellKind::shelf && layout.category_at(f) >= 0) {
        r.event = StepEvent::pickup;
        r.target = layout.category_at(f);
      } else if (k == CellKind::checkout) {
        r.event = StepEvent::checkout;
        r.target = layout.checkout_index(f);
      }
      break;
    }
  }
  return r;
}

EpisodeSummary summarize(const Layout& layout, const Trajectory& t) {
  EpisodeSummary s;
  s.basket_size = static_cast<int>(t.conditions.items.size());
  s.steps = static_cast<int>(t.steps.size());
  std::vector<int> got;
  for (const auto& st : t.steps) {
    const StepResult r = apply_action(layout, st.state, st.action);
    if (r.event == StepEvent::pickup) {
      const auto& items = t.conditions.items;
      const bool wanted = std::binary_search(items.begin(), items.end(), r.target);
      if (wanted && std::find(got.begin(), got.end(), r.target) == got.end())
        got.push_back(r.target);
      else
        ++s.wrong;
    } else if (r.event == StepEvent::checkout) {
      s.checked_out = true;
      s.checkout = r.target;
      break;
    }
  }
  s.collected = static_cast<int>(got.size());
  return s;
}

std::vector<std::string> check_trajectory(const Layout& layout, const Trajectory& t,
                                          std::optional<int> step_limit) {
  std::vector<std::string> problems;
  if (t.steps.empty()) {
    problems.push_back("trajectory has no steps");
    return problems;
  }
  const AgentState start{layout.entrance(), layout.start_heading()};
  if (t.steps.front().state != start) problems.push_back("does not start at the entrance");
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const StepResult r = apply_action(layout, t.steps[i].state, t.steps[i].action);
    if (i + 1 < t.steps.size()) {
      if (r.next != t.steps[i + 1].state)
        problems.push_back("step " + std::to_string(i) + " is inconsistent with its successor");
      if (r.event == StepEvent::checkout)
        problems.push_back("checkout before the final step (step " + std::to_string(i) + ")");
    } else {
      const bool at_limit = step_limit && static_cast<int>(t.steps.size()) == *step_limit;
      if (r.event != StepEvent::checkout && !at_limit)
        problems.push_back("does not end with a checkout action");
    }
  }
  for (const Pickup& p : t.pickups) {
    if (p.step < 0 || p.step >= static_cast<int>(t.steps.size())) {
      problems.push_back("pickup step " + std::to_string(p.step) + " out of range");
      continue;
    }
    if (p.flagged) continue;
    const auto& st = t.steps[static_cast<std::size_t>(p.step)];
    const StepResult r = apply_action(layout, st.state, st.action);
    if (r.event != StepEvent::pickup || r.target != p.category)
      problems.push_back("pickup at step " + std::to_string(p.step) + " is not a pickup action");
  }
  return problems;
}

nlohmann::ordered_json basket_to_json(const Layout& layout, const Basket& b) {
  nlohmann::ordered_json j;
  j["items"] = nlohmann::ordered_json::array();
  for (int i : b.items) j["items"].push_back(layout.category(i).id);
  j["checkout"] = b.checkout;
  j["budget"] = b.budget ? nlohmann::ordered_json(*b.budget) : nlohmann::ordered_json(nullptr);
  return j;
}

Basket basket_from_json(const Layout& layout, const nlohmann::json& j) {
  detail::reject_unknown_keys(j, {"items", "checkout", "budget"}, "conditions");
  std::vector<int> items;
  for (const auto& s : j.at("items")) items.push_back(layout.category_index(s.get<std::string>()));
  std::optional<int> budget;
  if (j.contains("budget") && !j.at("budget").is_null()) budget = j.at("budget").get<int>();
  Basket b = make_basket(std::move(items), detail::required<int>(j, "checkout", "conditions"), budget);
  check_basket(layout, b);
  return b;
}

nlohmann::ordered_json trajectory_to_json(const Layout& layout, const Trajectory& t) {
  nlohmann::ordered_json j;
  j["id"] = t.id;
  j["conditions"] = basket_to_json(layout, t.conditions);
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : t.steps)
    steps.push_back({s.state.cell.col, s.state.cell.row, std::string(1, heading_char(s.state.heading)),
                     std::string(action_name(s.action))});
  j["steps"] = std::move(steps);
  auto pickups = nlohmann::ordered_json::array();
  for (const auto& p : t.pickups)
    pickups.push_back({{"step", p.step}, {"category", layout.category(p.category).id}, {"flagged", p.flagged}});
  j["pickups"] = std::move(pickups);
  return j;
}

Trajectory trajectory_from_json(const Layout& layout, const nlohmann::json& j) {
  try {
    detail::reject_unknown_keys(j, {"id", "conditions", "steps", "pickups"}, "trajectory record");
    Trajectory t;
    t.id = j.value("id", std::string{});
    t.conditions = basket_from_json(layout, j.at("conditions"));
    for (const auto& s : j.at("steps")) {
      if (!s.is_array() || s.size() != 4) throw ValidationError("step must be [col, row, heading, action]");
      const std::string h = s[2].get<std::string>();
      if (h.size() != 1) throw ValidationError("bad heading '" + h + "'");
      t.steps.push_back({{{s[0].get<int>(), s[1].get<int>()}, heading_from_char(h[0])},
                         action_from_name(s[3].get<std::string>())});
    }
    for (const auto& p : j.at("pickups")) {
      detail::reject_unknown_keys(p, {"step", "category", "flagged"}, "pickup");
      t.pickups.push_back({p.at("step").get<int>(), layout.category_index(p.at("category").get<std::string>()),
                           p.value("flagged", false)});
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed trajectory record: ") + e.what());
  }
}

std::vector<Trajectory> read_trajectories(std::istream& in, const Layout& layout) {
  std::vector<Trajectory> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(trajectory_from_json(layout, j));
  }
  return out;
}

}  // namespace storegrid
