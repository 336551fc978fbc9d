#include "storegrid/layout_opt.hpp"

namespace storegrid {

std::optional<double> objective(const Layout& layout, std::span<const ImpulseRate> rates,
                                const ShelfTraffic& theta) {
  double total = 0.0;
  for (const auto& r : rates) {
    const auto shelves = layout.shelves_of(r.category);
    if (shelves.empty()) continue;
    if (r.is_inf()) return std::nullopt;
    const double rho = layout.category(r.category).per_unit_profit();
    for (Cell b : shelves) total += rho * r.rate * theta.at(b);
  }
  return total;
}

std::vector<Cell> rank_unoccupied_shelves(const Layout& layout, const ShelfTraffic& theta, std::size_t n) {
  auto free = layout.unoccupied_shelves();
  if (free.size() < n)
    throw ValidationError("only " + std::to_string(free.size()) + " unoccupied shelves, " + std::to_string(n) +
                          " requested");
  std::stable_sort(free.begin(), free.end(), [&](Cell a, Cell b) { return theta.at(a) > theta.at(b); });
  free.resize(n);
  return free;
}

LayoutEvaluation evaluate_layout(const Layout& layout, std::span<const Trajectory> trajs,
                                 std::span<const ImpulseRate> rates, std::uint64_t seed, int workers) {
  if (trajs.empty()) throw ValidationError("evaluate_layout needs at least one trajectory");
  for (const auto& r : rates)
    if (std::isnan(r.rate)) throw ValidationError("missing impulse rate for " + layout.category(r.category).id);

  std::vector<std::vector<Cell>> shelves;
  for (const auto& r : rates) shelves.push_back(layout.shelves_of(r.category));
  std::vector<std::uint8_t> near(trajs.size() * rates.size(), 0);
  std::vector<double> profit(trajs.size(), 0.0);
  parallel_for(trajs.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    for (std::size_t p = 0; p < rates.size(); ++p) {
      bool visited = false;
      for (const auto& st : trajs[i].steps) {
        for (Cell s : shelves[p])
          if (adjacent(st.state.cell, s)) visited = true;
        if (visited) break;
      }
      near[i * rates.size() + p] = visited;
      const double u = uniform01(rng);  // drawn unconditionally so draws line up across layouts
      if (visited && u < detail::purchase_probability(rates[p].rate))
        profit[i] += layout.category(rates[p].category).per_unit_profit();
    }
  });

  LayoutEvaluation ev;
  ev.trajectories = trajs.size();
  const double n = static_cast<double>(trajs.size());
  double sum = 0.0, sq = 0.0;
  for (double x : profit) {
    sum += x;
    sq += x * x;
  }
  ev.monte_carlo = sum / n;
  ev.std_error = trajs.size() > 1 ? std::sqrt(std::max(0.0, (sq - sum * sum / n) / (n - 1)) / n) : 0.0;
  for (std::size_t p = 0; p < rates.size(); ++p) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < trajs.size(); ++i) hits += near[i * rates.size() + p];
    ev.expected += static_cast<double>(hits) / n * detail::purchase_probability(rates[p].rate) *
                   layout.category(rates[p].category).per_unit_profit();
  }
  return ev;
}

std::pair<int, bool> choose_impulse_product(const Layout& layout, std::span<const ImpulseRate> rates) {
  if (rates.empty()) throw ValidationError("cluster has no impulse products");
  const bool fallback = std::any_of(rates.begin(), rates.end(), [](const ImpulseRate& r) { return r.is_inf(); });
  int best = -1;
  double score = -1.0;
  for (const auto& r : rates) {
    const double s = fallback ? r.purchase : *impulse_profit(r, layout);
    if (s > score || (s == score && r.category < best)) {
      score = s;
      best = r.category;
    }
  }
  return {best, fallback};
}

std::string profit_table_csv(const ProfitReport& r) {
  std::string out = "layout";
  for (const auto& m : r.methods) out += "," + m.method;
  out += "\n";
  auto row = [&](const char* name, LayoutEvaluation MethodChoice::*field) {
    out += name;
    for (const auto& m : r.methods) out += "," + format_money((m.*field).expected);
    out += "\n";
  };
  row("original (own trajectories)", &MethodChoice::original_own);
  row("suggested (own trajectories)", &MethodChoice::suggested_own);
  out += "suggested (" + r.truth + " trajectories)";
  for (const auto& m : r.methods) out += "," + format_money(m.suggested_truth.expected);
  out += "\n";
  return out;
}

nlohmann::ordered_json profit_report_json(const Layout& layout, const ProfitReport& r) {
  auto eval = [](const LayoutEvaluation& e) {
    nlohmann::ordered_json j;
    j["expected"] = e.expected;
    j["monte_carlo"] = e.monte_carlo;
    j["std_error"] = e.std_error;
    j["trajectories"] = e.trajectories;
    return j;
  };
  nlohmann::ordered_json j;
  j["truth"] = r.truth;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& m : r.methods) {
    nlohmann::ordered_json e;
    e["method"] = m.method;
    e["product"] = layout.category(m.product).id;
    e["ranked_by"] = m.fallback ? "purchase_probability" : "impulse_profit";
    auto shelves = nlohmann::ordered_json::array();
    for (Cell c : m.shelves) shelves.push_back({c.col, c.row});
    e["shelves"] = std::move(shelves);
    auto rates = nlohmann::ordered_json::array();
    for (const auto& rt : m.rates) {
      nlohmann::ordered_json x;
      x["category"] = layout.category(rt.category).id;
      x["visit"] = rt.visit;
      x["rate"] = rt.is_inf() ? nlohmann::ordered_json("Inf") : nlohmann::ordered_json(rt.rate);
      const auto pi = impulse_profit(rt, layout);
      x["profit"] = pi ? nlohmann::ordered_json(*pi) : nlohmann::ordered_json(nullptr);
      rates.push_back(std::move(x));
    }
    e["rates"] = std::move(rates);
    e["original_own"] = eval(m.original_own);
    e["suggested_own"] = eval(m.suggested_own);
    e["suggested_truth"] = eval(m.suggested_truth);
    arr.push_back(std::move(e));
  }
  j["methods"] = std::move(arr);
  return j;
}

}  // namespace storegrid
