#include "storegrid/clustering.hpp"

namespace storegrid {

ClusterProfile make_profile(int id, std::vector<double> purchase, double threshold) {
  ClusterProfile p;
  p.id = id;
  p.purchase = std::move(purchase);
  for (double x : p.purchase) {
    if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("purchase probability outside [0, 1]");
    p.impulse.push_back(x > 0.0 && x < threshold);
  }
  return p;
}

namespace detail {

KMeansResult weighted_kmeans(const std::vector<std::vector<double>>& x, const std::vector<double>& w, int k,
                             std::uint64_t seed) {
  const std::size_t n = x.size();
  Rng rng(seed);
  std::vector<std::vector<double>> centres;
  centres.push_back(x[sample_index(rng, w)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centres.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centres) best = std::min(best, sq_dist(x[i], c));
      d2[i] = w[i] * best;
      total += d2[i];
    }
    centres.push_back(total > 0 ? x[sample_index(rng, d2)] : x[uniform_index(rng, n)]);
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 200; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(x[i], centres[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(x[i], centres[static_cast<std::size_t>(c)]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    // Empty clusters take the point with the largest weighted error.
    for (int c = 0; c < k; ++c) {
      if (std::find(assign.begin(), assign.end(), c) != assign.end()) continue;
      std::size_t far = 0;
      double fd = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = w[i] * sq_dist(x[i], centres[static_cast<std::size_t>(assign[i])]);
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      assign[far] = c;
      changed = true;
    }
    for (int c = 0; c < k; ++c) {
      std::vector<double> sum(x[0].size(), 0.0);
      double ws = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != c) continue;
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += w[i] * x[i][j];
        ws += w[i];
      }
      if (ws > 0)
        for (double& s : sum) s /= ws;
      centres[static_cast<std::size_t>(c)] = std::move(sum);
    }
    if (!changed) break;
  }
  KMeansResult r{assign, centres, 0.0};
  for (std::size_t i = 0; i < n; ++i) r.wcss += w[i] * sq_dist(x[i], centres[static_cast<std::size_t>(assign[i])]);
  return r;
}

}  // namespace detail

int elbow(std::span<const double> wcss) {
  const int k_max = static_cast<int>(wcss.size());
  if (k_max == 0) throw ValidationError("elbow of an empty curve");
  if (wcss[0] <= 1e-12) return 1;
  if (k_max < 3) return k_max;
  int best = 2;
  double bd = -std::numeric_limits<double>::infinity();
  for (int k = 2; k <= k_max - 1; ++k) {
    const double d = wcss[static_cast<std::size_t>(k - 2)] - 2 * wcss[static_cast<std::size_t>(k - 1)] +
                     wcss[static_cast<std::size_t>(k)];
    if (d > bd + 1e-12) {
      bd = d;
      best = k;
    }
  }
  return best;
}

Clustering cluster_baskets(std::span<const WeightedBasket> input, int category_count, int k_max,
                           std::uint64_t seed, int restarts,
                           double threshold) {
  if (k_max < 2) throw ValidationError("k_max must be at least 2");
  if (input.empty()) throw ValidationError("no baskets to cluster");

  std::map<std::vector<int>, double> merged;
  for (const auto& b : input) {
    if (!(b.weight > 0)) throw ValidationError("basket weights must be positive");
    std::vector<int> items = b.items;
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    for (int i : items)
      if (i < 0 || i >= category_count) throw ValidationError("basket category out of range");
    merged[items] += b.weight;
  }
  Clustering out;
  std::vector<std::vector<double>> x;
  std::vector<double> w;
  for (const auto& [items, weight] : merged) {
    out.baskets.push_back({items, weight});
    std::vector<double> v(static_cast<std::size_t>(category_count), 0.0);
    for (int i : items) v[static_cast<std::size_t>(i)] = 1.0;
    x.push_back(std::move(v));
    w.push_back(weight);
  }

  const int kk = std::min<int>(k_max, static_cast<int>(x.size()));
  std::vector<detail::KMeansResult> best(static_cast<std::size_t>(kk));
  for (int k = 1; k <= kk; ++k) {
    auto& b = best[static_cast<std::size_t>(k - 1)];
    b.wcss = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
      auto res = detail::weighted_kmeans(x, w, k, derive_seed(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r)}));
      if (res.wcss < b.wcss - 1e-12) b = std::move(res);
    }
    out.wcss.push_back(b.wcss);
  }
  out.k = elbow(out.wcss);
  const auto& chosen = best[static_cast<std::size_t>(out.k - 1)];

  std::vector<ClusterProfile> profiles;
  for (int c = 0; c < out.k; ++c) {
    double ws = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (chosen.assignment[i] == c) ws += w[i];
    ClusterProfile p = make_profile(c, chosen.centres[static_cast<std::size_t>(c)], threshold);
    p.weight = ws;
    profiles.push_back(std::move(p));
  }
  std::vector<int> order(profiles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& pa = profiles[static_cast<std::size_t>(a)];
    const auto& pb = profiles[static_cast<std::size_t>(b)];
    if (pa.weight != pb.weight) return pa.weight > pb.weight;
    return pa.purchase > pb.purchase;
  });
  std::vector<int> rename(profiles.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    rename[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    out.clusters.push_back(profiles[static_cast<std::size_t>(order[i])]);
    out.clusters.back().id = static_cast<int>(i);
  }
  for (int a : chosen.assignment) out.assignment.push_back(rename[static_cast<std::size_t>(a)]);
  return out;
}

ClusterProfile impulse_rates(ClusterProfile profile, std::span<const Trajectory> essential,
                             const Layout& layout) {
  profile.rates.clear();
  const auto impulse = profile.impulse_products();
  if (impulse.empty()) return profile;
  const ShelfTraffic traffic = shelf_traffic(essential, layout);
  for (int p : impulse) {
    double visit = 0.0;
    for (Cell s : layout.shelves_of(p)) visit += traffic.at(s);
    visit = std::min(1.0, visit);
    const double purchase = profile.purchase[static_cast<std::size_t>(p)];
    profile.rates.push_back({p, purchase, visit, impulse_rate(purchase, visit)});
  }
  return profile;
}

nlohmann::ordered_json profile_to_json(const Layout& layout, const ClusterProfile& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["weight"] = p.weight;
  nlohmann::ordered_json purchase = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < p.purchase.size(); ++c) purchase[layout.category(static_cast<int>(c)).id] = p.purchase[c];
  j["purchase"] = std::move(purchase);
  auto impulse = nlohmann::ordered_json::array();
  for (int c : p.impulse_products()) impulse.push_back(layout.category(c).id);
  j["impulse"] = std::move(impulse);
  auto rates = nlohmann::ordered_json::array();
  for (const auto& r : p.rates) {
    nlohmann::ordered_json e;
    e["category"] = layout.category(r.category).id;
    e["purchase"] = r.purchase;
    e["visit"] = r.visit;
    e["rate"] = r.is_inf() ? nlohmann::ordered_json("Inf") : nlohmann::ordered_json(r.rate);
    rates.push_back(std::move(e));
  }
  j["rates"] = std::move(rates);
  return j;
}

ClusterProfile profile_from_json(const Layout& layout, const nlohmann::json& j) {
  try {
    std::vector<double> purchase(static_cast<std::size_t>(layout.category_count()), 0.0);
    for (const auto& [slug, value] : j.at("purchase").items())
      purchase[static_cast<std::size_t>(layout.category_index(slug))] = value.get<double>();
    ClusterProfile p = make_profile(j.value("id", 0), std::move(purchase), j.value("threshold", kImpulseThreshold));
    p.weight = j.value("weight", 0.0);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed cluster profile: ") + e.what());
  }
}

}  // namespace storegrid
