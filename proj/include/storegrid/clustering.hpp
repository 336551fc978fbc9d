#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "storegrid/analytics.hpp"
#include "storegrid/rng.hpp"

namespace storegrid {

inline constexpr double kImpulseThreshold = 0.20;

/// A distinct basket (category indices) with its observed frequency.
struct WeightedBasket {
  std::vector<int> items;
  double weight = 1.0;
};

/// Impulse rate of one product: purchase / visit. `rate` is +inf when the
/// product was bought but its shelves were never visited.
struct ImpulseRate {
  int category = 0;
  double purchase = 0.0;
  double visit = 0.0;
  double rate = 0.0;
  bool is_inf() const { return std::isinf(rate); }
};

inline double impulse_rate(double purchase, double visit) {
  if (purchase == 0.0) return 0.0;
  if (visit == 0.0) return std::numeric_limits<double>::infinity();
  return purchase / visit;
}

struct ClusterProfile {
  int id = 0;
  double weight = 0.0;             // total basket weight in the cluster
  std::vector<double> purchase;    // per category
  std::vector<bool> impulse;       // 0 < purchase < threshold
  std::vector<ImpulseRate> rates;  // filled by impulse_rates()

  std::vector<int> impulse_products() const {
    std::vector<int> out;
    for (std::size_t c = 0; c < impulse.size(); ++c)
      if (impulse[c]) out.push_back(static_cast<int>(c));
    return out;
  }
  std::vector<int> essential_products() const {
    std::vector<int> out;
    for (std::size_t c = 0; c < purchase.size(); ++c)
      if (purchase[c] > 0.0 && !impulse[c]) out.push_back(static_cast<int>(c));
    return out;
  }
};

ClusterProfile make_profile(int id, std::vector<double> purchase, double threshold = kImpulseThreshold);

struct Clustering {
  std::vector<ClusterProfile> clusters;
  std::vector<double> wcss;     // wcss[k - 1] for k = 1..k_max
  std::vector<int> assignment;  // cluster id per distinct input basket
  std::vector<WeightedBasket> baskets;  // distinct baskets, sorted
  int k = 1;
};

namespace detail {

struct KMeansResult {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centres;
  double wcss = 0.0;
};

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

KMeansResult weighted_kmeans(const std::vector<std::vector<double>>& x, const std::vector<double>& w, int k,
                             std::uint64_t seed);

}  // namespace detail

/// Bend of the WCSS curve: the k with the largest second difference. With
/// fewer than three points on the curve the largest k is returned.
int elbow(std::span<const double> wcss);

/// Weighted k-means over category-indicator vectors for k = 1..k_max, k
/// picked at the elbow. Clusters are returned heaviest first.
Clustering cluster_baskets(std::span<const WeightedBasket> input, int category_count, int k_max,
                           std::uint64_t seed = 0, int restarts = 16,
                           double threshold = kImpulseThreshold);

/// Baskets of a cluster's essential products only: each essential product
/// is included with its purchase probability; the checkout is drawn from
/// `checkout_weights`.
inline Basket sample_essential_basket(const ClusterProfile& profile, std::span<const double> checkout_weights,
                                      Rng& rng) {
  std::vector<int> items;
  for (int c : profile.essential_products())
    if (uniform01(rng) < profile.purchase[static_cast<std::size_t>(c)]) items.push_back(c);
  return make_basket(items, static_cast<int>(sample_index(rng, checkout_weights)));
}

/// Visit probability per impulse product (summed over its shelves, capped
/// at 1) and the implied impulse rate purchase / visit.
ClusterProfile impulse_rates(ClusterProfile profile, std::span<const Trajectory> essential,
                             const Layout& layout);

// ---------------------------------------------------------------------------
// JSON

nlohmann::ordered_json profile_to_json(const Layout& layout, const ClusterProfile& p);

/// Reads a profile from {"purchase": {slug: p, ...}, "threshold"?: t}.
/// Categories that are not listed get probability 0.
ClusterProfile profile_from_json(const Layout& layout, const nlohmann::json& j);

}  // namespace storegrid
