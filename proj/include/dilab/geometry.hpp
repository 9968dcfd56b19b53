#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

namespace dilab {

// product_sum composes two sub-metrics on a coordinate split as
// sqrt(d_left^2 + d_right^2). euclidean serves both raw coordinate clouds
// and spherised ones (whose points are componentwise square roots).
enum class MetricKind { euclidean, tv, purified, arc_dA, product_sum };

struct Metric {
  MetricKind kind = MetricKind::euclidean;
  double theta = 0.5;                    // arc_dA wrap parameter
  int split = 0;                         // product_sum: left block width
  std::shared_ptr<Metric> left, right;   // product_sum factors
};

double metric_distance(const Metric& m, std::span<const double> a,
                       std::span<const double> b);

struct PointCloud {
  std::vector<double> coords;  // size() * dim, row-major
  int dim = 1;
  Metric metric;

  std::size_t size() const {
    return dim > 0 ? coords.size() / (std::size_t)dim : 0;
  }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * (std::size_t)dim, (std::size_t)dim};
  }
};

enum class NetKind { covering, packing };

// Covering: every cloud point lies within radius of some center. Packing:
// centers are pairwise >= 2*radius apart. Both are re-verified by a fresh
// pass after construction; coverings also carry the greedy packing count at
// radius/2 that upper-bounds them (the sandwich mechanism).
struct NetResult {
  NetKind kind = NetKind::covering;
  double radius = 0.0;
  std::vector<std::uint32_t> center_indices;
  std::size_t count = 0;
  std::size_t pack_half_count = 0;  // covering results only

  nlohmann::json to_json() const;
};

NetResult greedy_packing(const PointCloud& cloud, double radius);
NetResult greedy_covering(const PointCloud& cloud, double radius);

// Brute-force optima, restricted to centers chosen from the cloud.
// Require cloud size <= 20.
std::size_t exact_covering_count(const PointCloud& cloud, double radius);
std::size_t exact_packing_count(const PointCloud& cloud, double radius);

struct SandwichResult {
  bool ok = false;
  bool exact = false;  // brute-force counts (cloud <= 20 points)
  std::size_t pack_outer = 0;  // packing count at delta + eta
  std::size_t cover = 0;       // covering count at delta
  std::size_t pack_inner = 0;  // packing count at delta / 2

  nlohmann::json to_json() const;
};

SandwichResult sandwich_check(const PointCloud& cloud, double delta,
                              double eta);

struct DimensionEstimate {
  std::vector<double> deltas;              // strictly decreasing
  std::vector<std::size_t> counts;         // greedy covering counts
  std::vector<std::size_t> packing_lower;  // greedy packing at delta + eta
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of OLS residuals
  std::vector<double> window_slopes;  // all 3-point sliding windows
  double min_window_slope = 0.0;
  double max_window_slope = 0.0;

  nlohmann::json to_json() const;
};

using CloudGenerator = std::function<PointCloud(double delta)>;

// OLS slope of log2(covering count) versus -log2(delta) over the ladder;
// windowed slopes expose lower/upper dimension behavior at finite scale.
DimensionEstimate estimate_dimension(const CloudGenerator& gen,
                                     std::span<const double> deltas);

// Cartesian product with metric sqrt(d_a^2 + d_b^2); two euclidean factors
// fold into one euclidean metric on the concatenated coordinates.
PointCloud product_cloud(const PointCloud& a, const PointCloud& b);

}  // namespace dilab
