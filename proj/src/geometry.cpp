#include "dilab/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "dilab/channel.hpp"
#include "dilab/kernels.hpp"
#include "dilab/util.hpp"

namespace dilab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxProductPoints = std::size_t(1) << 22;

// out[i] = metric(q, pts[i]); same arithmetic as metric_distance so that
// construction, verification, and single-pair queries agree bitwise.
void batch_distances(const Metric& m, std::span<const double> q,
                     const double* pts, std::size_t count, std::size_t dim,
                     double* out) {
  const auto& K = kernels::active();
  switch (m.kind) {
    case MetricKind::euclidean:
      K.sq_dist(q.data(), pts, count, dim, out);
      for (std::size_t i = 0; i < count; ++i) out[i] = std::sqrt(out[i]);
      break;
    case MetricKind::tv:
      K.tv_dist(q.data(), pts, count, dim, out);
      break;
    case MetricKind::purified:
      K.bhatta(q.data(), pts, count, dim, out);
      for (std::size_t i = 0; i < count; ++i) {
        const double f = out[i];
        out[i] = std::sqrt(std::max(0.0, 1.0 - f * f));
      }
      break;
    case MetricKind::arc_dA:
      for (std::size_t i = 0; i < count; ++i)
        out[i] = arc_distance(m.theta, q[0], pts[i * dim]);
      break;
    case MetricKind::product_sum:
      for (std::size_t i = 0; i < count; ++i)
        out[i] = metric_distance(m, q, {pts + i * dim, dim});
      break;
  }
}

std::vector<std::uint32_t> scan_order(const PointCloud& c) {
  std::vector<std::uint32_t> order(c.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              const auto pa = c.point(a), pb = c.point(b);
              for (int d = 0; d < c.dim; ++d) {
                if (pa[(std::size_t)d] < pb[(std::size_t)d]) return true;
                if (pa[(std::size_t)d] > pb[(std::size_t)d]) return false;
              }
              return a < b;
            });
  return order;
}

// Greedy scan in ascending lexicographic order; keeps a candidate iff its
// distance to everything kept so far clears `threshold` (> when strict,
// >= otherwise). mind[i] tracks the running distance to the kept set.
std::vector<std::uint32_t> greedy_select(const PointCloud& c, double threshold,
                                         bool strict) {
  const std::size_t n = c.size();
  std::vector<std::uint32_t> keep;
  std::vector<double> mind(n, kInf), buf(n);
  for (std::uint32_t idx : scan_order(c)) {
    const double dmin = mind[idx];
    if (strict ? !(dmin > threshold) : !(dmin >= threshold)) continue;
    keep.push_back(idx);
    batch_distances(c.metric, c.point(idx), c.coords.data(), n,
                    (std::size_t)c.dim, buf.data());
    for (std::size_t i = 0; i < n; ++i) mind[i] = std::min(mind[i], buf[i]);
  }
  return keep;
}

// Fresh min-distance-to-center pass, independent of the selection loop.
std::vector<double> min_dist_to_centers(const PointCloud& c,
                                        const std::vector<std::uint32_t>& ctr) {
  const std::size_t n = c.size();
  std::vector<double> vm(n, kInf), buf(n);
  for (std::uint32_t idx : ctr) {
    batch_distances(c.metric, c.point(idx), c.coords.data(), n,
                    (std::size_t)c.dim, buf.data());
    for (std::size_t i = 0; i < n; ++i) vm[i] = std::min(vm[i], buf[i]);
  }
  return vm;
}

void verify_covering(const PointCloud& c, const NetResult& r) {
  const auto vm = min_dist_to_centers(c, r.center_indices);
  for (double d : vm)
    require(d <= r.radius + 1e-12, "covering verification failed");
}

void verify_packing(const PointCloud& c, const NetResult& r) {
  const std::size_t k = r.center_indices.size();
  std::vector<double> ctr((std::size_t)c.dim * k), buf(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto p = c.point(r.center_indices[i]);
    std::copy(p.begin(), p.end(), ctr.begin() + i * (std::size_t)c.dim);
  }
  for (std::size_t i = 0; i < k; ++i) {
    batch_distances(c.metric, c.point(r.center_indices[i]), ctr.data(), k,
                    (std::size_t)c.dim, buf.data());
    for (std::size_t j = 0; j < k; ++j)
      if (j != i)
        require(buf[j] >= 2.0 * r.radius - 1e-12,
                "packing separation verification failed");
  }
  // Maximality: no remaining point could have been added.
  const auto vm = min_dist_to_centers(c, r.center_indices);
  for (std::size_t i = 0; i < c.size(); ++i)
    require(vm[i] < 2.0 * r.radius + 1e-12 || vm[i] == 0.0,
            "packing maximality verification failed");
}

std::vector<std::uint32_t> ball_masks(const PointCloud& c, double reach,
                                      bool strict_less) {
  const std::size_t n = c.size();
  std::vector<std::uint32_t> mask(n, 0);
  std::vector<double> buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch_distances(c.metric, c.point(i), c.coords.data(), n,
                    (std::size_t)c.dim, buf.data());
    for (std::size_t j = 0; j < n; ++j)
      if (strict_less ? buf[j] < reach : buf[j] <= reach)
        mask[i] |= (std::uint32_t)1 << j;
  }
  return mask;
}
}  // namespace

double metric_distance(const Metric& m, std::span<const double> a,
                       std::span<const double> b) {
  require(a.size() == b.size(), "metric on points of different dimension");
  switch (m.kind) {
    case MetricKind::euclidean: {
      double acc = 0.0;
      for (std::size_t d = 0; d < a.size(); ++d) {
        const double t = a[d] - b[d];
        acc += t * t;
      }
      return std::sqrt(acc);
    }
    case MetricKind::tv: {
      double acc = 0.0;
      for (std::size_t d = 0; d < a.size(); ++d)
        acc += std::fabs(a[d] - b[d]);
      return 0.5 * acc;
    }
    case MetricKind::purified: {
      double f = 0.0;
      for (std::size_t d = 0; d < a.size(); ++d)
        f += std::sqrt(a[d] * b[d]);
      return std::sqrt(std::max(0.0, 1.0 - f * f));
    }
    case MetricKind::arc_dA:
      return arc_distance(m.theta, a[0], b[0]);
    case MetricKind::product_sum: {
      require(m.left && m.right && m.split > 0 &&
                  (std::size_t)m.split < a.size(),
              "product metric requires factors and a split");
      const std::size_t s = (std::size_t)m.split;
      const double dl = metric_distance(*m.left, a.subspan(0, s),
                                        b.subspan(0, s));
      const double dr = metric_distance(*m.right, a.subspan(s), b.subspan(s));
      return std::sqrt(dl * dl + dr * dr);
    }
  }
  throw ValidationError("unsupported metric");
}

nlohmann::json NetResult::to_json() const {
  nlohmann::json j{{"kind", kind == NetKind::covering ? "covering" : "packing"},
                   {"radius", radius},
                   {"count", count},
                   {"center_indices", center_indices}};
  if (kind == NetKind::covering) j["pack_half_count"] = pack_half_count;
  return j;
}

NetResult greedy_packing(const PointCloud& cloud, double radius) {
  require(radius > 0.0, "packing radius must be positive");
  require(cloud.size() > 0, "packing on empty cloud");
  NetResult r;
  r.kind = NetKind::packing;
  r.radius = radius;
  r.center_indices = greedy_select(cloud, 2.0 * radius, /*strict=*/false);
  r.count = r.center_indices.size();
  verify_packing(cloud, r);
  return r;
}

NetResult greedy_covering(const PointCloud& cloud, double radius) {
  require(radius > 0.0, "covering radius must be positive");
  require(cloud.size() > 0, "covering on empty cloud");
  NetResult r;
  r.kind = NetKind::covering;
  r.radius = radius;
  // A point is covered once some center lies within radius, so a candidate
  // is kept iff it strictly clears radius.
  r.center_indices = greedy_select(cloud, radius, /*strict=*/true);
  r.count = r.center_indices.size();
  verify_covering(cloud, r);
  r.pack_half_count = greedy_packing(cloud, radius / 2.0).count;
  require(r.count <= r.pack_half_count,
          "covering count exceeds its packing certificate");
  return r;
}

std::size_t exact_covering_count(const PointCloud& cloud, double radius) {
  const std::size_t n = cloud.size();
  require(n >= 1 && n <= 20, "exact covering limited to 1..20 points");
  require(radius > 0.0, "covering radius must be positive");
  const auto balls = ball_masks(cloud, radius, /*strict_less=*/false);
  const std::uint32_t full = ((std::uint32_t)1 << n) - 1;
  std::vector<std::uint8_t> dp((std::size_t)full + 1, 0xFF);
  dp[0] = 0;
  for (std::uint32_t mask = 0; mask < full; ++mask) {
    if (dp[mask] == 0xFF) continue;
    const int low = std::countr_one(mask);  // first uncovered point
    for (std::size_t c = 0; c < n; ++c) {
      if (!(balls[c] >> low & 1u)) continue;
      const std::uint32_t next = mask | balls[c];
      dp[next] = std::min<std::uint8_t>(dp[next], dp[mask] + 1);
    }
  }
  return dp[full];
}

std::size_t exact_packing_count(const PointCloud& cloud, double radius) {
  const std::size_t n = cloud.size();
  require(n >= 1 && n <= 20, "exact packing limited to 1..20 points");
  require(radius > 0.0, "packing radius must be positive");
  auto adj = ball_masks(cloud, 2.0 * radius, /*strict_less=*/true);
  for (std::size_t i = 0; i < n; ++i) adj[i] &= ~((std::uint32_t)1 << i);
  const std::uint32_t full = ((std::uint32_t)1 << n) - 1;
  std::vector<std::uint8_t> ind((std::size_t)full + 1, 0);
  ind[0] = 1;
  std::size_t best = 0;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const int low = std::countr_zero(mask);
    const std::uint32_t rest = mask & (mask - 1);
    ind[mask] = ind[rest] && !(adj[(std::size_t)low] & rest);
    if (ind[mask])
      best = std::max<std::size_t>(best, (std::size_t)std::popcount(mask));
  }
  return best;
}

nlohmann::json SandwichResult::to_json() const {
  return {{"ok", ok},
          {"exact", exact},
          {"pack_outer", pack_outer},
          {"cover", cover},
          {"pack_inner", pack_inner}};
}

SandwichResult sandwich_check(const PointCloud& cloud, double delta,
                              double eta) {
  require(delta > 0.0 && eta > 0.0, "sandwich radii must be positive");
  require(cloud.size() > 0, "sandwich on empty cloud");
  SandwichResult r;
  if (cloud.size() <= 20) {
    r.exact = true;
    r.pack_outer = exact_packing_count(cloud, delta + eta);
    r.cover = exact_covering_count(cloud, delta);
    r.pack_inner = exact_packing_count(cloud, delta / 2.0);
  } else {
    r.pack_outer = greedy_packing(cloud, delta + eta).count;
    r.cover = greedy_covering(cloud, delta).count;
    r.pack_inner = greedy_packing(cloud, delta / 2.0).count;
  }
  r.ok = r.pack_outer <= r.cover && r.cover <= r.pack_inner;
  return r;
}

nlohmann::json DimensionEstimate::to_json() const {
  return {{"deltas", deltas},
          {"counts", counts},
          {"packing_lower", packing_lower},
          {"slope", slope},
          {"intercept", intercept},
          {"residual", residual},
          {"window_slopes", window_slopes},
          {"min_window_slope", min_window_slope},
          {"max_window_slope", max_window_slope}};
}

namespace {
double ols_slope(std::span<const double> x, std::span<const double> y,
                 double* intercept, double* residual) {
  const std::size_t m = x.size();
  double xb = 0.0, yb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xb += x[i];
    yb += y[i];
  }
  xb /= (double)m;
  yb /= (double)m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xb) * (x[i] - xb);
    sxy += (x[i] - xb) * (y[i] - yb);
  }
  const double slope = sxy / sxx;
  const double b0 = yb - slope * xb;
  if (intercept) *intercept = b0;
  if (residual) {
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = y[i] - (b0 + slope * x[i]);
      ss += e * e;
    }
    *residual = std::sqrt(ss / (double)m);
  }
  return slope;
}
}  // namespace

DimensionEstimate estimate_dimension(const CloudGenerator& gen,
                                     std::span<const double> deltas) {
  require(deltas.size() >= 4, "dimension ladder needs at least 4 deltas");
  for (std::size_t i = 0; i + 1 < deltas.size(); ++i)
    require(deltas[i] > deltas[i + 1] && deltas[i + 1] > 0.0,
            "dimension ladder must be strictly decreasing and positive");
  require(deltas.front() >= 100.0 * deltas.back() * (1.0 - 1e-12),
          "dimension ladder must span at least two decades");

  DimensionEstimate est;
  est.deltas.assign(deltas.begin(), deltas.end());
  for (double d : deltas) {
    const PointCloud cloud = gen(d);
    require(cloud.size() > 0, "cloud generator returned an empty cloud");
    est.counts.push_back(greedy_covering(cloud, d).count);
    est.packing_lower.push_back(greedy_packing(cloud, d + d / 100.0).count);
  }
  for (std::size_t i = 0; i + 1 < est.counts.size(); ++i)
    require(est.counts[i] <= est.counts[i + 1],
            "covering counts must grow as delta shrinks");

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < est.deltas.size(); ++i) {
    xs.push_back(-std::log2(est.deltas[i]));
    ys.push_back(std::log2((double)est.counts[i]));
  }
  est.slope = ols_slope(xs, ys, &est.intercept, &est.residual);
  for (std::size_t i = 0; i + 2 < xs.size(); ++i) {
    std::span<const double> wx(xs.data() + i, 3), wy(ys.data() + i, 3);
    est.window_slopes.push_back(ols_slope(wx, wy, nullptr, nullptr));
  }
  est.min_window_slope =
      *std::min_element(est.window_slopes.begin(), est.window_slopes.end());
  est.max_window_slope =
      *std::max_element(est.window_slopes.begin(), est.window_slopes.end());
  return est;
}

PointCloud product_cloud(const PointCloud& a, const PointCloud& b) {
  require(a.size() > 0 && b.size() > 0, "product of empty clouds");
  require(a.size() * b.size() <= kMaxProductPoints,
          "product cloud too large");
  PointCloud p;
  p.dim = a.dim + b.dim;
  if (a.metric.kind == MetricKind::euclidean &&
      b.metric.kind == MetricKind::euclidean) {
    p.metric.kind = MetricKind::euclidean;  // same numbers, one flat kernel
  } else {
    p.metric.kind = MetricKind::product_sum;
    p.metric.split = a.dim;
    p.metric.left = std::make_shared<Metric>(a.metric);
    p.metric.right = std::make_shared<Metric>(b.metric);
  }
  p.coords.reserve(a.size() * b.size() * (std::size_t)p.dim);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto pa = a.point(i), pb = b.point(j);
      p.coords.insert(p.coords.end(), pa.begin(), pa.end());
      p.coords.insert(p.coords.end(), pb.begin(), pb.end());
    }
  return p;
}

}  // namespace dilab
