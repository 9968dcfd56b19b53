#include "dilab/prob.hpp"

#include <cmath>
#include <limits>

#include "dilab/util.hpp"

namespace dilab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

void check_sizes(const Dist& p, const Dist& q) {
  require(p.size() == q.size(), "alphabet sizes differ");
}

void check_block(const SeqDist& a, const SeqDist& b) {
  require(!a.empty() && a.size() == b.size(), "block lengths differ");
  for (std::size_t i = 0; i < a.size(); ++i)
    require(a[i].size() == b[i].size(), "alphabet sizes differ");
}
}  // namespace

Dist::Dist(std::vector<double> p) : p_(std::move(p)) {
  require(!p_.empty(), "Dist: empty probability vector");
  double sum = 0.0;
  for (double& v : p_) {
    require(v >= -1e-12, "Dist: negative probability entry");
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  const double off = std::fabs(sum - 1.0);
  if (off <= 1e-12) return;  // keep entries exact
  require(off <= 1e-9, "Dist: probabilities do not sum to 1");
  for (double& v : p_) v /= sum;
}

double entropy(const Dist& d) {
  double h = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double p = d[i];
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

double entropy_nats(const Dist& d) { return entropy(d) * kLn2; }

double tv_distance(const Dist& p, const Dist& q) {
  check_sizes(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::fabs(p[i] - q[i]);
  return 0.5 * acc;
}

double fidelity(const Dist& p, const Dist& q) {
  check_sizes(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::sqrt(p[i] * q[i]);
  return acc;
}

double purified_distance(const Dist& p, const Dist& q) {
  const double f = fidelity(p, q);
  const double v = 1.0 - f * f;
  return std::sqrt(v > 0.0 ? v : 0.0);
}

SphVec spherise(const Dist& d) {
  SphVec s;
  s.coords.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) s.coords[i] = std::sqrt(d[i]);
  return s;
}

double mixed_12_distance(const SeqDist& a, const SeqDist& b) {
  check_block(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = tv_distance(a[i], b[i]);
    acc += t * t;
  }
  return std::sqrt(acc);
}

double dp_distance(const SeqDist& a, const SeqDist& b) {
  check_block(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double p = purified_distance(a[i], b[i]);
    acc += p * p;
  }
  return std::sqrt(acc);
}

double spherised_seq_distance(const SeqDist& a, const SeqDist& b) {
  check_block(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t y = 0; y < a[i].size(); ++y) {
      const double t = std::sqrt(a[i][y]) - std::sqrt(b[i][y]);
      acc += t * t;
    }
  }
  return std::sqrt(acc);
}

double seq_entropy(const SeqDist& s) {
  double h = 0.0;
  for (const Dist& d : s) h += entropy(d);
  return h;
}

double seq_log_prob(const SeqDist& s, std::span<const int> y) {
  require(y.size() == s.size(), "output word length differs from block length");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    require(y[i] >= 0 && (std::size_t)y[i] < s[i].size(),
            "output symbol outside alphabet");
    const double p = s[i][(std::size_t)y[i]];
    if (p <= 0.0) return -kInf;
    acc += std::log2(p);
  }
  return acc;
}

double seq_log_prob_nats(const SeqDist& s, std::span<const int> y) {
  const double b = seq_log_prob(s, y);
  return b == -kInf ? b : b * kLn2;
}

}  // namespace dilab
