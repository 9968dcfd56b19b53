#pragma once

#include <span>
#include <vector>

namespace dilab {

// Probability vector over alphabet indices 0..|Y|-1. Construction validates:
// entries below -1e-12 are rejected, tiny negative rounding is clamped to 0;
// |sum-1| <= 1e-12 is accepted as stored (closed-form identities depend on
// exact entries), |sum-1| <= 1e-9 is renormalized, anything worse rejected.
class Dist {
 public:
  Dist() = default;
  explicit Dist(std::vector<double> p);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probs() const { return p_; }
  bool operator==(const Dist& o) const { return p_ == o.p_; }

 private:
  std::vector<double> p_;
};

// Unit vector on the nonnegative orthant of the sphere (componentwise sqrt).
struct SphVec {
  std::vector<double> coords;
};

// Product sequence distribution: one letter Dist per block position.
using SeqDist = std::vector<Dist>;

double entropy(const Dist& d);       // bits
double entropy_nats(const Dist& d);  // same quantity in nats

double tv_distance(const Dist& p, const Dist& q);
double fidelity(const Dist& p, const Dist& q);
double purified_distance(const Dist& p, const Dist& q);
SphVec spherise(const Dist& d);

// 2-norm across positions of per-letter TV distances.
double mixed_12_distance(const SeqDist& a, const SeqDist& b);
// 2-norm across positions of per-letter purified distances.
double dp_distance(const SeqDist& a, const SeqDist& b);
// Euclidean norm of the concatenated per-letter spherisation differences.
double spherised_seq_distance(const SeqDist& a, const SeqDist& b);

double seq_entropy(const SeqDist& s);  // bits, additive over letters

// log2 prod_i s_i(y_i); -inf sentinel when a zero-probability symbol is hit.
double seq_log_prob(const SeqDist& s, std::span<const int> y);
double seq_log_prob_nats(const SeqDist& s, std::span<const int> y);

}  // namespace dilab
