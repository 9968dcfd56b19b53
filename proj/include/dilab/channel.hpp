#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dilab/prob.hpp"

namespace dilab {

enum class SetKind {
  interval,
  finite_list,
  log_sequence,
  poly_sequence,
  exp_sequence,
  fractal_F,
  fractal_G,
  product
};

// Description of the admissible channel inputs. Sequence sets are the
// dimension-zero families {0} u {1/log2 t}, {0} u {t^-s}, {0} u {c^-t};
// fractal sets constrain decimal digits to zero inside alternating windows
// (m_k, m_{k+1}] of the strictly increasing m-sequence (m_0 = 0): fractal_F
// zeroes even-k windows, fractal_G odd-k windows (1-based k). Positions past
// the last m entry are unconstrained.
struct InputSet {
  SetKind kind = SetKind::interval;
  double lo = 0.0, hi = 1.0;             // interval
  std::vector<double> values;            // finite_list
  double s = 1.0;                        // poly_sequence exponent
  double c = 2.0;                        // exp_sequence base
  std::vector<long long> m_seq;          // fractal windows
  std::shared_ptr<InputSet> left, right; // product factors

  int letter_dim() const;
  double max_value() const;
  void validate() const;

  // Finite sorted duplicate-free representatives. For intervals, resolution
  // is the grid spacing. For sequence kinds, resolution >= 1 is a total
  // element count and resolution < 1 a smallest-element cutoff. For fractal
  // kinds, resolution >= 1 is the digit depth D and resolution < 1 the grid
  // spacing (D = ceil(log10(1/resolution))).
  std::vector<std::vector<double>> enumerate(double resolution) const;

  static InputSet from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

enum class Family { bernoulli, poisson, dmc, arc, product };

// Input block of length n; letters are letter_dim-dimensional.
struct InputWord {
  std::vector<double> coords;  // letter-major, n * dim entries
  int dim = 1;

  std::size_t length() const {
    return dim > 0 ? coords.size() / (std::size_t)dim : 0;
  }
  std::span<const double> letter(std::size_t i) const {
    return {coords.data() + i * (std::size_t)dim, (std::size_t)dim};
  }
};

// Memoryless channel with finite output alphabet (arc: continuous output,
// exposed through closed forms only; alphabet_size() == 0 marks it).
struct ChannelModel {
  Family family = Family::bernoulli;
  InputSet input;
  double tail_bound = 1e-12;              // poisson truncation target
  double x_max = 10.0;                    // poisson energy cap
  int y_max = 0;                          // poisson, derived on construction
  std::vector<std::vector<double>> rows;  // dmc stochastic matrix
  double theta = 0.5;                     // arc length
  std::shared_ptr<ChannelModel> a, b;     // product factors

  bool discrete() const { return family != Family::arc; }
  int alphabet_size() const;
  int letter_dim() const;
  void validate() const;

  Dist output_dist(std::span<const double> x) const;
  Dist output_dist(double x) const;
  int sample_output(std::span<const double> x, std::uint64_t seed) const;
  SeqDist word_output(const InputWord& w) const;

  static ChannelModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static ChannelModel load(const std::string& path);
};

ChannelModel make_bernoulli(InputSet input);
ChannelModel make_bernoulli();
ChannelModel make_poisson(double x_max, double tail_bound = 1e-12);
ChannelModel make_dmc(std::vector<std::vector<double>> rows);
ChannelModel make_arc(double theta);
ChannelModel make_product(ChannelModel left, ChannelModel right);

// Smallest y_max whose Poisson(x_max) upper tail mass is <= tail_bound.
int poisson_y_max(double x_max, double tail_bound);

// Three-case wrapped-arc distance; delta = min(|x-x'|, 1-|x-x'|).
double arc_distance(double theta, double x, double x2);
// prod_i (1 - d_A(u_i, v_i)): exact second-kind error of the support decoder.
double arc_overlap(double theta, const InputWord& u, const InputWord& v);

}  // namespace dilab
