#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dilab/codec.hpp"

namespace dilab {

struct ErrorEstimate {
  double lambda1_hat = 0.0;
  double lambda2_hat = 0.0;
  double lambda1_mean = 0.0;  // auxiliary; the definition binds the max
  double lambda2_mean = 0.0;
  double ci95_halfwidth1 = 0.0;  // Clopper-Pearson at the maximizing index
  double ci95_halfwidth2 = 0.0;
  std::uint64_t trials1 = 0;  // per-codeword trials (0 on the exact path)
  std::uint64_t trials2 = 0;  // per-pair trials
  bool lambda2_defined = false;  // codes of size < 2 have no second kind
  bool exact = false;            // arc-support codes are evaluated in closed form
  bool pairs_exhaustive = true;
  std::uint64_t pairs_evaluated = 0;
  std::uint64_t words_evaluated = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

// Seeded Monte-Carlo estimate; a pure function of (code, trials, seed,
// pair_budget). Per-trial randomness is derived from (seed, j, k, trial)
// counters, so results are invariant to execution order and thread count.
// Ordered pairs beyond pair_budget are sampled without replacement.
ErrorEstimate estimate_errors(const DICode& code, std::uint64_t trials,
                              std::uint64_t seed, std::uint64_t pair_budget);

struct ExactErrors {
  std::vector<double> lambda1;               // per codeword
  std::vector<std::vector<double>> lambda2;  // ordered [j][k], diagonal 0
  double lambda1_max = 0.0;
  double lambda2_max = 0.0;
};

// Exhaustive enumeration of all |Y|^n output words, log-domain scoring with
// compensated summation. Requires |Y|^n <= 2^24 and a code small enough for
// the pairwise sweep.
ExactErrors exact_errors_small(const DICode& code);

struct AuditResult {
  std::uint64_t checks = 0;
  std::uint64_t passes = 0;
};

// Repeated-seed agreement audit: for each of `seeds` derived seeds, sample
// a few codewords and ordered pairs, re-estimate each by Monte-Carlo at
// `trials`, and compare against the exact value within 3 binomial sigma
// (exact equality when sigma is zero).
AuditResult mc_audit(const DICode& code, const ExactErrors& exact, int seeds,
                     int words_per_seed, int pairs_per_seed,
                     std::uint64_t trials, std::uint64_t base_seed);

struct ErrorTargets {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
};

struct SweepOptions {
  double delta = 0.0;  // 0 picks the default width per code
  std::uint64_t trials = 2000;
  std::uint64_t pair_budget = 2000;
  std::uint64_t seed = 0;
  double resolution = 0.0;  // net enumeration override
  OuterMode mode = OuterMode::automatic;
  std::size_t materialize_cap = 4096;
  std::optional<ErrorTargets> targets;
};

struct ScalingRecord {
  int n = 0;
  double log2_size = 0.0;
  std::uint64_t exact_size = 0;
  bool size_exact = false;
  ErrorEstimate errors;
  bool has_errors = false;
  bool has_targets = false;
  bool targets_met = true;
  std::string note;  // per-n failure text; empty on success

  // Rates are derived on demand so they can never drift from the size.
  double rate_exp() const;
  double rate_nlogn() const;
  double rate_nloglogn() const;

  nlohmann::json to_json() const;
  std::string csv_row() const;
  static const char* csv_header();
};

std::vector<ScalingRecord> scaling_sweep(const ChannelModel& ch,
                                         std::span<const int> n_list,
                                         double alpha, double t,
                                         const SweepOptions& opt = {});

// Builds the two fractal-restricted Bernoulli channels and their product,
// runs dimension ladders (raw coordinates with thresholds in mind, plus a
// shorter spherised ladder for reference) and scaling sweeps, and compares
// certified code sizes per n. D governs the code-construction enumeration
// depth; ladder rungs pick their own depth from the rung scale.
nlohmann::json superactivation_demo(const std::vector<long long>& m_seq, int D,
                                    std::span<const int> n_list,
                                    double alpha = 0.25, double t = 0.1,
                                    std::uint64_t seed = 0,
                                    std::uint64_t trials = 2000,
                                    std::uint64_t pair_budget = 512);

}  // namespace dilab
