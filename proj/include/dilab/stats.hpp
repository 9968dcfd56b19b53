#pragma once

#include <cstdint>

namespace dilab::stats {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Exact binomial (Clopper-Pearson) two-sided interval from integer counts.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials,
                         double confidence = 0.95);

double chi2_quantile(int dof, double p);

}  // namespace dilab::stats
