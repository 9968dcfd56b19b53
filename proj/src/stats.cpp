#include "dilab/stats.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "dilab/util.hpp"

namespace dilab::stats {

Interval clopper_pearson(std::uint64_t x, std::uint64_t n, double confidence) {
  require(n > 0, "clopper_pearson: trials must be positive");
  require(x <= n, "clopper_pearson: successes exceed trials");
  require(confidence > 0.0 && confidence < 1.0,
          "clopper_pearson: confidence must lie in (0,1)");
  const double a = 1.0 - confidence;
  Interval iv;
  if (x == 0) {
    iv.lo = 0.0;
  } else {
    boost::math::beta_distribution<double> lo((double)x, (double)(n - x + 1));
    iv.lo = boost::math::quantile(lo, a / 2.0);
  }
  if (x == n) {
    iv.hi = 1.0;
  } else {
    boost::math::beta_distribution<double> hi((double)(x + 1), (double)(n - x));
    iv.hi = boost::math::quantile(hi, 1.0 - a / 2.0);
  }
  return iv;
}

double chi2_quantile(int dof, double p) {
  require(dof >= 1, "chi2_quantile: dof must be >= 1");
  boost::math::chi_squared_distribution<double> d((double)dof);
  return boost::math::quantile(d, p);
}

}  // namespace dilab::stats
