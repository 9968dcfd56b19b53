#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "dilab/channel.hpp"
#include "dilab/codec.hpp"
#include "dilab/simulator.hpp"
#include "dilab/util.hpp"

using namespace dilab;

namespace {

DICode small_code(double alpha, double delta) {
  AssembleOptions opt;
  opt.materialize_cap = 512;
  return assemble_code(make_bernoulli(), 8, alpha, 0.1, delta, opt);
}

}  // namespace

TEST_CASE("exact enumeration against the frozen n = 8 values") {
  const DICode code = small_code(0.1, 1.0);
  REQUIRE(code.size() == 70);
  const ExactErrors ex = exact_errors_small(code);
  CHECK(ex.lambda1_max == 0.0);
  CHECK(ex.lambda2_max ==
        doctest::Approx(0.40000000000000013).epsilon(1e-15));
  REQUIRE(ex.lambda1.size() == 70);
  REQUIRE(ex.lambda2.size() == 70);
  for (std::size_t j = 0; j < 70; ++j) CHECK(ex.lambda2[j][j] == 0.0);

  const ExactErrors e2 = exact_errors_small(small_code(0.2, 1.0));
  CHECK(e2.lambda1_max ==
        doctest::Approx(0.18462730240000003).epsilon(1e-14));
  CHECK(e2.lambda2_max == 1.0);  // overlapping windows at this width, honest
  const ExactErrors e3 = exact_errors_small(small_code(0.3, 1.0));
  CHECK(e3.lambda1_max ==
        doctest::Approx(0.080355555555555624).epsilon(1e-13));
}

TEST_CASE("monte-carlo estimate: frozen point values and flags") {
  const DICode code = small_code(0.1, 1.0);
  const ErrorEstimate est = estimate_errors(code, 100000, 17, 2000);
  CHECK(est.lambda1_hat == 0.0);
  CHECK(est.lambda2_hat ==
        doctest::Approx(0.40588999999999997).epsilon(1e-15));
  CHECK(!est.exact);
  CHECK(!est.pairs_exhaustive);  // 70*69 ordered pairs exceed the budget
  CHECK(est.pairs_evaluated == 2000);
  CHECK(est.words_evaluated == 64);
  CHECK(est.trials1 == 100000);
  CHECK(est.lambda2_defined);
  const auto j = est.to_json();
  CHECK(j.at("pair_sampling").at("mode") == "sampled");
  CHECK(j.at("seed").get<std::uint64_t>() == 17);
}

TEST_CASE("estimator is a pure function of (code, trials, seed, budget)") {
  const DICode code = small_code(0.1, 1.0);
  const auto a = estimate_errors(code, 5000, 42, 500);
  const auto b = estimate_errors(code, 5000, 42, 500);
  CHECK(a.to_json().dump() == b.to_json().dump());
  const auto c = estimate_errors(code, 5000, 43, 500);
  CHECK(a.to_json().dump() != c.to_json().dump());
}

TEST_CASE("thread count never changes the estimate") {
  const DICode code = small_code(0.2, 1.0);
  setenv("DI_LAB_THREADS", "1", 1);
  const auto a = estimate_errors(code, 5000, 42, 500).to_json().dump();
  setenv("DI_LAB_THREADS", "3", 1);
  const auto b = estimate_errors(code, 5000, 42, 500).to_json().dump();
  unsetenv("DI_LAB_THREADS");
  const auto c = estimate_errors(code, 5000, 42, 500).to_json().dump();
  CHECK(a == b);
  CHECK(b == c);
}

TEST_CASE("seed audit accepts the estimator at 3 sigma") {
  const DICode code = small_code(0.1, 1.0);
  const ExactErrors ex = exact_errors_small(code);
  const AuditResult ar = mc_audit(code, ex, 100, 5, 10, 100000, 99);
  CHECK(ar.checks == 1500);
  CHECK((double)ar.passes / (double)ar.checks >= 0.99);
}

TEST_CASE("lemma ceilings hold with the certified epsilon") {
  auto bern = make_bernoulli();
  const DICode code = small_code(0.1, 1.0);
  const ExactErrors ex = exact_errors_small(code);
  const double delta = code.delta;
  const double l1_ceiling = 2.0 * std::exp(-delta * delta / (36.0 * kfun(2)));
  for (double l1 : ex.lambda1) CHECK(l1 <= l1_ceiling);
  for (std::size_t j = 0; j < code.size(); j += 7)
    for (std::size_t k = 0; k < code.size(); k += 7) {
      if (j == k) continue;
      const auto pc =
          pair_certificate(bern, code.codewords[j], code.codewords[k]);
      const double eps = std::exp(-0.25 * pc.sum_sq);
      CHECK(ex.lambda2[j][k] <= lemma2_bound(code.entropies[j],
                                             code.entropies[k], 8, delta, eps,
                                             2));
    }
}

TEST_CASE("identity channel: all error mass vanishes") {
  AssembleOptions opt;
  opt.materialize_cap = 512;
  const DICode code =
      assemble_code(make_dmc({{1, 0}, {0, 1}}), 8, 0.2, 0.1, 1.0, opt);
  const ExactErrors ex = exact_errors_small(code);
  CHECK(ex.lambda1_max == 0.0);
  CHECK(ex.lambda2_max == 0.0);
  const ErrorEstimate est = estimate_errors(code, 200, 3, 500);
  CHECK(est.lambda1_hat == 0.0);
  CHECK(est.lambda2_hat == 0.0);
}

TEST_CASE("single-codeword code leaves the second kind undefined") {
  InputSet s;
  s.kind = SetKind::finite_list;
  s.values = {0.5};
  const DICode code = assemble_code(make_bernoulli(s), 1, 0.2, 0.1, 0);
  REQUIRE(code.size() == 1);
  const ExactErrors ex = exact_errors_small(code);
  CHECK(ex.lambda1_max == 0.0);
  const ErrorEstimate est = estimate_errors(code, 100, 0, 10);
  CHECK(!est.lambda2_defined);
  CHECK(est.to_json().at("lambda2_hat").is_null());
}

TEST_CASE("arc codes evaluate exactly through the closed form") {
  const DICode code = assemble_code(make_arc(0.5), 20, 0.2, 0.1, 0);
  const ErrorEstimate est = estimate_errors(code, 100, 5, 300);
  CHECK(est.exact);
  CHECK(est.trials1 == 0);
  CHECK(est.lambda1_hat == 0.0);
  CHECK(est.lambda2_hat == 0.0);
  const ExactErrors ex = exact_errors_small(code);
  CHECK(ex.lambda1_max == 0.0);
  CHECK(ex.lambda2_max == 0.0);
}

TEST_CASE("exhaustive pair sweep below the budget") {
  AssembleOptions opt;
  opt.materialize_cap = 512;
  const DICode code =
      assemble_code(make_dmc({{1, 0}, {0, 1}}), 3, 0.2, 0.1, 1.0, opt);
  REQUIRE(code.size() == 8);
  const ErrorEstimate est = estimate_errors(code, 200, 1, 500);
  CHECK(est.pairs_exhaustive);
  CHECK(est.pairs_evaluated == 56);
  CHECK(est.to_json().at("pair_sampling").at("mode") == "exhaustive");
}

TEST_CASE("simulator preconditions") {
  const DICode code = small_code(0.1, 1.0);
  CHECK_THROWS_AS(estimate_errors(code, 99, 0, 10), ValidationError);
  CHECK_THROWS_AS(estimate_errors(code, 1000, 0, 0), ValidationError);
  // the exhaustive oracle refuses blocks beyond |Y|^n = 2^24
  const DICode big =
      assemble_code(make_dmc({{1, 0}, {0, 1}}), 25, 0.2, 0.1, 0);
  CHECK_THROWS_AS(exact_errors_small(big), ValidationError);
}

TEST_CASE("scaling sweep: records, rates, csv shape") {
  const int ns[] = {16, 32};
  SweepOptions so;
  so.trials = 500;
  so.pair_budget = 200;
  const auto recs = scaling_sweep(make_bernoulli(), ns, 0.2, 0.1, so);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].note.empty());
  CHECK(recs[0].exact_size == 7);
  CHECK(recs[1].exact_size == 1589344);
  CHECK(recs[1].rate_exp() > recs[0].rate_exp());
  CHECK(recs[0].rate_nlogn() ==
        doctest::Approx(recs[0].log2_size / (16 * 4.0)).epsilon(1e-15));
  CHECK(std::string(ScalingRecord::csv_header()) ==
        "n,N,rate_nlogn,rate_exp,lambda1_hat,ci1,lambda2_hat,ci2,seed");
  CHECK(recs[0].csv_row().rfind("16,7,", 0) == 0);
  CHECK(recs[1].csv_row().rfind("32,1589344,", 0) == 0);
  const auto j = recs[0].to_json();
  CHECK(j.at("n") == 16);
  CHECK(j.contains("errors"));

  // unsorted n lists are rejected before any work
  const int bad[] = {32, 16};
  CHECK_THROWS_AS(scaling_sweep(make_bernoulli(), bad, 0.2, 0.1, so),
                  ValidationError);
}

TEST_CASE("geometric-sequence input keeps the n log log n rate bounded") {
  InputSet s;
  s.kind = SetKind::exp_sequence;
  s.c = 2.0;
  const int ns[] = {16, 32, 64, 128};
  SweepOptions so;
  so.trials = 500;
  so.pair_budget = 100;
  const auto recs = scaling_sweep(make_bernoulli(s), ns, 0.2, 0.1, so);
  REQUIRE(recs.size() == 4);
  const double want_log2[] = {2.8073549220576042, 8.6438561897747253,
                              21.293839819589486, 47.587680083077167};
  for (int i = 0; i < 4; ++i) {
    CHECK(recs[(std::size_t)i].log2_size ==
          doctest::Approx(want_log2[i]).epsilon(1e-14));
    const double r3 = recs[(std::size_t)i].rate_nloglogn();
    CHECK(r3 >= 0.05);
    CHECK(r3 <= 0.2);
  }
}

TEST_CASE("superactivation report structure at reduced depth") {
  const int ns[] = {16};
  const auto rep = superactivation_demo({0, 1, 3, 9}, 3, ns, 0.25, 0.1, 0,
                                        500, 128);
  CHECK(rep.at("D") == 3);
  CHECK(rep.at("alpha") == 0.25);
  REQUIRE(rep.at("ladder_raw").size() == 7);
  REQUIRE(rep.at("ladder_spherised").size() == 5);
  for (const char* key : {"F", "G", "product"}) {
    const auto& ch = rep.at("channels").at(key);
    CHECK(ch.contains("dimension_raw"));
    CHECK(ch.contains("dimension_spherised"));
    CHECK(ch.contains("sweep"));
  }
  // ladder rungs pick their own depth, so the dimension split is already
  // visible at reduced construction depth
  CHECK(rep.at("channels").at("F").at("dimension_raw").at("min_window_slope")
            .get<double>() <= 0.2);
  CHECK(rep.at("channels").at("G").at("dimension_raw").at("min_window_slope")
            .get<double>() <= 0.2);
  CHECK(rep.at("channels").at("product").at("dimension_raw")
            .at("min_window_slope").get<double>() >= 0.8);
  REQUIRE(rep.at("size_comparison").size() == 1);
  CHECK(rep.at("size_comparison")[0].at("valid").get<bool>());
}
