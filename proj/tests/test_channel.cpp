#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "dilab/channel.hpp"
#include "dilab/prob.hpp"
#include "dilab/rng.hpp"
#include "dilab/stats.hpp"
#include "dilab/util.hpp"

using namespace dilab;

TEST_CASE("bernoulli: law, TV closed form, input window") {
  auto ch = make_bernoulli();
  const Dist d = ch.output_dist(0.3);
  CHECK(d[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(0.3).epsilon(1e-15));
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j) {
      const double x = i / 40.0, xp = j / 40.0;
      CHECK(std::fabs(tv_distance(ch.output_dist(x), ch.output_dist(xp)) -
                      std::fabs(x - xp)) <= 1e-15);
    }
  CHECK_THROWS_AS(ch.output_dist(1.5), ValidationError);
  CHECK_THROWS_AS(ch.output_dist(-0.1), ValidationError);
}

TEST_CASE("poisson: truncation point and closed forms") {
  CHECK(poisson_y_max(10.0, 1e-12) == 39);
  auto ch = make_poisson(10.0);
  CHECK(ch.y_max == 39);
  CHECK(ch.alphabet_size() == 40);

  // pmf matches e^-x x^y / y! up to the renormalized 1e-12 tail
  const double x = 3.7;
  const Dist d = ch.output_dist(x);
  double term = std::exp(-x);
  for (int y = 0; y <= 12; ++y) {
    CHECK(std::fabs(d[(std::size_t)y] - term) <= 1e-12);
    term *= x / (y + 1);
  }

  // fidelity: F^2 = exp(-(sqrt x - sqrt x')^2)
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) {
      const double a = i / 2.0, b = j / 2.0;
      const double f = fidelity(ch.output_dist(a), ch.output_dist(b));
      const double want =
          std::exp(-(std::sqrt(a) - std::sqrt(b)) * (std::sqrt(a) - std::sqrt(b)));
      CHECK(std::fabs(f * f - want) <= 2e-12 + 1e-10);
    }
  CHECK_THROWS_AS(ch.output_dist(10.5), ValidationError);
}

TEST_CASE("dmc: row echo and validation") {
  auto ch = make_dmc({{0.9, 0.1}, {0.1, 0.9}});
  CHECK(ch.alphabet_size() == 2);
  CHECK(ch.output_dist(0.0)[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(ch.output_dist(1.0)[1] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK_THROWS_AS(make_dmc({{0.9, 0.2}, {0.1, 0.9}}), ValidationError);
  CHECK_THROWS_AS(make_dmc({{0.9, 0.1}, {0.1, 0.8, 0.1}}), ValidationError);
}

TEST_CASE("input-set enumeration oracles") {
  InputSet iv;
  iv.kind = SetKind::interval;
  auto g = iv.enumerate(0.25);
  REQUIRE(g.size() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(g[(std::size_t)i][0] == doctest::Approx(i / 4.0).epsilon(1e-15));

  InputSet fl;
  fl.kind = SetKind::finite_list;
  fl.values = {0.7, 0.1, 0.7, 0.4};
  auto f = fl.enumerate(1.0);
  REQUIRE(f.size() == 3);  // sorted, deduplicated
  CHECK(f[0][0] == 0.1);
  CHECK(f[2][0] == 0.7);

  InputSet ex;
  ex.kind = SetKind::exp_sequence;
  ex.c = 2.0;
  CHECK(ex.enumerate(6.0).size() == 6);  // {0} plus 2^0..2^-4
  auto cut = ex.enumerate(0.1);          // {0} plus powers >= 0.1
  REQUIRE(cut.size() == 5);
  CHECK(cut[1][0] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(cut[4][0] == 1.0);

  InputSet ps;
  ps.kind = SetKind::poly_sequence;
  ps.s = 1.0;
  auto pcut = ps.enumerate(0.1);  // {0} plus 1/t for t <= 10
  CHECK(pcut.size() == 11);

  InputSet lg;
  lg.kind = SetKind::log_sequence;
  auto l = lg.enumerate(5.0);
  REQUIRE(l.size() == 5);  // {0} plus 1/log2 t for t = 2..5
  CHECK(l[4][0] == doctest::Approx(1.0).epsilon(1e-15));  // t = 2
}

TEST_CASE("fractal enumeration: frozen counts and digit filter") {
  InputSet F, G;
  F.kind = SetKind::fractal_F;
  G.kind = SetKind::fractal_G;
  F.m_seq = G.m_seq = {0, 1, 3, 9};

  // Window bookkeeping for m = (0,1,3,9): F zeroes digits 2..3, G zeroes
  // digit 1 and digits 4..9; positions past 9 are free for both.
  const std::size_t wantF[] = {10, 10, 10, 100, 1000, 10000};
  const std::size_t wantG[] = {1, 10, 100, 100, 100, 100};
  for (int depth = 1; depth <= 6; ++depth) {
    CHECK(F.enumerate((double)depth).size() == wantF[depth - 1]);
    CHECK(G.enumerate((double)depth).size() == wantG[depth - 1]);
  }

  for (const auto& p : F.enumerate(4.0)) {
    const long long v = std::llround(p[0] * 10000.0);
    CHECK((v / 100) % 10 == 0);  // digit 2
    CHECK((v / 10) % 10 == 0);   // digit 3
  }
  for (const auto& p : G.enumerate(4.0)) {
    const long long v = std::llround(p[0] * 10000.0);
    CHECK((v / 1000) % 10 == 0);  // digit 1
    CHECK(v % 10 == 0);           // digit 4
  }

  // resolution < 1 maps to depth ceil(log10(1/res))
  CHECK(F.enumerate(0.01).size() == wantF[1]);
}

TEST_CASE("product sets and channels") {
  InputSet F, G;
  F.kind = SetKind::fractal_F;
  G.kind = SetKind::fractal_G;
  F.m_seq = G.m_seq = {0, 1, 3, 9};
  InputSet prod;
  prod.kind = SetKind::product;
  prod.left = std::make_shared<InputSet>(F);
  prod.right = std::make_shared<InputSet>(G);
  CHECK(prod.letter_dim() == 2);
  CHECK(prod.enumerate(4.0).size() == 100 * 100);

  auto chP = make_product(make_bernoulli(F), make_bernoulli(G));
  CHECK(chP.alphabet_size() == 4);
  CHECK(chP.letter_dim() == 2);
  const double x[] = {0.3, 0.6};
  const Dist d = chP.output_dist(x);
  // product law is the tensor of the factor laws
  CHECK(d[0] == doctest::Approx(0.7 * 0.4).epsilon(1e-14));
  CHECK(d[3] == doctest::Approx(0.3 * 0.6).epsilon(1e-14));
  CHECK(seq_entropy({d}) ==
        doctest::Approx(entropy(Dist({0.7, 0.3})) + entropy(Dist({0.4, 0.6})))
            .epsilon(1e-13));
}

TEST_CASE("arc distance: three cases, wrap, and overlap product") {
  CHECK(arc_distance(0.25, 0.4, 0.4) == 0.0);
  CHECK(arc_distance(0.25, 0.0, 0.1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(arc_distance(0.25, 0.9, 0.1) ==
        doctest::Approx(0.8).epsilon(1e-15));  // wrap distance 0.2
  CHECK(arc_distance(0.25, 0.0, 0.5) == 1.0);  // disjoint arcs
  CHECK(arc_distance(0.75, 0.0, 0.5) ==
        doctest::Approx(1.0 / 0.75 - 1.0).epsilon(1e-15));
  CHECK(arc_distance(0.5, 0.25, 0.75) == 1.0);  // separation at the boundary
  CHECK_THROWS_AS(arc_distance(0.25, 1.0, 0.0), ValidationError);

  InputWord u, v;
  u.coords = {0.0, 0.5};
  v.coords = {0.1, 0.5};
  CHECK(arc_overlap(0.25, u, v) == doctest::Approx(0.6).epsilon(1e-15));
  v.coords = {0.5, 0.5};
  CHECK(arc_overlap(0.25, u, v) == 0.0);
}

TEST_CASE("word outputs and sampling statistics") {
  auto ch = make_bernoulli();
  InputWord w;
  w.coords = {0.3, 0.3, 0.9};
  const SeqDist s = ch.word_output(w);
  REQUIRE(s.size() == 3);
  CHECK(s[2][1] == doctest::Approx(0.9).epsilon(1e-15));

  // chi-square goodness of fit for the seeded sampler at x = 0.3
  const double x = 0.3;
  const int trials = 20000;
  int ones = 0;
  const double xv[] = {x};
  for (int r = 0; r < trials; ++r)
    ones += ch.sample_output(xv, rng::derive(424242, (std::uint64_t)r));
  const double e1 = trials * x, e0 = trials * (1 - x);
  const double chi2 = (ones - e1) * (ones - e1) / e1 +
                      (trials - ones - e0) * (trials - ones - e0) / e0;
  CHECK(chi2 <= stats::chi2_quantile(1, 0.9999));
}

TEST_CASE("channel json round trip") {
  std::vector<ChannelModel> models;
  models.push_back(make_bernoulli());
  models.push_back(make_poisson(10.0));
  models.push_back(make_dmc({{0.9, 0.1}, {0.2, 0.8}}));
  models.push_back(make_arc(0.25));
  InputSet F;
  F.kind = SetKind::fractal_F;
  F.m_seq = {0, 1, 3, 9};
  InputSet G;
  G.kind = SetKind::fractal_G;
  G.m_seq = {0, 1, 3, 9};
  models.push_back(make_product(make_bernoulli(F), make_bernoulli(G)));
  for (const auto& ch : models) {
    const std::string s1 = ch.to_json().dump();
    const auto back = ChannelModel::from_json(nlohmann::json::parse(s1));
    CHECK(back.to_json().dump() == s1);
    CHECK(back.alphabet_size() == ch.alphabet_size());
  }
}
