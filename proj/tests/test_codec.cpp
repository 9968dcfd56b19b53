#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "dilab/channel.hpp"
#include "dilab/codec.hpp"
#include "dilab/prob.hpp"
#include "dilab/util.hpp"

using namespace dilab;

namespace {

InputSet fractal_set(SetKind kind) {
  InputSet s;
  s.kind = kind;
  s.m_seq = {0, 1, 3, 9};
  return s;
}

double sph_dist2(const Dist& a, const Dist& b) {
  const auto sa = spherise(a).coords;
  const auto sb = spherise(b).coords;
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i)
    acc += (sa[i] - sb[i]) * (sa[i] - sb[i]);
  return acc;
}

int hamming(const std::vector<std::uint16_t>& a,
            const std::vector<std::uint16_t>& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

}  // namespace

TEST_CASE("window width helpers") {
  CHECK(kfun(2) == doctest::Approx(std::log2(3.0) * std::log2(3.0)).epsilon(1e-15));
  CHECK(kfun(8) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(default_delta(16, 2) == 4.0);  // the validity clamp binds
  CHECK(default_delta(16, 40) ==
        doctest::Approx(4.0 * std::log2(40.0)).epsilon(1e-14));
  const double fl = lemma1_floor(4.0, 2);
  CHECK(fl == doctest::Approx(1.0 - 2.0 * std::exp(-16.0 / (36.0 * kfun(2))))
                  .epsilon(1e-15));
  CHECK(lemma1_floor(100.0, 2) > 0.99);
  // the ceiling is monotone in eps and positive
  const double b1 = lemma2_bound(3.0, 3.5, 16, 1.0, 1e-6, 2);
  const double b2 = lemma2_bound(3.0, 3.5, 16, 1.0, 1e-3, 2);
  CHECK(b1 > 0.0);
  CHECK(b1 < b2);
}

TEST_CASE("alphabet nets: frozen sizes and the separation invariant") {
  auto ch = make_bernoulli();
  const int ns02[] = {16, 32, 64, 128};
  const int want02[] = {3, 4, 4, 5};
  for (int i = 0; i < 4; ++i)
    CHECK((int)build_alphabet_net(ch, ns02[i], 0.2).letters.size() ==
          want02[i]);
  const int ns25[] = {16, 64, 256};
  const int want25[] = {4, 5, 7};
  for (int i = 0; i < 3; ++i)
    CHECK((int)build_alphabet_net(ch, ns25[i], 0.25).letters.size() ==
          want25[i]);
  const double as[] = {0.1, 0.2, 0.3};
  const int want8[] = {2, 3, 3};
  for (int i = 0; i < 3; ++i)
    CHECK((int)build_alphabet_net(ch, 8, as[i]).letters.size() == want8[i]);

  const auto net = build_alphabet_net(ch, 16, 0.25);
  CHECK(net.radius == doctest::Approx(std::pow(16.0, -0.25)).epsilon(1e-15));
  for (std::size_t a = 0; a < net.dists.size(); ++a) {
    CHECK(net.entropies[a] ==
          doctest::Approx(entropy(net.dists[a])).epsilon(1e-13));
    for (std::size_t b = a + 1; b < net.dists.size(); ++b)
      CHECK(std::sqrt(sph_dist2(net.dists[a], net.dists[b])) >=
            net.radius - 1e-12);
  }
}

TEST_CASE("outer codes: greedy lexicode oracle") {
  const OuterCode oc = build_outer_code(2, 4, 0.45, OuterMode::greedy);
  CHECK(oc.distance == 2);
  CHECK(oc.exhausted);
  CHECK(oc.distance_exact);
  REQUIRE(oc.words.size() == 8);  // the even-weight [4,3,2] code
  for (const auto& w : oc.words) {
    int weight = 0;
    for (auto s : w) weight += s;
    CHECK(weight % 2 == 0);
  }
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = a + 1; b < 8; ++b)
      CHECK(hamming(oc.words[a], oc.words[b]) >= 2);
  CHECK(oc.log2_true_size == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("outer codes: random linear construction with distance audit") {
  const OuterCode gv = build_outer_code(5, 6, 0.5, OuterMode::gv_linear, 7);
  CHECK(gv.field == 5);
  CHECK(gv.distance == 3);
  CHECK(gv.distance_exact);  // 5^2 <= 2^16, audited by full enumeration
  CHECK(gv.redraws == 1);
  CHECK(gv.generator.size() == 2);
  REQUIRE(gv.words.size() == 25);
  CHECK(gv.log2_true_size ==
        doctest::Approx(2.0 * std::log2(5.0)).epsilon(1e-14));
  for (std::size_t a = 0; a < 25; ++a)
    for (std::size_t b = a + 1; b < 25; ++b)
      CHECK(hamming(gv.words[a], gv.words[b]) >= 3);
  // determinism in the seed
  const OuterCode again = build_outer_code(5, 6, 0.5, OuterMode::gv_linear, 7);
  CHECK(again.words == gv.words);
}

TEST_CASE("outer codes: mode resolution and preconditions") {
  CHECK(build_outer_code(3, 8, 0.3, OuterMode::automatic).mode ==
        OuterMode::greedy);
  CHECK(build_outer_code(3, 24, 0.1, OuterMode::automatic).mode ==
        OuterMode::gv_linear);
  CHECK_THROWS_AS(build_outer_code(2, 4, 0.5, OuterMode::greedy),
                  ValidationError);  // needs t < 1 - 1/k
  CHECK_THROWS_AS(build_outer_code(2, 4, 0.0, OuterMode::greedy),
                  ValidationError);
  CHECK_THROWS_AS(build_outer_code(1, 4, 0.1, OuterMode::greedy),
                  ValidationError);
}

TEST_CASE("typicality decoder windows and the -inf rejection") {
  auto ch = make_bernoulli();
  InputWord w;
  w.coords = {0.3, 0.3};
  const SeqDist s = ch.word_output(w);
  const double H = seq_entropy(s);
  const auto dec = make_typicality_decoder(w, 1.0, H);
  CHECK(dec.lo == doctest::Approx(-H - std::sqrt(2.0)).epsilon(1e-14));
  CHECK(dec.hi == doctest::Approx(-H + std::sqrt(2.0)).epsilon(1e-14));
  const int y[] = {0, 1};
  CHECK(typicality_test(dec, s, y));  // log2 p = -2.25 bits, inside
  InputWord z;
  z.coords = {0.0, 0.3};
  const SeqDist sz = ch.word_output(z);
  const auto dz = make_typicality_decoder(z, 1.0, seq_entropy(sz));
  const int y1[] = {1, 0};  // first letter has probability zero
  CHECK(!typicality_test(dz, sz, y1));
}

TEST_CASE("assembled bernoulli ladder: frozen certified sizes") {
  auto ch = make_bernoulli();

  DICode c16 = assemble_code(ch, 16, 0.2, 0.1, 0);
  CHECK(c16.meta.size_exact);
  CHECK(c16.meta.exact_size == 7);
  CHECK(c16.meta.log2_size ==
        doctest::Approx(2.8073549220576042).epsilon(1e-15));
  CHECK(c16.meta.materialized == 1302);
  CHECK(c16.meta.outer_mode == "greedy");
  CHECK(c16.meta.entropy_bin_index == 5);
  CHECK(c16.meta.net_size == 3);

  DICode c32 = assemble_code(ch, 32, 0.2, 0.1, 0);
  CHECK(c32.meta.exact_size == 1589344);
  CHECK(c32.meta.outer_mode == "gv_linear");
  CHECK(c32.meta.entropy_bin_index == 18);

  DICode c64 = assemble_code(ch, 64, 0.2, 0.1, 0);
  CHECK(c64.meta.size_exact);
  CHECK(c64.meta.exact_size == 40416230340044ull);
  CHECK(c64.meta.log2_size ==
        doctest::Approx(45.199999999999967).epsilon(1e-15));

  DICode c128 = assemble_code(ch, 128, 0.2, 0.1, 0);
  CHECK(!c128.meta.size_exact);
  CHECK(c128.meta.log2_size ==
        doctest::Approx(132.48611653102415).epsilon(1e-14));
  CHECK(c128.meta.outer_field == 5);

  // superexponential signature plus the nontrivial n log n normalization
  double prev = -1.0;
  for (const DICode* c : {&c16, &c32, &c64, &c128}) {
    const double re = c->meta.log2_size / c->n;
    CHECK(re > prev);
    CHECK(c->meta.log2_size / (c->n * std::log2((double)c->n)) > 0.02);
    prev = re;
  }
}

TEST_CASE("entropy binning keeps codeword entropies within one bit") {
  auto ch = make_bernoulli();
  const DICode code = assemble_code(ch, 16, 0.2, 0.1, 0);
  const int bin = code.meta.entropy_bin_index;
  REQUIRE(code.entropies.size() == code.size());
  for (std::size_t j = 0; j < code.size(); ++j) {
    const double H = code.entropies[j];
    CHECK(H <= (double)bin + 1e-9);
    CHECK(H > (double)bin - 1.0 - 1e-9);
    // stored entropies match a fresh per-letter recomputation
    if (j < 25)
      CHECK(H ==
            doctest::Approx(seq_entropy(ch.word_output(code.codewords[j])))
                .epsilon(1e-12));
  }
  // pairwise spherised separation honours the certified floor
  const double floor2 = code.meta.pair_l2_floor;
  CHECK(floor2 == doctest::Approx(2.0 * std::pow(16.0, -0.4)).epsilon(1e-13));
  for (std::size_t a = 0; a < 40; ++a)
    for (std::size_t b = a + 1; b < 40; ++b) {
      const auto pc = pair_certificate(ch, code.codewords[a], code.codewords[b]);
      CHECK(pc.sum_sq >= (1.0 - 1e-9) * floor2);
      CHECK(-pc.ln_fid >= 0.25 * pc.sum_sq - 1e-12);
    }
}

TEST_CASE("dmc regimes: product, two-letter weight count, pigeonhole") {
  // equal-entropy rows: the full product code, exactly k^n messages
  DICode bsc = assemble_code(make_dmc({{0.9, 0.1}, {0.1, 0.9}}), 10, 0.2, 0.1, 0);
  CHECK(bsc.meta.outer_mode == "product");
  CHECK(bsc.meta.size_exact);
  CHECK(bsc.meta.exact_size == 1024);
  CHECK(bsc.meta.log2_size == 10.0);
  CHECK(bsc.meta.materialized == 1024);

  // two distinct rows: the modal entropy bin is a binomial count
  DICode mix = assemble_code(make_dmc({{1.0, 0.0}, {0.5, 0.5}}), 10, 0.2, 0.1, 0);
  CHECK(mix.meta.size_exact);
  CHECK(mix.meta.exact_size == 252);  // C(10,5), the modal weight class
  CHECK(mix.meta.entropy_bin_index == 5);
  CHECK(mix.meta.materialized == 252);
  for (std::size_t j = 0; j < mix.size(); ++j) {
    int w = 0;
    for (std::size_t i = 0; i < 10; ++i)
      w += mix.codewords[j].coords[i] == 1.0;
    CHECK(w == 5);
  }

  // three distinct rows fall back to the pigeonhole certificate
  DICode v3 = assemble_code(
      make_dmc({{1, 0, 0}, {0, 1, 0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}), 6, 0.2,
      0.1, 0);
  CHECK(!v3.meta.size_exact);
  CHECK(v3.meta.log2_size ==
        doctest::Approx(6.0 * std::log2(3.0) - std::log2(10.0)).epsilon(1e-12));

  // identity control: rate_exp pinned at 1, rate_nlogn decreasing
  auto ident = make_dmc({{1, 0}, {0, 1}});
  double prev = 1e9;
  for (int n : {16, 32, 64}) {
    DICode c = assemble_code(ident, n, 0.2, 0.1, 0);
    CHECK(c.meta.log2_size / n == doctest::Approx(1.0).epsilon(1e-12));
    const double rn = c.meta.log2_size / (n * std::log2((double)n));
    CHECK(rn < prev);
    prev = rn;
  }
}

TEST_CASE("n = 8 grid used by the exhaustive-oracle suite") {
  auto ch = make_bernoulli();
  AssembleOptions opt;
  opt.materialize_cap = 512;
  const std::size_t want_mat[] = {70, 172, 243};
  const double alphas[] = {0.1, 0.2, 0.3};
  for (int i = 0; i < 3; ++i)
    for (double d : {0.5, 1.0, 2.0}) {
      const DICode code = assemble_code(ch, 8, alphas[i], 0.1, d, opt);
      CHECK(code.meta.materialized == want_mat[i]);
      CHECK(code.delta == d);
      const auto dec = code.decoder(0);
      CHECK(dec.lo < dec.hi);
      CHECK(dec.hi - dec.lo ==
            doctest::Approx(2.0 * d * std::sqrt(8.0)).epsilon(1e-13));
    }
}

TEST_CASE("fractal factors and their product at n = 32") {
  AssembleOptions opt;
  opt.resolution = 4.0;
  auto chF = make_bernoulli(fractal_set(SetKind::fractal_F));
  auto chG = make_bernoulli(fractal_set(SetKind::fractal_G));
  auto chP = make_product(chF, chG);
  const DICode cF = assemble_code(chF, 32, 0.25, 0.1, 0, opt);
  const DICode cG = assemble_code(chG, 32, 0.25, 0.1, 0, opt);
  const DICode cP = assemble_code(chP, 32, 0.25, 0.1, 0, opt);
  CHECK(cF.meta.net_size == 3);
  CHECK(cG.meta.net_size == 1);
  CHECK(cP.meta.net_size == 4);
  CHECK(cF.meta.exact_size == 400);
  CHECK(cG.meta.exact_size == 1);
  CHECK(cG.meta.log2_size == 0.0);
  CHECK(cG.meta.outer_mode == "single");
  CHECK(cP.meta.exact_size == 794672);
  // the product code certifiably outgrows the factor product
  CHECK(cP.meta.log2_size > cF.meta.log2_size + cG.meta.log2_size + 1.0);
  CHECK(cP.codewords[0].dim == 2);
}

TEST_CASE("arc grid codes: support decoder, premise flag, overlap ceiling") {
  for (double th : {0.25, 0.5}) {
    for (double t : {0.1, 0.2}) {
      for (int n : {20, 50}) {
        const auto ch = make_arc(th);
        const DICode code = assemble_code(ch, n, 0.2, t, 0);
        CHECK(code.kind == DecoderKind::arc_support);
        const int k = code.meta.net_size;
        CHECK(k == std::max(2, (int)(n * t * t + 1e-12)));
        CHECK(code.meta.premise_met ==
              (1.0 / k <= std::min(th, 1.0 - th) + 1e-15));
        double worst = 0.0;
        for (std::size_t a = 0; a < code.size(); ++a)
          for (std::size_t b = 0; b < code.size(); ++b) {
            if (a == b) continue;
            worst = std::max(
                worst, arc_overlap(th, code.codewords[a], code.codewords[b]));
          }
        CHECK(worst <= std::exp(-1.0 / (t * th)) + 1e-15);
      }
    }
  }
}

TEST_CASE("degenerate single-letter channel yields the one-word code") {
  InputSet s;
  s.kind = SetKind::finite_list;
  s.values = {0.5};
  const DICode code = assemble_code(make_bernoulli(s), 4, 0.2, 0.1, 0);
  CHECK(code.size() == 1);
  CHECK(code.meta.exact_size == 1);
  CHECK(code.meta.log2_size == 0.0);
  CHECK(code.meta.outer_mode == "single");
}

TEST_CASE("assembly preconditions") {
  auto ch = make_bernoulli();
  CHECK_THROWS_AS(assemble_code(ch, 16, 0.6, 0.1, 0), ValidationError);
  CHECK_THROWS_AS(assemble_code(ch, 16, 0.5, 0.1, 0), ValidationError);
  CHECK_THROWS_AS(assemble_code(ch, 16, 0.0, 0.1, 0), ValidationError);
  CHECK_THROWS_AS(assemble_code(ch, 16, 0.2, 1.5, 0), ValidationError);
  CHECK_THROWS_AS(assemble_code(ch, 4, 0.2, 0.1, 10.0),
                  ValidationError);  // width outside (0, sqrt(n) log2|Y|]
  CHECK_THROWS_AS(assemble_code(ch, 0, 0.2, 0.1, 0), ValidationError);
}

TEST_CASE("code json round trip is byte-stable") {
  auto ch = make_bernoulli();
  const DICode code = assemble_code(ch, 8, 0.2, 0.1, 1.0);
  const std::string s1 = code.to_json().dump(2);
  const DICode back = DICode::from_json(nlohmann::json::parse(s1));
  CHECK(back.to_json().dump(2) == s1);
  CHECK(back.size() == code.size());
  CHECK(back.decoder(0).lo == code.decoder(0).lo);
  CHECK(back.meta.exact_size == code.meta.exact_size);
  CHECK(back.meta.pair_l2_floor == code.meta.pair_l2_floor);

  const auto arc = assemble_code(make_arc(0.5), 20, 0.2, 0.1, 0);
  const auto arc2 = DICode::from_json(arc.to_json());
  CHECK(arc2.to_json().dump() == arc.to_json().dump());
  CHECK(arc2.kind == DecoderKind::arc_support);
}
