#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dilab/channel.hpp"
#include "dilab/prob.hpp"

namespace dilab {

// K(d) = (log2 max{d,3})^2, the sub-Gaussian constant of the log-prob window.
double kfun(int alphabet_size);

// Lemma-style typicality floor: W(T) >= 1 - 2 exp(-delta^2 / (36 K(|Y|))).
double lemma1_floor(double delta, int alphabet_size);

// Second-kind ceiling 2 exp(-delta^2/36K) + eps (1 + 2^{2 delta sqrt n} *
// 2^{H_u - H_v}); eps bounds 1 - TV of the two word distributions and is
// certified in practice by the per-letter fidelity product.
double lemma2_bound(double H_u, double H_v, int n, double delta, double eps,
                    int alphabet_size);

// Width hitting a first-kind target of 0.05, clamped into the validity
// window (0, sqrt(n) log2|Y|]; the clamp binds at desk-scale n.
double default_delta(int n, int alphabet_size);

struct AlphabetNet {
  std::vector<std::vector<double>> letters;  // input parameters, net order
  std::vector<Dist> dists;                   // per-letter output laws
  std::vector<double> entropies;             // bits
  double radius = 0.0;  // guaranteed pairwise spherised separation n^-alpha
};

// Greedy packing of the spherised enumerated input set at radius n^-alpha/2,
// so kept letters are pairwise >= n^-alpha apart in spherised Euclidean
// distance. resolution <= 0 picks a per-set default fine enough for the
// separation scale (see implementation).
AlphabetNet build_alphabet_net(const ChannelModel& ch, int n, double alpha,
                               double resolution = 0.0);

enum class OuterMode { automatic, greedy, gv_linear };

struct OuterCode {
  int alphabet = 0;  // requested alphabet k
  int field = 0;     // symbols actually used: k (greedy) or prime p <= k (gv)
  int length = 0;
  int distance = 0;  // required minimum Hamming distance ceil(t n)
  OuterMode mode = OuterMode::greedy;
  bool distance_exact = true;  // full enumeration audit vs sampled audit
  int redraws = 0;
  bool exhausted = false;  // greedy scanned the whole space before the cap
  double log2_floor = 0.0;  // counting bound log2 max(1, 2^-n k^{n(1-t)})
  double log2_true_size = 0.0;  // materialized (greedy) or p^m (gv)
  std::vector<std::vector<std::uint16_t>> words;      // materialized words
  std::vector<std::vector<std::uint16_t>> generator;  // gv: m x n over field
};

// Length-n words over [k] with pairwise Hamming distance >= ceil(t n).
// greedy materializes the lexicographic-scan code (capped); gv_linear draws
// a random linear code over the largest prime p <= k and audits its
// distance, redrawing on failure. automatic picks greedy for n <= 16.
OuterCode build_outer_code(int k, int n, double t, OuterMode mode,
                           std::uint64_t seed = 0, std::size_t cap = 4096);

struct TypicalityDecoder {
  InputWord codeword;
  double delta = 0.0;
  double target_entropy = 0.0;  // H(W_{x^n}) in bits, fixed at build time
  double lo = 0.0;              // -H - delta sqrt(n)
  double hi = 0.0;              // -H + delta sqrt(n)
};

TypicalityDecoder make_typicality_decoder(InputWord w, double delta,
                                          double target_entropy);

// True iff log2 prod_i s_i(y_i) lands in [lo, hi]; a zero-probability
// symbol (log-prob -inf) is never typical. s must be the output law of the
// decoder's own codeword.
bool typicality_test(const TypicalityDecoder& dec, const SeqDist& s,
                     std::span<const int> y);

enum class DecoderKind { typicality, arc_support };

struct ConstructionMeta {
  double alpha = 0.0;
  double t = 0.0;
  double net_radius = 0.0;      // pairwise net separation n^-alpha
  int net_size = 0;             // k
  int outer_field = 0;          // symbols used by the outer code
  int outer_distance = 0;       // certified minimum Hamming distance
  std::string outer_mode;       // greedy | gv_linear | product | arc_grid | single
  bool distance_exact = true;
  int entropy_bin_index = 0;    // 1-based; 0 when binning does not apply
  double entropy_bin_width = 1.0;
  int entropy_bins = 0;         // S = ceil(n log2|Y|)
  double log2_size = 0.0;       // certified code size, log2
  std::uint64_t exact_size = 0;
  bool size_exact = false;
  std::size_t materialized = 0;  // stored codewords (operational codebook)
  double pair_l2_floor = 0.0;   // ceil(t n) * n^-2alpha spherised-sum floor
  bool premise_met = true;      // arc: 1/k <= min(theta, 1-theta)
};

struct DICode {
  ChannelModel channel;
  int n = 0;
  DecoderKind kind = DecoderKind::typicality;
  double delta = 0.0;
  std::vector<InputWord> codewords;
  std::vector<double> entropies;  // per codeword, bits; empty for arc
  ConstructionMeta meta;

  std::size_t size() const { return codewords.size(); }
  TypicalityDecoder decoder(std::size_t j) const;

  nlohmann::json to_json() const;
  static DICode from_json(const nlohmann::json& j);
};

struct AssembleOptions {
  OuterMode mode = OuterMode::automatic;
  double resolution = 0.0;       // net enumeration override
  std::uint64_t seed = 0;        // gv draws and sampling
  std::size_t materialize_cap = 4096;
};

// Net -> outer code -> entropy binning -> decoders. delta = 0 picks the
// default width. dmc channels use the full product code over net rows
// (distance 1 regime); arc channels use the k = max(2, floor(n t^2)) grid
// with the exact support decoder.
DICode assemble_code(const ChannelModel& ch, int n, double alpha, double t,
                     double delta, const AssembleOptions& opt = {});

// Fresh per-letter recomputation for a codeword pair: spherised
// sum-of-squares and the log fidelity product (natural log), certifying
// eps = exp(ln_fid) >= 1 - TV via -ln(prod F) >= 1/4 sum |sqrtW - sqrtW'|^2.
struct PairCertificate {
  double sum_sq = 0.0;
  double ln_fid = 0.0;
};

PairCertificate pair_certificate(const ChannelModel& ch, const InputWord& u,
                                 const InputWord& v);

}  // namespace dilab
