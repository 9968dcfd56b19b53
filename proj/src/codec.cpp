#include "dilab/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <stdexcept>

#include "dilab/rng.hpp"
#include "dilab/util.hpp"

namespace dilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log2_binom(int n, int i) {
  return (std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
          std::lgamma(n - i + 1.0)) /
         std::log(2.0);
}

int hamming_floor(int n, double t) {
  int d = static_cast<int>(std::ceil(t * n - 1e-9));
  return std::max(d, 1);
}

int entropy_bins(int n, int alphabet_size) {
  return static_cast<int>(std::ceil(n * std::log2(double(alphabet_size)) - 1e-9));
}

int bin_of(double H, int S) {
  int s = static_cast<int>(std::ceil(H));
  return std::clamp(s, 1, S);
}

bool is_prime(int v) {
  if (v < 2) return false;
  for (int q = 2; q * q <= v; ++q)
    if (v % q == 0) return false;
  return true;
}

int largest_prime_leq(int k) {
  for (int v = k; v >= 2; --v)
    if (is_prime(v)) return v;
  return 0;
}

// log_p of the Hamming ball volume sum_{i<=r} C(n,i)(p-1)^i, via
// log-sum-exp; exact integer arithmetic would overflow at sweep sizes.
double logp_ball(int n, int r, int p) {
  double lp1 = p > 1 ? std::log2(double(p - 1)) : 0.0;
  double mx = -kInf;
  std::vector<double> terms(r + 1);
  for (int i = 0; i <= r; ++i) {
    terms[i] = log2_binom(n, i) + i * lp1;
    mx = std::max(mx, terms[i]);
  }
  double acc = 0.0;
  for (int i = 0; i <= r; ++i) acc += std::exp2(terms[i] - mx);
  return (mx + std::log2(acc)) / std::log2(double(p));
}

int rank_mod_p(std::vector<std::vector<std::uint16_t>> g, int p) {
  if (g.empty()) return 0;
  std::size_t rows = g.size(), cols = g[0].size();
  auto inv = [p](long long a) {
    long long r = 1, b = a % p, e = p - 2;
    while (e) {
      if (e & 1) r = r * b % p;
      b = b * b % p;
      e >>= 1;
    }
    return r;
  };
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && g[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(g[rank], g[piv]);
    long long s = inv(g[rank][c]);
    for (std::size_t j = c; j < cols; ++j)
      g[rank][j] = static_cast<std::uint16_t>(g[rank][j] * s % p);
    for (std::size_t r2 = 0; r2 < rows; ++r2) {
      if (r2 == rank || g[r2][c] == 0) continue;
      long long f = g[r2][c];
      for (std::size_t j = c; j < cols; ++j) {
        long long v = g[r2][j] - f * g[rank][j] % p;
        g[r2][j] = static_cast<std::uint16_t>((v % p + p) % p);
      }
    }
    ++rank;
  }
  return static_cast<int>(rank);
}

void encode_gv(const std::vector<std::vector<std::uint16_t>>& gen,
               std::span<const std::uint16_t> msg, int p,
               std::vector<std::uint16_t>& out) {
  std::size_t n = gen[0].size();
  out.assign(n, 0);
  for (std::size_t j = 0; j < gen.size(); ++j) {
    if (msg[j] == 0) continue;
    long long f = msg[j];
    for (std::size_t i = 0; i < n; ++i)
      out[i] = static_cast<std::uint16_t>((out[i] + f * gen[j][i]) % p);
  }
}

int word_weight(std::span<const std::uint16_t> w) {
  int c = 0;
  for (auto v : w) c += v != 0;
  return c;
}

bool far_from_all(const std::vector<std::vector<std::uint16_t>>& kept,
                  const std::vector<std::uint16_t>& cand, int d) {
  for (const auto& w : kept) {
    int diff = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (w[i] != cand[i] && ++diff >= d) break;
    }
    if (diff < d) return false;
  }
  return true;
}

bool next_word(std::vector<std::uint16_t>& w, int k) {
  for (std::size_t i = w.size(); i-- > 0;) {
    if (++w[i] < k) return true;
    w[i] = 0;
  }
  return false;
}

OuterCode build_greedy(int k, int n, int d, double t, std::size_t cap) {
  OuterCode oc;
  oc.alphabet = k;
  oc.field = k;
  oc.length = n;
  oc.distance = d;
  oc.mode = OuterMode::greedy;
  oc.log2_floor = std::max(0.0, n * (1.0 - t) * std::log2(double(k)) - n);
  double floor_sz = std::floor(std::exp2(oc.log2_floor));
  require(floor_sz <= double(cap),
          "materialization cap is below the counting floor; use gv_linear");
  std::vector<std::uint16_t> cand(n, 0);
  std::uint64_t scanned = 0;
  while (true) {
    require(++scanned <= (1ull << 28),
            "lexicographic scan budget exceeded; use gv_linear");
    if (far_from_all(oc.words, cand, d)) {
      oc.words.push_back(cand);
      if (oc.words.size() >= cap) break;
    }
    if (!next_word(cand, k)) {
      oc.exhausted = true;
      break;
    }
  }
  if (oc.exhausted)
    require(double(oc.words.size()) >= floor_sz,
            "greedy stopped below the counting floor");
  oc.log2_true_size = std::log2(double(oc.words.size()));
  oc.distance_exact = true;
  return oc;
}

OuterCode build_gv(int k, int n, int d, double t, std::uint64_t seed,
                   std::size_t cap) {
  OuterCode oc;
  oc.alphabet = k;
  oc.length = n;
  oc.distance = d;
  oc.mode = OuterMode::gv_linear;
  oc.log2_floor = std::max(0.0, n * (1.0 - t) * std::log2(double(k)) - n);
  int p = largest_prime_leq(k);
  require(p >= 2, "no usable prime field for this alphabet");
  oc.field = p;
  int m = n;
  if (d > 1)
    m = n - static_cast<int>(std::ceil(logp_ball(n, d - 1, p) - 1e-9));
  require(m >= 1, "no certified linear code at these parameters");
  double lp = std::log2(double(p));
  bool full_audit = m * lp <= 16.0 + 1e-9;

  std::vector<std::vector<std::uint16_t>> gen(
      m, std::vector<std::uint16_t>(n, 0));
  std::vector<std::uint16_t> msg(m, 0), cw;
  bool good = false;
  for (int draw = 0; draw < 100 && !good; ++draw) {
    oc.redraws = draw;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i)
        gen[j][i] = static_cast<std::uint16_t>(rng::below(
            rng::derive(seed, 0x6C, std::uint64_t(draw), std::uint64_t(j) * n + i),
            std::uint64_t(p)));
    if (rank_mod_p(gen, p) != m) continue;
    good = true;
    if (full_audit) {
      std::fill(msg.begin(), msg.end(), 0);
      while (next_word(msg, p)) {
        encode_gv(gen, msg, p, cw);
        if (word_weight(cw) < d) {
          good = false;
          break;
        }
      }
      oc.distance_exact = true;
    } else {
      for (std::uint64_t s = 0; s < 100000; ++s) {
        bool nonzero = false;
        for (int j = 0; j < m; ++j) {
          msg[j] = static_cast<std::uint16_t>(rng::below(
              rng::derive(seed, 0xA0, std::uint64_t(draw), s * m + j),
              std::uint64_t(p)));
          nonzero |= msg[j] != 0;
        }
        if (!nonzero) msg[0] = 1;
        encode_gv(gen, msg, p, cw);
        if (word_weight(cw) < d) {
          good = false;
          break;
        }
      }
      oc.distance_exact = false;
    }
  }
  if (!good)
    throw std::runtime_error("distance audit failed after 100 generator draws");
  oc.generator = gen;
  oc.log2_true_size = m * lp;

  std::set<std::vector<std::uint16_t>> mat;
  if (m * lp <= std::log2(double(cap)) + 1e-9) {
    std::fill(msg.begin(), msg.end(), 0);
    encode_gv(gen, msg, p, cw);
    mat.insert(cw);
    while (next_word(msg, p)) {
      encode_gv(gen, msg, p, cw);
      mat.insert(cw);
    }
  } else {
    for (std::uint64_t a = 0; mat.size() < cap && a < 20 * std::uint64_t(cap);
         ++a) {
      for (int j = 0; j < m; ++j)
        msg[j] = static_cast<std::uint16_t>(rng::below(
            rng::derive(seed, 0x3A, a, std::uint64_t(j)), std::uint64_t(p)));
      encode_gv(gen, msg, p, cw);
      mat.insert(cw);
    }
  }
  oc.words.assign(mat.begin(), mat.end());
  return oc;
}

struct BinChoice {
  int index = 0;       // 1-based modal bin
  double log2_count = 0.0;
  std::uint64_t exact_count = 0;
  bool exact = false;
};

// Modal entropy bin of the full product code over two letter types, from
// the exact weight profile: weight w lands in bin(w h1 + (n-w) h0).
BinChoice modal_bin_two_letters(int n, double h0, double h1, int S) {
  std::vector<double> log2c(S + 1, -kInf);
  std::vector<unsigned __int128> cnt(S + 1, 0);
  std::vector<bool> ovf(S + 1, false);
  constexpr unsigned __int128 kMax128 = ~static_cast<unsigned __int128>(0);
  unsigned __int128 binom = 1;
  bool sat = false;
  for (int w = 0; w <= n; ++w) {
    if (w > 0 && !sat) {
      if (binom > kMax128 / static_cast<unsigned>(n - w + 1))
        sat = true;
      else
        binom = binom * static_cast<unsigned>(n - w + 1) / static_cast<unsigned>(w);
    }
    int b = bin_of(w * h1 + (n - w) * h0, S);
    double lw = log2_binom(n, w);
    double hi = std::max(log2c[b], lw);
    log2c[b] = hi + std::log2(std::exp2(log2c[b] - hi) + std::exp2(lw - hi));
    if (sat || cnt[b] > kMax128 - binom)
      ovf[b] = true;
    else
      cnt[b] += binom;
  }
  BinChoice bc;
  for (int b = 1; b <= S; ++b) {
    if (log2c[b] == -kInf) continue;
    if (bc.index == 0 || log2c[b] > bc.log2_count) {
      bc.index = b;
      bc.log2_count = log2c[b];
    }
  }
  int b = bc.index;
  if (b != 0 && !ovf[b] &&
      cnt[b] <= static_cast<unsigned __int128>(
                    std::numeric_limits<std::uint64_t>::max())) {
    bc.exact = true;
    bc.exact_count = static_cast<std::uint64_t>(cnt[b]);
    bc.log2_count = std::log2(double(bc.exact_count));
  }
  return bc;
}

// Weight-w binary index words in ascending lexicographic word order.
void emit_weight_words(int n, int w, std::size_t cap,
                       std::vector<std::vector<std::uint16_t>>& out) {
  std::vector<int> pos(w);
  for (int i = 0; i < w; ++i) pos[i] = i;
  while (out.size() < cap) {
    std::vector<std::uint16_t> word(n, 0);
    for (int i : pos) word[i] = 1;
    out.push_back(std::move(word));
    int i = w - 1;
    while (i >= 0 && pos[i] == n - w + i) --i;
    if (i < 0) break;
    ++pos[i];
    for (int j = i + 1; j < w; ++j) pos[j] = pos[j - 1] + 1;
  }
}

double auto_resolution(const InputSet& s, double sep) {
  switch (s.kind) {
    case SetKind::fractal_F:
    case SetKind::fractal_G:
      return 4.0;
    case SetKind::log_sequence:
    case SetKind::poly_sequence:
    case SetKind::exp_sequence:
      return (sep / 4.0) * (sep / 4.0);
    case SetKind::product: {
      double a = auto_resolution(*s.left, sep);
      double b = auto_resolution(*s.right, sep);
      if (a >= 1.0 || b >= 1.0) return std::max(a, b);
      return std::min(a, b);
    }
    case SetKind::interval:
      return sep / 16.0;
    case SetKind::finite_list:
      return 1.0;
  }
  return sep / 16.0;
}

double sph_dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

InputWord make_word(const AlphabetNet& net,
                    const std::vector<std::uint16_t>& digits, int dim) {
  InputWord w;
  w.dim = dim;
  w.coords.reserve(digits.size() * dim);
  for (auto d : digits)
    w.coords.insert(w.coords.end(), net.letters[d].begin(),
                    net.letters[d].end());
  return w;
}

double word_entropy(const AlphabetNet& net,
                    const std::vector<std::uint16_t>& digits) {
  double h = 0.0;
  for (auto d : digits) h += net.entropies[d];
  return h;
}

void check_pair_floor(const AlphabetNet& net,
                      const std::vector<std::vector<std::uint16_t>>& words,
                      double floor_sq, std::uint64_t seed) {
  std::size_t nw = words.size();
  if (nw < 2 || floor_sq <= 0.0) return;
  std::size_t k = net.letters.size();
  std::vector<double> sq(k * k, 0.0);
  std::vector<std::vector<double>> sph(k);
  for (std::size_t i = 0; i < k; ++i) sph[i] = spherise(net.dists[i]).coords;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) sq[i * k + j] = sph_dist2(sph[i], sph[j]);
  auto pair_sum = [&](std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < words[a].size(); ++i)
      acc += sq[words[a][i] * k + words[b][i]];
    return acc;
  };
  double lim = (1.0 - 1e-9) * floor_sq;
  if (nw <= 1024) {
    for (std::size_t a = 0; a < nw; ++a)
      for (std::size_t b = a + 1; b < nw; ++b)
        require(pair_sum(a, b) >= lim,
                "codeword pair below the packing certificate");
  } else {
    for (std::uint64_t s = 0; s < 2000; ++s) {
      auto a = rng::below(rng::derive(seed, 0xCE, s, 0), nw);
      auto b = rng::below(rng::derive(seed, 0xCE, s, 1), nw - 1);
      if (b >= a) ++b;
      require(pair_sum(a, b) >= lim,
              "codeword pair below the packing certificate");
    }
  }
}

struct CertifiedSize {
  double log2_size = 0.0;
  std::uint64_t exact = 1;
  bool is_exact = true;
};

// Counting bound floor(2^-n k^{n(1-t)}) pushed through the S-way pigeonhole.
CertifiedSize certified_size(int k, int n, double t, int S) {
  CertifiedSize cs;
  double f_log2 = n * (1.0 - t) * std::log2(double(k)) - n;
  if (f_log2 <= 0.0) return cs;
  if (f_log2 < 63.0) {
    std::uint64_t f = static_cast<std::uint64_t>(std::floor(std::exp2(f_log2)));
    cs.exact = std::max<std::uint64_t>(1, f / std::uint64_t(S));
    cs.log2_size = std::log2(double(cs.exact));
    return cs;
  }
  cs.log2_size = f_log2 - std::log2(double(S));
  cs.is_exact = false;
  cs.exact = 0;
  return cs;
}

}  // namespace

double kfun(int alphabet_size) {
  double l = std::log2(double(std::max(alphabet_size, 3)));
  return l * l;
}

double lemma1_floor(double delta, int alphabet_size) {
  return 1.0 - 2.0 * std::exp(-delta * delta / (36.0 * kfun(alphabet_size)));
}

double lemma2_bound(double H_u, double H_v, int n, double delta, double eps,
                    int alphabet_size) {
  double tail = 2.0 * std::exp(-delta * delta / (36.0 * kfun(alphabet_size)));
  double shift = std::exp2(2.0 * delta * std::sqrt(double(n)) + (H_u - H_v));
  return tail + eps * (1.0 + shift);
}

double default_delta(int n, int alphabet_size) {
  double target = 2.0 * std::sqrt(36.0 * kfun(alphabet_size) * std::log(40.0));
  double window = std::sqrt(double(n)) * std::log2(double(alphabet_size));
  return std::min(target, window);
}

AlphabetNet build_alphabet_net(const ChannelModel& ch, int n, double alpha,
                               double resolution) {
  ch.validate();
  require(ch.discrete(), "alphabet nets need a finite output alphabet");
  require(n >= 1, "n must be positive");
  require(alpha > 0.0 && alpha < 0.5, "alpha must lie in (0, 1/2)");
  double sep = std::pow(double(n), -alpha);
  double res = resolution > 0.0 ? resolution : auto_resolution(ch.input, sep);
  auto pts = ch.input.enumerate(res);
  require(!pts.empty(), "input set enumerated to nothing");

  AlphabetNet net;
  net.radius = sep;
  double sep2 = sep * sep;
  std::vector<std::vector<double>> kept_sph;
  // Scan in enumeration order (ascending input), keep letters at spherised
  // distance >= sep from everything kept so far.
  for (const auto& x : pts) {
    Dist d = ch.output_dist(std::span<const double>(x));
    auto sph = spherise(d).coords;
    bool ok = true;
    for (const auto& s : kept_sph) {
      if (sph_dist2(sph, s) < sep2) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    net.entropies.push_back(entropy(d));
    net.dists.push_back(std::move(d));
    net.letters.push_back(x);
    kept_sph.push_back(std::move(sph));
  }
  return net;
}

OuterCode build_outer_code(int k, int n, double t, OuterMode mode,
                           std::uint64_t seed, std::size_t cap) {
  require(k >= 2, "outer codes need at least two symbols");
  require(n >= 1, "n must be positive");
  require(t > 0.0 && t < 1.0 - 1.0 / k,
          "t must lie in (0, 1 - 1/k) for the counting bound");
  require(cap >= 1, "cap must be positive");
  int d = hamming_floor(n, t);
  if (mode == OuterMode::automatic) {
    double floor_log2 = std::max(0.0, n * (1.0 - t) * std::log2(double(k)) - n);
    mode = (n <= 16 && floor_log2 <= std::log2(double(cap)))
               ? OuterMode::greedy
               : OuterMode::gv_linear;
  }
  if (mode == OuterMode::greedy) return build_greedy(k, n, d, t, cap);
  return build_gv(k, n, d, t, seed, cap);
}

TypicalityDecoder make_typicality_decoder(InputWord w, double delta,
                                          double target_entropy) {
  TypicalityDecoder dec;
  double root = std::sqrt(double(w.length()));
  dec.codeword = std::move(w);
  dec.delta = delta;
  dec.target_entropy = target_entropy;
  dec.lo = -target_entropy - delta * root;
  dec.hi = -target_entropy + delta * root;
  return dec;
}

bool typicality_test(const TypicalityDecoder& dec, const SeqDist& s,
                     std::span<const int> y) {
  double lp = seq_log_prob(s, y);
  return lp >= dec.lo && lp <= dec.hi;
}

TypicalityDecoder DICode::decoder(std::size_t j) const {
  require(j < codewords.size(), "codeword index out of range");
  require(kind == DecoderKind::typicality,
          "arc codes use the support decoder");
  return make_typicality_decoder(codewords[j], delta, entropies[j]);
}

DICode assemble_code(const ChannelModel& ch, int n, double alpha, double t,
                     double delta, const AssembleOptions& opt) {
  ch.validate();
  require(n >= 1, "n must be positive");
  require(t > 0.0 && t < 1.0, "t must lie in (0, 1)");

  DICode code;
  code.channel = ch;
  code.n = n;
  code.meta.alpha = alpha;
  code.meta.t = t;
  int dim = ch.letter_dim();

  if (ch.family == Family::arc) {
    int k = std::max(2, static_cast<int>(std::floor(n * t * t + 1e-12)));
    code.kind = DecoderKind::arc_support;
    code.meta.premise_met = 1.0 / k <= std::min(ch.theta, 1.0 - ch.theta) + 1e-15;
    OuterCode oc = build_outer_code(k, n, t, opt.mode, opt.seed,
                                    opt.materialize_cap);
    AlphabetNet grid;
    for (int j = 0; j < k; ++j) grid.letters.push_back({double(j) / k});
    for (const auto& w : oc.words)
      code.codewords.push_back(make_word(grid, w, dim));
    code.meta.net_size = k;
    code.meta.outer_field = oc.field;
    code.meta.outer_distance = oc.distance;
    code.meta.outer_mode =
        oc.mode == OuterMode::greedy ? "greedy" : "gv_linear";
    code.meta.distance_exact = oc.distance_exact;
    code.meta.log2_size = oc.log2_true_size;
    code.meta.size_exact =
        oc.mode == OuterMode::greedy ? oc.exhausted : oc.log2_true_size < 63.0;
    if (code.meta.size_exact)
      code.meta.exact_size = static_cast<std::uint64_t>(
          std::llround(std::exp2(oc.log2_true_size)));
    code.meta.materialized = code.codewords.size();
    return code;
  }

  require(alpha > 0.0 && alpha < 0.5, "alpha must lie in (0, 1/2)");
  int ysize = ch.alphabet_size();
  double root_n = std::sqrt(double(n));
  double window = root_n * std::log2(double(ysize));
  if (delta <= 0.0) delta = default_delta(n, ysize);
  require(delta > 0.0 && delta <= window + 1e-12,
          "delta must lie in (0, sqrt(n) log2|Y|]");
  code.kind = DecoderKind::typicality;
  code.delta = delta;

  AlphabetNet net = build_alphabet_net(ch, n, alpha, opt.resolution);
  int k = static_cast<int>(net.letters.size());
  int S = entropy_bins(n, ysize);
  code.meta.net_radius = net.radius;
  code.meta.net_size = k;
  code.meta.entropy_bins = S;

  if (k == 1) {
    std::vector<std::uint16_t> digits(n, 0);
    code.codewords.push_back(make_word(net, digits, dim));
    code.entropies.push_back(word_entropy(net, digits));
    code.meta.outer_mode = "single";
    code.meta.outer_field = 1;
    code.meta.entropy_bin_index = bin_of(code.entropies[0], S);
    code.meta.log2_size = 0.0;
    code.meta.exact_size = 1;
    code.meta.size_exact = true;
    code.meta.materialized = 1;
    return code;
  }

  std::vector<std::vector<std::uint16_t>> kept;
  if (ch.family == Family::dmc) {
    // Distance-1 regime: the outer code is the full product code over net
    // rows, so only the entropy binning selects codewords.
    code.meta.outer_distance = 1;
    code.meta.outer_mode = "product";
    code.meta.outer_field = k;
    code.meta.pair_l2_floor = std::pow(double(n), -2.0 * alpha);
    double hmin = *std::min_element(net.entropies.begin(), net.entropies.end());
    double hmax = *std::max_element(net.entropies.begin(), net.entropies.end());
    if (hmax - hmin <= 1e-15) {
      code.meta.entropy_bin_index = bin_of(n * net.entropies[0], S);
      double l2 = n * std::log2(double(k));
      code.meta.log2_size = l2;
      code.meta.size_exact = l2 < 63.0;
      if (code.meta.size_exact)
        code.meta.exact_size =
            static_cast<std::uint64_t>(std::llround(std::exp2(l2)));
      std::vector<std::uint16_t> w(n, 0);
      kept.push_back(w);
      while (kept.size() < opt.materialize_cap && next_word(w, k))
        kept.push_back(w);
    } else if (k == 2) {
      BinChoice bc = modal_bin_two_letters(n, net.entropies[0],
                                           net.entropies[1], S);
      code.meta.entropy_bin_index = bc.index;
      code.meta.log2_size = bc.log2_count;
      code.meta.size_exact = bc.exact;
      code.meta.exact_size = bc.exact_count;
      for (int w = 0; w <= n && kept.size() < opt.materialize_cap; ++w) {
        if (bin_of(w * net.entropies[1] + (n - w) * net.entropies[0], S) !=
            bc.index)
          continue;
        emit_weight_words(n, w, opt.materialize_cap, kept);
      }
    } else {
      // Vote the modal bin from a seeded sample; the certified size is the
      // pigeonhole floor k^n / S.
      std::vector<std::uint64_t> votes(S + 1, 0);
      std::set<std::vector<std::uint16_t>> sample;
      std::vector<std::uint16_t> w(n);
      for (std::uint64_t a = 0; a < 4096; ++a) {
        for (int i = 0; i < n; ++i)
          w[i] = static_cast<std::uint16_t>(rng::below(
              rng::derive(opt.seed, 0xD3, a, std::uint64_t(i)),
              std::uint64_t(k)));
        votes[bin_of(word_entropy(net, w), S)] += 1;
        sample.insert(w);
      }
      int best = 1;
      for (int b = 2; b <= S; ++b)
        if (votes[b] > votes[best]) best = b;
      code.meta.entropy_bin_index = best;
      double l2 = n * std::log2(double(k)) - std::log2(double(S));
      code.meta.log2_size = std::max(0.0, l2);
      code.meta.size_exact = false;
      for (const auto& sw : sample) {
        if (bin_of(word_entropy(net, sw), S) == best &&
            kept.size() < opt.materialize_cap)
          kept.push_back(sw);
      }
    }
  } else {
    OuterCode oc = build_outer_code(k, n, t, opt.mode, opt.seed,
                                    opt.materialize_cap);
    code.meta.outer_field = oc.field;
    code.meta.outer_distance = oc.distance;
    code.meta.outer_mode =
        oc.mode == OuterMode::greedy ? "greedy" : "gv_linear";
    code.meta.distance_exact = oc.distance_exact;
    code.meta.pair_l2_floor =
        oc.distance * std::pow(double(n), -2.0 * alpha);
    std::vector<int> bins(oc.words.size());
    std::vector<std::uint64_t> counts(S + 1, 0);
    for (std::size_t i = 0; i < oc.words.size(); ++i) {
      bins[i] = bin_of(word_entropy(net, oc.words[i]), S);
      counts[bins[i]] += 1;
    }
    int best = 1;
    for (int b = 2; b <= S; ++b)
      if (counts[b] > counts[best]) best = b;
    code.meta.entropy_bin_index = best;
    for (std::size_t i = 0; i < oc.words.size(); ++i)
      if (bins[i] == best) kept.push_back(oc.words[i]);
    CertifiedSize cs = certified_size(k, n, t, S);
    code.meta.log2_size = cs.log2_size;
    code.meta.exact_size = cs.exact;
    code.meta.size_exact = cs.is_exact;
  }

  require(!kept.empty(), "modal entropy bin is empty");
  check_pair_floor(net, kept, code.meta.pair_l2_floor, opt.seed);
  for (const auto& w : kept) {
    code.codewords.push_back(make_word(net, w, dim));
    code.entropies.push_back(word_entropy(net, w));
  }
  code.meta.materialized = code.codewords.size();
  return code;
}

PairCertificate pair_certificate(const ChannelModel& ch, const InputWord& u,
                                 const InputWord& v) {
  require(u.length() == v.length() && u.dim == v.dim,
          "codeword shapes differ");
  PairCertificate pc;
  for (std::size_t i = 0; i < u.length(); ++i) {
    Dist a = ch.output_dist(u.letter(i));
    Dist b = ch.output_dist(v.letter(i));
    auto sa = spherise(a).coords;
    auto sb = spherise(b).coords;
    pc.sum_sq += sph_dist2(sa, sb);
    pc.ln_fid += std::log(fidelity(a, b));
  }
  return pc;
}

nlohmann::json DICode::to_json() const {
  nlohmann::json j;
  j["channel"] = channel.to_json();
  j["n"] = n;
  j["decoder"] = kind == DecoderKind::typicality ? "typicality" : "arc_support";
  j["delta"] = delta;
  j["letter_dim"] = codewords.empty() ? channel.letter_dim() : codewords[0].dim;
  nlohmann::json words = nlohmann::json::array();
  for (const auto& w : codewords) words.push_back(w.coords);
  j["codewords"] = std::move(words);
  j["entropies"] = entropies;
  j["meta"] = {{"alpha", meta.alpha},
               {"t", meta.t},
               {"net_radius", meta.net_radius},
               {"net_size", meta.net_size},
               {"outer_field", meta.outer_field},
               {"outer_distance", meta.outer_distance},
               {"outer_mode", meta.outer_mode},
               {"distance_exact", meta.distance_exact},
               {"entropy_bin_index", meta.entropy_bin_index},
               {"entropy_bin_width", meta.entropy_bin_width},
               {"entropy_bins", meta.entropy_bins},
               {"log2_size", meta.log2_size},
               {"exact_size", meta.exact_size},
               {"size_exact", meta.size_exact},
               {"materialized", meta.materialized},
               {"pair_l2_floor", meta.pair_l2_floor},
               {"premise_met", meta.premise_met}};
  return j;
}

DICode DICode::from_json(const nlohmann::json& j) {
  DICode code;
  code.channel = ChannelModel::from_json(j.at("channel"));
  code.n = j.at("n").get<int>();
  code.kind = j.at("decoder").get<std::string>() == "arc_support"
                  ? DecoderKind::arc_support
                  : DecoderKind::typicality;
  code.delta = j.at("delta").get<double>();
  int dim = j.at("letter_dim").get<int>();
  for (const auto& w : j.at("codewords")) {
    InputWord iw;
    iw.dim = dim;
    iw.coords = w.get<std::vector<double>>();
    code.codewords.push_back(std::move(iw));
  }
  code.entropies = j.at("entropies").get<std::vector<double>>();
  const auto& m = j.at("meta");
  code.meta.alpha = m.at("alpha").get<double>();
  code.meta.t = m.at("t").get<double>();
  code.meta.net_radius = m.at("net_radius").get<double>();
  code.meta.net_size = m.at("net_size").get<int>();
  code.meta.outer_field = m.at("outer_field").get<int>();
  code.meta.outer_distance = m.at("outer_distance").get<int>();
  code.meta.outer_mode = m.at("outer_mode").get<std::string>();
  code.meta.distance_exact = m.at("distance_exact").get<bool>();
  code.meta.entropy_bin_index = m.at("entropy_bin_index").get<int>();
  code.meta.entropy_bin_width = m.at("entropy_bin_width").get<double>();
  code.meta.entropy_bins = m.at("entropy_bins").get<int>();
  code.meta.log2_size = m.at("log2_size").get<double>();
  code.meta.exact_size = m.at("exact_size").get<std::uint64_t>();
  code.meta.size_exact = m.at("size_exact").get<bool>();
  code.meta.materialized = m.at("materialized").get<std::size_t>();
  code.meta.pair_l2_floor = m.at("pair_l2_floor").get<double>();
  code.meta.premise_met = m.at("premise_met").get<bool>();
  return code;
}

}  // namespace dilab
