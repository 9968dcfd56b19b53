#include "dilab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dilab/geometry.hpp"
#include "dilab/kernels.hpp"
#include "dilab/rng.hpp"
#include "dilab/stats.hpp"
#include "dilab/util.hpp"

namespace dilab {

namespace {

struct WordTables {
  std::vector<double> cdf;    // row-major n x |Y|, running sums per row
  std::vector<double> log2p;  // -inf for zero-probability symbols
};

WordTables make_tables(const DICode& code, std::size_t j) {
  SeqDist s = code.channel.word_output(code.codewords[j]);
  std::size_t n = s.size(), ysize = s[0].size();
  WordTables t;
  t.cdf.resize(n * ysize);
  t.log2p.resize(n * ysize);
  for (std::size_t i = 0; i < n; ++i) {
    double run = 0.0;
    for (std::size_t y = 0; y < ysize; ++y) {
      double p = s[i][static_cast<int>(y)];
      run += p;
      t.cdf[i * ysize + y] = run;
      t.log2p[i * ysize + y] = std::log2(p);
    }
  }
  return t;
}

// Floyd's algorithm: `want` distinct values from [0, total), seed-derived,
// independent of prior draws.
std::vector<std::uint64_t> sample_distinct(std::uint64_t total,
                                           std::uint64_t want,
                                           std::uint64_t key) {
  std::vector<std::uint64_t> out;
  if (want >= total) {
    out.resize(total);
    for (std::uint64_t i = 0; i < total; ++i) out[i] = i;
    return out;
  }
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t i = total - want; i < total; ++i) {
    std::uint64_t r =
        rng::below(rng::derive(key, i), static_cast<std::uint32_t>(i + 1));
    if (seen.insert(r).second) {
      out.push_back(r);
    } else {
      seen.insert(i);
      out.push_back(i);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t run_mc(const WordTables& src, const WordTables& dec_tab,
                     double lo, double hi, std::size_t n, std::size_t ysize,
                     std::uint64_t trials, std::uint64_t key) {
  kernels::McJob job;
  job.cdf = src.cdf.data();
  job.log2p = dec_tab.log2p.data();
  job.n = n;
  job.ysize = ysize;
  job.lo = lo;
  job.hi = hi;
  job.key = key;
  job.first = 0;
  job.count = trials;
  return kernels::active().mc_accept(job);
}

struct PairIndex {
  std::size_t j, k;
};

PairIndex decode_pair(std::uint64_t p, std::size_t nw) {
  std::size_t j = static_cast<std::size_t>(p / (nw - 1));
  std::size_t r = static_cast<std::size_t>(p % (nw - 1));
  return {j, r + (r >= j ? 1 : 0)};
}

void kahan_add(double& sum, double& comp, double v) {
  double y = v - comp;
  double t = sum + y;
  comp = (t - sum) - y;
  sum = t;
}

}  // namespace

nlohmann::json ErrorEstimate::to_json() const {
  nlohmann::json j;
  j["lambda1_hat"] = lambda1_hat;
  j["lambda2_hat"] = lambda2_defined ? nlohmann::json(lambda2_hat)
                                     : nlohmann::json();
  j["lambda1_mean"] = lambda1_mean;
  j["lambda2_mean"] = lambda2_defined ? nlohmann::json(lambda2_mean)
                                      : nlohmann::json();
  j["ci95_halfwidth1"] = ci95_halfwidth1;
  j["ci95_halfwidth2"] = ci95_halfwidth2;
  j["trials1"] = trials1;
  j["trials2"] = trials2;
  j["lambda2_defined"] = lambda2_defined;
  j["exact"] = exact;
  if (pairs_exhaustive)
    j["pair_sampling"] = {{"mode", "exhaustive"}};
  else
    j["pair_sampling"] = {{"mode", "sampled"}, {"count", pairs_evaluated}};
  j["pairs_evaluated"] = pairs_evaluated;
  j["words_evaluated"] = words_evaluated;
  j["seed"] = seed;
  return j;
}

ErrorEstimate estimate_errors(const DICode& code, std::uint64_t trials,
                              std::uint64_t seed, std::uint64_t pair_budget) {
  require(trials >= 100, "trials must be at least 100");
  require(code.size() >= 1, "code is empty");
  require(pair_budget >= 1, "pair budget must be positive");
  std::size_t nw = code.size();

  ErrorEstimate est;
  est.seed = seed;
  est.lambda2_defined = nw >= 2;

  std::vector<std::uint64_t> pair_ids;
  if (nw >= 2) {
    std::uint64_t total_pairs = std::uint64_t(nw) * (nw - 1);
    est.pairs_exhaustive = total_pairs <= pair_budget;
    pair_ids = sample_distinct(total_pairs,
                               std::min(total_pairs, pair_budget),
                               rng::derive(seed, 0xFD));
  }

  if (code.kind == DecoderKind::arc_support) {
    // Support decoders never miss; pairwise false-accept probability is the
    // closed-form arc overlap.
    est.exact = true;
    double worst = 0.0, mean = 0.0;
    for (auto p : pair_ids) {
      auto [j, k] = decode_pair(p, nw);
      double ov = arc_overlap(code.channel.theta, code.codewords[j],
                              code.codewords[k]);
      worst = std::max(worst, ov);
      mean += ov;
    }
    est.lambda2_hat = worst;
    est.lambda2_mean = pair_ids.empty() ? 0.0 : mean / pair_ids.size();
    est.pairs_evaluated = pair_ids.size();
    est.words_evaluated = nw;
    return est;
  }

  std::vector<std::uint64_t> word_ids =
      sample_distinct(nw, std::min<std::uint64_t>(nw, 64),
                      rng::derive(seed, 0x1D));

  // Table cache for every touched codeword.
  std::vector<char> touched(nw, 0);
  for (auto j : word_ids) touched[j] = 1;
  for (auto p : pair_ids) {
    auto [j, k] = decode_pair(p, nw);
    touched[j] = touched[k] = 1;
  }
  std::vector<WordTables> tabs(nw);
  std::vector<std::size_t> to_build;
  for (std::size_t j = 0; j < nw; ++j)
    if (touched[j]) to_build.push_back(j);
  parallel_for(to_build.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      tabs[to_build[i]] = make_tables(code, to_build[i]);
  });
  std::size_t n = code.codewords[0].length();
  std::size_t ysize = tabs[to_build[0]].cdf.size() / n;

  std::vector<TypicalityDecoder> decs(nw);
  for (std::size_t j = 0; j < nw; ++j)
    if (touched[j]) decs[j] = code.decoder(j);

  std::vector<std::uint64_t> acc1(word_ids.size());
  parallel_for(word_ids.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t j = word_ids[i];
      acc1[i] = run_mc(tabs[j], tabs[j], decs[j].lo, decs[j].hi, n, ysize,
                       trials, rng::derive(seed, 1, j, j));
    }
  });
  std::vector<std::uint64_t> acc2(pair_ids.size());
  parallel_for(pair_ids.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      auto [j, k] = decode_pair(pair_ids[i], nw);
      acc2[i] = run_mc(tabs[j], tabs[k], decs[k].lo, decs[k].hi, n, ysize,
                       trials, rng::derive(seed, 2, j, k));
    }
  });

  est.trials1 = trials;
  est.words_evaluated = word_ids.size();
  std::size_t arg1 = 0;
  double mean1 = 0.0;
  for (std::size_t i = 0; i < word_ids.size(); ++i) {
    double miss = double(trials - acc1[i]) / double(trials);
    mean1 += miss;
    if (miss > est.lambda1_hat) {
      est.lambda1_hat = miss;
      arg1 = i;
    }
  }
  est.lambda1_mean = word_ids.empty() ? 0.0 : mean1 / word_ids.size();
  {
    auto ci = stats::clopper_pearson(trials - acc1[arg1], trials);
    est.ci95_halfwidth1 = (ci.hi - ci.lo) / 2.0;
  }

  if (est.lambda2_defined) {
    est.trials2 = trials;
    est.pairs_evaluated = pair_ids.size();
    std::size_t arg2 = 0;
    double mean2 = 0.0;
    for (std::size_t i = 0; i < pair_ids.size(); ++i) {
      double hit = double(acc2[i]) / double(trials);
      mean2 += hit;
      if (hit > est.lambda2_hat) {
        est.lambda2_hat = hit;
        arg2 = i;
      }
    }
    est.lambda2_mean = pair_ids.empty() ? 0.0 : mean2 / pair_ids.size();
    auto ci = stats::clopper_pearson(acc2[arg2], trials);
    est.ci95_halfwidth2 = (ci.hi - ci.lo) / 2.0;
  }
  return est;
}

ExactErrors exact_errors_small(const DICode& code) {
  require(code.size() >= 1, "code is empty");
  std::size_t nw = code.size();
  ExactErrors ex;
  ex.lambda1.assign(nw, 0.0);
  ex.lambda2.assign(nw, std::vector<double>(nw, 0.0));

  if (code.kind == DecoderKind::arc_support) {
    for (std::size_t j = 0; j < nw; ++j)
      for (std::size_t k = 0; k < nw; ++k) {
        if (j == k) continue;
        ex.lambda2[j][k] = arc_overlap(code.channel.theta, code.codewords[j],
                                       code.codewords[k]);
        ex.lambda2_max = std::max(ex.lambda2_max, ex.lambda2[j][k]);
      }
    return ex;
  }

  int n = code.n;
  int ysize = code.channel.alphabet_size();
  double log2_states = n * std::log2(double(ysize));
  require(log2_states <= 24.0 + 1e-9, "output space exceeds 2^24 states");
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= std::uint64_t(ysize);
  require(double(nw) * double(total) <= double(1ull << 23),
          "code too large for exhaustive evaluation");
  require(double(nw) * double(nw) * double(total) <= std::exp2(32.0),
          "pairwise sweep too large for exhaustive evaluation");

  std::vector<WordTables> tabs(nw);
  std::vector<TypicalityDecoder> decs(nw);
  for (std::size_t j = 0; j < nw; ++j) {
    tabs[j] = make_tables(code, j);
    decs[j] = code.decoder(j);
  }

  // Per-word probability vectors and typicality masks over all outputs;
  // scores are summed left to right exactly as the sampling kernel does.
  std::vector<std::vector<double>> probs(nw);
  std::vector<std::vector<char>> mask(nw);
  std::vector<int> y(n);
  for (std::size_t j = 0; j < nw; ++j) {
    probs[j].resize(total);
    mask[j].resize(total);
    const double* lp = tabs[j].log2p.data();
    for (std::uint64_t idx = 0; idx < total; ++idx) {
      std::uint64_t rem = idx;
      for (int i = n - 1; i >= 0; --i) {
        y[i] = static_cast<int>(rem % ysize);
        rem /= ysize;
      }
      double score = 0.0;
      for (int i = 0; i < n; ++i) score += lp[std::size_t(i) * ysize + y[i]];
      probs[j][idx] = std::exp2(score);
      mask[j][idx] = score >= decs[j].lo && score <= decs[j].hi;
    }
  }

  for (std::size_t j = 0; j < nw; ++j) {
    double sum = 0.0, comp = 0.0;
    for (std::uint64_t idx = 0; idx < total; ++idx)
      if (mask[j][idx]) kahan_add(sum, comp, probs[j][idx]);
    ex.lambda1[j] = std::clamp(1.0 - sum, 0.0, 1.0);
    ex.lambda1_max = std::max(ex.lambda1_max, ex.lambda1[j]);
  }
  for (std::size_t j = 0; j < nw; ++j)
    for (std::size_t k = 0; k < nw; ++k) {
      if (j == k) continue;
      double sum = 0.0, comp = 0.0;
      for (std::uint64_t idx = 0; idx < total; ++idx)
        if (mask[k][idx]) kahan_add(sum, comp, probs[j][idx]);
      ex.lambda2[j][k] = std::clamp(sum, 0.0, 1.0);
      ex.lambda2_max = std::max(ex.lambda2_max, ex.lambda2[j][k]);
    }
  return ex;
}

AuditResult mc_audit(const DICode& code, const ExactErrors& exact, int seeds,
                     int words_per_seed, int pairs_per_seed,
                     std::uint64_t trials, std::uint64_t base_seed) {
  require(code.kind == DecoderKind::typicality,
          "audits target the Monte-Carlo typicality path");
  std::size_t nw = code.size();
  require(exact.lambda1.size() == nw, "exact results do not match the code");

  std::vector<WordTables> tabs(nw);
  std::vector<TypicalityDecoder> decs(nw);
  for (std::size_t j = 0; j < nw; ++j) {
    tabs[j] = make_tables(code, j);
    decs[j] = code.decoder(j);
  }
  std::size_t n = code.codewords[0].length();
  std::size_t ysize = tabs[0].cdf.size() / n;

  struct Check {
    std::size_t j, k;  // j == k marks a first-kind check
    std::uint64_t key;
    double p;
  };
  std::vector<Check> checks;
  for (int s = 0; s < seeds; ++s) {
    std::uint64_t aseed = rng::derive(base_seed, 0xAD, std::uint64_t(s));
    for (auto j : sample_distinct(nw, words_per_seed, rng::derive(aseed, 0x1D)))
      checks.push_back({j, j, rng::derive(aseed, 1, j, j), exact.lambda1[j]});
    if (nw >= 2) {
      std::uint64_t tp = std::uint64_t(nw) * (nw - 1);
      for (auto p : sample_distinct(tp, pairs_per_seed,
                                    rng::derive(aseed, 0xFD))) {
        auto [j, k] = decode_pair(p, nw);
        checks.push_back({j, k, rng::derive(aseed, 2, j, k),
                          exact.lambda2[j][k]});
      }
    }
  }

  std::vector<char> pass(checks.size(), 0);
  parallel_for(checks.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Check& c = checks[i];
      std::uint64_t acc = run_mc(tabs[c.j], tabs[c.k], decs[c.k].lo,
                                 decs[c.k].hi, n, ysize, trials, c.key);
      double hat = c.j == c.k ? double(trials - acc) / double(trials)
                              : double(acc) / double(trials);
      double sigma = std::sqrt(c.p * (1.0 - c.p) / double(trials));
      pass[i] = sigma == 0.0 ? hat == c.p
                             : std::abs(hat - c.p) <= 3.0 * sigma;
    }
  });
  AuditResult r;
  r.checks = checks.size();
  for (char p : pass) r.passes += p;
  return r;
}

double ScalingRecord::rate_exp() const { return log2_size / n; }

double ScalingRecord::rate_nlogn() const {
  return log2_size / (n * std::log2(double(n)));
}

double ScalingRecord::rate_nloglogn() const {
  if (n < 4) return 0.0;
  return log2_size / (n * std::log2(std::log2(double(n))));
}

nlohmann::json ScalingRecord::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["log2_size"] = log2_size;
  j["size_exact"] = size_exact;
  if (size_exact) j["N"] = exact_size;
  j["rate_exp"] = rate_exp();
  j["rate_nlogn"] = rate_nlogn();
  j["rate_nloglogn"] = rate_nloglogn();
  if (has_errors) j["errors"] = errors.to_json();
  if (has_targets) j["targets_met"] = targets_met;
  if (!note.empty()) j["note"] = note;
  return j;
}

const char* ScalingRecord::csv_header() {
  return "n,N,rate_nlogn,rate_exp,lambda1_hat,ci1,lambda2_hat,ci2,seed";
}

std::string ScalingRecord::csv_row() const {
  std::string row = std::to_string(n) + ",";
  row += size_exact ? std::to_string(exact_size)
                    : fmt_double(std::exp2(log2_size));
  row += "," + fmt_double(rate_nlogn()) + "," + fmt_double(rate_exp());
  if (has_errors) {
    row += "," + fmt_double(errors.lambda1_hat);
    row += "," + fmt_double(errors.ci95_halfwidth1);
    row += "," + (errors.lambda2_defined ? fmt_double(errors.lambda2_hat)
                                         : std::string("nan"));
    row += "," + (errors.lambda2_defined ? fmt_double(errors.ci95_halfwidth2)
                                         : std::string("nan"));
    row += "," + std::to_string(errors.seed);
  } else {
    row += ",nan,nan,nan,nan,0";
  }
  return row;
}

std::vector<ScalingRecord> scaling_sweep(const ChannelModel& ch,
                                         std::span<const int> n_list,
                                         double alpha, double t,
                                         const SweepOptions& opt) {
  require(!n_list.empty(), "n_list is empty");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    require(n_list[i] > n_list[i - 1], "n_list must be ascending");

  std::vector<ScalingRecord> out;
  for (int n : n_list) {
    ScalingRecord rec;
    rec.n = n;
    try {
      AssembleOptions ao;
      ao.mode = opt.mode;
      ao.resolution = opt.resolution;
      ao.seed = opt.seed;
      ao.materialize_cap = opt.materialize_cap;
      DICode code = assemble_code(ch, n, alpha, t, opt.delta, ao);
      rec.log2_size = code.meta.log2_size;
      rec.exact_size = code.meta.exact_size;
      rec.size_exact = code.meta.size_exact;
      rec.errors = estimate_errors(code, opt.trials,
                                   rng::derive(opt.seed, 0x5E, std::uint64_t(n)),
                                   opt.pair_budget);
      rec.has_errors = true;
      if (opt.targets) {
        rec.has_targets = true;
        rec.targets_met = rec.errors.lambda1_hat <= opt.targets->lambda1 &&
                          (!rec.errors.lambda2_defined ||
                           rec.errors.lambda2_hat <= opt.targets->lambda2);
      }
    } catch (const std::exception& e) {
      rec.note = e.what();
      rec.targets_met = false;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

InputSet fractal_input(SetKind kind, const std::vector<long long>& m_seq) {
  InputSet s;
  s.kind = kind;
  s.m_seq = m_seq;
  return s;
}

int depth_for(double delta) {
  return std::min(6, std::max(1, static_cast<int>(
                                     std::ceil(std::log10(4.0 / delta)))));
}

PointCloud raw_cloud(const InputSet& set, int depth) {
  auto pts = set.enumerate(double(depth));
  PointCloud c;
  c.dim = pts.empty() ? 1 : static_cast<int>(pts[0].size());
  for (const auto& p : pts)
    c.coords.insert(c.coords.end(), p.begin(), p.end());
  return c;
}

PointCloud spherised_cloud(const ChannelModel& ch, int depth) {
  auto pts = ch.input.enumerate(double(depth));
  PointCloud c;
  c.dim = ch.alphabet_size();
  for (const auto& p : pts) {
    auto s = spherise(ch.output_dist(std::span<const double>(p))).coords;
    c.coords.insert(c.coords.end(), s.begin(), s.end());
  }
  return c;
}

nlohmann::json sweep_json(const std::vector<ScalingRecord>& recs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : recs) arr.push_back(r.to_json());
  return arr;
}

}  // namespace

nlohmann::json superactivation_demo(const std::vector<long long>& m_seq, int D,
                                    std::span<const int> n_list, double alpha,
                                    double t, std::uint64_t seed,
                                    std::uint64_t trials,
                                    std::uint64_t pair_budget) {
  require(D >= 1 && D <= 6, "digit depth must lie in [1, 6]");
  require(!n_list.empty(), "n_list is empty");

  InputSet setF = fractal_input(SetKind::fractal_F, m_seq);
  InputSet setG = fractal_input(SetKind::fractal_G, m_seq);
  setF.validate();
  setG.validate();
  ChannelModel chF = make_bernoulli(setF);
  ChannelModel chG = make_bernoulli(setG);
  ChannelModel chP = make_product(chF, chG);

  std::vector<double> ladder;
  for (int j = 0; j <= 6; ++j)
    ladder.push_back(0.7 * std::pow(10.0, -(j + 2) / 2.0));
  std::vector<double> sph_ladder(ladder.begin(), ladder.begin() + 5);

  auto genF = [&](double d) { return raw_cloud(setF, depth_for(d)); };
  auto genG = [&](double d) { return raw_cloud(setG, depth_for(d)); };
  auto genP = [&](double d) {
    return product_cloud(raw_cloud(setF, depth_for(d)),
                         raw_cloud(setG, depth_for(d)));
  };
  auto sphF = [&](double d) { return spherised_cloud(chF, depth_for(d)); };
  auto sphG = [&](double d) { return spherised_cloud(chG, depth_for(d)); };
  auto sphP = [&](double d) { return spherised_cloud(chP, depth_for(d)); };

  SweepOptions so;
  so.trials = trials;
  so.pair_budget = pair_budget;
  so.seed = seed;
  so.resolution = double(D);

  nlohmann::json rep;
  rep["m"] = m_seq;
  rep["D"] = D;
  rep["alpha"] = alpha;
  rep["t"] = t;
  rep["seed"] = seed;
  rep["ladder_raw"] = ladder;
  rep["ladder_spherised"] = sph_ladder;

  struct Entry {
    const char* name;
    const ChannelModel* ch;
    CloudGenerator raw, sph;
  };
  std::vector<Entry> entries = {{"F", &chF, genF, sphF},
                                {"G", &chG, genG, sphG},
                                {"product", &chP, genP, sphP}};
  std::vector<std::vector<ScalingRecord>> sweeps;
  for (auto& e : entries) {
    nlohmann::json cj;
    cj["dimension_raw"] = estimate_dimension(e.raw, ladder).to_json();
    cj["dimension_spherised"] =
        estimate_dimension(e.sph, sph_ladder).to_json();
    auto recs = scaling_sweep(*e.ch, n_list, alpha, t, so);
    cj["sweep"] = sweep_json(recs);
    nlohmann::json rates = nlohmann::json::array();
    for (const auto& r : recs) rates.push_back(r.rate_nlogn());
    cj["rate_nlogn"] = rates;
    rep["channels"][e.name] = std::move(cj);
    sweeps.push_back(std::move(recs));
  }

  nlohmann::json cmp = nlohmann::json::array();
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const auto& rf = sweeps[0][i];
    const auto& rg = sweeps[1][i];
    const auto& rp = sweeps[2][i];
    nlohmann::json c;
    c["n"] = n_list[i];
    bool ok = rf.note.empty() && rg.note.empty() && rp.note.empty();
    c["valid"] = ok;
    if (ok) {
      c["log2_F"] = rf.log2_size;
      c["log2_G"] = rg.log2_size;
      c["log2_product"] = rp.log2_size;
      c["log2_gain"] = rp.log2_size - rf.log2_size - rg.log2_size;
      c["strict_gain"] = rp.log2_size > rf.log2_size + rg.log2_size;
    }
    cmp.push_back(std::move(c));
  }
  rep["size_comparison"] = std::move(cmp);
  return rep;
}

}  // namespace dilab
