#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dilab/channel.hpp"
#include "dilab/codec.hpp"
#include "dilab/geometry.hpp"
#include "dilab/prob.hpp"
#include "dilab/rng.hpp"
#include "dilab/simulator.hpp"
#include "dilab/stats.hpp"
#include "dilab/util.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using dilab::require;

struct Config {
  std::string command;
  std::string channel_path;
  std::string code_path;
  std::string out;
  std::string format = "json";
  std::string outer = "auto";
  int n = 16;
  std::vector<int> n_list;
  double alpha = 0.2;
  double t = 0.1;
  double delta = 0.0;
  double resolution = 0.0;
  std::vector<double> deltas;  // dimension ladder override
  std::vector<long long> m_seq = {0, 1, 3, 9};
  int digits = 4;
  std::uint64_t trials = 100000;
  std::uint64_t pair_budget = 2000;
  std::uint64_t seed = 0;
  bool spherised = false;
};

nlohmann::json config_json(const Config& c) {
  nlohmann::json j;
  j["channel"] = c.channel_path;
  j["code"] = c.code_path;
  j["out"] = c.out;
  j["format"] = c.format;
  j["outer"] = c.outer;
  j["n"] = c.n;
  j["n_list"] = c.n_list;
  j["alpha"] = c.alpha;
  j["t"] = c.t;
  j["delta"] = c.delta;
  j["resolution"] = c.resolution;
  j["deltas"] = c.deltas;
  j["m"] = c.m_seq;
  j["digits"] = c.digits;
  j["trials"] = c.trials;
  j["pair_budget"] = c.pair_budget;
  j["seed"] = c.seed;
  j["spherised"] = c.spherised;
  return j;
}

Config config_from_json(const nlohmann::json& j, const std::string& command) {
  Config c;
  c.command = command;
  c.channel_path = j.value("channel", std::string());
  c.code_path = j.value("code", std::string());
  c.out = j.value("out", std::string());
  c.format = j.value("format", std::string("json"));
  c.outer = j.value("outer", std::string("auto"));
  c.n = j.value("n", 16);
  c.n_list = j.value("n_list", std::vector<int>());
  c.alpha = j.value("alpha", 0.2);
  c.t = j.value("t", 0.1);
  c.delta = j.value("delta", 0.0);
  c.resolution = j.value("resolution", 0.0);
  c.deltas = j.value("deltas", std::vector<double>());
  c.m_seq = j.value("m", std::vector<long long>{0, 1, 3, 9});
  c.digits = j.value("digits", 4);
  c.trials = j.value("trials", std::uint64_t(100000));
  c.pair_budget = j.value("pair_budget", std::uint64_t(2000));
  c.seed = j.value("seed", std::uint64_t(0));
  c.spherised = j.value("spherised", false);
  return c;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "cannot open output path: " + path);
  f << content;
  require(f.good(), "write failed: " + path);
}

void write_manifest(const Config& c) {
  nlohmann::json m;
  m["version"] = kVersion;
  m["command"] = c.command;
  m["seed"] = c.seed;
  m["config"] = config_json(c);
  write_file(c.out + ".manifest.json", m.dump(2) + "\n");
}

dilab::ChannelModel load_channel(const Config& c) {
  require(!c.channel_path.empty(), "--channel is required");
  return dilab::ChannelModel::load(c.channel_path);
}

dilab::OuterMode outer_mode(const std::string& s) {
  if (s == "auto") return dilab::OuterMode::automatic;
  if (s == "greedy") return dilab::OuterMode::greedy;
  if (s == "gv") return dilab::OuterMode::gv_linear;
  throw dilab::ValidationError("--outer must be auto, greedy, or gv");
}

void check_common(const Config& c) {
  require(c.format == "json" || c.format == "csv",
          "--format must be json or csv");
  require(c.trials >= 100, "trials must be at least 100");
  require(c.pair_budget >= 1, "pair budget must be positive");
  outer_mode(c.outer);
}

std::vector<int> sweep_list(const Config& c) {
  std::vector<int> ns = c.n_list;
  if (ns.empty()) ns = {16, 32, 64, 128};
  for (std::size_t i = 1; i < ns.size(); ++i)
    require(ns[i] > ns[i - 1], "n list must be ascending");
  return ns;
}

dilab::DICode build_code(const Config& c, const dilab::ChannelModel& ch) {
  dilab::AssembleOptions opt;
  opt.mode = outer_mode(c.outer);
  opt.resolution = c.resolution;
  opt.seed = c.seed;
  return dilab::assemble_code(ch, c.n, c.alpha, c.t, c.delta, opt);
}

int run_construct(const Config& c) {
  auto ch = load_channel(c);
  auto code = build_code(c, ch);
  write_file(c.out, code.to_json().dump(2) + "\n");
  write_manifest(c);
  return 0;
}

nlohmann::json evaluate_json(const dilab::DICode& code,
                             const dilab::ErrorEstimate& est) {
  nlohmann::json j;
  j["n"] = code.n;
  j["code_size_materialized"] = code.size();
  j["log2_size"] = code.meta.log2_size;
  j["size_exact"] = code.meta.size_exact;
  if (code.meta.size_exact) j["N"] = code.meta.exact_size;
  j["rate_exp"] = code.meta.log2_size / code.n;
  j["rate_nlogn"] = code.meta.log2_size / (code.n * std::log2(double(code.n)));
  j["estimate"] = est.to_json();
  return j;
}

std::string evaluate_csv(const dilab::DICode& code,
                         const dilab::ErrorEstimate& est) {
  dilab::ScalingRecord rec;
  rec.n = code.n;
  rec.log2_size = code.meta.log2_size;
  rec.exact_size = code.meta.exact_size;
  rec.size_exact = code.meta.size_exact;
  rec.errors = est;
  rec.has_errors = true;
  return std::string(dilab::ScalingRecord::csv_header()) + "\n" +
         rec.csv_row() + "\n";
}

int run_evaluate(const Config& c) {
  dilab::DICode code;
  if (!c.code_path.empty()) {
    std::ifstream f(c.code_path);
    require(f.good(), "cannot open code file: " + c.code_path);
    nlohmann::json j;
    f >> j;
    code = dilab::DICode::from_json(j);
  } else {
    code = build_code(c, load_channel(c));
  }
  auto est = dilab::estimate_errors(code, c.trials, c.seed, c.pair_budget);
  if (c.format == "csv")
    write_file(c.out, evaluate_csv(code, est));
  else
    write_file(c.out, evaluate_json(code, est).dump(2) + "\n");
  write_manifest(c);
  return 0;
}

bool has_fractal(const dilab::InputSet& s) {
  if (s.kind == dilab::SetKind::fractal_F ||
      s.kind == dilab::SetKind::fractal_G)
    return true;
  if (s.kind == dilab::SetKind::product)
    return has_fractal(*s.left) || has_fractal(*s.right);
  return false;
}

int fractal_depth(double delta) {
  return std::min(6, std::max(1, static_cast<int>(
                                     std::ceil(std::log10(4.0 / delta)))));
}

double cloud_resolution(const dilab::InputSet& s, double delta) {
  if (has_fractal(s)) return double(fractal_depth(delta));
  return delta / 4.0;
}

dilab::PointCloud ladder_cloud(const dilab::ChannelModel& ch, double delta,
                               bool spherised) {
  auto pts = ch.input.enumerate(cloud_resolution(ch.input, delta));
  dilab::PointCloud c;
  if (!spherised) {
    c.dim = pts.empty() ? 1 : static_cast<int>(pts[0].size());
    for (const auto& p : pts)
      c.coords.insert(c.coords.end(), p.begin(), p.end());
    return c;
  }
  c.dim = ch.alphabet_size();
  for (const auto& p : pts) {
    auto s =
        dilab::spherise(ch.output_dist(std::span<const double>(p))).coords;
    c.coords.insert(c.coords.end(), s.begin(), s.end());
  }
  return c;
}

int run_dimension(const Config& c) {
  auto ch = load_channel(c);
  if (c.spherised)
    require(ch.discrete(), "spherised clouds need a finite output alphabet");
  std::vector<double> ladder = c.deltas;
  if (ladder.empty()) {
    if (has_fractal(ch.input)) {
      for (int j = 0; j <= 6; ++j)
        ladder.push_back(0.7 * std::pow(10.0, -(j + 2) / 2.0));
    } else {
      for (int j = 3; j <= 10; ++j) ladder.push_back(std::exp2(-j));
    }
  }
  auto gen = [&](double d) { return ladder_cloud(ch, d, c.spherised); };
  auto est = dilab::estimate_dimension(gen, ladder);
  nlohmann::json j;
  j["channel"] = ch.to_json();
  j["spherised"] = c.spherised;
  j["estimate"] = est.to_json();
  write_file(c.out, j.dump(2) + "\n");
  write_manifest(c);
  return 0;
}

int run_scaling(const Config& c) {
  auto ch = load_channel(c);
  auto ns = sweep_list(c);
  dilab::SweepOptions so;
  so.delta = c.delta;
  so.trials = c.trials;
  so.pair_budget = c.pair_budget;
  so.seed = c.seed;
  so.resolution = c.resolution;
  so.mode = outer_mode(c.outer);
  auto recs = dilab::scaling_sweep(ch, ns, c.alpha, c.t, so);
  if (c.format == "csv") {
    std::string out = std::string(dilab::ScalingRecord::csv_header()) + "\n";
    for (const auto& r : recs) out += r.csv_row() + "\n";
    write_file(c.out, out);
  } else {
    nlohmann::json j;
    j["channel"] = ch.to_json();
    j["alpha"] = c.alpha;
    j["t"] = c.t;
    j["delta"] = c.delta;
    j["trials"] = c.trials;
    j["pair_budget"] = c.pair_budget;
    j["seed"] = c.seed;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : recs) arr.push_back(r.to_json());
    j["records"] = std::move(arr);
    write_file(c.out, j.dump(2) + "\n");
  }
  write_manifest(c);
  return 0;
}

int run_superactivate(const Config& c) {
  require(c.digits >= 1 && c.digits <= 6, "digit depth must lie in [1, 6]");
  std::vector<int> ns = c.n_list;
  if (ns.empty()) ns = {16, 32};
  auto rep = dilab::superactivation_demo(c.m_seq, c.digits, ns, c.alpha, c.t,
                                         c.seed, c.trials, c.pair_budget);
  write_file(c.out, rep.dump(2) + "\n");
  write_manifest(c);
  return 0;
}

int run_selftest() {
  int failed = 0;
  auto report = [&](const char* name, bool ok) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
    failed += !ok;
  };

  {  // metric identities on random pairs
    bool ok = true;
    for (int size : {2, 3, 8}) {
      for (int rep = 0; rep < 1000 && ok; ++rep) {
        std::vector<double> a(size), b(size);
        double sa = 0, sb = 0;
        for (int i = 0; i < size; ++i) {
          a[i] = dilab::rng::u01(dilab::rng::derive(11, rep, i)) + 1e-3;
          b[i] = dilab::rng::u01(dilab::rng::derive(13, rep, i)) + 1e-3;
          sa += a[i];
          sb += b[i];
        }
        for (int i = 0; i < size; ++i) {
          a[i] /= sa;
          b[i] /= sb;
        }
        dilab::Dist da(a), db(b);
        double tv = dilab::tv_distance(da, db);
        double f = dilab::fidelity(da, db);
        double pd = dilab::purified_distance(da, db);
        ok = ok && 1.0 - f <= tv + 1e-12 &&
             tv <= std::sqrt(1.0 - f * f) + 1e-12;
        ok = ok && tv <= pd + 1e-12 && pd <= std::sqrt(2.0 * tv) + 1e-12;
      }
    }
    report("metric-identities", ok);
  }

  {  // Bernoulli TV closed form
    bool ok = true;
    auto ch = dilab::make_bernoulli();
    for (int i = 0; i <= 100 && ok; ++i)
      for (int j = 0; j <= 100 && ok; ++j) {
        double x = i / 100.0, xp = j / 100.0;
        double tv =
            dilab::tv_distance(ch.output_dist(x), ch.output_dist(xp));
        ok = std::abs(tv - std::abs(x - xp)) <= 1e-15;
      }
    report("bernoulli-tv", ok);
  }

  {  // Poisson fidelity closed form
    bool ok = true;
    auto ch = dilab::make_poisson(10.0);
    for (int i = 0; i <= 40 && ok; ++i)
      for (int j = 0; j <= 40 && ok; ++j) {
        double x = i / 4.0, xp = j / 4.0;
        double f = dilab::fidelity(ch.output_dist(x), ch.output_dist(xp));
        double want = std::exp(-0.5 * (std::sqrt(x) - std::sqrt(xp)) *
                               (std::sqrt(x) - std::sqrt(xp)));
        ok = std::abs(f * f - want * want) <= 2e-12 + 1e-10;
      }
    report("poisson-fidelity", ok);
  }

  {  // covering/packing sandwich on small random clouds
    bool ok = true;
    for (int rep = 0; rep < 20 && ok; ++rep) {
      int count = 3 + int(dilab::rng::below(dilab::rng::derive(29, rep), 10));
      dilab::PointCloud c;
      c.dim = 1 + int(dilab::rng::below(dilab::rng::derive(31, rep), 3));
      for (int i = 0; i < count * c.dim; ++i)
        c.coords.push_back(dilab::rng::u01(dilab::rng::derive(37, rep, i)));
      auto sw = dilab::sandwich_check(c, 0.25, 0.0025);
      ok = sw.ok && sw.exact;
    }
    report("sandwich", ok);
  }

  dilab::ChannelModel bern = dilab::make_bernoulli();
  dilab::AssembleOptions cap512;
  cap512.materialize_cap = 512;
  {  // exact vs Monte-Carlo at n=8
    auto code = dilab::assemble_code(bern, 8, 0.2, 0.1, 1.0, cap512);
    auto ex = dilab::exact_errors_small(code);
    auto ar = dilab::mc_audit(code, ex, 30, 3, 6, 20000, 5);
    report("mc-vs-exact", double(ar.passes) >= 0.98 * double(ar.checks));
  }

  {  // identity channel has zero errors
    auto ch = dilab::make_dmc({{1, 0}, {0, 1}});
    auto code = dilab::assemble_code(ch, 8, 0.2, 0.1, 1.0, cap512);
    auto ex = dilab::exact_errors_small(code);
    auto est = dilab::estimate_errors(code, 1000, 7, 200);
    report("identity-zeros", ex.lambda1_max == 0 && ex.lambda2_max == 0 &&
                                 est.lambda1_hat == 0 && est.lambda2_hat == 0);
  }

  {  // arc grid code: no misses, overlap below the analytic ceiling
    auto ch = dilab::make_arc(0.5);
    auto code = dilab::assemble_code(ch, 20, 0.2, 0.1, 0);
    auto ex = dilab::exact_errors_small(code);
    report("arc-overlap",
           ex.lambda1_max == 0 && ex.lambda2_max <= std::exp(-1.0 / 0.05));
  }

  {  // outer code distances
    auto oc = dilab::build_outer_code(3, 8, 0.3, dilab::OuterMode::greedy);
    bool ok = true;
    for (std::size_t a = 0; a < oc.words.size() && ok; ++a)
      for (std::size_t b = a + 1; b < oc.words.size() && ok; ++b) {
        int d = 0;
        for (int i = 0; i < 8; ++i) d += oc.words[a][i] != oc.words[b][i];
        ok = d >= oc.distance;
      }
    report("outer-distance", ok);
  }

  return failed ? 2 : 0;
}

int run(const Config& c) {
  check_common(c);
  if (c.command == "construct") return run_construct(c);
  if (c.command == "evaluate") return run_evaluate(c);
  if (c.command == "dimension") return run_dimension(c);
  if (c.command == "scaling") return run_scaling(c);
  if (c.command == "superactivate") return run_superactivate(c);
  if (c.command == "selftest") return run_selftest();
  throw dilab::ValidationError("unknown subcommand");
}

int run_manifest(const std::string& path, const std::string& out_override) {
  std::ifstream f(path);
  require(f.good(), "cannot open manifest: " + path);
  nlohmann::json m;
  f >> m;
  Config c = config_from_json(m.at("config"), m.at("command").get<std::string>());
  if (!out_override.empty()) c.out = out_override;
  return run(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic identification codes for finite-output channels"};
  app.require_subcommand(1);

  Config c;
  std::string manifest_path, out_override;

  auto add_common = [&](CLI::App* sub, bool wants_channel) {
    if (wants_channel)
      sub->add_option("--channel", c.channel_path, "channel spec JSON path");
    sub->add_option("--out", c.out, "output path");
    sub->add_option("--seed", c.seed, "base seed");
  };
  auto add_code_params = [&](CLI::App* sub) {
    sub->add_option("--alpha", c.alpha, "net separation exponent");
    sub->add_option("--t", c.t, "relative Hamming distance");
    sub->add_option("--delta", c.delta, "typicality width (0 = default rule)");
    sub->add_option("--resolution", c.resolution,
                    "net enumeration override (0 = auto)");
    sub->add_option("--outer", c.outer, "outer code mode: auto|greedy|gv");
  };
  auto add_budgets = [&](CLI::App* sub) {
    sub->add_option("--trials", c.trials, "Monte-Carlo trials per quantity");
    sub->add_option("--pair-budget", c.pair_budget, "ordered-pair budget");
  };

  auto* con = app.add_subcommand("construct", "assemble a DI code");
  add_common(con, true);
  add_code_params(con);
  con->add_option("--n", c.n, "block length");

  auto* ev = app.add_subcommand("evaluate", "estimate error probabilities");
  add_common(ev, true);
  add_code_params(ev);
  add_budgets(ev);
  ev->add_option("--n", c.n, "block length");
  ev->add_option("--code", c.code_path, "constructed code JSON (skips assembly)");
  ev->add_option("--format", c.format, "json|csv");

  auto* dim = app.add_subcommand("dimension", "box-counting dimension ladder");
  add_common(dim, true);
  dim->add_option("--deltas", c.deltas, "explicit ladder (descending)");
  dim->add_flag("--spherised", c.spherised, "measure the spherised output set");

  auto* sc = app.add_subcommand("scaling", "code size sweep over n");
  add_common(sc, true);
  add_code_params(sc);
  add_budgets(sc);
  sc->add_option("--n-list", c.n_list, "ascending block lengths");
  sc->add_option("--format", c.format, "json|csv");

  auto* su = app.add_subcommand("superactivate", "two-channel product demo");
  add_common(su, false);
  su->add_option("--m", c.m_seq, "fractal window boundaries");
  su->add_option("--digits", c.digits, "decimal depth D");
  su->add_option("--n-list", c.n_list, "block lengths (default 16 32)");
  auto* su_alpha = su->add_option("--alpha", c.alpha,
                                  "net separation exponent (default 0.25)");
  su->add_option("--t", c.t, "relative Hamming distance");
  add_budgets(su);

  auto* st = app.add_subcommand("selftest", "run the exhaustive-oracle suite");
  (void)st;

  auto* rr = app.add_subcommand("rerun", "repeat a run from its manifest");
  rr->add_option("--manifest", manifest_path, "manifest JSON path")->required();
  rr->add_option("--out", out_override, "override output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (su->parsed() && su_alpha->count() == 0) c.alpha = 0.25;
    if (rr->parsed()) return run_manifest(manifest_path, out_override);
    c.command = app.get_subcommands().front()->get_name();
    if (c.out.empty() && c.command != "selftest")
      c.out = c.command + "." + c.format;
    return run(c);
  } catch (const dilab::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
