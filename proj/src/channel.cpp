#include "dilab/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dilab/rng.hpp"
#include "dilab/util.hpp"

namespace dilab {

namespace {
constexpr std::size_t kMaxEnumeration = std::size_t(1) << 21;

const std::vector<long long> kDefaultM = {0, 1, 3, 9, 27, 81};

long long pow10ll(int d) {
  long long v = 1;
  for (int i = 0; i < d; ++i) v *= 10;
  return v;
}

// Window index (1-based) containing digit position p, or 0 if p lies past
// the last m entry (unconstrained).
InputSet interval_set(double lo, double hi) {
  InputSet s;
  s.kind = SetKind::interval;
  s.lo = lo;
  s.hi = hi;
  return s;
}

int window_of(const std::vector<long long>& m, long long p) {
  for (std::size_t k = 1; k < m.size(); ++k)
    if (m[k - 1] < p && p <= m[k]) return (int)k;
  return 0;
}

std::vector<std::vector<double>> enumerate_fractal(
    const std::vector<long long>& m_in, int digits, bool zero_even_windows) {
  const std::vector<long long>& m = m_in.empty() ? kDefaultM : m_in;
  require(digits >= 1 && digits <= 9, "fractal digit depth must be in [1,9]");
  std::vector<int> free_pos;
  for (int p = 1; p <= digits; ++p) {
    const int k = window_of(m, p);
    const bool zeroed =
        k != 0 && (zero_even_windows ? (k % 2 == 0) : (k % 2 == 1));
    if (!zeroed) free_pos.push_back(p);
  }
  std::size_t count = 1;
  for (std::size_t i = 0; i < free_pos.size(); ++i) {
    count *= 10;
    require(count <= kMaxEnumeration, "input-set enumeration too large");
  }
  const double scale = (double)pow10ll(digits);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  std::vector<int> digit(free_pos.size(), 0);
  for (std::size_t it = 0; it < count; ++it) {
    long long value = 0;
    for (std::size_t i = 0; i < free_pos.size(); ++i)
      value += (long long)digit[i] * pow10ll(digits - free_pos[i]);
    out.push_back({(double)value / scale});
    for (std::size_t i = free_pos.size(); i-- > 0;) {
      if (++digit[i] < 10) break;
      digit[i] = 0;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}
}  // namespace

int InputSet::letter_dim() const {
  if (kind == SetKind::product) return left->letter_dim() + right->letter_dim();
  return 1;
}

double InputSet::max_value() const {
  switch (kind) {
    case SetKind::interval:
      return hi;
    case SetKind::finite_list:
      return *std::max_element(values.begin(), values.end());
    case SetKind::product:
      return std::max(left->max_value(), right->max_value());
    default:
      return 1.0;  // sequence and fractal sets live in [0,1]
  }
}

void InputSet::validate() const {
  switch (kind) {
    case SetKind::interval:
      require(lo >= 0.0 && lo < hi, "interval requires 0 <= lo < hi");
      break;
    case SetKind::finite_list:
      require(!values.empty(), "finite_list requires at least one value");
      break;
    case SetKind::poly_sequence:
      require(s > 0.0, "poly_sequence requires s > 0");
      break;
    case SetKind::exp_sequence:
      require(c > 1.0, "exp_sequence requires c > 1");
      break;
    case SetKind::fractal_F:
    case SetKind::fractal_G: {
      const std::vector<long long>& m = m_seq.empty() ? kDefaultM : m_seq;
      require(m.size() >= 2 && m[0] == 0,
              "fractal m-sequence must start at 0 with at least two entries");
      for (std::size_t i = 1; i < m.size(); ++i)
        require(m[i] > m[i - 1], "fractal m-sequence must be increasing");
      break;
    }
    case SetKind::product:
      require(left && right, "product set requires both factors");
      left->validate();
      right->validate();
      break;
    default:
      break;
  }
}

std::vector<std::vector<double>> InputSet::enumerate(double resolution) const {
  require(resolution > 0.0, "enumeration resolution must be positive");
  validate();
  // Sequence kinds: resolution >= 1 is a total element count, < 1 a cutoff.
  const bool count_mode = resolution >= 1.0;
  std::vector<double> scalars;
  switch (kind) {
    case SetKind::interval: {
      const std::size_t m = (std::size_t)std::max(
          1.0, std::ceil((hi - lo) / resolution - 1e-9));
      require(m + 1 <= kMaxEnumeration, "input-set enumeration too large");
      for (std::size_t i = 0; i <= m; ++i)
        scalars.push_back(lo + (hi - lo) * (double)i / (double)m);
      break;
    }
    case SetKind::finite_list:
      scalars = values;
      break;
    case SetKind::log_sequence: {
      long long t_max;
      if (count_mode) {
        t_max = (long long)resolution;  // elements {0} u {t=2..t_max}
      } else {
        const double b = std::pow(2.0, 1.0 / resolution);
        t_max = b > 1e18 ? (long long)1e18 : (long long)std::floor(b + 1e-9);
      }
      require((std::size_t)std::max(t_max - 1, 0LL) < kMaxEnumeration,
              "input-set enumeration too large");
      scalars.push_back(0.0);
      for (long long t = 2; t <= t_max; ++t)
        scalars.push_back(1.0 / std::log2((double)t));
      break;
    }
    case SetKind::poly_sequence: {
      long long t_max;
      if (count_mode) {
        t_max = (long long)resolution - 1;  // {0} plus t = 1..t_max
      } else {
        t_max = (long long)std::floor(std::pow(resolution, -1.0 / s) + 1e-9);
      }
      require((std::size_t)std::max(t_max, 0LL) < kMaxEnumeration,
              "input-set enumeration too large");
      scalars.push_back(0.0);
      for (long long t = 1; t <= t_max; ++t)
        scalars.push_back(std::pow((double)t, -s));
      break;
    }
    case SetKind::exp_sequence: {
      long long t_max;
      if (count_mode) {
        t_max = (long long)resolution - 2;  // {0} plus t = 0..t_max
      } else {
        t_max = (long long)std::floor(std::log(1.0 / resolution) /
                                          std::log(c) +
                                      1e-9);
      }
      require((std::size_t)std::max(t_max + 1, 0LL) < kMaxEnumeration,
              "input-set enumeration too large");
      scalars.push_back(0.0);
      for (long long t = 0; t <= t_max; ++t)
        scalars.push_back(std::pow(c, -(double)t));
      break;
    }
    case SetKind::fractal_F:
    case SetKind::fractal_G: {
      const int digits =
          count_mode ? (int)std::llround(resolution)
                     : (int)std::ceil(std::log10(1.0 / resolution) - 1e-9);
      return enumerate_fractal(m_seq, std::max(digits, 1),
                               kind == SetKind::fractal_F);
    }
    case SetKind::product: {
      const auto el = left->enumerate(resolution);
      const auto er = right->enumerate(resolution);
      require(el.size() * er.size() <= kMaxEnumeration,
              "input-set enumeration too large");
      std::vector<std::vector<double>> out;
      out.reserve(el.size() * er.size());
      for (const auto& x : el)
        for (const auto& y : er) {
          std::vector<double> p = x;
          p.insert(p.end(), y.begin(), y.end());
          out.push_back(std::move(p));
        }
      return out;  // lex order by construction (factors sorted)
    }
  }
  std::sort(scalars.begin(), scalars.end());
  scalars.erase(std::unique(scalars.begin(), scalars.end()), scalars.end());
  std::vector<std::vector<double>> out;
  out.reserve(scalars.size());
  for (double v : scalars) out.push_back({v});
  return out;
}

nlohmann::json InputSet::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case SetKind::interval:
      j = {{"kind", "interval"}, {"lo", lo}, {"hi", hi}};
      break;
    case SetKind::finite_list:
      j = {{"kind", "finite_list"}, {"values", values}};
      break;
    case SetKind::log_sequence:
      j = {{"kind", "log_sequence"}};
      break;
    case SetKind::poly_sequence:
      j = {{"kind", "poly_sequence"}, {"s", s}};
      break;
    case SetKind::exp_sequence:
      j = {{"kind", "exp_sequence"}, {"c", c}};
      break;
    case SetKind::fractal_F:
      j = {{"kind", "fractal_F"}, {"m", m_seq.empty() ? kDefaultM : m_seq}};
      break;
    case SetKind::fractal_G:
      j = {{"kind", "fractal_G"}, {"m", m_seq.empty() ? kDefaultM : m_seq}};
      break;
    case SetKind::product:
      j = {{"kind", "product"},
           {"left", left->to_json()},
           {"right", right->to_json()}};
      break;
  }
  return j;
}

InputSet InputSet::from_json(const nlohmann::json& j) {
  InputSet s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "interval") {
    s.kind = SetKind::interval;
    s.lo = j.value("lo", 0.0);
    s.hi = j.value("hi", 1.0);
  } else if (kind == "finite_list") {
    s.kind = SetKind::finite_list;
    s.values = j.at("values").get<std::vector<double>>();
  } else if (kind == "log_sequence") {
    s.kind = SetKind::log_sequence;
  } else if (kind == "poly_sequence") {
    s.kind = SetKind::poly_sequence;
    s.s = j.at("s").get<double>();
  } else if (kind == "exp_sequence") {
    s.kind = SetKind::exp_sequence;
    s.c = j.at("c").get<double>();
  } else if (kind == "fractal_F" || kind == "fractal_G") {
    s.kind = kind == "fractal_F" ? SetKind::fractal_F : SetKind::fractal_G;
    if (j.contains("m")) s.m_seq = j.at("m").get<std::vector<long long>>();
  } else if (kind == "product") {
    s.kind = SetKind::product;
    s.left = std::make_shared<InputSet>(InputSet::from_json(j.at("left")));
    s.right = std::make_shared<InputSet>(InputSet::from_json(j.at("right")));
  } else {
    throw ValidationError("unknown input-set kind: " + kind);
  }
  s.validate();
  return s;
}

int ChannelModel::alphabet_size() const {
  switch (family) {
    case Family::bernoulli:
      return 2;
    case Family::poisson:
      return y_max + 1;
    case Family::dmc:
      return (int)rows.front().size();
    case Family::arc:
      return 0;  // continuous output, analytic only
    case Family::product:
      return a->alphabet_size() * b->alphabet_size();
  }
  return 0;
}

int ChannelModel::letter_dim() const {
  return family == Family::product ? a->letter_dim() + b->letter_dim() : 1;
}

void ChannelModel::validate() const {
  input.validate();
  switch (family) {
    case Family::bernoulli:
      require(input.max_value() <= 1.0 + 1e-12,
              "bernoulli inputs must lie in [0,1]");
      break;
    case Family::poisson:
      require(tail_bound > 0.0 && tail_bound <= 1e-12,
              "poisson tail bound must be in (0, 1e-12]");
      require(x_max > 0.0, "poisson energy cap must be positive");
      require(input.max_value() <= x_max + 1e-12,
              "poisson inputs must lie in [0, x_max]");
      break;
    case Family::dmc: {
      require(!rows.empty(), "dmc requires at least one row");
      const std::size_t w = rows.front().size();
      for (const auto& r : rows) {
        require(r.size() == w, "dmc rows must share one alphabet");
        (void)Dist(r);  // throws if not a valid distribution
      }
      break;
    }
    case Family::arc:
      require(theta > 0.0 && theta < 1.0, "arc requires theta in (0,1)");
      break;
    case Family::product:
      require(a && b, "product channel requires both factors");
      a->validate();
      b->validate();
      require(a->discrete() && b->discrete(),
              "product channel factors must have finite output");
      break;
  }
}

Dist ChannelModel::output_dist(std::span<const double> x) const {
  switch (family) {
    case Family::bernoulli: {
      require(x.size() == 1, "bernoulli input is one-dimensional");
      const double v = x[0];
      require(v >= 0.0 && v <= 1.0, "bernoulli input outside [0,1]");
      return Dist({1.0 - v, v});
    }
    case Family::poisson: {
      require(x.size() == 1, "poisson input is one-dimensional");
      const double v = x[0];
      require(v >= 0.0 && v <= x_max + 1e-12,
              "poisson input outside [0, x_max]");
      std::vector<double> p((std::size_t)y_max + 1, 0.0);
      double term = std::exp(-v);
      double z = 0.0;
      for (int y = 0; y <= y_max; ++y) {
        p[(std::size_t)y] = term;
        z += term;
        term *= v / (double)(y + 1);
      }
      for (double& e : p) e /= z;
      return Dist(std::move(p));
    }
    case Family::dmc: {
      require(x.size() == 1, "dmc input is one-dimensional");
      const long long idx = std::llround(x[0]);
      require(std::fabs(x[0] - (double)idx) <= 1e-9,
              "dmc input must be an integer row index");
      require(idx >= 0 && idx < (long long)rows.size(),
              "dmc row index out of range");
      return Dist(rows[(std::size_t)idx]);
    }
    case Family::arc:
      throw ValidationError("arc family is analytic-only (no output Dist)");
    case Family::product: {
      const int dl = a->letter_dim();
      require((int)x.size() == dl + b->letter_dim(),
              "product input dimension mismatch");
      const Dist pa = a->output_dist(x.subspan(0, (std::size_t)dl));
      const Dist pb = b->output_dist(x.subspan((std::size_t)dl));
      std::vector<double> p;
      p.reserve(pa.size() * pb.size());
      for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t k = 0; k < pb.size(); ++k) p.push_back(pa[i] * pb[k]);
      return Dist(std::move(p));
    }
  }
  throw ValidationError("unsupported channel family");
}

Dist ChannelModel::output_dist(double x) const {
  return output_dist(std::span<const double>(&x, 1));
}

int ChannelModel::sample_output(std::span<const double> x,
                                std::uint64_t seed) const {
  const Dist d = output_dist(x);
  const double u = rng::u01(rng::derive(seed, 0));
  // Same inverse-CDF convention as the Monte-Carlo kernels.
  double cum = 0.0;
  int y = 0;
  for (std::size_t s = 0; s + 1 < d.size(); ++s) {
    cum += d[s];
    y += (cum <= u) ? 1 : 0;
  }
  return y;
}

SeqDist ChannelModel::word_output(const InputWord& w) const {
  require(w.dim == letter_dim(), "word letter dimension mismatch");
  SeqDist s;
  s.reserve(w.length());
  for (std::size_t i = 0; i < w.length(); ++i)
    s.push_back(output_dist(w.letter(i)));
  return s;
}

nlohmann::json ChannelModel::to_json() const {
  nlohmann::json j;
  nlohmann::json params = nlohmann::json::object();
  switch (family) {
    case Family::bernoulli:
      j["family"] = "bernoulli";
      break;
    case Family::poisson:
      j["family"] = "poisson";
      params["x_max"] = x_max;
      params["tail_bound"] = tail_bound;
      params["y_max"] = y_max;
      break;
    case Family::dmc:
      j["family"] = "dmc";
      params["rows"] = rows;
      break;
    case Family::arc:
      j["family"] = "arc";
      params["theta"] = theta;
      break;
    case Family::product:
      j["family"] = "product";
      params["left"] = a->to_json();
      params["right"] = b->to_json();
      break;
  }
  j["params"] = params;
  j["input_set"] = input.to_json();
  return j;
}

ChannelModel ChannelModel::from_json(const nlohmann::json& j) {
  const std::string fam = j.at("family").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  ChannelModel ch;
  if (fam == "bernoulli") {
    ch.family = Family::bernoulli;
  } else if (fam == "poisson") {
    ch.family = Family::poisson;
    ch.x_max = params.value("x_max", 10.0);
    ch.tail_bound = params.value("tail_bound", 1e-12);
    ch.y_max = poisson_y_max(ch.x_max, ch.tail_bound);  // always re-derived
  } else if (fam == "dmc") {
    ch.family = Family::dmc;
    ch.rows = params.at("rows").get<std::vector<std::vector<double>>>();
  } else if (fam == "arc") {
    ch.family = Family::arc;
    ch.theta = params.at("theta").get<double>();
  } else if (fam == "product") {
    ch.family = Family::product;
    ch.a = std::make_shared<ChannelModel>(
        ChannelModel::from_json(params.at("left")));
    ch.b = std::make_shared<ChannelModel>(
        ChannelModel::from_json(params.at("right")));
  } else {
    throw ValidationError("unknown channel family: " + fam);
  }
  if (j.contains("input_set")) {
    ch.input = InputSet::from_json(j.at("input_set"));
  } else if (fam == "dmc") {
    InputSet s;
    s.kind = SetKind::finite_list;
    for (std::size_t i = 0; i < ch.rows.size(); ++i)
      s.values.push_back((double)i);
    ch.input = s;
  } else if (fam == "poisson") {
    ch.input = interval_set(0.0, ch.x_max);
  } else if (fam == "product") {
    InputSet s;
    s.kind = SetKind::product;
    s.left = std::make_shared<InputSet>(ch.a->input);
    s.right = std::make_shared<InputSet>(ch.b->input);
    ch.input = s;
  }
  ch.validate();
  return ch;
}

ChannelModel ChannelModel::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open channel spec: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

ChannelModel make_bernoulli(InputSet input) {
  ChannelModel ch;
  ch.family = Family::bernoulli;
  ch.input = std::move(input);
  ch.validate();
  return ch;
}

ChannelModel make_bernoulli() {
  return make_bernoulli(
      interval_set(0.0, 1.0));
}

ChannelModel make_poisson(double x_max, double tail_bound) {
  ChannelModel ch;
  ch.family = Family::poisson;
  ch.x_max = x_max;
  ch.tail_bound = tail_bound;
  ch.y_max = poisson_y_max(x_max, tail_bound);
  ch.input = interval_set(0.0, x_max);
  ch.validate();
  return ch;
}

ChannelModel make_dmc(std::vector<std::vector<double>> rows) {
  ChannelModel ch;
  ch.family = Family::dmc;
  ch.rows = std::move(rows);
  InputSet s;
  s.kind = SetKind::finite_list;
  for (std::size_t i = 0; i < ch.rows.size(); ++i)
    s.values.push_back((double)i);
  ch.input = s;
  ch.validate();
  return ch;
}

ChannelModel make_arc(double theta) {
  ChannelModel ch;
  ch.family = Family::arc;
  ch.theta = theta;
  ch.input = interval_set(0.0, 1.0);
  ch.validate();
  return ch;
}

ChannelModel make_product(ChannelModel left, ChannelModel right) {
  ChannelModel ch;
  ch.family = Family::product;
  ch.a = std::make_shared<ChannelModel>(std::move(left));
  ch.b = std::make_shared<ChannelModel>(std::move(right));
  InputSet s;
  s.kind = SetKind::product;
  s.left = std::make_shared<InputSet>(ch.a->input);
  s.right = std::make_shared<InputSet>(ch.b->input);
  ch.input = s;
  ch.validate();
  return ch;
}

int poisson_y_max(double x_max, double tail_bound) {
  require(x_max > 0.0, "poisson energy cap must be positive");
  require(tail_bound > 0.0, "poisson tail bound must be positive");
  double term = std::exp(-x_max);
  double cum = term;
  int y = 0;
  while (1.0 - cum > tail_bound && y < 100000) {
    ++y;
    term *= x_max / (double)y;
    cum += term;
  }
  return y;
}

double arc_distance(double theta, double x, double x2) {
  require(theta > 0.0 && theta < 1.0, "arc requires theta in (0,1)");
  require(x >= 0.0 && x < 1.0 && x2 >= 0.0 && x2 < 1.0,
          "arc inputs must lie in [0,1)");
  const double diff = std::fabs(x - x2);
  const double delta = std::min(diff, 1.0 - diff);
  if (delta <= std::min(theta, 1.0 - theta)) return delta / theta;
  return theta <= 0.5 ? 1.0 : 1.0 / theta - 1.0;
}

double arc_overlap(double theta, const InputWord& u, const InputWord& v) {
  require(u.dim == 1 && v.dim == 1, "arc letters are one-dimensional");
  require(u.length() == v.length(), "block lengths differ");
  double prod = 1.0;
  for (std::size_t i = 0; i < u.length(); ++i) {
    const double f = 1.0 - arc_distance(theta, u.coords[i], v.coords[i]);
    if (f <= 0.0) return 0.0;
    prod *= f;
  }
  return prod;
}

}  // namespace dilab
