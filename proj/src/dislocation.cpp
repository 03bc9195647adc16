#include "rxt/dislocation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

#include "rxt/errors.hpp"
#include "rxt/paintbox.hpp"

namespace rxt {

namespace {

constexpr double kTol = 1e-12;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Mass of the class P^j under kappa_s: sum_i s_i^j (1 - s_i), plus dust when j = 1.
double class_mass(const MassPartition& s, int j) {
  double t = j == 1 ? s.dust() : 0.0;
  for (double si : s.atoms()) t += std::pow(si, j) * (1.0 - si);
  return t;
}

// Mass of the classes j = m..n-1 together: sum_i (s_i^m - s_i^n), plus dust when m = 1.
double tail_class_mass(const MassPartition& s, int m, int n) {
  if (n - 1 < m) return 0.0;
  double t = m == 1 ? s.dust() : 0.0;
  for (double si : s.atoms()) t += std::pow(si, m) - std::pow(si, n);
  return t;
}

Partition epsilon_partition(int x, int n) {
  std::vector<long> labels(static_cast<std::size_t>(n), 0);
  labels[x - 1] = 1;
  return Partition::from_labels(labels);
}

Partition omega_partition(int j, int n) {
  std::vector<long> labels(static_cast<std::size_t>(n));
  for (int r = 1; r <= n; ++r) labels[r - 1] = r <= j ? 0 : r;
  return Partition::from_labels(labels);
}

long paint_other_than(const MassPartition& s, long avoid, Rng& rng) {
  while (true) {
    long c = paint(s, rng);
    if (c != avoid || c < 0) return c;
  }
}

// Paintbox colours with the first j equal to colour i and colour j+1 different.
Partition paint_in_class(const MassPartition& s, long i, int j, int n, Rng& rng) {
  std::vector<long> labels(static_cast<std::size_t>(n));
  for (int r = 1; r <= j; ++r) labels[r - 1] = i;
  if (j < n) {
    long c = paint_other_than(s, i, rng);
    labels[j] = c >= 0 ? c : -static_cast<long>(j + 1);
  }
  for (int r = j + 2; r <= n; ++r) {
    long c = paint(s, rng);
    labels[r - 1] = c >= 0 ? c : -static_cast<long>(r);
  }
  return Partition::from_labels(labels);
}

Partition paint_dust_first(const MassPartition& s, int n, Rng& rng) {
  std::vector<long> labels(static_cast<std::size_t>(n));
  labels[0] = -1;
  for (int r = 2; r <= n; ++r) {
    long c = paint(s, rng);
    labels[r - 1] = c >= 0 ? c : -static_cast<long>(r);
  }
  return Partition::from_labels(labels);
}

std::size_t pick(const std::vector<double>& w, Rng& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  double u = rng.uniform() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    last = i;
    if (u < w[i]) return i;
    u -= w[i];
  }
  return last;
}

}  // namespace

DiscreteDislocation::DiscreteDislocation(std::vector<std::vector<DislocationAtom>> levels, std::vector<double> c,
                                         std::vector<double> k, bool conservative_mode)
    : levels_(std::move(levels)), c_(std::move(c)), k_(std::move(k)), conservative_(conservative_mode) {
  if (levels_.empty()) throw std::invalid_argument("dislocation: at least one level required");
  for (auto& lvl : levels_)
    for (auto& a : lvl) {
      if (!(a.weight > 0.0) || !std::isfinite(a.weight))
        throw std::invalid_argument("dislocation: atom weights must be positive and finite");
      if (a.s.m() == 0) throw std::invalid_argument("dislocation: the all-dust atom (0,0,...) is excluded");
      if (a.s.m() == 1 && a.s.atom(0) >= 1.0 - kTol)
        throw std::invalid_argument("dislocation: the atom (1,0,...) is excluded");
      if (conservative_ && a.s.dust() > kTol)
        throw std::invalid_argument("dislocation: conservative atoms required in conservative mode");
    }
  for (double v : c_)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("dislocation: c_j must be non-negative");
  for (double v : k_)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("dislocation: k_j must be non-negative");
  if (conservative_) {
    for (double v : c_)
      if (v != 0.0) throw std::invalid_argument("dislocation: c_j must vanish in conservative mode");
    for (double v : k_)
      if (v != 0.0) throw std::invalid_argument("dislocation: k_j must vanish in conservative mode");
  }
}

const std::vector<DislocationAtom>& DiscreteDislocation::level(int j) const {
  if (j < 1) throw std::invalid_argument("dislocation: level index must be positive");
  return levels_[static_cast<std::size_t>(std::min(j, m_cap()) - 1)];
}

double DiscreteDislocation::c(int j) const {
  return j >= 1 && j <= static_cast<int>(c_.size()) ? c_[j - 1] : 0.0;
}

double DiscreteDislocation::k(int j) const {
  return j >= 1 && j <= static_cast<int>(k_.size()) ? k_[j - 1] : 0.0;
}

DiscreteDislocation single_atom_dislocation(const MassPartition& s, double w, bool all_levels) {
  std::vector<std::vector<DislocationAtom>> levels;
  levels.push_back({{s, w}});
  if (!all_levels) levels.emplace_back();
  return DiscreteDislocation(std::move(levels), {}, {}, s.dust() <= kTol);
}

double SplittingRuleTable::prob(const Partition& p) const {
  auto it = probs.find(p);
  return it == probs.end() ? 0.0 : it->second;
}

double SplittingRuleTable::total() const {
  double t = 0.0;
  for (auto& kv : probs) t += kv.second;
  return t;
}

FiniteMeasureOnPartitions SplittingRuleTable::as_measure() const {
  FiniteMeasureOnPartitions mu;
  mu.n = n;
  mu.weights = probs;
  mu.weights[trivial_partition(n)] = 0.0;
  return mu;
}

std::string SplittingRuleTable::to_csv() const {
  std::string out = "partition,probability\n";
  for (auto& [p, v] : probs) out += p.to_string() + ',' + format_double(v) + '\n';
  return out;
}

SplittingRuleTable SplittingRuleTable::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "partition,probability")
    throw std::invalid_argument("splitting table: bad CSV header");
  SplittingRuleTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.rfind(',');
    if (comma == std::string::npos) throw std::invalid_argument("splitting table: bad CSV row");
    Partition p = Partition::parse(line.substr(0, comma));
    double v = std::stod(line.substr(comma + 1));
    if (t.n == 0) t.n = p.n();
    if (p.n() != t.n) throw std::invalid_argument("splitting table: mixed ground sets");
    t.probs[p] = v;
  }
  return t;
}

double nu_mixture_weight(const DiscreteDislocation& d, const MassPartition& atom) {
  double total = 0.0;
  bool found = false;
  for (int j = 1; j <= d.m_cap(); ++j)
    for (auto& a : d.level(j)) {
      if (!a.s.approx_equal(atom)) continue;
      found = true;
      if (j < d.m_cap()) {
        for (double si : a.s.atoms()) total += a.weight * std::pow(si, j) * (1.0 - si);
      } else {
        // sum_{l >= m} s^l (1 - s) = s^m
        for (double si : a.s.atoms()) total += a.weight * std::pow(si, j);
      }
    }
  if (!found) throw std::invalid_argument("nu_mixture_weight: atom not present in the dislocation");
  return total;
}

double kappa_cylinder(const DiscreteDislocation& d, const Partition& p) {
  if (p.is_trivial()) throw std::invalid_argument("kappa_cylinder: trivial partition");
  const int n = p.n();
  const int j = restricted_class(p);
  double total = 0.0;
  for (auto& a : d.level(j)) total += a.weight * kingman_cylinder_prob(a.s, p);
  if (p.size() == 2) {
    if (p == epsilon_partition(1, n)) total += d.c(1);
    for (int x = 2; x <= n; ++x)
      if (p == epsilon_partition(x, n)) total += d.c(x - 1);
  }
  for (int jj = 1; jj < n; ++jj)
    if (p == omega_partition(jj, n)) total += d.k(jj);
  return total;
}

double rate(const DiscreteDislocation& d, int n) {
  if (n < 2) throw std::invalid_argument("rate: n must be at least 2");
  double total = 0.0;
  for (int j = 1; j <= std::min(n - 1, d.m_cap() - 1); ++j)
    for (auto& a : d.level(j)) total += a.weight * class_mass(a.s, j);
  for (auto& a : d.level(d.m_cap())) total += a.weight * tail_class_mass(a.s, d.m_cap(), n);
  total += d.c(1);
  for (int x = 2; x <= n; ++x) total += d.c(x - 1);
  for (int jj = 1; jj < n; ++jj) total += d.k(jj);
  return total;
}

SplittingRuleTable splitting_rule(const DiscreteDislocation& d, int n) {
  if (n < 2) throw std::invalid_argument("splitting_rule: n must be at least 2");
  if (n > 12) throw ResourceError("splitting_rule: exhaustive tables limited to n <= 12");
  double lambda = rate(d, n);
  if (!(lambda > 0.0)) throw ModelError("splitting_rule: zero split rate");
  SplittingRuleTable t;
  t.n = n;
  for_each_partition(n, [&](const Partition& p) {
    if (!p.is_trivial()) t.probs.emplace(p, kappa_cylinder(d, p) / lambda);
  });
  return t;
}

Partition sample_split(const DiscreteDislocation& d, int n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("sample_split: n must be at least 2");
  struct Component {
    int kind;  // 0 level j, 1 tail, 2 epsilon, 3 omega
    int j;
    const DislocationAtom* atom;
  };
  std::vector<Component> comps;
  std::vector<double> mass;
  for (int j = 1; j <= std::min(n - 1, d.m_cap() - 1); ++j)
    for (auto& a : d.level(j)) {
      comps.push_back({0, j, &a});
      mass.push_back(a.weight * class_mass(a.s, j));
    }
  for (auto& a : d.level(d.m_cap())) {
    comps.push_back({1, d.m_cap(), &a});
    mass.push_back(a.weight * tail_class_mass(a.s, d.m_cap(), n));
  }
  comps.push_back({2, 1, nullptr});
  mass.push_back(d.c(1));
  for (int x = 2; x <= n; ++x) {
    comps.push_back({2, x, nullptr});
    mass.push_back(d.c(x - 1));
  }
  for (int jj = 1; jj < n; ++jj) {
    comps.push_back({3, jj, nullptr});
    mass.push_back(d.k(jj));
  }
  double total = 0.0;
  for (double m : mass) total += m;
  if (!(total > 0.0)) throw ModelError("sample_split: zero split rate");

  const Component& c = comps[pick(mass, rng)];
  if (c.kind == 2) return epsilon_partition(c.j, n);
  if (c.kind == 3) return omega_partition(c.j, n);
  const MassPartition& s = c.atom->s;
  std::vector<double> w;
  if (c.kind == 0) {
    for (double si : s.atoms()) w.push_back(std::pow(si, c.j) * (1.0 - si));
    w.push_back(c.j == 1 ? s.dust() : 0.0);
    std::size_t i = pick(w, rng);
    if (i == s.m()) return paint_dust_first(s, n, rng);
    return paint_in_class(s, static_cast<long>(i), c.j, n, rng);
  }
  const int m = c.j;
  for (double si : s.atoms()) w.push_back(std::pow(si, m) - std::pow(si, n));
  w.push_back(m == 1 ? s.dust() : 0.0);
  std::size_t i = pick(w, rng);
  if (i == s.m()) return paint_dust_first(s, n, rng);
  // Class j in [m, n-1] with probability proportional to s^j.
  double si = s.atom(i);
  double top = std::pow(si, m);
  double u = rng.uniform() * (top - std::pow(si, n));
  int j = static_cast<int>(std::ceil(std::log(top - u) / std::log(si))) - 1;
  j = std::clamp(j, m, n - 1);
  return paint_in_class(s, static_cast<long>(i), j, n, rng);
}

std::map<std::pair<int, std::vector<int>>, double> extract_eppf(const SplittingRuleTable& t) {
  if (!classify_exchangeability(t.as_measure()).restricted_exchangeable)
    throw ModelError("extract_eppf: table is not restricted exchangeable");
  std::map<std::pair<int, std::vector<int>>, double> eppf;
  for (auto& [p, v] : t.probs) eppf.emplace(std::make_pair(restricted_class(p), p.sizes()), v);
  return eppf;
}

double consistency_residual(const DiscreteDislocation& d, int n) {
  if (n < 2) throw std::invalid_argument("consistency_residual: n must be at least 2");
  auto pn = extract_eppf(splitting_rule(d, n));
  auto pn1 = extract_eppf(splitting_rule(d, n + 1));
  auto at = [&](int j, const std::vector<int>& sizes) {
    auto it = pn1.find({j, sizes});
    return it == pn1.end() ? 0.0 : it->second;
  };
  const double stay = at(n, {n, 1});
  double worst = 0.0;
  for (auto& [key, v] : pn) {
    const auto& [j, sizes] = key;
    double rhs = stay * v;
    for (std::size_t i = 0; i <= sizes.size(); ++i) {
      auto grown = sizes;
      if (i == sizes.size())
        grown.push_back(1);
      else
        ++grown[i];
      rhs += at(j, grown);
    }
    worst = std::max(worst, std::abs(v - rhs));
  }
  return worst;
}

double consistency_residual(const SplittingRuleTable& pn, const SplittingRuleTable& pn1) {
  const int n = pn.n;
  if (pn1.n != n + 1) throw std::invalid_argument("consistency_residual: tables must be for n and n+1");
  const double stay = pn1.prob(Partition(n + 1, {trivial_partition(n).block(0), {n + 1}}));
  double worst = 0.0;
  for (auto& [p, v] : pn.probs) {
    double rhs = stay * v;
    for (std::size_t i = 0; i <= p.size(); ++i) {
      auto blocks = p.blocks();
      if (i == blocks.size())
        blocks.push_back({n + 1});
      else
        blocks[i].push_back(n + 1);
      rhs += pn1.prob(Partition(n + 1, std::move(blocks)));
    }
    worst = std::max(worst, std::abs(v - rhs));
  }
  return worst;
}

std::map<Hierarchy, double> alphagamma_tree_law(double alpha, double gamma, int n) {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(gamma >= 0.0 && gamma <= alpha))
    throw std::invalid_argument("alphagamma: need 0 <= gamma <= alpha <= 1");
  if (n < 1) throw std::invalid_argument("alphagamma: n must be positive");
  if (n > 7) throw ResourceError("alphagamma: exhaustive enumeration limited to n <= 7");
  using State = std::vector<std::uint32_t>;
  std::map<State, double> law;
  if (n == 1) {
    law[{1u}] = 1.0;
  } else {
    law[{1u, 2u, 3u}] = 1.0;
  }
  for (int m = 2; m < n; ++m) {
    std::map<State, double> next;
    const std::uint32_t nb = 1u << m;
    const double denom = m - alpha;
    for (auto& [state, q] : law) {
      auto insert = [&](std::uint32_t b, bool edge, double w) {
        if (w <= 0.0) return;
        State t;
        t.reserve(state.size() + 2);
        for (auto a : state) t.push_back((a & b) == b ? (a | nb) : a);
        if (edge) t.push_back(b);
        t.push_back(nb);
        std::sort(t.begin(), t.end());
        next[t] += q * w / denom;
      };
      for (auto b : state) {
        if (__builtin_popcount(b) == 1) {
          insert(b, true, 1.0 - alpha);
          continue;
        }
        int kids = 0;
        for (auto a : state) {
          if (a == b || (a & b) != a) continue;
          bool maximal = true;
          for (auto c : state)
            if (c != a && c != b && (c & b) == c && (a & c) == a) {
              maximal = false;
              break;
            }
          if (maximal) ++kids;
        }
        double vw = (kids - 1) * alpha - gamma;
        if (vw < -1e-15) throw std::logic_error("alphagamma: negative vertex weight");
        insert(b, true, gamma);
        insert(b, false, vw);
      }
    }
    law = std::move(next);
  }
  std::map<Hierarchy, double> out;
  for (auto& [state, q] : law) {
    std::set<Block> members;
    for (auto a : state) {
      Block b;
      for (int i = 0; i < n; ++i)
        if (a & (1u << i)) b.push_back(i + 1);
      members.insert(std::move(b));
    }
    out[Hierarchy(n, std::move(members))] += q;
  }
  return out;
}

SplittingRuleTable alphagamma_growth_split_oracle(double alpha, double gamma, int n) {
  if (n < 2) throw std::invalid_argument("alphagamma oracle: n must be at least 2");
  auto law = alphagamma_tree_law(alpha, gamma, n);
  SplittingRuleTable t;
  t.n = n;
  for_each_partition(n, [&](const Partition& p) {
    if (!p.is_trivial()) t.probs.emplace(p, 0.0);
  });
  Block full = trivial_partition(n).block(0);
  for (auto& [h, q] : law) t.probs[Partition(n, children_of(h, full))] += q;
  return t;
}

double alphagamma_eppf(double alpha, double gamma, const std::vector<int>& sizes, int cls) {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(gamma >= 0.0 && gamma <= alpha))
    throw std::invalid_argument("alphagamma_eppf: need 0 <= gamma <= alpha <= 1");
  if (cls != 1 && cls != 2) throw std::invalid_argument("alphagamma_eppf: class must be 1 or 2");
  if (sizes.size() < 2) throw std::invalid_argument("alphagamma_eppf: at least two blocks required");
  int n = 0;
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("alphagamma_eppf: block sizes must be positive");
    n += s;
  }
  const int k = static_cast<int>(sizes.size());
  double v = cls == 1 ? 1.0 - alpha : gamma;
  // Gamma(2-a)/Gamma(n+1-a)
  for (int m = 2; m <= n; ++m) v /= m - alpha;
  // a^{k-2} Gamma(k-1-g/a)/Gamma(1-g/a) as a product, finite at g = a
  for (int i = 1; i <= k - 2; ++i) v *= i * alpha - gamma;
  // Gamma(n_i-a)/Gamma(1-a)
  for (int s : sizes)
    for (int m = 1; m < s; ++m) v *= m - alpha;
  return v;
}

SplittingRuleTable skewed_pd_split_table(double alpha, double theta, double lambda, int n) {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(theta >= -2.0 * alpha) || !(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("skewed_pd: parameters out of range");
  if (n < 2) throw std::invalid_argument("skewed_pd: n must be at least 2");
  if (n > 12) throw ResourceError("skewed_pd: exhaustive tables limited to n <= 12");
  SplittingRuleTable t;
  t.n = n;
  double total = 0.0;
  for_each_partition(n, [&](const Partition& p) {
    if (p.is_trivial()) return;
    double v = restricted_class(p) == 1 ? lambda : 1.0 - lambda;
    for (int i = 1; i <= static_cast<int>(p.size()) - 2; ++i) v *= theta + (i + 1) * alpha;
    for (auto& b : p.blocks())
      for (int m = 1; m < static_cast<int>(b.size()); ++m) v *= m - alpha;
    t.probs.emplace(p, v);
    total += v;
  });
  if (!(total > 0.0)) throw ModelError("skewed_pd: degenerate parameters give a zero split rate");
  for (auto& kv : t.probs) kv.second /= total;
  return t;
}

std::map<std::vector<int>, double> skewed_pd_ranked_split(double alpha, double theta, double lambda, int n) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(theta >= -2.0 * alpha) || !(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("skewed_pd_ranked_split: parameters out of range");
  const double a = alpha, th = theta, l = lambda;
  if (n == 2) return {{{1, 1}, 1.0}};
  if (n == 3) {
    double p111 = l * (2 * a + th);
    double p21 = (1 + l) * (1 - a);
    double d3 = p111 + p21;
    return {{{1, 1, 1}, p111 / d3}, {{2, 1}, p21 / d3}};
  }
  if (n == 4) {
    double p1111 = l * (3 * a + th) * (2 * a + th);
    double p211 = (1 + 4 * l) * (2 * a + th) * (1 - a);
    double p22 = (1 + l) * (1 - a) * (1 - a);
    double p31 = 2 * (1 - a) * (2 - a);
    double d4 = p1111 + p211 + p22 + p31;
    return {{{1, 1, 1, 1}, p1111 / d4}, {{2, 1, 1}, p211 / d4}, {{2, 2}, p22 / d4}, {{3, 1}, p31 / d4}};
  }
  throw std::invalid_argument("skewed_pd_ranked_split: n must be 2, 3 or 4");
}

double sampling_consistency_residual(double alpha, double theta, double lambda) {
  auto s3 = skewed_pd_ranked_split(alpha, theta, lambda, 3);
  auto s4 = skewed_pd_ranked_split(alpha, theta, lambda, 4);
  double lhs = s3[{1, 1, 1}];
  double rhs = s4[{1, 1, 1, 1}] + 0.5 * s4[{2, 1, 1}] + 0.25 * s4[{3, 1}] * s3[{1, 1, 1}];
  return std::abs(lhs - rhs);
}

std::map<std::vector<int>, double> ranked_marginal(const SplittingRuleTable& t) {
  std::map<std::vector<int>, double> out;
  for (auto& [p, v] : t.probs) out[block_size_multiset(p)] += v;
  return out;
}

}  // namespace rxt
