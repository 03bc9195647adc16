#include "rxt/treemetric.hpp"

#include <algorithm>
#include <bit>
#include <climits>
#include <cmath>
#include <map>
#include <stdexcept>

#include "rxt/errors.hpp"
#include "rxt/growth.hpp"
#include "rxt/stats.hpp"

namespace rxt {

namespace {

constexpr double kEps = 1e-12;
constexpr int kExactLeaves = 10;

class CorrespondenceSearch {
 public:
  CorrespondenceSearch(const std::vector<std::vector<double>>& da, const std::vector<std::vector<double>>& db)
      : da_(da), db_(db), na_(static_cast<int>(da.size())), nb_(static_cast<int>(db.size())) {}

  // Is there a root-preserving correspondence with distortion <= t?
  bool feasible(double t) {
    rowb_.assign(static_cast<std::size_t>(na_ * nb_ * na_), 0);
    rowa_.assign(static_cast<std::size_t>(na_ * nb_ * nb_), 0);
    for (int a = 0; a < na_; ++a)
      for (int b = 0; b < nb_; ++b) {
        for (int a2 = 0; a2 < na_; ++a2) {
          std::uint64_t m = 0;
          for (int b2 = 0; b2 < nb_; ++b2)
            if (std::abs(da_[a][a2] - db_[b][b2]) <= t + kEps) m |= std::uint64_t{1} << b2;
          rowb_[idx(a, b, a2, na_)] = m;
        }
        for (int b2 = 0; b2 < nb_; ++b2) {
          std::uint64_t m = 0;
          for (int a2 = 0; a2 < na_; ++a2)
            if (std::abs(da_[a][a2] - db_[b][b2]) <= t + kEps) m |= std::uint64_t{1} << a2;
          rowa_[idx(a, b, b2, nb_)] = m;
        }
      }
    State s;
    s.dom.assign(static_cast<std::size_t>(na_ + nb_), 0);
    s.done.assign(static_cast<std::size_t>(na_ + nb_), 0);
    const std::uint64_t all_b = nb_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << nb_) - 1;
    const std::uint64_t all_a = na_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << na_) - 1;
    for (int a = 0; a < na_; ++a) s.dom[a] = all_b;
    for (int b = 0; b < nb_; ++b) s.dom[na_ + b] = all_a;
    s.done[0] = s.done[na_] = 1;
    if (!apply(s, 0, 0)) return false;
    return search(s);
  }

 private:
  struct State {
    std::vector<std::uint64_t> dom;
    std::vector<char> done;
  };

  std::size_t idx(int a, int b, int c, int nc) const {
    return (static_cast<std::size_t>(a) * nb_ + b) * nc + c;
  }

  // Restricts all open variables to values compatible with the pair (a, b).
  bool apply(State& s, int a, int b) const {
    for (int a2 = 0; a2 < na_; ++a2) {
      if (s.done[a2]) continue;
      s.dom[a2] &= rowb_[idx(a, b, a2, na_)];
      if (!s.dom[a2]) return false;
    }
    for (int b2 = 0; b2 < nb_; ++b2) {
      if (s.done[na_ + b2]) continue;
      s.dom[na_ + b2] &= rowa_[idx(a, b, b2, nb_)];
      if (!s.dom[na_ + b2]) return false;
    }
    return true;
  }

  bool search(const State& s) const {
    int best = -1, best_size = INT_MAX;
    for (int v = 0; v < na_ + nb_; ++v) {
      if (s.done[v]) continue;
      int c = std::popcount(s.dom[v]);
      if (c < best_size) {
        best = v;
        best_size = c;
      }
    }
    if (best < 0) return true;
    for (std::uint64_t m = s.dom[best]; m; m &= m - 1) {
      int val = std::countr_zero(m);
      State next = s;
      next.done[best] = 1;
      bool ok = best < na_ ? apply(next, best, val) : apply(next, val, best - na_);
      if (ok && search(next)) return true;
    }
    return false;
  }

  const std::vector<std::vector<double>>& da_;
  const std::vector<std::vector<double>>& db_;
  int na_, nb_;
  std::vector<std::uint64_t> rowb_, rowa_;
};

// Vertices by distance from the root, ties broken by a label-ordered DFS.
std::vector<int> depth_rank(const MetricTree& t) {
  const int n = t.size();
  std::vector<int> least(static_cast<std::size_t>(n), INT_MAX);
  for (int v = n - 1; v >= 0; --v) {
    const auto& vx = t.vertex(v);
    if (vx.label > 0) least[v] = vx.label;
    for (int c : vx.children) least[v] = std::min(least[v], least[c]);
  }
  std::vector<int> pre(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{0};
  int counter = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    pre[v] = counter++;
    auto ch = t.vertex(v).children;
    std::stable_sort(ch.begin(), ch.end(), [&](int a, int b) { return least[a] > least[b]; });
    for (int c : ch) stack.push_back(c);
  }
  auto dist = t.root_distances();
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) order[v] = v;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return pre[a] < pre[b];
  });
  return order;
}

std::vector<std::string> edge_keys(const MetricTree& t) {
  const int n = t.size();
  std::vector<std::vector<int>> below(static_cast<std::size_t>(n));
  for (int v = n - 1; v >= 0; --v) {
    const auto& vx = t.vertex(v);
    if (vx.label > 0) below[v].push_back(vx.label);
    for (int c : vx.children) below[v].insert(below[v].end(), below[c].begin(), below[c].end());
    std::sort(below[v].begin(), below[v].end());
  }
  std::vector<std::string> keys(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    std::string s;
    for (int x : below[v]) s += (s.empty() ? "" : " ") + std::to_string(x);
    keys[v] = s;
  }
  return keys;
}

std::vector<int> first_labels(int k) {
  std::vector<int> l(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) l[i] = i + 1;
  return l;
}

}  // namespace

bool DistanceMatrix::four_point(double tol) const {
  const std::size_t n = d.size();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        for (std::size_t w = 0; w < n; ++w)
          if (d[x][y] + d[z][w] > std::max(d[x][z] + d[y][w], d[x][w] + d[y][z]) + tol) return false;
  return true;
}

DistanceMatrix distance_matrix(const MetricTree& t) {
  DistanceMatrix m;
  for (auto& v : t.vertices()) m.labels.push_back(v.label);
  m.d = t.distance_matrix();
  return m;
}

double gh_distance_rooted(const MetricTree& a, const MetricTree& b) {
  if (a.leaf_count() > kExactLeaves || b.leaf_count() > kExactLeaves || a.size() > 64 || b.size() > 64)
    throw UnsupportedError("gh_distance_rooted: exact computation limited to 10 leaves");
  const auto da = a.distance_matrix();
  const auto db = b.distance_matrix();
  std::vector<double> cand;
  for (auto& ra : da)
    for (double x : ra)
      for (auto& rb : db)
        for (double y : rb) cand.push_back(std::abs(x - y));
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  CorrespondenceSearch cs(da, db);
  std::size_t lo = 0, hi = cand.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (cs.feasible(cand[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return cand[lo] / 2.0;
}

double gh_upper_bound(const MetricTree& a, const MetricTree& b) {
  const auto ra = depth_rank(a), rb = depth_rank(b);
  const std::size_t na = ra.size(), nb = rb.size();
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t r = 0; r < na; ++r) pairs.push_back({ra[r], rb[r * nb / na]});
  for (std::size_t r = 0; r < nb; ++r) pairs.push_back({ra[r * na / nb], rb[r]});
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  const auto da = a.distance_matrix();
  const auto db = b.distance_matrix();
  double dist = 0.0;
  for (auto& [x, y] : pairs)
    for (auto& [x2, y2] : pairs) dist = std::max(dist, std::abs(da[x][x2] - db[y][y2]));
  return dist / 2.0;
}

std::string topology_key(const MetricTree& t) {
  std::string s = t.newick(), out;
  bool skip = false;
  for (char c : s) {
    if (c == ':') {
      skip = true;
      continue;
    }
    if (c == ',' || c == ')' || c == ';') skip = false;
    if (!skip) out += c;
  }
  return out;
}

std::vector<EdgeStat> edge_convergence_experiment(const Model& m, int k, const std::vector<int>& n_grid, int reps,
                                                  std::uint64_t seed, int workers) {
  if (k < 1 || reps < 1) throw std::invalid_argument("edge_convergence_experiment: need k >= 1 and reps >= 1");
  const double a = scaling_index(m);
  std::vector<EdgeStat> rows;
  for (int n : n_grid) {
    if (n < k) throw std::invalid_argument("edge_convergence_experiment: n below k");
    const double norm = std::pow(static_cast<double>(n), a) * std::tgamma(1.0 - a);
    const std::string tag = "edge-convergence/" + std::to_string(n);
    std::vector<MetricTree> trees(static_cast<std::size_t>(reps));
    parallel_for(trees.size(), workers, [&](std::size_t r) {
      Rng rng(derive_seed(seed, tag, r));
      trees[r] = reduced_tree(sample_tree(m, n, rng), first_labels(k)).scaled(1.0 / norm);
    });
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (auto& t : trees) {
      const std::string shape = topology_key(t);
      const auto keys = edge_keys(t);
      for (int v = 1; v < t.size(); ++v) groups[{shape, keys[v]}].push_back(t.vertex(v).length);
    }
    for (auto& [key, xs] : groups)
      rows.push_back({n, key.first, key.second, mean(xs), variance(xs), static_cast<long>(xs.size())});
  }
  return rows;
}

ExponentFit scaling_exponent(const Model& m, const std::vector<int>& n_grid, int reps, HeightStatistic stat,
                             std::uint64_t seed, int workers) {
  if (n_grid.size() < 3) throw std::invalid_argument("scaling_exponent: at least 3 grid points required");
  if (reps < 1) throw std::invalid_argument("scaling_exponent: reps must be positive");
  ExponentFit fit;
  std::vector<double> lx, ly;
  for (int n : n_grid) {
    if (n < 1) throw std::invalid_argument("scaling_exponent: grid values must be positive");
    const std::string tag = "exponent/" + std::to_string(n);
    std::vector<double> vals(static_cast<std::size_t>(reps));
    parallel_for(vals.size(), workers, [&](std::size_t r) {
      Rng rng(derive_seed(seed, tag, r));
      GrownTree t = sample_tree(m, n, rng);
      if (stat == HeightStatistic::height) {
        vals[r] = t.height();
      } else {
        auto depth = t.node_depths();
        double s = 0.0;
        for (int l = 1; l <= n; ++l) s += depth[t.leaf_node(l)];
        vals[r] = s / n;
      }
    });
    const double mu = mean(vals);
    fit.means.push_back(mu);
    fit.mean_errors.push_back(std::sqrt(variance(vals) / reps));
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(mu));
  }
  auto o = ols(lx, ly);
  fit.slope = o.slope;
  fit.std_error = o.slope_se;
  return fit;
}

std::vector<StabilizationRow> gh_stabilization(const AlphaGammaModel& m, int k, const std::vector<int>& ns, int pairs,
                                               std::uint64_t seed, int workers) {
  if (k < 1 || k > kExactLeaves || pairs < 1) throw std::invalid_argument("gh_stabilization: need 1 <= k <= 10, pairs >= 1");
  std::vector<StabilizationRow> rows;
  for (int n : ns) {
    if (n < k) throw std::invalid_argument("gh_stabilization: n below k");
    const std::string tag = "gh-stabilize/" + std::to_string(n);
    std::vector<double> d(static_cast<std::size_t>(pairs));
    parallel_for(d.size(), workers, [&](std::size_t r) {
      Rng rng(derive_seed(seed, tag, r));
      AlphaGammaGrower g(m.alpha, m.gamma);
      g.grow_to(n, rng);
      auto small = reduced_tree(g.tree(), first_labels(k)).scaled(std::pow(static_cast<double>(n), -m.gamma));
      g.grow_to(4 * n, rng);
      auto large = reduced_tree(g.tree(), first_labels(k)).scaled(std::pow(4.0 * n, -m.gamma));
      d[r] = gh_distance_rooted(small, large);
    });
    rows.push_back({n, median(d), pairs});
  }
  return rows;
}

std::vector<double> fill_fraction(const AlphaGammaModel& m, int n, const std::vector<int>& ks, double eps, int reps,
                                  std::uint64_t seed, int workers) {
  if (reps < 1 || !(eps > 0.0)) throw std::invalid_argument("fill_fraction: need reps >= 1 and eps > 0");
  for (int k : ks)
    if (k < 1 || k > n) throw std::invalid_argument("fill_fraction: k out of range");
  const double thr = eps * std::pow(static_cast<double>(n), m.gamma);
  std::vector<std::vector<double>> frac(static_cast<std::size_t>(reps));
  parallel_for(frac.size(), workers, [&](std::size_t r) {
    Rng rng(derive_seed(seed, "fill", r));
    GrownTree t = grow_alphagamma(m.alpha, m.gamma, n, rng);
    std::vector<int> pre;
    std::vector<int> stack{t.root()};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      pre.push_back(v);
      for (int c : t.node(v).children) stack.push_back(c);
    }
    for (int k : ks) {
      std::vector<char> marked(static_cast<std::size_t>(t.node_count()), 0);
      for (int l = 1; l <= k; ++l)
        for (int v = t.leaf_node(l); v >= 0 && !marked[v]; v = t.node(v).parent) marked[v] = 1;
      std::vector<int> dist(static_cast<std::size_t>(t.node_count()), 0);
      for (int v : pre) dist[v] = marked[v] ? 0 : dist[t.node(v).parent] + 1;
      int close = 0;
      for (int l = 1; l <= n; ++l)
        if (dist[t.leaf_node(l)] <= thr) ++close;
      frac[r].push_back(static_cast<double>(close) / n);
    }
  });
  std::vector<double> out(ks.size(), 0.0);
  for (auto& f : frac)
    for (std::size_t i = 0; i < ks.size(); ++i) out[i] += f[i] / reps;
  return out;
}

}  // namespace rxt
