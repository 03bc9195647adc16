#include "rxt/growth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace rxt {

AlphaGammaGrower::AlphaGammaGrower(double alpha, double gamma) : alpha_(alpha), gamma_(gamma) {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(gamma >= 0.0 && gamma <= alpha))
    throw std::invalid_argument("alpha-gamma: need 0 <= gamma <= alpha <= 1");
  tree_ = GrownTree::single_leaf();
}

void AlphaGammaGrower::insert_edge(int v) {
  auto& nodes = tree_.nodes();
  const int label = tree_.n() + 1;
  const int parent = nodes[v].parent;
  int u = tree_.add_internal(parent);
  if (parent >= 0) {
    auto& ch = nodes[parent].children;
    ch.pop_back();
    *std::find(ch.begin(), ch.end(), v) = u;
  } else {
    tree_.set_root(u);
  }
  nodes[v].parent = u;
  nodes[u].children.push_back(v);
  tree_.add_leaf(u, label);
  slots_.push_back(u);
}

void AlphaGammaGrower::insert_vertex(int v) {
  tree_.add_leaf(v, tree_.n() + 1);
  slots_.push_back(v);
}

void AlphaGammaGrower::step(Rng& rng) {
  const int n = tree_.n();
  if (n == 1) {
    insert_edge(tree_.leaf_node(1));
    return;
  }
  const double leaf_mass = n * (1.0 - alpha_);
  const double inner_mass = alpha_ * static_cast<double>(slots_.size());
  const double total = n - alpha_;
  if (std::abs(leaf_mass + inner_mass - total) > 1e-9 * n)
    throw std::logic_error("alpha-gamma: selection weights do not sum to n - alpha");
  if (rng.uniform() * total < leaf_mass || inner_mass <= 0.0) {
    insert_edge(tree_.leaf_node(static_cast<int>(rng.below(static_cast<std::uint64_t>(n))) + 1));
    return;
  }
  const int v = slots_[rng.below(slots_.size())];
  const double k = static_cast<double>(tree_.node(v).children.size());
  if ((k - 1.0) * alpha_ - gamma_ < -1e-12) throw std::logic_error("alpha-gamma: negative vertex weight");
  if (rng.uniform() * (k - 1.0) * alpha_ < gamma_)
    insert_edge(v);
  else
    insert_vertex(v);
}

void AlphaGammaGrower::grow_to(int n, Rng& rng) {
  while (tree_.n() < n) step(rng);
}

GrownTree grow_alphagamma(double alpha, double gamma, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("grow_alphagamma: n must be positive");
  AlphaGammaGrower g(alpha, gamma);
  g.grow_to(n, rng);
  return g.tree();
}

namespace {

template <class Split>
GrownTree build_markov_branching(const Split& split, int n) {
  if (n < 1) throw std::invalid_argument("sample_markov_branching: n must be positive");
  GrownTree t;
  Block full(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) full[i] = i + 1;
  std::vector<std::pair<int, Block>> stack{{-1, std::move(full)}};
  while (!stack.empty()) {
    auto [parent, b] = std::move(stack.back());
    stack.pop_back();
    if (b.size() == 1) {
      t.add_leaf(parent, b[0]);
      continue;
    }
    int v = t.add_internal(parent);
    Partition p = split(static_cast<int>(b.size()));
    if (p.n() != static_cast<int>(b.size()) || p.is_trivial())
      throw std::invalid_argument("sample_markov_branching: rule produced an invalid split");
    auto parts = push_forward(p, b);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) stack.push_back({v, std::move(*it)});
  }
  t.finalize();
  return t;
}

}  // namespace

GrownTree sample_markov_branching(const RuleSource& rule_source, int n, Rng& rng) {
  struct Cached {
    std::vector<Partition> parts;
    std::vector<double> cum;
  };
  std::map<int, Cached> cache;
  auto split = [&](int b) {
    auto it = cache.find(b);
    if (it == cache.end()) {
      SplittingRuleTable table = rule_source(b);
      if (table.n != b) throw std::invalid_argument("sample_markov_branching: table size mismatch");
      Cached c;
      double acc = 0.0;
      for (auto& [p, q] : table.probs) {
        if (q <= 0.0) continue;
        acc += q;
        c.parts.push_back(p);
        c.cum.push_back(acc);
      }
      if (c.parts.empty()) throw std::invalid_argument("sample_markov_branching: empty splitting rule");
      it = cache.emplace(b, std::move(c)).first;
    }
    const Cached& c = it->second;
    double u = rng.uniform() * c.cum.back();
    auto pos = std::upper_bound(c.cum.begin(), c.cum.end(), u) - c.cum.begin();
    return c.parts[std::min<std::size_t>(static_cast<std::size_t>(pos), c.parts.size() - 1)];
  };
  return build_markov_branching(split, n);
}

GrownTree sample_markov_branching(const SplitSampler& split, int n, Rng& rng) {
  return build_markov_branching([&](int b) { return split(b, rng); }, n);
}

GrownTree delete_leaf(const GrownTree& t, int label) {
  const int n = t.n();
  if (n < 2) throw std::invalid_argument("delete_leaf: tree has a single leaf");
  if (label < 1 || label > n) throw std::invalid_argument("delete_leaf: label out of range");
  std::set<Block> members;
  for (auto& b : t.blocks()) {
    Block r;
    for (int x : b) {
      if (x == label) continue;
      r.push_back(x > label ? x - 1 : x);
    }
    if (!r.empty()) members.insert(std::move(r));
  }
  return GrownTree::from_hierarchy(Hierarchy(n - 1, std::move(members)));
}

GrownTree delete_uniform_leaf(const GrownTree& t, Rng& rng) {
  if (t.n() < 2) throw std::invalid_argument("delete_uniform_leaf: tree has a single leaf");
  return delete_leaf(t, static_cast<int>(rng.below(static_cast<std::uint64_t>(t.n()))) + 1);
}

int spine_depth(const GrownTree& t, int label) {
  int v = t.leaf_node(label);
  int d = 0;
  for (; v >= 0; v = t.node(v).parent) ++d;
  return d;
}

MetricTree reduced_tree(const GrownTree& t, const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("reduced_tree: empty label set");
  std::vector<char> marked(static_cast<std::size_t>(t.node_count()), 0);
  std::vector<char> chosen(static_cast<std::size_t>(t.node_count()), 0);
  for (int l : labels) {
    int v = t.leaf_node(l);
    chosen[v] = 1;
    for (; v >= 0 && !marked[v]; v = t.node(v).parent) marked[v] = 1;
  }
  MetricTree out;
  struct Item {
    int v, parent;
    double length;
  };
  std::vector<Item> stack{{t.root(), 0, 1.0}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const auto& nd = t.node(it.v);
    if (chosen[it.v]) {
      out.add_vertex(it.parent, it.length, nd.label);
      continue;
    }
    std::vector<int> kids;
    for (int c : nd.children)
      if (marked[c]) kids.push_back(c);
    if (kids.size() == 1) {
      stack.push_back({kids[0], it.parent, it.length + 1.0});
      continue;
    }
    int w = out.add_vertex(it.parent, it.length);
    for (auto c = kids.rbegin(); c != kids.rend(); ++c) stack.push_back({*c, w, 1.0});
  }
  return out;
}

int special_branch_count(const GrownTree& t, int j, int m) {
  if (m < 1) throw std::invalid_argument("special_branch_count: m must be positive");
  const int leaf = t.leaf_node(j);
  std::vector<int> path;
  for (int v = leaf; v >= 0; v = t.node(v).parent) path.push_back(v);
  // m smallest labels below every node, computed on demand with memoization.
  std::vector<std::vector<int>> smallest(static_cast<std::size_t>(t.node_count()));
  std::vector<char> done(static_cast<std::size_t>(t.node_count()), 0);
  auto compute = [&](int root) {
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      const auto& nd = t.node(v);
      if (done[v]) {
        stack.pop_back();
        continue;
      }
      if (i < nd.children.size()) {
        int c = nd.children[i++];
        if (!done[c]) stack.push_back({c, 0});
        continue;
      }
      std::vector<int> s;
      if (nd.label > 0) {
        s.push_back(nd.label);
      } else {
        for (int c : nd.children) s.insert(s.end(), smallest[c].begin(), smallest[c].end());
        std::sort(s.begin(), s.end());
        if (static_cast<int>(s.size()) > m) s.resize(static_cast<std::size_t>(m));
      }
      smallest[v] = std::move(s);
      done[v] = 1;
      stack.pop_back();
    }
  };
  compute(t.root());
  int count = 0;
  for (std::size_t i = path.size() - 1; i >= 1; --i) {
    const auto& sv = smallest[path[i]];
    const auto& sc = smallest[path[i - 1]];
    bool inside = sc.size() >= sv.size() && std::equal(sv.begin(), sv.end(), sc.begin());
    if (!inside) ++count;
  }
  return count;
}

}  // namespace rxt
