#include "rxt/tree.hpp"

#include <algorithm>
#include <charconv>
#include <climits>
#include <stdexcept>

namespace rxt {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Nodes in an order where every child precedes its parent.
template <class Children>
std::vector<int> postorder(int root, int count, const Children& children) {
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(count));
  std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [v, i] = stack.back();
    const auto& ch = children(v);
    if (i < ch.size()) {
      int c = ch[i++];
      stack.push_back({c, 0});
    } else {
      order.push_back(v);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace

GrownTree GrownTree::single_leaf() {
  GrownTree t;
  t.add_leaf(-1, 1);
  t.finalize();
  return t;
}

GrownTree GrownTree::cherry() { return star(2); }

GrownTree GrownTree::star(int n) {
  if (n < 1) throw std::invalid_argument("star: n must be positive");
  if (n == 1) return single_leaf();
  GrownTree t;
  int r = t.add_internal(-1);
  for (int i = 1; i <= n; ++i) t.add_leaf(r, i);
  t.finalize();
  return t;
}

GrownTree GrownTree::from_hierarchy(const Hierarchy& h) {
  GrownTree t;
  const int n = h.n();
  std::vector<std::pair<int, Block>> stack;
  Block full(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) full[i] = i + 1;
  stack.push_back({-1, full});
  while (!stack.empty()) {
    auto [parent, b] = std::move(stack.back());
    stack.pop_back();
    if (b.size() == 1) {
      t.add_leaf(parent, b[0]);
      continue;
    }
    int v = t.add_internal(parent);
    auto kids = children_of(h, b);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({v, std::move(*it)});
  }
  t.finalize();
  return t;
}

int GrownTree::add_internal(int parent) {
  int v = static_cast<int>(nodes_.size());
  nodes_.push_back({parent, {}, 0});
  if (parent < 0)
    root_ = v;
  else
    nodes_[parent].children.push_back(v);
  return v;
}

int GrownTree::add_leaf(int parent, int label) {
  if (label < 1) throw std::invalid_argument("GrownTree: leaf labels must be positive");
  int v = add_internal(parent);
  nodes_[v].label = label;
  if (static_cast<int>(leaf_.size()) < label) leaf_.resize(static_cast<std::size_t>(label), -1);
  leaf_[label - 1] = v;
  return v;
}

void GrownTree::reindex() {
  leaf_.clear();
  for (int v = 0; v < static_cast<int>(nodes_.size()); ++v) {
    const int l = nodes_[v].label;
    if (l <= 0) continue;
    if (static_cast<int>(leaf_.size()) < l) leaf_.resize(static_cast<std::size_t>(l), -1);
    leaf_[l - 1] = v;
  }
}

void GrownTree::finalize() {
  if (root_ < 0) throw std::invalid_argument("GrownTree: empty tree");
  reindex();
  int leaves = 0;
  for (auto& nd : nodes_) {
    if (nd.label > 0) {
      ++leaves;
      if (!nd.children.empty()) throw std::invalid_argument("GrownTree: labelled vertex with children");
    } else if (nd.children.size() < 2) {
      throw std::invalid_argument("GrownTree: internal vertex with fewer than two children");
    }
  }
  if (leaves != static_cast<int>(leaf_.size()) ||
      std::find(leaf_.begin(), leaf_.end(), -1) != leaf_.end())
    throw std::invalid_argument("GrownTree: leaf labels must be exactly 1..n");
}

int GrownTree::leaf_node(int label) const {
  if (label < 1 || label > n()) throw std::invalid_argument("GrownTree: label out of range");
  return leaf_[label - 1];
}

std::vector<Block> GrownTree::blocks() const {
  std::vector<Block> out(nodes_.size());
  auto order = postorder(root_, node_count(), [&](int v) -> const std::vector<int>& { return nodes_[v].children; });
  for (int v : order) {
    if (nodes_[v].label > 0) {
      out[v] = {nodes_[v].label};
      continue;
    }
    Block b;
    for (int c : nodes_[v].children) b.insert(b.end(), out[c].begin(), out[c].end());
    std::sort(b.begin(), b.end());
    out[v] = std::move(b);
  }
  return out;
}

Hierarchy GrownTree::to_hierarchy() const {
  auto bl = blocks();
  std::set<Block> members;
  for (int v = 0; v < node_count(); ++v)
    if (!bl[v].empty()) members.insert(std::move(bl[v]));
  return Hierarchy(n(), std::move(members));
}

std::string GrownTree::newick() const {
  std::vector<std::string> text(nodes_.size());
  std::vector<int> least(nodes_.size(), INT_MAX);
  auto order = postorder(root_, node_count(), [&](int v) -> const std::vector<int>& { return nodes_[v].children; });
  for (int v : order) {
    const Node& nd = nodes_[v];
    if (nd.label > 0) {
      text[v] = std::to_string(nd.label);
      least[v] = nd.label;
      continue;
    }
    auto ch = nd.children;
    std::sort(ch.begin(), ch.end(), [&](int a, int b) { return least[a] < least[b]; });
    std::string s = "(";
    for (std::size_t i = 0; i < ch.size(); ++i) {
      if (i) s += ',';
      s += text[ch[i]];
      text[ch[i]].clear();
    }
    s += ')';
    text[v] = std::move(s);
    least[v] = least[ch.front()];
  }
  return text[root_] + ';';
}

std::string GrownTree::shape_key() const {
  std::vector<std::string> key(nodes_.size());
  auto order = postorder(root_, node_count(), [&](int v) -> const std::vector<int>& { return nodes_[v].children; });
  for (int v : order) {
    const Node& nd = nodes_[v];
    if (nd.label > 0) {
      key[v] = "*";
      continue;
    }
    std::vector<std::string> parts;
    for (int c : nd.children) parts.push_back(std::move(key[c]));
    std::sort(parts.begin(), parts.end());
    std::string s = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) s += ',';
      s += parts[i];
    }
    key[v] = s + ')';
  }
  return key[root_];
}

std::vector<int> GrownTree::node_depths() const {
  std::vector<int> depth(nodes_.size(), 0);
  std::vector<int> stack{root_};
  depth[root_] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int c : nodes_[v].children) {
      depth[c] = depth[v] + 1;
      stack.push_back(c);
    }
  }
  return depth;
}

int GrownTree::height() const {
  auto d = node_depths();
  int h = 0;
  for (int v = 0; v < node_count(); ++v)
    if (nodes_[v].label > 0) h = std::max(h, d[v]);
  return h;
}

std::vector<int> GrownTree::leaf_counts() const {
  std::vector<int> cnt(nodes_.size(), 0);
  auto order = postorder(root_, node_count(), [&](int v) -> const std::vector<int>& { return nodes_[v].children; });
  for (int v : order) {
    if (nodes_[v].label > 0) {
      cnt[v] = 1;
      continue;
    }
    for (int c : nodes_[v].children) cnt[v] += cnt[c];
  }
  return cnt;
}

MetricTree::MetricTree() { vertices_.push_back({}); }

int MetricTree::add_vertex(int parent, double length, int label) {
  if (parent < 0 || parent >= size()) throw std::invalid_argument("MetricTree: bad parent");
  if (!(length >= 0.0)) throw std::invalid_argument("MetricTree: negative edge length");
  int v = size();
  vertices_.push_back({parent, length, label, {}});
  vertices_[parent].children.push_back(v);
  return v;
}

int MetricTree::leaf_count() const {
  int c = 0;
  for (int v = 1; v < size(); ++v)
    if (vertices_[v].children.empty()) ++c;
  return c;
}

double MetricTree::total_length() const {
  double t = 0.0;
  for (auto& v : vertices_) t += v.length;
  return t;
}

std::vector<double> MetricTree::root_distances() const {
  // Parents always precede children.
  std::vector<double> d(vertices_.size(), 0.0);
  for (int v = 1; v < size(); ++v) d[v] = d[vertices_[v].parent] + vertices_[v].length;
  return d;
}

double MetricTree::height() const {
  auto d = root_distances();
  return *std::max_element(d.begin(), d.end());
}

std::vector<std::vector<double>> MetricTree::distance_matrix() const {
  const int m = size();
  std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
  for (int v = 1; v < m; ++v) {
    int p = vertices_[v].parent;
    double len = vertices_[v].length;
    for (int u = 0; u < v; ++u) {
      d[v][u] = d[u][v] = u == p ? len : d[p][u] + len;
    }
  }
  return d;
}

MetricTree MetricTree::scaled(double factor) const {
  MetricTree t = *this;
  for (auto& v : t.vertices_) v.length *= factor;
  return t;
}

std::string MetricTree::newick() const {
  std::vector<std::string> text(vertices_.size());
  std::vector<int> least(vertices_.size(), INT_MAX);
  for (int v = size() - 1; v >= 0; --v) {
    const Vertex& vx = vertices_[v];
    std::string s;
    if (vx.children.empty()) {
      if (vx.label > 0) s = std::to_string(vx.label);
      least[v] = vx.label > 0 ? vx.label : INT_MAX;
    } else {
      auto ch = vx.children;
      std::stable_sort(ch.begin(), ch.end(), [&](int a, int b) { return least[a] < least[b]; });
      s = "(";
      for (std::size_t i = 0; i < ch.size(); ++i) {
        if (i) s += ',';
        s += text[ch[i]];
      }
      s += ')';
      least[v] = least[ch.front()];
      if (vx.label > 0) {
        s += std::to_string(vx.label);
        least[v] = std::min(least[v], vx.label);
      }
    }
    if (v != 0) s += ':' + fmt(vx.length);
    text[v] = std::move(s);
  }
  return text[0] + ';';
}

}  // namespace rxt
