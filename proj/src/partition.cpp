#include "rxt/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace rxt {

namespace {

std::string join_block(const Block& b, char sep) {
  std::string out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(b[i]);
  }
  return out;
}

}  // namespace

Partition::Partition(int n, std::vector<Block> blocks) : n_(n), blocks_(std::move(blocks)) {
  if (n < 1) throw std::invalid_argument("partition: n must be positive");
  std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
  for (auto& b : blocks_) {
    if (b.empty()) throw std::invalid_argument("partition: empty block");
    std::sort(b.begin(), b.end());
    for (int x : b) {
      if (x < 1 || x > n) throw std::invalid_argument("partition: label out of range");
      if (seen[x]) throw std::invalid_argument("partition: blocks overlap");
      seen[x] = 1;
    }
  }
  for (int x = 1; x <= n; ++x)
    if (!seen[x]) throw std::invalid_argument("partition: blocks do not cover [n]");
  std::sort(blocks_.begin(), blocks_.end(),
            [](const Block& a, const Block& b) { return a.front() < b.front(); });
}

Partition Partition::from_labels(const std::vector<long>& labels) {
  if (labels.empty()) throw std::invalid_argument("partition: no labels");
  std::unordered_map<long, std::size_t> index;
  std::vector<Block> blocks;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    auto [it, fresh] = index.emplace(labels[r], blocks.size());
    if (fresh) blocks.emplace_back();
    blocks[it->second].push_back(static_cast<int>(r + 1));
  }
  Partition p;
  p.n_ = static_cast<int>(labels.size());
  p.blocks_ = std::move(blocks);  // already canonical
  return p;
}

Partition Partition::from_rgs(const std::vector<int>& rgs) {
  if (rgs.empty()) throw std::invalid_argument("partition: empty growth string");
  std::vector<Block> blocks;
  for (std::size_t r = 0; r < rgs.size(); ++r) {
    auto k = static_cast<std::size_t>(rgs[r]);
    if (rgs[r] < 0 || k > blocks.size())
      throw std::invalid_argument("partition: not a restricted growth string");
    if (k == blocks.size()) blocks.emplace_back();
    blocks[k].push_back(static_cast<int>(r + 1));
  }
  Partition p;
  p.n_ = static_cast<int>(rgs.size());
  p.blocks_ = std::move(blocks);
  return p;
}

Partition Partition::parse(std::string_view text) {
  std::vector<Block> blocks;
  int n = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t bar = text.find('|', start);
    if (bar == std::string_view::npos) bar = text.size();
    std::string_view part = text.substr(start, bar - start);
    Block b;
    std::size_t i = 0;
    while (i < part.size()) {
      while (i < part.size() && part[i] == ' ') ++i;
      if (i == part.size()) break;
      int v = 0;
      auto [ptr, ec] = std::from_chars(part.data() + i, part.data() + part.size(), v);
      if (ec != std::errc()) throw std::invalid_argument("partition: cannot parse '" + std::string(text) + "'");
      i = static_cast<std::size_t>(ptr - part.data());
      b.push_back(v);
      n = std::max(n, v);
    }
    if (b.empty()) throw std::invalid_argument("partition: empty block in '" + std::string(text) + "'");
    blocks.push_back(std::move(b));
    start = bar + 1;
  }
  std::size_t total = 0;
  for (auto& b : blocks) total += b.size();
  if (static_cast<int>(total) != n) throw std::invalid_argument("partition: labels are not exactly 1..n");
  return Partition(n, std::move(blocks));
}

std::vector<int> Partition::sizes() const {
  std::vector<int> out;
  out.reserve(blocks_.size());
  for (auto& b : blocks_) out.push_back(static_cast<int>(b.size()));
  return out;
}

std::string Partition::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (i) out += '|';
    out += join_block(blocks_[i], ' ');
  }
  return out;
}

Partition trivial_partition(int n) {
  Block b(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) b[i] = i + 1;
  return Partition(n, {b});
}

Partition singleton_partition(int n) {
  std::vector<Block> blocks;
  for (int i = 1; i <= n; ++i) blocks.push_back({i});
  return Partition(n, std::move(blocks));
}

Partition restrict_partition(const Partition& p, int m) {
  if (m < 1 || m > p.n()) throw std::invalid_argument("restrict_partition: m out of range");
  std::vector<Block> blocks;
  for (auto& b : p.blocks()) {
    Block t;
    for (int x : b)
      if (x <= m) t.push_back(x);
    if (!t.empty()) blocks.push_back(std::move(t));
  }
  return Partition(m, std::move(blocks));
}

std::vector<int> block_size_multiset(const Partition& p) {
  auto s = p.sizes();
  std::sort(s.begin(), s.end(), std::greater<int>());
  return s;
}

int restricted_class(const Partition& p) {
  if (p.is_trivial()) return 0;
  return p.block(1).front() - 1;
}

void for_each_partition(int n, const std::function<void(const Partition&)>& f) {
  if (n < 1) throw std::invalid_argument("for_each_partition: n must be positive");
  std::vector<int> rgs(static_cast<std::size_t>(n), 0);
  std::vector<int> maxp(static_cast<std::size_t>(n), 0);  // max of rgs[0..i-1]
  while (true) {
    f(Partition::from_rgs(rgs));
    int i = n - 1;
    while (i > 0 && rgs[i] > maxp[i]) --i;
    if (i == 0) break;
    ++rgs[i];
    for (int j = i + 1; j < n; ++j) {
      rgs[j] = 0;
      maxp[j] = std::max(maxp[j - 1], rgs[j - 1]);
    }
  }
}

std::vector<Partition> enumerate_partitions(int n) {
  if (n > 12) throw std::invalid_argument("enumerate_partitions: n > 12");
  std::vector<Partition> out;
  out.reserve(bell_number(n));
  for_each_partition(n, [&](const Partition& p) { out.push_back(p); });
  return out;
}

unsigned long long bell_number(int n) {
  // Bell triangle.
  std::vector<unsigned long long> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<unsigned long long> next{row.back()};
    for (auto v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

std::vector<Block> push_forward(const Partition& p, const Block& target) {
  if (static_cast<int>(target.size()) != p.n())
    throw std::invalid_argument("push_forward: size mismatch");
  std::vector<Block> out;
  out.reserve(p.size());
  for (auto& b : p.blocks()) {
    Block t;
    t.reserve(b.size());
    for (int x : b) t.push_back(target[x - 1]);
    out.push_back(std::move(t));
  }
  return out;
}

Partition standardize(const std::vector<Block>& blocks_of_b) {
  Block all;
  for (auto& b : blocks_of_b) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  std::vector<Block> blocks;
  for (auto& b : blocks_of_b) {
    Block t;
    for (int x : b)
      t.push_back(static_cast<int>(std::lower_bound(all.begin(), all.end(), x) - all.begin()) + 1);
    blocks.push_back(std::move(t));
  }
  return Partition(static_cast<int>(all.size()), std::move(blocks));
}

MassPartition::MassPartition(std::vector<double> atoms) : atoms_(std::move(atoms)) {
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    double a = atoms_[i];
    if (!(a > 0.0) || a > 1.0 || !std::isfinite(a))
      throw std::invalid_argument("mass partition: atoms must lie in (0,1]");
    if (i > 0 && a > atoms_[i - 1]) throw std::invalid_argument("mass partition: atoms must be non-increasing");
    sum += a;
  }
  if (sum > 1.0 + 1e-12) throw std::invalid_argument("mass partition: atoms sum above 1");
  dust_ = std::clamp(1.0 - sum, 0.0, 1.0);
}

bool MassPartition::approx_equal(const MassPartition& o, double tol) const {
  if (atoms_.size() != o.atoms_.size()) return false;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (std::abs(atoms_[i] - o.atoms_[i]) > tol) return false;
  return true;
}

std::string MassPartition::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < atoms_.size(); ++i) os << (i ? "," : "") << atoms_[i];
  os << ')';
  return os.str();
}

Hierarchy::Hierarchy(int n, std::set<Block> members) : n_(n), members_(std::move(members)) {
  if (n < 1) throw std::invalid_argument("hierarchy: n must be positive");
  members_.insert(Block{});
  for (auto& b : members_) {
    if (!std::is_sorted(b.begin(), b.end()) || std::adjacent_find(b.begin(), b.end()) != b.end())
      throw std::invalid_argument("hierarchy: members must be sorted sets");
    if (!b.empty() && (b.front() < 1 || b.back() > n))
      throw std::invalid_argument("hierarchy: label out of range");
  }
  Block full(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) full[i] = i + 1;
  if (!members_.count(full)) throw std::invalid_argument("hierarchy: missing ground set");
  for (int i = 1; i <= n; ++i)
    if (!members_.count(Block{i})) throw std::invalid_argument("hierarchy: missing singleton");
  // Laminarity: process by decreasing size; all elements of a new member
  // must currently sit in the same smallest container.
  std::vector<const Block*> order;
  for (auto& b : members_)
    if (!b.empty()) order.push_back(&b);
  std::stable_sort(order.begin(), order.end(),
                   [](const Block* a, const Block* b) { return a->size() > b->size(); });
  std::vector<std::size_t> container(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t id = 0; id < order.size(); ++id) {
    const Block& b = *order[id];
    std::size_t c = container[b.front()];
    for (int x : b)
      if (container[x] != c) throw std::invalid_argument("hierarchy: members are not laminar");
    for (int x : b) container[x] = id + 1;
  }
}

std::string Hierarchy::to_string() const {
  std::string out = "{";
  bool first = true;
  for (auto& b : members_) {
    if (!first) out += ',';
    first = false;
    out += '{' + join_block(b, ',') + '}';
  }
  return out + '}';
}

Hierarchy restrict_hierarchy(const Hierarchy& h, int m) {
  if (m < 1 || m > h.n()) throw std::invalid_argument("restrict_hierarchy: m out of range");
  std::set<Block> out;
  for (auto& b : h.members()) {
    Block t;
    for (int x : b)
      if (x <= m) t.push_back(x);
    out.insert(std::move(t));
  }
  return Hierarchy(m, std::move(out));
}

std::vector<Block> children_of(const Hierarchy& h, const Block& b) {
  if (!h.contains(b)) throw std::invalid_argument("children_of: block not in hierarchy");
  if (b.size() < 2) throw std::invalid_argument("children_of: block must have at least 2 elements");
  std::vector<const Block*> subs;
  for (auto& a : h.members())
    if (!a.empty() && a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end()))
      subs.push_back(&a);
  std::vector<Block> out;
  for (auto* a : subs) {
    bool maximal = true;
    for (auto* c : subs)
      if (c != a && c->size() > a->size() && std::includes(c->begin(), c->end(), a->begin(), a->end())) {
        maximal = false;
        break;
      }
    if (maximal) out.push_back(*a);
  }
  std::sort(out.begin(), out.end(), [](const Block& x, const Block& y) { return x.front() < y.front(); });
  return out;
}

ExchangeabilityFlags classify_exchangeability(const FiniteMeasureOnPartitions& mu) {
  constexpr double kTol = 1e-12;
  struct Range {
    double lo = INFINITY, hi = -INFINITY;
    void add(double w) {
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    bool flat() const { return hi - lo <= kTol; }
  };
  std::map<std::vector<int>, Range> by_multiset, by_vector;
  std::map<std::pair<int, std::vector<int>>, Range> by_class;
  for_each_partition(mu.n, [&](const Partition& p) {
    auto it = mu.weights.find(p);
    if (it == mu.weights.end())
      throw std::invalid_argument("classify_exchangeability: missing weight for " + p.to_string());
    double w = it->second;
    auto ms = block_size_multiset(p);
    by_multiset[ms].add(w);
    by_vector[p.sizes()].add(w);
    by_class[{restricted_class(p), ms}].add(w);
  });
  auto all_flat = [](const auto& m) {
    return std::all_of(m.begin(), m.end(), [](const auto& kv) { return kv.second.flat(); });
  };
  return {all_flat(by_multiset), all_flat(by_vector), all_flat(by_class)};
}

}  // namespace rxt
