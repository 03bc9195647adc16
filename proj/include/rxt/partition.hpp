#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rxt {

using Block = std::vector<int>;  // sorted, 1-based labels

// Set partition of [n]. Blocks are sorted and listed by least element.
class Partition {
 public:
  Partition() = default;
  // Validates and canonicalizes; throws std::invalid_argument.
  Partition(int n, std::vector<Block> blocks);

  // Value partition of r = 1..labels.size(): r and r' share a block iff
  // labels[r-1] == labels[r'-1].
  static Partition from_labels(const std::vector<long>& labels);
  // Restricted growth string: rgs[r-1] is the 0-based block index of r.
  static Partition from_rgs(const std::vector<int>& rgs);
  // Canonical text form "1 3|2".
  static Partition parse(std::string_view text);

  int n() const { return n_; }
  std::size_t size() const { return blocks_.size(); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(std::size_t i) const { return blocks_[i]; }
  bool is_trivial() const { return blocks_.size() == 1; }
  // Sizes in least-element order.
  std::vector<int> sizes() const;
  std::string to_string() const;

  auto operator<=>(const Partition&) const = default;
  bool operator==(const Partition&) const = default;

 private:
  int n_ = 0;
  std::vector<Block> blocks_;
};

Partition trivial_partition(int n);
Partition singleton_partition(int n);

Partition restrict_partition(const Partition& p, int m);
std::vector<int> block_size_multiset(const Partition& p);

// Class index j with p in P^{{[j],{j+1}}}, i.e. min(second block) - 1;
// 0 for the trivial partition.
int restricted_class(const Partition& p);

// Calls f on every partition of [n] in restricted-growth-string order.
void for_each_partition(int n, const std::function<void(const Partition&)>& f);
// All partitions of [n]; n <= 12.
std::vector<Partition> enumerate_partitions(int n);
unsigned long long bell_number(int n);

// Image of a partition of [b] under the increasing bijection [b] -> target.
std::vector<Block> push_forward(const Partition& p, const Block& target);
// Partition of [|B|] obtained from blocks of B via the increasing bijection B -> [|B|].
Partition standardize(const std::vector<Block>& blocks_of_b);

// Finitely supported element of the mass-partition simplex.
class MassPartition {
 public:
  MassPartition() = default;
  explicit MassPartition(std::vector<double> atoms);

  const std::vector<double>& atoms() const { return atoms_; }
  double atom(std::size_t i) const { return atoms_[i]; }
  std::size_t m() const { return atoms_.size(); }
  double dust() const { return dust_; }
  bool operator==(const MassPartition& o) const { return atoms_ == o.atoms_; }
  bool approx_equal(const MassPartition& o, double tol = 1e-12) const;
  std::string to_string() const;

 private:
  std::vector<double> atoms_;
  double dust_ = 1.0;
};

// Laminar family of subsets of [n] containing the empty set, [n] and all singletons.
class Hierarchy {
 public:
  Hierarchy() = default;
  Hierarchy(int n, std::set<Block> members);

  int n() const { return n_; }
  const std::set<Block>& members() const { return members_; }
  bool contains(const Block& b) const { return members_.count(b) > 0; }
  std::string to_string() const;

  auto operator<=>(const Hierarchy&) const = default;
  bool operator==(const Hierarchy&) const = default;

 private:
  int n_ = 0;
  std::set<Block> members_;
};

Hierarchy restrict_hierarchy(const Hierarchy& h, int m);
// Maximal strict subsets of B in h, ordered by least element.
std::vector<Block> children_of(const Hierarchy& h, const Block& b);

struct FiniteMeasureOnPartitions {
  int n = 0;
  std::map<Partition, double> weights;
};

struct ExchangeabilityFlags {
  bool exchangeable = false;
  bool partially_exchangeable = false;
  bool restricted_exchangeable = false;
};

ExchangeabilityFlags classify_exchangeability(const FiniteMeasureOnPartitions& mu);

}  // namespace rxt
