#pragma once

#include <functional>
#include <vector>

#include "rxt/dislocation.hpp"
#include "rxt/partition.hpp"
#include "rxt/rng.hpp"
#include "rxt/tree.hpp"

namespace rxt {

// Sequential alpha-gamma growth. Keeps the tree so callers can take
// coupled snapshots T_n, T_{n+1}, ...
class AlphaGammaGrower {
 public:
  AlphaGammaGrower(double alpha, double gamma);
  // Adds leaf n+1 (the first call from the single leaf gives the cherry).
  void step(Rng& rng);
  void grow_to(int n, Rng& rng);
  int n() const { return tree_.n(); }
  const GrownTree& tree() const { return tree_; }

 private:
  void insert_edge(int v);
  void insert_vertex(int v);

  double alpha_, gamma_;
  GrownTree tree_;
  std::vector<int> slots_;  // internal node v listed k_v - 1 times
};

GrownTree grow_alphagamma(double alpha, double gamma, int n, Rng& rng);

using RuleSource = std::function<SplittingRuleTable(int)>;
using SplitSampler = std::function<Partition(int, Rng&)>;

GrownTree sample_markov_branching(const RuleSource& rule_source, int n, Rng& rng);
GrownTree sample_markov_branching(const SplitSampler& split, int n, Rng& rng);

GrownTree delete_uniform_leaf(const GrownTree& t, Rng& rng);
GrownTree delete_leaf(const GrownTree& t, int label);

// Number of blocks containing label (edges from the added root to the leaf).
int spine_depth(const GrownTree& t, int label);

MetricTree reduced_tree(const GrownTree& t, const std::vector<int>& labels);

int special_branch_count(const GrownTree& t, int j, int m);

}  // namespace rxt
