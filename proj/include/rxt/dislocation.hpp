#pragma once

#include <map>
#include <string>
#include <vector>

#include "rxt/partition.hpp"
#include "rxt/rng.hpp"

namespace rxt {

struct DislocationAtom {
  MassPartition s;
  double weight = 0.0;
};

// Restricted exchangeable dislocation measure with finitely many atoms per
// level. Level m_cap stands for every j >= m_cap. c[j-1] and k[j-1] hold the
// point masses on eps^(j+1) (plus eps^(1) for j = 1) and omega^[j].
class DiscreteDislocation {
 public:
  DiscreteDislocation() = default;
  DiscreteDislocation(std::vector<std::vector<DislocationAtom>> levels, std::vector<double> c = {},
                      std::vector<double> k = {}, bool conservative_mode = false);

  int m_cap() const { return static_cast<int>(levels_.size()); }
  // Atoms of nu_j, j >= 1.
  const std::vector<DislocationAtom>& level(int j) const;
  const std::vector<std::vector<DislocationAtom>>& levels() const { return levels_; }
  double c(int j) const;
  double k(int j) const;
  const std::vector<double>& c_values() const { return c_; }
  const std::vector<double>& k_values() const { return k_; }
  bool conservative_mode() const { return conservative_; }

 private:
  std::vector<std::vector<DislocationAtom>> levels_{{}};
  std::vector<double> c_, k_;
  bool conservative_ = false;
};

// Single atom s with weight w, placed at level 1 only (m_cap = 2) or, when
// all_levels is set, at every level (m_cap = 1).
DiscreteDislocation single_atom_dislocation(const MassPartition& s, double w, bool all_levels);

struct SplittingRuleTable {
  int n = 0;
  std::map<Partition, double> probs;  // non-trivial partitions of [n]

  double prob(const Partition& p) const;
  double total() const;
  FiniteMeasureOnPartitions as_measure() const;
  std::string to_csv() const;
  static SplittingRuleTable from_csv(const std::string& text);
};

double nu_mixture_weight(const DiscreteDislocation& d, const MassPartition& atom);
double kappa_cylinder(const DiscreteDislocation& d, const Partition& p);
// Total mass of non-trivial cylinders of [n], in closed form.
double rate(const DiscreteDislocation& d, int n);
SplittingRuleTable splitting_rule(const DiscreteDislocation& d, int n);
// Draws the root split of [n] directly, without enumerating P_n.
Partition sample_split(const DiscreteDislocation& d, int n, Rng& rng);

// Largest violation of the restricted-exchangeable consistency recursion
// between the splitting rules at n and n+1, evaluated on EPPF values.
double consistency_residual(const DiscreteDislocation& d, int n);
// Same recursion evaluated partition by partition on two tables.
double consistency_residual(const SplittingRuleTable& pn, const SplittingRuleTable& pn1);

// EPPF keyed by (class j, sizes in least-element order); throws ModelError
// if the table is not restricted exchangeable.
std::map<std::pair<int, std::vector<int>>, double> extract_eppf(const SplittingRuleTable& t);

// Exact law of the alpha-gamma tree T_n by enumeration of insertion
// histories, n <= 7.
std::map<Hierarchy, double> alphagamma_tree_law(double alpha, double gamma, int n);
SplittingRuleTable alphagamma_growth_split_oracle(double alpha, double gamma, int n);
double alphagamma_eppf(double alpha, double gamma, const std::vector<int>& sizes, int cls);

// Splitting rule of the skewed Poisson-Dirichlet model, proportional to
// (class weight) * prod_{i=1}^{k-2} (theta + (i+1) alpha) * prod_b prod_{m=1}^{n_b-1} (m - alpha).
SplittingRuleTable skewed_pd_split_table(double alpha, double theta, double lambda, int n);
std::map<std::vector<int>, double> skewed_pd_ranked_split(double alpha, double theta, double lambda, int n);
double sampling_consistency_residual(double alpha, double theta, double lambda);

// Ranked block sizes of a table, summed.
std::map<std::vector<int>, double> ranked_marginal(const SplittingRuleTable& t);

}  // namespace rxt
