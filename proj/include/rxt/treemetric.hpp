#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rxt/models.hpp"
#include "rxt/tree.hpp"

namespace rxt {

struct DistanceMatrix {
  std::vector<int> labels;  // vertex label, 0 when unlabelled
  std::vector<std::vector<double>> d;
  bool four_point(double tol = 1e-9) const;
};

DistanceMatrix distance_matrix(const MetricTree& t);

// Exact rooted GH distance between the vertex sets; at most 10 leaves each.
double gh_distance_rooted(const MetricTree& a, const MetricTree& b);
// Half the distortion of a depth-rank correspondence.
double gh_upper_bound(const MetricTree& a, const MetricTree& b);

// Labelled topology of a metric tree, lengths dropped.
std::string topology_key(const MetricTree& t);

struct EdgeStat {
  int n = 0;
  std::string shape;
  std::string edge;  // leaf labels below the edge
  double mean = 0.0;
  double variance = 0.0;
  long count = 0;
};

// Rescaled edge lengths of R(T_n, [k]) grouped by shape and edge.
std::vector<EdgeStat> edge_convergence_experiment(const Model& m, int k, const std::vector<int>& n_grid, int reps,
                                                  std::uint64_t seed, int workers = 1);

enum class HeightStatistic { height, mean_depth };

struct ExponentFit {
  double slope = 0.0;
  double std_error = 0.0;
  std::vector<double> means;
  std::vector<double> mean_errors;
};

ExponentFit scaling_exponent(const Model& m, const std::vector<int>& n_grid, int reps, HeightStatistic stat,
                             std::uint64_t seed, int workers = 1);

struct StabilizationRow {
  int n = 0;
  double median = 0.0;
  int pairs = 0;
};

// Median rooted GH distance between R(T_n,[k]) and R(T_4n,[k]), both rescaled
// by their own n^gamma, on coupled growth runs.
std::vector<StabilizationRow> gh_stabilization(const AlphaGammaModel& m, int k, const std::vector<int>& ns, int pairs,
                                               std::uint64_t seed, int workers = 1);

// Mean fraction of leaves within eps * n^gamma of R(T_n, [k]), for each k.
std::vector<double> fill_fraction(const AlphaGammaModel& m, int n, const std::vector<int>& ks, double eps, int reps,
                                  std::uint64_t seed, int workers = 1);

}  // namespace rxt
