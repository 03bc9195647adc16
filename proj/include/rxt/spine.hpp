#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rxt/dislocation.hpp"
#include "rxt/rng.hpp"
#include "rxt/tree.hpp"

namespace rxt {

// Power-law Levy tail Lambda((x, 1]) = x^{-alpha} - 1, truncated below delta.
struct PowerTail {
  double alpha = 0.5;
  double delta = 1e-5;
  double rate() const;
};

// Compound-Poisson Levy measure: jumps (size, rate) plus an optional tail.
struct LevyAtoms {
  std::vector<std::pair<double, double>> jumps;
  std::optional<PowerTail> tail;
  double total_rate() const;
  // Sum of size * rate over the atoms and the truncated tail.
  double mean_jump_rate() const;
};

struct SpinalMeasure {
  LevyAtoms atoms;  // aggregated by jump size
  double killing_rate = 0.0;
};

SpinalMeasure spinal_levy_measure(const DiscreteDislocation& d, int k);

struct SubordinatorPath {
  double horizon = 0.0;
  std::vector<double> times;  // jump times, increasing
  std::vector<double> jumps;
  std::vector<double> level;  // xi just after each jump

  double xi(double t) const;
  std::string to_csv() const;
};

SubordinatorPath simulate_subordinator(const LevyAtoms& l, double horizon, Rng& rng);

struct KnWindow {
  double epsilon = 0.0;
  double tau = 0.0;
  double tau_prime = std::numeric_limits<double>::infinity();
};

// Number of distinct values in (tau, tau'] among V_1..V_n.
long sample_Kn(const SubordinatorPath& path, const KnWindow& w, long n, Rng& rng);
// K_n for every n in the increasing list ns from one shared V-sample.
std::vector<long> sample_Kn_sequence(const SubordinatorPath& path, const KnWindow& w, const std::vector<long>& ns,
                                     Rng& rng);

double pjs_limit_functional(const SubordinatorPath& path, const KnWindow& w, double alpha);

// Random threshold factor Y(eps, tau, tau') of the tail bound.
double pjs_Y(const SubordinatorPath& path, const KnWindow& w, double alpha);

struct PjsTailReport {
  double x = 0.0;
  double frequency = 0.0;  // empirical P(K_n > (1+x) Y n^alpha Gamma(1-alpha))
  double bound = 0.0;      // C_p / (x^p n^{alpha p - 1})
  double c_p = 0.0;
  double a_x = 0.0;        // (1+x) ln(1+x) - x
};

// Exceedance frequencies at each x; a fresh truncated path per replicate.
std::vector<double> pjs_exceedance_frequencies(const PowerTail& tail, const KnWindow& w, long n,
                                               const std::vector<double>& xs, int reps, Rng& rng);
// Smallest constant making the bound hold at the pilot size, with a 1/reps floor.
double calibrate_pjs_constant(const PowerTail& tail, const KnWindow& w, long n_pilot, const std::vector<double>& xs,
                              int reps, Rng& rng, int p = 3);
std::vector<PjsTailReport> pjs_tail_statistic(const PowerTail& tail, const KnWindow& w, long n,
                                              const std::vector<double>& xs, int reps, Rng& rng, double c_p,
                                              int p = 3);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MomentEstimate renewal_moment(const std::function<double(Rng&)>& interarrival, double t, int p, long reps, Rng& rng);

struct ReducedCrtSample {
  MetricTree tree;
  bool horizon_capped = false;
};

// Reduced continuum tree spanned by the root and leaves 1..k.
ReducedCrtSample sample_reduced_crt(const DiscreteDislocation& d, int k, double alpha, Rng& rng,
                                    double leaf_horizon = 1e3);

}  // namespace rxt
