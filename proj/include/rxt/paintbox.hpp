#pragma once

#include <functional>
#include <vector>

#include "rxt/partition.hpp"
#include "rxt/rng.hpp"

namespace rxt {

// Draws the paintbox colour of one ball: atom index i >= 0 with
// probability s_i, or -1 for dust.
long paint(const MassPartition& s, Rng& rng);

Partition kingman_sample(const MassPartition& s, int n, Rng& rng);

// Exact P(kingman_sample(s, p.n) == p).
double kingman_cylinder_prob(const MassPartition& s, const Partition& p);

// Conditional law of the paintbox on the cylinder of `base`, evaluated on
// the cylinder of `target`. Throws UnsupportedError in the degenerate case.
double modified_paintbox_prob(const MassPartition& s, const Partition& base, const Partition& target);

// Partition of [n] drawn from the paintbox conditioned to restrict to base.
Partition modified_paintbox_sample(const MassPartition& s, const Partition& base, int n, Rng& rng,
                                   long budget = 10'000'000);

bool modified_paintbox_degenerate(const MassPartition& s, const Partition& base);

struct ConstrainedState {
  std::vector<double> modified_values;  // empty unless recorded
  long K = 0;
  long R = 0;
  long J = 0;
  long steps = 0;
};

// Lower-record constrained sequence driven by G_k = Y_1...Y_k. psi[k-1] is
// the multiplicity of record k; the last entry repeats.
ConstrainedState gnedin_constrained_run(const std::function<double(Rng&)>& y_sampler,
                                        const std::vector<long>& psi, long n, Rng& rng,
                                        bool record_values = false);

}  // namespace rxt
