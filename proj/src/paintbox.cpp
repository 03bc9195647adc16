#include "rxt/paintbox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rxt/errors.hpp"

namespace rxt {

namespace {

// Sum over injective assignments of atoms to blocks, where singleton
// blocks may instead take the dust (repeatedly).
double admissible_sum(const MassPartition& s, const Partition& p) {
  const std::size_t k = p.size();
  if (k > 24) throw ResourceError("paintbox: too many blocks for exact evaluation");
  const std::size_t full = (std::size_t{1} << k) - 1;
  auto sizes = p.sizes();
  std::vector<double> f(full + 1, 0.0);
  f[0] = 1.0;
  std::vector<double> pw(k);
  for (double si : s.atoms()) {
    for (std::size_t j = 0; j < k; ++j) pw[j] = std::pow(si, sizes[j]);
    for (std::size_t mask = full; mask > 0; --mask) {
      double add = 0.0;
      for (std::size_t rest = mask; rest; rest &= rest - 1) {
        std::size_t j = static_cast<std::size_t>(__builtin_ctzll(rest));
        add += f[mask ^ (std::size_t{1} << j)] * pw[j];
      }
      f[mask] += add;
    }
  }
  std::size_t singles = 0;
  for (std::size_t j = 0; j < k; ++j)
    if (sizes[j] == 1) singles |= std::size_t{1} << j;
  double total = 0.0;
  const double s0 = s.dust();
  for (std::size_t mask = 0; mask <= full; ++mask) {
    std::size_t missing = full ^ mask;
    if ((missing & ~singles) != 0) continue;
    int zeros = __builtin_popcountll(missing);
    total += f[mask] * (zeros ? std::pow(s0, zeros) : 1.0);
  }
  return total;
}

}  // namespace

long paint(const MassPartition& s, Rng& rng) {
  double u = rng.uniform();
  const auto& a = s.atoms();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (u < a[i]) return static_cast<long>(i);
    u -= a[i];
  }
  return -1;
}

Partition kingman_sample(const MassPartition& s, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("kingman_sample: n must be positive");
  std::vector<long> labels(static_cast<std::size_t>(n));
  for (int r = 1; r <= n; ++r) {
    long c = paint(s, rng);
    labels[r - 1] = c >= 0 ? c : -static_cast<long>(r);
  }
  return Partition::from_labels(labels);
}

double kingman_cylinder_prob(const MassPartition& s, const Partition& p) { return admissible_sum(s, p); }

bool modified_paintbox_degenerate(const MassPartition& s, const Partition& base) {
  std::size_t k = base.size();
  std::size_t l = 0;
  for (auto& b : base.blocks())
    if (b.size() >= 2) ++l;
  if (s.dust() > 0.0) return s.m() < l;
  return s.m() < k;
}

double modified_paintbox_prob(const MassPartition& s, const Partition& base, const Partition& target) {
  if (target.n() < base.n() || restrict_partition(target, base.n()) != base)
    throw std::invalid_argument("modified_paintbox_prob: target does not refine the base cylinder");
  if (modified_paintbox_degenerate(s, base))
    throw UnsupportedError("modified_paintbox_prob: degenerate conditioning");
  // The dust exponent shift (k-m)^+ is common to both sums and cancels.
  return admissible_sum(s, target) / admissible_sum(s, base);
}

Partition modified_paintbox_sample(const MassPartition& s, const Partition& base, int n, Rng& rng,
                                   long budget) {
  if (n < base.n()) throw std::invalid_argument("modified_paintbox_sample: n below base size");
  if (modified_paintbox_degenerate(s, base))
    throw UnsupportedError("modified_paintbox_sample: degenerate conditioning");
  if (base.size() <= 24 && kingman_cylinder_prob(s, base) <= 0.0)
    throw std::invalid_argument("modified_paintbox_sample: base cylinder has probability 0");
  // Restriction to [base.n] depends only on the first base.n colours, so
  // rejecting on that prefix is rejection of the full sample on the cylinder.
  std::vector<long> labels(static_cast<std::size_t>(n));
  const int b = base.n();
  for (long attempt = 0; attempt < budget; ++attempt) {
    for (int r = 1; r <= b; ++r) {
      long c = paint(s, rng);
      labels[r - 1] = c >= 0 ? c : -static_cast<long>(r);
    }
    std::vector<long> prefix(labels.begin(), labels.begin() + b);
    if (Partition::from_labels(prefix) != base) continue;
    for (int r = b + 1; r <= n; ++r) {
      long c = paint(s, rng);
      labels[r - 1] = c >= 0 ? c : -static_cast<long>(r);
    }
    return Partition::from_labels(labels);
  }
  throw ResourceError("modified_paintbox_sample: rejection budget exhausted");
}

ConstrainedState gnedin_constrained_run(const std::function<double(Rng&)>& y_sampler,
                                        const std::vector<long>& psi, long n, Rng& rng,
                                        bool record_values) {
  if (psi.empty()) throw std::invalid_argument("gnedin_constrained_run: empty multiplicity sequence");
  for (long v : psi)
    if (v < 1) throw std::invalid_argument("gnedin_constrained_run: multiplicities must be positive");
  auto psi_at = [&](long k) { return psi[std::min<std::size_t>(static_cast<std::size_t>(k - 1), psi.size() - 1)]; };
  if (n < psi_at(1)) throw std::invalid_argument("gnedin_constrained_run: n below first multiplicity");

  std::vector<double> g;  // g[k-1] = G_k, generated lazily
  auto G = [&](long k) {
    while (static_cast<long>(g.size()) < k) {
      double y = y_sampler(rng);
      if (!(y > 0.0 && y < 1.0)) throw std::invalid_argument("gnedin_constrained_run: Y outside (0,1)");
      g.push_back((g.empty() ? 1.0 : g.back()) * y);
    }
    return g[static_cast<std::size_t>(k - 1)];
  };

  ConstrainedState st;
  st.K = 1;
  st.R = 0;
  st.steps = psi_at(1);
  if (record_values) st.modified_values.assign(static_cast<std::size_t>(st.steps), G(1));
  double gk = G(1);
  while (st.steps < n) {
    double u = rng.uniform();
    double v = u;
    if (u < gk) {
      v = G(st.K + 1);
      if (st.R <= psi_at(st.K + 1) - 2) {
        ++st.R;
      } else {
        ++st.K;
        st.R = 0;
        gk = G(st.K);
      }
    }
    if (record_values) st.modified_values.push_back(v);
    ++st.steps;
  }
  st.J = st.K + (st.R > 0 ? 1 : 0);
  return st;
}

}  // namespace rxt
