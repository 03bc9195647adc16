#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rxt/partition.hpp"
#include "rxt/rng.hpp"
#include "rxt/stats.hpp"

namespace oracle {

// Exact paintbox law on P_n by enumerating every colour vector in
// {0..m-1, dust}^n.
inline std::map<rxt::Partition, double> paintbox_law(const rxt::MassPartition& s, int n) {
  const int m = static_cast<int>(s.m());
  const int colours = m + 1;
  std::map<rxt::Partition, double> law;
  std::vector<int> xi(static_cast<std::size_t>(n), 0);
  while (true) {
    double p = 1.0;
    std::vector<long> labels(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
      if (xi[r] == m) {
        p *= s.dust();
        labels[r] = -(r + 1);
      } else {
        p *= s.atom(static_cast<std::size_t>(xi[r]));
        labels[r] = xi[r];
      }
    }
    if (p > 0.0) law[rxt::Partition::from_labels(labels)] += p;
    int i = 0;
    while (i < n && ++xi[i] == colours) xi[i++] = 0;
    if (i == n) break;
  }
  return law;
}

inline rxt::MassPartition random_mass(rxt::Rng& rng, bool allow_dust) {
  int m = 1 + static_cast<int>(rng.below(4));
  std::vector<double> w(static_cast<std::size_t>(m + 1));
  double tot = 0.0;
  for (auto& x : w) tot += (x = rng.uniform_pos());
  std::vector<double> atoms;
  for (int i = 0; i < m; ++i) atoms.push_back(w[i] / tot);
  if (!allow_dust) {
    double sa = 0.0;
    for (double a : atoms) sa += a;
    for (auto& a : atoms) a /= sa;
  }
  std::sort(atoms.rbegin(), atoms.rend());
  if (atoms.size() == 1 && atoms[0] >= 1.0) atoms[0] = 0.7;
  return rxt::MassPartition(atoms);
}

template <class K>
double chi_p(const std::map<K, long>& counts, const std::map<K, double>& probs,
             const std::function<std::string(const K&)>& key) {
  std::map<std::string, long> c;
  std::map<std::string, double> p;
  for (auto& [k, v] : counts) c[key(k)] += v;
  for (auto& [k, v] : probs) p[key(k)] += v;
  return rxt::chi_square_gof(c, p).p_value;
}

inline double chi_p(const std::map<rxt::Partition, long>& counts, const std::map<rxt::Partition, double>& probs) {
  return chi_p<rxt::Partition>(counts, probs, [](const rxt::Partition& p) { return p.to_string(); });
}

}  // namespace oracle
