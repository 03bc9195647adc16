#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "rxt/dislocation.hpp"
#include "rxt/errors.hpp"
#include "rxt/stats.hpp"

using namespace rxt;

namespace {

// First j such that 1..j share a block and j+1 does not.
int class_of(const Partition& p) {
  const auto& b0 = p.block(0);
  int j = 1;
  while (std::find(b0.begin(), b0.end(), j + 1) != b0.end()) ++j;
  return j;
}

Partition split_off(int x, int n) {
  std::vector<Block> blocks(2);
  for (int r = 1; r <= n; ++r) (r == x ? blocks[1] : blocks[0]).push_back(r);
  if (x == 1) std::swap(blocks[0], blocks[1]);
  return Partition(n, blocks);
}

Partition head_block(int j, int n) {
  std::vector<Block> blocks(1);
  for (int r = 1; r <= j; ++r) blocks[0].push_back(r);
  for (int r = j + 1; r <= n; ++r) blocks.push_back({r});
  return Partition(n, blocks);
}

// Cylinder masses of every non-trivial partition of [n], each paintbox
// evaluated by full colour enumeration.
std::map<Partition, double> brute_kappa(const DiscreteDislocation& d, int n) {
  std::map<Partition, double> out;
  for (int level = 1; level <= d.m_cap(); ++level)
    for (auto& a : d.level(level))
      for (auto& [p, v] : oracle::paintbox_law(a.s, n)) {
        if (p.is_trivial()) continue;
        int j = class_of(p);
        if (std::min(j, d.m_cap()) == level) out[p] += a.weight * v;
      }
  out[split_off(1, n)] += d.c(1);
  for (int x = 2; x <= n; ++x) out[split_off(x, n)] += d.c(x - 1);
  for (int jj = 1; jj < n; ++jj) out[head_block(jj, n)] += d.k(jj);
  return out;
}

DiscreteDislocation random_dislocation(Rng& rng, bool with_deltas) {
  int m_cap = 1 + static_cast<int>(rng.below(3));
  std::vector<std::vector<DislocationAtom>> levels(static_cast<std::size_t>(m_cap));
  for (auto& lv : levels) {
    int count = static_cast<int>(rng.below(3));
    for (int i = 0; i < count; ++i) lv.push_back({oracle::random_mass(rng, true), 0.2 + rng.uniform()});
  }
  if (levels.front().empty()) levels.front().push_back({oracle::random_mass(rng, true), 1.0});
  if (levels.back().empty()) levels.back().push_back({oracle::random_mass(rng, false), 1.0});
  std::vector<double> c, k;
  if (with_deltas) {
    for (int i = 0; i < 6; ++i) c.push_back(rng.below(2) ? rng.uniform() : 0.0);
    for (int i = 0; i < 6; ++i) k.push_back(rng.below(2) ? rng.uniform() : 0.0);
  }
  return DiscreteDislocation(levels, c, k);
}

std::vector<int> sizes_of(const std::string& csv) {
  std::vector<int> out;
  for (char ch : csv)
    if (ch != ',') out.push_back(ch - '0');
  return out;
}

DiscreteDislocation half_level_one() { return single_atom_dislocation(MassPartition({0.5, 0.5}), 1.0, false); }

}  // namespace

TEST(Dislocation, RejectsExcludedAtoms) {
  EXPECT_THROW(single_atom_dislocation(MassPartition({1.0}), 1.0, false), std::invalid_argument);
  EXPECT_THROW(single_atom_dislocation(MassPartition(), 1.0, false), std::invalid_argument);
  EXPECT_THROW(single_atom_dislocation(MassPartition({0.5}), 0.0, false), std::invalid_argument);
  EXPECT_THROW(DiscreteDislocation({{{MassPartition({0.5}), 1.0}}}, {}, {}, true), std::invalid_argument);
  EXPECT_THROW(DiscreteDislocation({{{MassPartition({0.5, 0.5}), 1.0}}}, {0.1}, {}, true), std::invalid_argument);
  EXPECT_NO_THROW(DiscreteDislocation({{{MassPartition({0.5, 0.5}), 1.0}}}, {}, {}, true));
}

TEST(Dislocation, MixtureWeightExamples) {
  EXPECT_NEAR(nu_mixture_weight(half_level_one(), MassPartition({0.5, 0.5})), 0.5, 1e-15);
  auto all = single_atom_dislocation(MassPartition({0.5, 0.5}), 1.0, true);
  EXPECT_NEAR(nu_mixture_weight(all, MassPartition({0.5, 0.5})), 1.0, 1e-15);
  EXPECT_THROW(nu_mixture_weight(all, MassPartition({0.6, 0.4})), std::invalid_argument);
}

TEST(Dislocation, MixtureWeightMatchesTruncatedSeries) {
  MassPartition s({0.6, 0.3});
  for (bool all : {false, true}) {
    auto d = single_atom_dislocation(s, 2.0, all);
    double series = 0.0;
    for (int j = 1; j < 2000; ++j)
      if (all || j == 1)
        for (double si : s.atoms()) series += 2.0 * std::pow(si, j) * (1.0 - si);
    EXPECT_NEAR(nu_mixture_weight(d, s), series, 1e-12);
  }
}

TEST(Dislocation, CylinderExamples) {
  auto d = half_level_one();
  EXPECT_NEAR(kappa_cylinder(d, Partition::parse("1|2")), 0.5, 1e-15);
  EXPECT_EQ(kappa_cylinder(d, Partition::parse("1 2|3")), 0.0);
  EXPECT_NEAR(kappa_cylinder(d, Partition::parse("1|2 3")), 0.25, 1e-15);
  EXPECT_THROW(kappa_cylinder(d, Partition::parse("1 2 3")), std::invalid_argument);
}

TEST(Dislocation, CylinderMatchesBruteForce) {
  Rng rng(11);
  for (int t = 0; t < 25; ++t) {
    auto d = random_dislocation(rng, t % 2 == 0);
    for (int n = 2; n <= 6; ++n) {
      auto brute = brute_kappa(d, n);
      for (auto& p : enumerate_partitions(n))
        if (!p.is_trivial()) ASSERT_NEAR(kappa_cylinder(d, p), brute[p], 1e-12) << p.to_string();
    }
  }
}

TEST(Dislocation, RateAndSplitExamples) {
  auto d = half_level_one();
  EXPECT_NEAR(rate(d, 2), 0.5, 1e-15);
  EXPECT_NEAR(rate(d, 3), 0.5, 1e-15);
  auto t2 = splitting_rule(d, 2);
  EXPECT_NEAR(t2.prob(Partition::parse("1|2")), 1.0, 1e-15);
  auto t3 = splitting_rule(d, 3);
  EXPECT_NEAR(t3.prob(Partition::parse("1|2 3")), 0.5, 1e-15);
  EXPECT_NEAR(t3.prob(Partition::parse("1 3|2")), 0.5, 1e-15);
  EXPECT_EQ(t3.prob(Partition::parse("1 2|3")), 0.0);
  EXPECT_EQ(t3.prob(Partition::parse("1|2|3")), 0.0);
  EXPECT_EQ(t3.probs.size(), 4u);
  EXPECT_NEAR(consistency_residual(d, 2), 0.0, 1e-15);

  DiscreteDislocation empty;
  EXPECT_EQ(rate(empty, 4), 0.0);
  EXPECT_THROW(splitting_rule(empty, 4), ModelError);
  EXPECT_THROW(splitting_rule(d, 13), ResourceError);
}

TEST(Dislocation, ClosedFormRateEqualsCylinderSum) {
  Rng rng(12);
  for (int t = 0; t < 25; ++t) {
    auto d = random_dislocation(rng, t % 3 == 0);
    double prev = 0.0;
    for (int n = 2; n <= 7; ++n) {
      double sum = 0.0;
      for_each_partition(n, [&](const Partition& p) {
        if (!p.is_trivial()) sum += kappa_cylinder(d, p);
      });
      double r = rate(d, n);
      ASSERT_NEAR(r, sum, 1e-12 * std::max(1.0, sum));
      ASSERT_GE(r, prev - 1e-12);
      prev = r;
      ASSERT_NEAR(splitting_rule(d, n).total(), 1.0, 1e-12);
    }
  }
}

TEST(Dislocation, TablesAreRestrictedExchangeable) {
  Rng rng(13);
  for (int t = 0; t < 15; ++t) {
    auto d = random_dislocation(rng, true);
    for (int n = 2; n <= 6; ++n) {
      auto flags = classify_exchangeability(splitting_rule(d, n).as_measure());
      ASSERT_TRUE(flags.restricted_exchangeable) << "n=" << n;
    }
  }
  DiscreteDislocation two({{{MassPartition({0.5, 0.3}), 1.0}}, {{MassPartition({0.7}), 0.5}}});
  EXPECT_TRUE(classify_exchangeability(splitting_rule(two, 5).as_measure()).restricted_exchangeable);
}

TEST(Dislocation, ConsistencyRecursionHolds) {
  Rng rng(14);
  for (int t = 0; t < 20; ++t) {
    auto d = random_dislocation(rng, t % 2 == 1);
    for (int n = 2; n <= 6; ++n) {
      ASSERT_LE(consistency_residual(d, n), 1e-10);
      ASSERT_LE(consistency_residual(splitting_rule(d, n), splitting_rule(d, n + 1)), 1e-10);
    }
  }
}

TEST(Dislocation, CorruptedTableBreaksConsistency) {
  Rng rng(15);
  for (int t = 0; t < 10; ++t) {
    auto d = random_dislocation(rng, false);
    for (int n = 2; n <= 5; ++n) {
      auto pn = splitting_rule(d, n);
      auto pn1 = splitting_rule(d, n + 1);
      auto it = std::next(pn1.probs.begin(), static_cast<long>(rng.below(pn1.probs.size())));
      it->second += 0.01;
      EXPECT_GE(consistency_residual(pn, pn1), 1e-3);
    }
  }
}

TEST(Dislocation, NormalizationIdentity) {
  Rng rng(16);
  for (int t = 0; t < 20; ++t) {
    auto d = random_dislocation(rng, t % 2 == 0);
    for (int n = 2; n <= 6; ++n) {
      double stay = splitting_rule(d, n + 1).prob(head_block(n, n + 1));
      ASSERT_NEAR(rate(d, n + 1) * (1.0 - stay), rate(d, n), 1e-10);
    }
  }
}

TEST(Dislocation, SampleSplitMatchesTable) {
  DiscreteDislocation d({{{MassPartition({0.5, 0.3}), 1.0}, {MassPartition({0.4}), 0.5}},
                         {{MassPartition({0.6, 0.2}), 0.8}}},
                        {0.1, 0.05}, {0.2, 0.0, 0.1});
  for (int n : {3, 5}) {
    auto table = splitting_rule(d, n);
    auto gate = run_gate(
        [&](std::uint64_t seed) {
          Rng rng(seed);
          std::map<Partition, long> counts;
          for (int i = 0; i < 100000; ++i) ++counts[sample_split(d, n, rng)];
          return oracle::chi_p(counts, table.probs);
        },
        static_cast<std::uint64_t>(n), "sample-split");
    EXPECT_TRUE(gate.passed) << "n=" << n;
  }
}

TEST(Dislocation, EppfExtraction) {
  auto d = random_dislocation(*std::make_unique<Rng>(17), false);
  auto t = splitting_rule(d, 5);
  auto eppf = extract_eppf(t);
  for (auto& [p, v] : t.probs) {
    std::vector<int> sizes = p.sizes();
    ASSERT_NEAR(eppf.at({restricted_class(p), sizes}), v, 1e-15);
  }
  auto broken = splitting_rule(half_level_one(), 4);
  broken.probs[Partition::parse("1|2 3 4")] += 0.01;
  broken.probs[Partition::parse("1 3 4|2")] -= 0.01;
  EXPECT_THROW(extract_eppf(broken), ModelError);
}

TEST(Dislocation, CsvRoundTrip) {
  Rng rng(18);
  auto t = splitting_rule(random_dislocation(rng, true), 4);
  auto csv = t.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "partition,probability");
  auto back = SplittingRuleTable::from_csv(csv);
  EXPECT_EQ(back.n, 4);
  ASSERT_EQ(back.probs.size(), t.probs.size());
  for (auto& [p, v] : t.probs) EXPECT_DOUBLE_EQ(back.prob(p), v);
}

TEST(AlphaGamma, OracleAtThree) {
  for (auto [a, g] : {std::pair{0.5, 0.3}, {0.8, 0.8}, {0.3, 0.0}, {0.5, 0.25}}) {
    auto t = alphagamma_growth_split_oracle(a, g, 3);
    EXPECT_NEAR(t.prob(Partition::parse("1 3|2")), (1 - a) / (2 - a), 1e-14);
    EXPECT_NEAR(t.prob(Partition::parse("1|2 3")), (1 - a) / (2 - a), 1e-14);
    EXPECT_NEAR(t.prob(Partition::parse("1 2|3")), g / (2 - a), 1e-14);
    EXPECT_NEAR(t.prob(Partition::parse("1|2|3")), (a - g) / (2 - a), 1e-14);
  }
  auto t = alphagamma_growth_split_oracle(0.5, 0.25, 3);
  EXPECT_NEAR(t.prob(Partition::parse("1 3|2")), 1.0 / 3, 1e-15);
  EXPECT_NEAR(t.prob(Partition::parse("1|2|3")), 1.0 / 6, 1e-15);
  EXPECT_THROW(alphagamma_growth_split_oracle(0.5, 0.25, 8), ResourceError);
  EXPECT_THROW(alphagamma_growth_split_oracle(0.5, 0.6, 4), std::invalid_argument);
}

TEST(AlphaGamma, TreeLawIsConsistentUnderLeafDeletion) {
  for (auto [a, g] : {std::pair{0.5, 0.3}, {0.7, 0.7}, {0.4, 0.0}}) {
    for (int n = 3; n <= 6; ++n) {
      auto big = alphagamma_tree_law(a, g, n);
      auto small = alphagamma_tree_law(a, g, n - 1);
      std::map<Hierarchy, double> pushed;
      double total = 0.0;
      for (auto& [h, p] : big) {
        pushed[restrict_hierarchy(h, n - 1)] += p;
        total += p;
      }
      ASSERT_NEAR(total, 1.0, 1e-12);
      ASSERT_EQ(pushed.size(), small.size());
      for (auto& [h, p] : small) ASSERT_NEAR(pushed[h], p, 1e-10);
    }
  }
}

TEST(AlphaGamma, OracleMatchesSkewedPoissonDirichletRule) {
  for (auto [a, g] : {std::pair{0.5, 0.3}, {0.7, 0.1}, {0.3, 0.0}, {0.6, 0.6}}) {
    for (int n = 2; n <= 6; ++n) {
      auto oracle_t = alphagamma_growth_split_oracle(a, g, n);
      auto pd = skewed_pd_split_table(a, -a - g, (1 - a) / (1 - a + g), n);
      ASSERT_EQ(oracle_t.probs.size(), pd.probs.size());
      for (auto& [p, v] : oracle_t.probs) ASSERT_NEAR(pd.prob(p), v, 1e-12) << p.to_string();
    }
  }
}

TEST(AlphaGamma, EppfExamples) {
  for (double a : {0.2, 0.5, 0.9})
    EXPECT_NEAR(alphagamma_eppf(a, 0.1, {1, 1}, 1), (1 - a) / (2 - a), 1e-15);
  // gamma = alpha forces binary splits
  EXPECT_EQ(alphagamma_eppf(0.5, 0.5, {1, 1, 1}, 1), 0.0);
  EXPECT_NEAR(alphagamma_eppf(0.5, 0.25, {1, 1, 1}, 1), 0.5 * 0.25 / (1.5 * 2.5), 1e-15);
  EXPECT_THROW(alphagamma_eppf(0.5, 0.2, {3}, 1), std::invalid_argument);
  EXPECT_THROW(alphagamma_eppf(0.5, 0.2, {2, 1}, 3), std::invalid_argument);
}

TEST(AlphaGamma, EppfDiffersFromGrowthLawByFixedFactor) {
  // The product formula carries an extra (1-a)/(n-a) relative to the growth law.
  for (auto [a, g] : {std::pair{0.5, 0.3}, {0.8, 0.8}, {0.3, 0.0}}) {
    for (int n = 2; n <= 5; ++n) {
      auto t = alphagamma_growth_split_oracle(a, g, n);
      for (auto& [p, v] : t.probs) {
        auto sizes = block_size_multiset(p);
        int cls = restricted_class(p) == 1 ? 1 : 2;
        ASSERT_NEAR(alphagamma_eppf(a, g, sizes, cls), v * (1 - a) / (n - a), 1e-14) << p.to_string();
      }
    }
  }
  auto t3 = alphagamma_growth_split_oracle(0.5, 0.3, 3);
  EXPECT_GT(std::abs(alphagamma_eppf(0.5, 0.3, {2, 1}, 2) - t3.prob(Partition::parse("1 2|3"))), 1e-3);
}

TEST(SkewedPd, RankedClosedFormsMatchTables) {
  for (auto [a, th, l] : {std::tuple{0.5, -0.5, 0.5}, {0.3, 1.0, 0.2}, {0.7, -1.4, 0.9}, {0.4, 2.5, 0.05}}) {
    for (int n = 2; n <= 4; ++n) {
      auto closed = skewed_pd_ranked_split(a, th, l, n);
      auto marg = ranked_marginal(skewed_pd_split_table(a, th, l, n));
      double total = 0.0;
      for (auto& [k, v] : closed) {
        total += v;
        EXPECT_NEAR(marg[k], v, 1e-13);
      }
      EXPECT_NEAR(total, 1.0, 1e-13);
    }
  }
}

TEST(SkewedPd, RankedExamples) {
  auto s3 = skewed_pd_ranked_split(0.5, -0.5, 0.5, 3);
  EXPECT_NEAR(s3.at(sizes_of("1,1,1")), 0.25, 1e-15);
  EXPECT_NEAR(s3.at(sizes_of("2,1")), 0.75, 1e-15);
  EXPECT_EQ(skewed_pd_ranked_split(0.5, -0.5, 0.0, 3).at(sizes_of("1,1,1")), 0.0);
  EXPECT_EQ(skewed_pd_ranked_split(0.4, -0.8, 0.6, 3).at(sizes_of("1,1,1")), 0.0);
  EXPECT_NEAR(skewed_pd_ranked_split(0.4, 0.1, 0.3, 2).at(sizes_of("1,1")), 1.0, 1e-15);
  EXPECT_THROW(skewed_pd_ranked_split(0.5, -1.5, 0.5, 3), std::invalid_argument);
  EXPECT_THROW(skewed_pd_ranked_split(0.5, 0.0, 1.5, 3), std::invalid_argument);
  EXPECT_THROW(skewed_pd_ranked_split(0.5, 0.0, 0.5, 5), std::invalid_argument);
}

TEST(SkewedPd, SamplingResidualVanishesOnBothCurves) {
  for (double a = 0.05; a < 1.0; a += 0.1)
    for (double th = -2 * a; th < 3.0; th += 0.37) {
      EXPECT_LE(sampling_consistency_residual(a, th, 0.5), 1e-12);
      double l = (1 - a) / (1 - th - 2 * a);
      if (l >= 0.0 && l <= 1.0) EXPECT_LE(sampling_consistency_residual(a, th, l), 1e-12);
    }
  EXPECT_GT(sampling_consistency_residual(0.5, -0.5, 0.9), 1e-4);
}
