#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "rxt/errors.hpp"
#include "rxt/paintbox.hpp"
#include "rxt/stats.hpp"
#include "oracles.hpp"

using namespace rxt;

using oracle::chi_p;
using oracle::random_mass;
constexpr auto brute_paintbox_law = oracle::paintbox_law;

TEST(Kingman, DegenerateSamples) {
  Rng rng(1);
  EXPECT_EQ(kingman_sample(MassPartition({1.0}), 5, rng), trivial_partition(5));
  EXPECT_EQ(kingman_sample(MassPartition(), 5, rng), singleton_partition(5));
}

TEST(Kingman, CylinderExamples) {
  MassPartition half({0.5, 0.5});
  EXPECT_NEAR(kingman_cylinder_prob(half, Partition::parse("1|2")), 0.5, 1e-15);
  EXPECT_NEAR(brute_paintbox_law(half, 2)[Partition::parse("1|2")], 0.5, 1e-15);
  EXPECT_NEAR(kingman_cylinder_prob(MassPartition({1.0}), trivial_partition(6)), 1.0, 1e-15);
  MassPartition s({0.5, 0.3, 0.2});
  double expect = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) expect += s.atom(i) * s.atom(i) * s.atom(j);
  EXPECT_NEAR(kingman_cylinder_prob(s, Partition::parse("1 2|3")), expect, 1e-15);
  EXPECT_NEAR(brute_paintbox_law(s, 3)[Partition::parse("1 2|3")], expect, 1e-15);
}

TEST(Kingman, CylinderMatchesBruteForceEnumeration) {
  Rng rng(7);
  for (int t = 0; t < 30; ++t) {
    auto s = random_mass(rng, t % 2 == 0);
    for (int n = 1; n <= 6; ++n) {
      auto law = brute_paintbox_law(s, n);
      for (auto& p : enumerate_partitions(n)) {
        double brute = law.count(p) ? law[p] : 0.0;
        ASSERT_NEAR(kingman_cylinder_prob(s, p), brute, 1e-13) << s.to_string() << " " << p.to_string();
      }
    }
  }
}

TEST(Kingman, CylinderProbabilitiesSumToOne) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    auto s = random_mass(rng, true);
    for (int n = 2; n <= 8; ++n) {
      double total = 0.0;
      for_each_partition(n, [&](const Partition& p) { total += kingman_cylinder_prob(s, p); });
      ASSERT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Kingman, ExchangeableOnBlockSizes) {
  MassPartition s({0.4, 0.25, 0.15});
  for (int n = 2; n <= 7; ++n) {
    std::map<std::vector<int>, double> seen;
    for (auto& p : enumerate_partitions(n)) {
      double v = kingman_cylinder_prob(s, p);
      auto key = block_size_multiset(p);
      if (seen.count(key))
        ASSERT_NEAR(seen[key], v, 1e-14);
      else
        seen[key] = v;
    }
  }
}

TEST(Kingman, SamplerMatchesCylinderProbabilities) {
  MassPartition s({0.45, 0.3, 0.1});
  std::map<Partition, double> probs;
  for (auto& p : enumerate_partitions(4)) probs[p] = kingman_cylinder_prob(s, p);
  auto gate = run_gate(
      [&](std::uint64_t seed) {
        Rng rng(seed);
        std::map<Partition, long> counts;
        for (int i = 0; i < 100000; ++i) ++counts[kingman_sample(s, 4, rng)];
        return chi_p(counts, probs);
      },
      1, "kingman-sampler");
  EXPECT_TRUE(gate.passed);
}

TEST(ModifiedPaintbox, TrivialBaseIsKingman) {
  MassPartition s({0.5, 0.2});
  for (auto& p : enumerate_partitions(4))
    EXPECT_NEAR(modified_paintbox_prob(s, Partition::parse("1"), p), kingman_cylinder_prob(s, p), 1e-15);
}

TEST(ModifiedPaintbox, NormalizationAndErrors) {
  MassPartition s({0.6, 0.4});
  auto base = Partition::parse("1|2");
  EXPECT_NEAR(modified_paintbox_prob(s, base, base), 1.0, 1e-15);
  EXPECT_THROW(modified_paintbox_prob(s, base, Partition::parse("1 2|3")), std::invalid_argument);
  EXPECT_THROW(modified_paintbox_prob(MassPartition({1.0}), base, base), UnsupportedError);
  EXPECT_THROW(modified_paintbox_prob(MassPartition({0.5}), Partition::parse("1 2|3 4"), Partition::parse("1 2|3 4")),
               UnsupportedError);
  EXPECT_NO_THROW(modified_paintbox_prob(MassPartition({0.5}), Partition::parse("1 2|3"), Partition::parse("1 2|3")));
}

TEST(ModifiedPaintbox, MatchesExactConditionalLaw) {
  Rng rng(21);
  for (int t = 0; t < 10; ++t) {
    auto s = random_mass(rng, t % 2 == 1);
    for (auto& base : enumerate_partitions(3)) {
      if (modified_paintbox_degenerate(s, base)) continue;
      auto law3 = brute_paintbox_law(s, 3);
      if (!law3.count(base)) continue;
      auto law5 = brute_paintbox_law(s, 5);
      for (auto& target : enumerate_partitions(5)) {
        if (restrict_partition(target, 3) != base) continue;
        double expect = (law5.count(target) ? law5[target] : 0.0) / law3[base];
        ASSERT_NEAR(modified_paintbox_prob(s, base, target), expect, 1e-12);
      }
    }
  }
}

TEST(ModifiedPaintbox, RefinementAdditivity) {
  MassPartition s({0.5, 0.3, 0.15});
  for (auto& base : enumerate_partitions(2))
    for (int n = 2; n <= 5; ++n)
      for (auto& target : enumerate_partitions(n)) {
        if (restrict_partition(target, 2) != base) continue;
        double sum = 0.0;
        for (auto& up : enumerate_partitions(n + 1))
          if (restrict_partition(up, n) == target) sum += modified_paintbox_prob(s, base, up);
        ASSERT_NEAR(sum, modified_paintbox_prob(s, base, target), 1e-14);
      }
}

TEST(ModifiedPaintbox, RestrictedExchangeableWithinCylinder) {
  MassPartition s({0.5, 0.3, 0.2});
  auto base = Partition::parse("1|2");
  for (int n = 3; n <= 6; ++n) {
    std::map<std::pair<std::vector<int>, std::vector<int>>, double> seen;
    for (auto& p : enumerate_partitions(n)) {
      if (restrict_partition(p, 2) != base) continue;
      // Sizes of the blocks holding 1 and 2, then the remaining multiset.
      std::vector<int> marked{static_cast<int>(p.block(0).size()), static_cast<int>(p.block(1).size())};
      std::vector<int> rest;
      for (std::size_t i = 2; i < p.size(); ++i) rest.push_back(static_cast<int>(p.block(i).size()));
      std::sort(rest.rbegin(), rest.rend());
      double v = modified_paintbox_prob(s, base, p);
      auto key = std::make_pair(marked, rest);
      if (seen.count(key))
        ASSERT_NEAR(seen[key], v, 1e-14);
      else
        seen[key] = v;
    }
  }
}

TEST(ModifiedPaintbox, SamplerAgreesWithExactProbabilities) {
  MassPartition s({0.5, 0.5});
  auto base = Partition::parse("1|2");
  std::map<Partition, double> probs;
  for (auto& p : enumerate_partitions(3))
    if (restrict_partition(p, 2) == base) probs[p] = modified_paintbox_prob(s, base, p);
  auto gate = run_gate(
      [&](std::uint64_t seed) {
        Rng rng(seed);
        std::map<Partition, long> counts;
        for (int i = 0; i < 100000; ++i) ++counts[modified_paintbox_sample(s, base, 3, rng)];
        return chi_p(counts, probs);
      },
      2, "modified-sampler");
  EXPECT_TRUE(gate.passed);
}

TEST(ModifiedPaintbox, SamplerTrivialCases) {
  Rng rng(4);
  EXPECT_EQ(modified_paintbox_sample(MassPartition({1.0}), Partition::parse("1 2"), 4, rng), trivial_partition(4));
  auto p = modified_paintbox_sample(MassPartition({0.5, 0.2}), Partition::parse("1"), 5, rng);
  EXPECT_EQ(p.n(), 5);
  EXPECT_THROW(modified_paintbox_sample(MassPartition({0.5}), Partition::parse("1 2 3"), 2, rng),
               std::invalid_argument);
  EXPECT_THROW(modified_paintbox_sample(MassPartition({0.999999, 0.000001}), Partition::parse("1|2"), 3, rng, 10),
               ResourceError);
}

TEST(Gnedin, TrivialRuns) {
  Rng rng(1);
  auto y = [](Rng& r) { return std::exp(-r.exponential(1.0)); };
  auto st = gnedin_constrained_run(y, {1}, 1, rng);
  EXPECT_EQ(st.J, 1);
  st = gnedin_constrained_run(y, {3}, 3, rng);
  EXPECT_EQ(st.J, 1);
  EXPECT_EQ(st.K, 1);
  EXPECT_THROW(gnedin_constrained_run(y, {3}, 2, rng), std::invalid_argument);
  EXPECT_THROW(gnedin_constrained_run(y, {0}, 2, rng), std::invalid_argument);
}

TEST(Gnedin, TraceHonoursMultiplicities) {
  // Deterministic G_k = 2^{-k}; uniforms never hit these values exactly.
  auto y = [](Rng&) { return 0.5; };
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    std::vector<long> psi{2, 3, 1, 2};
    auto st = gnedin_constrained_run(y, psi, 400, rng, true);
    ASSERT_EQ(static_cast<long>(st.modified_values.size()), st.steps);
    ASSERT_EQ(st.steps, 400);
    auto psi_at = [&](long k) { return psi[std::min<std::size_t>(k - 1, psi.size() - 1)]; };
    ASSERT_GE(st.R, 0);
    ASSERT_LT(st.R, psi_at(st.K + 1));
    ASSERT_EQ(st.J, st.K + (st.R > 0));
    for (long k = 1; k <= st.K + 1; ++k) {
      double gk = std::ldexp(1.0, static_cast<int>(-k));
      long count = std::count(st.modified_values.begin(), st.modified_values.end(), gk);
      long expect = k <= st.K ? psi_at(k) : st.R;
      ASSERT_EQ(count, expect) << "record " << k;
    }
    double running = 1.0;
    long k = 0;
    for (double v : st.modified_values) {
      if (v < running) {
        running = v;
        ++k;
        ASSERT_DOUBLE_EQ(v, std::ldexp(1.0, static_cast<int>(-k)));
      }
    }
  }
}

TEST(Gnedin, ExponentialLogYGivesUnitLimit) {
  auto y = [](Rng& r) { return std::exp(-r.exponential(1.0)); };
  double sum = 0.0;
  const int runs = 100;
  const long n = 100000;
  for (int i = 0; i < runs; ++i) {
    Rng rng(derive_seed(5, "gnedin-unit", i));
    sum += gnedin_constrained_run(y, {1}, n, rng).J / std::log(static_cast<double>(n));
  }
  EXPECT_NEAR(sum / runs, 1.0, 0.15);
}

TEST(Gnedin, MomentsDoNotGrow) {
  auto y = [](Rng& r) { return std::exp(-r.exponential(1.0)); };
  std::vector<std::vector<double>> m(3, std::vector<double>(3, 0.0));
  const std::vector<long> ns{10000, 100000, 1000000};
  const int runs = 60;
  for (std::size_t a = 0; a < ns.size(); ++a)
    for (int i = 0; i < runs; ++i) {
      Rng rng(derive_seed(6, "gnedin-moments", i));
      double r = gnedin_constrained_run(y, {1}, ns[a], rng).J / std::log(static_cast<double>(ns[a]));
      for (int p = 1; p <= 3; ++p) m[p - 1][a] += std::pow(r, p) / runs;
    }
  for (int p = 0; p < 3; ++p)
    for (std::size_t a = 1; a < ns.size(); ++a) EXPECT_LE(m[p][a], 1.2 * m[p][a - 1]) << "p=" << p + 1;
}
