#include "rxt/models.hpp"

#include <stdexcept>

#include "rxt/errors.hpp"
#include "rxt/growth.hpp"

namespace rxt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

GrownTree sample_tree(const Model& m, int n, Rng& rng) {
  return std::visit(overloaded{
                        [&](const AlphaGammaModel& ag) { return grow_alphagamma(ag.alpha, ag.gamma, n, rng); },
                        [&](const SkewedPdModel& pd) {
                          if (n > 12) throw UnsupportedError("skewed PD trees are sampled only up to n = 12");
                          return sample_markov_branching(
                              RuleSource([&](int b) { return skewed_pd_split_table(pd.alpha, pd.theta, pd.lambda, b); }),
                              n, rng);
                        },
                        [&](const DislocationModel& dm) {
                          return sample_markov_branching(
                              SplitSampler([&](int b, Rng& r) { return sample_split(dm.d, b, r); }), n, rng);
                        },
                        [&](const StarModel&) { return GrownTree::star(n); },
                    },
                    m);
}

SplittingRuleTable model_split_table(const Model& m, int n) {
  return std::visit(overloaded{
                        [&](const AlphaGammaModel& ag) {
                          if (n <= 7) return alphagamma_growth_split_oracle(ag.alpha, ag.gamma, n);
                          // Same law, as a skewed PD table.
                          double lambda = (1.0 - ag.alpha) / (1.0 - ag.alpha + ag.gamma);
                          if (ag.alpha == 1.0) lambda = 0.0;
                          return skewed_pd_split_table(ag.alpha, -ag.alpha - ag.gamma, lambda, n);
                        },
                        [&](const SkewedPdModel& pd) { return skewed_pd_split_table(pd.alpha, pd.theta, pd.lambda, n); },
                        [&](const DislocationModel& dm) { return splitting_rule(dm.d, n); },
                        [&](const StarModel&) {
                          SplittingRuleTable t;
                          t.n = n;
                          t.probs[singleton_partition(n)] = 1.0;
                          return t;
                        },
                    },
                    m);
}

double scaling_index(const Model& m) {
  return std::visit(overloaded{
                        [](const AlphaGammaModel& ag) { return ag.gamma; },
                        [](const SkewedPdModel& pd) { return -pd.alpha - pd.theta; },
                        [](const DislocationModel& dm) { return dm.index; },
                        [](const StarModel&) { return 0.0; },
                    },
                    m);
}

std::string model_family(const Model& m) {
  return std::visit(overloaded{
                        [](const AlphaGammaModel&) { return std::string("alpha-gamma"); },
                        [](const SkewedPdModel&) { return std::string("skewed-pd"); },
                        [](const DislocationModel&) { return std::string("dislocation"); },
                        [](const StarModel&) { return std::string("star"); },
                    },
                    m);
}

}  // namespace rxt
