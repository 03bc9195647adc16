#pragma once

#include <string>
#include <variant>

#include "rxt/dislocation.hpp"
#include "rxt/rng.hpp"
#include "rxt/tree.hpp"

namespace rxt {

struct AlphaGammaModel {
  double alpha = 0.5;
  double gamma = 0.5;
};

// Splitting rules tabulated up to n = 12.
struct SkewedPdModel {
  double alpha = 0.5;
  double theta = -0.5;
  double lambda = 0.5;
};

// Markov branching tree driven by a finite dislocation measure; index is the
// self-similarity index used to rescale lengths.
struct DislocationModel {
  DiscreteDislocation d;
  double index = 0.0;
};

// Debug model: every tree is the star on [n].
struct StarModel {};

using Model = std::variant<AlphaGammaModel, SkewedPdModel, DislocationModel, StarModel>;

GrownTree sample_tree(const Model& m, int n, Rng& rng);
SplittingRuleTable model_split_table(const Model& m, int n);
// Exponent of the n^a rescaling under which T_n converges.
double scaling_index(const Model& m);
std::string model_family(const Model& m);

}  // namespace rxt
