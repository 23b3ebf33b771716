#pragma once

#include <variant>

#include "mspac/core.hpp"
#include "mspac/hypothesis.hpp"

namespace mspac {

/// Mass 1 - p2 on x1 and p2 on x2, labels given by f.
struct TwoPoint {
  Point x1;
  Point x2;
  double p2;
  Hypothesis labeler;
};

/// x ~ U[0, 1], label +1 iff x >= bayes_threshold, flipped with probability noise.
struct UniformThreshold {
  double bayes_threshold;
  double noise;
};

using Distribution = std::variant<TwoPoint, UniformThreshold>;

TwoPoint make_two_point(Point x1, Point x2, double p2, Hypothesis labeler);
UniformThreshold make_uniform_threshold(double bayes_threshold, double noise);

/// Two-point law for the merge attack: eps = alpha / (8 (1 - alpha)), P(x2) = 4 eps.
TwoPoint merge_attack_distribution(const NontrivialPair& pair, const Hypothesis& labeler, double alpha);

/// Two-point law for the source-count attack: eps = alpha / (8 m), P(x2) = 4 eps.
TwoPoint source_count_distribution(const NontrivialPair& pair, const Hypothesis& labeler,
                                   double alpha, std::size_t m);

Dataset sample_dataset(const Distribution& d, std::size_t m, Rng::Engine& gen);

/// N x m i.i.d. draws. The result records itself as its own clean copy with
/// G = [N].
SourceCollection sample_collection(const Distribution& d, std::size_t n_sources, std::size_t m,
                                   const Rng& rng);

/// Closed-form zero-one risk under d.
double true_risk(const Hypothesis& h, const Distribution& d);

/// min over the class of true_risk.
double optimal_risk(const Distribution& d, const HypothesisClass& cls);

}  // namespace mspac
