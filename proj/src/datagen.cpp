#include "mspac/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mspac {

TwoPoint make_two_point(Point x1, Point x2, double p2, Hypothesis labeler) {
  if (!(p2 >= 0.0 && p2 <= 1.0)) throw DomainError("P(x2) must lie in [0, 1]");
  if (x1 == x2) throw DomainError("two-point law needs distinct points");
  labeler.family().check_point(x1);
  labeler.family().check_point(x2);
  return TwoPoint{x1, x2, p2, std::move(labeler)};
}

UniformThreshold make_uniform_threshold(double bayes_threshold, double noise) {
  if (!(bayes_threshold >= 0.0 && bayes_threshold <= 1.0)) {
    throw DomainError("Bayes threshold must lie in [0, 1]");
  }
  if (!(noise >= 0.0 && noise < 0.5)) throw DomainError("label noise must lie in [0, 1/2)");
  return UniformThreshold{bayes_threshold, noise};
}

TwoPoint merge_attack_distribution(const NontrivialPair& pair, const Hypothesis& labeler, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("merge attack needs 0 < alpha < 1");
  const double eps = alpha / (8.0 * (1.0 - alpha));
  return make_two_point(pair.x1, pair.x2, 4.0 * eps, labeler);
}

TwoPoint source_count_distribution(const NontrivialPair& pair, const Hypothesis& labeler, double alpha,
                                   std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("source-count attack needs 0 < alpha < 1");
  if (m < 1) throw DomainError("m must be positive");
  const double eps = alpha / (8.0 * static_cast<double>(m));
  return make_two_point(pair.x1, pair.x2, 4.0 * eps, labeler);
}

namespace {

struct Sampler {
  Rng::Engine& gen;

  LabeledExample operator()(const TwoPoint& d) const {
    const Point x = uniform01(gen) < d.p2 ? d.x2 : d.x1;
    return {x, d.labeler(x)};
  }

  LabeledExample operator()(const UniformThreshold& d) const {
    const Point x = uniform01(gen);
    Label y = x >= d.bayes_threshold ? 1 : -1;
    if (uniform01(gen) < d.noise) y = -y;
    return {x, y};
  }
};

}  // namespace

Dataset sample_dataset(const Distribution& d, std::size_t m, Rng::Engine& gen) {
  if (m < 1) throw DomainError("m must be positive");
  std::vector<LabeledExample> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(std::visit(Sampler{gen}, d));
  return Dataset(std::move(out));
}

SourceCollection sample_collection(const Distribution& d, std::size_t n_sources, std::size_t m,
                                   const Rng& rng) {
  if (n_sources < 1 || m < 1) throw DomainError("need N >= 1 and m >= 1");
  std::vector<Dataset> sources;
  sources.reserve(n_sources);
  for (std::size_t i = 0; i < n_sources; ++i) {
    auto gen = rng.derive(Purpose::kSampling, i).engine();
    sources.push_back(sample_dataset(d, m, gen));
  }
  std::vector<std::size_t> all(n_sources);
  for (std::size_t i = 0; i < n_sources; ++i) all[i] = i;
  auto clean = sources;
  return SourceCollection(std::move(sources), std::move(clean), std::move(all));
}

namespace {

struct RiskOf {
  const Hypothesis& h;

  double operator()(const TwoPoint& d) const {
    const double miss1 = h(d.x1) != d.labeler(d.x1) ? 1.0 - d.p2 : 0.0;
    const double miss2 = h(d.x2) != d.labeler(d.x2) ? d.p2 : 0.0;
    return miss1 + miss2;
  }

  double operator()(const UniformThreshold& d) const {
    if (!h.family().is_threshold()) {
      throw CapabilityError("uniform-threshold risk is defined for threshold hypotheses only");
    }
    // The disagreement region with the Bayes rule has length |t - t*| and
    // error 1 - eta there, eta elsewhere.
    const double t = std::clamp(h.threshold(), 0.0, 1.0);
    return d.noise + (1.0 - 2.0 * d.noise) * std::abs(t - d.bayes_threshold);
  }
};

}  // namespace

double true_risk(const Hypothesis& h, const Distribution& d) { return std::visit(RiskOf{h}, d); }

double optimal_risk(const Distribution& d, const HypothesisClass& cls) {
  if (const auto* u = std::get_if<UniformThreshold>(&d)) {
    if (!cls.is_threshold()) {
      throw CapabilityError("optimal risk of the uniform-threshold task needs the threshold class");
    }
    return u->noise;
  }
  const auto& tp = std::get<TwoPoint>(d);
  // Risk depends on h only through (h(x1), h(x2)).
  const Point pts[2] = {tp.x1, tp.x2};
  double best = 1.0;
  for (const auto& v : dichotomies(cls, pts)) {
    const double r = (v(0) != tp.labeler(tp.x1) ? 1.0 - tp.p2 : 0.0) +
                     (v(1) != tp.labeler(tp.x2) ? tp.p2 : 0.0);
    best = std::min(best, r);
  }
  return best;
}

}  // namespace mspac
