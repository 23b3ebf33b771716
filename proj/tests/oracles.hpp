#pragma once

// Slow reference implementations. They only use predict() on explicitly listed
// hypotheses, never the sweep or lattice code under test.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "mspac/core.hpp"
#include "mspac/hypothesis.hpp"

namespace oracle {

using namespace mspac;

/// Threshold candidates that realize every threshold dichotomy on the given
/// points: -inf, each distinct point (inclusive boundary), +inf.
inline std::vector<Hypothesis> candidates(const HypothesisClass& cls, const std::vector<Point>& points) {
  std::vector<Hypothesis> out;
  if (cls.is_threshold()) {
    const double inf = std::numeric_limits<double>::infinity();
    std::set<double> ts(points.begin(), points.end());
    out.push_back(cls.at_threshold(-inf));
    for (double t : ts) out.push_back(cls.at_threshold(t));
    out.push_back(cls.at_threshold(inf));
  } else {
    for (std::size_t i = 0; i < cls.size(); ++i) out.push_back(cls.at(i));
  }
  return out;
}

inline std::vector<Point> points_of(const Dataset& s) {
  std::vector<Point> p;
  for (const auto& e : s) p.push_back(e.x);
  return p;
}

inline double risk(const Hypothesis& h, const Dataset& s) {
  double errs = 0;
  for (const auto& e : s) errs += predict(h, e.x) != e.y;
  return errs / static_cast<double>(s.size());
}

/// 2^n enumeration of the sign vectors.
inline double rademacher(const HypothesisClass& cls, const Dataset& s) {
  const auto hs = candidates(cls, points_of(s));
  const std::size_t n = s.size();
  std::vector<std::vector<double>> loss;
  for (const auto& h : hs) {
    std::vector<double> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = predict(h, s[i].x) != s[i].y;
    loss.push_back(std::move(l));
  }
  double total = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double best = -1e300;
    for (const auto& l : loss) {
      double v = 0;
      for (std::size_t i = 0; i < n; ++i) v += ((mask >> i) & 1 ? 1.0 : -1.0) * l[i];
      best = std::max(best, v);
    }
    total += best / static_cast<double>(n);
  }
  return total / static_cast<double>(std::uint64_t{1} << n);
}

/// Maximum of |R_a - R_b| over every dichotomy of the pooled points.
inline double discrepancy(const HypothesisClass& cls, const Dataset& a, const Dataset& b) {
  auto pts = points_of(a);
  const auto pb = points_of(b);
  pts.insert(pts.end(), pb.begin(), pb.end());
  double best = 0;
  for (const auto& h : candidates(cls, pts)) best = std::max(best, std::abs(risk(h, a) - risk(h, b)));
  return best;
}

/// Same maximum as a fraction over m_a m_b, from integer error counts.
inline std::pair<std::int64_t, std::int64_t> discrepancy_fraction(const HypothesisClass& cls, const Dataset& a,
                                                                  const Dataset& b) {
  auto pts = points_of(a);
  const auto pb = points_of(b);
  pts.insert(pts.end(), pb.begin(), pb.end());
  auto errors = [](const Hypothesis& h, const Dataset& s) {
    std::int64_t n = 0;
    for (const auto& e : s) n += predict(h, e.x) != e.y;
    return n;
  };
  const auto ma = static_cast<std::int64_t>(a.size()), mb = static_cast<std::int64_t>(b.size());
  std::int64_t best = 0;
  for (const auto& h : candidates(cls, pts)) best = std::max(best, std::abs(errors(h, a) * mb - errors(h, b) * ma));
  return {best, ma * mb};
}

inline double min_risk(const HypothesisClass& cls, const Dataset& s) {
  double best = 1.0;
  for (const auto& h : candidates(cls, points_of(s))) best = std::min(best, risk(h, s));
  return best;
}

// Generators -----------------------------------------------------------------

/// Points on a coarse grid so that ties are common.
inline Dataset random_threshold_data(std::mt19937_64& gen, std::size_t m, int grid = 6) {
  std::uniform_int_distribution<int> xs(0, grid - 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<LabeledExample> ex;
  for (std::size_t i = 0; i < m; ++i) ex.push_back({xs(gen) / static_cast<double>(grid), coin(gen) ? 1 : -1});
  return Dataset(std::move(ex));
}

inline HypothesisClass random_finite_class(std::mt19937_64& gen, int max_h = 5, int max_d = 4) {
  std::uniform_int_distribution<int> nh(1, max_h), nd(1, max_d);
  std::bernoulli_distribution coin(0.5);
  const int h = nh(gen), d = nd(gen);
  SignTable t(h, d);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < d; ++j) t(i, j) = coin(gen) ? 1 : -1;
  }
  return HypothesisClass::finite(std::move(t));
}

inline Dataset random_token_data(std::mt19937_64& gen, std::size_t m, std::size_t domain) {
  std::uniform_int_distribution<std::size_t> xs(0, domain - 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<LabeledExample> ex;
  for (std::size_t i = 0; i < m; ++i) ex.push_back({static_cast<double>(xs(gen)), coin(gen) ? 1 : -1});
  return Dataset(std::move(ex));
}

}  // namespace oracle
