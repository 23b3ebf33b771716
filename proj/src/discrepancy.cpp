#include "mspac/discrepancy.hpp"

#include <algorithm>
#include <cstdlib>

namespace mspac {

namespace {

struct Tagged {
  Point x;
  Label y;
  bool from_a;
};

}  // namespace

ExactDiscrepancy discrepancy_exact(const HypothesisClass& cls, const Dataset& a, const Dataset& b) {
  const auto ma = static_cast<std::int64_t>(a.size());
  const auto mb = static_cast<std::int64_t>(b.size());
  for (const auto& e : a) cls.check_point(e.x);
  for (const auto& e : b) cls.check_point(e.x);

  std::int64_t best = 0;
  if (!cls.is_threshold()) {
    for (std::size_t j = 0; j < cls.size(); ++j) {
      const auto h = cls.at(j);
      const auto ea = static_cast<std::int64_t>(error_count(h, a));
      const auto eb = static_cast<std::int64_t>(error_count(h, b));
      best = std::max(best, std::abs(ea * mb - eb * ma));
    }
    return {best, ma * mb};
  }

  std::vector<Tagged> pooled;
  pooled.reserve(a.size() + b.size());
  for (const auto& e : a) pooled.push_back({e.x, e.y, true});
  for (const auto& e : b) pooled.push_back({e.x, e.y, false});
  std::sort(pooled.begin(), pooled.end(), [](const Tagged& p, const Tagged& q) { return p.x < q.x; });

  // Cut at -inf: everything predicted +1, errors are the negatives.
  std::int64_t ea = 0;
  std::int64_t eb = 0;
  for (const auto& p : pooled) {
    if (p.y < 0) (p.from_a ? ea : eb) += 1;
  }
  best = std::abs(ea * mb - eb * ma);
  for (std::size_t i = 0; i < pooled.size();) {
    const Point x = pooled[i].x;
    for (; i < pooled.size() && pooled[i].x == x; ++i) {
      (pooled[i].from_a ? ea : eb) += pooled[i].y > 0 ? 1 : -1;
    }
    best = std::max(best, std::abs(ea * mb - eb * ma));
  }
  return {best, ma * mb};
}

DiscrepancyMatrix discrepancy_matrix(const HypothesisClass& cls, std::span<const Dataset> sources) {
  const auto n = static_cast<Eigen::Index>(sources.size());
  DiscrepancyMatrix d = DiscrepancyMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = discrepancy(cls, sources[static_cast<std::size_t>(i)],
                                      sources[static_cast<std::size_t>(j)]);
    }
  }
  return d;
}

}  // namespace mspac
