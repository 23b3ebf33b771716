#pragma once

#include <Eigen/Core>
#include <span>

#include "mspac/core.hpp"
#include "mspac/hypothesis.hpp"

namespace mspac {

/// Symmetric N x N matrix of pairwise discrepancies, zero diagonal, entries in [0, 1].
using DiscrepancyMatrix = Eigen::MatrixXd;

/// Discrepancy as an exact fraction: sup_h |e_a(h) m_b - e_b(h) m_a| / (m_a m_b),
/// where e_a(h) is the number of errors of h on dataset a.
struct ExactDiscrepancy {
  std::int64_t numerator;
  std::int64_t denominator;

  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

/// sup over the class of |R_a(h) - R_b(h)| for zero-one loss.
///
/// The supremum is attained on one of the dichotomies the class realizes on the
/// pooled points, so it is computed exactly: a sorted sweep over the n + 1 cuts
/// for thresholds, a pass over every hypothesis for finite classes. Counts are
/// compared in integers, so datasets of unequal size are handled exactly too.
ExactDiscrepancy discrepancy_exact(const HypothesisClass& cls, const Dataset& a, const Dataset& b);

inline double discrepancy(const HypothesisClass& cls, const Dataset& a, const Dataset& b) {
  return discrepancy_exact(cls, a, b).value();
}

/// All N (N - 1) / 2 pairwise discrepancies, each computed once and mirrored.
DiscrepancyMatrix discrepancy_matrix(const HypothesisClass& cls, std::span<const Dataset> sources);

inline DiscrepancyMatrix discrepancy_matrix(const HypothesisClass& cls, const SourceCollection& s) {
  return discrepancy_matrix(cls, s.sources());
}

}  // namespace mspac
