#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "mspac/complexity.hpp"
#include "mspac/core.hpp"
#include "mspac/discrepancy.hpp"
#include "mspac/hypothesis.hpp"

namespace mspac {

using PassMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kDefaultDelta = 0.05;

/// Result of the pairwise discrepancy test.
struct FilterOutcome {
  std::vector<std::size_t> trusted;  ///< sorted source indices
  PassMatrix pass;                   ///< pass(i, j): d(S_i, S_j) <= s_i + s_j, i != j
  DiscrepancyMatrix distances;
  std::vector<double> thresholds;    ///< s(m, delta / 2N, S_i)
  bool fallback_used = false;        ///< nobody passed, so every source was trusted
};

struct LearnerOutput {
  Hypothesis hypothesis;
  std::optional<FilterOutcome> filter;
  std::vector<std::size_t> trained_on;  ///< source indices whose union was fed to ERM
  double trained_risk;                  ///< empirical risk on that union
};

/// Marks source i trusted when d(S_i, S_j) <= s(m, delta/2N, S_i) + s(m, delta/2N, S_j)
/// holds for at least floor(N/2) indices j != i. The comparison is non-strict.
/// An empty trusted set falls back to all sources and is flagged.
FilterOutcome filter_sources(const HypothesisClass& cls, std::span<const Dataset> sources, double delta,
                             const RateFunction& rate);

/// Filter, then ERM over the union of trusted sources.
LearnerOutput robust_learn(const HypothesisClass& cls, std::span<const Dataset> sources, double delta,
                           const RateFunction& rate);

/// ERM over the union of all sources, no filtering.
LearnerOutput merge_erm(const HypothesisClass& cls, std::span<const Dataset> sources);

LearnerOutput single_source_erm(const HypothesisClass& cls, std::span<const Dataset> sources,
                                std::size_t source_index);

/// ERM over the true preserved set G. Needs ground truth, so only the harness
/// can call it; it is the unattainable comparator.
LearnerOutput oracle_clean_erm(const HypothesisClass& cls, const SourceCollection& s);

}  // namespace mspac
