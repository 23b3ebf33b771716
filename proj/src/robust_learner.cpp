#include "mspac/robust_learner.hpp"

#include <numeric>

namespace mspac {

namespace {

std::size_t common_size(std::span<const Dataset> sources) {
  if (sources.empty()) throw ContractError("learner needs at least one source");
  const auto m = sources.front().size();
  for (const auto& s : sources) {
    if (s.size() != m) throw ContractError("all sources must have the same size m");
  }
  return m;
}

LearnerOutput erm_on(const HypothesisClass& cls, std::span<const Dataset> sources,
                     std::vector<std::size_t> indices, std::optional<FilterOutcome> filter) {
  const auto pooled = concatenate(sources, indices);
  auto h = erm(cls, pooled);
  const double risk = empirical_risk(h, pooled);
  return LearnerOutput{std::move(h), std::move(filter), std::move(indices), risk};
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

FilterOutcome filter_sources(const HypothesisClass& cls, std::span<const Dataset> sources, double delta,
                             const RateFunction& rate) {
  const auto m = common_size(sources);
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("confidence delta must lie in (0, 1)");
  const auto n = sources.size();
  const double split = delta / (2.0 * static_cast<double>(n));

  FilterOutcome out;
  out.thresholds.reserve(n);
  for (const auto& s : sources) out.thresholds.push_back(rate(m, split, s));
  out.distances = discrepancy_matrix(cls, sources);

  const auto ni = static_cast<Eigen::Index>(n);
  out.pass = PassMatrix::Constant(ni, ni, false);
  const std::size_t needed = n / 2;
  for (Eigen::Index i = 0; i < ni; ++i) {
    std::size_t passing = 0;
    for (Eigen::Index j = 0; j < ni; ++j) {
      if (i == j) continue;
      const double bound = out.thresholds[static_cast<std::size_t>(i)] + out.thresholds[static_cast<std::size_t>(j)];
      out.pass(i, j) = out.distances(i, j) <= bound;
      passing += out.pass(i, j);
    }
    if (passing >= needed) out.trusted.push_back(static_cast<std::size_t>(i));
  }
  if (out.trusted.empty()) {
    out.trusted = all_indices(n);
    out.fallback_used = true;
  }
  return out;
}

LearnerOutput robust_learn(const HypothesisClass& cls, std::span<const Dataset> sources, double delta,
                           const RateFunction& rate) {
  auto f = filter_sources(cls, sources, delta, rate);
  auto trusted = f.trusted;
  return erm_on(cls, sources, std::move(trusted), std::move(f));
}

LearnerOutput merge_erm(const HypothesisClass& cls, std::span<const Dataset> sources) {
  if (sources.empty()) throw ContractError("learner needs at least one source");
  return erm_on(cls, sources, all_indices(sources.size()), std::nullopt);
}

LearnerOutput single_source_erm(const HypothesisClass& cls, std::span<const Dataset> sources,
                                std::size_t source_index) {
  if (source_index >= sources.size()) throw DomainError("source index out of range");
  return erm_on(cls, sources, {source_index}, std::nullopt);
}

LearnerOutput oracle_clean_erm(const HypothesisClass& cls, const SourceCollection& s) {
  if (!s.preserved_set()) throw ContractError("oracle learner needs the preserved set G");
  const auto& g = *s.preserved_set();
  if (g.empty()) throw ContractError("preserved set is empty");
  return erm_on(cls, s.sources(), g, std::nullopt);
}

}  // namespace mspac
