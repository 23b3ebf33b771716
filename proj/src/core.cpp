#include "mspac/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mspac {

Dataset::Dataset(std::vector<LabeledExample> examples) : examples_(std::move(examples)) {
  if (examples_.empty()) throw DomainError("dataset must contain at least one example");
  for (const auto& e : examples_) {
    if (!is_label(e.y)) throw DomainError("label must be -1 or +1");
    if (!std::isfinite(e.x)) throw DomainError("input point must be finite");
  }
}

Dataset concatenate(std::span<const Dataset> parts) {
  std::vector<std::size_t> all(parts.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return concatenate(parts, all);
}

Dataset concatenate(std::span<const Dataset> parts, std::span<const std::size_t> indices) {
  std::vector<LabeledExample> out;
  for (auto i : indices) {
    if (i >= parts.size()) throw DomainError("source index out of range");
    const auto ex = parts[i].examples();
    out.insert(out.end(), ex.begin(), ex.end());
  }
  return Dataset(std::move(out));
}

namespace {

void check_equal_sizes(std::span<const Dataset> sources) {
  if (sources.empty()) throw ContractError("a source collection needs N >= 1 sources");
  const auto m = sources.front().size();
  for (const auto& s : sources) {
    if (s.size() != m) throw ContractError("all sources must have the same size m");
  }
}

}  // namespace

SourceCollection::SourceCollection(std::vector<Dataset> sources) : sources_(std::move(sources)) {
  check_equal_sizes(sources_);
}

SourceCollection::SourceCollection(std::vector<Dataset> sources, std::vector<Dataset> clean_sources,
                                   std::vector<std::size_t> preserved_set)
    : sources_(std::move(sources)),
      clean_(std::move(clean_sources)),
      preserved_(std::move(preserved_set)) {
  check_equal_sizes(sources_);
  check_equal_sizes(*clean_);
  if (clean_->size() != sources_.size() || clean_->front().size() != sources_.front().size()) {
    throw ContractError("clean copy must have the same shape as the sources");
  }
  std::sort(preserved_->begin(), preserved_->end());
  if (std::adjacent_find(preserved_->begin(), preserved_->end()) != preserved_->end()) {
    throw ContractError("preserved set contains duplicates");
  }
  if (!preserved_->empty() && preserved_->back() >= sources_.size()) {
    throw ContractError("preserved set index out of range");
  }
}

SourceCollection SourceCollection::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != sources_.size()) throw ContractError("permutation has wrong length");
  std::vector<bool> hit(perm.size(), false);
  for (auto p : perm) {
    if (p >= perm.size() || hit[p]) throw ContractError("not a permutation of the source indices");
    hit[p] = true;
  }
  std::vector<Dataset> out;
  out.reserve(perm.size());
  for (auto p : perm) out.push_back(sources_.at(p));
  if (!has_ground_truth()) return SourceCollection(std::move(out));

  std::vector<Dataset> clean;
  std::vector<std::size_t> inverse(perm.size());
  for (std::size_t j = 0; j < perm.size(); ++j) {
    clean.push_back((*clean_)[perm[j]]);
    inverse[perm[j]] = j;
  }
  std::vector<std::size_t> g;
  for (auto i : *preserved_) g.push_back(inverse[i]);
  return SourceCollection(std::move(out), std::move(clean), std::move(g));
}

double alpha_of(std::size_t n_sources, std::size_t k_preserved) {
  if (k_preserved < 1 || k_preserved > n_sources) {
    throw DomainError("alpha_of requires 1 <= k <= N");
  }
  return static_cast<double>(n_sources - k_preserved) / static_cast<double>(n_sources);
}

bool verify_fixed_set_contract(const SourceCollection& s) {
  if (!s.has_ground_truth()) throw ContractError("fixed-set check needs clean sources and G");
  const auto& clean = *s.clean_sources();
  for (auto i : *s.preserved_set()) {
    if (s.sources()[i] != clean[i]) return false;
  }
  return true;
}

bool verify_flexible_set_contract(const SourceCollection& s, std::size_t k) {
  if (!s.clean_sources()) throw ContractError("flexible-set check needs clean sources");
  const auto& clean = *s.clean_sources();
  std::size_t untouched = 0;
  for (std::size_t i = 0; i < s.num_sources(); ++i) {
    if (s.sources()[i] == clean[i]) ++untouched;
  }
  return untouched >= k;
}

namespace {

// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng Rng::derive(Purpose purpose, std::uint64_t index) const {
  auto h = mix(seed_);
  h = mix(h ^ static_cast<std::uint64_t>(purpose));
  h = mix(h ^ index);
  return Rng(h);
}

std::uint64_t uniform_index(Rng::Engine& gen, std::uint64_t n) {
  if (n == 0) throw DomainError("uniform_index needs n >= 1");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = gen();
  } while (r >= limit);
  return r % n;
}

std::vector<std::size_t> random_permutation(Rng::Engine& gen, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(p[i - 1], p[uniform_index(gen, i)]);
  }
  return p;
}

}  // namespace mspac
