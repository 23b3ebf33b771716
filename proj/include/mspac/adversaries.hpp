#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mspac/core.hpp"
#include "mspac/hypothesis.hpp"

namespace mspac {

/// Full-knowledge attack parameters: the two support points and the labeling
/// function the clean data was drawn with.
struct AttackTarget {
  Point x1;
  Point x2;
  Hypothesis labeler;
};

struct AdversarySpec {
  enum class Kind { kIdentity, kLabelFlipFixedSet, kRarePointMergeAttack, kSourceCountAttack };

  Kind kind = Kind::kIdentity;
  /// Sources the adversary leaves untouched. Empty for Identity means all.
  std::vector<std::size_t> preserved;
  std::optional<AttackTarget> target;
  /// Budget of inserted rare points for the merge attack; defaults to every
  /// slot of the corrupted sources, (N - k) m.
  std::optional<std::size_t> cap;

  static AdversarySpec identity();
  static AdversarySpec label_flip(std::vector<std::size_t> preserved);
  static AdversarySpec rare_point_merge(std::vector<std::size_t> preserved, AttackTarget target);
  static AdversarySpec source_count(std::vector<std::size_t> preserved, AttackTarget target);
};

std::string to_string(AdversarySpec::Kind kind);
AdversarySpec::Kind adversary_kind_from_string(const std::string& name);

/// G = {0, ..., k-1}.
std::vector<std::size_t> leading_set(std::size_t k);

/// Runs the adversary on clean data. The result keeps the input as its clean
/// copy and records G, so the contract checks can be run on it.
SourceCollection apply(const AdversarySpec& adv, const SourceCollection& clean, const Rng& rng);

/// Every label outside G is negated.
std::vector<Dataset> label_flip_fixed_set(std::span<const Dataset> clean, std::span<const std::size_t> preserved);

/// Keeps G, then fills the other sources row-major with min(C, cap) copies of
/// (x2, -f(x2)), C being the number of x2 occurrences inside G, and pads the
/// remaining slots with (x1, f(x1)).
std::vector<Dataset> rare_point_merge_attack(std::span<const Dataset> clean, std::span<const std::size_t> preserved,
                                             const AttackTarget& target, std::optional<std::size_t> cap = std::nullopt);

/// If at most N - k sources contain x2, the corrupted sources first replay the
/// preserved sources that contain x2 with the x2 labels negated, then pad with
/// sources made of (x1, f(x1)) only. Otherwise the data is returned unchanged.
std::vector<Dataset> source_count_attack(std::span<const Dataset> clean, std::span<const std::size_t> preserved,
                                         const AttackTarget& target);

}  // namespace mspac
