#include "mspac/adversaries.hpp"

#include <algorithm>
#include <numeric>

namespace mspac {

AdversarySpec AdversarySpec::identity() { return AdversarySpec{}; }

AdversarySpec AdversarySpec::label_flip(std::vector<std::size_t> preserved) {
  return AdversarySpec{Kind::kLabelFlipFixedSet, std::move(preserved), std::nullopt, std::nullopt};
}

AdversarySpec AdversarySpec::rare_point_merge(std::vector<std::size_t> preserved, AttackTarget target) {
  return AdversarySpec{Kind::kRarePointMergeAttack, std::move(preserved), std::move(target), std::nullopt};
}

AdversarySpec AdversarySpec::source_count(std::vector<std::size_t> preserved, AttackTarget target) {
  return AdversarySpec{Kind::kSourceCountAttack, std::move(preserved), std::move(target), std::nullopt};
}

std::string to_string(AdversarySpec::Kind kind) {
  switch (kind) {
    case AdversarySpec::Kind::kIdentity: return "identity";
    case AdversarySpec::Kind::kLabelFlipFixedSet: return "label_flip";
    case AdversarySpec::Kind::kRarePointMergeAttack: return "rare_point_merge";
    case AdversarySpec::Kind::kSourceCountAttack: return "source_count";
  }
  return "?";
}

AdversarySpec::Kind adversary_kind_from_string(const std::string& name) {
  for (auto k : {AdversarySpec::Kind::kIdentity, AdversarySpec::Kind::kLabelFlipFixedSet,
                 AdversarySpec::Kind::kRarePointMergeAttack, AdversarySpec::Kind::kSourceCountAttack}) {
    if (to_string(k) == name) return k;
  }
  throw DomainError("unknown adversary kind: " + name);
}

std::vector<std::size_t> leading_set(std::size_t k) {
  std::vector<std::size_t> g(k);
  std::iota(g.begin(), g.end(), std::size_t{0});
  return g;
}

namespace {

/// Indices outside G, ascending.
std::vector<std::size_t> complement(std::size_t n, std::span<const std::size_t> preserved) {
  std::vector<bool> in_g(n, false);
  for (auto i : preserved) {
    if (i >= n) throw ContractError("preserved index out of range");
    in_g[i] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_g[i]) out.push_back(i);
  }
  return out;
}

bool contains_point(const Dataset& s, Point x) {
  return std::any_of(s.begin(), s.end(), [x](const auto& e) { return e.x == x; });
}

void check_shape(std::span<const Dataset> clean) {
  if (clean.empty()) throw ContractError("adversary needs at least one source");
  for (const auto& s : clean) {
    if (s.size() != clean.front().size()) throw ContractError("sources must have equal size");
  }
}

}  // namespace

std::vector<Dataset> label_flip_fixed_set(std::span<const Dataset> clean, std::span<const std::size_t> preserved) {
  check_shape(clean);
  std::vector<Dataset> out(clean.begin(), clean.end());
  for (auto i : complement(clean.size(), preserved)) {
    std::vector<LabeledExample> flipped(clean[i].begin(), clean[i].end());
    for (auto& e : flipped) e.y = -e.y;
    out[i] = Dataset(std::move(flipped));
  }
  return out;
}

std::vector<Dataset> rare_point_merge_attack(std::span<const Dataset> clean, std::span<const std::size_t> preserved,
                                             const AttackTarget& target, std::optional<std::size_t> cap) {
  check_shape(clean);
  const auto bad = complement(clean.size(), preserved);
  if (bad.empty()) throw ContractError("merge attack needs at least one corrupted source");
  const auto m = clean.front().size();
  const auto& f = target.labeler;

  std::size_t rare_in_g = 0;
  for (auto i : preserved) {
    rare_in_g += static_cast<std::size_t>(
        std::count_if(clean[i].begin(), clean[i].end(), [&](const auto& e) { return e.x == target.x2; }));
  }
  const std::size_t budget = bad.size() * m;
  const std::size_t inserted = std::min({rare_in_g, cap.value_or(budget), budget});

  std::vector<Dataset> out(clean.begin(), clean.end());
  const LabeledExample wrong_rare{target.x2, -f(target.x2)};
  const LabeledExample common{target.x1, f(target.x1)};
  std::size_t slot = 0;
  for (auto i : bad) {
    std::vector<LabeledExample> fill(m);
    for (auto& e : fill) e = slot++ < inserted ? wrong_rare : common;
    out[i] = Dataset(std::move(fill));
  }
  return out;
}

std::vector<Dataset> source_count_attack(std::span<const Dataset> clean, std::span<const std::size_t> preserved,
                                         const AttackTarget& target) {
  check_shape(clean);
  const auto bad = complement(clean.size(), preserved);
  if (bad.empty()) throw ContractError("source-count attack needs at least one corrupted source");
  const auto m = clean.front().size();
  const auto& f = target.labeler;

  const auto sources_with_rare = static_cast<std::size_t>(
      std::count_if(clean.begin(), clean.end(), [&](const auto& s) { return contains_point(s, target.x2); }));
  // alpha N = N - k corrupted sources.
  if (sources_with_rare > bad.size()) return {clean.begin(), clean.end()};

  std::vector<std::size_t> replay;
  std::vector<std::size_t> g(preserved.begin(), preserved.end());
  std::sort(g.begin(), g.end());
  for (auto i : g) {
    if (contains_point(clean[i], target.x2)) replay.push_back(i);
  }

  std::vector<Dataset> out(clean.begin(), clean.end());
  for (std::size_t slot = 0; slot < bad.size(); ++slot) {
    std::vector<LabeledExample> data;
    data.reserve(m);
    if (slot < replay.size()) {
      for (const auto& e : clean[replay[slot]]) {
        data.push_back(e.x == target.x2 ? LabeledExample{e.x, -f(e.x)} : LabeledExample{e.x, f(e.x)});
      }
    } else {
      data.assign(m, LabeledExample{target.x1, f(target.x1)});
    }
    out[bad[slot]] = Dataset(std::move(data));
  }
  return out;
}

SourceCollection apply(const AdversarySpec& adv, const SourceCollection& clean, const Rng& /*rng*/) {
  const auto n = clean.num_sources();
  const auto in = clean.sources();
  auto needs_target = [&]() -> const AttackTarget& {
    if (!adv.target) throw ContractError("attack needs x1, x2 and the labeling function");
    return *adv.target;
  };

  std::vector<std::size_t> g = adv.kind == AdversarySpec::Kind::kIdentity && adv.preserved.empty()
                                   ? leading_set(n)
                                   : adv.preserved;
  for (auto i : g) {
    if (i >= n) throw ContractError("preserved index out of range for this collection");
  }

  std::vector<Dataset> out;
  switch (adv.kind) {
    case AdversarySpec::Kind::kIdentity:
      out.assign(in.begin(), in.end());
      break;
    case AdversarySpec::Kind::kLabelFlipFixedSet:
      out = label_flip_fixed_set(in, g);
      break;
    case AdversarySpec::Kind::kRarePointMergeAttack:
      out = rare_point_merge_attack(in, g, needs_target(), adv.cap);
      break;
    case AdversarySpec::Kind::kSourceCountAttack:
      out = source_count_attack(in, g, needs_target());
      break;
  }
  return SourceCollection(std::move(out), std::vector<Dataset>(in.begin(), in.end()), std::move(g));
}

}  // namespace mspac
