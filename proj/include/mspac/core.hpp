#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mspac {

// Error taxonomy shared by every module.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};
struct SizeError : std::length_error {
  using std::length_error::length_error;
};
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValueError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Binary label, always -1 or +1.
using Label = int;

inline bool is_label(Label y) { return y == -1 || y == 1; }

/// A point of the input space. Threshold classes read it as a real number;
/// finite classes read it as a token id 0, 1, ..., D-1.
using Point = double;

struct LabeledExample {
  Point x;
  Label y;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
  friend auto operator<=>(const LabeledExample&, const LabeledExample&) = default;
};

/// Ordered multiset of m >= 1 labeled examples drawn from one source.
/// Duplicates are allowed.
class Dataset {
 public:
  explicit Dataset(std::vector<LabeledExample> examples);

  std::size_t size() const { return examples_.size(); }
  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }
  std::span<const LabeledExample> examples() const { return examples_; }
  auto begin() const { return examples_.begin(); }
  auto end() const { return examples_.end(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
  friend auto operator<=>(const Dataset& a, const Dataset& b) {
    return a.examples_ <=> b.examples_;
  }

 private:
  std::vector<LabeledExample> examples_;
};

/// Multiset union of several datasets, in source order.
Dataset concatenate(std::span<const Dataset> parts);
Dataset concatenate(std::span<const Dataset> parts, std::span<const std::size_t> indices);

/// N equally sized sources as handed to a learner, plus ground truth that only
/// the harness and tests may look at.
class SourceCollection {
 public:
  explicit SourceCollection(std::vector<Dataset> sources);
  SourceCollection(std::vector<Dataset> sources, std::vector<Dataset> clean_sources,
                   std::vector<std::size_t> preserved_set);

  std::size_t num_sources() const { return sources_.size(); }
  std::size_t source_size() const { return sources_.front().size(); }
  std::span<const Dataset> sources() const { return sources_; }

  bool has_ground_truth() const { return clean_.has_value() && preserved_.has_value(); }
  const std::optional<std::vector<Dataset>>& clean_sources() const { return clean_; }
  const std::optional<std::vector<std::size_t>>& preserved_set() const { return preserved_; }

  /// Same data with sources relabeled: new source j is old source perm[j].
  /// Ground truth is permuted along.
  SourceCollection permuted(std::span<const std::size_t> perm) const;

 private:
  std::vector<Dataset> sources_;
  std::optional<std::vector<Dataset>> clean_;
  std::optional<std::vector<std::size_t>> preserved_;
};

/// Fraction of corrupted sources, (N - k) / N.
double alpha_of(std::size_t n_sources, std::size_t k_preserved);

/// Every source in G equals its clean copy element-wise.
bool verify_fixed_set_contract(const SourceCollection& s);

/// At least k sources equal their clean copies element-wise.
bool verify_flexible_set_contract(const SourceCollection& s, std::size_t k);

enum class Purpose : std::uint64_t {
  kSampling = 1,
  kAdversary = 2,
  kPermutation = 3,
  kRademacher = 4,
  kCell = 5,
  kTrial = 6,
};

/// Seed tree for reproducible experiments. Each node is a 64-bit seed; derive()
/// hashes (seed, purpose, index) into a child, so streams for different
/// purposes never share state and results do not depend on evaluation order.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t master_seed) : seed_(master_seed) {}

  Rng derive(Purpose purpose, std::uint64_t index) const;
  Engine engine() const { return Engine(seed_); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng::Engine& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), by rejection so the result is exact.
std::uint64_t uniform_index(Rng::Engine& gen, std::uint64_t n);

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> random_permutation(Rng::Engine& gen, std::size_t n);

}  // namespace mspac
