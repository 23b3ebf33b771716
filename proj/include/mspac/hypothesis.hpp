#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mspac/core.hpp"

namespace mspac {

/// Rows are hypotheses, columns are domain tokens, entries are +1 / -1.
using SignTable = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SignVector = Eigen::Matrix<std::int8_t, Eigen::Dynamic, 1>;

inline constexpr std::size_t kDefaultDichotomyCap = 64;

class Hypothesis;

/// A hypothesis family with exact ERM and dichotomy enumeration.
///
/// Threshold1D holds h_t(x) = +1 iff x >= t for t in [-inf, +inf]. The boundary
/// is inclusive.
/// FiniteExplicit holds a table of labels over the token domain {0, ..., D-1}.
class HypothesisClass {
 public:
  enum class Kind { kFiniteExplicit, kThreshold1D };

  static HypothesisClass threshold();
  static HypothesisClass finite(SignTable table);
  /// Two hypotheses on two tokens that agree on token 0 and disagree on token 1.
  /// This is the smallest non-trivial class.
  static HypothesisClass agreeing_pair();

  Kind kind() const { return kind_; }
  bool is_threshold() const { return kind_ == Kind::kThreshold1D; }

  /// Number of hypotheses of a finite class.
  std::size_t size() const;
  /// Number of domain tokens of a finite class.
  std::size_t domain_size() const;
  const SignTable& table() const;

  Hypothesis at(std::size_t index) const;
  Hypothesis at_threshold(double t) const;

  /// 1 for thresholds; brute force for finite classes (|H| <= 16, D <= 16).
  std::size_t vc_dimension() const;

  /// Throws DomainError if x is not a point of the declared domain.
  void check_point(Point x) const;

  friend bool operator==(const HypothesisClass& a, const HypothesisClass& b);

 private:
  HypothesisClass(Kind kind, std::shared_ptr<const SignTable> table)
      : kind_(kind), table_(std::move(table)) {}

  Kind kind_;
  std::shared_ptr<const SignTable> table_;
};

/// One member of a class: a row index (finite) or a threshold value.
class Hypothesis {
 public:
  const HypothesisClass& family() const { return family_; }
  std::size_t index() const { return index_; }
  double threshold() const { return threshold_; }

  Label operator()(Point x) const;

  friend bool operator==(const Hypothesis& a, const Hypothesis& b) {
    return a.family_ == b.family_ && a.index_ == b.index_ && a.threshold_ == b.threshold_;
  }

 private:
  friend class HypothesisClass;
  Hypothesis(HypothesisClass family, std::size_t index, double threshold)
      : family_(std::move(family)), index_(index), threshold_(threshold) {}

  HypothesisClass family_;
  std::size_t index_ = 0;
  double threshold_ = 0.0;
};

inline double zero_one_loss(Label prediction, Label y) { return prediction == y ? 0.0 : 1.0; }

Label predict(const Hypothesis& h, Point x);

/// Number of misclassified examples.
std::size_t error_count(const Hypothesis& h, const Dataset& s);

/// (1/m) * error_count, a multiple of 1/m.
double empirical_risk(const Hypothesis& h, const Dataset& s);

/// Exact empirical risk minimizer. Ties go to the smallest index (finite) or the
/// smallest candidate threshold among {-inf, midpoints of distinct x, +inf}.
Hypothesis erm(const HypothesisClass& cls, const Dataset& s);

/// Every sign vector (h(x_1), ..., h(x_n)) realized by the class.
/// Threshold vectors come in sweep order (t from -inf up); finite vectors in
/// order of first occurrence by hypothesis index.
std::vector<SignVector> dichotomies(const HypothesisClass& cls, std::span<const Point> points,
                                    std::size_t cap = kDefaultDichotomyCap);

/// Witness that a class is non-trivial: h1, h2 agree on x1 while
/// h1(x2) = +1 and h2(x2) = -1.
struct NontrivialPair {
  Point x1;
  Point x2;
  Hypothesis h1;
  Hypothesis h2;
};

std::optional<NontrivialPair> find_nontrivial_pair(const HypothesisClass& cls);

}  // namespace mspac
