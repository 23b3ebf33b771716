#pragma once

#include <cstdint>
#include <string>

#include "mspac/core.hpp"
#include "mspac/hypothesis.hpp"

namespace mspac {

/// Upper limit on elementary steps spent by rademacher_exact before it gives up.
inline constexpr double kDefaultRademacherWorkCap = 2e8;

/// Empirical Rademacher complexity of the zero-one loss class on s,
/// E_sigma sup_h (1/n) sum_i sigma_i l(h(x_i), y_i), computed exactly.
///
/// Thresholds: with examples sorted by x, the sign-weighted loss of the cut
/// before group p is sum_i sigma_i [y_i < 0] plus a +-1 random walk over the
/// first p groups. The first sum has mean zero, so the complexity is the
/// expected running maximum of that walk. All groups of size one give the
/// closed form 2 E[S_n^+] - P(S_n >= 1); otherwise a Lindley recursion over
/// the walk's future maximum is used.
///
/// Finite classes: examples are grouped by (token, label); each hypothesis
/// sees a group only through its summed signs, so the expectation is a finite
/// sum over the group-sum lattice. Groups on which every hypothesis has the
/// same loss are dropped (mean-zero shift).
///
/// Throws SizeError when the work estimate exceeds work_cap.
double rademacher_exact(const HypothesisClass& cls, const Dataset& s,
                        double work_cap = kDefaultRademacherWorkCap);

struct RademacherEstimate {
  double estimate;
  double std_error;
};

/// Monte-Carlo estimate from `draws` i.i.d. sign vectors. Draws are split into
/// fixed chunks of 256, chunk c using rng.derive(kRademacher, c), so the result
/// does not depend on how chunks are scheduled.
RademacherEstimate rademacher_mc(const HypothesisClass& cls, const Dataset& s, std::size_t draws,
                                 const Rng& rng);

/// 2 * rad + 3 * sqrt(ln(2 / delta) / (2 m)).
double rademacher_rate(double rad, std::size_t m, double delta);

/// C sqrt(d / m) + sqrt(2 ln(2 / delta) / m).
double rate_vc(std::size_t m, double delta, std::size_t vc_dim, double constant = 1.0);

/// Uniform-convergence rate s(m, delta, S) for one hypothesis class.
class RateFunction {
 public:
  enum class Kind { kRademacherExact, kRademacherMC, kRademacherAuto, kVC };

  static RateFunction rademacher_exact(HypothesisClass cls);
  static RateFunction rademacher_mc(HypothesisClass cls, std::size_t draws, Rng rng);
  /// Exact when affordable, Monte-Carlo otherwise.
  static RateFunction rademacher_auto(HypothesisClass cls, std::size_t draws, Rng rng);
  static RateFunction vc(std::size_t vc_dim, double constant = 1.0);

  Kind kind() const { return kind_; }

  /// Rademacher term alone (zero for the VC rate).
  double complexity(const Dataset& s) const;

  double operator()(std::size_t m, double delta, const Dataset& s) const;

 private:
  RateFunction(Kind kind, std::optional<HypothesisClass> cls, std::size_t draws, Rng rng,
               std::size_t vc_dim, double constant)
      : kind_(kind), cls_(std::move(cls)), draws_(draws), rng_(rng), vc_dim_(vc_dim), constant_(constant) {}

  Kind kind_;
  std::optional<HypothesisClass> cls_;
  std::size_t draws_;
  Rng rng_;
  std::size_t vc_dim_;
  double constant_;
};

/// s(m, delta, S) with the Rademacher rate and exact complexity.
double rate_rademacher(const HypothesisClass& cls, std::size_t m, double delta, const Dataset& s);

struct BoundInputs {
  double rad_good;        ///< complexity of the pooled preserved data S_G
  double max_rad_source;  ///< max over sources of the per-source complexity
  std::size_t k;
  std::size_t m;
  std::size_t n_sources;
  double delta;
};

/// Right-hand side of an excess-risk guarantee, split into the part driven by
/// the pooled clean data and the alpha-weighted part driven by single sources.
struct BoundReport {
  double rhs_total;
  double term_group;
  double term_adversary;
  double alpha;
  double log_binomial;  ///< log C(N, k) or its relaxation; 0 for the fixed-set bound
  BoundInputs inputs;
};

/// 4 R_G + 6 sqrt(ln(4/delta) / (2km)) + alpha (18 sqrt(ln(4N/delta) / (2m)) + 12 max_i R_i).
BoundReport bound_fixed_set(const BoundInputs& in);

enum class BinomialMode {
  kExact,        ///< ln C(N, k)
  kEntropy,      ///< H(alpha) N ln 2
  kEntropySqrt,  ///< 2 sqrt(alpha (1 - alpha)) N ln 2
};

/// Fixed-set bound with ln(4/delta) replaced by ln(4 C(N, k) / delta) in the
/// group term.
BoundReport bound_flexible_set(const BoundInputs& in, BinomialMode mode = BinomialMode::kExact);

/// ln C(n, k): exact integer arithmetic for n <= 60, log-gamma above.
double log_binomial(std::size_t n, std::size_t k);

/// Binary entropy in bits.
double binary_entropy(double p);

enum class AdversaryModel { kFixedSet, kFlexibleSet };

/// ceil(scale * ln(N/delta) / eps^2 * (1/sqrt((1-alpha) N) + a)^2) with a = alpha
/// for the fixed-set model and a = alpha^(1/4) for the flexible-set model. The
/// scale stands in for the unknown constant of the big-O statement.
std::uint64_t sample_complexity_upper(AdversaryModel model, double eps, double delta, std::size_t n_sources,
                                      double alpha, double scale);

std::string to_string(RateFunction::Kind kind);
std::string to_string(BinomialMode mode);

}  // namespace mspac
