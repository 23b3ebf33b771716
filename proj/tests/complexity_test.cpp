#include <gtest/gtest.h>

#include <cmath>

#include "mspac/complexity.hpp"
#include "mspac/datagen.hpp"
#include "oracles.hpp"

using namespace mspac;

namespace {

Dataset ds(std::initializer_list<LabeledExample> e) { return Dataset(std::vector<LabeledExample>(e)); }

HypothesisClass all_labelings(int d) {
  SignTable t(1 << d, d);
  for (int r = 0; r < (1 << d); ++r) {
    for (int j = 0; j < d; ++j) t(r, j) = (r >> j) & 1 ? 1 : -1;
  }
  return HypothesisClass::finite(std::move(t));
}

}  // namespace

TEST(RademacherExact, SingleHypothesisIsZero) {
  SignTable t(1, 3);
  t << 1, -1, 1;
  const auto cls = HypothesisClass::finite(t);
  EXPECT_NEAR(rademacher_exact(cls, ds({{0, 1}, {1, 1}, {2, -1}, {2, 1}})), 0.0, 1e-15);
}

TEST(RademacherExact, ShatteringClassIsHalf) {
  const auto cls = all_labelings(5);
  EXPECT_NEAR(rademacher_exact(cls, ds({{0, 1}, {1, -1}, {2, 1}, {3, 1}, {4, -1}})), 0.5, 1e-12);
}

TEST(RademacherExact, TwoPointsBothPositive) {
  EXPECT_NEAR(rademacher_exact(HypothesisClass::threshold(), ds({{0.2, 1}, {0.7, 1}})), 3.0 / 8.0, 1e-15);
}

TEST(RademacherExact, MatchesEnumerationThreshold) {
  std::mt19937_64 gen(31);
  const auto thr = HypothesisClass::threshold();
  for (int rep = 0; rep < 150; ++rep) {
    // Coarse grids produce ties; fine grids mostly distinct points.
    const auto s = oracle::random_threshold_data(gen, 1 + rep % 14, rep % 3 == 0 ? 1000 : 5);
    EXPECT_NEAR(rademacher_exact(thr, s), oracle::rademacher(thr, s), 1e-12);
  }
}

TEST(RademacherExact, MatchesEnumerationFinite) {
  std::mt19937_64 gen(32);
  for (int rep = 0; rep < 150; ++rep) {
    const auto cls = oracle::random_finite_class(gen, 6, 5);
    const auto s = oracle::random_token_data(gen, 1 + rep % 13, cls.domain_size());
    EXPECT_NEAR(rademacher_exact(cls, s), oracle::rademacher(cls, s), 1e-12);
  }
}

TEST(RademacherExact, WorkCap) {
  const auto cls = all_labelings(4);
  std::mt19937_64 gen(1);
  const auto s = oracle::random_token_data(gen, 200, 4);
  EXPECT_THROW(rademacher_exact(cls, s, 10.0), SizeError);
}

TEST(RademacherMc, AgreesWithExact) {
  std::mt19937_64 gen(33);
  for (int rep = 0; rep < 50; ++rep) {
    const bool thr = rep % 2 == 0;
    const auto cls = thr ? HypothesisClass::threshold() : oracle::random_finite_class(gen);
    const auto s = thr ? oracle::random_threshold_data(gen, 1 + rep % 12)
                       : oracle::random_token_data(gen, 1 + rep % 12, cls.domain_size());
    const auto est = rademacher_mc(cls, s, 100000, Rng(static_cast<std::uint64_t>(rep)));
    const double exact = rademacher_exact(cls, s);
    EXPECT_LE(std::abs(est.estimate - exact), 4 * est.std_error + 1e-12) << "rep " << rep;
  }
}

TEST(RademacherMc, Examples) {
  SignTable one(1, 2);
  one << 1, -1;
  const auto est0 = rademacher_mc(HypothesisClass::finite(one), ds({{0, 1}, {1, 1}, {1, -1}}), 2000, Rng(4));
  EXPECT_LE(std::abs(est0.estimate), 3 * est0.std_error + 1e-12);

  const auto est = rademacher_mc(all_labelings(6), ds({{0, 1}, {1, 1}, {2, 1}, {3, -1}, {4, 1}, {5, -1}}), 10000,
                                 Rng(5));
  EXPECT_LE(std::abs(est.estimate - 0.5), 3 * est.std_error);
  EXPECT_THROW(rademacher_mc(all_labelings(2), ds({{0, 1}}), 50, Rng(1)), DomainError);
}

TEST(RademacherMc, Deterministic) {
  const auto s = ds({{0.1, 1}, {0.4, -1}, {0.6, 1}, {0.9, -1}});
  const auto a = rademacher_mc(HypothesisClass::threshold(), s, 3000, Rng(17));
  const auto b = rademacher_mc(HypothesisClass::threshold(), s, 3000, Rng(17));
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Rates, Examples) {
  EXPECT_NEAR(rademacher_rate(0.0, 50, 0.05), 3 * std::sqrt(std::log(40.0) / 100.0), 1e-15);
  EXPECT_NEAR(rademacher_rate(0.0, 50, 0.05), 0.5762, 5e-5);
  EXPECT_THROW(rademacher_rate(0.0, 50, 1.0), DomainError);

  EXPECT_NEAR(rate_vc(100, 0.1, 1, 1.0), 0.1 + std::sqrt(2 * std::log(20.0) / 100), 1e-15);
  EXPECT_NEAR(rate_vc(100, 0.1, 1, 1.0), 0.3448, 5e-5);
  EXPECT_NEAR(rate_vc(400, 0.1, 1, 1.0), rate_vc(100, 0.1, 1, 1.0) / 2, 1e-15);
  EXPECT_THROW(rate_vc(100, 0.1, 0, 1.0), DomainError);
}

TEST(Rates, RateFunctionKinds) {
  const auto s = ds({{0.2, 1}, {0.7, 1}});
  const auto exact = RateFunction::rademacher_exact(HypothesisClass::threshold());
  EXPECT_NEAR(exact(2, 0.1, s), 2 * 0.375 + 3 * std::sqrt(std::log(20.0) / 4), 1e-12);
  EXPECT_THROW(exact(3, 0.1, s), DomainError);
  const auto vc = RateFunction::vc(1);
  EXPECT_DOUBLE_EQ(vc(2, 0.1, s), rate_vc(2, 0.1, 1));
  EXPECT_EQ(vc.complexity(s), 0.0);

  const auto mc = RateFunction::rademacher_mc(HypothesisClass::threshold(), 500, Rng(3));
  EXPECT_EQ(mc(2, 0.1, s), mc(2, 0.1, s));
}

TEST(Rates, VanishWithM) {
  const auto d = make_uniform_threshold(0.5, 0.1);
  const auto thr = HypothesisClass::threshold();
  double prev = 1e9;
  for (std::size_t m : {100, 1000, 10000, 100000}) {
    auto gen = Rng(8).derive(Purpose::kSampling, m).engine();
    const auto s = sample_dataset(d, m, gen);
    const double r = rate_rademacher(thr, m, 0.05, s);
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(Bounds, FixedSetExamples) {
  const auto clean = bound_fixed_set({0, 0, 10, 100, 10, 0.05});
  EXPECT_NEAR(clean.rhs_total, 6 * std::sqrt(std::log(80.0) / 2000), 1e-15);
  EXPECT_NEAR(clean.rhs_total, 0.2809, 1e-4);
  EXPECT_EQ(clean.term_adversary, 0.0);

  const auto r = bound_fixed_set({0, 0, 8, 100, 10, 0.05});
  EXPECT_NEAR(r.term_group, 6 * std::sqrt(std::log(80.0) / 1600), 1e-15);
  EXPECT_NEAR(r.term_adversary, 0.2 * 18 * std::sqrt(std::log(800.0) / 200), 1e-15);
  EXPECT_DOUBLE_EQ(r.rhs_total, r.term_group + r.term_adversary);
  EXPECT_THROW(bound_fixed_set({0, 0, 8, 100, 10, 1.0}), DomainError);
}

TEST(Bounds, RademacherTermsEnter) {
  const auto r = bound_fixed_set({0.1, 0.2, 8, 100, 10, 0.05});
  EXPECT_NEAR(r.term_group, 4 * 0.1 + 6 * std::sqrt(std::log(80.0) / 1600), 1e-15);
  EXPECT_NEAR(r.term_adversary, 0.2 * (18 * std::sqrt(std::log(800.0) / 200) + 12 * 0.2), 1e-15);
}

TEST(Bounds, FlexibleEqualsFixedWhenNothingCorrupted) {
  for (std::size_t n : {1, 5, 10, 40}) {
    const BoundInputs in{0.05, 0.1, n, 50, n, 0.1};
    for (auto mode : {BinomialMode::kExact, BinomialMode::kEntropy, BinomialMode::kEntropySqrt}) {
      EXPECT_EQ(bound_flexible_set(in, mode).rhs_total, bound_fixed_set(in).rhs_total);
    }
  }
}

TEST(Bounds, FlexibleAddsLogBinomial) {
  const BoundInputs in{0, 0, 8, 100, 10, 0.05};
  const auto r = bound_flexible_set(in);
  EXPECT_NEAR(r.log_binomial, std::log(45.0), 1e-12);
  EXPECT_NEAR(r.term_group, 6 * std::sqrt((std::log(45.0) + std::log(80.0)) / 1600), 1e-12);
  EXPECT_GT(r.rhs_total, bound_fixed_set(in).rhs_total);
  const auto ent = bound_flexible_set(in, BinomialMode::kEntropy);
  EXPECT_NEAR(ent.log_binomial, binary_entropy(0.2) * 10 * std::log(2.0), 1e-12);
  EXPECT_GE(ent.log_binomial, r.log_binomial);
  const auto sq = bound_flexible_set(in, BinomialMode::kEntropySqrt);
  EXPECT_NEAR(sq.log_binomial, 2 * std::sqrt(0.2 * 0.8) * 10 * std::log(2.0), 1e-12);
}

TEST(Bounds, MonotoneInMAndAlpha) {
  for (double rad : {0.0, 0.05}) {
    double prev = 1e9;
    for (std::size_t m = 10; m <= 10000; m *= 3) {
      const double r = bound_fixed_set({rad, rad, 7, m, 10, 0.1}).rhs_total;
      EXPECT_LT(r, prev);
      prev = r;
      const double rf = bound_flexible_set({rad, rad, 7, m, 10, 0.1}).rhs_total;
      EXPECT_GE(rf, r);
    }
    double last = -1;
    for (std::size_t k = 10; k >= 1; --k) {
      const auto rep = bound_fixed_set({rad, rad, k, 100, 10, 0.1});
      EXPECT_GE(rep.term_group, 0.0);
      EXPECT_GE(rep.term_adversary, 0.0);
      EXPECT_GT(rep.rhs_total, last);
      last = rep.rhs_total;
    }
  }
}

TEST(LogBinomial, ExactAndLgammaAgree) {
  EXPECT_EQ(log_binomial(10, 0), 0.0);
  EXPECT_NEAR(log_binomial(10, 3), std::log(120.0), 1e-13);
  EXPECT_NEAR(log_binomial(60, 30), std::lgamma(61.0) - 2 * std::lgamma(31.0), 1e-9);
  EXPECT_NEAR(log_binomial(61, 30), std::lgamma(62.0) - std::lgamma(31.0) - std::lgamma(32.0), 1e-12);
  EXPECT_NEAR(log_binomial(1000000, 10), std::lgamma(1000001.0) - std::lgamma(11.0) - std::lgamma(999991.0), 1e-6);
  EXPECT_THROW(log_binomial(3, 4), DomainError);
}

TEST(SampleComplexity, Examples) {
  const double base = std::log(100.0) / 0.01;
  const double expected = std::ceil(base * std::pow(1 / std::sqrt(8.0) + 0.2, 2));
  EXPECT_EQ(sample_complexity_upper(AdversaryModel::kFixedSet, 0.1, 0.1, 10, 0.2, 1.0),
            static_cast<std::uint64_t>(expected));
  const double flex = std::ceil(base * std::pow(1 / std::sqrt(8.0) + std::pow(0.2, 0.25), 2));
  EXPECT_EQ(sample_complexity_upper(AdversaryModel::kFlexibleSet, 0.1, 0.1, 10, 0.2, 1.0),
            static_cast<std::uint64_t>(flex));

  EXPECT_EQ(sample_complexity_upper(AdversaryModel::kFixedSet, 0.1, 0.1, 10, 0.0, 1.0),
            sample_complexity_upper(AdversaryModel::kFlexibleSet, 0.1, 0.1, 10, 0.0, 1.0));

  const auto m1 = static_cast<double>(sample_complexity_upper(AdversaryModel::kFixedSet, 0.1, 0.1, 10, 0.2, 1.0));
  const auto m2 = static_cast<double>(sample_complexity_upper(AdversaryModel::kFixedSet, 0.05, 0.1, 10, 0.2, 1.0));
  EXPECT_NEAR(m2 / m1, 4.0, 0.05);
  EXPECT_THROW(sample_complexity_upper(AdversaryModel::kFixedSet, 0.0, 0.1, 10, 0.2, 1.0), DomainError);
}
