#include "mspac/hypothesis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>

namespace mspac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Distinct sorted values of a point set.
std::vector<Point> distinct_sorted(std::span<const Point> points) {
  std::vector<Point> v(points.begin(), points.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Threshold placed just below the p-th distinct value: -inf for p = 0, +inf
/// past the last value, the midpoint otherwise.
double sweep_threshold(const std::vector<Point>& values, std::size_t p) {
  if (p == 0) return -kInf;
  if (p == values.size()) return kInf;
  const double mid = values[p - 1] + (values[p] - values[p - 1]) / 2.0;
  // Adjacent doubles: the midpoint may round down onto the left value.
  return mid > values[p - 1] ? mid : values[p];
}

}  // namespace

HypothesisClass HypothesisClass::threshold() { return HypothesisClass(Kind::kThreshold1D, nullptr); }

HypothesisClass HypothesisClass::finite(SignTable table) {
  if (table.rows() < 1 || table.cols() < 1) {
    throw DomainError("a finite class needs at least one hypothesis and one token");
  }
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    if (!is_label(table.data()[i])) throw DomainError("hypothesis table entries must be -1 or +1");
  }
  return HypothesisClass(Kind::kFiniteExplicit, std::make_shared<const SignTable>(std::move(table)));
}

HypothesisClass HypothesisClass::agreeing_pair() {
  SignTable t(2, 2);
  t << 1, 1,
       1, -1;
  return finite(std::move(t));
}

std::size_t HypothesisClass::size() const {
  if (is_threshold()) throw CapabilityError("threshold class is infinite");
  return static_cast<std::size_t>(table_->rows());
}

std::size_t HypothesisClass::domain_size() const {
  if (is_threshold()) throw CapabilityError("threshold class has a continuous domain");
  return static_cast<std::size_t>(table_->cols());
}

const SignTable& HypothesisClass::table() const {
  if (is_threshold()) throw CapabilityError("threshold class has no table");
  return *table_;
}

Hypothesis HypothesisClass::at(std::size_t index) const {
  if (is_threshold()) throw CapabilityError("threshold hypotheses are addressed by value");
  if (index >= size()) throw DomainError("hypothesis index out of range");
  return Hypothesis(*this, index, 0.0);
}

Hypothesis HypothesisClass::at_threshold(double t) const {
  if (!is_threshold()) throw CapabilityError("finite hypotheses are addressed by index");
  if (std::isnan(t)) throw DomainError("threshold must not be NaN");
  return Hypothesis(*this, 0, t);
}

void HypothesisClass::check_point(Point x) const {
  if (!std::isfinite(x)) throw DomainError("point must be finite");
  if (is_threshold()) return;
  if (x < 0 || x != std::floor(x) || x >= static_cast<double>(table_->cols())) {
    throw DomainError("point is not a token of the finite domain");
  }
}

std::size_t HypothesisClass::vc_dimension() const {
  if (is_threshold()) return 1;
  const auto n_h = size();
  const auto n_x = domain_size();
  if (n_h > 16 || n_x > 16) throw SizeError("brute-force VC dimension needs |H| <= 16 and D <= 16");

  std::size_t best = 0;
  for (std::uint32_t subset = 1; subset < (1u << n_x); ++subset) {
    const auto d = static_cast<std::size_t>(std::popcount(subset));
    if (d <= best || (std::size_t{1} << d) > n_h) continue;
    std::set<std::uint32_t> patterns;
    for (std::size_t h = 0; h < n_h; ++h) {
      std::uint32_t pattern = 0;
      for (std::size_t x = 0, bit = 0; x < n_x; ++x) {
        if (!(subset & (1u << x))) continue;
        if ((*table_)(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(x)) > 0) pattern |= 1u << bit;
        ++bit;
      }
      patterns.insert(pattern);
    }
    if (patterns.size() == (std::size_t{1} << d)) best = d;
  }
  return best;
}

bool operator==(const HypothesisClass& a, const HypothesisClass& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.is_threshold()) return true;
  return a.table_ == b.table_ || *a.table_ == *b.table_;
}

Label Hypothesis::operator()(Point x) const {
  family_.check_point(x);
  if (family_.is_threshold()) return x >= threshold_ ? 1 : -1;
  return family_.table()(static_cast<Eigen::Index>(index_), static_cast<Eigen::Index>(x));
}

Label predict(const Hypothesis& h, Point x) { return h(x); }

std::size_t error_count(const Hypothesis& h, const Dataset& s) {
  std::size_t errors = 0;
  for (const auto& e : s) errors += h(e.x) != e.y;
  return errors;
}

double empirical_risk(const Hypothesis& h, const Dataset& s) {
  return static_cast<double>(error_count(h, s)) / static_cast<double>(s.size());
}

Hypothesis erm(const HypothesisClass& cls, const Dataset& s) {
  if (!cls.is_threshold()) {
    for (const auto& e : s) cls.check_point(e.x);
    std::size_t best = 0;
    std::size_t best_errors = std::numeric_limits<std::size_t>::max();
    for (std::size_t j = 0; j < cls.size(); ++j) {
      const auto errors = error_count(cls.at(j), s);
      if (errors < best_errors) {
        best = j;
        best_errors = errors;
      }
    }
    return cls.at(best);
  }

  std::vector<LabeledExample> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.x < b.x; });

  // At t = -inf everything is predicted +1, so the negatives are the errors.
  // Passing a group of equal x flips its predictions to -1.
  std::vector<Point> values;
  std::int64_t errors = std::count_if(sorted.begin(), sorted.end(), [](const auto& e) { return e.y < 0; });
  std::int64_t best_errors = errors;
  std::size_t best_position = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const Point x = sorted[i].x;
    values.push_back(x);
    for (; i < sorted.size() && sorted[i].x == x; ++i) errors += sorted[i].y > 0 ? 1 : -1;
    if (errors < best_errors) {
      best_errors = errors;
      best_position = values.size();
    }
  }
  return cls.at_threshold(sweep_threshold(values, best_position));
}

std::vector<SignVector> dichotomies(const HypothesisClass& cls, std::span<const Point> points,
                                    std::size_t cap) {
  if (points.empty()) throw DomainError("dichotomies need at least one point");
  if (points.size() > cap) throw SizeError("too many points for dichotomy enumeration");
  for (auto x : points) cls.check_point(x);
  const auto n = static_cast<Eigen::Index>(points.size());

  std::vector<SignVector> out;
  if (cls.is_threshold()) {
    const auto values = distinct_sorted(points);
    for (std::size_t p = 0; p <= values.size(); ++p) {
      const auto h = cls.at_threshold(sweep_threshold(values, p));
      SignVector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = static_cast<std::int8_t>(h(points[i]));
      out.push_back(std::move(v));
    }
    return out;
  }

  std::set<std::vector<std::int8_t>> seen;
  for (std::size_t j = 0; j < cls.size(); ++j) {
    const auto h = cls.at(j);
    std::vector<std::int8_t> pattern(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) pattern[i] = static_cast<std::int8_t>(h(points[i]));
    if (!seen.insert(pattern).second) continue;
    out.emplace_back(Eigen::Map<const SignVector>(pattern.data(), n));
  }
  return out;
}

std::optional<NontrivialPair> find_nontrivial_pair(const HypothesisClass& cls) {
  if (cls.is_threshold()) {
    // With the inclusive >= orientation: t = -inf labels both points +1, and
    // t = 0.5 keeps x1 = 1 at +1 while sending x2 = 0 to -1.
    return NontrivialPair{1.0, 0.0, cls.at_threshold(-kInf), cls.at_threshold(0.5)};
  }
  const auto& t = cls.table();
  for (Eigen::Index x1 = 0; x1 < t.cols(); ++x1) {
    for (Eigen::Index x2 = 0; x2 < t.cols(); ++x2) {
      if (x1 == x2) continue;
      for (Eigen::Index a = 0; a < t.rows(); ++a) {
        if (t(a, x2) != 1) continue;
        for (Eigen::Index b = 0; b < t.rows(); ++b) {
          if (t(b, x2) == -1 && t(a, x1) == t(b, x1)) {
            return NontrivialPair{static_cast<Point>(x1), static_cast<Point>(x2),
                                  cls.at(static_cast<std::size_t>(a)), cls.at(static_cast<std::size_t>(b))};
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace mspac
