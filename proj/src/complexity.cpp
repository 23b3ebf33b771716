#include "mspac/complexity.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>

namespace mspac {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("confidence delta must lie in (0, 1)");
}

/// P(B = b) for B ~ Bin(g, 1/2), b = 0..g. Built outward from the mode and
/// normalized, which stays accurate where the tails underflow.
std::vector<double> half_binomial_pmf(std::size_t g) {
  std::vector<double> p(g + 1, 0.0);
  const std::size_t mode = g / 2;
  p[mode] = 1.0;
  for (std::size_t b = mode; b < g; ++b) {
    p[b + 1] = p[b] * static_cast<double>(g - b) / static_cast<double>(b + 1);
  }
  for (std::size_t b = mode; b > 0; --b) {
    p[b - 1] = p[b] * static_cast<double>(b) / static_cast<double>(g - b + 1);
  }
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

/// Sizes of runs of equal x after sorting.
std::vector<std::size_t> tie_groups(const Dataset& s) {
  std::vector<Point> xs;
  xs.reserve(s.size());
  for (const auto& e : s) xs.push_back(e.x);
  std::sort(xs.begin(), xs.end());
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    sizes.push_back(j - i);
    i = j;
  }
  return sizes;
}

/// E[max_{0 <= p <= n} S_p] for a simple +-1 walk: 2 E[S_n^+] - P(S_n >= 1).
double walk_max_distinct(std::size_t n) {
  const auto pmf = half_binomial_pmf(n);
  double positive_part = 0.0;
  double p_positive = 0.0;
  for (std::size_t b = 0; b <= n; ++b) {
    const auto s = 2 * static_cast<std::int64_t>(b) - static_cast<std::int64_t>(n);
    if (s >= 1) {
      positive_part += static_cast<double>(s) * pmf[b];
      p_positive += pmf[b];
    }
  }
  return 2.0 * positive_part - p_positive;
}

/// Same expectation when step p is a sum of groups[p] signs. Y_p, the maximum
/// future gain from position p, obeys Y_p = max(0, X_p + Y_{p+1}) with Y_G = 0.
double walk_max_grouped(const std::vector<std::size_t>& groups) {
  std::vector<double> y{1.0};
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
    const auto g = *it;
    const auto pmf = half_binomial_pmf(g);
    std::vector<double> next(y.size() + g, 0.0);
    for (std::size_t v = 0; v < y.size(); ++v) {
      if (y[v] == 0.0) continue;
      for (std::size_t b = 0; b <= g; ++b) {
        const auto w = static_cast<std::int64_t>(v) + 2 * static_cast<std::int64_t>(b) -
                       static_cast<std::int64_t>(g);
        next[static_cast<std::size_t>(std::max<std::int64_t>(w, 0))] += y[v] * pmf[b];
      }
    }
    while (next.size() > 1 && next.back() == 0.0) next.pop_back();
    y = std::move(next);
  }
  double mean = 0.0;
  for (std::size_t v = 0; v < y.size(); ++v) mean += static_cast<double>(v) * y[v];
  return mean;
}

/// Examples of a finite-class sample grouped by (token, label), together with
/// each hypothesis's loss on each group.
struct LossGroups {
  std::vector<std::size_t> counts;
  Eigen::MatrixXd loss;  // hypotheses x groups
};

LossGroups finite_loss_groups(const HypothesisClass& cls, const Dataset& s) {
  std::map<std::pair<Point, Label>, std::size_t> by_key;
  for (const auto& e : s) {
    cls.check_point(e.x);
    ++by_key[{e.x, e.y}];
  }
  LossGroups out;
  out.loss.resize(static_cast<Eigen::Index>(cls.size()), static_cast<Eigen::Index>(by_key.size()));
  Eigen::Index g = 0;
  for (const auto& [key, count] : by_key) {
    out.counts.push_back(count);
    for (std::size_t h = 0; h < cls.size(); ++h) {
      out.loss(static_cast<Eigen::Index>(h), g) = zero_one_loss(cls.at(h)(key.first), key.second);
    }
    ++g;
  }
  return out;
}

double finite_exact(const HypothesisClass& cls, const Dataset& s, double work_cap) {
  const auto groups = finite_loss_groups(cls, s);

  // Keep groups on which hypotheses disagree; the rest shift every score by
  // the same mean-zero amount.
  std::vector<Eigen::Index> informative;
  for (Eigen::Index g = 0; g < groups.loss.cols(); ++g) {
    if (groups.loss.col(g).maxCoeff() != groups.loss.col(g).minCoeff()) informative.push_back(g);
  }
  if (informative.empty()) return 0.0;

  // Distinct loss patterns over the informative groups.
  std::vector<Eigen::VectorXd> rows;
  for (Eigen::Index h = 0; h < groups.loss.rows(); ++h) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(informative.size()));
    for (std::size_t j = 0; j < informative.size(); ++j) r(static_cast<Eigen::Index>(j)) = groups.loss(h, informative[j]);
    if (std::none_of(rows.begin(), rows.end(), [&](const auto& q) { return q == r; })) rows.push_back(r);
  }
  const auto n_pat = static_cast<Eigen::Index>(rows.size());
  const auto n_grp = informative.size();
  Eigen::MatrixXd patterns(n_pat, static_cast<Eigen::Index>(n_grp));
  for (Eigen::Index h = 0; h < n_pat; ++h) patterns.row(h) = rows[static_cast<std::size_t>(h)].transpose();

  double work = static_cast<double>(n_pat);
  std::vector<std::vector<double>> pmfs;
  std::vector<std::size_t> sizes;
  for (auto g : informative) {
    const auto c = groups.counts[static_cast<std::size_t>(g)];
    sizes.push_back(c);
    pmfs.push_back(half_binomial_pmf(c));
    work *= static_cast<double>(c + 1);
    if (work > work_cap) throw SizeError("exact Rademacher enumeration exceeds the work cap");
  }

  // Depth-first walk over the group-sum lattice, carrying partial scores.
  double expectation = 0.0;
  std::vector<Eigen::VectorXd> score(n_grp + 1, Eigen::VectorXd::Zero(n_pat));
  auto walk = [&](auto&& self, std::size_t depth, double prob) -> void {
    if (depth == n_grp) {
      expectation += prob * score[depth].maxCoeff();
      return;
    }
    for (std::size_t b = 0; b <= sizes[depth]; ++b) {
      const double z = 2.0 * static_cast<double>(b) - static_cast<double>(sizes[depth]);
      score[depth + 1] = score[depth] + z * patterns.col(static_cast<Eigen::Index>(depth));
      self(self, depth + 1, prob * pmfs[depth][b]);
    }
  };
  walk(walk, 0, 1.0);
  return expectation / static_cast<double>(s.size());
}

std::uint64_t dataset_fingerprint(const Dataset& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& e : s) {
    feed(std::bit_cast<std::uint64_t>(e.x));
    feed(static_cast<std::uint64_t>(static_cast<std::int64_t>(e.y)));
  }
  return h;
}

}  // namespace

double rademacher_exact(const HypothesisClass& cls, const Dataset& s, double work_cap) {
  const auto n = static_cast<double>(s.size());
  if (!cls.is_threshold()) return finite_exact(cls, s, work_cap);

  const auto groups = tie_groups(s);
  if (groups.size() == s.size()) return walk_max_distinct(s.size()) / n;

  double work = 0.0;
  double support = 1.0;
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
    work += support * static_cast<double>(*it + 1);
    support += static_cast<double>(*it);
  }
  if (work > work_cap) throw SizeError("exact Rademacher recursion exceeds the work cap");
  return walk_max_grouped(groups) / n;
}

RademacherEstimate rademacher_mc(const HypothesisClass& cls, const Dataset& s, std::size_t draws,
                                 const Rng& rng) {
  if (draws < 100) throw DomainError("Monte-Carlo Rademacher estimate needs at least 100 draws");
  constexpr std::size_t kChunk = 256;
  const auto n = s.size();

  // sup_h sum_i sigma_i l_i(h) for one sign vector, pre-planned per class.
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> group_end;
  LossGroups finite_groups;
  std::vector<std::size_t> group_of(n);
  if (cls.is_threshold()) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a].x < s[b].x; });
    for (std::size_t i = 0; i < n; ++i) {
      if (i + 1 == n || s[order[i + 1]].x != s[order[i]].x) group_end.push_back(i + 1);
    }
  } else {
    finite_groups = finite_loss_groups(cls, s);
    std::map<std::pair<Point, Label>, std::size_t> index;
    for (const auto& e : s) index.emplace(std::pair{e.x, e.y}, 0);
    std::size_t g = 0;
    for (auto& [key, idx] : index) idx = g++;
    for (std::size_t i = 0; i < n; ++i) group_of[i] = index.at({s[i].x, s[i].y});
  }

  std::vector<int> sigma(n);
  Eigen::VectorXd z(static_cast<Eigen::Index>(finite_groups.counts.size()));
  auto sup_for = [&]() -> double {
    if (cls.is_threshold()) {
      double base = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (s[i].y < 0) base += sigma[i];
      }
      double walk = 0.0;
      double best = 0.0;
      std::size_t i = 0;
      for (auto end : group_end) {
        for (; i < end; ++i) walk += s[order[i]].y > 0 ? sigma[order[i]] : -sigma[order[i]];
        best = std::max(best, walk);
      }
      return base + best;
    }
    z.setZero();
    for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(group_of[i])) += sigma[i];
    return (finite_groups.loss * z).maxCoeff();
  };

  double sum = 0.0;
  double sum_sq = 0.0;
  const std::size_t chunks = (draws + kChunk - 1) / kChunk;
  for (std::size_t c = 0; c < chunks; ++c) {
    auto gen = rng.derive(Purpose::kRademacher, c).engine();
    const std::size_t count = std::min(kChunk, draws - c * kChunk);
    for (std::size_t d = 0; d < count; ++d) {
      std::uint64_t bits = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) bits = gen();
        sigma[i] = (bits >> (i % 64)) & 1 ? 1 : -1;
      }
      const double v = sup_for() / static_cast<double>(n);
      sum += v;
      sum_sq += v * v;
    }
  }
  const double k = static_cast<double>(draws);
  const double mean = sum / k;
  const double var = std::max(0.0, (sum_sq - k * mean * mean) / (k - 1.0));
  return {mean, std::sqrt(var / k)};
}

double rademacher_rate(double rad, std::size_t m, double delta) {
  check_delta(delta);
  if (m < 1) throw DomainError("m must be positive");
  if (rad < 0.0) throw DomainError("Rademacher complexity cannot be negative");
  return 2.0 * rad + 3.0 * std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(m)));
}

double rate_vc(std::size_t m, double delta, std::size_t vc_dim, double constant) {
  check_delta(delta);
  if (vc_dim < 1) throw DomainError("VC dimension must be at least 1");
  if (!(constant > 0.0)) throw DomainError("VC constant must be positive");
  if (m < 1) throw DomainError("m must be positive");
  const double md = static_cast<double>(m);
  return constant * std::sqrt(static_cast<double>(vc_dim) / md) + std::sqrt(2.0 * std::log(2.0 / delta) / md);
}

RateFunction RateFunction::rademacher_exact(HypothesisClass cls) {
  return RateFunction(Kind::kRademacherExact, std::move(cls), 0, Rng(0), 0, 0.0);
}

RateFunction RateFunction::rademacher_mc(HypothesisClass cls, std::size_t draws, Rng rng) {
  if (draws < 100) throw DomainError("Monte-Carlo Rademacher estimate needs at least 100 draws");
  return RateFunction(Kind::kRademacherMC, std::move(cls), draws, rng, 0, 0.0);
}

RateFunction RateFunction::rademacher_auto(HypothesisClass cls, std::size_t draws, Rng rng) {
  if (draws < 100) throw DomainError("Monte-Carlo Rademacher estimate needs at least 100 draws");
  return RateFunction(Kind::kRademacherAuto, std::move(cls), draws, rng, 0, 0.0);
}

RateFunction RateFunction::vc(std::size_t vc_dim, double constant) {
  if (vc_dim < 1) throw DomainError("VC dimension must be at least 1");
  if (!(constant > 0.0)) throw DomainError("VC constant must be positive");
  return RateFunction(Kind::kVC, std::nullopt, 0, Rng(0), vc_dim, constant);
}

double RateFunction::complexity(const Dataset& s) const {
  // The MC stream is keyed by the data, so the rate is a pure function of S.
  auto mc = [&] { return mspac::rademacher_mc(*cls_, s, draws_, rng_.derive(Purpose::kRademacher, dataset_fingerprint(s))).estimate; };
  switch (kind_) {
    case Kind::kRademacherExact:
      return mspac::rademacher_exact(*cls_, s);
    case Kind::kRademacherMC:
      return mc();
    case Kind::kRademacherAuto:
      try {
        return mspac::rademacher_exact(*cls_, s);
      } catch (const SizeError&) {
        return mc();
      }
    case Kind::kVC:
      return 0.0;
  }
  return 0.0;
}

double RateFunction::operator()(std::size_t m, double delta, const Dataset& s) const {
  if (kind_ == Kind::kVC) return rate_vc(m, delta, vc_dim_, constant_);
  check_delta(delta);
  if (m != s.size()) throw DomainError("rate evaluated with m different from the dataset size");
  return rademacher_rate(complexity(s), m, delta);
}

double rate_rademacher(const HypothesisClass& cls, std::size_t m, double delta, const Dataset& s) {
  return RateFunction::rademacher_exact(cls)(m, delta, s);
}

namespace {

void check_bound_inputs(const BoundInputs& in) {
  check_delta(in.delta);
  if (in.k < 1 || in.k > in.n_sources) throw DomainError("bound needs 1 <= k <= N");
  if (in.m < 1) throw DomainError("bound needs m >= 1");
  if (in.rad_good < 0.0 || in.max_rad_source < 0.0) throw DomainError("Rademacher terms must be >= 0");
}

BoundReport assemble(const BoundInputs& in, double log_binom) {
  const double alpha = alpha_of(in.n_sources, in.k);
  const double km = static_cast<double>(in.k) * static_cast<double>(in.m);
  const double m = static_cast<double>(in.m);
  const double n = static_cast<double>(in.n_sources);
  const double group =
      4.0 * in.rad_good + 6.0 * std::sqrt((std::log(4.0 / in.delta) + log_binom) / (2.0 * km));
  const double adversary =
      alpha * (18.0 * std::sqrt(std::log(4.0 * n / in.delta) / (2.0 * m)) + 12.0 * in.max_rad_source);
  return BoundReport{group + adversary, group, adversary, alpha, log_binom, in};
}

}  // namespace

BoundReport bound_fixed_set(const BoundInputs& in) {
  check_bound_inputs(in);
  return assemble(in, 0.0);
}

BoundReport bound_flexible_set(const BoundInputs& in, BinomialMode mode) {
  check_bound_inputs(in);
  const double alpha = alpha_of(in.n_sources, in.k);
  const double n = static_cast<double>(in.n_sources);
  double log_binom = 0.0;
  switch (mode) {
    case BinomialMode::kExact:
      log_binom = log_binomial(in.n_sources, in.k);
      break;
    case BinomialMode::kEntropy:
      log_binom = binary_entropy(alpha) * n * std::numbers::ln2;
      break;
    case BinomialMode::kEntropySqrt:
      log_binom = 2.0 * std::sqrt(alpha * (1.0 - alpha)) * n * std::numbers::ln2;
      break;
  }
  return assemble(in, log_binom);
}

double log_binomial(std::size_t n, std::size_t k) {
  if (k > n) throw DomainError("binomial coefficient needs k <= n");
  if (n <= 60) {
    // C(n, j) stays below 2^63 for n <= 60 and the running product is exact.
    std::uint64_t c = 1;
    const auto kk = std::min(k, n - k);
    for (std::size_t j = 1; j <= kk; ++j) c = c * (n - kk + j) / j;
    return std::log(static_cast<double>(c));
  }
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("entropy argument must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::uint64_t sample_complexity_upper(AdversaryModel model, double eps, double delta, std::size_t n_sources,
                                      double alpha, double scale) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  check_delta(delta);
  if (n_sources < 1) throw DomainError("N must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in [0, 1)");
  if (!(scale > 0.0)) throw DomainError("scale must be positive");
  const double n = static_cast<double>(n_sources);
  const double a = model == AdversaryModel::kFixedSet ? alpha : std::pow(alpha, 0.25);
  const double inner = 1.0 / std::sqrt((1.0 - alpha) * n) + a;
  const double m = scale * std::log(n / delta) / (eps * eps) * inner * inner;
  return static_cast<std::uint64_t>(std::ceil(m));
}

std::string to_string(RateFunction::Kind kind) {
  switch (kind) {
    case RateFunction::Kind::kRademacherExact: return "rademacher_exact";
    case RateFunction::Kind::kRademacherMC: return "rademacher_mc";
    case RateFunction::Kind::kRademacherAuto: return "rademacher_auto";
    case RateFunction::Kind::kVC: return "vc";
  }
  return "?";
}

std::string to_string(BinomialMode mode) {
  switch (mode) {
    case BinomialMode::kExact: return "exact";
    case BinomialMode::kEntropy: return "entropy";
    case BinomialMode::kEntropySqrt: return "entropy_sqrt";
  }
  return "?";
}

}  // namespace mspac
