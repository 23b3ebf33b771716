#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <thread>

#include "mspac/discrepancy.hpp"
#include "mspac/harness.hpp"
#include "mspac/robust_learner.hpp"
#include "oracles.hpp"

using namespace mspac;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ExperimentConfig threshold_task(std::size_t n, std::size_t k, std::size_t m, AdversarySpec::Kind adv,
                                std::size_t trials, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.hypothesis_class.kind = ClassSpec::Kind::kThreshold;
  cfg.distribution.kind = DistributionSpec::Kind::kUniformThreshold;
  cfg.distribution.bayes_threshold = 0.5;
  cfg.distribution.noise = 0.1;
  cfg.n_sources = {n};
  cfg.k = {k};
  cfg.m = {m};
  cfg.delta = 0.1;
  cfg.adversary = adv;
  cfg.rate.kind = RateFunction::Kind::kRademacherExact;
  cfg.trials = trials;
  cfg.master_seed = seed;
  cfg.workers = worker_count();
  return cfg;
}

ExperimentConfig two_point_task(std::size_t n, std::size_t k, std::size_t m, AdversarySpec::Kind adv,
                                std::size_t trials, std::uint64_t seed) {
  auto cfg = threshold_task(n, k, m, adv, trials, seed);
  cfg.hypothesis_class.kind = ClassSpec::Kind::kPair;
  cfg.distribution.kind = DistributionSpec::Kind::kTwoPoint;
  cfg.distribution.labeler = DistributionSpec::Labeler::kBoth;
  return cfg;
}

std::vector<TrialRecord> rows_of(const std::vector<TrialRecord>& rows, const std::string& learner) {
  std::vector<TrialRecord> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [&](const TrialRecord& r) { return r.learner == learner; });
  return out;
}

const CellSummary& only_cell(const Summary& s, const std::string& learner) {
  const CellSummary* hit = nullptr;
  for (const auto& c : s.cells) {
    if (c.learner != learner) continue;
    if (hit) throw std::runtime_error("more than one cell for " + learner);
    hit = &c;
  }
  if (!hit) throw std::runtime_error("no cell for " + learner);
  return *hit;
}

double labeling_max(const Summary& s, const std::string& learner) {
  for (const auto& l : s.labeling_max) {
    if (l.learner == learner) return l.max_freq;
  }
  throw std::runtime_error("no labeling_max for " + learner);
}

Outcome require_no_errors(const Summary& s) {
  if (s.error_rows) return {false, std::to_string(s.error_rows) + " error rows"};
  return {true, ""};
}

Outcome c1_pseudometric() {
  std::mt19937_64 gen(1001);
  const double tol = 1e-12;
  std::size_t violations = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const bool thr = rep % 2 == 0;
    const auto cls = thr ? HypothesisClass::threshold() : oracle::random_finite_class(gen, 6, 5);
    auto draw = [&] {
      const std::size_t m = 1 + gen() % 12;
      return thr ? oracle::random_threshold_data(gen, m) : oracle::random_token_data(gen, m, cls.domain_size());
    };
    const Dataset a = draw(), b = draw(), c = draw();
    const double ab = discrepancy(cls, a, b), ba = discrepancy(cls, b, a);
    const double bc = discrepancy(cls, b, c), ac = discrepancy(cls, a, c);
    violations += std::abs(discrepancy(cls, a, a)) > tol;
    violations += std::abs(ab - ba) > tol;
    violations += ac > ab + bc + tol;
    for (double d : {ab, bc, ac}) violations += d < -tol || d > 1 + tol;
  }
  return {violations == 0, "violations=" + std::to_string(violations) + " (need 0)"};
}

Outcome c2_oracle() {
  std::mt19937_64 gen(1002);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const bool thr = rep % 2 == 0;
    const auto cls = thr ? HypothesisClass::threshold() : oracle::random_finite_class(gen, 6, 5);
    auto draw = [&] {
      const std::size_t m = 1 + gen() % 8;
      return thr ? oracle::random_threshold_data(gen, m) : oracle::random_token_data(gen, m, cls.domain_size());
    };
    const Dataset a = draw(), b = draw();
    const auto lib = discrepancy_exact(cls, a, b);
    const auto [num, den] = oracle::discrepancy_fraction(cls, a, b);
    mismatches += lib.numerator * den != num * lib.denominator;
  }
  return {mismatches == 0, "mismatches=" + std::to_string(mismatches) + " (need 0)"};
}

Outcome c3_completeness() {
  const auto cfg = threshold_task(10, 10, 100, AdversarySpec::Kind::kIdentity, 500, 3);
  auto c = cfg;
  c.learners = {"robust"};
  const auto s = summarize(run_trials(c), std::nullopt);
  if (auto e = require_no_errors(s); !e.pass) return e;
  const double freq = only_cell(s, "robust").freq_t_all;
  const double need = 1 - 0.1 - 3 * std::sqrt(0.09 / 500);
  return {freq >= need, "freq(T=[N])=" + fmt(freq) + " need >= " + fmt(need)};
}

Outcome c4_coverage() {
  auto cfg = threshold_task(10, 8, 200, AdversarySpec::Kind::kLabelFlipFixedSet, 500, 4);
  cfg.learners = {"robust"};
  const auto s = summarize(run_trials(cfg), std::nullopt);
  if (auto e = require_no_errors(s); !e.pass) return e;
  const double freq = only_cell(s, "robust").freq_excess_above_fixed;
  const double cap = 0.1 + 3 * std::sqrt(0.09 / 500);
  return {freq <= cap, "freq(excess > bound_fixed)=" + fmt(freq) + " need <= " + fmt(cap)};
}

Outcome c5_merge_attack() {
  auto cfg = two_point_task(4, 2, 50, AdversarySpec::Kind::kRarePointMergeAttack, 2000, 5);
  cfg.learners = {"merge"};
  const double bar = 1.0 / 8.0;
  const auto s = summarize(run_trials(cfg), bar);
  if (auto e = require_no_errors(s); !e.pass) return e;
  const double freq = labeling_max(s, "merge");
  return {freq > 1.0 / 20, "max_f freq(risk > 1/8)=" + fmt(freq) + " need > 0.05"};
}

Outcome c6_source_count() {
  auto cfg = two_point_task(10, 8, 25, AdversarySpec::Kind::kSourceCountAttack, 2000, 6);
  cfg.learners = {"robust"};
  const double bar = 0.2 / (8 * 25);
  const auto s = summarize(run_trials(cfg), bar);
  if (auto e = require_no_errors(s); !e.pass) return e;
  const double freq = labeling_max(s, "robust");
  return {freq > 1.0 / 20, "max_f freq(risk > " + fmt(bar) + ")=" + fmt(freq) + " need > 0.05"};
}

Outcome c7_rate() {
  auto cfg = threshold_task(10, 10, 50, AdversarySpec::Kind::kIdentity, 300, 7);
  cfg.m = {50, 100, 200, 400, 800};
  cfg.learners = {"robust"};
  const auto rows = run_trials(cfg);
  const auto s = summarize(rows, std::nullopt);
  if (auto e = require_no_errors(s); !e.pass) return e;
  const auto fit = rate_slope(rows_of(rows, "robust"));
  const bool ok = fit.slope >= -0.65 && fit.slope <= -0.35;
  return {ok, "slope=" + fmt(fit.slope) + " se=" + fmt(fit.std_error) + " need in [-0.65, -0.35]"};
}

Outcome c8_cooperation() {
  auto cfg = threshold_task(8, 6, 200, AdversarySpec::Kind::kLabelFlipFixedSet, 500, 8);
  cfg.learners = {"robust", "single_source"};
  const auto rows = run_trials(cfg);
  const auto s = summarize(rows, std::nullopt);
  if (auto e = require_no_errors(s); !e.pass) return e;
  const auto robust = rows_of(rows, "robust");
  const auto single = rows_of(rows, "single_source");
  if (robust.size() != single.size()) return {false, "unpaired rows"};
  const double n = static_cast<double>(robust.size());
  double sum = 0, sq = 0;
  for (std::size_t i = 0; i < robust.size(); ++i) {
    const double d = robust[i].excess_risk - single[i].excess_risk;
    sum += d;
    sq += d * d;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));
  const double half = 1.96 * sd / std::sqrt(n);
  const bool ok = mean + half < 0;
  return {ok, "mean(robust - single)=" + fmt(mean) + " 95% CI [" + fmt(mean - half) + ", " + fmt(mean + half) +
                  "] need upper < 0"};
}

Outcome c9_no_overhead() {
  const auto cls = HypothesisClass::threshold();
  const auto d = make_uniform_threshold(0.5, 0.1);
  const auto rate = RateFunction::rademacher_exact(cls);
  const Rng root(9);
  std::size_t equal = 0;
  const std::size_t trials = 500;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto col = sample_collection(d, 8, 200, root.derive(Purpose::kTrial, t));
    const auto all = concatenate(col.sources());
    const auto r = robust_learn(cls, col.sources(), 0.1, rate);
    const auto m = merge_erm(cls, col.sources());
    equal += empirical_risk(r.hypothesis, all) == empirical_risk(m.hypothesis, all);
  }
  const double freq = static_cast<double>(equal) / static_cast<double>(trials);
  return {freq >= 0.86, "freq(equal risk on all data)=" + fmt(freq) + " need >= 0.86"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome c10_determinism() {
  std::vector<ExperimentConfig> cfgs;
  auto flip = threshold_task(6, 4, 60, AdversarySpec::Kind::kLabelFlipFixedSet, 40, 10);
  flip.m = {30, 60};
  cfgs.push_back(flip);
  auto attack = two_point_task(4, 2, 30, AdversarySpec::Kind::kRarePointMergeAttack, 40, 11);
  attack.learners = {"robust", "merge", "oracle_clean"};
  cfgs.push_back(attack);
  auto mc = threshold_task(5, 5, 40, AdversarySpec::Kind::kIdentity, 30, 12);
  mc.rate.kind = RateFunction::Kind::kRademacherMC;
  mc.rate.draws = 300;
  cfgs.push_back(mc);

  const auto base = std::filesystem::temp_directory_path() / "mspac_acceptance_c10";
  std::filesystem::remove_all(base);
  std::size_t differing = 0, runs = 0;
  for (std::size_t c = 0; c < cfgs.size(); ++c) {
    std::string reference;
    for (std::size_t w : {1, 4, 8, 1}) {
      auto cfg = cfgs[c];
      cfg.workers = w;
      cfg.output = base / (std::to_string(c) + "_" + std::to_string(runs++));
      const auto res = run_experiment(cfg);
      const auto bytes = slurp(res.csv_path);
      if (reference.empty()) reference = bytes;
      differing += bytes != reference || bytes.empty();
    }
  }
  std::filesystem::remove_all(base);
  return {differing == 0, "runs=" + std::to_string(runs) + " differing=" + std::to_string(differing) + " (need 0)"};
}

struct Criterion {
  Outcome (*run)();
  double budget_s;
};

const std::map<int, Criterion> kCriteria{
    {1, {c1_pseudometric, 30}}, {2, {c2_oracle, 60}},       {3, {c3_completeness, 180}},
    {4, {c4_coverage, 300}},    {5, {c5_merge_attack, 120}}, {6, {c6_source_count, 180}},
    {7, {c7_rate, 600}},        {8, {c8_cooperation, 300}},  {9, {c9_no_overhead, 300}},
    {10, {c10_determinism, 300}},
};

int run_one(int id) {
  const auto& c = kCriteria.at(id);
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < c.budget_s;
  const bool ok = o.pass && in_time;
  std::printf("%s c%d %s runtime=%.1fs budget=%.0fs\n", ok ? "PASS" : "FAIL", id, o.detail.c_str(), secs,
              c.budget_s);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::stoi(argv[i]));
  if (ids.empty()) {
    for (const auto& [id, _] : kCriteria) ids.push_back(id);
  }
  int failed = 0;
  for (int id : ids) {
    if (!kCriteria.contains(id)) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    failed += run_one(id);
  }
  return failed ? 1 : 0;
}
