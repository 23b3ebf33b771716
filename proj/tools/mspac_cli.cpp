#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mspac/adversaries.hpp"
#include "mspac/complexity.hpp"
#include "mspac/datagen.hpp"
#include "mspac/discrepancy.hpp"
#include "mspac/harness.hpp"
#include "mspac/io.hpp"

using namespace mspac;

namespace {

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, std::optional<std::size_t> trials,
            const std::string& out_dir, std::optional<std::size_t> workers, bool timing) {
  auto cfg = load_config(config);
  if (seed) cfg.master_seed = *seed;
  if (trials) cfg.trials = *trials;
  if (!out_dir.empty()) cfg.output = out_dir;
  if (workers) cfg.workers = *workers;
  if (timing) cfg.timing = true;
  const auto res = run_experiment(cfg);
  write_summary(std::cout, res.summary);
  std::cout << "csv=" << res.csv_path.string() << "\nsummary=" << res.summary_path.string() << '\n';
  return 0;
}

int cmd_discrepancy(const std::string& spec, const std::vector<std::string>& files) {
  const auto cls = parse_class_spec(spec);
  std::vector<Dataset> data;
  for (const auto& f : files) data.push_back(read_dataset(std::filesystem::path(f)));
  const auto d = discrepancy_matrix(cls, data);
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) std::cout << (j ? "," : "") << format_double(d(i, j));
    std::cout << '\n';
  }
  return 0;
}

int cmd_bound(const std::string& preset, std::size_t k, std::size_t n, std::size_t m, double delta,
              double rad_good, double rad_max, const std::string& mode_name) {
  const BoundInputs in{rad_good, rad_max, k, m, n, delta};
  BoundReport r{};
  if (preset == "fixed") {
    r = bound_fixed_set(in);
  } else {
    BinomialMode mode = BinomialMode::kExact;
    if (mode_name == "entropy") mode = BinomialMode::kEntropy;
    if (mode_name == "entropy_sqrt") mode = BinomialMode::kEntropySqrt;
    r = bound_flexible_set(in, mode);
  }
  std::cout << "preset=" << preset << '\n'
            << "rhs_total=" << format_double(r.rhs_total) << '\n'
            << "term_group=" << format_double(r.term_group) << '\n'
            << "term_adversary=" << format_double(r.term_adversary) << '\n'
            << "alpha=" << format_double(r.alpha) << '\n'
            << "log_binomial=" << format_double(r.log_binomial) << '\n';
  std::cout << "preset,N,k,m,delta,rad_good,max_rad_source,alpha,log_binomial,term_group,term_adversary,rhs_total\n"
            << preset << ',' << n << ',' << k << ',' << m << ',' << format_double(delta) << ','
            << format_double(rad_good) << ',' << format_double(rad_max) << ',' << format_double(r.alpha) << ','
            << format_double(r.log_binomial) << ',' << format_double(r.term_group) << ','
            << format_double(r.term_adversary) << ',' << format_double(r.rhs_total) << '\n';
  return 0;
}

void print_sources(const std::string& title, std::span<const Dataset> sources,
                   const std::optional<std::vector<std::size_t>>& g) {
  std::cout << "## " << title << '\n';
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const bool kept = g && std::find(g->begin(), g->end(), i) != g->end();
    std::cout << "# source " << i << (kept ? " (preserved)" : "") << '\n';
    write_dataset(std::cout, sources[i]);
  }
}

int cmd_attack_demo(const std::string& kind_name, std::size_t n, std::size_t k, std::size_t m,
                    const std::string& labeler, std::uint64_t seed, double p2) {
  const auto kind = adversary_kind_from_string(kind_name);
  if (k < 1 || k > n) throw DomainError("need 1 <= k <= N");
  const auto cls = HypothesisClass::agreeing_pair();
  const auto pair = *find_nontrivial_pair(cls);
  const auto& f = labeler == "h2" ? pair.h2 : pair.h1;
  const double alpha = alpha_of(n, k);

  TwoPoint dist = make_two_point(pair.x1, pair.x2, p2, f);
  if (kind == AdversarySpec::Kind::kRarePointMergeAttack) dist = merge_attack_distribution(pair, f, alpha);
  if (kind == AdversarySpec::Kind::kSourceCountAttack) dist = source_count_distribution(pair, f, alpha, m);

  const Rng rng(seed);
  const auto clean = sample_collection(dist, n, m, rng.derive(Purpose::kSampling, 0));
  const AttackTarget target{pair.x1, pair.x2, f};
  AdversarySpec adv;
  switch (kind) {
    case AdversarySpec::Kind::kIdentity: adv = AdversarySpec::identity(); break;
    case AdversarySpec::Kind::kLabelFlipFixedSet: adv = AdversarySpec::label_flip(leading_set(k)); break;
    case AdversarySpec::Kind::kRarePointMergeAttack: adv = AdversarySpec::rare_point_merge(leading_set(k), target); break;
    case AdversarySpec::Kind::kSourceCountAttack: adv = AdversarySpec::source_count(leading_set(k), target); break;
  }
  const auto out = apply(adv, clean, rng.derive(Purpose::kAdversary, 0));
  std::cout << "# kind=" << kind_name << " N=" << n << " k=" << k << " m=" << m << " alpha=" << format_double(alpha)
            << " p2=" << format_double(dist.p2) << " labeler=" << (labeler == "h2" ? "h2" : "h1") << '\n';
  print_sources("before", clean.sources(), out.preserved_set());
  print_sources("after", out.sources(), out.preserved_set());
  return 0;
}

int cmd_slope(const std::string& csv, const std::vector<std::string>& keys) {
  const auto rows = read_csv(std::filesystem::path(csv));
  std::vector<TrialRecord> kept;
  for (const auto& r : rows) {
    if (r.learner != kErrorLearner) kept.push_back(r);
  }
  std::cout << "group,slope,std_error,points\n";
  for (const auto& s : rate_slopes(kept, keys)) {
    std::cout << s.group << ',' << format_double(s.fit.slope) << ',' << format_double(s.fit.std_error) << ','
              << s.fit.points << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial multi-source PAC learning simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  std::string config, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials, workers;
  bool timing = false;
  run->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override master_seed");
  run->add_option("--trials", trials, "Override trials");
  run->add_option("--out", out_dir, "Override output directory");
  run->add_option("--workers", workers, "Worker threads");
  run->add_flag("--timing", timing, "Record wall time per learner (CSV is then not reproducible)");

  auto* disc = app.add_subcommand("discrepancy", "Pairwise empirical discrepancy of dataset files");
  std::string class_spec = "threshold", file_a, file_b;
  std::vector<std::string> more;
  disc->add_option("--class", class_spec, "threshold | pair | table:<path>");
  disc->add_option("--a", file_a, "First dataset")->required()->check(CLI::ExistingFile);
  disc->add_option("--b", file_b, "Second dataset")->required()->check(CLI::ExistingFile);
  disc->add_option("more", more, "Further datasets")->check(CLI::ExistingFile);

  auto* bound = app.add_subcommand("bound", "Evaluate a generalization bound");
  std::string preset = "fixed", mode = "exact";
  std::size_t bk = 0, bn = 0, bm = 0;
  double bdelta = 0.05, rad_good = 0.0, rad_max = 0.0;
  bound->add_option("--preset", preset, "fixed | flexible")->check(CLI::IsMember({"fixed", "flexible"}));
  bound->add_option("--k", bk, "Preserved sources")->required();
  bound->add_option("--n", bn, "Sources")->required();
  bound->add_option("--m", bm, "Samples per source")->required();
  bound->add_option("--delta", bdelta, "Confidence");
  bound->add_option("--rad-good", rad_good, "Rademacher complexity of the pooled preserved data");
  bound->add_option("--rad-max", rad_max, "Max per-source Rademacher complexity");
  bound->add_option("--binomial", mode, "exact | entropy | entropy_sqrt")
      ->check(CLI::IsMember({"exact", "entropy", "entropy_sqrt"}));

  auto* demo = app.add_subcommand("attack-demo", "Show an adversary on a small two-point sample");
  std::string kind = "rare_point_merge", labeler = "h1";
  std::size_t dn = 4, dk = 2, dm = 8;
  std::uint64_t dseed = 1;
  double p2 = 0.25;
  demo->add_option("--kind", kind, "identity | label_flip | rare_point_merge | source_count");
  demo->add_option("--n", dn, "Sources");
  demo->add_option("--k", dk, "Preserved sources");
  demo->add_option("--m", dm, "Samples per source");
  demo->add_option("--labeler", labeler, "h1 | h2")->check(CLI::IsMember({"h1", "h2"}));
  demo->add_option("--seed", dseed, "Seed");
  demo->add_option("--p2", p2, "Mass on x2 for identity and label_flip");

  auto* slope = app.add_subcommand("slope", "Log-log rate slope from a trials CSV");
  std::string csv;
  std::vector<std::string> keys{"N", "k", "adversary", "learner"};
  slope->add_option("--csv", csv, "trials.csv")->required()->check(CLI::ExistingFile);
  slope->add_option("--by", keys, "Group keys among N, k, adversary, learner")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, seed, trials, out_dir, workers, timing);
    if (*disc) {
      std::vector<std::string> files{file_a, file_b};
      files.insert(files.end(), more.begin(), more.end());
      return cmd_discrepancy(class_spec, files);
    }
    if (*bound) return cmd_bound(preset, bk, bn, bm, bdelta, rad_good, rad_max, mode);
    if (*demo) return cmd_attack_demo(kind, dn, dk, dm, labeler, dseed, p2);
    if (*slope) return cmd_slope(csv, keys);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
