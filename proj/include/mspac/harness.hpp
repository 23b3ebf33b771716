#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "mspac/adversaries.hpp"
#include "mspac/complexity.hpp"
#include "mspac/core.hpp"
#include "mspac/datagen.hpp"
#include "mspac/hypothesis.hpp"

namespace mspac {

struct ClassSpec {
  enum class Kind { kThreshold, kPair, kTable };
  Kind kind = Kind::kThreshold;
  std::filesystem::path table_path;       ///< kTable, read from disk when rows is empty
  std::vector<std::vector<int>> rows;     ///< kTable, inline rows

  HypothesisClass build() const;
};

struct DistributionSpec {
  enum class Kind { kUniformThreshold, kTwoPoint };
  enum class Labeler { kH1, kH2, kBoth };
  Kind kind = Kind::kUniformThreshold;
  double bayes_threshold = 0.5;
  double noise = 0.1;
  Labeler labeler = Labeler::kBoth;
  /// Mass on x2 for adversaries that do not fix it themselves.
  std::optional<double> p2;
};

struct RateSpec {
  RateFunction::Kind kind = RateFunction::Kind::kRademacherExact;
  std::size_t draws = 2000;
  std::size_t vc_dim = 1;
  double vc_constant = 1.0;
};

/// Flat JSON document; see README for the key list.
struct ExperimentConfig {
  ClassSpec hypothesis_class;
  DistributionSpec distribution;
  std::vector<std::size_t> n_sources{10};
  std::vector<std::size_t> m{100};
  std::vector<std::size_t> k{10};
  double delta = 0.1;
  AdversarySpec::Kind adversary = AdversarySpec::Kind::kIdentity;
  std::vector<std::string> learners{"robust", "merge", "single_source", "oracle_clean"};
  RateSpec rate;
  std::size_t trials = 100;
  std::uint64_t master_seed = 1;
  bool permute_sources = true;
  std::optional<double> risk_bar;
  bool timing = false;
  bool plot = false;
  std::size_t workers = 1;
  std::filesystem::path output = "out";

  /// Throws ValueError on a malformed or out-of-range document.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// One point of the sweep. labeler is 0 (h1) or 1 (h2) for two-point runs.
struct Cell {
  std::size_t n_sources;
  std::size_t k;
  std::size_t m;
  std::optional<int> labeler;
};

/// Sweep cells in output order: N, then k, then m, then labeler.
std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg);

struct TrialRecord {
  std::size_t trial = 0;
  std::size_t m = 0;
  std::size_t n_sources = 0;
  std::size_t k = 0;
  double alpha = 0.0;
  std::string adversary;
  std::string learner;
  double true_risk = 0.0;
  double optimal_risk = 0.0;
  double excess_risk = 0.0;
  double bound_fixed = 0.0;
  double bound_flexible = 0.0;
  std::size_t trusted_count = 0;
  bool g_subset_t = false;
  bool t_all = false;
  bool fallback = false;
  double wall_ms = 0.0;

  bool operator==(const TrialRecord&) const;
};

inline constexpr const char* kCsvHeader =
    "trial,m,N,k,alpha,adversary,learner,true_risk,optimal_risk,excess_risk,bound_fixed,bound_flexible,"
    "trusted_count,g_subset_t,t_all,fallback,wall_ms";

/// Learner name written on the row of a trial that threw.
inline constexpr const char* kErrorLearner = "error";

/// One record per learner. Deterministic in (master_seed, cell, trial).
std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, const Cell& cell, std::size_t trial);

void write_csv(std::ostream& out, std::span<const TrialRecord> rows);
std::vector<TrialRecord> read_csv(std::istream& in);
std::vector<TrialRecord> read_csv(const std::filesystem::path& path);

struct CellSummary {
  std::size_t n_sources;
  std::size_t k;
  std::size_t m;
  std::string adversary;
  std::string learner;
  std::size_t trials;
  double mean_true_risk;
  double mean_excess;
  double se_excess;
  double freq_excess_above_fixed;
  double freq_excess_above_flexible;
  double freq_t_all;
  double freq_g_subset_t;
  double freq_fallback;
  std::optional<double> freq_risk_above_bar;
  double mean_trusted;
};

/// Frequency of {true_risk > bar}, maximised over the labelings of a
/// two-point run ("@h1" / "@h2" adversary suffixes collapse to one key).
struct LabelingMax {
  std::size_t n_sources;
  std::size_t k;
  std::size_t m;
  std::string adversary;
  std::string learner;
  double max_freq;
};

struct SlopeFit {
  double slope;
  double std_error;
  std::size_t points;
};

struct SlopeSummary {
  std::string group;
  SlopeFit fit;
};

struct Summary {
  std::vector<CellSummary> cells;
  std::vector<LabelingMax> labeling_max;
  std::vector<SlopeSummary> slopes;
  std::size_t error_rows = 0;
};

/// Aggregates raw rows. Error rows are counted and otherwise skipped.
Summary summarize(std::span<const TrialRecord> rows, std::optional<double> risk_bar);
void write_summary(std::ostream& out, const Summary& s);

/// Least-squares slope of log(mean excess risk) against log(m) for rows that
/// already share every other key. Throws ValueError with fewer than three
/// distinct m values or a non-positive mean.
SlopeFit rate_slope(std::span<const TrialRecord> rows);

/// rate_slope per group; keys are column names among N, k, adversary, learner.
std::vector<SlopeSummary> rate_slopes(std::span<const TrialRecord> rows, std::span<const std::string> keys);

/// Log-log plot of mean excess risk against m, one line per (adversary, learner).
void write_svg(std::ostream& out, std::span<const TrialRecord> rows);

struct ExperimentResult {
  std::vector<TrialRecord> rows;
  Summary summary;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

/// Runs every cell x trial on cfg.workers threads and writes trials.csv and
/// summary.txt (plus plot.svg when cfg.plot) under the output directory, which
/// MSPAC_OUT_DIR overrides.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Same, without touching the filesystem.
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg);

}  // namespace mspac
