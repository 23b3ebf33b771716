#include "mspac/harness.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "mspac/io.hpp"
#include "mspac/robust_learner.hpp"

namespace mspac {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

HypothesisClass ClassSpec::build() const {
  switch (kind) {
    case Kind::kThreshold: return HypothesisClass::threshold();
    case Kind::kPair: return HypothesisClass::agreeing_pair();
    case Kind::kTable: {
      if (rows.empty()) return read_hypothesis_table(table_path);
      SignTable t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw ValueError("table rows have different lengths");
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
          if (rows[i][j] != 1 && rows[i][j] != -1) throw ValueError("table entries must be +1 or -1");
          t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<std::int8_t>(rows[i][j]);
        }
      }
      return HypothesisClass::finite(std::move(t));
    }
  }
  throw ValueError("bad class spec");
}

namespace {

const std::set<std::string> kLearnerNames{"robust", "merge", "single_source", "oracle_clean"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ValueError("unknown key '" + key + "' in " + where);
  }
}

std::vector<std::size_t> size_list(const json& v, const std::string& key) {
  std::vector<std::size_t> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(e.get<std::size_t>());
  } else {
    out.push_back(v.get<std::size_t>());
  }
  if (out.empty()) throw ValueError("'" + key + "' must not be an empty list");
  return out;
}

ClassSpec parse_class(const json& v) {
  ClassSpec spec;
  const json obj = v.is_string() ? json{{"kind", v}} : v;
  reject_unknown(obj, {"kind", "path", "rows"}, "hypothesis_class");
  const auto kind = obj.at("kind").get<std::string>();
  if (kind == "threshold") {
    spec.kind = ClassSpec::Kind::kThreshold;
  } else if (kind == "pair") {
    spec.kind = ClassSpec::Kind::kPair;
  } else if (kind == "table") {
    spec.kind = ClassSpec::Kind::kTable;
    if (obj.contains("rows")) spec.rows = obj["rows"].get<std::vector<std::vector<int>>>();
    if (obj.contains("path")) spec.table_path = obj["path"].get<std::string>();
    if (spec.rows.empty() && spec.table_path.empty()) throw ValueError("table class needs 'rows' or 'path'");
  } else {
    throw ValueError("unknown hypothesis_class kind '" + kind + "'");
  }
  return spec;
}

DistributionSpec parse_distribution(const json& obj) {
  DistributionSpec spec;
  reject_unknown(obj, {"kind", "threshold", "noise", "labeler", "p2"}, "distribution");
  const auto kind = obj.at("kind").get<std::string>();
  if (kind == "uniform_threshold") {
    spec.kind = DistributionSpec::Kind::kUniformThreshold;
    spec.bayes_threshold = obj.value("threshold", 0.5);
    spec.noise = obj.value("noise", 0.1);
  } else if (kind == "two_point") {
    spec.kind = DistributionSpec::Kind::kTwoPoint;
    const auto lab = obj.value("labeler", std::string("both"));
    if (lab == "h1") {
      spec.labeler = DistributionSpec::Labeler::kH1;
    } else if (lab == "h2") {
      spec.labeler = DistributionSpec::Labeler::kH2;
    } else if (lab == "both") {
      spec.labeler = DistributionSpec::Labeler::kBoth;
    } else {
      throw ValueError("labeler must be h1, h2 or both");
    }
    if (obj.contains("p2")) spec.p2 = obj["p2"].get<double>();
  } else {
    throw ValueError("unknown distribution kind '" + kind + "'");
  }
  return spec;
}

RateSpec parse_rate(const json& v) {
  RateSpec spec;
  const json obj = v.is_string() ? json{{"kind", v}} : v;
  reject_unknown(obj, {"kind", "draws", "vc_dim", "vc_constant"}, "rate");
  const auto kind = obj.at("kind").get<std::string>();
  if (kind == "rademacher_exact") {
    spec.kind = RateFunction::Kind::kRademacherExact;
  } else if (kind == "rademacher_mc") {
    spec.kind = RateFunction::Kind::kRademacherMC;
  } else if (kind == "rademacher_auto" || kind == "auto") {
    spec.kind = RateFunction::Kind::kRademacherAuto;
  } else if (kind == "vc") {
    spec.kind = RateFunction::Kind::kVC;
  } else {
    throw ValueError("unknown rate kind '" + kind + "'");
  }
  spec.draws = obj.value("draws", spec.draws);
  spec.vc_dim = obj.value("vc_dim", spec.vc_dim);
  spec.vc_constant = obj.value("vc_constant", spec.vc_constant);
  return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ValueError("config must be a JSON object");
  reject_unknown(doc,
                 {"hypothesis_class", "distribution", "N", "m", "k", "delta", "adversary", "learners", "rate",
                  "trials", "master_seed", "permute_sources", "risk_bar", "timing", "plot", "workers", "output"},
                 "config");
  ExperimentConfig cfg;
  try {
    if (doc.contains("hypothesis_class")) cfg.hypothesis_class = parse_class(doc["hypothesis_class"]);
    if (doc.contains("distribution")) cfg.distribution = parse_distribution(doc["distribution"]);
    if (doc.contains("N")) cfg.n_sources = size_list(doc["N"], "N");
    if (doc.contains("m")) cfg.m = size_list(doc["m"], "m");
    if (doc.contains("k")) {
      cfg.k = size_list(doc["k"], "k");
    } else {
      cfg.k = cfg.n_sources;
    }
    cfg.delta = doc.value("delta", cfg.delta);
    if (doc.contains("adversary")) {
      const auto& a = doc["adversary"];
      const auto name = a.is_string() ? a.get<std::string>() : a.at("kind").get<std::string>();
      if (a.is_object()) reject_unknown(a, {"kind"}, "adversary");
      cfg.adversary = adversary_kind_from_string(name);
    }
    if (doc.contains("learners")) cfg.learners = doc["learners"].get<std::vector<std::string>>();
    if (doc.contains("rate")) cfg.rate = parse_rate(doc["rate"]);
    cfg.trials = doc.value("trials", cfg.trials);
    cfg.master_seed = doc.value("master_seed", cfg.master_seed);
    cfg.permute_sources = doc.value("permute_sources", cfg.permute_sources);
    if (doc.contains("risk_bar") && !doc["risk_bar"].is_null()) cfg.risk_bar = doc["risk_bar"].get<double>();
    cfg.timing = doc.value("timing", cfg.timing);
    cfg.plot = doc.value("plot", cfg.plot);
    cfg.workers = doc.value("workers", cfg.workers);
    if (doc.contains("output")) cfg.output = doc["output"].get<std::string>();
  } catch (const json::exception& e) {
    throw ValueError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ValueError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (n_sources.empty() || m.empty() || k.empty()) throw ValueError("sweep lists must be nonempty");
  for (auto n : n_sources) {
    if (n == 0) throw ValueError("N must be at least 1");
    for (auto kk : k) {
      if (kk < 1 || kk > n) throw ValueError("need 1 <= k <= N");
    }
  }
  for (auto mm : m) {
    if (mm == 0) throw ValueError("m must be at least 1");
  }
  if (trials < 1) throw ValueError("trials must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ValueError("delta must lie in (0, 1)");
  if (workers < 1) throw ValueError("workers must be at least 1");
  if (learners.empty()) throw ValueError("learner list is empty");
  for (const auto& l : learners) {
    if (!kLearnerNames.count(l)) throw ValueError("unknown learner '" + l + "'");
  }
  const bool attack = adversary == AdversarySpec::Kind::kRarePointMergeAttack ||
                      adversary == AdversarySpec::Kind::kSourceCountAttack;
  if (attack && distribution.kind != DistributionSpec::Kind::kTwoPoint) {
    throw ValueError("the rare-point attacks need the two_point distribution");
  }
  if (distribution.kind == DistributionSpec::Kind::kUniformThreshold &&
      hypothesis_class.kind != ClassSpec::Kind::kThreshold) {
    throw ValueError("uniform_threshold needs the threshold class");
  }
  if (rate.kind == RateFunction::Kind::kRademacherMC && rate.draws < 100) {
    throw ValueError("rate draws must be at least 100");
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValueError(std::string("config is not valid JSON: ") + e.what());
  }
  return ExperimentConfig::from_json(doc);
}

std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<std::optional<int>> labelers{std::nullopt};
  if (cfg.distribution.kind == DistributionSpec::Kind::kTwoPoint) {
    switch (cfg.distribution.labeler) {
      case DistributionSpec::Labeler::kH1: labelers = {0}; break;
      case DistributionSpec::Labeler::kH2: labelers = {1}; break;
      case DistributionSpec::Labeler::kBoth: labelers = {0, 1}; break;
    }
  }
  std::vector<Cell> cells;
  for (auto n : cfg.n_sources) {
    // The identity adversary preserves every source, so only k = N is meaningful.
    std::vector<std::size_t> ks = cfg.adversary == AdversarySpec::Kind::kIdentity ? std::vector<std::size_t>{n} : cfg.k;
    for (auto k : ks) {
      for (auto m : cfg.m) {
        for (auto lab : labelers) cells.push_back({n, k, m, lab});
      }
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Trials

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string adversary_label(const ExperimentConfig& cfg, const Cell& cell) {
  auto name = to_string(cfg.adversary);
  if (cell.labeler) name += *cell.labeler == 0 ? "@h1" : "@h2";
  return name;
}

RateFunction make_rate(const ExperimentConfig& cfg, const HypothesisClass& cls) {
  const Rng rng = Rng(cfg.master_seed).derive(Purpose::kRademacher, 0);
  switch (cfg.rate.kind) {
    case RateFunction::Kind::kRademacherExact: return RateFunction::rademacher_exact(cls);
    case RateFunction::Kind::kRademacherMC: return RateFunction::rademacher_mc(cls, cfg.rate.draws, rng);
    case RateFunction::Kind::kRademacherAuto: return RateFunction::rademacher_auto(cls, cfg.rate.draws, rng);
    case RateFunction::Kind::kVC: return RateFunction::vc(cfg.rate.vc_dim, cfg.rate.vc_constant);
  }
  throw ValueError("bad rate kind");
}

Rng trial_rng(const ExperimentConfig& cfg, const Cell& cell, std::size_t trial) {
  return Rng(cfg.master_seed)
      .derive(Purpose::kCell, cell.n_sources)
      .derive(Purpose::kCell, cell.k)
      .derive(Purpose::kCell, cell.m)
      .derive(Purpose::kCell, cell.labeler ? static_cast<std::uint64_t>(*cell.labeler) + 1 : 0)
      .derive(Purpose::kTrial, trial);
}

struct Scenario {
  HypothesisClass cls;
  Distribution dist;
  AdversarySpec adversary;
};

Scenario build_scenario(const ExperimentConfig& cfg, const Cell& cell) {
  auto cls = cfg.hypothesis_class.build();
  const double alpha = alpha_of(cell.n_sources, cell.k);
  const auto preserved = leading_set(cell.k);

  std::optional<Distribution> dist;
  std::optional<AttackTarget> target;
  if (cfg.distribution.kind == DistributionSpec::Kind::kUniformThreshold) {
    dist = make_uniform_threshold(cfg.distribution.bayes_threshold, cfg.distribution.noise);
  } else {
    const auto pair = find_nontrivial_pair(cls);
    if (!pair) throw CapabilityError("hypothesis class has no non-trivial pair for the two_point distribution");
    const auto& f = cell.labeler.value_or(0) == 0 ? pair->h1 : pair->h2;
    switch (cfg.adversary) {
      case AdversarySpec::Kind::kRarePointMergeAttack:
        dist = merge_attack_distribution(*pair, f, alpha);
        break;
      case AdversarySpec::Kind::kSourceCountAttack:
        dist = source_count_distribution(*pair, f, alpha, cell.m);
        break;
      default:
        dist = make_two_point(pair->x1, pair->x2, cfg.distribution.p2.value_or(0.25), f);
        break;
    }
    target = AttackTarget{pair->x1, pair->x2, f};
  }

  AdversarySpec adv;
  switch (cfg.adversary) {
    case AdversarySpec::Kind::kIdentity: adv = AdversarySpec::identity(); break;
    case AdversarySpec::Kind::kLabelFlipFixedSet: adv = AdversarySpec::label_flip(preserved); break;
    case AdversarySpec::Kind::kRarePointMergeAttack: adv = AdversarySpec::rare_point_merge(preserved, *target); break;
    case AdversarySpec::Kind::kSourceCountAttack: adv = AdversarySpec::source_count(preserved, *target); break;
  }
  return Scenario{std::move(cls), std::move(*dist), std::move(adv)};
}

bool includes_all(const std::vector<std::size_t>& sorted_super, const std::vector<std::size_t>& sorted_sub) {
  return std::includes(sorted_super.begin(), sorted_super.end(), sorted_sub.begin(), sorted_sub.end());
}

}  // namespace

std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, const Cell& cell, std::size_t trial) {
  TrialRecord base;
  base.trial = trial;
  base.m = cell.m;
  base.n_sources = cell.n_sources;
  base.k = cell.k;
  base.adversary = adversary_label(cfg, cell);

  try {
    base.alpha = alpha_of(cell.n_sources, cell.k);
    const auto sc = build_scenario(cfg, cell);
    const Rng rng = trial_rng(cfg, cell, trial);

    const auto clean = sample_collection(sc.dist, cell.n_sources, cell.m, rng.derive(Purpose::kSampling, 0));
    auto collection = apply(sc.adversary, clean, rng.derive(Purpose::kAdversary, 0));
    if (cfg.permute_sources) {
      auto gen = rng.derive(Purpose::kPermutation, 0).engine();
      collection = collection.permuted(random_permutation(gen, cell.n_sources));
    }
    const auto sources = collection.sources();
    const auto g = *collection.preserved_set();

    const auto rate = make_rate(cfg, sc.cls);
    const auto rad = RateFunction::rademacher_auto(sc.cls, cfg.rate.draws,
                                                   Rng(cfg.master_seed).derive(Purpose::kRademacher, 1));
    double max_rad = 0.0;
    for (const auto& s : sources) max_rad = std::max(max_rad, rad.complexity(s));
    const BoundInputs in{rad.complexity(concatenate(sources, g)), max_rad, cell.k, cell.m, cell.n_sources,
                         cfg.delta};
    base.bound_fixed = bound_fixed_set(in).rhs_total;
    base.bound_flexible = bound_flexible_set(in).rhs_total;
    base.optimal_risk = optimal_risk(sc.dist, sc.cls);

    std::vector<TrialRecord> out;
    for (const auto& name : cfg.learners) {
      const auto start = std::chrono::steady_clock::now();
      std::optional<LearnerOutput> res;
      if (name == "robust") {
        res = robust_learn(sc.cls, sources, cfg.delta, rate);
      } else if (name == "merge") {
        res = merge_erm(sc.cls, sources);
      } else if (name == "single_source") {
        res = single_source_erm(sc.cls, sources, g.front());
      } else {
        res = oracle_clean_erm(sc.cls, collection);
      }
      const auto stop = std::chrono::steady_clock::now();

      TrialRecord r = base;
      r.learner = name;
      r.true_risk = true_risk(res->hypothesis, sc.dist);
      r.excess_risk = r.true_risk - r.optimal_risk;
      r.trusted_count = res->trained_on.size();
      r.g_subset_t = includes_all(res->trained_on, g);
      r.t_all = res->trained_on.size() == cell.n_sources;
      r.fallback = res->filter && res->filter->fallback_used;
      r.wall_ms = cfg.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
      out.push_back(std::move(r));
    }
    return out;
  } catch (const std::exception&) {
    TrialRecord r = base;
    r.learner = kErrorLearner;
    r.true_risk = r.optimal_risk = r.excess_risk = kNaN;
    r.bound_fixed = r.bound_flexible = kNaN;
    r.wall_ms = 0.0;
    return {r};
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ValueError("not a count: '" + s + "'");
  return v;
}

bool parse_flag(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ValueError("not a 0/1 flag: '" + s + "'");
}

}  // namespace

bool TrialRecord::operator==(const TrialRecord& o) const {
  return trial == o.trial && m == o.m && n_sources == o.n_sources && k == o.k && same_double(alpha, o.alpha) &&
         adversary == o.adversary && learner == o.learner && same_double(true_risk, o.true_risk) &&
         same_double(optimal_risk, o.optimal_risk) && same_double(excess_risk, o.excess_risk) &&
         same_double(bound_fixed, o.bound_fixed) && same_double(bound_flexible, o.bound_flexible) &&
         trusted_count == o.trusted_count && g_subset_t == o.g_subset_t && t_all == o.t_all &&
         fallback == o.fallback && same_double(wall_ms, o.wall_ms);
}

void write_csv(std::ostream& out, std::span<const TrialRecord> rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.trial << ',' << r.m << ',' << r.n_sources << ',' << r.k << ',' << format_double(r.alpha) << ','
        << r.adversary << ',' << r.learner << ',' << format_double(r.true_risk) << ','
        << format_double(r.optimal_risk) << ',' << format_double(r.excess_risk) << ','
        << format_double(r.bound_fixed) << ',' << format_double(r.bound_flexible) << ',' << r.trusted_count
        << ',' << int(r.g_subset_t) << ',' << int(r.t_all) << ',' << int(r.fallback) << ','
        << format_double(r.wall_ms) << '\n';
  }
}

std::vector<TrialRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValueError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ValueError("unexpected CSV header");
  std::vector<TrialRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 17) throw ValueError("line " + std::to_string(line_no) + ": expected 17 fields");
    TrialRecord r;
    r.trial = parse_size(f[0]);
    r.m = parse_size(f[1]);
    r.n_sources = parse_size(f[2]);
    r.k = parse_size(f[3]);
    r.alpha = parse_double(f[4]);
    r.adversary = f[5];
    r.learner = f[6];
    r.true_risk = parse_double(f[7]);
    r.optimal_risk = parse_double(f[8]);
    r.excess_risk = parse_double(f[9]);
    r.bound_fixed = parse_double(f[10]);
    r.bound_flexible = parse_double(f[11]);
    r.trusted_count = parse_size(f[12]);
    r.g_subset_t = parse_flag(f[13]);
    r.t_all = parse_flag(f[14]);
    r.fallback = parse_flag(f[15]);
    r.wall_ms = parse_double(f[16]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TrialRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv(in);
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

std::string base_adversary(const std::string& label) { return label.substr(0, label.find('@')); }

/// Risk level the two-point lower-bound constructions are stated against.
std::optional<double> attack_risk_bar(const TrialRecord& r) {
  const auto adv = base_adversary(r.adversary);
  if (adv == "rare_point_merge" && r.alpha < 1.0) return r.alpha / (8.0 * (1.0 - r.alpha));
  if (adv == "source_count") return r.alpha / (8.0 * static_cast<double>(r.m));
  return std::nullopt;
}

using CellKey = std::tuple<std::string, std::string, std::size_t, std::size_t, std::size_t>;

CellKey key_of(const TrialRecord& r) { return {r.adversary, r.learner, r.n_sources, r.k, r.m}; }

}  // namespace

Summary summarize(std::span<const TrialRecord> rows, std::optional<double> risk_bar) {
  Summary out;
  std::map<CellKey, std::vector<const TrialRecord*>> groups;
  for (const auto& r : rows) {
    if (r.learner == kErrorLearner) {
      ++out.error_rows;
      continue;
    }
    groups[key_of(r)].push_back(&r);
  }

  std::map<CellKey, double> max_freq;
  for (const auto& [key, members] : groups) {
    CellSummary c{};
    c.adversary = std::get<0>(key);
    c.learner = std::get<1>(key);
    c.n_sources = std::get<2>(key);
    c.k = std::get<3>(key);
    c.m = std::get<4>(key);
    c.trials = members.size();
    const double n = static_cast<double>(members.size());
    double sum_sq = 0.0;
    std::size_t above_fixed = 0, above_flex = 0, t_all = 0, g_sub = 0, fb = 0, above_bar = 0;
    const auto bar = risk_bar ? risk_bar : attack_risk_bar(*members.front());
    for (const auto* r : members) {
      c.mean_true_risk += r->true_risk;
      c.mean_excess += r->excess_risk;
      sum_sq += r->excess_risk * r->excess_risk;
      c.mean_trusted += static_cast<double>(r->trusted_count);
      above_fixed += r->excess_risk > r->bound_fixed;
      above_flex += r->excess_risk > r->bound_flexible;
      t_all += r->t_all;
      g_sub += r->g_subset_t;
      fb += r->fallback;
      if (bar) above_bar += r->true_risk > *bar;
    }
    c.mean_true_risk /= n;
    c.mean_excess /= n;
    c.mean_trusted /= n;
    c.se_excess = members.size() > 1
                      ? std::sqrt(std::max(0.0, (sum_sq - n * c.mean_excess * c.mean_excess) / (n - 1.0)) / n)
                      : 0.0;
    c.freq_excess_above_fixed = static_cast<double>(above_fixed) / n;
    c.freq_excess_above_flexible = static_cast<double>(above_flex) / n;
    c.freq_t_all = static_cast<double>(t_all) / n;
    c.freq_g_subset_t = static_cast<double>(g_sub) / n;
    c.freq_fallback = static_cast<double>(fb) / n;
    if (bar) {
      c.freq_risk_above_bar = static_cast<double>(above_bar) / n;
      const CellKey mk{base_adversary(c.adversary), c.learner, c.n_sources, c.k, c.m};
      auto [it, fresh] = max_freq.emplace(mk, *c.freq_risk_above_bar);
      if (!fresh) it->second = std::max(it->second, *c.freq_risk_above_bar);
    }
    out.cells.push_back(std::move(c));
  }
  for (const auto& [key, f] : max_freq) {
    out.labeling_max.push_back({std::get<2>(key), std::get<3>(key), std::get<4>(key), std::get<0>(key),
                                std::get<1>(key), f});
  }

  std::vector<TrialRecord> clean_rows;
  for (const auto& r : rows) {
    if (r.learner != kErrorLearner) clean_rows.push_back(r);
  }
  const std::vector<std::string> keys{"N", "k", "adversary", "learner"};
  out.slopes = rate_slopes(clean_rows, keys);
  return out;
}

void write_summary(std::ostream& out, const Summary& s) {
  out << "cells\n";
  out << "N,k,m,adversary,learner,trials,mean_true_risk,mean_excess,se_excess,freq_excess_gt_bound_fixed,"
         "freq_excess_gt_bound_flexible,freq_t_all,freq_g_subset_t,freq_fallback,freq_risk_gt_bar,mean_trusted\n";
  for (const auto& c : s.cells) {
    out << c.n_sources << ',' << c.k << ',' << c.m << ',' << c.adversary << ',' << c.learner << ',' << c.trials
        << ',' << format_double(c.mean_true_risk) << ',' << format_double(c.mean_excess) << ','
        << format_double(c.se_excess) << ',' << format_double(c.freq_excess_above_fixed) << ','
        << format_double(c.freq_excess_above_flexible) << ',' << format_double(c.freq_t_all) << ','
        << format_double(c.freq_g_subset_t) << ',' << format_double(c.freq_fallback) << ','
        << (c.freq_risk_above_bar ? format_double(*c.freq_risk_above_bar) : std::string("")) << ','
        << format_double(c.mean_trusted) << '\n';
  }
  if (!s.labeling_max.empty()) {
    out << "\nmax over labelings of freq(true_risk > bar)\n";
    out << "N,k,m,adversary,learner,max_freq\n";
    for (const auto& l : s.labeling_max) {
      out << l.n_sources << ',' << l.k << ',' << l.m << ',' << l.adversary << ',' << l.learner << ','
          << format_double(l.max_freq) << '\n';
    }
  }
  if (!s.slopes.empty()) {
    out << "\nlog-log slope of mean excess risk vs m\n";
    out << "group,slope,std_error,points\n";
    for (const auto& sl : s.slopes) {
      out << sl.group << ',' << format_double(sl.fit.slope) << ',' << format_double(sl.fit.std_error) << ','
          << sl.fit.points << '\n';
    }
  }
  out << "\nerror_rows=" << s.error_rows << '\n';
}

SlopeFit rate_slope(std::span<const TrialRecord> rows) {
  std::map<std::size_t, std::pair<double, std::size_t>> by_m;
  for (const auto& r : rows) {
    auto& [sum, n] = by_m[r.m];
    sum += r.excess_risk;
    ++n;
  }
  if (by_m.size() < 3) throw ValueError("rate_slope needs at least three distinct m values");
  const auto p = static_cast<Eigen::Index>(by_m.size());
  Eigen::MatrixXd a(p, 2);
  Eigen::VectorXd b(p);
  Eigen::Index i = 0;
  for (const auto& [m, acc] : by_m) {
    const double mean = acc.first / static_cast<double>(acc.second);
    if (!(mean > 0.0)) throw ValueError("mean excess risk must be positive for a log-log fit");
    a(i, 0) = 1.0;
    a(i, 1) = std::log(static_cast<double>(m));
    b(i) = std::log(mean);
    ++i;
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd resid = b - a * coef;
  const double sigma2 = resid.squaredNorm() / static_cast<double>(p - 2);
  const Eigen::VectorXd x = a.col(1);
  const double sxx = (x.array() - x.mean()).square().sum();
  return SlopeFit{coef(1), std::sqrt(sigma2 / sxx), static_cast<std::size_t>(p)};
}

std::vector<SlopeSummary> rate_slopes(std::span<const TrialRecord> rows, std::span<const std::string> keys) {
  for (const auto& k : keys) {
    if (k != "N" && k != "k" && k != "adversary" && k != "learner") {
      throw ValueError("unknown group key '" + k + "'");
    }
  }
  std::map<std::string, std::vector<TrialRecord>> groups;
  for (const auto& r : rows) {
    std::string label;
    for (const auto& k : keys) {
      if (!label.empty()) label += ' ';
      if (k == "N") label += "N=" + std::to_string(r.n_sources);
      if (k == "k") label += "k=" + std::to_string(r.k);
      if (k == "adversary") label += r.adversary;
      if (k == "learner") label += r.learner;
    }
    groups[label].push_back(r);
  }
  std::vector<SlopeSummary> out;
  for (const auto& [label, members] : groups) {
    try {
      out.push_back({label, rate_slope(members)});
    } catch (const ValueError&) {
      // Too few sweep points or an exact-zero mean: no fit for this group.
    }
  }
  return out;
}

void write_svg(std::ostream& out, std::span<const TrialRecord> rows) {
  std::map<std::string, std::map<std::size_t, std::pair<double, std::size_t>>> series;
  for (const auto& r : rows) {
    if (r.learner == kErrorLearner) continue;
    auto& [sum, n] = series[r.adversary + " " + r.learner][r.m];
    sum += r.excess_risk;
    ++n;
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  std::map<std::string, std::vector<std::pair<double, double>>> pts;
  for (const auto& [name, by_m] : series) {
    for (const auto& [m, acc] : by_m) {
      const double mean = acc.first / static_cast<double>(acc.second);
      if (!(mean > 0.0)) continue;
      const double x = std::log10(static_cast<double>(m));
      const double y = std::log10(mean);
      pts[name].push_back({x, y});
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  constexpr double w = 640, h = 420, pad = 60;
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto sx = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad); };
  auto sy = [&](double y) { return h - pad - (y - ymin) / (ymax - ymin) * (h - 2 * pad); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">log10 m</text>\n";
  out << "<text x=\"15\" y=\"" << h / 2 << "\" transform=\"rotate(-90 15 " << h / 2
      << ")\" text-anchor=\"middle\">log10 mean excess risk</text>\n";
  std::size_t idx = 0;
  for (const auto& [name, p] : pts) {
    const char* color = colors[idx % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (const auto& [x, y] : p) out << sx(x) << ',' << sy(y) << ' ';
    out << "\"/>\n";
    for (const auto& [x, y] : p) {
      out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    out << "<text x=\"" << w - pad - 150 << "\" y=\"" << pad + 16.0 * static_cast<double>(idx) << "\" fill=\""
        << color << "\" font-size=\"12\">" << name << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Experiment

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto cells = enumerate_cells(cfg);
  const std::size_t total = cells.size() * cfg.trials;
  std::vector<std::vector<TrialRecord>> results(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t t = next++; t < total; t = next++) {
      results[t] = run_trial(cfg, cells[t / cfg.trials], t % cfg.trials);
    }
  };
  const std::size_t n_workers = std::min(cfg.workers, std::max<std::size_t>(total, 1));
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  std::vector<TrialRecord> rows;
  for (auto& r : results) {
    for (auto& rec : r) rows.push_back(std::move(rec));
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::path dir = cfg.output;
  if (const char* env = std::getenv("MSPAC_OUT_DIR"); env && *env) dir = env;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  ExperimentResult res;
  res.rows = run_trials(cfg);
  res.summary = summarize(res.rows, cfg.risk_bar);
  res.csv_path = dir / "trials.csv";
  res.summary_path = dir / "summary.txt";

  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(res.csv_path);
    write_csv(f, res.rows);
    if (!f) throw IoError("write failed for " + res.csv_path.string());
  }
  {
    auto f = open(res.summary_path);
    write_summary(f, res.summary);
  }
  if (cfg.plot) {
    auto f = open(dir / "plot.svg");
    write_svg(f, res.rows);
  }
  return res;
}

}  // namespace mspac
