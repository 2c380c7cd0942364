#pragma once

// Greybox fuzzing loop and paired campaigns. A trial is a classic
// mutate/run/keep loop: seeds are drawn proportionally to energy, an input
// is admitted when it discovers coverage edges or raises the best predicate
// progress seen, and the trial ends at canary exposure or at the execution
// budget. Campaigns pair baseline and treatment trials on shared rng seeds
// and report TTE statistics with a Mann-Whitney p-value.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "waypoint/fuzzer/distance.hpp"
#include "waypoint/fuzzer/mutate.hpp"
#include "waypoint/fuzzer/mwu.hpp"
#include "waypoint/minilang/errors.hpp"
#include "waypoint/minilang/program.hpp"
#include "waypoint/runtime/interp.hpp"
#include "waypoint/util.hpp"

namespace waypoint::fuzzer {

namespace ml = waypoint::minilang;
using ordered_json = nlohmann::ordered_json;

enum class Scheduler { Coverage, Distance, DistancePredicate };

inline const char* scheduler_name(Scheduler s) {
  switch (s) {
    case Scheduler::Coverage: return "coverage";
    case Scheduler::Distance: return "distance";
    case Scheduler::DistancePredicate: return "distance+predicate";
  }
  return "?";
}

inline std::optional<Scheduler> scheduler_from_name(const std::string& name) {
  if (name == "coverage") return Scheduler::Coverage;
  if (name == "distance") return Scheduler::Distance;
  if (name == "distance+predicate") return Scheduler::DistancePredicate;
  return std::nullopt;
}

struct EnergyParams {
  double base = 1.0;
  double novelty_bonus = 2.0;
  double tau = 10.0;  // distance decay, in blocks
};

// Runs that never touch a target-reaching block score as if this far away.
inline constexpr double kMissingDistance = 100.0;

struct Seed {
  std::vector<uint8_t> input;
  uint64_t coverage_hash = 0;
  std::optional<double> distance;
  int predicate_progress = 0;
  bool novel = false;  // discovered new edges when admitted
  double energy = 1.0;
};

inline double seed_energy(const Seed& s, Scheduler sched, const EnergyParams& ep) {
  double e = ep.base;
  if (s.novel) e *= ep.novelty_bonus;
  if (sched == Scheduler::Distance || sched == Scheduler::DistancePredicate)
    e *= std::exp(-(s.distance ? *s.distance : kMissingDistance) / ep.tau);
  if (sched == Scheduler::DistancePredicate) e *= 1.0 + s.predicate_progress;
  return e;
}

// Roulette selection proportional to energy; invariant under scaling all
// energies by a positive constant. Ties cannot arise (intervals are
// half-open), and insertion order fixes the walk order.
inline size_t pick_seed(const std::vector<double>& energies, Rng& rng) {
  double total = 0;
  for (double e : energies) total += e;
  double r = rng.unit() * total;
  double acc = 0;
  for (size_t i = 0; i < energies.size(); ++i) {
    acc += energies[i];
    if (r < acc) return i;
  }
  return energies.size() - 1;
}

struct CampaignConfig {
  const ml::Program* program = nullptr;
  std::string canary_id;         // report label; must agree across a pairing
  std::string canary_function;   // resolves the active canary site
  ml::StmtPath canary_path;
  Scheduler scheduler = Scheduler::Coverage;
  int trials = 10;
  int64_t budget_execs = 50'000;
  uint64_t rng_seed = 1;         // trial i runs on rng_seed + i
  size_t max_input_len = 64;
  std::vector<std::vector<uint8_t>> seeds;
  uint64_t step_budget = 1'000'000;
  EnergyParams energy;
  int workers = 1;
  // Test hook: observes every rejected input (admissibility checks).
  std::function<void(const std::vector<uint8_t>&)> on_reject;
};

struct TrialRecord {
  int trial = 0;
  uint64_t rng_seed = 0;
  bool hit = false;
  int64_t tte = 0;  // executions to exposure; the budget cap when !hit
  int64_t executions = 0;
  int64_t rejected_runs = 0;
  size_t corpus_size = 0;
  size_t edges_discovered = 0;
  int max_progress = 0;
  double wall_ms = 0;  // informative only; excluded from the record json
};

inline ordered_json trial_to_json(const TrialRecord& t) {
  return ordered_json{{"trial", t.trial},
                      {"rng_seed", t.rng_seed},
                      {"hit", t.hit},
                      {"tte", t.tte},
                      {"executions", t.executions},
                      {"rejected_runs", t.rejected_runs},
                      {"corpus_size", t.corpus_size},
                      {"edges_discovered", t.edges_discovered},
                      {"max_progress", t.max_progress}};
}

namespace detail {

inline const ml::Stmt* resolve_canary(const CampaignConfig& cfg) {
  for (const ml::CanarySite& cs : cfg.program->canary_sites)
    if (cs.function == cfg.canary_function && cs.path == cfg.canary_path) return cs.stmt;
  throw ConfigError("campaign canary '" + cfg.canary_id + "' not found at " +
                    cfg.canary_function + ":" + ml::path_to_string(cfg.canary_path));
}

}  // namespace detail

inline TrialRecord fuzz_trial(const CampaignConfig& cfg, int trial) {
  if (cfg.program == nullptr) throw ConfigError("campaign has no program");
  if (cfg.budget_execs <= 0) throw ConfigError("campaign budget must be positive");
  const ml::Stmt* canary = detail::resolve_canary(cfg);

  bool wants_distance = cfg.scheduler != Scheduler::Coverage;
  std::map<uint64_t, double> key_dist;
  if (wants_distance) {
    ml::ResolvedPoint rp = ml::resolve_point(
        const_cast<ml::Program&>(*cfg.program),
        ml::ProgramPoint{cfg.canary_function, cfg.canary_path, ml::Position::Before});
    std::set<BlockRef> targets{{cfg.canary_function, rp.stmt->block}};
    key_dist = distance_by_key(*cfg.program, block_distance(*cfg.program, targets));
  }

  double t0 = now_ms();
  Rng rng(cfg.rng_seed + static_cast<uint64_t>(trial));
  runtime::Interp interp(*cfg.program);
  runtime::RunOptions opt;
  opt.step_budget = cfg.step_budget;
  opt.active_canary = canary;

  TrialRecord rec;
  rec.trial = trial;
  rec.rng_seed = cfg.rng_seed + static_cast<uint64_t>(trial);

  std::vector<Seed> corpus;
  std::vector<double> energies;
  std::set<uint16_t> seen_edges;
  int max_progress = 0;

  auto admit = [&](const std::vector<uint8_t>& input, const runtime::RunResult& r,
                   bool novel) {
    Seed s;
    s.input = input;
    uint64_t h = 1469598103934665603ull;
    for (uint16_t e : r.edges) h = (h ^ e) * 1099511628211ull;
    s.coverage_hash = h;
    if (wants_distance) s.distance = run_distance(r.block_keys, key_dist);
    s.predicate_progress = static_cast<int>(r.guards_passed.size());
    s.novel = novel;
    s.energy = seed_energy(s, cfg.scheduler, cfg.energy);
    corpus.push_back(std::move(s));
    energies.push_back(corpus.back().energy);
  };

  auto step = [&](const std::vector<uint8_t>& input, bool force_admit) -> bool {
    runtime::RunResult r = interp.run(input, opt);
    ++rec.executions;
    if (r.verdict == runtime::VerdictKind::CanaryHit) {
      rec.hit = true;
      rec.tte = rec.executions;
      return true;
    }
    if (r.verdict == runtime::VerdictKind::Rejected) {
      ++rec.rejected_runs;
      if (cfg.on_reject) cfg.on_reject(input);
      return false;  // never admitted
    }
    if (r.verdict != runtime::VerdictKind::Completed && !force_admit) return false;
    size_t before = seen_edges.size();
    seen_edges.insert(r.edges.begin(), r.edges.end());
    bool novel = seen_edges.size() > before;
    int progress = static_cast<int>(r.guards_passed.size());
    if (force_admit || novel || progress > max_progress) {
      admit(input, r, novel || force_admit);
      if (progress > max_progress) max_progress = progress;
    }
    return false;
  };

  // Initial corpus: always admitted (mutation needs donors), except inputs
  // the instrumented program rejects outright.
  std::vector<std::vector<uint8_t>> initial = cfg.seeds;
  if (initial.empty()) initial.push_back({});
  bool done = false;
  for (const auto& s : initial) {
    if (rec.executions >= cfg.budget_execs) break;
    if (step(s, true)) {
      done = true;
      break;
    }
  }
  if (corpus.empty() && !done) {
    // Every seed was rejected; fall back to the empty input as raw material
    // without executing it again.
    Seed s;
    s.energy = seed_energy(s, cfg.scheduler, cfg.energy);
    corpus.push_back(std::move(s));
    energies.push_back(corpus.back().energy);
  }

  while (!done && rec.executions < cfg.budget_execs) {
    const Seed& parent = corpus[pick_seed(energies, rng)];
    const Seed& donor = corpus[rng.below(corpus.size())];
    std::vector<uint8_t> child = mutate(parent.input, donor.input, rng, cfg.max_input_len);
    done = step(child, false);
  }

  if (!rec.hit) rec.tte = cfg.budget_execs;  // lower-bound convention
  rec.corpus_size = corpus.size();
  rec.edges_discovered = seen_edges.size();
  rec.max_progress = max_progress;
  rec.wall_ms = now_ms() - t0;
  return rec;
}

struct CampaignStats {
  std::vector<TrialRecord> baseline;
  std::vector<TrialRecord> treatment;
  double mean_baseline = 0, mean_treatment = 0;
  double median_baseline = 0, median_treatment = 0;
  double hit_rate_baseline = 0, hit_rate_treatment = 0;
  double ratio = 1.0;  // baseline mean TTE / treatment mean TTE
  double p_value = 1.0;
  bool lower_bound = false;  // some trial timed out; ratio uses the cap
  double wall_ms = 0;
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0 : s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace detail

inline CampaignStats run_campaign(const CampaignConfig& baseline,
                                  const CampaignConfig& treatment) {
  if (baseline.trials != treatment.trials)
    throw ConfigError("paired campaigns need matching trial counts");
  if (baseline.trials < 1) throw ConfigError("campaigns need at least one trial");
  if (baseline.canary_id != treatment.canary_id)
    throw ConfigError("paired campaigns target different canaries: '" + baseline.canary_id +
                      "' vs '" + treatment.canary_id + "'");

  double t0 = now_ms();
  int n = baseline.trials;
  CampaignStats stats;
  stats.baseline.resize(static_cast<size_t>(n));
  stats.treatment.resize(static_cast<size_t>(n));

  // Shared rng seeds pair the arms; the baseline config's seed is canonical.
  CampaignConfig treat = treatment;
  treat.rng_seed = baseline.rng_seed;

  int workers = std::max(1, std::min(baseline.workers, n));
  std::atomic<int> next{0};
  auto work = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      stats.baseline[static_cast<size_t>(i)] = fuzz_trial(baseline, i);
      stats.treatment[static_cast<size_t>(i)] = fuzz_trial(treat, i);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::vector<double> tte_b, tte_t;
  int hits_b = 0, hits_t = 0;
  for (const TrialRecord& r : stats.baseline) {
    tte_b.push_back(static_cast<double>(r.tte));
    hits_b += r.hit ? 1 : 0;
    stats.lower_bound |= !r.hit;
  }
  for (const TrialRecord& r : stats.treatment) {
    tte_t.push_back(static_cast<double>(r.tte));
    hits_t += r.hit ? 1 : 0;
    stats.lower_bound |= !r.hit;
  }
  stats.mean_baseline = detail::mean_of(tte_b);
  stats.mean_treatment = detail::mean_of(tte_t);
  stats.median_baseline = detail::median_of(tte_b);
  stats.median_treatment = detail::median_of(tte_t);
  stats.hit_rate_baseline = static_cast<double>(hits_b) / n;
  stats.hit_rate_treatment = static_cast<double>(hits_t) / n;
  stats.ratio = stats.mean_treatment > 0 ? stats.mean_baseline / stats.mean_treatment : 0;
  stats.p_value = mann_whitney_u(tte_b, tte_t).p;
  stats.wall_ms = now_ms() - t0;
  return stats;
}

}  // namespace waypoint::fuzzer
