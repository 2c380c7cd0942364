#pragma once

// Campaign reporting: a compact comparison table for the terminal and a
// per-trial CSV export for downstream analysis.

#include <cstdio>
#include <sstream>
#include <string>

#include "waypoint/fuzzer/campaign.hpp"

namespace waypoint::fuzzer {

inline std::string format_p(double p) {
  if (p < 0.01) return "<0.01";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", p);
  return buf;
}

inline std::string format_tte(double tte, bool lower_bound) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%.1f", lower_bound ? ">=" : "", tte);
  return buf;
}

inline std::string format_ratio(double ratio, bool lower_bound) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%.2fx", lower_bound ? ">=" : "", ratio);
  return buf;
}

// One row per campaign comparison. `label` names the target/canary.
inline std::string comparison_table(const std::string& label, const CampaignStats& s) {
  bool base_lb = false, treat_lb = false;
  for (const TrialRecord& r : s.baseline) base_lb |= !r.hit;
  for (const TrialRecord& r : s.treatment) treat_lb |= !r.hit;

  std::ostringstream out;
  char row[256];
  std::snprintf(row, sizeof row, "%-24s %14s %14s %10s %8s\n", "target", "origin TTE",
                "treated TTE", "speedup", "p");
  out << row;
  out << std::string(74, '-') << "\n";
  std::snprintf(row, sizeof row, "%-24s %14s %14s %10s %8s\n", label.c_str(),
                format_tte(s.median_baseline, base_lb).c_str(),
                format_tte(s.median_treatment, treat_lb).c_str(),
                format_ratio(s.ratio, s.lower_bound).c_str(), format_p(s.p_value).c_str());
  out << row;
  std::snprintf(row, sizeof row,
                "trials=%zu  hit rate origin=%.0f%%  treated=%.0f%%  (TTE in executions; "
                ">= marks timed-out trials at the budget cap)\n",
                s.baseline.size(), 100 * s.hit_rate_baseline, 100 * s.hit_rate_treatment);
  out << row;
  return out.str();
}

// Per-trial CSV: one line per (arm, trial), stable column order.
inline std::string trials_csv(const CampaignStats& s) {
  std::ostringstream out;
  out << "arm,trial,rng_seed,hit,tte,executions,rejected_runs,corpus_size,"
         "edges_discovered,max_progress\n";
  auto emit = [&](const char* arm, const TrialRecord& r) {
    out << arm << ',' << r.trial << ',' << r.rng_seed << ',' << (r.hit ? 1 : 0) << ','
        << r.tte << ',' << r.executions << ',' << r.rejected_runs << ',' << r.corpus_size
        << ',' << r.edges_discovered << ',' << r.max_progress << '\n';
  };
  for (const TrialRecord& r : s.baseline) emit("origin", r);
  for (const TrialRecord& r : s.treatment) emit("treated", r);
  return out.str();
}

inline ordered_json stats_to_json(const CampaignStats& s) {
  ordered_json j;
  j["mean_tte"] = {{"origin", s.mean_baseline}, {"treated", s.mean_treatment}};
  j["median_tte"] = {{"origin", s.median_baseline}, {"treated", s.median_treatment}};
  j["hit_rate"] = {{"origin", s.hit_rate_baseline}, {"treated", s.hit_rate_treatment}};
  j["ratio"] = s.ratio;
  j["p_value"] = s.p_value;
  j["lower_bound"] = s.lower_bound;
  ordered_json trials = ordered_json::array();
  for (const TrialRecord& r : s.baseline) {
    ordered_json t = trial_to_json(r);
    t["arm"] = "origin";
    trials.push_back(t);
  }
  for (const TrialRecord& r : s.treatment) {
    ordered_json t = trial_to_json(r);
    t["arm"] = "treated";
    trials.push_back(t);
  }
  j["trials"] = trials;
  return j;
}

}  // namespace waypoint::fuzzer
