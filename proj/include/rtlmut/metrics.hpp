#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtlmut/cache.hpp"

namespace rtlmut {

struct LineRange {
  int start_line = 0;
  int end_line = 0;
  std::string label;

  int length() const { return end_line - start_line + 1; }
  bool contains(int line) const { return line >= start_line && line <= end_line; }
};

// A mutation's location for spread/MTR accounting.
struct MutationSite {
  std::string module_id;
  int line = 0;
};

// An engineer-tagged mutation target region used for metric evaluation.
struct MtrRange {
  std::string module_id;
  LineRange range;
};

// Density-normalized distribution of mutations over MTRs and its normalized
// entropy in [0, 1]: 0 is complete concentration in one MTR, 1 a perfectly
// uniform spread.
struct SpreadDistribution {
  int n_mtrs = 0;
  std::vector<double> relative_density;
  std::vector<double> p;
  double entropy_normalized = 0.0;
  // False when every density is zero (no mutations): reported as no-data.
  bool has_data = false;
};

// Core computation from per-MTR mutation counts and line counts.
SpreadDistribution spread_from_counts(const std::vector<long>& mutation_counts,
                                      const std::vector<long>& mtr_line_counts);

SpreadDistribution spread_score(const std::vector<MutationSite>& sites,
                                const std::vector<MtrRange>& mtrs);

// Percent of mutations inside any MTR; no-data with zero mutations.
std::optional<double> mtr_hit_rate(const std::vector<MutationSite>& sites,
                                   const std::vector<MtrRange>& mtrs);

// Fraction of scenarios reaching Success within <= within_retries retries
// (attempt_number <= within_retries + 1). 0 gives first-attempt accuracy.
std::optional<double> functional_accuracy(const std::vector<BugScenarioRecord>& scenarios,
                                          int within_retries);

// (Detected + Undetected) / total over first-attempt mutation outcome counts.
std::optional<double> syntactic_accuracy_from_counts(long detected, long syntax_failure,
                                                     long undetected);

// Same, filtering `entries` to first-attempt mutations.
std::optional<double> syntactic_accuracy(const std::vector<MutationEntry>& entries);

double throughput_bugs_per_hour(long success_count, double wall_seconds);

// Sliding-window success fraction over first-attempt entries in global
// timestamp order. Points are (1-based end position, windowed fraction); a
// window larger than the stream yields a single aggregate point.
std::vector<std::pair<int, double>> accuracy_evolution(std::vector<MutationEntry> entries,
                                                       int window);

struct DesignMetrics {
  OutcomeCounts first_attempt;  // Table-style first-attempt outcome counts
  OutcomeCounts all_entries;
  long scenarios_total = 0;
  long scenarios_success = 0;
  long duplicates_regenerated = 0;
  std::optional<double> functional_accuracy;          // within configured retries
  std::optional<double> first_attempt_scenario_accuracy;
  std::optional<double> syntactic_accuracy;
  double wall_seconds = 0.0;  // summed generation + validation time
  std::optional<double> bugs_per_hour;
  std::optional<SpreadDistribution> spread;
  std::optional<double> mtr_hit_rate;
};

struct CampaignReport {
  std::map<std::string, DesignMetrics> designs;
  DesignMetrics totals;
  double campaign_wall_seconds = 0.0;
  std::optional<double> parallel_bugs_per_hour;
  int evolution_window = 25;
  std::vector<std::pair<int, double>> evolution;
  int max_retries = 2;
  std::vector<std::string> worker_failures;
};

// Assembles every metric from cache entries, scenario records, and the
// engineer-tagged MTRs (per design). `campaign_wall_seconds` <= 0 means
// wall time is unknown (report recomputed offline) and throughput rows that
// need it are omitted.
CampaignReport build_report(const std::vector<MutationEntry>& entries,
                            const std::vector<BugScenarioRecord>& scenarios,
                            const std::map<std::string, std::vector<MtrRange>>& mtrs_by_design,
                            int max_retries, int evolution_window,
                            double campaign_wall_seconds);

std::string render_report_text(const CampaignReport& report);
nlohmann::json report_to_json(const CampaignReport& report);
std::string evolution_csv(const CampaignReport& report);

}  // namespace rtlmut
