#include "rtlmut/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "rtlmut/errors.hpp"

namespace rtlmut {

SpreadDistribution spread_from_counts(const std::vector<long>& mutation_counts,
                                      const std::vector<long>& mtr_line_counts) {
  if (mutation_counts.size() != mtr_line_counts.size())
    throw ConfigError("spread needs one line count per mutation count");
  SpreadDistribution dist;
  dist.n_mtrs = static_cast<int>(mutation_counts.size());
  if (dist.n_mtrs == 0) return dist;

  double total = 0.0;
  for (std::size_t i = 0; i < mutation_counts.size(); ++i) {
    if (mtr_line_counts[i] <= 0)
      throw ConfigError("target region " + std::to_string(i) + " has a non-positive line count");
    double density =
        static_cast<double>(mutation_counts[i]) / static_cast<double>(mtr_line_counts[i]);
    dist.relative_density.push_back(density);
    total += density;
  }
  if (total <= 0.0) return dist;  // no mutations anywhere: no data

  dist.has_data = true;
  for (double density : dist.relative_density) dist.p.push_back(density / total);

  if (dist.n_mtrs == 1) {
    dist.entropy_normalized = 1.0;
    return dist;
  }
  double entropy = 0.0;
  for (double p : dist.p)
    if (p > 0.0) entropy -= p * std::log(p);
  dist.entropy_normalized = entropy / std::log(static_cast<double>(dist.n_mtrs));
  return dist;
}

namespace {

std::vector<long> counts_per_mtr(const std::vector<MutationSite>& sites,
                                 const std::vector<MtrRange>& mtrs) {
  std::vector<long> counts(mtrs.size(), 0);
  for (const auto& site : sites) {
    for (std::size_t i = 0; i < mtrs.size(); ++i) {
      if (mtrs[i].module_id == site.module_id && mtrs[i].range.contains(site.line)) {
        ++counts[i];
        break;
      }
    }
  }
  return counts;
}

}  // namespace

SpreadDistribution spread_score(const std::vector<MutationSite>& sites,
                                const std::vector<MtrRange>& mtrs) {
  std::vector<long> lines;
  for (const auto& mtr : mtrs) lines.push_back(mtr.range.length());
  return spread_from_counts(counts_per_mtr(sites, mtrs), lines);
}

std::optional<double> mtr_hit_rate(const std::vector<MutationSite>& sites,
                                   const std::vector<MtrRange>& mtrs) {
  if (sites.empty()) return std::nullopt;
  long inside = 0;
  for (const auto& site : sites)
    for (const auto& mtr : mtrs)
      if (mtr.module_id == site.module_id && mtr.range.contains(site.line)) {
        ++inside;
        break;
      }
  return 100.0 * static_cast<double>(inside) / static_cast<double>(sites.size());
}

std::optional<double> functional_accuracy(const std::vector<BugScenarioRecord>& scenarios,
                                          int within_retries) {
  if (scenarios.empty()) return std::nullopt;
  long hits = 0;
  for (const auto& s : scenarios)
    if (s.final_outcome == Outcome::Success && s.attempt_number <= within_retries + 1) ++hits;
  return static_cast<double>(hits) / static_cast<double>(scenarios.size());
}

std::optional<double> syntactic_accuracy_from_counts(long detected, long syntax_failure,
                                                     long undetected) {
  long total = detected + syntax_failure + undetected;
  if (total == 0) return std::nullopt;
  return static_cast<double>(detected + undetected) / static_cast<double>(total);
}

std::optional<double> syntactic_accuracy(const std::vector<MutationEntry>& entries) {
  long detected = 0, syntax_failure = 0, undetected = 0;
  for (const auto& e : entries) {
    if (e.attempt_number != 1) continue;
    switch (e.outcome) {
      case Outcome::Success:
        ++detected;
        break;
      case Outcome::SyntaxFailure:
        ++syntax_failure;
        break;
      case Outcome::Undetected:
        ++undetected;
        break;
      case Outcome::Pending:
        break;
    }
  }
  return syntactic_accuracy_from_counts(detected, syntax_failure, undetected);
}

double throughput_bugs_per_hour(long success_count, double wall_seconds) {
  if (wall_seconds <= 0.0) return 0.0;
  return static_cast<double>(success_count) * 3600.0 / wall_seconds;
}

std::vector<std::pair<int, double>> accuracy_evolution(std::vector<MutationEntry> entries,
                                                       int window) {
  if (window < 1) throw ConfigError("evolution window must be at least 1");
  entries.erase(std::remove_if(entries.begin(), entries.end(),
                               [](const MutationEntry& e) {
                                 return e.attempt_number != 1 || e.outcome == Outcome::Pending;
                               }),
                entries.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const MutationEntry& a, const MutationEntry& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     return a.entry_id < b.entry_id;
                   });

  std::vector<std::pair<int, double>> points;
  if (entries.empty()) return points;

  auto success_in = [&entries](std::size_t begin, std::size_t end) {
    long hits = 0;
    for (std::size_t i = begin; i < end; ++i)
      if (entries[i].outcome == Outcome::Success) ++hits;
    return static_cast<double>(hits) / static_cast<double>(end - begin);
  };

  std::size_t n = entries.size();
  std::size_t w = static_cast<std::size_t>(window);
  if (n < w) {
    points.emplace_back(static_cast<int>(n), success_in(0, n));
    return points;
  }
  for (std::size_t end = w; end <= n; ++end)
    points.emplace_back(static_cast<int>(end), success_in(end - w, end));
  return points;
}

CampaignReport build_report(const std::vector<MutationEntry>& entries,
                            const std::vector<BugScenarioRecord>& scenarios,
                            const std::map<std::string, std::vector<MtrRange>>& mtrs_by_design,
                            int max_retries, int evolution_window,
                            double campaign_wall_seconds) {
  CampaignReport report;
  report.max_retries = max_retries;
  report.evolution_window = evolution_window;
  report.campaign_wall_seconds = campaign_wall_seconds;

  std::map<std::string, std::vector<MutationEntry>> entries_by_design;
  for (const auto& e : entries) entries_by_design[e.design_id].push_back(e);
  std::map<std::string, std::vector<BugScenarioRecord>> scenarios_by_design;
  for (const auto& s : scenarios) scenarios_by_design[s.design_id].push_back(s);

  std::set<std::string> design_ids;
  for (const auto& [id, _] : entries_by_design) design_ids.insert(id);
  for (const auto& [id, _] : scenarios_by_design) design_ids.insert(id);

  long mtr_inside_total = 0;
  long mtr_sites_total = 0;
  bool any_mtrs = false;

  for (const auto& design_id : design_ids) {
    DesignMetrics metrics;
    const auto& design_entries = entries_by_design[design_id];
    const auto& design_scenarios = scenarios_by_design[design_id];

    for (const auto& e : design_entries) {
      metrics.all_entries.add(e.outcome);
      if (e.attempt_number == 1) metrics.first_attempt.add(e.outcome);
    }
    metrics.scenarios_total = static_cast<long>(design_scenarios.size());
    for (const auto& s : design_scenarios) {
      if (s.final_outcome == Outcome::Success) ++metrics.scenarios_success;
      metrics.duplicates_regenerated += s.duplicates_regenerated;
      metrics.wall_seconds += s.generation_seconds + s.validation_seconds;
    }
    metrics.functional_accuracy = functional_accuracy(design_scenarios, max_retries);
    metrics.first_attempt_scenario_accuracy = functional_accuracy(design_scenarios, 0);
    metrics.syntactic_accuracy = syntactic_accuracy(design_entries);
    if (metrics.wall_seconds > 0.0)
      metrics.bugs_per_hour = throughput_bugs_per_hour(metrics.scenarios_success,
                                                       metrics.wall_seconds);

    auto mtrs_it = mtrs_by_design.find(design_id);
    if (mtrs_it != mtrs_by_design.end() && !mtrs_it->second.empty()) {
      any_mtrs = true;
      std::vector<MutationSite> sites;
      for (const auto& e : design_entries)
        sites.push_back({e.module_id, e.target_block.start_line});
      metrics.spread = spread_score(sites, mtrs_it->second);
      metrics.mtr_hit_rate = mtr_hit_rate(sites, mtrs_it->second);
      if (metrics.mtr_hit_rate) {
        long inside = 0;
        for (const auto& site : sites)
          for (const auto& mtr : mtrs_it->second)
            if (mtr.module_id == site.module_id && mtr.range.contains(site.line)) {
              ++inside;
              break;
            }
        mtr_inside_total += inside;
        mtr_sites_total += static_cast<long>(sites.size());
      }
    }
    report.designs.emplace(design_id, std::move(metrics));
  }

  DesignMetrics& totals = report.totals;
  for (const auto& e : entries) {
    totals.all_entries.add(e.outcome);
    if (e.attempt_number == 1) totals.first_attempt.add(e.outcome);
  }
  totals.scenarios_total = static_cast<long>(scenarios.size());
  for (const auto& s : scenarios) {
    if (s.final_outcome == Outcome::Success) ++totals.scenarios_success;
    totals.duplicates_regenerated += s.duplicates_regenerated;
    totals.wall_seconds += s.generation_seconds + s.validation_seconds;
  }
  totals.functional_accuracy = functional_accuracy(scenarios, max_retries);
  totals.first_attempt_scenario_accuracy = functional_accuracy(scenarios, 0);
  totals.syntactic_accuracy = syntactic_accuracy(entries);
  if (totals.wall_seconds > 0.0)
    totals.bugs_per_hour = throughput_bugs_per_hour(totals.scenarios_success, totals.wall_seconds);
  if (any_mtrs && mtr_sites_total > 0)
    totals.mtr_hit_rate =
        100.0 * static_cast<double>(mtr_inside_total) / static_cast<double>(mtr_sites_total);

  if (campaign_wall_seconds > 0.0)
    report.parallel_bugs_per_hour =
        throughput_bugs_per_hour(totals.scenarios_success, campaign_wall_seconds);

  report.evolution = accuracy_evolution(entries, evolution_window);
  return report;
}

namespace {

std::string pct(const std::optional<double>& fraction) {
  if (!fraction) return "no data";
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << (*fraction * 100.0) << "%";
  return out.str();
}

std::string pct_direct(const std::optional<double>& percent) {
  if (!percent) return "no data";
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << *percent << "%";
  return out.str();
}

std::string fixed2(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value;
  return out.str();
}

void render_metrics(std::ostream& out, const DesignMetrics& m, int max_retries) {
  auto outcome_row = [&out](const char* label, const OutcomeCounts& c) {
    out << "  " << label << ": " << c.detected << " detected | " << c.syntax_failure
        << " syntax failure | " << c.undetected << " undetected";
    if (c.pending > 0) out << " | " << c.pending << " pending";
    out << " (" << c.total() << " total)\n";
  };
  outcome_row("mutations, first attempt", m.first_attempt);
  outcome_row("mutations, all attempts ", m.all_entries);
  out << "  scenarios: " << m.scenarios_total << " total, " << m.scenarios_success
      << " successful, " << (m.scenarios_total - m.scenarios_success) << " not successful\n";
  out << "  functional accuracy within " << max_retries
      << " retries: " << pct(m.functional_accuracy)
      << " | first attempt: " << pct(m.first_attempt_scenario_accuracy) << "\n";
  out << "  syntactic accuracy, first attempt: " << pct(m.syntactic_accuracy) << "\n";
  out << "  duplicates regenerated: " << m.duplicates_regenerated << "\n";
  if (m.bugs_per_hour)
    out << "  throughput: " << fixed2(*m.bugs_per_hour) << " bugs/hour over "
        << fixed2(m.wall_seconds / 60.0) << " minutes of pipeline time\n";
  if (m.spread) {
    if (m.spread->has_data)
      out << "  spread score: " << std::fixed << std::setprecision(3)
          << m.spread->entropy_normalized << " over " << m.spread->n_mtrs
          << " target regions\n";
    else
      out << "  spread score: no data (" << m.spread->n_mtrs << " target regions, no mutations)\n";
  }
  if (m.mtr_hit_rate) out << "  target-region hit rate: " << pct_direct(m.mtr_hit_rate) << "\n";
}

}  // namespace

std::string render_report_text(const CampaignReport& report) {
  std::ostringstream out;
  out << "mutation campaign report\n";
  out << "========================\n";
  for (const auto& [design_id, metrics] : report.designs) {
    out << "\ndesign " << design_id << "\n";
    render_metrics(out, metrics, report.max_retries);
  }
  out << "\ncampaign totals\n";
  render_metrics(out, report.totals, report.max_retries);
  if (report.campaign_wall_seconds > 0.0) {
    out << "  campaign wall time: " << fixed2(report.campaign_wall_seconds / 60.0) << " minutes\n";
    if (report.parallel_bugs_per_hour)
      out << "  campaign throughput: " << fixed2(*report.parallel_bugs_per_hour) << " bugs/hour\n";
  }
  if (!report.evolution.empty()) {
    out << "  accuracy evolution (window " << report.evolution_window << "):";
    for (const auto& [pos, value] : report.evolution)
      out << " " << std::fixed << std::setprecision(2) << value;
    out << "\n";
  }
  if (!report.worker_failures.empty()) {
    out << "  worker failures:\n";
    for (const auto& failure : report.worker_failures) out << "    " << failure << "\n";
  }
  return out.str();
}

namespace {

nlohmann::json metrics_to_json(const DesignMetrics& m) {
  auto counts = [](const OutcomeCounts& c) {
    return nlohmann::json{{"detected", c.detected},
                          {"syntax_failure", c.syntax_failure},
                          {"undetected", c.undetected},
                          {"pending", c.pending},
                          {"total", c.total()}};
  };
  nlohmann::json doc;
  doc["mutations_first_attempt"] = counts(m.first_attempt);
  doc["mutations_all_attempts"] = counts(m.all_entries);
  doc["scenarios_total"] = m.scenarios_total;
  doc["scenarios_success"] = m.scenarios_success;
  doc["duplicates_regenerated"] = m.duplicates_regenerated;
  doc["functional_accuracy"] =
      m.functional_accuracy ? nlohmann::json(*m.functional_accuracy) : nlohmann::json();
  doc["first_attempt_scenario_accuracy"] = m.first_attempt_scenario_accuracy
                                               ? nlohmann::json(*m.first_attempt_scenario_accuracy)
                                               : nlohmann::json();
  doc["syntactic_accuracy"] =
      m.syntactic_accuracy ? nlohmann::json(*m.syntactic_accuracy) : nlohmann::json();
  doc["wall_seconds"] = m.wall_seconds;
  doc["bugs_per_hour"] = m.bugs_per_hour ? nlohmann::json(*m.bugs_per_hour) : nlohmann::json();
  if (m.spread) {
    doc["spread"] = {{"n_mtrs", m.spread->n_mtrs},
                     {"relative_density", m.spread->relative_density},
                     {"p", m.spread->p},
                     {"entropy_normalized", m.spread->entropy_normalized},
                     {"has_data", m.spread->has_data}};
  }
  doc["mtr_hit_rate"] = m.mtr_hit_rate ? nlohmann::json(*m.mtr_hit_rate) : nlohmann::json();
  return doc;
}

}  // namespace

nlohmann::json report_to_json(const CampaignReport& report) {
  nlohmann::json doc;
  doc["designs"] = nlohmann::json::object();
  for (const auto& [design_id, metrics] : report.designs)
    doc["designs"][design_id] = metrics_to_json(metrics);
  doc["totals"] = metrics_to_json(report.totals);
  doc["campaign_wall_seconds"] = report.campaign_wall_seconds;
  doc["parallel_bugs_per_hour"] =
      report.parallel_bugs_per_hour ? nlohmann::json(*report.parallel_bugs_per_hour)
                                    : nlohmann::json();
  doc["evolution_window"] = report.evolution_window;
  doc["max_retries"] = report.max_retries;
  nlohmann::json evolution = nlohmann::json::array();
  for (const auto& [pos, value] : report.evolution)
    evolution.push_back({{"position", pos}, {"accuracy", value}});
  doc["evolution"] = evolution;
  doc["worker_failures"] = report.worker_failures;
  return doc;
}

std::string evolution_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "position,accuracy\n";
  for (const auto& [pos, value] : report.evolution) out << pos << "," << value << "\n";
  return out.str();
}

}  // namespace rtlmut
