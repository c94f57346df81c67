#include "luxloop/sweep.hpp"

#include <cstdio>
#include <stdexcept>

#include "luxloop/rng.hpp"

namespace luxloop {

namespace {

std::vector<TrialKey> make_keys(const SweepConfig& cfg,
                                const std::vector<TargetLevel>& targets) {
  std::vector<TrialKey> keys;
  keys.reserve(targets.size() * static_cast<std::size_t>(cfg.trials_per_target));
  for (int ti = 0; ti < static_cast<int>(targets.size()); ++ti) {
    for (int k = 0; k < cfg.trials_per_target; ++k) {
      keys.push_back(TrialKey{targets[ti].label, ti, k,
                              trial_seed(cfg.base.seed, ti, k)});
    }
  }
  return keys;
}

TrialConfig trial_config_for(const SweepConfig& cfg, const TargetLevel& target,
                             const TrialKey& key) {
  TrialConfig t = cfg.base;
  t.target = target;
  t.seed = key.seed;
  return t;
}

SweepResult finish(const SweepConfig& cfg, std::vector<TrialKey> keys,
                   std::vector<EpisodeRecord> records,
                   const std::vector<std::string>& failures) {
  if (!failures.empty())
    throw SweepError("sweep had " + std::to_string(failures.size()) + " failed trials",
                     failures);
  SweepResult result;
  result.summary = summarize(keys, records);
  result.keys = std::move(keys);
  result.records = std::move(records);
  (void)cfg;
  return result;
}

}  // namespace

void SweepConfig::validate() const {
  if (trials_per_target < 1) throw std::invalid_argument("trials_per_target must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  TrialConfig probe = base;
  probe.target = targets.empty() ? target_band("L1") : targets.front();
  probe.validate();
}

std::uint64_t trial_seed(std::uint64_t base, int target_index, int trial_index) {
  const std::uint64_t lane =
      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(target_index)) << 32) |
      static_cast<std::uint64_t>(static_cast<std::uint32_t>(trial_index));
  return derive_seed(base, splitmix64(lane));
}

SweepResult run_sweep_serial(const SweepConfig& cfg) {
  cfg.validate();
  const std::vector<TargetLevel> targets =
      cfg.targets.empty() ? all_target_levels() : cfg.targets;
  std::vector<TrialKey> keys = make_keys(cfg, targets);
  std::vector<EpisodeRecord> records(keys.size());
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    try {
      records[i] = run_trial(trial_config_for(cfg, targets[keys[i].target_index], keys[i]));
    } catch (const std::exception& e) {
      failures.push_back(keys[i].target_label + " trial " +
                         std::to_string(keys[i].trial_index) + ": " + e.what());
    }
  }
  return finish(cfg, std::move(keys), std::move(records), failures);
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::vector<TargetLevel> targets =
      cfg.targets.empty() ? all_target_levels() : cfg.targets;
  std::vector<TrialKey> keys = make_keys(cfg, targets);
  std::vector<EpisodeRecord> records(keys.size());
  std::vector<std::string> errors(keys.size());

  const long n = static_cast<long>(keys.size());
#pragma omp parallel for schedule(dynamic) num_threads(cfg.threads)
  for (long i = 0; i < n; ++i) {
    try {
      records[i] = run_trial(trial_config_for(cfg, targets[keys[i].target_index], keys[i]));
    } catch (const std::exception& e) {
      errors[i] = keys[i].target_label + " trial " +
                  std::to_string(keys[i].trial_index) + ": " + e.what();
    }
  }

  std::vector<std::string> failures;
  for (auto& e : errors)
    if (!e.empty()) failures.push_back(std::move(e));
  return finish(cfg, std::move(keys), std::move(records), failures);
}

SweepSummary summarize(const std::vector<TrialKey>& keys,
                       const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize of empty record list");
  if (keys.size() != records.size())
    throw std::invalid_argument("keys and records length mismatch");

  int num_targets = 0;
  for (const auto& k : keys) num_targets = std::max(num_targets, k.target_index + 1);

  SweepSummary out;
  out.per_target.resize(num_targets);
  std::vector<std::vector<double>> steps_by_target(num_targets);
  std::vector<std::vector<double>> time_by_target(num_targets);
  std::vector<double> steps_all, time_all;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& key = keys[i];
    const auto& rec = records[i];
    TargetSummary& ts = out.per_target[key.target_index];
    ts.label = key.target_label;
    ++ts.trials;
    ++out.total_trials;
    if (rec.converged) {
      ++ts.converged;
      ++out.total_converged;
      const double steps = static_cast<double>(*rec.steps_to_converge);
      steps_by_target[key.target_index].push_back(steps);
      time_by_target[key.target_index].push_back(rec.wall_time_ms);
      steps_all.push_back(steps);
      time_all.push_back(rec.wall_time_ms);
    }
  }

  for (int ti = 0; ti < num_targets; ++ti) {
    if (!steps_by_target[ti].empty()) {
      out.per_target[ti].steps = five_number_summary(steps_by_target[ti]);
      out.per_target[ti].time_ms = five_number_summary(time_by_target[ti]);
    }
  }
  out.convergence_rate =
      static_cast<double>(out.total_converged) / static_cast<double>(out.total_trials);
  if (!steps_all.empty()) {
    out.steps_overall = five_number_summary(steps_all);
    out.time_overall = five_number_summary(time_all);
    out.steps_hist = Histogram::build(steps_all, kStepsHistBin);
    out.time_hist = Histogram::build(time_all, kTimeHistBinMs);
  }
  return out;
}

namespace {

nlohmann::ordered_json fivenum_json(const std::optional<FiveNum>& f) {
  if (!f) return nullptr;
  nlohmann::ordered_json j;
  j["min"] = f->min;
  j["q1"] = f->q1;
  j["median"] = f->median;
  j["q3"] = f->q3;
  j["max"] = f->max;
  return j;
}

nlohmann::ordered_json histogram_json(const Histogram& h) {
  nlohmann::ordered_json j;
  j["bin_width"] = h.bin_width;
  j["origin"] = h.origin;
  j["counts"] = h.counts;
  return j;
}

std::string histogram_csv(const Histogram& h, const char* unit) {
  std::string out = std::string("bin_lo_") + unit + ",bin_hi_" + unit + ",count\n";
  char line[96];
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.6g,%.6g,%ld\n", h.origin + h.bin_width * i,
                  h.origin + h.bin_width * (i + 1), h.counts[i]);
    out += line;
  }
  return out;
}

}  // namespace

nlohmann::ordered_json summary_to_json(const SweepSummary& summary) {
  nlohmann::ordered_json j;
  j["total_trials"] = summary.total_trials;
  j["total_converged"] = summary.total_converged;
  j["convergence_rate"] = summary.convergence_rate;
  j["steps_overall"] = fivenum_json(summary.steps_overall);
  j["steps_histogram"] = histogram_json(summary.steps_hist);
  j["per_target"] = nlohmann::ordered_json::array();
  for (const auto& t : summary.per_target) {
    nlohmann::ordered_json tj;
    tj["target"] = t.label;
    tj["trials"] = t.trials;
    tj["converged"] = t.converged;
    tj["steps"] = fivenum_json(t.steps);
    j["per_target"].push_back(tj);
  }
  return j;
}

nlohmann::ordered_json timing_to_json(const SweepSummary& summary) {
  nlohmann::ordered_json j;
  j["time_ms_overall"] = fivenum_json(summary.time_overall);
  j["time_histogram_ms"] = histogram_json(summary.time_hist);
  j["per_target"] = nlohmann::ordered_json::array();
  for (const auto& t : summary.per_target) {
    nlohmann::ordered_json tj;
    tj["target"] = t.label;
    tj["time_ms"] = fivenum_json(t.time_ms);
    j["per_target"].push_back(tj);
  }
  return j;
}

std::string boxplot_csv(const SweepSummary& summary) {
  std::string out = "target,min,q1,median,q3,max,converged_count\n";
  char line[160];
  for (const auto& t : summary.per_target) {
    if (t.steps) {
      std::snprintf(line, sizeof(line), "%s,%.6g,%.6g,%.6g,%.6g,%.6g,%d\n",
                    t.label.c_str(), t.steps->min, t.steps->q1, t.steps->median,
                    t.steps->q3, t.steps->max, t.converged);
    } else {
      std::snprintf(line, sizeof(line), "%s,,,,,,%d\n", t.label.c_str(), t.converged);
    }
    out += line;
  }
  return out;
}

std::string time_histogram_csv(const SweepSummary& summary) {
  return histogram_csv(summary.time_hist, "ms");
}

std::string steps_histogram_csv(const SweepSummary& summary) {
  return histogram_csv(summary.steps_hist, "steps");
}

}  // namespace luxloop
