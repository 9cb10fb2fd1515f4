#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "skyaug/pls.hpp"
#include "skyaug/pseudolabel.hpp"

namespace skyaug {

struct PlsConfig {
  std::size_t n_comp = 8;
  R2Mode r2_mode = R2Mode::pooled;
  PlsOptions options;
};

enum class FilterMode {
  independent, ///< every candidate against the fixed base training set
  sequential,  ///< accepted candidates join the training set and raise the baseline
};

std::string to_string(FilterMode mode);
FilterMode parse_filter_mode(const std::string& s);
std::string to_string(Verdict v);

struct FilterDecision {
  std::size_t candidate_id = 0;
  double r2_val_with = 0.0;
  double baseline = 0.0; ///< the reference the candidate was compared against
  Verdict verdict = Verdict::unset;
};

struct FilterReport {
  FilterMode mode = FilterMode::independent;
  double baseline_r2_val = 0.0;
  std::vector<FilterDecision> decisions; ///< input order
  std::size_t accepted_count = 0;
};

/// Fit on train at cfg.n_comp, score on val.
/// True when `d` already holds a sample whose pixels and labels equal row 0
/// of `sample`.
bool contains_sample(const Dataset& d, const Dataset& sample);
/// Set union: rows of `b` not already present are appended in order.
Dataset union_samples(const Dataset& a, const Dataset& b);

double baseline(const Dataset& train, const Dataset& val, const PlsConfig& cfg);

/// Refit on train + {candidate}; favorable iff r2_val_with >= reference.
FilterDecision evaluate_candidate(const Dataset& train, const Dataset& val, const Candidate& c,
                                  const PlsConfig& cfg, double reference);

struct FilterResult {
  FilterReport report;
  Dataset augmented_train;
  std::vector<std::size_t> accepted_ids;
};

/// Applies the favorable-candidate rule to each candidate. The returned
/// candidates carry their verdicts when `candidates` is non-const.
FilterResult filter_candidates(const Dataset& train, const Dataset& val,
                               std::vector<Candidate>& candidates, const PlsConfig& cfg,
                               FilterMode mode = FilterMode::independent);

/// Columns candidate_id, r2_val_with, verdict, baseline_r2_val, mode.
void write_filter_csv(const FilterReport& report, const std::filesystem::path& path);

} // namespace skyaug
