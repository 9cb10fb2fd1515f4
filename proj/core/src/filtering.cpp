#include "skyaug/filtering.hpp"

#include <fstream>

#include "skyaug/error.hpp"
#include "skyaug/format.hpp"

namespace skyaug {

std::string to_string(FilterMode mode) {
  return mode == FilterMode::independent ? "independent" : "sequential";
}

FilterMode parse_filter_mode(const std::string& s) {
  if (s == "independent")
    return FilterMode::independent;
  if (s == "sequential")
    return FilterMode::sequential;
  throw UsageError("unknown filter mode '" + s + "' (expected independent or sequential)");
}

std::string to_string(Verdict v) {
  switch (v) {
  case Verdict::favorable:
    return "favorable";
  case Verdict::unfavorable:
    return "unfavorable";
  case Verdict::unset:
    break;
  }
  return "unset";
}

namespace {

void require_nonempty(const Dataset& train, const Dataset& val) {
  if (train.rows() == 0)
    throw DataError("filtering needs a nonempty training set");
  if (val.rows() == 0)
    throw DataError("filtering needs a nonempty validation set");
}

Dataset candidate_row(const Candidate& c, Eigen::Index features) {
  if (!c.image.same_shape(c.map))
    throw DataError("candidate image and map dimensions differ");
  if (static_cast<Eigen::Index>(c.image.size()) != features)
    throw DataError("candidate has " + std::to_string(c.image.size()) +
                    " pixels, training data has " + std::to_string(features));
  return make_dataset({LabeledImage{c.image, c.map}});
}

double fit_and_score(const Dataset& train, const Dataset& val, const PlsConfig& cfg) {
  const auto model = fit_pls2(train.X, train.Y, cfg.n_comp, cfg.options);
  return r2_score(val.Y, predict(model, val.X), cfg.r2_mode);
}

} // namespace

bool contains_sample(const Dataset& d, const Dataset& sample) {
  if (sample.rows() == 0 || d.X.cols() != sample.X.cols() || d.Y.cols() != sample.Y.cols())
    return false;
  for (Eigen::Index r = 0; r < d.X.rows(); ++r)
    if (d.X.row(r) == sample.X.row(0) && d.Y.row(r) == sample.Y.row(0))
      return true;
  return false;
}

Dataset union_samples(const Dataset& a, const Dataset& b) {
  Dataset out = a;
  for (Eigen::Index r = 0; r < b.X.rows(); ++r) {
    Dataset row{b.X.row(r), b.Y.row(r)};
    if (!contains_sample(out, row))
      out = concat(out, row);
  }
  return out;
}

double baseline(const Dataset& train, const Dataset& val, const PlsConfig& cfg) {
  require_nonempty(train, val);
  return fit_and_score(train, val, cfg);
}

FilterDecision evaluate_candidate(const Dataset& train, const Dataset& val, const Candidate& c,
                                  const PlsConfig& cfg, double reference) {
  require_nonempty(train, val);
  // train ∪ {c} is a set union: a sample already in train adds nothing.
  const Dataset with = union_samples(train, candidate_row(c, train.X.cols()));
  FilterDecision d;
  d.candidate_id = c.provenance.index;
  d.baseline = reference;
  d.r2_val_with = fit_and_score(with, val, cfg);
  // Only a strict decrease marks a candidate unfavorable.
  d.verdict = d.r2_val_with < reference ? Verdict::unfavorable : Verdict::favorable;
  return d;
}

FilterResult filter_candidates(const Dataset& train, const Dataset& val,
                               std::vector<Candidate>& candidates, const PlsConfig& cfg,
                               FilterMode mode) {
  require_nonempty(train, val);
  FilterResult res;
  res.report.mode = mode;
  res.report.baseline_r2_val = baseline(train, val, cfg);
  res.augmented_train = train;

  double reference = res.report.baseline_r2_val;
  for (auto& c : candidates) {
    const Dataset& base = mode == FilterMode::sequential ? res.augmented_train : train;
    auto d = evaluate_candidate(base, val, c, cfg, reference);
    c.verdict = d.verdict;
    c.r2_val_with = d.r2_val_with;
    res.report.decisions.push_back(d);
    if (d.verdict == Verdict::favorable) {
      ++res.report.accepted_count;
      res.accepted_ids.push_back(c.provenance.index);
      if (mode == FilterMode::sequential) {
        res.augmented_train = union_samples(res.augmented_train, candidate_row(c, train.X.cols()));
        reference = d.r2_val_with;
      }
    }
  }

  if (mode == FilterMode::independent) {
    for (const auto& c : candidates)
      if (c.verdict == Verdict::favorable)
        res.augmented_train = union_samples(res.augmented_train, candidate_row(c, train.X.cols()));
  }
  return res;
}

void write_filter_csv(const FilterReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << "candidate_id,r2_val_with,verdict,baseline_r2_val,mode\n";
  for (const auto& d : report.decisions)
    out << d.candidate_id << ',' << fmt_real(d.r2_val_with) << ',' << to_string(d.verdict) << ','
        << fmt_real(report.baseline_r2_val) << ',' << to_string(report.mode) << '\n';
}

} // namespace skyaug
