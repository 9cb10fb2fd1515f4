#include "skyaug/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "skyaug/error.hpp"
#include "skyaug/format.hpp"

namespace skyaug {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_size(std::span<const double> scores, const BinaryMap& gt) {
  if (scores.size() != gt.size())
    throw UsageError("score grid has " + std::to_string(scores.size()) + " entries, map has " +
                     std::to_string(gt.size()));
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

RocCurve build_roc(std::span<const double> scores, const BinaryMap& gt, bool lenient) {
  require_same_size(scores, gt);
  RocCurve roc;
  roc.positives = gt.cloud_count();
  roc.negatives = gt.size() - roc.positives;
  if (!lenient && (roc.positives == 0 || roc.negatives == 0))
    throw DataError("ROC undefined: ground truth has a single class");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  roc.points.push_back({kInf, 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i)
      (gt[order[i]] ? tp : fp) += 1;
    roc.points.push_back({s, ratio(fp, roc.negatives), ratio(tp, roc.positives)});
  }
  roc.points.push_back({-kInf, roc.negatives ? 1.0 : 0.0, roc.positives ? 1.0 : 0.0});

  for (std::size_t k = 1; k < roc.points.size(); ++k) {
    const auto& a = roc.points[k - 1];
    const auto& b = roc.points[k];
    roc.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return roc;
}

} // namespace

ConfusionMatrix confusion(std::span<const double> scores, const BinaryMap& gt, double thr) {
  require_same_size(scores, gt);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= thr;
    const bool cloud = gt[i] != 0;
    if (pred && cloud)
      ++cm.tp;
    else if (pred)
      ++cm.fp;
    else if (cloud)
      ++cm.fn;
    else
      ++cm.tn;
  }
  return cm;
}

RocCurve roc_curve(std::span<const double> scores, const BinaryMap& gt) {
  return build_roc(scores, gt, false);
}

RocCurve roc_curve_lenient(std::span<const double> scores, const BinaryMap& gt) {
  return build_roc(scores, gt, true);
}

std::string to_string(ThresholdCriterion c) {
  switch (c) {
  case ThresholdCriterion::youden:
    return "youden";
  case ThresholdCriterion::closest_to_corner:
    return "closest_to_corner";
  case ThresholdCriterion::max_f_score:
    return "max_f_score";
  }
  return "?";
}

ThresholdCriterion parse_threshold_criterion(const std::string& s) {
  if (s == "youden")
    return ThresholdCriterion::youden;
  if (s == "closest_to_corner")
    return ThresholdCriterion::closest_to_corner;
  if (s == "max_f_score")
    return ThresholdCriterion::max_f_score;
  throw UsageError("unknown threshold criterion '" + s + "'");
}

ThresholdChoice optimal_threshold(const RocCurve& roc, ThresholdCriterion criterion) {
  if (roc.points.empty())
    throw UsageError("optimal_threshold: empty ROC curve");
  auto value = [&](const RocPoint& p) {
    switch (criterion) {
    case ThresholdCriterion::youden:
      return p.tpr - p.fpr;
    case ThresholdCriterion::closest_to_corner:
      return -std::hypot(p.fpr, 1.0 - p.tpr);
    case ThresholdCriterion::max_f_score: {
      const double tp = p.tpr * static_cast<double>(roc.positives);
      const double fp = p.fpr * static_cast<double>(roc.negatives);
      const double fn = static_cast<double>(roc.positives) - tp;
      return (2 * tp + fp + fn) > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
    }
    }
    return 0.0;
  };
  // Points run from the largest threshold down; keep the first maximum.
  ThresholdChoice best{roc.points.front().threshold, value(roc.points.front())};
  for (const auto& p : roc.points) {
    const double v = value(p);
    if (v > best.criterion_value)
      best = {p.threshold, v};
  }
  return best;
}

Prf prf(const ConfusionMatrix& cm) {
  Prf r;
  r.precision = ratio(cm.tp, cm.tp + cm.fp);
  r.recall = ratio(cm.tp, cm.tp + cm.fn);
  const double s = r.precision + r.recall;
  r.f_score = s > 0.0 ? 2.0 * r.precision * r.recall / s : 0.0;
  return r;
}

MetricsReport evaluate_model(const PlsModel& model, const Dataset& train, const Dataset& test,
                             ThresholdCriterion criterion, R2Mode r2_mode) {
  if (test.rows() == 0)
    throw DataError("evaluate_model: empty test set");
  MetricsReport rep;
  rep.r2_train = r2_score(train.Y, predict(model, train.X), r2_mode);
  const DesignMatrix scores = predict(model, test.X);
  rep.r2_test = r2_score(test.Y, scores, r2_mode);

  const auto px = static_cast<std::size_t>(test.Y.cols());
  for (std::size_t r = 0; r < test.rows(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    std::vector<double> s(px);
    std::vector<std::uint8_t> labels(px);
    for (std::size_t c = 0; c < px; ++c) {
      s[c] = scores(row, static_cast<Eigen::Index>(c));
      labels[c] = test.Y(row, static_cast<Eigen::Index>(c)) >= 0.5 ? 1 : 0;
    }
    const BinaryMap gt(px, 1, std::move(labels));
    ImageMetrics m;
    m.index = r;
    m.single_class = gt.cloud_count() == 0 || gt.cloud_count() == gt.size();
    m.roc = m.single_class ? roc_curve_lenient(s, gt) : roc_curve(s, gt);
    m.auc = m.roc.auc;
    m.thr = optimal_threshold(m.roc, criterion).thr;
    m.prf = prf(confusion(s, gt, m.thr));
    rep.single_class_images += m.single_class ? 1 : 0;
    rep.mean.precision += m.prf.precision;
    rep.mean.recall += m.prf.recall;
    rep.mean.f_score += m.prf.f_score;
    rep.images.push_back(std::move(m));
  }
  const double n = static_cast<double>(rep.images.size());
  rep.mean.precision /= n;
  rep.mean.recall /= n;
  rep.mean.f_score /= n;
  return rep;
}

void write_roc_csv(const RocCurve& roc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << "threshold,fpr,tpr\n";
  for (const auto& p : roc.points)
    out << fmt_real(p.threshold) << ',' << fmt_real(p.fpr) << ',' << fmt_real(p.tpr) << '\n';
}

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << "image,precision,recall,f_score,thr,auc,single_class\n";
  for (const auto& m : report.images)
    out << m.index << ',' << fmt_real(m.prf.precision) << ',' << fmt_real(m.prf.recall) << ','
        << fmt_real(m.prf.f_score) << ',' << fmt_real(m.thr) << ',' << fmt_real(m.auc) << ','
        << (m.single_class ? 1 : 0) << '\n';
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << "case,r2_train,r2_test,precision,recall,f_score\n";
  for (const auto& r : rows)
    out << r.case_name << ',' << fmt_real(r.r2_train) << ',' << fmt_real(r.r2_test) << ','
        << fmt_real(r.prf.precision) << ',' << fmt_real(r.prf.recall) << ','
        << fmt_real(r.prf.f_score) << '\n';
}

} // namespace skyaug
