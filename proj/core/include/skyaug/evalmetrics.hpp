#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "skyaug/image.hpp"
#include "skyaug/pls.hpp"

namespace skyaug {

/// Pixel counts with cloud as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// A pixel is predicted cloud when score >= thr.
ConfusionMatrix confusion(std::span<const double> scores, const BinaryMap& gt, double thr);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Points ordered by decreasing threshold, from the +inf sentinel (0, 0)
/// to the -inf sentinel (1, 1).
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Thresholds are the distinct scores plus +/-inf. Throws "ROC undefined"
/// unless gt has both classes.
RocCurve roc_curve(std::span<const double> scores, const BinaryMap& gt);
/// Same construction but tolerates a single-class gt; an empty class
/// contributes a rate of 0 everywhere.
RocCurve roc_curve_lenient(std::span<const double> scores, const BinaryMap& gt);

enum class ThresholdCriterion {
  youden,            ///< max tpr - fpr
  closest_to_corner, ///< min distance to (0, 1), reported negated
  max_f_score,
};

std::string to_string(ThresholdCriterion c);
ThresholdCriterion parse_threshold_criterion(const std::string& s);

struct ThresholdChoice {
  double thr = 0.0;
  double criterion_value = 0.0;
};

/// Best point under the criterion; ties go to the larger threshold.
ThresholdChoice optimal_threshold(const RocCurve& roc,
                                  ThresholdCriterion criterion = ThresholdCriterion::youden);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

/// 0/0 is taken as 0 for every ratio.
Prf prf(const ConfusionMatrix& cm);

struct ImageMetrics {
  std::size_t index = 0;
  Prf prf;
  double thr = 0.0;
  double auc = 0.0;
  bool single_class = false; ///< gt had only one class; thr from the lenient curve
  RocCurve roc;
};

struct MetricsReport {
  std::vector<ImageMetrics> images;
  Prf mean;                   ///< unweighted over images
  double r2_train = 0.0;
  double r2_test = 0.0;
  std::size_t single_class_images = 0;
};

/// Scores every test row, picks a per-image threshold from that image's own
/// ROC curve, and averages precision/recall/F-score over the test set.
MetricsReport evaluate_model(const PlsModel& model, const Dataset& train, const Dataset& test,
                             ThresholdCriterion criterion = ThresholdCriterion::youden,
                             R2Mode r2_mode = R2Mode::pooled);

void write_roc_csv(const RocCurve& roc, const std::filesystem::path& path);
/// Per-image rows: image, precision, recall, f_score, thr, auc, single_class.
void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path);

struct ComparisonRow {
  std::string case_name;
  double r2_train = 0.0, r2_test = 0.0;
  Prf prf;
};

/// Columns case, r2_train, r2_test, precision, recall, f_score.
void write_comparison_csv(const std::vector<ComparisonRow>& rows,
                          const std::filesystem::path& path);

} // namespace skyaug
