#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "skyaug/image.hpp"

namespace skyaug {

struct Checkpoint;

/// Rows are samples, columns are features or targets.
using DesignMatrix = Eigen::MatrixXd;

struct PlsOptions {
  double tol = 1e-10;          ///< relative change of the x-score vector
  std::size_t max_iter = 500;  ///< inner NIPALS iterations per component
  double score_floor = 1e-12;  ///< |t| below this ends extraction early
};

/// PLS2 regression model fitted by NIPALS on mean-centered data.
struct PlsModel {
  Eigen::RowVectorXd x_mean;
  Eigen::RowVectorXd y_mean;
  Eigen::MatrixXd W;  ///< x-weights, features x n_comp
  Eigen::MatrixXd P;  ///< x-loadings, features x n_comp
  Eigen::MatrixXd Q;  ///< y-loadings (inner-regression scaled), outputs x n_comp
  Eigen::MatrixXd B;  ///< coefficients, features x outputs
  Eigen::MatrixXd T;  ///< training x-scores, samples x n_comp
  std::size_t n_comp = 0;           ///< components actually extracted
  std::size_t requested_comp = 0;

  std::size_t features() const { return static_cast<std::size_t>(x_mean.size()); }
  std::size_t outputs() const { return static_cast<std::size_t>(y_mean.size()); }

  /// Model restricted to the first `a` components (B recomputed). NIPALS
  /// extracts components sequentially, so this equals a fresh fit at `a`.
  PlsModel truncated(std::size_t a) const;
};

/// Largest admissible n_comp for an X of this shape: min(rows - 1, cols).
std::size_t max_components(const DesignMatrix& X);

PlsModel fit_pls2(const DesignMatrix& X, const DesignMatrix& Y, std::size_t n_comp,
                  const PlsOptions& opts = {});

/// (x - x_mean) B + y_mean, row by row.
DesignMatrix predict(const PlsModel& model, const DesignMatrix& X);

enum class R2Mode {
  pooled,         ///< one ratio over every entry of Y
  per_row_mean,   ///< mean of per-sample R^2, rows with zero variance skipped
};

/// 1 - SSE / SST with column means of Y as the reference.
double r2_score(const DesignMatrix& Y, const DesignMatrix& Y_hat, R2Mode mode = R2Mode::pooled);

struct SweepRow {
  std::size_t n_comp = 0;
  double r2_train = 0.0;
  double r2_val = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::size_t chosen = 0; ///< argmax of r2_val, ties toward the smaller n_comp
};

struct Dataset {
  DesignMatrix X;
  DesignMatrix Y;
  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
};

/// X = pixel / 255, Y = labels as {0, 1}. All images must share a size.
Dataset make_dataset(const std::vector<LabeledImage>& items);
/// Stacks the rows of `b` under those of `a`.
Dataset concat(const Dataset& a, const Dataset& b);

SweepReport sweep_ncomp(const Dataset& train, const Dataset& val, std::size_t max_comp,
                        R2Mode mode = R2Mode::pooled, const PlsOptions& opts = {});

void write_sweep_csv(const SweepReport& report, const std::filesystem::path& path);

Checkpoint to_checkpoint(const PlsModel& model);
PlsModel pls_from_checkpoint(const Checkpoint& ckpt);

} // namespace skyaug
