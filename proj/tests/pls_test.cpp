#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include <Eigen/Dense>

#include "skyaug/checkpoint.hpp"
#include "skyaug/error.hpp"
#include "skyaug/pls.hpp"

using namespace skyaug;

namespace {

struct Fixture {
  Eigen::MatrixXd X, Y;
};

Fixture random_fixture(std::uint64_t seed, int n = 30, int p = 6, int q = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Fixture f{Eigen::MatrixXd(n, p), Eigen::MatrixXd(n, q)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      f.X(i, j) = d(rng) + 0.3 * j;
  Eigen::MatrixXd beta(p, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j)
      beta(i, j) = d(rng);
  f.Y = f.X * beta;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < q; ++j)
      f.Y(i, j) += 0.5 * d(rng) + 2.0;
  return f;
}

// Least squares with intercept through the normal equations.
Eigen::MatrixXd ols_predict(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A << Eigen::VectorXd::Ones(X.rows()), X;
  const Eigen::MatrixXd coef = (A.transpose() * A).ldlt().solve(A.transpose() * Y);
  return A * coef;
}

TEST(Pls, FullRankMatchesLeastSquares) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = random_fixture(seed);
    const auto m = fit_pls2(f.X, f.Y, 6);
    ASSERT_EQ(m.n_comp, 6u);
    const Eigen::MatrixXd diff = predict(m, f.X) - ols_predict(f.X, f.Y);
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-6) << "seed " << seed;
  }
}

TEST(Pls, ScoresOrthogonalAndR2Monotone) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = random_fixture(seed);
    const auto m = fit_pls2(f.X, f.Y, 6);
    const Eigen::MatrixXd G = m.T.transpose() * m.T;
    for (int i = 0; i < G.rows(); ++i)
      for (int j = 0; j < G.cols(); ++j) {
        if (i != j) {
          EXPECT_LT(std::abs(G(i, j)), 1e-8);
        }
      }
    double prev = -1e300;
    for (std::size_t a = 1; a <= 6; ++a) {
      const double r2 = r2_score(f.Y, predict(m.truncated(a), f.X));
      EXPECT_GE(r2, prev - 1e-9);
      prev = r2;
    }
  }
}

TEST(Pls, FirstWeightFollowsCovarianceForSingleTarget) {
  const auto f = random_fixture(9, 30, 6, 1);
  const auto m = fit_pls2(f.X, f.Y, 1);
  const Eigen::MatrixXd Xc = f.X.rowwise() - f.X.colwise().mean();
  const Eigen::VectorXd yc = f.Y.col(0).array() - f.Y.col(0).mean();
  const Eigen::VectorXd dir = (Xc.transpose() * yc).normalized();
  EXPECT_NEAR(std::abs(dir.dot(m.W.col(0))), 1.0, 1e-10);
}

TEST(Pls, TruncationEqualsDirectFit) {
  const auto f = random_fixture(4);
  const auto full = fit_pls2(f.X, f.Y, 6);
  for (std::size_t a = 1; a <= 5; ++a) {
    const Eigen::MatrixXd d = predict(full.truncated(a), f.X) - predict(fit_pls2(f.X, f.Y, a), f.X);
    EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-9) << a;
  }
}

TEST(Pls, RangeAndDegenerateErrors) {
  const auto f = random_fixture(2);
  EXPECT_THROW(fit_pls2(f.X, f.Y, 0), UsageError);
  EXPECT_THROW(fit_pls2(f.X, f.Y, 7), UsageError);
  EXPECT_THROW(fit_pls2(f.X, f.Y.topRows(5), 2), UsageError);
  EXPECT_THROW(fit_pls2(Eigen::MatrixXd::Ones(10, 3), f.Y.topRows(10), 1), DataError);
  EXPECT_THROW(fit_pls2(f.X, Eigen::MatrixXd::Constant(30, 2, 4.0), 1), DataError);
  EXPECT_EQ(max_components(f.X), 6u);
  EXPECT_EQ(max_components(f.X.topRows(4)), 3u);
}

TEST(Pls, ExtractionStopsAtRank) {
  // Rank-2 X: only two components carry signal.
  auto f = random_fixture(3);
  f.X.col(2) = f.X.col(0) + f.X.col(1);
  f.X.col(3) = f.X.col(0) - f.X.col(1);
  f.X.col(4) = 2 * f.X.col(0);
  f.X.col(5) = f.X.col(1);
  const auto m = fit_pls2(f.X, f.Y, 6);
  EXPECT_EQ(m.n_comp, 2u);
  EXPECT_EQ(m.requested_comp, 6u);
  const Eigen::MatrixXd d = predict(m, f.X) - ols_predict(f.X.leftCols(2), f.Y);
  EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(R2, HandCases) {
  Eigen::MatrixXd y(4, 1), yh(4, 1);
  y << 1, 2, 3, 4;
  EXPECT_DOUBLE_EQ(r2_score(y, y), 1.0);
  yh.setConstant(2.5);
  EXPECT_DOUBLE_EQ(r2_score(y, yh), 0.0);
  yh << 2, 2, 3, 3; // sse 2, sst 5
  EXPECT_DOUBLE_EQ(r2_score(y, yh), 1.0 - 2.0 / 5.0);
  EXPECT_THROW(r2_score(Eigen::MatrixXd::Ones(3, 1), yh.topRows(3)), DataError);
  EXPECT_THROW(r2_score(y, yh.topRows(3)), UsageError);
}

TEST(R2, PerRowMeanSkipsConstantRows) {
  Eigen::MatrixXd y(3, 2), yh(3, 2);
  y << 0, 1, 1, 1, 0, 2;
  yh << 0, 1, 5, 5, 1, 1; // row 0: 1.0; row 1 skipped; row 2: 1 - 2/2 = 0
  EXPECT_DOUBLE_EQ(r2_score(y, yh, R2Mode::per_row_mean), 0.5);
}

TEST(Sweep, PicksBestValidationWithSmallestTie) {
  const auto tr = random_fixture(5, 30, 6, 2);
  const auto va = random_fixture(6, 20, 6, 2);
  const auto rep = sweep_ncomp({tr.X, tr.Y}, {va.X, va.Y}, 6);
  ASSERT_EQ(rep.rows.size(), 6u);
  double best = -1e300;
  std::size_t arg = 0;
  for (const auto& r : rep.rows)
    if (r.r2_val > best)
      best = r.r2_val, arg = r.n_comp;
  EXPECT_EQ(rep.chosen, arg);
  EXPECT_THROW(sweep_ncomp({tr.X, tr.Y}, {va.X, va.Y}, 0), UsageError);
}

TEST(Pls, CheckpointRoundtrip) {
  const auto f = random_fixture(8);
  const auto m = fit_pls2(f.X, f.Y, 4);
  const auto path = std::filesystem::temp_directory_path() / "skyaug_pls.ckpt";
  save_checkpoint(to_checkpoint(m), path);
  const auto back = pls_from_checkpoint(load_checkpoint(path));
  EXPECT_EQ(back.n_comp, 4u);
  EXPECT_EQ(predict(back, f.X), predict(m, f.X));
  std::filesystem::remove(path);
}

TEST(Dataset, PixelsAndLabels) {
  LabeledImage a{RawImage(2, 1, std::vector<std::uint8_t>{0, 255}),
                 BinaryMap(2, 1, std::vector<std::uint8_t>{0, 1})};
  const auto d = make_dataset({a, a});
  EXPECT_EQ(d.rows(), 2u);
  EXPECT_DOUBLE_EQ(d.X(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(d.Y(0, 1), 1.0);
  EXPECT_EQ(concat(d, d).rows(), 4u);
  EXPECT_THROW(make_dataset({}), DataError);
}

} // namespace
