#include "skyaug/pls.hpp"

#include <fstream>

#include "skyaug/checkpoint.hpp"
#include "skyaug/error.hpp"
#include "skyaug/format.hpp"

namespace skyaug {

namespace {

Eigen::MatrixXd coefficients(const Eigen::MatrixXd& W, const Eigen::MatrixXd& P,
                             const Eigen::MatrixXd& Q) {
  if (W.cols() == 0)
    return Eigen::MatrixXd::Zero(W.rows(), Q.rows());
  // P^T W is upper triangular with unit diagonal for NIPALS weights.
  const Eigen::MatrixXd PtW = P.transpose() * W;
  return W * PtW.partialPivLu().solve(Q.transpose());
}

} // namespace

std::size_t max_components(const DesignMatrix& X) {
  if (X.rows() < 2)
    return 0;
  return static_cast<std::size_t>(std::min<Eigen::Index>(X.rows() - 1, X.cols()));
}

PlsModel fit_pls2(const DesignMatrix& X, const DesignMatrix& Y, std::size_t n_comp,
                  const PlsOptions& opts) {
  if (X.rows() != Y.rows())
    throw UsageError("fit_pls2: X has " + std::to_string(X.rows()) + " rows, Y has " +
                     std::to_string(Y.rows()));
  if (X.rows() < 2)
    throw UsageError("fit_pls2: need at least 2 samples");
  if (X.cols() == 0 || Y.cols() == 0)
    throw UsageError("fit_pls2: empty feature or target matrix");
  if (!X.allFinite() || !Y.allFinite())
    throw DataError("fit_pls2: non-finite input");
  const std::size_t limit = max_components(X);
  if (n_comp < 1 || n_comp > limit)
    throw UsageError("fit_pls2: n_comp " + std::to_string(n_comp) + " outside [1, " +
                     std::to_string(limit) + "]");

  PlsModel m;
  m.requested_comp = n_comp;
  m.x_mean = X.colwise().mean();
  m.y_mean = Y.colwise().mean();
  Eigen::MatrixXd Xk = X.rowwise() - m.x_mean;
  Eigen::MatrixXd Yk = Y.rowwise() - m.y_mean;
  if (Xk.squaredNorm() == 0.0 || Yk.squaredNorm() == 0.0)
    throw DataError("fit_pls2: degenerate data (X or Y has zero variance)");

  const auto n = X.rows(), px = X.cols(), py = Y.cols();
  const auto nc = static_cast<Eigen::Index>(n_comp);
  m.W.setZero(px, nc);
  m.P.setZero(px, nc);
  m.Q.setZero(py, nc);
  m.T.setZero(n, nc);

  Eigen::Index a = 0;
  for (; a < nc; ++a) {
    Eigen::Index col = 0;
    if (Yk.colwise().squaredNorm().maxCoeff(&col) == 0.0)
      break;
    Eigen::VectorXd u = Yk.col(col);
    Eigen::VectorXd w, t, t_old = Eigen::VectorXd::Zero(n);
    bool exhausted = false;
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
      w = Xk.transpose() * u;
      const double wn = w.norm();
      if (wn == 0.0) {
        exhausted = true;
        break;
      }
      w /= wn;
      t = Xk * w;
      Eigen::VectorXd q = Yk.transpose() * t;
      const double qn = q.norm();
      if (qn == 0.0)
        break;
      q /= qn;
      u = Yk * q;
      const double tn = t.norm();
      if (tn > 0.0 && (t - t_old).norm() / tn < opts.tol)
        break;
      t_old = t;
    }
    if (exhausted)
      break;
    const double tt = t.squaredNorm();
    if (std::sqrt(tt) < opts.score_floor)
      break;
    const Eigen::VectorXd p = Xk.transpose() * t / tt;
    const Eigen::VectorXd c = Yk.transpose() * t / tt;
    Xk.noalias() -= t * p.transpose();
    Yk.noalias() -= t * c.transpose();
    m.W.col(a) = w;
    m.P.col(a) = p;
    m.Q.col(a) = c;
    m.T.col(a) = t;
  }
  m.n_comp = static_cast<std::size_t>(a);
  if (m.n_comp == 0)
    throw DataError("fit_pls2: degenerate data (no component could be extracted)");
  if (a < nc) {
    m.W.conservativeResize(Eigen::NoChange, a);
    m.P.conservativeResize(Eigen::NoChange, a);
    m.Q.conservativeResize(Eigen::NoChange, a);
    m.T.conservativeResize(Eigen::NoChange, a);
  }
  m.B = coefficients(m.W, m.P, m.Q);
  return m;
}

PlsModel PlsModel::truncated(std::size_t a) const {
  if (a < 1)
    throw UsageError("truncated: need at least one component");
  const auto k = static_cast<Eigen::Index>(std::min(a, n_comp));
  PlsModel m;
  m.x_mean = x_mean;
  m.y_mean = y_mean;
  m.W = W.leftCols(k);
  m.P = P.leftCols(k);
  m.Q = Q.leftCols(k);
  m.T = T.leftCols(k);
  m.n_comp = static_cast<std::size_t>(k);
  m.requested_comp = a;
  m.B = coefficients(m.W, m.P, m.Q);
  return m;
}

DesignMatrix predict(const PlsModel& model, const DesignMatrix& X) {
  if (static_cast<std::size_t>(X.cols()) != model.features())
    throw UsageError("predict: X has " + std::to_string(X.cols()) + " columns, model expects " +
                     std::to_string(model.features()));
  DesignMatrix out = (X.rowwise() - model.x_mean) * model.B;
  out.rowwise() += model.y_mean;
  return out;
}

double r2_score(const DesignMatrix& Y, const DesignMatrix& Y_hat, R2Mode mode) {
  if (Y.rows() != Y_hat.rows() || Y.cols() != Y_hat.cols())
    throw UsageError("r2_score: shape mismatch");
  if (Y.size() == 0)
    throw UsageError("r2_score: empty input");
  if (mode == R2Mode::pooled) {
    const double sse = (Y - Y_hat).squaredNorm();
    const double sst = (Y.rowwise() - Y.colwise().mean()).squaredNorm();
    if (sst == 0.0)
      throw DataError("R² undefined: target has zero total variance");
    return 1.0 - sse / sst;
  }
  double acc = 0.0;
  std::size_t used = 0;
  for (Eigen::Index r = 0; r < Y.rows(); ++r) {
    const double sst = (Y.row(r).array() - Y.row(r).mean()).square().sum();
    if (sst == 0.0)
      continue;
    acc += 1.0 - (Y.row(r) - Y_hat.row(r)).squaredNorm() / sst;
    ++used;
  }
  if (used == 0)
    throw DataError("R² undefined: every sample has zero variance");
  return acc / static_cast<double>(used);
}

Dataset make_dataset(const std::vector<LabeledImage>& items) {
  if (items.empty())
    throw DataError("make_dataset: no samples");
  const std::size_t w = items.front().image.width(), h = items.front().image.height();
  const auto n = static_cast<Eigen::Index>(items.size());
  const auto px = static_cast<Eigen::Index>(w * h);
  Dataset d{DesignMatrix(n, px), DesignMatrix(n, px)};
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& it = items[static_cast<std::size_t>(r)];
    if (it.image.width() != w || it.image.height() != h || !it.image.same_shape(it.map))
      throw DataError("make_dataset: sample " + std::to_string(r) + " has mismatched dimensions");
    for (Eigen::Index c = 0; c < px; ++c) {
      d.X(r, c) = it.image[static_cast<std::size_t>(c)] / 255.0;
      d.Y(r, c) = it.map[static_cast<std::size_t>(c)] ? 1.0 : 0.0;
    }
  }
  return d;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.X.cols() != b.X.cols() || a.Y.cols() != b.Y.cols())
    throw DataError("concat: column counts differ");
  Dataset out{DesignMatrix(a.X.rows() + b.X.rows(), a.X.cols()),
              DesignMatrix(a.Y.rows() + b.Y.rows(), a.Y.cols())};
  out.X << a.X, b.X;
  out.Y << a.Y, b.Y;
  return out;
}

SweepReport sweep_ncomp(const Dataset& train, const Dataset& val, std::size_t max_comp,
                        R2Mode mode, const PlsOptions& opts) {
  if (max_comp < 1)
    throw UsageError("sweep_ncomp: max_comp must be >= 1");
  // One fit at max_comp; every smaller model is its leading components.
  const PlsModel full = fit_pls2(train.X, train.Y, max_comp, opts);
  SweepReport rep;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 1; a <= max_comp; ++a) {
    const PlsModel m = full.truncated(a);
    SweepRow row{a, r2_score(train.Y, predict(m, train.X), mode),
                 r2_score(val.Y, predict(m, val.X), mode)};
    if (row.r2_val > best) {
      best = row.r2_val;
      rep.chosen = a;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

void write_sweep_csv(const SweepReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << "n_comp,r2_train,r2_val\n";
  for (const auto& r : report.rows)
    out << r.n_comp << ',' << fmt_real(r.r2_train) << ',' << fmt_real(r.r2_val) << '\n';
}

namespace {

Tensor to_tensor(const Eigen::MatrixXd& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  t.matrix(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())) = m;
  return t;
}

Eigen::MatrixXd from_tensor(const Tensor& t) {
  if (t.rank() != 2)
    throw DataError("PLS checkpoint entry is not a matrix");
  return t.matrix(t.dim(0), t.dim(1));
}

} // namespace

Checkpoint to_checkpoint(const PlsModel& model) {
  Checkpoint c{"pls", {}};
  c.put_scalar("meta.n_comp", static_cast<double>(model.n_comp));
  c.put_scalar("meta.requested_comp", static_cast<double>(model.requested_comp));
  c.put("x_mean", to_tensor(model.x_mean));
  c.put("y_mean", to_tensor(model.y_mean));
  c.put("W", to_tensor(model.W));
  c.put("P", to_tensor(model.P));
  c.put("Q", to_tensor(model.Q));
  c.put("B", to_tensor(model.B));
  return c;
}

PlsModel pls_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "pls")
    throw DataError("expected a pls checkpoint, found '" + ckpt.kind + "'");
  PlsModel m;
  m.n_comp = static_cast<std::size_t>(ckpt.scalar("meta.n_comp"));
  m.requested_comp = static_cast<std::size_t>(ckpt.scalar("meta.requested_comp"));
  m.x_mean = from_tensor(ckpt.get("x_mean"));
  m.y_mean = from_tensor(ckpt.get("y_mean"));
  m.W = from_tensor(ckpt.get("W"));
  m.P = from_tensor(ckpt.get("P"));
  m.Q = from_tensor(ckpt.get("Q"));
  m.B = from_tensor(ckpt.get("B"));
  return m;
}

} // namespace skyaug
