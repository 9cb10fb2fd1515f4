// Acceptance suite: one PASS/FAIL line per criterion, tolerances and time
// limits pinned below. Criterion 10 is informational and never fails the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "skyaug/augment.hpp"
#include "skyaug/evalmetrics.hpp"
#include "skyaug/filtering.hpp"
#include "skyaug/gan.hpp"
#include "skyaug/pipeline.hpp"
#include "skyaug/pseudolabel.hpp"
#include "support.hpp"

using namespace skyaug;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool skipped = false;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  bool gating;
  std::function<Outcome()> run;
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

// 1 -------------------------------------------------------------------------
Outcome normalize_roundtrip() {
  RawImage img(256, 1);
  for (int i = 0; i < 256; ++i)
    img[i] = static_cast<std::uint8_t>(i);
  const auto back = denormalize(normalize(img));
  std::size_t bad = 0;
  for (int i = 0; i < 256; ++i)
    bad += back[i] != img[i];
  return {bad == 0, std::to_string(256 - bad) + "/256 intensities exact"};
}

// 2 -------------------------------------------------------------------------
Outcome sixteen_fold_structure() {
  std::mt19937_64 rng(2024);
  RawImage img = fixtures::random_image(8, 8, rng);
  // Asymmetric: no non-identity transform may fix it.
  for (std::size_t t = 1; t < 8; ++t)
    if (apply_transform(img, all_transforms()[t]) == img)
      return {false, "fixture image is symmetric"};
  const auto folds = sixteen_fold(img);
  std::map<std::vector<std::uint8_t>, int> counts;
  for (const auto& f : folds)
    ++counts[std::vector<std::uint8_t>(f.values().begin(), f.values().end())];
  bool twice = std::ranges::all_of(counts, [](const auto& kv) { return kv.second == 2; });

  LabeledImage pair{img, fixtures::random_map(8, 8, rng)};
  for (std::size_t i = 0; i < pair.image.size(); ++i)
    pair.image[i] = static_cast<std::uint8_t>((pair.image[i] & 0xFE) | pair.map[i]);
  bool aligned = true;
  for (const auto& f : sixteen_fold(pair))
    for (std::size_t i = 0; i < f.image.size(); ++i)
      aligned = aligned && (f.image[i] & 1) == f.map[i];

  const bool ok = folds.size() == 16 && counts.size() == 8 && twice && aligned;
  return {ok, std::to_string(folds.size()) + " images, " + std::to_string(counts.size()) +
                  " distinct, each twice: " + (twice ? "yes" : "no") +
                  ", pairs aligned: " + (aligned ? "yes" : "no")};
}

// 3 -------------------------------------------------------------------------
constexpr double kGradTol = 1e-4;

Outcome gradient_check() {
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  auto note = [&](const fixtures::GradCheck& r, const std::string& what) {
    checked += r.checked;
    if (r.max_rel_error > worst)
      worst = r.max_rel_error, where = what + " " + r.worst;
  };
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::string tag = " seed " + std::to_string(seed);
    std::mt19937_64 rng(seed);
    {
      Dense fc("fc", 4, 5, Init::normal, rng);
      std::vector<NamedParam> ps;
      fc.collect(ps);
      fixtures::widen(ps, rng);
      auto x = fixtures::random_leaf({3, 4}, rng, "x");
      ps.push_back({"x", x});
      const Tensor r = fixtures::random_tensor({3, 5}, rng);
      note(fixtures::grad_check(ps, [&] { return fixtures::probe(fc(x), r); }), "dense" + tag);
    }
    {
      Conv2d conv("conv", 2, 3, {}, Init::normal, rng);
      std::vector<NamedParam> ps;
      conv.collect(ps);
      fixtures::widen(ps, rng);
      auto x = fixtures::random_leaf({2, 2, 6, 6}, rng, "x");
      ps.push_back({"x", x});
      const Tensor r = fixtures::random_tensor({2, 3, 3, 3}, rng);
      note(fixtures::grad_check(ps, [&] { return fixtures::probe(conv(x), r); }), "conv2d" + tag);
    }
    {
      ConvTranspose2d up("up", 3, 2, {}, Init::normal, rng);
      std::vector<NamedParam> ps;
      up.collect(ps);
      fixtures::widen(ps, rng);
      auto x = fixtures::random_leaf({2, 3, 3, 3}, rng, "x");
      ps.push_back({"x", x});
      const Tensor r = fixtures::random_tensor({2, 2, 6, 6}, rng);
      note(fixtures::grad_check(ps, [&] { return fixtures::probe(up(x), r); }), "conv_transpose2d" + tag);
    }
    {
      auto x = fixtures::random_leaf({24}, rng, "x");
      const Tensor r = fixtures::random_tensor({24}, rng);
      std::vector<NamedParam> ps{{"x", x}};
      note(fixtures::grad_check(ps, [&] { return fixtures::probe(ag::relu(x), r); }), "relu" + tag);
      note(fixtures::grad_check(ps, [&] { return fixtures::probe(ag::leaky_relu(x, 0.2), r); }), "leaky_relu" + tag);
      note(fixtures::grad_check(ps, [&] { return fixtures::probe(ag::tanh(x), r); }), "tanh" + tag);
      note(fixtures::grad_check(ps, [&] { return fixtures::probe(ag::sigmoid(x), r); }), "sigmoid" + tag);
      for (double label : {0.0, 1.0}) {
        note(fixtures::grad_check(ps, [&] { return ag::bce(ag::sigmoid(x), label); }), "bce" + tag);
        note(fixtures::grad_check(ps, [&] { return ag::sigmoid_bce(x, label); }), "sigmoid_bce" + tag);
      }
    }
    {
      Dense fc1("fc1", 2, 8, Init::normal, rng);
      ConvTranspose2d up("up", 2, 2, {}, Init::normal, rng);
      Conv2d down("down", 2, 2, {}, Init::normal, rng);
      Dense fc2("fc2", 8, 1, Init::normal, rng);
      std::vector<NamedParam> ps;
      fc1.collect(ps);
      up.collect(ps);
      down.collect(ps);
      fc2.collect(ps);
      if (parameter_count(ps) > 200)
        return {false, "composed network has " + std::to_string(parameter_count(ps)) + " parameters"};
      fixtures::widen(ps, rng);
      auto z = fixtures::random_leaf({2, 2}, rng, "z");
      ps.push_back({"z", z});
      auto net = [&] {
        auto h = ag::relu(ag::reshape(fc1(z), {2, 2, 2, 2}));
        h = ag::tanh(up(h));
        h = ag::leaky_relu(down(h), 0.2);
        return ag::bce(ag::sigmoid(fc2(ag::reshape(h, {2, 8}))), 1.0);
      };
      note(fixtures::grad_check(ps, net), "composed" + tag);
    }
  }
  return {worst < kGradTol, "max relative error " + fmt(worst) + " over " + std::to_string(checked) +
                                " gradient entries (limit " + fmt(kGradTol) + ")" +
                                (worst > 0 ? ", worst at " + where : "")};
}

// 4 -------------------------------------------------------------------------
// Ten fixed seeds: seed 1 must improve, and so must the mean over all ten.
// Individual seeds are noisy at 200 single-sample steps, so the count of
// seeds that got worse is reported rather than hidden.
struct SmokeRun {
  double first = 0, last = 0, lo = 1, hi = -1;
  bool in_range = true;
};

SmokeRun smoke_run(const NormalizedImage& target, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.image_side = 16;
  cfg.epochs = 200;
  cfg.seed = seed;
  std::mt19937_64 zr(5);
  Tensor z({16, cfg.latent_dim});
  std::normal_distribution<double> nd(0.0, 1.0);
  for (auto& v : z.values())
    v = nd(zr);
  const auto zc = ag::Var::constant(z);
  SmokeRun r;
  train_gan({target}, cfg, [&](std::size_t epoch, const GeneratorNet& g) {
    const auto out = g.forward(zc);
    double acc = 0;
    for (std::size_t i = 0; i < out.value().numel(); ++i) {
      const double v = out.value()[i];
      r.in_range = r.in_range && v > -1.0 && v < 1.0;
      r.lo = std::min(r.lo, v), r.hi = std::max(r.hi, v);
      acc += std::abs(v - target[i % target.size()]);
    }
    const double d = acc / static_cast<double>(out.value().numel());
    if (epoch == 1)
      r.first = d;
    if (epoch == cfg.epochs)
      r.last = d;
  });
  return r;
}

Outcome gan_smoke() {
  const NormalizedImage target = normalize(synth_dataset(1, 16, 41).front().image);
  double first = 0, last = 0, lo = 1, hi = -1;
  bool in_range = true;
  std::size_t worse = 0;
  SmokeRun primary;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = smoke_run(target, seed);
    if (seed == 1)
      primary = r;
    first += r.first / 10, last += r.last / 10;
    lo = std::min(lo, r.lo), hi = std::max(hi, r.hi);
    in_range = in_range && r.in_range;
    worse += r.last >= r.first;
  }
  const bool ok = primary.last < primary.first && last < first && in_range;
  return {ok, "seed 1 mean |G(z) - target| epoch 1: " + fmt(primary.first, 4) + ", epoch 200: " +
                  fmt(primary.last, 4) + "; mean over seeds 1-10: " + fmt(first, 4) + " -> " +
                  fmt(last, 4) + " (" + std::to_string(worse) +
                  "/10 seeds not improved); outputs within [" + fmt(lo, 6) + ", " + fmt(hi, 6) + "]"};
}

// 5 -------------------------------------------------------------------------
Outcome pls_oracle() {
  double pred_err = 0, mono_viol = 0, ortho = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed * 101);
    std::normal_distribution<double> d(0.0, 1.0);
    Eigen::MatrixXd X(30, 6), Y(30, 3), beta(6, 3);
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 6; ++j)
        X(i, j) = d(rng) + 0.25 * j;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 3; ++j)
        beta(i, j) = d(rng);
    Y = X * beta;
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 3; ++j)
        Y(i, j) += 0.3 * d(rng);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(X.rowwise() - X.colwise().mean());
    if (lu.rank() != 6)
      return {false, "fixture not full rank"};

    const auto m = fit_pls2(X, Y, 6);
    Eigen::MatrixXd A(30, 7);
    A << Eigen::VectorXd::Ones(30), X;
    const Eigen::MatrixXd coef = (A.transpose() * A).ldlt().solve(A.transpose() * Y);
    pred_err = std::max(pred_err, (predict(m, X) - A * coef).cwiseAbs().maxCoeff());

    double prev = -1e300;
    for (std::size_t a = 1; a <= 6; ++a) {
      const double r2 = r2_score(Y, predict(m.truncated(a), X));
      mono_viol = std::max(mono_viol, prev - r2);
      prev = r2;
    }
    Eigen::MatrixXd G = m.T.transpose() * m.T;
    G.diagonal().setZero();
    ortho = std::max(ortho, G.cwiseAbs().maxCoeff());
  }
  const bool ok = pred_err < 1e-6 && mono_viol <= 1e-9 && ortho < 1e-8;
  return {ok, "max |pls - lstsq| " + fmt(pred_err) + " (< 1e-6), max R2 decrease " +
                  fmt(std::max(0.0, mono_viol)) + " (<= 1e-9), max |t_i.t_j| " + fmt(ortho) +
                  " (< 1e-8)"};
}

// 6 -------------------------------------------------------------------------
BinaryMap majority_oracle(const BinaryMap& m, int r) {
  BinaryMap out(m.width(), m.height());
  const int w = int(m.width()), h = int(m.height());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int ones = 0, total = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= w || yy >= h)
            continue;
          ++total;
          ones += m.cloud(xx, yy);
        }
      out.set(x, y, 2 * ones > total ? true : 2 * ones < total ? false : m.cloud(x, y));
    }
  return out;
}

Outcome cluster_smooth_oracles() {
  std::mt19937_64 rng(6);
  std::size_t partitions = 0;
  for (int t = 0; t < 20; ++t) {
    std::uniform_int_distribution<int> dark(5, 90), bright(150, 250);
    const auto truth = fixtures::random_map(32, 32, rng, 0.35);
    RawImage img(32, 32);
    for (std::size_t i = 0; i < img.size(); ++i)
      img[i] = static_cast<std::uint8_t>(truth[i] ? bright(rng) : dark(rng));
    partitions += kmeans_pixels(img) == truth;
  }
  std::size_t passes = 0, fixed_default = 0, fixed = 0;
  SmoothConfig wide;
  wide.max_passes = 1000;
  for (int t = 0; t < 20; ++t) {
    const auto m = fixtures::random_map(32, 32, rng);
    passes += majority_pass(m, 2) == majority_oracle(m, 2);
    const auto s = smooth_map(m); // default: radius 2, at most 3 passes
    fixed_default += majority_pass(s, 2) == s;
    const auto r = smooth_map_detailed(m, wide);
    fixed += r.converged && majority_pass(r.map, 2) == r.map;
  }
  const bool ok = partitions == 20 && passes == 20 && fixed == 20;
  return {ok, "exact partitions " + std::to_string(partitions) + "/20, oracle-equal passes " +
                  std::to_string(passes) + "/20, fixed points " + std::to_string(fixed) +
                  "/20 when iterated to convergence (" + std::to_string(fixed_default) +
                  "/20 already after the default 3-pass cap)"};
}

// 7 -------------------------------------------------------------------------
Outcome filter_soundness() {
  const auto split = fixtures::synthetic_split(115, 32, 3, 7);
  const auto train = make_dataset(split.train);
  const auto val = make_dataset(split.val);
  const auto sweep = sweep_ncomp(train, val, 20);
  PlsConfig cfg;
  cfg.n_comp = sweep.chosen;

  std::vector<Candidate> cands;
  std::size_t id = 0;
  for (const auto& it : synth_dataset(4, 32, 77))
    cands.push_back({it.image, estimate_map(it.image, {}, {}), {"", 0, id++}});
  std::vector<std::size_t> dups;
  for (std::size_t k : {0, 9, 30, 50}) {
    dups.push_back(id);
    cands.push_back({split.train[k].image, split.train[k].map, {"", 0, id++}});
  }
  std::mt19937_64 rng(99);
  const std::size_t adv = id;
  Candidate noise{fixtures::random_image(32, 32, rng), BinaryMap(32, 32), {"", 0, id++}};
  for (std::size_t i = 0; i < noise.image.size(); ++i)
    noise.map[i] = noise.image[i] < 128 ? 1 : 0;
  cands.push_back(noise);
  cands.push_back({split.train[3].image, split.train[3].map, {"", 0, id++}});
  for (auto& v : cands.back().map.values())
    v = v ? 0 : 1; // inverted map of a training image

  auto first = cands;
  const auto res = filter_candidates(train, val, first, cfg);
  const double base = res.report.baseline_r2_val;

  std::size_t accepted = 0, refit_ok = 0;
  for (const auto& c : first) {
    if (c.verdict != Verdict::favorable)
      continue;
    ++accepted;
    const auto with = union_samples(train, make_dataset({{c.image, c.map}}));
    const auto m = fit_pls2(with.X, with.Y, cfg.n_comp);
    refit_ok += r2_score(val.Y, predict(m, val.X)) >= base;
  }
  std::size_t dup_ok = 0;
  for (auto d : dups)
    dup_ok += first[d].verdict == Verdict::favorable;
  const bool adv_rejected = first[adv].verdict == Verdict::unfavorable;

  std::map<std::size_t, Verdict> ref;
  for (const auto& c : first)
    ref[c.provenance.index] = c.verdict;
  bool invariant = true;
  std::mt19937_64 prng(3);
  for (int k = 0; k < 3; ++k) {
    auto perm = cands;
    std::shuffle(perm.begin(), perm.end(), prng);
    filter_candidates(train, val, perm, cfg);
    for (const auto& c : perm)
      invariant = invariant && c.verdict == ref[c.provenance.index];
  }
  const bool ok = refit_ok == accepted && dup_ok == dups.size() && adv_rejected && invariant;
  return {ok, "n_comp " + std::to_string(cfg.n_comp) + ", baseline val R2 " + fmt(base, 6) + "; " +
                  std::to_string(refit_ok) + "/" + std::to_string(accepted) +
                  " accepted pass refit, duplicates accepted " + std::to_string(dup_ok) + "/" +
                  std::to_string(dups.size()) + ", noise/inverted-map rejected: " +
                  (adv_rejected ? "yes" : "no") + ", permutation invariant: " +
                  (invariant ? "yes" : "no")};
}

// 8 -------------------------------------------------------------------------
Outcome roc_metrics() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t monotone = 0, grids = 0;
  while (grids < 100) {
    const auto gt = fixtures::random_map(16, 16, rng, 0.1 + 0.8 * u(rng));
    if (gt.cloud_count() == 0 || gt.cloud_count() == gt.size())
      continue;
    ++grids;
    const int q = 2 + static_cast<int>(u(rng) * 30);
    std::vector<double> s(gt.size());
    for (auto& v : s)
      v = std::floor(u(rng) * q) / q;
    const auto roc = roc_curve(s, gt);
    bool ok = roc.points.front().fpr == 0 && roc.points.front().tpr == 0 &&
              roc.points.back().fpr == 1 && roc.points.back().tpr == 1;
    for (std::size_t i = 1; i < roc.points.size(); ++i)
      ok = ok && roc.points[i].fpr >= roc.points[i - 1].fpr &&
           roc.points[i].tpr >= roc.points[i - 1].tpr &&
           roc.points[i].threshold < roc.points[i - 1].threshold;
    monotone += ok;
  }
  BinaryMap gt(100, 100);
  std::vector<double> perfect(gt.size()), random(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt[i] = i % 2;
    perfect[i] = gt[i] + 0.5 * u(rng);
    random[i] = u(rng);
  }
  const double auc_perfect = roc_curve(perfect, gt).auc;
  const double auc_random = roc_curve(random, gt).auc;
  const auto p = prf({3, 1, 0, 1});
  const bool hand = p.precision == 0.75 && p.recall == 0.75 && p.f_score == 0.75;
  const bool ok = monotone == 100 && auc_perfect == 1.0 && auc_random >= 0.45 &&
                  auc_random <= 0.55 && hand;
  return {ok, "monotone ROC " + std::to_string(monotone) + "/100, AUC perfect " +
                  fmt(auc_perfect, 12) + ", AUC random " + fmt(auc_random, 4) +
                  " (in [0.45, 0.55]), prf(3,1,0,1) = " + fmt(p.precision) + "/" +
                  fmt(p.recall) + "/" + fmt(p.f_score)};
}

// 9 -------------------------------------------------------------------------
std::map<std::string, std::string> collect_csvs(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.path().extension() != ".csv")
      continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).generic_string()] = ss.str();
  }
  return out;
}

PipelineConfig e2e_config(const fs::path& out) {
  PipelineConfig c;
  c.synthetic_count = 115;
  c.side = 32;
  c.gan.epochs = 50;
  c.candidates = 32;
  c.output = out;
  return c;
}

constexpr double kRunLimit = 15 * 60.0;

Outcome end_to_end(const fs::path& workdir) {
  std::vector<double> seconds;
  for (const char* name : {"run_a", "run_b"}) {
    fs::remove_all(workdir / name);
    const auto t0 = std::chrono::steady_clock::now();
    Pipeline p(e2e_config(workdir / name), &std::cerr);
    p.run_all(true);
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  const auto a = collect_csvs(workdir / "run_a");
  const auto b = collect_csvs(workdir / "run_b");
  std::size_t same = 0;
  for (const auto& [k, v] : a)
    same += b.contains(k) && b.at(k) == v;
  const bool identical = a.size() == b.size() && same == a.size();

  std::ifstream cmp(workdir / "run_a/eval/comparison.csv");
  std::string header, row1, row2;
  std::getline(cmp, header);
  std::getline(cmp, row1);
  std::getline(cmp, row2);
  const bool shaped = header == "case,r2_train,r2_test,precision,recall,f_score" &&
                      row1.rfind("without_augmentation,", 0) == 0 &&
                      row2.rfind("after_augmentation,", 0) == 0 &&
                      fs::exists(workdir / "run_a/eval/summary.txt");
  const bool fast = seconds[0] < kRunLimit && seconds[1] < kRunLimit;
  return {identical && shaped && fast,
          "runs took " + fmt(seconds[0], 4) + " s and " + fmt(seconds[1], 4) + " s (limit " +
              fmt(kRunLimit) + " s each), " + std::to_string(same) + "/" +
              std::to_string(a.size()) + " CSVs byte-identical, comparison table shaped: " +
              (shaped ? "yes" : "no") + " [" + row1 + " | " + row2 + "]"};
}

// 10 ------------------------------------------------------------------------
Outcome real_dataset(const fs::path& workdir, const std::string& dataset) {
  if (dataset.empty())
    return {true, "no real dataset given (--dataset DIR or SKYAUG_DATASET)", true};
  auto cfg = e2e_config(workdir / "real");
  cfg.dataset = dataset;
  Pipeline p(cfg, &std::cerr);
  p.run_all(false);
  std::ifstream cmp(workdir / "real/eval/comparison.csv");
  std::string header, row1, row2;
  std::getline(cmp, header);
  std::getline(cmp, row1);
  std::getline(cmp, row2);
  auto f_of = [](const std::string& row) {
    return std::stod(row.substr(row.find_last_of(',') + 1));
  };
  const double f0 = f_of(row1), f1 = f_of(row2);
  return {true, "F-score without augmentation " + fmt(f0, 4) + ", after augmentation " +
                    fmt(f1, 4) + "; improvement with augmentation: " + (f1 > f0 ? "yes" : "no") +
                    " (recorded, not asserted)"};
}

} // namespace

int main(int argc, char** argv) {
  fs::path workdir = fs::temp_directory_path() / "skyaug_acceptance";
  std::set<int> only;
  std::string dataset = std::getenv("SKYAUG_DATASET") ? std::getenv("SKYAUG_DATASET") : "";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--workdir" && i + 1 < argc)
      workdir = argv[++i];
    else if (a == "--only" && i + 1 < argc)
      only.insert(std::stoi(argv[++i]));
    else if (a == "--dataset" && i + 1 < argc)
      dataset = argv[++i];
    else {
      std::cerr << "usage: acceptance [--workdir DIR] [--only N]... [--dataset DIR]\n";
      return 2;
    }
  }
  fs::create_directories(workdir);

  const std::vector<Criterion> criteria = {
      {1, "normalize/denormalize roundtrip", 1, true, normalize_roundtrip},
      {2, "16-fold double cover and pair alignment", 1, true, sixteen_fold_structure},
      {3, "autodiff gradient check", 30, true, gradient_check},
      {4, "GAN smoke training", 180, true, gan_smoke},
      {5, "PLS least-squares equivalence", 10, true, pls_oracle},
      {6, "clustering and smoothing oracles", 10, true, cluster_smooth_oracles},
      {7, "filter soundness", 120, true, filter_soundness},
      {8, "ROC and metric correctness", 10, true, roc_metrics},
      {9, "end-to-end determinism and report shape", 2 * kRunLimit, true,
       [&] { return end_to_end(workdir); }},
      {10, "real dataset direction (soft)", 1e9, false,
       [&] { return real_dataset(workdir, dataset); }},
  };

  std::ofstream log(workdir / "acceptance_results.txt");
  bool all_ok = true;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.id))
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s < c.limit_seconds;
    const bool pass = o.pass && in_time;
    std::ostringstream line;
    const char* status = o.skipped ? "SKIP" : !c.gating ? "INFO" : pass ? "PASS" : "FAIL";
    line << "criterion " << std::setw(2) << c.id << ' ' << status
         << "  " << c.name << " (" << std::fixed << std::setprecision(2) << s << " s";
    if (c.limit_seconds < 1e8)
      line << ", limit " << std::setprecision(0) << c.limit_seconds << " s";
    line << "): " << o.detail;
    std::cout << line.str() << std::endl;
    log << line.str() << '\n';
    if (c.gating && !pass)
      all_ok = false;
  }
  return all_ok ? 0 : 1;
}
