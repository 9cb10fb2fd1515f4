#include "skyaug/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "skyaug/augment.hpp"
#include "skyaug/checkpoint.hpp"
#include "skyaug/error.hpp"
#include "skyaug/format.hpp"
#include "skyaug/imageio.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace skyaug {

// ---------------------------------------------------------------------------
// Stage table

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {Stage::prepare,  Stage::train_gan,   Stage::sample_gan,
                                            Stage::pseudolabel, Stage::tune_pls, Stage::filter,
                                            Stage::train_final, Stage::evaluate, Stage::report};
  return stages;
}

std::string to_string(Stage s) {
  switch (s) {
  case Stage::prepare:
    return "prepare";
  case Stage::train_gan:
    return "train-gan";
  case Stage::sample_gan:
    return "sample-gan";
  case Stage::pseudolabel:
    return "pseudolabel";
  case Stage::tune_pls:
    return "tune-pls";
  case Stage::filter:
    return "filter";
  case Stage::train_final:
    return "train-final";
  case Stage::evaluate:
    return "evaluate";
  case Stage::report:
    return "report";
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  for (auto s : all_stages())
    if (to_string(s) == name)
      return s;
  throw UsageError("unknown stage '" + name + "'");
}

namespace {

struct StageSpec {
  std::vector<Stage> deps;
  std::vector<std::string> keys; ///< config keys that feed the stage
  std::string primary;           ///< artifact named in stage-order errors
};

const StageSpec& spec(Stage s) {
  static const std::map<Stage, StageSpec> table = {
      {Stage::prepare,
       {{}, {"dataset", "manifest", "synthetic.count", "synthetic.seed", "side", "split.seed"},
        "split.csv"}},
      {Stage::train_gan,
       {{Stage::prepare},
        {"gan.batch_size", "gan.epochs", "gan.learning_rate", "gan.beta1", "gan.beta2",
         "gan.latent_dim", "gan.channels", "gan.seed", "gan.dedupe_folds"},
        "gan/generator.ckpt"}},
      {Stage::sample_gan, {{Stage::train_gan}, {"candidates.count", "candidates.seed"}, "samples/samples.csv"}},
      {Stage::pseudolabel,
       {{Stage::sample_gan},
        {"cluster.max_iters", "cluster.tol", "cluster.invert_cloud_rule", "smooth.radius",
         "smooth.max_passes"},
        "candidates/candidates.csv"}},
      {Stage::tune_pls, {{Stage::prepare}, {"pls.max_comp", "pls.r2_mode"}, "pls/sweep.csv"}},
      {Stage::filter,
       {{Stage::prepare, Stage::pseudolabel, Stage::tune_pls},
        {"filter.mode", "pls.r2_mode"},
        "filter/decisions.csv"}},
      {Stage::train_final,
       {{Stage::prepare, Stage::pseudolabel, Stage::tune_pls, Stage::filter}, {}, "models/pls_baseline.ckpt"}},
      {Stage::evaluate,
       {{Stage::prepare, Stage::pseudolabel, Stage::filter, Stage::train_final},
        {"threshold.criterion", "pls.r2_mode"},
        "eval/comparison.csv"}},
      {Stage::report, {{Stage::tune_pls, Stage::filter, Stage::evaluate}, {}, "report/tables.txt"}},
  };
  return table.at(s);
}

std::string indexed(const char* pattern, std::size_t i) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, i);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (header) {
      header = false;
      continue;
    }
    if (line.empty())
      continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');)
      fields.push_back(f);
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  return out;
}

// Minimal SVG line plot for the report bundle.
struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool markers_only = false;
};

void write_svg_plot(const fs::path& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<Series>& series,
                    std::optional<double> hline = std::nullopt) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y))
        continue;
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  if (hline)
    y0 = std::min(y0, *hline), y1 = std::max(y1, *hline);
  if (!(x1 > x0))
    x1 = x0 + 1;
  if (!(y1 > y0))
    y1 = y0 + 1;
  const double W = 480, H = 360, L = 60, R = 20, T = 30, Bm = 45;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - Bm - (y - y0) / (y1 - y0) * (H - T - Bm); };

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - Bm << "\" x2=\"" << W - R << "\" y2=\"" << H - Bm << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - Bm << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"11\">" << xlabel << "</text>\n";
  out << "<text x=\"14\" y=\"" << H / 2 << "\" font-size=\"11\" transform=\"rotate(-90 14 " << H / 2 << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  out << "<text x=\"" << L - 4 << "\" y=\"" << py(y0) << "\" text-anchor=\"end\" font-size=\"9\">" << fmt_real(y0) << "</text>\n";
  out << "<text x=\"" << L - 4 << "\" y=\"" << py(y1) + 8 << "\" text-anchor=\"end\" font-size=\"9\">" << fmt_real(y1) << "</text>\n";
  out << "<text x=\"" << L << "\" y=\"" << H - Bm + 12 << "\" font-size=\"9\">" << fmt_real(x0) << "</text>\n";
  out << "<text x=\"" << W - R << "\" y=\"" << H - Bm + 12 << "\" text-anchor=\"end\" font-size=\"9\">" << fmt_real(x1) << "</text>\n";
  if (hline)
    out << "<line x1=\"" << L << "\" y1=\"" << py(*hline) << "\" x2=\"" << W - R << "\" y2=\"" << py(*hline)
        << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  double legend_y = T + 6;
  for (const auto& s : series) {
    if (s.markers_only) {
      for (auto [x, y] : s.points)
        if (std::isfinite(x) && std::isfinite(y))
          out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"";
      for (auto [x, y] : s.points)
        if (std::isfinite(x) && std::isfinite(y))
          out << px(x) << ',' << py(y) << ' ';
      out << "\"/>\n";
    }
    out << "<text x=\"" << W - R - 4 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" font-size=\"10\" fill=\"" << s.color << "\">" << s.name << "</text>\n";
    legend_y += 13;
  }
  out << "</svg>\n";
}

} // namespace

// ---------------------------------------------------------------------------
// Hashing

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// ---------------------------------------------------------------------------
// Pipeline state: the run manifest plus loaders shared by the stages.

struct Pipeline::State {
  json manifest = json::object();
  std::vector<std::string> written; // outputs of the stage in progress

  void record(const std::string& rel) { written.push_back(rel); }
};

Pipeline::Pipeline(PipelineConfig cfg, std::ostream* log)
    : cfg_(std::move(cfg)), log_(log), state_(std::make_unique<State>()) {
  cfg_.validate();
  const fs::path mpath = artifact("run_manifest.json");
  if (fs::exists(mpath)) {
    std::ifstream in(mpath);
    try {
      state_->manifest = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError("malformed run manifest " + mpath.string() + ": " + e.what());
    }
  }
}

Pipeline::~Pipeline() = default;

namespace {

struct Prepared {
  std::vector<LabeledImage> train, val, test;
};

Prepared load_prepared(const fs::path& out) {
  Prepared p;
  for (const auto& e : read_manifest(out / "split.csv")) {
    LabeledImage item{load_image_file(e.image_path), load_map_file(e.map_path)};
    switch (e.split) {
    case SplitRole::train:
      p.train.push_back(std::move(item));
      break;
    case SplitRole::val:
      p.val.push_back(std::move(item));
      break;
    case SplitRole::test:
      p.test.push_back(std::move(item));
      break;
    }
  }
  if (p.train.empty() || p.val.empty() || p.test.empty())
    throw DataError("split.csv must contain train, val and test records");
  return p;
}

std::vector<Candidate> load_candidates(const fs::path& out) {
  std::vector<Candidate> cands;
  for (const auto& row : read_csv(out / "candidates" / "candidates.csv")) {
    if (row.size() != 5)
      throw DataError("malformed candidates.csv record");
    Candidate c;
    c.provenance.index = std::stoul(row[0]);
    c.image = load_image_file(out / row[1]);
    c.map = load_map_file(out / row[2]);
    c.provenance.generator_id = row[3];
    c.provenance.latent_seed = std::stoull(row[4]);
    cands.push_back(std::move(c));
  }
  return cands;
}

std::size_t load_chosen_ncomp(const fs::path& out) {
  const auto rows = read_csv(out / "pls" / "selection.csv");
  if (rows.empty() || rows.front().empty())
    throw DataError("pls/selection.csv is empty");
  return std::stoul(rows.front()[0]);
}

std::vector<std::size_t> load_accepted(const fs::path& out) {
  std::vector<std::size_t> ids;
  for (const auto& row : read_csv(out / "filter" / "accepted.csv"))
    ids.push_back(std::stoul(row.at(0)));
  return ids;
}

Dataset augmented_dataset(const Prepared& p, const std::vector<Candidate>& cands,
                          const std::vector<std::size_t>& accepted) {
  std::vector<LabeledImage> items;
  for (auto id : accepted) {
    auto it = std::ranges::find_if(cands, [&](const Candidate& c) { return c.provenance.index == id; });
    if (it == cands.end())
      throw DataError("accepted candidate " + std::to_string(id) + " not found in candidates.csv");
    items.push_back({it->image, it->map});
  }
  const Dataset base = make_dataset(p.train);
  return items.empty() ? base : union_samples(base, make_dataset(items));
}

std::string stage_input_hash(const PipelineConfig& cfg, Stage s, const json& manifest) {
  std::ostringstream material;
  material << "stage=" << to_string(s) << '\n';
  const auto snap = cfg.snapshot();
  for (const auto& k : spec(s).keys)
    material << k << '=' << snap.at(k) << '\n';
  for (auto dep : spec(s).deps)
    material << to_string(dep) << ':' << manifest["stages"][to_string(dep)]["outputs"].dump() << '\n';
  return sha256_hex(material.str());
}

} // namespace

std::vector<StageResult> Pipeline::run_all(bool force) {
  std::vector<StageResult> results;
  for (auto s : all_stages())
    results.push_back(run(s, force));
  return results;
}

StageResult Pipeline::run(Stage stage, bool force) {
  const std::string name = to_string(stage);
  json& stages = state_->manifest["stages"];
  const fs::path out = cfg_.output;

  // Upstream artifacts must exist and match what their stage recorded.
  for (auto dep : spec(stage).deps) {
    const std::string dep_name = to_string(dep);
    if (!stages.contains(dep_name))
      throw StageOrderError("missing artifact " + (out / spec(dep).primary).string() + " (run '" +
                            dep_name + "' before '" + name + "')");
    for (const auto& [rel, hash] : stages[dep_name]["outputs"].items()) {
      const fs::path p = out / rel;
      if (!fs::exists(p))
        throw StageOrderError("missing artifact " + p.string() + " (rerun '" + dep_name + "')");
      if (sha256_file(p) != hash.get<std::string>())
        throw StageOrderError("artifact " + p.string() + " changed since '" + dep_name +
                              "' wrote it (rerun '" + dep_name + "')");
    }
  }

  const std::string input_hash = stage_input_hash(cfg_, stage, state_->manifest);
  if (!force && stages.contains(name) && stages[name]["input_hash"] == input_hash) {
    bool intact = true;
    for (const auto& [rel, hash] : stages[name]["outputs"].items()) {
      const fs::path p = out / rel;
      if (!fs::exists(p) || sha256_file(p) != hash.get<std::string>()) {
        intact = false;
        break;
      }
    }
    if (intact) {
      if (log_)
        *log_ << "[skyaug] " << name << ": up to date, skipped\n";
      return {stage, true, 0.0};
    }
  }

  if (log_)
    *log_ << "[skyaug] " << name << ": running\n";
  state_->written.clear();
  const auto t0 = std::chrono::steady_clock::now();
  json seeds = json::object();

  switch (stage) {
  case Stage::prepare: {
    std::vector<LabeledImage> items;
    std::vector<SplitRole> roles;
    if (!cfg_.manifest.empty()) {
      for (const auto& e : read_manifest(cfg_.manifest)) {
        if (!fs::exists(e.image_path))
          throw DataError("dataset file not found: " + e.image_path.string());
        items.push_back({resize_box(load_image_file(e.image_path), cfg_.side, cfg_.side),
                         resize_box(load_map_file(e.map_path), cfg_.side, cfg_.side)});
        roles.push_back(e.split);
      }
      if (items.empty())
        throw DataError("manifest " + cfg_.manifest.string() + " lists no images");
    } else {
      if (cfg_.dataset == "synthetic") {
        items = synth_dataset(cfg_.synthetic_count, cfg_.side, cfg_.synthetic_seed);
        seeds["synthetic.seed"] = cfg_.synthetic_seed;
      } else {
        if (!fs::exists(cfg_.dataset))
          throw DataError("dataset path not found: " + cfg_.dataset);
        for (auto& it : load_rgb_dataset(cfg_.dataset))
          items.push_back({resize_box(it.image, cfg_.side, cfg_.side),
                           resize_box(it.map, cfg_.side, cfg_.side)});
      }
      const auto split = split_dataset(items.size(), cfg_.split_seed);
      seeds["split.seed"] = cfg_.split_seed;
      roles.assign(items.size(), SplitRole::train);
      for (auto i : split.val_ids)
        roles[i] = SplitRole::val;
      for (auto i : split.test_ids)
        roles[i] = SplitRole::test;
    }
    fs::remove_all(out / "data");
    std::vector<ManifestEntry> entries;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto img = indexed("data/image_%03zu.pgm", i);
      const auto map = indexed("data/map_%03zu.pgm", i);
      save_image_file(items[i].image, out / img);
      save_map_file(items[i].map, out / map);
      state_->record(img);
      state_->record(map);
      entries.push_back({img, map, roles[i]});
    }
    write_manifest(entries, out / "split.csv");
    state_->record("split.csv");
    if (log_) {
      const auto n = [&](SplitRole r) { return std::ranges::count(roles, r); };
      *log_ << "[skyaug] prepare: " << items.size() << " images, split " << n(SplitRole::train)
            << '/' << n(SplitRole::val) << '/' << n(SplitRole::test) << '\n';
    }
    break;
  }

  case Stage::train_gan: {
    const auto prepared = load_prepared(out);
    std::vector<NormalizedImage> data;
    for (const auto& item : prepared.train)
      for (const auto& img : sixteen_fold(item.image, cfg_.dedupe_folds))
        data.push_back(normalize(img));
    TrainConfig tc = cfg_.gan;
    tc.image_side = cfg_.side;
    seeds["gan.seed"] = tc.seed;
    const std::size_t every = std::max<std::size_t>(1, tc.epochs / 10);
    auto result = train_gan(data, tc, [&](std::size_t epoch, const GeneratorNet&) {
      if (log_ && (epoch % every == 0 || epoch == tc.epochs))
        *log_ << "[skyaug] train-gan: epoch " << epoch << '/' << tc.epochs << '\n';
    });
    save_checkpoint(to_checkpoint(result.generator), out / "gan/generator.ckpt");
    save_checkpoint(to_checkpoint(result.discriminator), out / "gan/discriminator.ckpt");
    write_loss_csv(result.loss_history, out / "gan/loss.csv");
    for (const char* rel : {"gan/generator.ckpt", "gan/discriminator.ckpt", "gan/loss.csv"})
      state_->record(rel);
    break;
  }

  case Stage::sample_gan: {
    const auto gen = generator_from_checkpoint(load_checkpoint(out / "gan/generator.ckpt"));
    const std::string gen_id = sha256_file(out / "gan/generator.ckpt").substr(0, 16);
    fs::remove_all(out / "samples");
    auto csv = open_out(out / "samples/samples.csv");
    csv << "id,image_path,generator_id,latent_seed\n";
    for (std::size_t i = 0; i < cfg_.candidates; ++i) {
      const std::uint64_t seed = cfg_.candidate_seed + i;
      const auto rel = indexed("samples/sample_%03zu.pgm", i);
      save_image_file(sample(gen, 1, seed).front(), out / rel);
      state_->record(rel);
      csv << i << ',' << rel << ',' << gen_id << ',' << seed << '\n';
    }
    csv.close();
    state_->record("samples/samples.csv");
    seeds["candidates.seed"] = cfg_.candidate_seed;
    break;
  }

  case Stage::pseudolabel: {
    fs::remove_all(out / "candidates");
    auto csv = open_out(out / "candidates/candidates.csv");
    csv << "id,image_path,map_path,generator_id,latent_seed\n";
    for (const auto& row : read_csv(out / "samples/samples.csv")) {
      if (row.size() != 4)
        throw DataError("malformed samples.csv record");
      const std::size_t id = std::stoul(row[0]);
      const auto img = load_image_file(out / row[1]);
      const auto rel = indexed("candidates/map_%03zu.pgm", id);
      save_map_file(estimate_map(img, cfg_.cluster, cfg_.smooth), out / rel);
      state_->record(rel);
      csv << id << ',' << row[1] << ',' << rel << ',' << row[2] << ',' << row[3] << '\n';
    }
    csv.close();
    state_->record("candidates/candidates.csv");
    break;
  }

  case Stage::tune_pls: {
    const auto prepared = load_prepared(out);
    const auto report = sweep_ncomp(make_dataset(prepared.train), make_dataset(prepared.val),
                                    cfg_.pls_max_comp, cfg_.r2_mode);
    fs::create_directories(out / "pls");
    write_sweep_csv(report, out / "pls/sweep.csv");
    auto sel = open_out(out / "pls/selection.csv");
    sel << "chosen_n_comp,r2_val\n"
        << report.chosen << ',' << fmt_real(report.rows[report.chosen - 1].r2_val) << '\n';
    sel.close();
    state_->record("pls/sweep.csv");
    state_->record("pls/selection.csv");
    if (log_)
      *log_ << "[skyaug] tune-pls: chosen n_comp = " << report.chosen << '\n';
    break;
  }

  case Stage::filter: {
    const auto prepared = load_prepared(out);
    auto cands = load_candidates(out);
    PlsConfig pc{load_chosen_ncomp(out), cfg_.r2_mode, {}};
    const auto res = filter_candidates(make_dataset(prepared.train), make_dataset(prepared.val),
                                       cands, pc, cfg_.filter_mode);
    fs::create_directories(out / "filter");
    write_filter_csv(res.report, out / "filter/decisions.csv");
    auto acc = open_out(out / "filter/accepted.csv");
    acc << "candidate_id\n";
    for (auto id : res.accepted_ids)
      acc << id << '\n';
    acc.close();
    state_->record("filter/decisions.csv");
    state_->record("filter/accepted.csv");
    if (log_)
      *log_ << "[skyaug] filter: " << res.report.accepted_count << " of " << cands.size()
            << " candidates favorable (baseline val R2 " << fmt_real(res.report.baseline_r2_val)
            << ")\n";
    break;
  }

  case Stage::train_final: {
    const auto prepared = load_prepared(out);
    const auto n_comp = load_chosen_ncomp(out);
    const auto base = make_dataset(prepared.train);
    const auto aug = augmented_dataset(prepared, load_candidates(out), load_accepted(out));
    save_checkpoint(to_checkpoint(fit_pls2(base.X, base.Y, n_comp)), out / "models/pls_baseline.ckpt");
    save_checkpoint(to_checkpoint(fit_pls2(aug.X, aug.Y, n_comp)), out / "models/pls_augmented.ckpt");
    state_->record("models/pls_baseline.ckpt");
    state_->record("models/pls_augmented.ckpt");
    break;
  }

  case Stage::evaluate: {
    const auto prepared = load_prepared(out);
    const auto cands = load_candidates(out);
    const auto accepted = load_accepted(out);
    const auto test = make_dataset(prepared.test);
    struct Case {
      const char* name;
      const char* model;
      Dataset train;
    };
    std::vector<Case> cases = {
        {kWithoutAugmentation, "models/pls_baseline.ckpt", make_dataset(prepared.train)},
        {kAfterAugmentation, "models/pls_augmented.ckpt", augmented_dataset(prepared, cands, accepted)},
    };
    fs::remove_all(out / "eval");
    std::vector<ComparisonRow> rows;
    std::size_t single_class = 0;
    for (const auto& c : cases) {
      const auto model = pls_from_checkpoint(load_checkpoint(out / c.model));
      const auto rep = evaluate_model(model, c.train, test, cfg_.threshold, cfg_.r2_mode);
      const std::string metrics = std::string("eval/metrics_") + c.name + ".csv";
      fs::create_directories(out / "eval");
      write_metrics_csv(rep, out / metrics);
      state_->record(metrics);
      for (const auto& im : rep.images) {
        const auto rel = std::string("eval/roc/") + c.name + indexed("/image_%03zu.csv", im.index);
        fs::create_directories((out / rel).parent_path());
        write_roc_csv(im.roc, out / rel);
        state_->record(rel);
      }
      rows.push_back({c.name, rep.r2_train, rep.r2_test, rep.mean});
      single_class = rep.single_class_images;
    }
    write_comparison_csv(rows, out / "eval/comparison.csv");
    state_->record("eval/comparison.csv");

    auto txt = open_out(out / "eval/summary.txt");
    auto col = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 1, ' '); };
    txt << "Coefficient of determination (R^2)\n";
    txt << col("case", 24) << col("r2_train", 12) << "r2_test\n";
    for (const auto& r : rows)
      txt << col(r.case_name, 24) << col(fmt_real(r.r2_train), 12) << fmt_real(r.r2_test) << '\n';
    txt << "\nPrecision / recall / F-score (mean over test images)\n";
    txt << col("case", 24) << col("precision", 16) << col("recall", 16) << "f_score\n";
    for (const auto& r : rows)
      txt << col(r.case_name, 24) << col(fmt_real(r.prf.precision), 16)
          << col(fmt_real(r.prf.recall), 16) << fmt_real(r.prf.f_score) << '\n';
    const bool f_up = rows[1].prf.f_score > rows[0].prf.f_score;
    const bool r2_up = rows[1].r2_test > rows[0].r2_test;
    txt << "\nAugmentation accepted " << accepted.size() << " of " << cands.size()
        << " generated candidates (filter mode " << to_string(cfg_.filter_mode)
        << ", n_comp " << load_chosen_ncomp(out) << ").\n";
    txt << "F-score improves with augmentation: " << (f_up ? "yes" : "no")
        << " (expected direction: improvement)\n";
    txt << "Test R^2 improves with augmentation: " << (r2_up ? "yes" : "no")
        << " (expected direction: improvement)\n";
    txt << "\nNote: each test image's threshold is the " << to_string(cfg_.threshold)
        << "-optimal point of its own ROC curve, chosen with that image's ground truth.\n"
        << "Precision, recall and F-score therefore use test labels for threshold selection.\n"
        << "Test images with a single ground-truth class: " << single_class
        << " (flagged in the metrics CSVs).\n"
        << "after_augmentation r2_train is measured on the augmented training set.\n";
    txt.close();
    state_->record("eval/summary.txt");
    break;
  }

  case Stage::report: {
    fs::remove_all(out / "report");
    fs::create_directories(out / "report");
    auto copy = [&](const std::string& from, const std::string& to) {
      fs::create_directories((out / to).parent_path());
      fs::copy_file(out / from, out / to, fs::copy_options::overwrite_existing);
      state_->record(to);
    };
    copy("pls/sweep.csv", "report/ncomp_sweep.csv");
    copy("filter/decisions.csv", "report/filter_decisions.csv");
    copy("eval/comparison.csv", "report/comparison.csv");
    copy("eval/summary.txt", "report/tables.txt");
    for (const char* c : {kWithoutAugmentation, kAfterAugmentation}) {
      const fs::path dir = out / "eval/roc" / c;
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir))
        files.push_back(e.path());
      std::ranges::sort(files);
      for (const auto& f : files)
        copy((fs::path("eval/roc") / c / f.filename()).generic_string(),
             (fs::path("report/roc") / c / f.filename()).generic_string());
    }

    // Plot renderings.
    Series train{"train R2", "#1f77b4", {}}, val{"validation R2", "#d62728", {}};
    for (const auto& r : read_csv(out / "pls/sweep.csv")) {
      train.points.emplace_back(std::stod(r[0]), std::stod(r[1]));
      val.points.emplace_back(std::stod(r[0]), std::stod(r[2]));
    }
    write_svg_plot(out / "report/ncomp_sweep.svg", "PLS components vs R2", "n_comp", "R2", {train, val});
    state_->record("report/ncomp_sweep.svg");

    Series fav{"favorable", "#2ca02c", {}, true}, unfav{"unfavorable", "#d62728", {}, true};
    double base = 0.0;
    for (const auto& r : read_csv(out / "filter/decisions.csv")) {
      (r[2] == "favorable" ? fav : unfav).points.emplace_back(std::stod(r[0]), std::stod(r[1]));
      base = std::stod(r[3]);
    }
    write_svg_plot(out / "report/filter_decisions.svg", "Validation R2 with each candidate",
                   "candidate", "R2 (val)", {fav, unfav}, base);
    state_->record("report/filter_decisions.svg");

    const fs::path roc_dir = out / "eval/roc" / kWithoutAugmentation;
    std::vector<fs::path> roc_files;
    for (const auto& e : fs::directory_iterator(roc_dir))
      roc_files.push_back(e.path().filename());
    std::ranges::sort(roc_files);
    for (const auto& f : roc_files) {
      std::vector<Series> curves;
      for (auto [c, color] : {std::pair{kWithoutAugmentation, "#1f77b4"}, std::pair{kAfterAugmentation, "#d62728"}}) {
        Series s{c, color, {}};
        for (const auto& r : read_csv(out / "eval/roc" / c / f))
          s.points.emplace_back(std::stod(r[1]), std::stod(r[2]));
        curves.push_back(std::move(s));
      }
      auto rel = (fs::path("report/roc") / f.stem()).generic_string() + ".svg";
      write_svg_plot(out / rel, "ROC " + f.stem().string(), "false positive rate",
                     "true positive rate", curves);
      state_->record(rel);
    }
    break;
  }
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json outputs = json::object();
  for (const auto& rel : state_->written)
    outputs[rel] = sha256_file(out / rel);

  // Downstream records built from older outputs are now stale; their input
  // hashes will no longer match and they rerun on the next request.
  stages[name] = {{"input_hash", input_hash}, {"outputs", outputs}, {"wall_seconds", seconds},
                  {"seeds", seeds}};
  state_->manifest["library_version"] = SKYAUG_VERSION;
  state_->manifest["config"] = cfg_.snapshot();
  fs::create_directories(out);
  std::ofstream mf(artifact("run_manifest.json"));
  mf << state_->manifest.dump(2) << '\n';
  if (log_)
    *log_ << "[skyaug] " << name << ": done in " << std::fixed << std::setprecision(2) << seconds
          << " s\n" << std::defaultfloat;
  return {stage, false, seconds};
}

} // namespace skyaug
