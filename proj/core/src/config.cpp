#include "skyaug/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "skyaug/error.hpp"
#include "skyaug/format.hpp"

namespace skyaug {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_uint(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw UsageError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  throw UsageError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::string r2_mode_name(R2Mode m) { return m == R2Mode::pooled ? "pooled" : "per_image"; }

} // namespace

const std::vector<ConfigKeyDoc>& config_reference() {
  static const std::vector<ConfigKeyDoc> docs = {
      {"dataset", "'synthetic' or a directory with images/ (ppm, jpg, png) and GTmaps/"},
      {"manifest", "optional CSV (image_path,map_path,split) of R-B PGM files; overrides dataset"},
      {"synthetic.count", "number of procedural images when dataset = synthetic"},
      {"synthetic.seed", "seed of the procedural dataset"},
      {"side", "working resolution in pixels (multiple of 4)"},
      {"split.seed", "seed of the 60 / 15.65 / 24.35 split"},
      {"gan.batch_size", "GAN minibatch size"},
      {"gan.epochs", "GAN training epochs"},
      {"gan.learning_rate", "Adam learning rate for both networks"},
      {"gan.beta1", "Adam first-moment decay"},
      {"gan.beta2", "Adam second-moment decay"},
      {"gan.latent_dim", "generator input dimension"},
      {"gan.channels", "widest feature map of both networks"},
      {"gan.seed", "seed for weight init, shuffling and latent draws"},
      {"gan.dedupe_folds", "keep 8 distinct rotations/flips instead of all 16"},
      {"cluster.max_iters", "2-means iteration cap"},
      {"cluster.tol", "2-means centroid movement tolerance"},
      {"cluster.invert_cloud_rule", "label the darker cluster as cloud"},
      {"smooth.radius", "majority filter radius (window is 2r+1 square)"},
      {"smooth.max_passes", "majority filter pass cap"},
      {"candidates.count", "number of generated candidates"},
      {"candidates.seed", "latent seed of candidate 0; candidate i uses seed + i"},
      {"pls.max_comp", "largest n_comp in the sweep"},
      {"pls.r2_mode", "pooled or per_image"},
      {"filter.mode", "independent or sequential"},
      {"threshold.criterion", "youden, closest_to_corner or max_f_score"},
      {"output", "output directory for every artifact"},
  };
  return docs;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "dataset")
    dataset = v;
  else if (key == "manifest")
    manifest = v;
  else if (key == "synthetic.count")
    synthetic_count = parse_uint<std::size_t>(key, v);
  else if (key == "synthetic.seed")
    synthetic_seed = parse_uint<std::uint64_t>(key, v);
  else if (key == "side")
    side = parse_uint<std::size_t>(key, v);
  else if (key == "split.seed")
    split_seed = parse_uint<std::uint64_t>(key, v);
  else if (key == "gan.batch_size")
    gan.batch_size = parse_uint<std::size_t>(key, v);
  else if (key == "gan.epochs")
    gan.epochs = parse_uint<std::size_t>(key, v);
  else if (key == "gan.learning_rate")
    gan.adam.learning_rate = parse_real(key, v);
  else if (key == "gan.beta1")
    gan.adam.beta1 = parse_real(key, v);
  else if (key == "gan.beta2")
    gan.adam.beta2 = parse_real(key, v);
  else if (key == "gan.latent_dim")
    gan.latent_dim = parse_uint<std::size_t>(key, v);
  else if (key == "gan.channels")
    gan.channels = parse_uint<std::size_t>(key, v);
  else if (key == "gan.seed")
    gan.seed = parse_uint<std::uint64_t>(key, v);
  else if (key == "gan.dedupe_folds")
    dedupe_folds = parse_bool(key, v);
  else if (key == "cluster.max_iters")
    cluster.max_iters = parse_uint<std::size_t>(key, v);
  else if (key == "cluster.tol")
    cluster.tol = parse_real(key, v);
  else if (key == "cluster.invert_cloud_rule")
    cluster.invert_cloud_rule = parse_bool(key, v);
  else if (key == "smooth.radius")
    smooth.window_radius = parse_uint<std::size_t>(key, v);
  else if (key == "smooth.max_passes")
    smooth.max_passes = parse_uint<std::size_t>(key, v);
  else if (key == "candidates.count")
    candidates = parse_uint<std::size_t>(key, v);
  else if (key == "candidates.seed")
    candidate_seed = parse_uint<std::uint64_t>(key, v);
  else if (key == "pls.max_comp")
    pls_max_comp = parse_uint<std::size_t>(key, v);
  else if (key == "pls.r2_mode") {
    if (v == "pooled")
      r2_mode = R2Mode::pooled;
    else if (v == "per_image")
      r2_mode = R2Mode::per_row_mean;
    else
      throw UsageError("config key 'pls.r2_mode': expected pooled or per_image, got '" + v + "'");
  } else if (key == "filter.mode")
    filter_mode = parse_filter_mode(v);
  else if (key == "threshold.criterion")
    threshold = parse_threshold_criterion(v);
  else if (key == "output")
    output = v;
  else
    throw UsageError("unknown config key '" + key + "'");
}

std::map<std::string, std::string> PipelineConfig::snapshot() const {
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  auto u = [](std::uint64_t x) { return std::to_string(x); };
  return {
      {"dataset", dataset},
      {"manifest", manifest.generic_string()},
      {"synthetic.count", u(synthetic_count)},
      {"synthetic.seed", u(synthetic_seed)},
      {"side", u(side)},
      {"split.seed", u(split_seed)},
      {"gan.batch_size", u(gan.batch_size)},
      {"gan.epochs", u(gan.epochs)},
      {"gan.learning_rate", fmt_real(gan.adam.learning_rate)},
      {"gan.beta1", fmt_real(gan.adam.beta1)},
      {"gan.beta2", fmt_real(gan.adam.beta2)},
      {"gan.latent_dim", u(gan.latent_dim)},
      {"gan.channels", u(gan.channels)},
      {"gan.seed", u(gan.seed)},
      {"gan.dedupe_folds", b(dedupe_folds)},
      {"cluster.max_iters", u(cluster.max_iters)},
      {"cluster.tol", fmt_real(cluster.tol)},
      {"cluster.invert_cloud_rule", b(cluster.invert_cloud_rule)},
      {"smooth.radius", u(smooth.window_radius)},
      {"smooth.max_passes", u(smooth.max_passes)},
      {"candidates.count", u(candidates)},
      {"candidates.seed", u(candidate_seed)},
      {"pls.max_comp", u(pls_max_comp)},
      {"pls.r2_mode", r2_mode_name(r2_mode)},
      {"filter.mode", to_string(filter_mode)},
      {"threshold.criterion", to_string(threshold)},
      {"output", output.generic_string()},
  };
}

void PipelineConfig::validate() const {
  if (side < 8 || side % 4 != 0)
    throw UsageError("side must be a multiple of 4 and at least 8, got " + std::to_string(side));
  if (dataset != "synthetic" && dataset.empty() && manifest.empty())
    throw UsageError("dataset must be 'synthetic' or a directory");
  if (dataset == "synthetic" && synthetic_count < 3)
    throw UsageError("synthetic.count must be >= 3");
  TrainConfig g = gan;
  g.image_side = side;
  g.validate();
  if (smooth.window_radius < 1)
    throw UsageError("smooth.radius must be >= 1");
  if (pls_max_comp < 1)
    throw UsageError("pls.max_comp must be >= 1");
  if (output.empty())
    throw UsageError("output directory must be set");
}

void apply_config_text(PipelineConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  PipelineConfig cfg;
  apply_config_text(cfg, ss.str(), path.string());
  return cfg;
}

std::string render_config(const PipelineConfig& cfg) {
  const auto snap = cfg.snapshot();
  std::ostringstream out;
  for (const auto& doc : config_reference()) {
    out << "# " << doc.description << '\n';
    out << doc.key << " = " << snap.at(doc.key) << '\n';
  }
  return out.str();
}

} // namespace skyaug

namespace skyaug {
const char* library_version() { return SKYAUG_VERSION; }
} // namespace skyaug
