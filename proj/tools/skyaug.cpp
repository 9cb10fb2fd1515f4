// skyaug: staged GAN augmentation pipeline for night-sky cloud segmentation.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skyaug/config.hpp"
#include "skyaug/error.hpp"
#include "skyaug/pipeline.hpp"

namespace {

enum Exit { ok = 0, usage = 1, data = 2, stage_order = 3 };

skyaug::PipelineConfig build_config(const std::string& config_path,
                                    const std::vector<std::string>& overrides,
                                    const std::string& output) {
  skyaug::PipelineConfig cfg;
  if (!config_path.empty())
    cfg = skyaug::load_config(config_path);
  for (const auto& o : overrides) {
    auto eq = o.find('=');
    if (eq == std::string::npos)
      throw skyaug::UsageError("--set expects key=value, got '" + o + "'");
    skyaug::apply_config_text(cfg, o, "--set");
  }
  if (!output.empty())
    cfg.output = output;
  cfg.validate();
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"skyaug: GAN-based augmentation for night-time cloud segmentation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", skyaug::library_version());

  std::string config_path, output;
  std::vector<std::string> overrides;
  bool force = false, quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", overrides, "override one config key (key=value), repeatable");
    sub->add_option("-o,--output", output, "output directory (overrides config 'output')");
    sub->add_flag("-f,--force", force, "rerun even if inputs are unchanged");
    sub->add_flag("-q,--quiet", quiet, "suppress progress log");
  };

  std::vector<std::pair<CLI::App*, skyaug::Stage>> stage_cmds;
  const std::map<skyaug::Stage, std::string> help = {
      {skyaug::Stage::prepare, "load or synthesize the dataset and write the split manifest"},
      {skyaug::Stage::train_gan, "train the GAN on the 16-fold augmented training images"},
      {skyaug::Stage::sample_gan, "draw candidate images from the trained generator"},
      {skyaug::Stage::pseudolabel, "estimate cloud maps for the candidates by clustering"},
      {skyaug::Stage::tune_pls, "sweep PLS components and pick the best on validation R2"},
      {skyaug::Stage::filter, "accept candidates that do not lower validation R2"},
      {skyaug::Stage::train_final, "fit the baseline and augmented PLS models"},
      {skyaug::Stage::evaluate, "compare both models on the test split"},
      {skyaug::Stage::report, "collect plot data and SVG renderings"},
  };
  for (auto s : skyaug::all_stages()) {
    auto* sub = app.add_subcommand(skyaug::to_string(s), help.at(s));
    add_common(sub);
    stage_cmds.emplace_back(sub, s);
  }
  auto* run_cmd = app.add_subcommand("run", "run every stage in order");
  add_common(run_cmd);
  auto* defaults_cmd = app.add_subcommand("defaults", "print the documented config reference");
  add_common(defaults_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Exit::ok : Exit::usage;
  }

  try {
    auto cfg = build_config(config_path, overrides, output);
    if (defaults_cmd->parsed()) {
      std::cout << skyaug::render_config(cfg);
      return Exit::ok;
    }
    skyaug::Pipeline pipeline(cfg, quiet ? nullptr : &std::cerr);
    if (run_cmd->parsed()) {
      pipeline.run_all(force);
    } else {
      for (auto& [sub, stage] : stage_cmds)
        if (sub->parsed())
          pipeline.run(stage, force);
    }
    return Exit::ok;
  } catch (const skyaug::UsageError& e) {
    std::cerr << "skyaug: usage error: " << e.what() << '\n';
    return Exit::usage;
  } catch (const skyaug::StageOrderError& e) {
    std::cerr << "skyaug: stage order error: " << e.what() << '\n';
    return Exit::stage_order;
  } catch (const skyaug::DataError& e) {
    std::cerr << "skyaug: data error: " << e.what() << '\n';
    return Exit::data;
  } catch (const skyaug::Error& e) {
    std::cerr << "skyaug: " << e.what() << '\n';
    return Exit::data;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "skyaug: data error: " << e.what() << '\n';
    return Exit::data;
  }
}
