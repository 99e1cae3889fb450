#include <CLI11.hpp>
#include <iostream>

#include "sentprobe/errors.hpp"
#include "sentprobe/pipeline.hpp"
#include "sentprobe/util.hpp"

namespace {

struct CliOptions {
  std::string config;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  std::vector<std::string> imports;  // tag=path
};

sentprobe::PipelineConfig load_config(const CliOptions& opts) {
  sentprobe::PipelineConfig cfg = sentprobe::load_pipeline_config(opts.config);
  if (!opts.out_override.empty()) cfg.out_dir = opts.out_override;
  if (opts.has_seed_override) {
    cfg.seed = opts.seed_override;
    cfg.skipgram.seed = sentprobe::mix64(cfg.seed ^ 0x5caf0001ULL);
    cfg.sdae.seed = sentprobe::mix64(cfg.seed ^ 0x5dae0001ULL);
    cfg.config_hash = "c" + sentprobe::to_hex(sentprobe::fnv1a64(
                                cfg.config_hash + "|seed:" + std::to_string(cfg.seed)));
  }
  return cfg;
}

sentprobe::EmbedOptions parse_imports(const std::vector<std::string>& imports) {
  sentprobe::EmbedOptions options;
  for (const std::string& spec : imports) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos)
      throw sentprobe::Error("--import expects tag=path, got: " + spec);
    options.imports[spec.substr(0, eq)] = spec.substr(eq + 1);
  }
  return options;
}

int run(sentprobe::Stage stage, const CliOptions& opts) {
  const sentprobe::PipelineConfig cfg = load_config(opts);
  const sentprobe::StageResult result =
      sentprobe::run_stage(stage, cfg, parse_imports(opts.imports));
  for (const std::string& note : result.notes) std::cout << note << "\n";
  for (const auto& artifact : result.artifacts) std::cout << "wrote " << artifact.string() << "\n";
  if (stage == sentprobe::Stage::report) {
    std::cout << "\n" << sentprobe::read_file(sentprobe::report_grid_path(cfg));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"controlled sentence generation and embedding-probing workbench"};
  app.require_subcommand(0, 1);

  CliOptions opts;
  std::string stage_flag;
  app.add_option("--stage", stage_flag, "run a single stage by name (alternative to subcommands)");
  app.add_option("--config", opts.config, "pipeline config file (json)");
  app.add_option("--out", opts.out_override, "override the config's output directory");
  auto* seed_opt = app.add_option("--seed", opts.seed_override, "override the master seed");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "pipeline config file (json)")->required();
    sub->add_option("--out", opts.out_override, "override the config's output directory");
    sub->add_option("--seed", opts.seed_override, "override the master seed");
  };

  std::map<std::string, sentprobe::Stage> stage_of;
  for (sentprobe::Stage stage : sentprobe::all_stages()) {
    CLI::App* sub = app.add_subcommand(sentprobe::to_string(stage));
    add_common(sub);
    if (stage == sentprobe::Stage::embed) {
      sub->add_option("--import", opts.imports,
                      "ingest an external sentence-vector file as tag=path (repeatable)");
    }
    stage_of[sentprobe::to_string(stage)] = stage;
  }
  CLI::App* pipeline = app.add_subcommand("pipeline", "run every stage in order");
  add_common(pipeline);
  pipeline->add_option("--import", opts.imports, "external vectors as tag=path (repeatable)");

  CLI11_PARSE(app, argc, argv);
  opts.has_seed_override = seed_opt->count() > 0;
  for (const CLI::App* sub : app.get_subcommands()) {
    for (const CLI::Option* o : sub->get_options()) {
      if (o->get_name() == "--seed" && o->count() > 0) opts.has_seed_override = true;
    }
  }

  try {
    if (!stage_flag.empty()) {
      const auto stage = sentprobe::stage_from_string(stage_flag);
      if (!stage) {
        std::cerr << "unknown stage: " << stage_flag << "\n";
        return 2;
      }
      if (opts.config.empty()) {
        std::cerr << "--config is required\n";
        return 2;
      }
      return run(*stage, opts);
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 0;
    }
    const CLI::App* sub = app.get_subcommands().front();
    if (sub->get_name() == "pipeline") {
      const sentprobe::PipelineConfig cfg = load_config(opts);
      const auto results = sentprobe::run_all_stages(cfg, parse_imports(opts.imports));
      for (const auto& result : results) {
        std::cout << "[" << sentprobe::to_string(result.stage) << "]\n";
        for (const std::string& note : result.notes) std::cout << "  " << note << "\n";
      }
      std::cout << "\n" << sentprobe::read_file(sentprobe::report_grid_path(cfg));
      return 0;
    }
    return run(stage_of.at(sub->get_name()), opts);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
