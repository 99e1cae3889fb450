#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "sentprobe/errors.hpp"
#include "sentprobe/pipeline.hpp"
#include "sentprobe/util.hpp"

using namespace sentprobe;

namespace {

std::filesystem::path repo() { return SENTPROBE_REPO_DIR; }

// small config over the shipped vocabulary and constraints
std::filesystem::path write_tiny_config(const std::filesystem::path& dir,
                                        const std::filesystem::path& out_dir,
                                        std::uint64_t seed = 404) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path configs = repo() / "configs";
  std::string json = R"({
  "out_dir": ")" + out_dir.string() + R"(",
  "vocabulary": ")" + (configs / "vocabulary.tsv").string() + R"(",
  "seed": )" + std::to_string(seed) + R"(,
  "tasks": {
    "semrole":  {"constraint": ")" + (configs / "semrole.constraint").string() +
                     R"(", "train": 120, "test": 40, "pool_cap": 6000},
    "negation": {"constraint": ")" + (configs / "negation.constraint").string() +
                     R"(", "train": 120, "test": 40, "pool_cap": 6000},
    "content1": {"constraint": ")" + (configs / "content.constraint").string() +
                     R"(", "train": 120, "test": 40, "pool_cap": 6000},
    "content2": {"constraint": ")" + (configs / "content.constraint").string() +
                     R"(", "train": 120, "test": 40, "pool_cap": 6000},
    "order":    {"constraint": ")" + (configs / "order.constraint").string() +
                     R"(", "train": 120, "test": 40, "pool_cap": 6000}
  },
  "corpus": {"constraint": ")" + (configs / "corpus.constraint").string() +
                     R"(", "pool_cap": 6000, "size": 1200, "min_adverb_run": 0, "max_adverb_run": 2},
  "split_policy": {"semrole_pair_holdout_fraction": 0.2, "negation_heldout_adverbs": 3},
  "skipgram": {"dim": 16, "window": 2, "negatives": 5, "epochs": 2, "min_count": 1},
  "sdae": {"word_dim": 16, "hidden_dim": 24, "epochs": 3, "batch_size": 32,
           "target_accuracy": 0.99, "min_reconstruction_accuracy": 0.0},
  "classifier": {"max_epochs": 12, "patience": 3},
  "probe_seeds": [1]
})";
  const std::filesystem::path path = dir / "tiny.json";
  atomic_write_file(path, json);
  return path;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("pipeline: full run, ordering errors, staleness, determinism") {
  const auto dir = fresh_dir("sentprobe_pipeline_test");
  const auto out = dir / "out";
  const auto config_path = write_tiny_config(dir, out);
  const PipelineConfig cfg = load_pipeline_config(config_path);

  // running a late stage first reports the missing input and its producer
  try {
    run_stage(Stage::probe, cfg);
    FAIL("expected PipelineError");
  } catch (const PipelineError& ex) {
    const std::string msg = ex.what();
    CHECK(msg.find("missing input") != std::string::npos);
    CHECK(msg.find("build-tasks") != std::string::npos);
  }

  for (Stage stage : all_stages()) {
    CAPTURE(to_string(stage));
    const StageResult result = run_stage(stage, cfg);
    for (const auto& artifact : result.artifacts) CHECK(std::filesystem::exists(artifact));
  }
  CHECK(std::filesystem::exists(report_jsonl_path(cfg)));
  CHECK(std::filesystem::exists(report_grid_path(cfg)));

  // every probe cell succeeded
  const ProbeReport report = ProbeReport::from_jsonl(read_file(report_jsonl_path(cfg)));
  REQUIRE_FALSE(report.cells.empty());
  for (const ProbeCell& c : report.cells) {
    CAPTURE(to_string(c.task) + "/" + c.encoder + "/" + to_string(c.mode));
    CHECK(c.error.empty());
  }

  // rerun from the same config: the final report is byte-identical
  const std::string report_bytes = read_file(report_jsonl_path(cfg));
  const std::string grid_bytes = read_file(report_grid_path(cfg));
  const std::string dataset_bytes = read_file(dataset_tsv_path(cfg, TaskKind::semrole));
  const std::string bow_bytes = read_file(embeddings_dir(cfg) / "bow.vec");
  for (Stage stage : all_stages()) run_stage(stage, cfg);
  CHECK(read_file(report_jsonl_path(cfg)) == report_bytes);
  CHECK(read_file(report_grid_path(cfg)) == grid_bytes);
  CHECK(read_file(dataset_tsv_path(cfg, TaskKind::semrole)) == dataset_bytes);
  CHECK(read_file(embeddings_dir(cfg) / "bow.vec") == bow_bytes);

  // a config change invalidates downstream artifacts by hash mismatch
  const auto config2 = write_tiny_config(dir, out, 405);
  const PipelineConfig changed = load_pipeline_config(config2);
  CHECK(changed.config_hash != cfg.config_hash);
  try {
    run_stage(Stage::build_tasks, changed);
    FAIL("expected PipelineError");
  } catch (const PipelineError& ex) {
    CHECK(std::string(ex.what()).find("stale input") != std::string::npos);
  }
}

TEST_CASE("pipeline: embed imports validate coverage and reject tag collisions") {
  const auto dir = fresh_dir("sentprobe_pipeline_import");
  const auto config_path = write_tiny_config(dir, dir / "out");
  const PipelineConfig cfg = load_pipeline_config(config_path);
  run_stage(Stage::generate, cfg);
  run_stage(Stage::build_tasks, cfg);
  run_stage(Stage::train_encoders, cfg);

  EmbedOptions bad_tag;
  bad_tag.imports["bow"] = dir / "whatever.vec";
  CHECK_THROWS_AS(run_stage(Stage::embed, cfg, bad_tag), PipelineError);

  // an import must cover every task sentence id
  atomic_write_file(dir / "partial.vec", "1 3\nsdeadbeef 1 2 3\n");
  EmbedOptions partial;
  partial.imports["ext"] = dir / "partial.vec";
  try {
    run_stage(Stage::embed, cfg, partial);
    FAIL("expected PipelineError");
  } catch (const PipelineError& ex) {
    CHECK(std::string(ex.what()).find("no vector for sentence id") != std::string::npos);
  }

  // a full import becomes a probeable encoder
  run_stage(Stage::embed, cfg);
  const SentenceVectorSet bow = load_vectors(embeddings_dir(cfg) / "bow.vec", "bow");
  SentenceVectorSet ext;
  ext.encoder = "ext";
  ext.dim = bow.dim;
  Rng rng(1);
  for (const SentenceVector& v : bow.vectors) {
    SentenceVector copy = v;
    for (double& x : copy.values) x += 0.001 * rng.normal();
    ext.add(std::move(copy));
  }
  save_vectors(ext, dir / "ext.vec");
  EmbedOptions good;
  good.imports["ext"] = dir / "ext.vec";
  run_stage(Stage::embed, cfg, good);
  CHECK(std::filesystem::exists(embeddings_dir(cfg) / "ext.vec"));
  run_stage(Stage::probe, cfg);
  const ProbeReport report = ProbeReport::from_jsonl(read_file(report_jsonl_path(cfg)));
  bool saw_ext = false;
  for (const ProbeCell& c : report.cells) saw_ext |= c.encoder == "ext";
  CHECK(saw_ext);
}

TEST_CASE("cli: stage subcommands run end to end") {
  const auto dir = fresh_dir("sentprobe_cli_test");
  const auto config_path = write_tiny_config(dir, dir / "out");
  const std::string bin = SENTPROBE_CLI_PATH;

  // ordering error surfaces as a nonzero exit
  const std::string premature =
      bin + " probe --config " + config_path.string() + " >/dev/null 2>&1";
  CHECK(std::system(premature.c_str()) != 0);

  for (const char* sub : {"generate", "build-tasks", "train-encoders", "embed", "probe"}) {
    const std::string cmd =
        bin + " " + sub + " --config " + config_path.string() + " >/dev/null 2>&1";
    CAPTURE(sub);
    REQUIRE(std::system(cmd.c_str()) == 0);
  }
  // --stage spelling of the same interface
  const std::string with_flag =
      bin + " --stage report --config " + config_path.string() + " >/dev/null 2>&1";
  CHECK(std::system(with_flag.c_str()) == 0);

  const PipelineConfig cfg = load_pipeline_config(config_path);
  CHECK(std::filesystem::exists(report_grid_path(cfg)));
}
