#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sentprobe/generator.hpp"
#include "sentprobe/prober.hpp"
#include "sentprobe/seq_autoencoder.hpp"
#include "sentprobe/taskforge.hpp"

namespace sentprobe {

// One JSON config drives the whole pipeline. Every stage writes a manifest
// naming the config hash and the hashes of its inputs, so stale artifacts
// are detected by hash mismatch rather than timestamps.
struct TaskPipelineConfig {
  std::filesystem::path constraint_file;
  std::size_t train_size = 4000;
  std::size_t test_size = 1000;
  std::uint64_t pool_cap = 60000;
};

struct PipelineConfig {
  std::filesystem::path config_dir;  // directory of the config file
  std::filesystem::path out_dir = "out";
  std::filesystem::path vocabulary_file;
  std::uint64_t seed = 20260811;

  std::map<TaskKind, TaskPipelineConfig> tasks;
  struct CorpusPool {
    std::filesystem::path constraint_file;
    std::uint64_t pool_cap = 60000;
  };
  std::vector<CorpusPool> corpus_pools;
  std::size_t corpus_size = 50000;
  int corpus_min_adverb_run = 0;
  int corpus_max_adverb_run = 2;

  SplitPolicy split_policy;
  int negation_min_adverb_run = 1;
  int negation_max_adverb_run = 2;

  SkipgramConfig skipgram;
  SdaeConfig sdae;
  double sdae_min_reconstruction = 0.9;
  MlpConfig classifier;
  std::vector<std::uint64_t> probe_seeds{1, 2, 3};

  // Content hash over semantic fields and referenced file contents; output
  // paths do not participate, so relocating out_dir does not invalidate
  // artifacts.
  std::string config_hash;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

enum class Stage { generate, build_tasks, train_encoders, embed, probe, report };
std::string to_string(Stage s);
std::optional<Stage> stage_from_string(const std::string& s);
std::vector<Stage> all_stages();

struct StageResult {
  Stage stage = Stage::generate;
  std::vector<std::filesystem::path> artifacts;
  std::vector<std::string> notes;
};

struct EmbedOptions {
  // external vector files to ingest as additional encoders: tag -> path
  std::map<std::string, std::filesystem::path> imports;
};

StageResult run_stage(Stage stage, const PipelineConfig& cfg, const EmbedOptions& embed = {});
std::vector<StageResult> run_all_stages(const PipelineConfig& cfg, const EmbedOptions& embed = {});

// Artifact locations under cfg.out_dir.
std::filesystem::path pool_events_path(const PipelineConfig& cfg, const std::string& name);
std::filesystem::path pool_manifest_path(const PipelineConfig& cfg, const std::string& name);
std::filesystem::path dataset_tsv_path(const PipelineConfig& cfg, TaskKind task);
std::filesystem::path dataset_corpus_path(const PipelineConfig& cfg, TaskKind task);
std::filesystem::path dataset_manifest_path(const PipelineConfig& cfg, TaskKind task);
std::filesystem::path encoder_dir(const PipelineConfig& cfg);
std::filesystem::path embeddings_dir(const PipelineConfig& cfg);
std::filesystem::path report_jsonl_path(const PipelineConfig& cfg);
std::filesystem::path report_grid_path(const PipelineConfig& cfg);

}  // namespace sentprobe
