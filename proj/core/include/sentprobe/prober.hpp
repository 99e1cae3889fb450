#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sentprobe/embedding.hpp"
#include "sentprobe/lexicon.hpp"
#include "sentprobe/sentence_vectors.hpp"
#include "sentprobe/taskforge.hpp"

namespace sentprobe {

enum class ProbeMode { onehot, embedding_probe, random_sentence, random_probe };
std::string to_string(ProbeMode m);

struct FeatureMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major
  std::vector<int> labels;

  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }
};

// Feature layout: [sentence block | noun-probe block? | verb-probe block].
// Probe blocks are one-hot over the probe lemma inventory; embedding_probe
// swaps them for word vectors; the random modes substitute the named block
// with reproducible random vectors keyed by sentence id or lemma.
FeatureMatrix assemble_features(const TaskDataset& ds, bool use_test_split,
                                const SentenceVectorSet& vectors, ProbeMode mode,
                                const Lexicon& lex, const EmbeddingTable* word_table = nullptr,
                                std::uint64_t control_seed = 1);

struct MlpConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 10;           // epochs without dev-loss improvement
  double dev_fraction = 0.1;   // carved from the training split
  std::uint64_t seed = 1;
};

// Hidden width always equals the input width; no tuning.
struct MlpParams {
  int input_dim = 0;
  int hidden_dim = 0;
  std::vector<double> w1, b1;  // hidden x input, hidden
  std::vector<double> w2, b2;  // 2 x hidden, 2
};

struct TrainResult {
  MlpParams params;
  std::vector<double> train_loss;
  std::vector<double> dev_loss;
  int best_epoch = 0;
  double dev_accuracy = 0.0;
  std::vector<int> dev_indices;  // rows of the train matrix used as dev
};

TrainResult train_classifier(const FeatureMatrix& train, const MlpConfig& cfg);

struct EvalResult {
  double accuracy = 0.0;
  double class_accuracy[2] = {0.0, 0.0};
  int correct = 0;
  int total = 0;
};

EvalResult evaluate(const MlpParams& params, const FeatureMatrix& test);

// Softmax cross-entropy loss and parameter gradients on one batch; the
// trainer uses this routine, so finite differences against it validate the
// training path.
double mlp_loss_and_gradients(const MlpParams& params, const FeatureMatrix& batch,
                              const std::vector<int>& rows, MlpParams* grads);

struct ProbeCell {
  TaskKind task = TaskKind::semrole;
  std::string encoder;
  ProbeMode mode = ProbeMode::onehot;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double dev_accuracy = 0.0;
  int epochs_run = 0;
  double seconds = 0.0;  // wall time; informational, never serialized
  std::string error;     // non-empty when the cell failed
};

struct ProbeReport {
  std::vector<ProbeCell> cells;
  std::string config_hash;

  // mean over seeds; nullopt when every seed failed
  std::optional<double> mean_accuracy(TaskKind task, const std::string& encoder,
                                      ProbeMode mode) const;
  std::string render_grid() const;
  std::string to_jsonl() const;
  static ProbeReport from_jsonl(const std::string& text);
};

struct SuiteConfig {
  MlpConfig classifier;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  bool run_controls = true;
  bool run_probe_ablation = true;  // embedding-probe mode on content tasks
  std::string config_hash;
};

// Full task x encoder x mode grid. Cell failures are recorded in the cell
// and do not abort the remaining cells.
ProbeReport run_suite(const std::map<TaskKind, TaskDataset>& tasks,
                      const std::map<std::string, SentenceVectorSet>& encoders,
                      const Lexicon& lex, const SuiteConfig& cfg,
                      const EmbeddingTable* word_table = nullptr);

}  // namespace sentprobe
