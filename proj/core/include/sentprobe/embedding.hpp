#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sentprobe {

struct EmbeddingTable {
  std::vector<std::string> forms;          // row order
  std::map<std::string, int> index;
  int dim = 0;
  std::vector<double> vectors;             // row-major, forms.size() x dim

  std::span<const double> row(int i) const {
    return {vectors.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  int lookup(const std::string& form) const;  // -1 when absent
};

struct SkipgramConfig {
  int dim = 64;
  int window = 2;           // fixed context radius
  int negatives = 5;
  int epochs = 8;
  double learning_rate = 0.025;
  double sample = 1e-3;     // frequent-form subsampling threshold; 0 disables
  int min_count = 50;
  std::uint64_t seed = 1;
};

struct SkipgramStats {
  std::vector<double> epoch_loss;  // mean negative log-likelihood per pair
};

// Skip-gram with negative sampling, single-threaded and seed-deterministic.
// Every corpus form must reach min_count occurrences; rare forms raise a
// TrainingError listing them.
EmbeddingTable train_skipgram(const std::vector<std::vector<std::string>>& corpus,
                              const SkipgramConfig& cfg, SkipgramStats* stats = nullptr);

// Loss and gradients for one (center, outputs, labels) example; the trainer
// steps through this same routine, so a finite-difference check of it
// covers the training path.
double sgns_objective(std::span<const double> center,
                      const std::vector<std::vector<double>>& outputs,
                      const std::vector<int>& labels, std::vector<double>* grad_center,
                      std::vector<std::vector<double>>* grad_outputs);

// Arithmetic mean of the token vectors. Tokens are summed in vocabulary-row
// order, which makes the result exactly permutation-invariant.
std::vector<double> bow_encode(std::span<const std::string> tokens, const EmbeddingTable& table);

void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_embedding_table(const std::filesystem::path& path);

}  // namespace sentprobe
