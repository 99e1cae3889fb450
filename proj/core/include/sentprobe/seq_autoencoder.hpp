#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sentprobe {

// Single-layer gated-recurrent encoder/decoder trained to reconstruct
// sentences from their final encoder state despite input noise (word drop
// and adjacent swaps). The encoder's final hidden state is the sentence
// embedding.
struct SdaeConfig {
  int word_dim = 64;
  int hidden_dim = 128;
  int epochs = 6;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double drop_prob = 0.1;
  double swap_prob = 0.1;
  std::uint64_t seed = 1;
  int heldout_sentences = 1000;
  int divergence_patience = 3;
  double target_accuracy = 0.97;  // early exit once held-out accuracy reaches this
};

struct GruCell {
  // gate order within the stacked matrices: update (z), reset (r), candidate (h)
  std::vector<double> w;  // 3H x D, row-major
  std::vector<double> u;  // 3H x H
  std::vector<double> b;  // 3H
};

struct SdaeParams {
  std::vector<std::string> forms;  // vocabulary rows; BOS/EOS appended last
  std::map<std::string, int> index;
  int word_dim = 0;
  int hidden_dim = 0;
  int bos_id = 0;
  int eos_id = 0;

  std::vector<double> embedding;  // V x word_dim
  GruCell encoder;
  GruCell decoder;
  std::vector<double> w_out;  // V x hidden_dim
  std::vector<double> b_out;  // V

  int lookup(const std::string& form) const;
  // visits every parameter tensor; used by the optimizer and by
  // finite-difference checks
  void for_each_tensor(const std::function<void(const std::string&, std::vector<double>&)>& fn);
};

struct SdaeTrainStats {
  std::vector<double> train_loss;
  std::vector<double> heldout_loss;
  std::vector<double> heldout_accuracy;  // teacher-forced next-token accuracy
};

SdaeParams train_seq_autoencoder(const std::vector<std::vector<std::string>>& corpus,
                                 const SdaeConfig& cfg, SdaeTrainStats* stats = nullptr);

std::vector<double> seq_encode(std::span<const std::string> tokens, const SdaeParams& params);

// Teacher-forced reconstruction quality on clean inputs.
double reconstruction_accuracy(const std::vector<std::vector<std::string>>& corpus,
                               const SdaeParams& params);
double reconstruction_cross_entropy(const std::vector<std::vector<std::string>>& corpus,
                                    const SdaeParams& params);

// Mean reconstruction loss of a batch (token-id sequences) plus gradients
// for every tensor, keyed like for_each_tensor. Inputs are the (possibly
// noised) encoder sequences; targets are the clean sequences.
double sdae_loss_and_gradients(SdaeParams& params, const std::vector<std::vector<int>>& inputs,
                               const std::vector<std::vector<int>>& targets,
                               std::map<std::string, std::vector<double>>* grads);

void save_sdae(const SdaeParams& params, const std::filesystem::path& path);
SdaeParams load_sdae(const std::filesystem::path& path);

}  // namespace sentprobe
