#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sentprobe/generator.hpp"
#include "sentprobe/realizer.hpp"

namespace sentprobe {

enum class TaskKind { semrole, negation, content1, content2, order };
std::string to_string(TaskKind k);
TaskKind task_from_string(const std::string& s);

struct TaskInstance {
  TaskKind task = TaskKind::semrole;
  std::string sentence_id;
  std::string probe_noun;  // empty for one-probe tasks
  std::string probe_verb;
  int label = 0;
};

struct BalanceEntry {
  std::uint64_t count_pos = 0;
  std::uint64_t count_neg = 0;
};

struct BalanceReport {
  double label_ratio = 0.0;  // fraction of positive instances
  // frequency gap per lemma, normalized by per-label instance count
  std::map<std::string, BalanceEntry> sentence_lemmas;
  std::map<std::string, BalanceEntry> probe_lemmas;
  double max_sentence_lemma_divergence = 0.0;
  double max_probe_lemma_divergence = 0.0;
  std::map<int, BalanceEntry> length_distribution;  // token count per label
  std::vector<std::string> flags;                   // lemmas over threshold
};

struct SplitPolicy {
  double semrole_pair_holdout_fraction = 0.2;
  int negation_heldout_adverbs = 3;
};

struct TaskBuildConfig {
  std::size_t train_size = 4000;
  std::size_t test_size = 1000;
  std::uint64_t seed = 1;
  SplitPolicy policy;
  int min_adverb_run = 1;  // negation only
  int max_adverb_run = 2;
};

struct TaskDataset {
  TaskKind task = TaskKind::semrole;
  std::vector<TaskInstance> train;
  std::vector<TaskInstance> test;
  std::vector<AnnotatedSentence> sentences;  // all referenced sentences
  std::map<std::string, std::size_t> sentence_index;

  // holdout bookkeeping
  std::vector<std::pair<std::string, std::string>> heldout_pairs;  // semrole (noun, verb)
  std::vector<std::string> heldout_adverbs;                        // negation
  std::string config_hash;

  const AnnotatedSentence& sentence(const std::string& id) const;
};

// Positive = probe noun is AGENT of probe verb; negative = PATIENT of the
// same verb, so word content alone cannot separate the labels. Each used
// sentence contributes one instance of each label, and the (noun, verb)
// probe pairs seen at test time never occur as training probes.
TaskDataset build_semrole(const EventPool& pool, const Lexicon& lex, const TaskBuildConfig& cfg);

// Two-verb events with exactly one negated frame; every clause carries an
// auxiliary (passive or progressive) so the probe verb's surface form does
// not leak its polarity. Adverb runs are inserted before both verbs; test
// sentences use only held-out adverbs. Label 1 = probe verb not negated.
TaskDataset build_negation(const EventPool& pool, const Lexicon& lex, const TaskBuildConfig& cfg);

// arity 1: does the probe verb occur; arity 2: do both probes occur.
// Content2 negatives alternate between "neither present" and "exactly one
// present". Probe frequencies are balanced across labels per lemma.
TaskDataset build_content(const EventPool& pool, int arity, const Lexicon& lex,
                          const TaskBuildConfig& cfg);

// Does the probe noun precede the probe verb; both probes occur exactly
// once in the sentence, and each probe pair is driven toward appearing
// with both labels.
TaskDataset build_order(const EventPool& pool, const Lexicon& lex, const TaskBuildConfig& cfg);

BalanceReport audit_balance(const TaskDataset& ds, double flag_threshold = 0.02);

struct SplitVerdict {
  bool pass = true;
  std::vector<std::string> failures;
};

// Sentence disjointness, probe-pair holdout (semrole), adverb holdout
// (negation), and probe coverage in training, with counterexamples.
SplitVerdict verify_split(const TaskDataset& ds, const SplitPolicy& policy);

// Label recomputed purely from inflection-aware string matching and token
// positions; independent of alignment and gold annotations. Content and
// order tasks only. Throws AmbiguityError when an order probe occurs more
// than once (or is absent).
int surface_oracle_label(TaskKind task, std::span<const std::string> tokens, const Lexicon& lex,
                         const std::string& probe_noun, const std::string& probe_verb);

void save_dataset(const TaskDataset& ds, const std::filesystem::path& tsv_path,
                  const std::filesystem::path& corpus_path,
                  const std::filesystem::path& manifest_path);
TaskDataset load_dataset(const std::filesystem::path& tsv_path,
                         const std::filesystem::path& corpus_path,
                         const std::filesystem::path& manifest_path);

}  // namespace sentprobe
