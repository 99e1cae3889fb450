#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sentprobe/constraint.hpp"
#include "sentprobe/event.hpp"
#include "sentprobe/lexicon.hpp"

namespace sentprobe {

struct FeatureDomains {
  std::vector<Voice> voices{Voice::active, Voice::passive};
  std::vector<Tense> tenses{Tense::present, Tense::past};
  std::vector<Aspect> aspects{Aspect::simple, Aspect::progressive};
  std::vector<Polarity> polarities{Polarity::positive, Polarity::negative};
  std::vector<Number> numbers{Number::singular, Number::plural};
  // Adverb slots are not iterated by default; tasks that need adverb
  // material decorate pools after generation (decorate_adverbs below).
  std::vector<std::vector<std::string>> adverb_sequences{{}};
};

enum class LemmaDistinctness {
  per_clause,  // agent != patient within each clause
  global,      // additionally: nouns pairwise distinct and verbs pairwise
               // distinct across the whole event
};

struct GenerationConfig {
  Lexicon lexicon;
  TemplateLimits limits;
  Constraint constraint;
  FeatureDomains features;
  LemmaDistinctness distinctness = LemmaDistinctness::global;
  std::uint64_t max_pool_size = 50000;
  std::uint64_t seed = 1;

  std::string signature() const;
};

struct EventPool {
  std::vector<EventRepresentation> events;
  std::string config_hash;
  std::uint64_t exhaustive_count = 0;  // matched candidates before subsampling
  bool subsampled = false;
  std::map<std::string, std::uint64_t> per_template_counts;
  std::vector<std::string> warnings;
};

// Streams every complete event consistent with template, partial and
// config, in canonical order: verbs, then nouns (agent before patient),
// then numbers, then feature values in declared order, main clause before
// embedded clause. Throws GenerationError when the partial cannot embed in
// the template shape.
class PopulateStream {
 public:
  PopulateStream(const StructuralTemplate& tpl, const PartialEvent& partial,
                 const GenerationConfig& cfg);
  ~PopulateStream();
  PopulateStream(PopulateStream&&) noexcept;
  PopulateStream& operator=(PopulateStream&&) noexcept;

  bool next(EventRepresentation& out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<EventRepresentation> populate_all(const StructuralTemplate& tpl,
                                              const PartialEvent& partial,
                                              const GenerationConfig& cfg);

// Union of populate over all admitted templates, constraint-filtered and
// deduplicated; a seed-determined uniform subsample in canonical order when
// the exhaustive count exceeds max_pool_size. Unsatisfiable constraints
// yield an empty pool with a warning, not an error.
EventPool generate_pool(const GenerationConfig& cfg);

// Idempotent; keeps the first occurrence in order.
void dedupe(EventPool& pool);

struct AdverbDecorationConfig {
  std::vector<std::string> adverbs;  // inventory to draw from
  int min_run = 1;                   // adverbs per verb slot
  int max_run = 2;
  std::uint64_t seed = 1;
};

// Fills the adverb slot of every clause with a random run of distinct
// adverbs. Produces fresh events (new ids); input pool is untouched.
EventPool decorate_adverbs(const EventPool& pool, const AdverbDecorationConfig& cfg);

void save_pool(const EventPool& pool, const std::filesystem::path& events_path,
               const std::filesystem::path& manifest_path);
EventPool load_pool(const std::filesystem::path& events_path,
                    const std::filesystem::path& manifest_path);

}  // namespace sentprobe
