#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sentprobe {

enum class Pos { noun, verb, adverb };
enum class Transitivity { transitive, intransitive };
enum class Number { singular, plural };
enum class Tense { present, past };

enum class VerbForm { base, pres_3sg, past, past_participle, present_participle };

struct NounParadigm {
  std::string singular;
  std::string plural;
};

struct VerbParadigm {
  std::string base;
  std::string pres_3sg;
  std::string past;
  std::string past_participle;
  std::string present_participle;
};

// Closed vocabulary plus complete inflection paradigms. Every lemma must
// carry a full paradigm at construction time; there is no fallback
// morphology at realization time.
class Lexicon {
 public:
  struct Entry {
    std::string lemma;
    Pos pos = Pos::noun;
    Transitivity transitivity = Transitivity::intransitive;  // verbs only
    NounParadigm noun;
    VerbParadigm verb;
  };

  Lexicon() = default;
  static Lexicon builtin();
  static Lexicon from_entries(std::vector<Entry> entries);
  static Lexicon load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Restriction to a lemma subset, preserving order.
  Lexicon subset(const std::vector<std::string>& lemmas) const;

  const std::vector<std::string>& nouns() const { return nouns_; }
  const std::vector<std::string>& verbs() const { return verbs_; }
  std::vector<std::string> verbs(Transitivity t) const;
  const std::vector<std::string>& adverbs() const { return adverbs_; }

  // Probe inventory: nouns then verbs, in declaration order.
  std::vector<std::string> probe_lemmas() const;

  bool contains(const std::string& lemma) const;
  bool is_noun(const std::string& lemma) const;
  bool is_verb(const std::string& lemma) const;
  bool is_adverb(const std::string& lemma) const;
  Transitivity verb_transitivity(const std::string& lemma) const;

  const NounParadigm& noun_paradigm(const std::string& lemma) const;
  const VerbParadigm& verb_paradigm(const std::string& lemma) const;

  // All surface forms a lemma can take (deduplicated).
  std::vector<std::string> forms_of(const std::string& lemma) const;

  // Every form the realizer can emit over this vocabulary, including
  // function words and auxiliaries. Deduplicated, deterministic order.
  std::vector<std::string> surface_forms() const;

  // Stable content signature for manifest hashing.
  std::string signature() const;

 private:
  const Entry& entry(const std::string& lemma) const;

  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> by_lemma_;
  std::vector<std::string> nouns_, verbs_, adverbs_;
};

// Fixed auxiliary paradigms.
std::string be_form(Tense tense, Number number);
std::string do_form(Tense tense, Number number);

}  // namespace sentprobe
