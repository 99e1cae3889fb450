#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sentprobe/event.hpp"
#include "sentprobe/lexicon.hpp"

namespace sentprobe {

std::string inflect_noun(const Lexicon& lex, const std::string& lemma, Number number);
std::string inflect_verb(const Lexicon& lex, const std::string& lemma, VerbForm form);

// Auxiliary sequence and main-verb inflection key for one clause, agreeing
// with the surface subject. Negation lands on the first auxiliary;
// simple-aspect active negatives take do-support.
struct AuxChain {
  std::vector<std::string> aux;
  VerbForm verb_form = VerbForm::base;
};
AuxChain auxiliary_chain(const SyntacticFeatures& features, Number subject_number);

struct TokenAlignment {
  int token = 0;        // index into tokens
  int frame = 0;        // 0 = main clause, 1.. = embedded clauses in emission order
  std::string slot;     // "verb" | "agent" | "patient" | "adverb"
  std::string lemma;    // lemma the token realizes
};

struct RoleFact {
  std::string noun;
  std::string verb;
  Role relation = Role::agent;
};

struct GoldAnnotations {
  // verb lemma -> polarity of its frame
  std::map<std::string, Polarity> verb_polarity;
  std::vector<RoleFact> roles;
  // set when a lemma pair or verb lemma receives conflicting facts from
  // two frames; such events are unusable for relational probing
  bool conflict = false;
};

// Role and polarity facts read off the event graph alone.
GoldAnnotations gold_labels(const EventRepresentation& e);

struct AnnotatedSentence {
  std::string id;  // content hash of the token sequence
  std::vector<std::string> tokens;
  EventRepresentation event;
  std::vector<TokenAlignment> alignment;  // content tokens only
  GoldAnnotations gold;
};

// Deterministic rule-based mapping from a valid event to its surface form.
// Word order: active = AGENT V (PATIENT); passive = PATIENT aux V-pp by
// AGENT; relative clauses attach as "that" + clause directly after their
// head noun; adverbs sit between negation/auxiliaries and the verb.
AnnotatedSentence realize(const EventRepresentation& e, const Lexicon& lex);

std::string sentence_id_for(const std::vector<std::string>& tokens);

void save_corpus(const std::vector<AnnotatedSentence>& corpus,
                 const std::filesystem::path& path);
std::vector<AnnotatedSentence> load_corpus(const std::filesystem::path& path);

// One sentence per line, whitespace-joined tokens.
void export_plaintext(const std::vector<AnnotatedSentence>& corpus,
                      const std::filesystem::path& path);

}  // namespace sentprobe
