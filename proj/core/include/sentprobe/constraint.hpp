#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sentprobe/event.hpp"

namespace sentprobe {

// Partial events mirror the concrete structures with one wildcard marker
// per field (nullopt = unconstrained), so required and prohibited
// constraints share a single unification routine.
template <typename T>
using Wild = std::optional<T>;

struct PartialFeatures {
  Wild<Voice> voice;
  Wild<Tense> tense;
  Wild<Aspect> aspect;
  Wild<Polarity> polarity;
};

struct PartialSlot {
  Wild<std::string> noun;
  Wild<Number> number;
};

enum class RcRequirement { wildcard, absent, present };

// The embedded clause is addressed by its non-head argument ("other"): the
// patient of a subject-gap active clause, the agent otherwise.
struct PartialRc {
  RcRequirement presence = RcRequirement::wildcard;
  Wild<Role> site;
  Wild<GapType> gap;
  Wild<Transitivity> transitivity;
  Wild<std::string> verb;
  PartialFeatures features;
  PartialSlot other;
};

struct PartialClause {
  Wild<std::string> verb;
  Wild<Transitivity> transitivity;
  PartialFeatures features;
  PartialSlot agent;
  PartialSlot patient;
};

struct PartialEvent {
  PartialClause main;
  PartialRc rc;

  bool all_wildcard() const;
};

struct Constraint {
  PartialEvent required;                 // all-wildcard by default
  std::vector<PartialEvent> prohibited;
  std::set<std::string> required_lexemes;
  std::set<std::string> prohibited_lexemes;
};

// True iff the fully-populated event is an instance of the partial. For the
// rc block the match is existential over the event's relative clauses.
bool unifies(const EventRepresentation& e, const PartialEvent& p);

// required unifies, no prohibited unifies, lexeme sets respected.
bool match_constraint(const EventRepresentation& e, const Constraint& c);

// All noun/verb/adverb lemmas occurring in the event.
std::set<std::string> event_lexemes(const EventRepresentation& e);

// Text format: `require { key = value ... }`, `prohibit { ... }` blocks
// (one prohibited partial per block), plus `require_lexemes` /
// `prohibit_lexemes` lists. '#' starts a comment.
Constraint parse_constraint_text(const std::string& text);
Constraint parse_constraint_file(const std::filesystem::path& path);

// Canonical text round-trip; used for config signatures.
std::string constraint_to_text(const Constraint& c);

}  // namespace sentprobe
