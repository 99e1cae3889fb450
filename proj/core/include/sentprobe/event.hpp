#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sentprobe/lexicon.hpp"

namespace sentprobe {

enum class Voice { active, passive };
enum class Aspect { simple, progressive };
enum class Polarity { positive, negative };
enum class Role { agent, patient };
enum class GapType { subject_gap, object_gap };

std::string to_string(Voice v);
std::string to_string(Tense t);
std::string to_string(Aspect a);
std::string to_string(Polarity p);
std::string to_string(Role r);
std::string to_string(GapType g);
std::string to_string(Transitivity t);
std::string to_string(Number n);

Voice voice_from_string(const std::string& s);
Tense tense_from_string(const std::string& s);
Aspect aspect_from_string(const std::string& s);
Polarity polarity_from_string(const std::string& s);
Role role_from_string(const std::string& s);
GapType gap_from_string(const std::string& s);
Transitivity transitivity_from_string(const std::string& s);
Number number_from_string(const std::string& s);

struct SyntacticFeatures {
  Voice voice = Voice::active;
  Tense tense = Tense::present;
  Aspect aspect = Aspect::simple;
  Polarity polarity = Polarity::positive;
  std::vector<std::string> adverbs;  // at most 3, realized directly before the verb

  bool operator==(const SyntacticFeatures&) const = default;
};

struct ClauseFrame;

// A relative clause hangs off an argument slot. The embedded frame carries
// both of its arguments materialized; the slot matching the gap repeats the
// head noun, so role facts can be read off every frame uniformly.
struct RelativeClause {
  GapType gap = GapType::subject_gap;
  std::shared_ptr<const ClauseFrame> frame;

  bool operator==(const RelativeClause& other) const;
};

struct ArgumentSlot {
  std::string noun;
  Number number = Number::singular;
  Role role = Role::agent;
  std::optional<RelativeClause> rc;

  bool operator==(const ArgumentSlot&) const = default;
};

struct ClauseFrame {
  std::string verb;
  Transitivity transitivity = Transitivity::intransitive;
  ArgumentSlot agent;
  std::optional<ArgumentSlot> patient;
  SyntacticFeatures features;

  bool operator==(const ClauseFrame&) const = default;
};

struct EventRepresentation {
  std::string id;  // content hash of main; assigned by make()
  ClauseFrame main;

  static EventRepresentation make(ClauseFrame main);

  bool operator==(const EventRepresentation& other) const { return main == other.main; }
};

// Canonical compact serialization of the frame tree (excludes id).
std::string frame_signature(const ClauseFrame& frame);
std::string event_id_for(const ClauseFrame& frame);

std::string event_to_json(const EventRepresentation& e);
EventRepresentation event_from_json(const std::string& json_text);

struct ValidationOptions {
  int max_relative_clauses = 1;
  int max_adverbs = 3;
};

struct Verdict {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Structural well-formedness. Passing a lexicon additionally checks lemma
// membership, verb transitivity class, and adverb membership.
Verdict validate_event(const EventRepresentation& e, const ValidationOptions& opts = {},
                       const Lexicon* lexicon = nullptr);

// ---- structural templates ----

struct RcSpec {
  Role site = Role::agent;           // which main argument carries the clause
  GapType gap = GapType::subject_gap;
  Transitivity transitivity = Transitivity::intransitive;

  bool operator==(const RcSpec&) const = default;
};

struct StructuralTemplate {
  Transitivity main_transitivity = Transitivity::intransitive;
  std::vector<RcSpec> rcs;  // empty = no relative clause; at most one per site

  bool has_rc() const { return !rcs.empty(); }
  const RcSpec* rc_at(Role site) const;
  std::string name() const;

  bool operator==(const StructuralTemplate&) const = default;
};

struct TemplateLimits {
  int max_relative_clauses = 1;
  bool allow_rc_on_agent = true;
  bool allow_rc_on_patient = true;
};

// Exhaustive, duplicate-free, deterministic enumeration under the limits.
// Legality: a relative clause on the patient requires a transitive main
// clause; an object gap requires a transitive embedded clause.
std::vector<StructuralTemplate> enumerate_templates(const TemplateLimits& limits = {});

}  // namespace sentprobe
