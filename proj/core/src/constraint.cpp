#include "sentprobe/constraint.hpp"

#include <sstream>

#include "sentprobe/errors.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

namespace {

bool features_unify(const SyntacticFeatures& f, const PartialFeatures& p) {
  if (p.voice && *p.voice != f.voice) return false;
  if (p.tense && *p.tense != f.tense) return false;
  if (p.aspect && *p.aspect != f.aspect) return false;
  if (p.polarity && *p.polarity != f.polarity) return false;
  return true;
}

bool slot_unify(const ArgumentSlot* slot, const PartialSlot& p) {
  if (!p.noun && !p.number) return true;
  if (slot == nullptr) return false;  // constraining an absent slot fails
  if (p.noun && *p.noun != slot->noun) return false;
  if (p.number && *p.number != slot->number) return false;
  return true;
}

struct RcView {
  Role site;
  const RelativeClause* rc;
  const ArgumentSlot* head;
};

std::vector<RcView> relative_clauses(const EventRepresentation& e) {
  std::vector<RcView> out;
  if (e.main.agent.rc) out.push_back({Role::agent, &*e.main.agent.rc, &e.main.agent});
  if (e.main.patient && e.main.patient->rc)
    out.push_back({Role::patient, &*e.main.patient->rc, &*e.main.patient});
  return out;
}

// the non-head argument of an embedded clause
const ArgumentSlot* rc_other_slot(const RelativeClause& rc) {
  const ClauseFrame& f = *rc.frame;
  if (rc.gap == GapType::object_gap) return &f.agent;
  if (f.features.voice == Voice::passive) return &f.agent;
  return f.patient ? &*f.patient : nullptr;
}

bool rc_unify(const RcView& view, const PartialRc& p) {
  if (p.site && *p.site != view.site) return false;
  if (p.gap && *p.gap != view.rc->gap) return false;
  const ClauseFrame& f = *view.rc->frame;
  if (p.transitivity && *p.transitivity != f.transitivity) return false;
  if (p.verb && *p.verb != f.verb) return false;
  if (!features_unify(f.features, p.features)) return false;
  if (!slot_unify(rc_other_slot(*view.rc), p.other)) return false;
  return true;
}

bool rc_block_constrained(const PartialRc& p) {
  return p.site || p.gap || p.transitivity || p.verb || p.features.voice || p.features.tense ||
         p.features.aspect || p.features.polarity || p.other.noun || p.other.number;
}

}  // namespace

bool PartialEvent::all_wildcard() const {
  const PartialClause& m = main;
  return !m.verb && !m.transitivity && !m.features.voice && !m.features.tense &&
         !m.features.aspect && !m.features.polarity && !m.agent.noun && !m.agent.number &&
         !m.patient.noun && !m.patient.number && rc.presence == RcRequirement::wildcard &&
         !rc_block_constrained(rc);
}

bool unifies(const EventRepresentation& e, const PartialEvent& p) {
  const ClauseFrame& m = e.main;
  if (p.main.verb && *p.main.verb != m.verb) return false;
  if (p.main.transitivity && *p.main.transitivity != m.transitivity) return false;
  if (!features_unify(m.features, p.main.features)) return false;
  if (!slot_unify(&m.agent, p.main.agent)) return false;
  if (!slot_unify(m.patient ? &*m.patient : nullptr, p.main.patient)) return false;

  const std::vector<RcView> rcs = relative_clauses(e);
  if (p.rc.presence == RcRequirement::absent) return rcs.empty();
  const bool constrained = rc_block_constrained(p.rc);
  if (p.rc.presence == RcRequirement::present || constrained) {
    if (rcs.empty()) return false;
    if (constrained) {
      for (const RcView& v : rcs) {
        if (rc_unify(v, p.rc)) return true;
      }
      return false;
    }
  }
  return true;
}

std::set<std::string> event_lexemes(const EventRepresentation& e) {
  std::set<std::string> out;
  auto add_frame = [&](const ClauseFrame& f, auto&& self) -> void {
    out.insert(f.verb);
    for (const std::string& a : f.features.adverbs) out.insert(a);
    out.insert(f.agent.noun);
    if (f.agent.rc && f.agent.rc->frame) self(*f.agent.rc->frame, self);
    if (f.patient) {
      out.insert(f.patient->noun);
      if (f.patient->rc && f.patient->rc->frame) self(*f.patient->rc->frame, self);
    }
  };
  add_frame(e.main, add_frame);
  return out;
}

bool match_constraint(const EventRepresentation& e, const Constraint& c) {
  if (!unifies(e, c.required)) return false;
  for (const PartialEvent& p : c.prohibited) {
    if (unifies(e, p)) return false;
  }
  if (!c.required_lexemes.empty() || !c.prohibited_lexemes.empty()) {
    const std::set<std::string> lex = event_lexemes(e);
    for (const std::string& need : c.required_lexemes) {
      if (!lex.count(need)) return false;
    }
    for (const std::string& ban : c.prohibited_lexemes) {
      if (lex.count(ban)) return false;
    }
  }
  return true;
}

namespace {

void apply_key(PartialEvent& p, const std::string& key, const std::string& value, int lineno) {
  auto err = [&](const std::string& msg) -> ParseError {
    return ParseError("constraint line " + std::to_string(lineno) + ": " + msg);
  };
  try {
    if (key == "main.verb") p.main.verb = value;
    else if (key == "main.transitivity") p.main.transitivity = transitivity_from_string(value);
    else if (key == "main.voice") p.main.features.voice = voice_from_string(value);
    else if (key == "main.tense") p.main.features.tense = tense_from_string(value);
    else if (key == "main.aspect") p.main.features.aspect = aspect_from_string(value);
    else if (key == "main.polarity") p.main.features.polarity = polarity_from_string(value);
    else if (key == "main.agent.noun") p.main.agent.noun = value;
    else if (key == "main.agent.number") p.main.agent.number = number_from_string(value);
    else if (key == "main.patient.noun") p.main.patient.noun = value;
    else if (key == "main.patient.number") p.main.patient.number = number_from_string(value);
    else if (key == "rc.present") {
      if (value == "true") p.rc.presence = RcRequirement::present;
      else if (value == "false") p.rc.presence = RcRequirement::absent;
      else throw err("rc.present expects true or false");
    } else if (key == "rc.site") {
      p.rc.site = role_from_string(value);
      p.rc.presence = RcRequirement::present;
    } else if (key == "rc.gap") {
      p.rc.gap = gap_from_string(value);
      p.rc.presence = RcRequirement::present;
    } else if (key == "rc.transitivity") {
      p.rc.transitivity = transitivity_from_string(value);
      p.rc.presence = RcRequirement::present;
    } else if (key == "rc.verb") {
      p.rc.verb = value;
      p.rc.presence = RcRequirement::present;
    } else if (key == "rc.voice") {
      p.rc.features.voice = voice_from_string(value);
      p.rc.presence = RcRequirement::present;
    } else if (key == "rc.tense") {
      p.rc.features.tense = tense_from_string(value);
      p.rc.presence = RcRequirement::present;
    } else if (key == "rc.aspect") {
      p.rc.features.aspect = aspect_from_string(value);
      p.rc.presence = RcRequirement::present;
    } else if (key == "rc.polarity") {
      p.rc.features.polarity = polarity_from_string(value);
      p.rc.presence = RcRequirement::present;
    } else if (key == "rc.other.noun") {
      p.rc.other.noun = value;
      p.rc.presence = RcRequirement::present;
    } else if (key == "rc.other.number") {
      p.rc.other.number = number_from_string(value);
      p.rc.presence = RcRequirement::present;
    } else {
      throw err("unknown key '" + key + "'");
    }
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& ex) {
    throw err(ex.what());
  }
}

std::set<std::string> parse_lexeme_list(const std::string& value) {
  std::set<std::string> out;
  for (const std::string& item : split(value, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.insert(t);
  }
  return out;
}

}  // namespace

Constraint parse_constraint_text(const std::string& text) {
  Constraint c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  enum class BlockKind { none, require, prohibit };
  BlockKind block = BlockKind::none;
  PartialEvent current;

  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;

    if (block == BlockKind::none) {
      if (t == "require {") { block = BlockKind::require; current = {}; continue; }
      if (t == "prohibit {") { block = BlockKind::prohibit; current = {}; continue; }
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ParseError("constraint line " + std::to_string(lineno) + ": expected block or key=value");
      const std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      if (key == "require_lexemes") {
        for (const auto& l : parse_lexeme_list(value)) c.required_lexemes.insert(l);
      } else if (key == "prohibit_lexemes") {
        for (const auto& l : parse_lexeme_list(value)) c.prohibited_lexemes.insert(l);
      } else {
        throw ParseError("constraint line " + std::to_string(lineno) + ": unknown top-level key '" +
                         key + "'");
      }
      continue;
    }

    if (t == "}") {
      if (block == BlockKind::require) {
        c.required = current;
      } else {
        c.prohibited.push_back(current);
      }
      block = BlockKind::none;
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("constraint line " + std::to_string(lineno) + ": expected key = value");
    apply_key(current, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno);
  }
  if (block != BlockKind::none) throw ParseError("constraint file: unterminated block");
  return c;
}

Constraint parse_constraint_file(const std::filesystem::path& path) {
  return parse_constraint_text(read_file(path));
}

namespace {

void emit_partial(const PartialEvent& p, std::string& out) {
  auto kv = [&](const std::string& key, const std::string& value) {
    out += "  " + key + " = " + value + "\n";
  };
  if (p.main.verb) kv("main.verb", *p.main.verb);
  if (p.main.transitivity) kv("main.transitivity", to_string(*p.main.transitivity));
  if (p.main.features.voice) kv("main.voice", to_string(*p.main.features.voice));
  if (p.main.features.tense) kv("main.tense", to_string(*p.main.features.tense));
  if (p.main.features.aspect) kv("main.aspect", to_string(*p.main.features.aspect));
  if (p.main.features.polarity) kv("main.polarity", to_string(*p.main.features.polarity));
  if (p.main.agent.noun) kv("main.agent.noun", *p.main.agent.noun);
  if (p.main.agent.number) kv("main.agent.number", to_string(*p.main.agent.number));
  if (p.main.patient.noun) kv("main.patient.noun", *p.main.patient.noun);
  if (p.main.patient.number) kv("main.patient.number", to_string(*p.main.patient.number));
  if (p.rc.presence == RcRequirement::absent) kv("rc.present", "false");
  if (p.rc.presence == RcRequirement::present && !rc_block_constrained(p.rc))
    kv("rc.present", "true");
  if (p.rc.site) kv("rc.site", to_string(*p.rc.site));
  if (p.rc.gap) kv("rc.gap", to_string(*p.rc.gap));
  if (p.rc.transitivity) kv("rc.transitivity", to_string(*p.rc.transitivity));
  if (p.rc.verb) kv("rc.verb", *p.rc.verb);
  if (p.rc.features.voice) kv("rc.voice", to_string(*p.rc.features.voice));
  if (p.rc.features.tense) kv("rc.tense", to_string(*p.rc.features.tense));
  if (p.rc.features.aspect) kv("rc.aspect", to_string(*p.rc.features.aspect));
  if (p.rc.features.polarity) kv("rc.polarity", to_string(*p.rc.features.polarity));
  if (p.rc.other.noun) kv("rc.other.noun", *p.rc.other.noun);
  if (p.rc.other.number) kv("rc.other.number", to_string(*p.rc.other.number));
}

}  // namespace

std::string constraint_to_text(const Constraint& c) {
  std::string out;
  if (!c.required.all_wildcard()) {
    out += "require {\n";
    emit_partial(c.required, out);
    out += "}\n";
  }
  for (const PartialEvent& p : c.prohibited) {
    out += "prohibit {\n";
    emit_partial(p, out);
    out += "}\n";
  }
  if (!c.required_lexemes.empty()) {
    out += "require_lexemes = " +
           join(std::vector<std::string>(c.required_lexemes.begin(), c.required_lexemes.end()),
                ", ") +
           "\n";
  }
  if (!c.prohibited_lexemes.empty()) {
    out += "prohibit_lexemes = " +
           join(std::vector<std::string>(c.prohibited_lexemes.begin(), c.prohibited_lexemes.end()),
                ", ") +
           "\n";
  }
  return out;
}

}  // namespace sentprobe
