#include "sentprobe/event.hpp"

#include <nlohmann/json.hpp>

#include "sentprobe/errors.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

using ojson = nlohmann::ordered_json;

std::string to_string(Voice v) { return v == Voice::active ? "active" : "passive"; }
std::string to_string(Tense t) { return t == Tense::present ? "present" : "past"; }
std::string to_string(Aspect a) { return a == Aspect::simple ? "simple" : "progressive"; }
std::string to_string(Polarity p) { return p == Polarity::positive ? "positive" : "negative"; }
std::string to_string(Role r) { return r == Role::agent ? "agent" : "patient"; }
std::string to_string(GapType g) { return g == GapType::subject_gap ? "subject" : "object"; }
std::string to_string(Transitivity t) {
  return t == Transitivity::transitive ? "transitive" : "intransitive";
}
std::string to_string(Number n) { return n == Number::singular ? "singular" : "plural"; }

namespace {
[[noreturn]] void bad_enum(const std::string& what, const std::string& s) {
  throw ParseError("bad " + what + " value: '" + s + "'");
}
}  // namespace

Voice voice_from_string(const std::string& s) {
  if (s == "active") return Voice::active;
  if (s == "passive") return Voice::passive;
  bad_enum("voice", s);
}
Tense tense_from_string(const std::string& s) {
  if (s == "present") return Tense::present;
  if (s == "past") return Tense::past;
  bad_enum("tense", s);
}
Aspect aspect_from_string(const std::string& s) {
  if (s == "simple") return Aspect::simple;
  if (s == "progressive") return Aspect::progressive;
  bad_enum("aspect", s);
}
Polarity polarity_from_string(const std::string& s) {
  if (s == "positive") return Polarity::positive;
  if (s == "negative") return Polarity::negative;
  bad_enum("polarity", s);
}
Role role_from_string(const std::string& s) {
  if (s == "agent") return Role::agent;
  if (s == "patient") return Role::patient;
  bad_enum("role", s);
}
GapType gap_from_string(const std::string& s) {
  if (s == "subject") return GapType::subject_gap;
  if (s == "object") return GapType::object_gap;
  bad_enum("gap", s);
}
Transitivity transitivity_from_string(const std::string& s) {
  if (s == "transitive") return Transitivity::transitive;
  if (s == "intransitive") return Transitivity::intransitive;
  bad_enum("transitivity", s);
}
Number number_from_string(const std::string& s) {
  if (s == "singular") return Number::singular;
  if (s == "plural") return Number::plural;
  bad_enum("number", s);
}

bool RelativeClause::operator==(const RelativeClause& other) const {
  if (gap != other.gap) return false;
  if (!frame || !other.frame) return frame == other.frame;
  return *frame == *other.frame;
}

namespace {

void append_slot_signature(const ArgumentSlot& slot, std::string& out);

void append_frame_signature(const ClauseFrame& f, std::string& out) {
  out += f.verb;
  out += '/';
  out += to_string(f.transitivity)[0];
  out += '/';
  out += to_string(f.features.voice)[0];
  out += to_string(f.features.tense)[1];  // r/a distinguishes present/past
  out += to_string(f.features.aspect)[0];
  out += to_string(f.features.polarity)[0];
  out += '[';
  out += join(f.features.adverbs, ",");
  out += "]A(";
  append_slot_signature(f.agent, out);
  out += ")P(";
  if (f.patient) append_slot_signature(*f.patient, out);
  out += ')';
}

void append_slot_signature(const ArgumentSlot& slot, std::string& out) {
  out += slot.noun;
  out += '.';
  out += to_string(slot.number)[0];
  out += '.';
  out += to_string(slot.role)[0];
  if (slot.rc) {
    out += "{rc:";
    out += to_string(slot.rc->gap)[0];
    out += ':';
    if (slot.rc->frame) append_frame_signature(*slot.rc->frame, out);
    out += '}';
  }
}

}  // namespace

std::string frame_signature(const ClauseFrame& frame) {
  std::string out;
  out.reserve(128);
  append_frame_signature(frame, out);
  return out;
}

std::string event_id_for(const ClauseFrame& frame) {
  return "e" + to_hex(fnv1a64(frame_signature(frame)));
}

EventRepresentation EventRepresentation::make(ClauseFrame main) {
  EventRepresentation e;
  e.main = std::move(main);
  e.id = event_id_for(e.main);
  return e;
}

namespace {

ojson slot_to_json(const ArgumentSlot& slot);

ojson frame_to_json(const ClauseFrame& f) {
  ojson j;
  j["verb"] = f.verb;
  j["transitivity"] = to_string(f.transitivity);
  j["voice"] = to_string(f.features.voice);
  j["tense"] = to_string(f.features.tense);
  j["aspect"] = to_string(f.features.aspect);
  j["polarity"] = to_string(f.features.polarity);
  j["adverbs"] = f.features.adverbs;
  j["agent"] = slot_to_json(f.agent);
  j["patient"] = f.patient ? slot_to_json(*f.patient) : ojson(nullptr);
  return j;
}

ojson slot_to_json(const ArgumentSlot& slot) {
  ojson j;
  j["noun"] = slot.noun;
  j["number"] = to_string(slot.number);
  j["role"] = to_string(slot.role);
  if (slot.rc) {
    ojson rc;
    rc["gap"] = to_string(slot.rc->gap);
    rc["frame"] = slot.rc->frame ? frame_to_json(*slot.rc->frame) : ojson(nullptr);
    j["rc"] = rc;
  } else {
    j["rc"] = nullptr;
  }
  return j;
}

ArgumentSlot slot_from_json(const ojson& j);

ClauseFrame frame_from_json(const ojson& j) {
  ClauseFrame f;
  f.verb = j.at("verb").get<std::string>();
  f.transitivity = transitivity_from_string(j.at("transitivity").get<std::string>());
  f.features.voice = voice_from_string(j.at("voice").get<std::string>());
  f.features.tense = tense_from_string(j.at("tense").get<std::string>());
  f.features.aspect = aspect_from_string(j.at("aspect").get<std::string>());
  f.features.polarity = polarity_from_string(j.at("polarity").get<std::string>());
  f.features.adverbs = j.at("adverbs").get<std::vector<std::string>>();
  f.agent = slot_from_json(j.at("agent"));
  if (!j.at("patient").is_null()) f.patient = slot_from_json(j.at("patient"));
  return f;
}

ArgumentSlot slot_from_json(const ojson& j) {
  ArgumentSlot slot;
  slot.noun = j.at("noun").get<std::string>();
  slot.number = number_from_string(j.at("number").get<std::string>());
  slot.role = role_from_string(j.at("role").get<std::string>());
  if (j.contains("rc") && !j.at("rc").is_null()) {
    RelativeClause rc;
    rc.gap = gap_from_string(j.at("rc").at("gap").get<std::string>());
    rc.frame = std::make_shared<const ClauseFrame>(frame_from_json(j.at("rc").at("frame")));
    slot.rc = std::move(rc);
  }
  return slot;
}

}  // namespace

std::string event_to_json(const EventRepresentation& e) {
  ojson j;
  j["id"] = e.id;
  j["main"] = frame_to_json(e.main);
  return j.dump();
}

EventRepresentation event_from_json(const std::string& json_text) {
  const ojson j = ojson::parse(json_text);
  EventRepresentation e = EventRepresentation::make(frame_from_json(j.at("main")));
  if (j.contains("id") && j.at("id").is_string()) {
    const std::string stored = j.at("id").get<std::string>();
    if (!stored.empty() && stored != e.id)
      throw ParseError("event id mismatch: stored " + stored + ", content " + e.id);
  }
  return e;
}

namespace {

struct Validator {
  const ValidationOptions& opts;
  const Lexicon* lex;
  std::vector<std::string> violations;
  int rc_count = 0;

  void add(const std::string& v) { violations.push_back(v); }

  void check_slot(const ArgumentSlot& slot, Role expected, const std::string& where, int depth) {
    if (slot.noun.empty()) add(where + ": noun not populated");
    if (slot.role != expected)
      add(where + ": role is " + to_string(slot.role) + ", expected " + to_string(expected));
    if (lex && !slot.noun.empty() && !lex->is_noun(slot.noun))
      add(where + ": '" + slot.noun + "' is not a vocabulary noun");
    if (slot.rc) {
      ++rc_count;
      if (depth >= 1) add(where + ": relative clause nested inside a relative clause");
      if (!slot.rc->frame) {
        add(where + ": relative clause frame not populated");
        return;
      }
      const ClauseFrame& f = *slot.rc->frame;
      check_frame(f, where + ".rc", depth + 1);
      if (slot.rc->gap == GapType::object_gap) {
        if (f.transitivity != Transitivity::transitive)
          add(where + ".rc: object gap on intransitive clause");
        if (f.features.voice != Voice::active) add(where + ".rc: object gap on passive clause");
      }
      // the gap slot repeats the head noun
      const ArgumentSlot* gap_slot = nullptr;
      if (slot.rc->gap == GapType::object_gap) {
        gap_slot = f.patient ? &*f.patient : nullptr;
      } else {
        gap_slot = f.features.voice == Voice::passive ? (f.patient ? &*f.patient : nullptr)
                                                      : &f.agent;
      }
      if (gap_slot == nullptr) {
        add(where + ".rc: gap slot missing");
      } else {
        if (gap_slot->noun != slot.noun || gap_slot->number != slot.number)
          add(where + ".rc: gap slot does not repeat head noun");
        if (gap_slot->rc) add(where + ".rc: gap slot carries its own relative clause");
      }
    }
  }

  void check_frame(const ClauseFrame& f, const std::string& where, int depth) {
    if (f.verb.empty()) add(where + ": verb not populated");
    if (f.transitivity == Transitivity::transitive && !f.patient)
      add(where + ": patient missing on transitive frame");
    if (f.transitivity == Transitivity::intransitive && f.patient)
      add(where + ": patient on intransitive frame");
    if (f.features.voice == Voice::passive && f.transitivity != Transitivity::transitive)
      add(where + ": passive voice on intransitive frame");
    if (static_cast<int>(f.features.adverbs.size()) > opts.max_adverbs)
      add(where + ": adverb run longer than " + std::to_string(opts.max_adverbs));
    if (lex) {
      if (!f.verb.empty()) {
        if (!lex->is_verb(f.verb)) {
          add(where + ": '" + f.verb + "' is not a vocabulary verb");
        } else if (lex->verb_transitivity(f.verb) != f.transitivity) {
          add(where + ": verb '" + f.verb + "' transitivity class mismatch");
        }
      }
      for (const std::string& adv : f.features.adverbs) {
        if (!lex->is_adverb(adv)) add(where + ": '" + adv + "' is not a vocabulary adverb");
      }
    }
    check_slot(f.agent, Role::agent, where + ".agent", depth);
    if (f.patient) check_slot(*f.patient, Role::patient, where + ".patient", depth);
  }
};

}  // namespace

Verdict validate_event(const EventRepresentation& e, const ValidationOptions& opts,
                       const Lexicon* lexicon) {
  Validator v{opts, lexicon, {}, 0};
  v.check_frame(e.main, "main", 0);
  if (v.rc_count > opts.max_relative_clauses)
    v.add("relative clause count " + std::to_string(v.rc_count) + " > " +
          std::to_string(opts.max_relative_clauses));
  return Verdict{std::move(v.violations)};
}

const RcSpec* StructuralTemplate::rc_at(Role site) const {
  for (const RcSpec& rc : rcs) {
    if (rc.site == site) return &rc;
  }
  return nullptr;
}

std::string StructuralTemplate::name() const {
  std::string out = main_transitivity == Transitivity::transitive ? "trans" : "intrans";
  for (const RcSpec& rc : rcs) {
    out += "+rc(" + to_string(rc.site) + "," + to_string(rc.gap)[0] + "gap," +
           (rc.transitivity == Transitivity::transitive ? "trans" : "intrans") + ")";
  }
  return out;
}

std::vector<StructuralTemplate> enumerate_templates(const TemplateLimits& limits) {
  const std::vector<Transitivity> trans{Transitivity::intransitive, Transitivity::transitive};
  const std::vector<Role> sites = [&] {
    std::vector<Role> s;
    if (limits.allow_rc_on_agent) s.push_back(Role::agent);
    if (limits.allow_rc_on_patient) s.push_back(Role::patient);
    return s;
  }();
  const std::vector<std::pair<GapType, Transitivity>> rc_shapes{
      {GapType::subject_gap, Transitivity::intransitive},
      {GapType::subject_gap, Transitivity::transitive},
      {GapType::object_gap, Transitivity::transitive},
  };

  std::vector<StructuralTemplate> out;
  for (Transitivity mt : trans) {
    out.push_back({mt, {}});
  }
  auto site_legal = [](Transitivity mt, Role site) {
    return site == Role::agent || mt == Transitivity::transitive;
  };
  if (limits.max_relative_clauses >= 1) {
    for (Transitivity mt : trans) {
      for (Role site : sites) {
        if (!site_legal(mt, site)) continue;
        for (const auto& [gap, rt] : rc_shapes) {
          out.push_back({mt, {RcSpec{site, gap, rt}}});
        }
      }
    }
  }
  if (limits.max_relative_clauses >= 2 && limits.allow_rc_on_agent &&
      limits.allow_rc_on_patient) {
    for (const auto& [agap, art] : rc_shapes) {
      for (const auto& [pgap, prt] : rc_shapes) {
        out.push_back({Transitivity::transitive,
                       {RcSpec{Role::agent, agap, art}, RcSpec{Role::patient, pgap, prt}}});
      }
    }
  }
  return out;
}

}  // namespace sentprobe
