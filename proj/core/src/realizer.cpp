#include "sentprobe/realizer.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "sentprobe/errors.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

using ojson = nlohmann::ordered_json;

std::string inflect_noun(const Lexicon& lex, const std::string& lemma, Number number) {
  const NounParadigm& p = lex.noun_paradigm(lemma);
  return number == Number::singular ? p.singular : p.plural;
}

std::string inflect_verb(const Lexicon& lex, const std::string& lemma, VerbForm form) {
  const VerbParadigm& p = lex.verb_paradigm(lemma);
  switch (form) {
    case VerbForm::base: return p.base;
    case VerbForm::pres_3sg: return p.pres_3sg;
    case VerbForm::past: return p.past;
    case VerbForm::past_participle: return p.past_participle;
    case VerbForm::present_participle: return p.present_participle;
  }
  throw RealizationError("bad verb form");
}

AuxChain auxiliary_chain(const SyntacticFeatures& f, Number subject_number) {
  AuxChain out;
  const bool neg = f.polarity == Polarity::negative;
  if (f.voice == Voice::passive) {
    out.aux.push_back(be_form(f.tense, subject_number));
    if (neg) out.aux.push_back("not");
    if (f.aspect == Aspect::progressive) out.aux.push_back("being");
    out.verb_form = VerbForm::past_participle;
  } else if (f.aspect == Aspect::progressive) {
    out.aux.push_back(be_form(f.tense, subject_number));
    if (neg) out.aux.push_back("not");
    out.verb_form = VerbForm::present_participle;
  } else if (neg) {
    // do-support carries tense for simple-aspect active negatives
    out.aux.push_back(do_form(f.tense, subject_number));
    out.aux.push_back("not");
    out.verb_form = VerbForm::base;
  } else {
    out.verb_form = f.tense == Tense::past
                        ? VerbForm::past
                        : (subject_number == Number::singular ? VerbForm::pres_3sg
                                                              : VerbForm::base);
  }
  return out;
}

namespace {

struct Emitter {
  const Lexicon& lex;
  std::vector<std::string> tokens;
  std::vector<TokenAlignment> alignment;
  int next_frame_index = 0;

  void word(const std::string& form) { tokens.push_back(form); }

  void content(const std::string& form, int frame, const std::string& slot,
               const std::string& lemma) {
    alignment.push_back({static_cast<int>(tokens.size()), frame, slot, lemma});
    tokens.push_back(form);
  }

  void verb_complex(const ClauseFrame& f, Number subject_number, int frame) {
    const AuxChain chain = auxiliary_chain(f.features, subject_number);
    for (const std::string& a : chain.aux) word(a);
    for (const std::string& adv : f.features.adverbs) content(adv, frame, "adverb", adv);
    content(inflect_verb(lex, f.verb, chain.verb_form), frame, "verb", f.verb);
  }

  void np(const ArgumentSlot& slot, int frame) {
    word("the");
    content(inflect_noun(lex, slot.noun, slot.number), frame, to_string(slot.role), slot.noun);
    if (slot.rc) relative_clause(*slot.rc, slot);
  }

  void relative_clause(const RelativeClause& rc, const ArgumentSlot& head) {
    word("that");
    const int frame = ++next_frame_index;
    const ClauseFrame& f = *rc.frame;
    if (rc.gap == GapType::object_gap) {
      // embedded subject + verb; the object position is the gap
      np(f.agent, frame);
      verb_complex(f, f.agent.number, frame);
    } else {
      // clause minus its surface subject; agreement follows the head
      verb_complex(f, head.number, frame);
      if (f.features.voice == Voice::passive) {
        word("by");
        np(f.agent, frame);
      } else if (f.patient) {
        np(*f.patient, frame);
      }
    }
  }

  void main_clause(const ClauseFrame& f) {
    const int frame = 0;
    if (f.features.voice == Voice::passive) {
      np(*f.patient, frame);
      verb_complex(f, f.patient->number, frame);
      word("by");
      np(f.agent, frame);
    } else {
      np(f.agent, frame);
      verb_complex(f, f.agent.number, frame);
      if (f.patient) np(*f.patient, frame);
    }
  }
};

void collect_gold(const ClauseFrame& f, GoldAnnotations& gold) {
  auto pol = gold.verb_polarity.find(f.verb);
  if (pol == gold.verb_polarity.end()) {
    gold.verb_polarity[f.verb] = f.features.polarity;
  } else if (pol->second != f.features.polarity) {
    gold.conflict = true;
  }
  auto add_role = [&](const std::string& noun, Role relation) {
    for (const RoleFact& fact : gold.roles) {
      if (fact.noun == noun && fact.verb == f.verb) {
        if (fact.relation != relation) gold.conflict = true;
        return;
      }
    }
    gold.roles.push_back({noun, f.verb, relation});
  };
  add_role(f.agent.noun, Role::agent);
  if (f.patient) add_role(f.patient->noun, Role::patient);
  if (f.agent.rc && f.agent.rc->frame) collect_gold(*f.agent.rc->frame, gold);
  if (f.patient && f.patient->rc && f.patient->rc->frame)
    collect_gold(*f.patient->rc->frame, gold);
}

}  // namespace

GoldAnnotations gold_labels(const EventRepresentation& e) {
  GoldAnnotations gold;
  collect_gold(e.main, gold);
  return gold;
}

std::string sentence_id_for(const std::vector<std::string>& tokens) {
  return "s" + to_hex(fnv1a64(join(tokens, " ")));
}

AnnotatedSentence realize(const EventRepresentation& e, const Lexicon& lex) {
  const Verdict verdict = validate_event(e, {}, &lex);
  if (!verdict.ok())
    throw RealizationError("cannot realize invalid event " + e.id + ": " +
                           join(verdict.violations, "; "));
  Emitter emitter{lex, {}, {}, 0};
  emitter.main_clause(e.main);

  AnnotatedSentence s;
  s.tokens = std::move(emitter.tokens);
  s.id = sentence_id_for(s.tokens);
  s.event = e;
  s.alignment = std::move(emitter.alignment);
  s.gold = gold_labels(e);
  return s;
}

void save_corpus(const std::vector<AnnotatedSentence>& corpus,
                 const std::filesystem::path& path) {
  std::string out;
  for (const AnnotatedSentence& s : corpus) {
    ojson j;
    j["id"] = s.id;
    j["tokens"] = s.tokens;
    j["event"] = ojson::parse(event_to_json(s.event));
    ojson align = ojson::array();
    for (const TokenAlignment& a : s.alignment) {
      align.push_back(
          ojson{{"token", a.token}, {"frame", a.frame}, {"slot", a.slot}, {"lemma", a.lemma}});
    }
    j["alignment"] = align;
    ojson gold;
    ojson pol;
    for (const auto& [verb, p] : s.gold.verb_polarity) pol[verb] = to_string(p);
    gold["polarity"] = pol;
    ojson roles = ojson::array();
    for (const RoleFact& fact : s.gold.roles) {
      roles.push_back(
          ojson{{"noun", fact.noun}, {"verb", fact.verb}, {"relation", to_string(fact.relation)}});
    }
    gold["roles"] = roles;
    gold["conflict"] = s.gold.conflict;
    j["gold"] = gold;
    out += j.dump();
    out += "\n";
  }
  atomic_write_file(path, out);
}

std::vector<AnnotatedSentence> load_corpus(const std::filesystem::path& path) {
  std::vector<AnnotatedSentence> corpus;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const ojson j = ojson::parse(line);
    AnnotatedSentence s;
    s.id = j.at("id").get<std::string>();
    s.tokens = j.at("tokens").get<std::vector<std::string>>();
    s.event = event_from_json(j.at("event").dump());
    for (const ojson& a : j.at("alignment")) {
      s.alignment.push_back({a.at("token").get<int>(), a.at("frame").get<int>(),
                             a.at("slot").get<std::string>(), a.at("lemma").get<std::string>()});
    }
    const ojson& gold = j.at("gold");
    for (const auto& [verb, p] : gold.at("polarity").items()) {
      s.gold.verb_polarity[verb] = polarity_from_string(p.get<std::string>());
    }
    for (const ojson& r : gold.at("roles")) {
      s.gold.roles.push_back({r.at("noun").get<std::string>(), r.at("verb").get<std::string>(),
                              role_from_string(r.at("relation").get<std::string>())});
    }
    s.gold.conflict = gold.at("conflict").get<bool>();
    corpus.push_back(std::move(s));
  }
  return corpus;
}

void export_plaintext(const std::vector<AnnotatedSentence>& corpus,
                      const std::filesystem::path& path) {
  std::string out;
  for (const AnnotatedSentence& s : corpus) {
    out += join(s.tokens, " ");
    out += "\n";
  }
  atomic_write_file(path, out);
}

}  // namespace sentprobe
