#include "sentprobe/lexicon.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "sentprobe/errors.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

namespace {

Lexicon::Entry noun_entry(const std::string& lemma, const std::string& sg, const std::string& pl) {
  Lexicon::Entry e;
  e.lemma = lemma;
  e.pos = Pos::noun;
  e.noun = {sg, pl};
  return e;
}

Lexicon::Entry verb_entry(const std::string& lemma, Transitivity t, const std::string& base,
                          const std::string& s3, const std::string& past, const std::string& pp,
                          const std::string& ing) {
  Lexicon::Entry e;
  e.lemma = lemma;
  e.pos = Pos::verb;
  e.transitivity = t;
  e.verb = {base, s3, past, pp, ing};
  return e;
}

Lexicon::Entry adverb_entry(const std::string& lemma) {
  Lexicon::Entry e;
  e.lemma = lemma;
  e.pos = Pos::adverb;
  return e;
}

void check_complete(const Lexicon::Entry& e) {
  switch (e.pos) {
    case Pos::noun:
      if (e.noun.singular.empty() || e.noun.plural.empty())
        throw LexiconError("incomplete noun paradigm for lemma: " + e.lemma);
      break;
    case Pos::verb:
      if (e.verb.base.empty() || e.verb.pres_3sg.empty() || e.verb.past.empty() ||
          e.verb.past_participle.empty() || e.verb.present_participle.empty())
        throw LexiconError("incomplete verb paradigm for lemma: " + e.lemma);
      break;
    case Pos::adverb:
      break;
  }
}

}  // namespace

Lexicon Lexicon::builtin() {
  std::vector<Entry> entries;
  entries.push_back(noun_entry("man", "man", "men"));
  entries.push_back(noun_entry("woman", "woman", "women"));
  entries.push_back(noun_entry("lawyer", "lawyer", "lawyers"));
  entries.push_back(noun_entry("student", "student", "students"));
  entries.push_back(noun_entry("professor", "professor", "professors"));
  entries.push_back(noun_entry("scientist", "scientist", "scientists"));
  entries.push_back(noun_entry("doctor", "doctor", "doctors"));
  entries.push_back(verb_entry("sleep", Transitivity::intransitive, "sleep", "sleeps", "slept",
                               "slept", "sleeping"));
  entries.push_back(verb_entry("dance", Transitivity::intransitive, "dance", "dances", "danced",
                               "danced", "dancing"));
  entries.push_back(verb_entry("follow", Transitivity::transitive, "follow", "follows", "followed",
                               "followed", "following"));
  entries.push_back(
      verb_entry("meet", Transitivity::transitive, "meet", "meets", "met", "met", "meeting"));
  entries.push_back(
      verb_entry("help", Transitivity::transitive, "help", "helps", "helped", "helped", "helping"));
  entries.push_back(
      verb_entry("call", Transitivity::transitive, "call", "calls", "called", "called", "calling"));
  entries.push_back(verb_entry("recommend", Transitivity::transitive, "recommend", "recommends",
                               "recommended", "recommended", "recommending"));
  for (const char* adv : {"really", "actually", "totally", "definitely", "certainly", "probably",
                          "clearly", "obviously", "apparently", "truly"}) {
    entries.push_back(adverb_entry(adv));
  }
  return from_entries(std::move(entries));
}

Lexicon Lexicon::from_entries(std::vector<Entry> entries) {
  Lexicon lex;
  lex.entries_ = std::move(entries);
  for (std::size_t i = 0; i < lex.entries_.size(); ++i) {
    const Entry& e = lex.entries_[i];
    check_complete(e);
    if (lex.by_lemma_.count(e.lemma)) throw LexiconError("duplicate lemma: " + e.lemma);
    lex.by_lemma_[e.lemma] = i;
    switch (e.pos) {
      case Pos::noun: lex.nouns_.push_back(e.lemma); break;
      case Pos::verb: lex.verbs_.push_back(e.lemma); break;
      case Pos::adverb: lex.adverbs_.push_back(e.lemma); break;
    }
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::vector<std::string> fields = split(t, '\t');
    if (fields.size() < 3)
      throw ParseError("vocabulary line " + std::to_string(lineno) + ": expected at least 3 fields");
    Entry e;
    e.lemma = trim(fields[0]);
    const std::string pos = trim(fields[1]);
    std::map<std::string, std::string> kv;
    for (std::size_t i = 3; i < fields.size(); ++i) {
      const std::string f = trim(fields[i]);
      if (f.empty()) continue;
      const auto eq = f.find('=');
      if (eq == std::string::npos)
        throw ParseError("vocabulary line " + std::to_string(lineno) + ": bad inflection field '" +
                         f + "'");
      kv[trim(f.substr(0, eq))] = trim(f.substr(eq + 1));
    }
    auto need = [&](const char* key) {
      auto it = kv.find(key);
      if (it == kv.end())
        throw LexiconError("vocabulary line " + std::to_string(lineno) + ": lemma '" + e.lemma +
                           "' missing inflection '" + key + "'");
      return it->second;
    };
    if (pos == "noun") {
      e.pos = Pos::noun;
      e.noun = {need("singular"), need("plural")};
    } else if (pos == "verb") {
      e.pos = Pos::verb;
      const std::string trans = trim(fields[2]);
      if (trans == "transitive") e.transitivity = Transitivity::transitive;
      else if (trans == "intransitive") e.transitivity = Transitivity::intransitive;
      else throw ParseError("vocabulary line " + std::to_string(lineno) + ": bad transitivity '" +
                            trans + "'");
      e.verb = {need("base"), need("pres3sg"), need("past"), need("pastpart"), need("prespart")};
    } else if (pos == "adverb") {
      e.pos = Pos::adverb;
    } else {
      throw ParseError("vocabulary line " + std::to_string(lineno) + ": unknown POS '" + pos + "'");
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw LexiconError("empty vocabulary file: " + path.string());
  return from_entries(std::move(entries));
}

void Lexicon::save(const std::filesystem::path& path) const {
  std::string out;
  for (const Entry& e : entries_) {
    switch (e.pos) {
      case Pos::noun:
        out += e.lemma + "\tnoun\t-\tsingular=" + e.noun.singular + "\tplural=" + e.noun.plural;
        break;
      case Pos::verb:
        out += e.lemma + "\tverb\t" +
               (e.transitivity == Transitivity::transitive ? "transitive" : "intransitive") +
               "\tbase=" + e.verb.base + "\tpres3sg=" + e.verb.pres_3sg + "\tpast=" + e.verb.past +
               "\tpastpart=" + e.verb.past_participle + "\tprespart=" + e.verb.present_participle;
        break;
      case Pos::adverb:
        out += e.lemma + "\tadverb\t-\tform=" + e.lemma;
        break;
    }
    out += "\n";
  }
  atomic_write_file(path, out);
}

Lexicon Lexicon::subset(const std::vector<std::string>& lemmas) const {
  std::vector<Entry> entries;
  for (const std::string& lemma : lemmas) entries.push_back(entry(lemma));
  return from_entries(std::move(entries));
}

std::vector<std::string> Lexicon::verbs(Transitivity t) const {
  std::vector<std::string> out;
  for (const std::string& v : verbs_) {
    if (verb_transitivity(v) == t) out.push_back(v);
  }
  return out;
}

std::vector<std::string> Lexicon::probe_lemmas() const {
  std::vector<std::string> out = nouns_;
  out.insert(out.end(), verbs_.begin(), verbs_.end());
  return out;
}

bool Lexicon::contains(const std::string& lemma) const { return by_lemma_.count(lemma) != 0; }

bool Lexicon::is_noun(const std::string& lemma) const {
  auto it = by_lemma_.find(lemma);
  return it != by_lemma_.end() && entries_[it->second].pos == Pos::noun;
}

bool Lexicon::is_verb(const std::string& lemma) const {
  auto it = by_lemma_.find(lemma);
  return it != by_lemma_.end() && entries_[it->second].pos == Pos::verb;
}

bool Lexicon::is_adverb(const std::string& lemma) const {
  auto it = by_lemma_.find(lemma);
  return it != by_lemma_.end() && entries_[it->second].pos == Pos::adverb;
}

Transitivity Lexicon::verb_transitivity(const std::string& lemma) const {
  const Entry& e = entry(lemma);
  if (e.pos != Pos::verb) throw LexiconError("not a verb: " + lemma);
  return e.transitivity;
}

const NounParadigm& Lexicon::noun_paradigm(const std::string& lemma) const {
  const Entry& e = entry(lemma);
  if (e.pos != Pos::noun) throw LexiconError("not a noun: " + lemma);
  return e.noun;
}

const VerbParadigm& Lexicon::verb_paradigm(const std::string& lemma) const {
  const Entry& e = entry(lemma);
  if (e.pos != Pos::verb) throw LexiconError("not a verb: " + lemma);
  return e.verb;
}

std::vector<std::string> Lexicon::forms_of(const std::string& lemma) const {
  const Entry& e = entry(lemma);
  std::vector<std::string> forms;
  switch (e.pos) {
    case Pos::noun: forms = {e.noun.singular, e.noun.plural}; break;
    case Pos::verb:
      forms = {e.verb.base, e.verb.pres_3sg, e.verb.past, e.verb.past_participle,
               e.verb.present_participle};
      break;
    case Pos::adverb: forms = {e.lemma}; break;
  }
  std::sort(forms.begin(), forms.end());
  forms.erase(std::unique(forms.begin(), forms.end()), forms.end());
  return forms;
}

std::vector<std::string> Lexicon::surface_forms() const {
  std::set<std::string> forms{"the", "that", "by", "not", "is", "are", "was",
                              "were", "being", "do", "does", "did"};
  for (const Entry& e : entries_) {
    for (const std::string& f : forms_of(e.lemma)) forms.insert(f);
  }
  return {forms.begin(), forms.end()};
}

std::string Lexicon::signature() const {
  std::string s;
  for (const Entry& e : entries_) {
    s += e.lemma + "|" + std::to_string(static_cast<int>(e.pos)) + "|" +
         std::to_string(static_cast<int>(e.transitivity)) + "|" + e.noun.singular + "," +
         e.noun.plural + "|" + e.verb.base + "," + e.verb.pres_3sg + "," + e.verb.past + "," +
         e.verb.past_participle + "," + e.verb.present_participle + ";";
  }
  return "x" + to_hex(fnv1a64(s));
}

const Lexicon::Entry& Lexicon::entry(const std::string& lemma) const {
  auto it = by_lemma_.find(lemma);
  if (it == by_lemma_.end()) throw LexiconError("unknown lemma: " + lemma);
  return entries_[it->second];
}

std::string be_form(Tense tense, Number number) {
  if (tense == Tense::present) return number == Number::singular ? "is" : "are";
  return number == Number::singular ? "was" : "were";
}

std::string do_form(Tense tense, Number number) {
  if (tense == Tense::past) return "did";
  return number == Number::singular ? "does" : "do";
}

}  // namespace sentprobe
