#include "sentprobe/generator.hpp"

#include <algorithm>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sentprobe/errors.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

using ojson = nlohmann::ordered_json;

namespace {

// Candidates are assignments over a per-template dimension list, iterated
// odometer-style. Canonical dimension order: verbs (main, then embedded),
// nouns (agent, patient, embedded others), numbers in the same slot order,
// then per-frame features in declared order, main clause first. Events are
// only materialized for candidates that survive all index-level filters.
struct Schema {
  StructuralTemplate tpl;

  struct Dim {
    std::vector<int> domain;
  };
  std::vector<Dim> dims;

  int main_verb = -1;
  std::vector<int> rc_verb;
  int agent_noun = -1;
  int patient_noun = -1;
  std::vector<int> rc_other_noun;  // -1 for intransitive embedded clauses
  int agent_number = -1;
  int patient_number = -1;
  std::vector<int> rc_other_number;

  struct FeatDims {
    int voice = -1, tense = -1, aspect = -1, polarity = -1, adverbs = -1;
  };
  std::vector<FeatDims> feats;  // [0] = main, then one per rc

  // prohibited partials compiled to conjunctions of dim==value conditions
  struct Matcher {
    std::vector<std::pair<int, int>> conditions;
  };
  std::vector<Matcher> prohibited;

  // lexeme membership tests, resolved to dim/value form
  struct LexemeProbe {
    std::vector<std::pair<int, int>> noun_or_verb_places;  // (dim, value)
    std::string adverb;                                    // non-empty if the lexeme is an adverb
  };
  std::vector<LexemeProbe> required_lexemes;
  std::vector<LexemeProbe> prohibited_lexemes;
  bool required_lexeme_unsatisfiable = false;

  LemmaDistinctness distinctness = LemmaDistinctness::global;
  bool post_match = false;  // multi-rc templates with rc constraints re-check built events
  const Constraint* constraint = nullptr;
  const std::vector<std::vector<std::string>>* adverb_sequences = nullptr;
  std::vector<std::string> nouns;
  std::vector<std::string> verbs;

  std::uint64_t candidate_count() const {
    std::uint64_t n = 1;
    for (const Dim& d : dims) n *= d.domain.size();
    return n;
  }
};

template <typename T>
std::vector<int> enum_domain(const std::vector<T>& values) {
  std::vector<int> out;
  out.reserve(values.size());
  for (const T& v : values) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<int> filter_domain(std::vector<int> domain, int required) {
  if (std::find(domain.begin(), domain.end(), required) == domain.end()) return {};
  return {required};
}

struct ShapeMismatch {
  std::string reason;
};

// Structural compatibility of a partial with a template. Returns a reason
// when the partial cannot embed; value-level conflicts are not shape
// mismatches (they yield empty streams instead).
std::optional<ShapeMismatch> shape_conflict(const StructuralTemplate& tpl, const PartialEvent& p) {
  if (p.main.transitivity && *p.main.transitivity != tpl.main_transitivity)
    return ShapeMismatch{"main transitivity differs from template"};
  if ((p.main.patient.noun || p.main.patient.number) &&
      tpl.main_transitivity == Transitivity::intransitive)
    return ShapeMismatch{"patient constrained on intransitive template"};
  const bool rc_constrained = p.rc.site || p.rc.gap || p.rc.transitivity || p.rc.verb ||
                              p.rc.features.voice || p.rc.features.tense || p.rc.features.aspect ||
                              p.rc.features.polarity || p.rc.other.noun || p.rc.other.number;
  if (p.rc.presence == RcRequirement::absent && tpl.has_rc())
    return ShapeMismatch{"relative clause prohibited but template has one"};
  if ((p.rc.presence == RcRequirement::present || rc_constrained) && !tpl.has_rc())
    return ShapeMismatch{"relative clause required but template has none"};
  if (rc_constrained && tpl.rcs.size() == 1) {
    const RcSpec& rc = tpl.rcs.front();
    if (p.rc.site && *p.rc.site != rc.site) return ShapeMismatch{"rc site differs"};
    if (p.rc.gap && *p.rc.gap != rc.gap) return ShapeMismatch{"rc gap differs"};
    if (p.rc.transitivity && *p.rc.transitivity != rc.transitivity)
      return ShapeMismatch{"rc transitivity differs"};
  }
  return std::nullopt;
}

int lemma_index(const std::vector<std::string>& list, const std::string& lemma) {
  const auto it = std::find(list.begin(), list.end(), lemma);
  return it == list.end() ? -1 : static_cast<int>(it - list.begin());
}

Schema compile_schema(const StructuralTemplate& tpl, const PartialEvent& partial,
                      const GenerationConfig& cfg) {
  if (const auto conflict = shape_conflict(tpl, partial))
    throw GenerationError("partial cannot embed in template " + tpl.name() + ": " +
                          conflict->reason);

  Schema s;
  s.tpl = tpl;
  s.distinctness = cfg.distinctness;
  s.constraint = &cfg.constraint;
  s.adverb_sequences = &cfg.features.adverb_sequences;
  s.nouns = cfg.lexicon.nouns();
  s.verbs = cfg.lexicon.verbs();

  const bool rc_constrained_multi =
      tpl.rcs.size() > 1 &&
      (partial.rc.site || partial.rc.gap || partial.rc.transitivity || partial.rc.verb ||
       partial.rc.features.voice || partial.rc.features.tense || partial.rc.features.aspect ||
       partial.rc.features.polarity || partial.rc.other.noun || partial.rc.other.number);
  s.post_match = rc_constrained_multi;

  auto add_dim = [&](std::vector<int> domain) {
    s.dims.push_back(Schema::Dim{std::move(domain)});
    return static_cast<int>(s.dims.size()) - 1;
  };
  auto verb_domain = [&](Transitivity t, const Wild<std::string>& fixed) {
    std::vector<int> domain;
    for (int i = 0; i < static_cast<int>(s.verbs.size()); ++i) {
      if (cfg.lexicon.verb_transitivity(s.verbs[i]) == t) domain.push_back(i);
    }
    if (fixed) {
      const int idx = lemma_index(s.verbs, *fixed);
      domain = idx < 0 ? std::vector<int>{} : filter_domain(std::move(domain), idx);
    }
    return domain;
  };
  auto noun_domain = [&](const Wild<std::string>& fixed) {
    std::vector<int> domain;
    for (int i = 0; i < static_cast<int>(s.nouns.size()); ++i) domain.push_back(i);
    if (fixed) {
      const int idx = lemma_index(s.nouns, *fixed);
      domain = idx < 0 ? std::vector<int>{} : filter_domain(std::move(domain), idx);
    }
    return domain;
  };
  auto number_domain = [&](const Wild<Number>& fixed) {
    std::vector<int> domain = enum_domain(cfg.features.numbers);
    if (fixed) domain = filter_domain(std::move(domain), static_cast<int>(*fixed));
    return domain;
  };
  auto voice_domain = [&](Transitivity frame_trans, bool object_gap, const Wild<Voice>& fixed) {
    std::vector<int> domain;
    for (Voice v : cfg.features.voices) {
      if (v == Voice::passive && frame_trans == Transitivity::intransitive) continue;
      if (v == Voice::passive && object_gap) continue;
      domain.push_back(static_cast<int>(v));
    }
    if (fixed) domain = filter_domain(std::move(domain), static_cast<int>(*fixed));
    return domain;
  };
  auto feature_domain = [&](auto values, auto fixed) {
    std::vector<int> domain = enum_domain(values);
    if (fixed) domain = filter_domain(std::move(domain), static_cast<int>(*fixed));
    return domain;
  };
  auto adverb_domain = [&]() {
    std::vector<int> domain;
    for (int i = 0; i < static_cast<int>(cfg.features.adverb_sequences.size()); ++i)
      domain.push_back(i);
    return domain;
  };

  const bool single_rc = tpl.rcs.size() == 1;
  const PartialRc no_rc_partial;
  auto rc_partial_for = [&](std::size_t) -> const PartialRc& {
    return (single_rc && !s.post_match) ? partial.rc : no_rc_partial;
  };

  // verbs
  s.main_verb = add_dim(verb_domain(tpl.main_transitivity, partial.main.verb));
  for (std::size_t i = 0; i < tpl.rcs.size(); ++i) {
    s.rc_verb.push_back(add_dim(verb_domain(tpl.rcs[i].transitivity, rc_partial_for(i).verb)));
  }
  // nouns
  s.agent_noun = add_dim(noun_domain(partial.main.agent.noun));
  if (tpl.main_transitivity == Transitivity::transitive)
    s.patient_noun = add_dim(noun_domain(partial.main.patient.noun));
  for (std::size_t i = 0; i < tpl.rcs.size(); ++i) {
    if (tpl.rcs[i].transitivity == Transitivity::transitive) {
      s.rc_other_noun.push_back(add_dim(noun_domain(rc_partial_for(i).other.noun)));
    } else {
      s.rc_other_noun.push_back(-1);
    }
  }
  // numbers
  s.agent_number = add_dim(number_domain(partial.main.agent.number));
  if (s.patient_noun >= 0) s.patient_number = add_dim(number_domain(partial.main.patient.number));
  for (std::size_t i = 0; i < tpl.rcs.size(); ++i) {
    s.rc_other_number.push_back(
        s.rc_other_noun[i] >= 0 ? add_dim(number_domain(rc_partial_for(i).other.number)) : -1);
  }
  // features: main, then each rc
  {
    Schema::FeatDims f;
    f.voice = add_dim(voice_domain(tpl.main_transitivity, false, partial.main.features.voice));
    f.tense = add_dim(feature_domain(cfg.features.tenses, partial.main.features.tense));
    f.aspect = add_dim(feature_domain(cfg.features.aspects, partial.main.features.aspect));
    f.polarity = add_dim(feature_domain(cfg.features.polarities, partial.main.features.polarity));
    f.adverbs = add_dim(adverb_domain());
    s.feats.push_back(f);
  }
  for (std::size_t i = 0; i < tpl.rcs.size(); ++i) {
    const PartialRc& prc = rc_partial_for(i);
    Schema::FeatDims f;
    f.voice = add_dim(voice_domain(tpl.rcs[i].transitivity,
                                   tpl.rcs[i].gap == GapType::object_gap, prc.features.voice));
    f.tense = add_dim(feature_domain(cfg.features.tenses, prc.features.tense));
    f.aspect = add_dim(feature_domain(cfg.features.aspects, prc.features.aspect));
    f.polarity = add_dim(feature_domain(cfg.features.polarities, prc.features.polarity));
    f.adverbs = add_dim(adverb_domain());
    s.feats.push_back(f);
  }

  // prohibited partials -> index-level matchers
  for (const PartialEvent& p : cfg.constraint.prohibited) {
    if (shape_conflict(tpl, p)) continue;  // can never match this template
    if (tpl.rcs.size() > 1) {
      const bool rc_constrained = p.rc.site || p.rc.gap || p.rc.transitivity || p.rc.verb ||
                                  p.rc.features.voice || p.rc.features.tense ||
                                  p.rc.features.aspect || p.rc.features.polarity ||
                                  p.rc.other.noun || p.rc.other.number;
      if (rc_constrained) {
        s.post_match = true;
        continue;
      }
    }
    Schema::Matcher m;
    bool impossible = false;
    auto cond = [&](int dim, int value) {
      if (dim < 0 || value < 0) { impossible = true; return; }
      m.conditions.emplace_back(dim, value);
    };
    if (p.main.verb) cond(s.main_verb, lemma_index(s.verbs, *p.main.verb));
    if (p.main.agent.noun) cond(s.agent_noun, lemma_index(s.nouns, *p.main.agent.noun));
    if (p.main.agent.number) cond(s.agent_number, static_cast<int>(*p.main.agent.number));
    if (p.main.patient.noun) cond(s.patient_noun, lemma_index(s.nouns, *p.main.patient.noun));
    if (p.main.patient.number) cond(s.patient_number, static_cast<int>(*p.main.patient.number));
    if (p.main.features.voice) cond(s.feats[0].voice, static_cast<int>(*p.main.features.voice));
    if (p.main.features.tense) cond(s.feats[0].tense, static_cast<int>(*p.main.features.tense));
    if (p.main.features.aspect) cond(s.feats[0].aspect, static_cast<int>(*p.main.features.aspect));
    if (p.main.features.polarity)
      cond(s.feats[0].polarity, static_cast<int>(*p.main.features.polarity));
    if (tpl.rcs.size() == 1) {
      if (p.rc.verb) cond(s.rc_verb[0], lemma_index(s.verbs, *p.rc.verb));
      if (p.rc.other.noun) cond(s.rc_other_noun[0], lemma_index(s.nouns, *p.rc.other.noun));
      if (p.rc.other.number) cond(s.rc_other_number[0], static_cast<int>(*p.rc.other.number));
      if (p.rc.features.voice) cond(s.feats[1].voice, static_cast<int>(*p.rc.features.voice));
      if (p.rc.features.tense) cond(s.feats[1].tense, static_cast<int>(*p.rc.features.tense));
      if (p.rc.features.aspect) cond(s.feats[1].aspect, static_cast<int>(*p.rc.features.aspect));
      if (p.rc.features.polarity)
        cond(s.feats[1].polarity, static_cast<int>(*p.rc.features.polarity));
    }
    if (!impossible) s.prohibited.push_back(std::move(m));
  }

  // lexeme sets -> dim probes
  auto make_probe = [&](const std::string& lexeme, Schema::LexemeProbe& probe) -> bool {
    if (cfg.lexicon.is_adverb(lexeme)) {
      probe.adverb = lexeme;
      return true;
    }
    bool found = false;
    const int n = lemma_index(s.nouns, lexeme);
    if (n >= 0) {
      for (int dim : {s.agent_noun, s.patient_noun}) {
        if (dim >= 0) { probe.noun_or_verb_places.emplace_back(dim, n); found = true; }
      }
      for (int dim : s.rc_other_noun) {
        if (dim >= 0) { probe.noun_or_verb_places.emplace_back(dim, n); found = true; }
      }
    }
    const int v = lemma_index(s.verbs, lexeme);
    if (v >= 0) {
      probe.noun_or_verb_places.emplace_back(s.main_verb, v);
      for (int dim : s.rc_verb) probe.noun_or_verb_places.emplace_back(dim, v);
      found = true;
    }
    return found;
  };
  for (const std::string& lexeme : cfg.constraint.required_lexemes) {
    Schema::LexemeProbe probe;
    if (!make_probe(lexeme, probe)) {
      s.required_lexeme_unsatisfiable = true;
    } else {
      s.required_lexemes.push_back(std::move(probe));
    }
  }
  for (const std::string& lexeme : cfg.constraint.prohibited_lexemes) {
    Schema::LexemeProbe probe;
    if (make_probe(lexeme, probe)) s.prohibited_lexemes.push_back(std::move(probe));
  }

  return s;
}

// value of dim under assignment, or -1 for absent dims
int dim_value(const Schema& s, const std::vector<std::size_t>& idx, int dim) {
  if (dim < 0) return -1;
  return s.dims[dim].domain[idx[dim]];
}

bool probe_present(const Schema& s, const std::vector<std::size_t>& idx,
                   const Schema::LexemeProbe& probe) {
  for (const auto& [dim, value] : probe.noun_or_verb_places) {
    if (dim_value(s, idx, dim) == value) return true;
  }
  if (!probe.adverb.empty()) {
    for (const Schema::FeatDims& f : s.feats) {
      const auto& seq = (*s.adverb_sequences)[dim_value(s, idx, f.adverbs)];
      if (std::find(seq.begin(), seq.end(), probe.adverb) != seq.end()) return true;
    }
  }
  return false;
}

bool candidate_passes(const Schema& s, const std::vector<std::size_t>& idx) {
  // lemma distinctness
  const int agent = dim_value(s, idx, s.agent_noun);
  const int patient = dim_value(s, idx, s.patient_noun);
  if (patient >= 0 && patient == agent) return false;
  for (std::size_t i = 0; i < s.tpl.rcs.size(); ++i) {
    const int other = dim_value(s, idx, s.rc_other_noun[i]);
    if (other < 0) continue;
    const int head = s.tpl.rcs[i].site == Role::agent ? agent : patient;
    if (other == head) return false;
    if (s.distinctness == LemmaDistinctness::global) {
      if (other == agent || (patient >= 0 && other == patient)) return false;
      for (std::size_t j = 0; j < i; ++j) {
        if (other == dim_value(s, idx, s.rc_other_noun[j])) return false;
      }
    }
  }
  if (s.distinctness == LemmaDistinctness::global) {
    const int mv = dim_value(s, idx, s.main_verb);
    for (std::size_t i = 0; i < s.rc_verb.size(); ++i) {
      const int rv = dim_value(s, idx, s.rc_verb[i]);
      if (rv == mv) return false;
      for (std::size_t j = 0; j < i; ++j) {
        if (rv == dim_value(s, idx, s.rc_verb[j])) return false;
      }
    }
  }
  // prohibited partial matchers
  for (const Schema::Matcher& m : s.prohibited) {
    bool all = true;
    for (const auto& [dim, value] : m.conditions) {
      if (dim_value(s, idx, dim) != value) { all = false; break; }
    }
    if (all) return false;
  }
  // lexeme sets
  if (s.required_lexeme_unsatisfiable) return false;
  for (const Schema::LexemeProbe& probe : s.required_lexemes) {
    if (!probe_present(s, idx, probe)) return false;
  }
  for (const Schema::LexemeProbe& probe : s.prohibited_lexemes) {
    if (probe_present(s, idx, probe)) return false;
  }
  return true;
}

EventRepresentation build_event(const Schema& s, const std::vector<std::size_t>& idx) {
  ClauseFrame main;
  main.verb = s.verbs[dim_value(s, idx, s.main_verb)];
  main.transitivity = s.tpl.main_transitivity;
  const Schema::FeatDims& mf = s.feats[0];
  main.features.voice = static_cast<Voice>(dim_value(s, idx, mf.voice));
  main.features.tense = static_cast<Tense>(dim_value(s, idx, mf.tense));
  main.features.aspect = static_cast<Aspect>(dim_value(s, idx, mf.aspect));
  main.features.polarity = static_cast<Polarity>(dim_value(s, idx, mf.polarity));
  main.features.adverbs = (*s.adverb_sequences)[dim_value(s, idx, mf.adverbs)];

  main.agent.noun = s.nouns[dim_value(s, idx, s.agent_noun)];
  main.agent.number = static_cast<Number>(dim_value(s, idx, s.agent_number));
  main.agent.role = Role::agent;
  if (s.patient_noun >= 0) {
    ArgumentSlot p;
    p.noun = s.nouns[dim_value(s, idx, s.patient_noun)];
    p.number = static_cast<Number>(dim_value(s, idx, s.patient_number));
    p.role = Role::patient;
    main.patient = std::move(p);
  }

  for (std::size_t i = 0; i < s.tpl.rcs.size(); ++i) {
    const RcSpec& spec = s.tpl.rcs[i];
    ArgumentSlot& head = spec.site == Role::agent ? main.agent : *main.patient;

    ClauseFrame rcf;
    rcf.verb = s.verbs[dim_value(s, idx, s.rc_verb[i])];
    rcf.transitivity = spec.transitivity;
    const Schema::FeatDims& ff = s.feats[i + 1];
    rcf.features.voice = static_cast<Voice>(dim_value(s, idx, ff.voice));
    rcf.features.tense = static_cast<Tense>(dim_value(s, idx, ff.tense));
    rcf.features.aspect = static_cast<Aspect>(dim_value(s, idx, ff.aspect));
    rcf.features.polarity = static_cast<Polarity>(dim_value(s, idx, ff.polarity));
    rcf.features.adverbs = (*s.adverb_sequences)[dim_value(s, idx, ff.adverbs)];

    ArgumentSlot head_copy;
    head_copy.noun = head.noun;
    head_copy.number = head.number;
    std::optional<ArgumentSlot> other;
    if (s.rc_other_noun[i] >= 0) {
      ArgumentSlot o;
      o.noun = s.nouns[dim_value(s, idx, s.rc_other_noun[i])];
      o.number = static_cast<Number>(dim_value(s, idx, s.rc_other_number[i]));
      other = std::move(o);
    }

    if (spec.gap == GapType::object_gap) {
      rcf.agent = *other;
      rcf.agent.role = Role::agent;
      head_copy.role = Role::patient;
      rcf.patient = head_copy;
    } else if (rcf.features.voice == Voice::passive) {
      rcf.agent = *other;
      rcf.agent.role = Role::agent;
      head_copy.role = Role::patient;
      rcf.patient = head_copy;
    } else {
      head_copy.role = Role::agent;
      rcf.agent = head_copy;
      if (other) {
        other->role = Role::patient;
        rcf.patient = std::move(other);
      }
    }

    head.rc = RelativeClause{spec.gap, std::make_shared<const ClauseFrame>(std::move(rcf))};
  }

  return EventRepresentation::make(std::move(main));
}

bool advance_odometer(const Schema& s, std::vector<std::size_t>& idx) {
  for (std::size_t d = s.dims.size(); d-- > 0;) {
    if (++idx[d] < s.dims[d].domain.size()) return true;
    idx[d] = 0;
  }
  return false;
}

bool schema_empty(const Schema& s) {
  for (const Schema::Dim& d : s.dims) {
    if (d.domain.empty()) return true;
  }
  return s.dims.empty();
}

}  // namespace

struct PopulateStream::Impl {
  Schema schema;
  GenerationConfig cfg;  // keeps lexicon/adverb sequences alive
  std::vector<std::size_t> idx;
  bool exhausted = false;
  bool first = true;
};

PopulateStream::PopulateStream(const StructuralTemplate& tpl, const PartialEvent& partial,
                               const GenerationConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
  impl_->cfg = cfg;
  impl_->schema = compile_schema(tpl, partial, impl_->cfg);
  impl_->schema.constraint = &impl_->cfg.constraint;
  impl_->schema.adverb_sequences = &impl_->cfg.features.adverb_sequences;
  impl_->idx.assign(impl_->schema.dims.size(), 0);
  impl_->exhausted = schema_empty(impl_->schema);
}

PopulateStream::~PopulateStream() = default;
PopulateStream::PopulateStream(PopulateStream&&) noexcept = default;
PopulateStream& PopulateStream::operator=(PopulateStream&&) noexcept = default;

bool PopulateStream::next(EventRepresentation& out) {
  Impl& im = *impl_;
  while (!im.exhausted) {
    if (!im.first) {
      if (!advance_odometer(im.schema, im.idx)) {
        im.exhausted = true;
        break;
      }
    }
    im.first = false;
    if (!candidate_passes(im.schema, im.idx)) continue;
    EventRepresentation e = build_event(im.schema, im.idx);
    if (im.schema.post_match && !match_constraint(e, *im.schema.constraint)) continue;
    out = std::move(e);
    return true;
  }
  return false;
}

std::vector<EventRepresentation> populate_all(const StructuralTemplate& tpl,
                                              const PartialEvent& partial,
                                              const GenerationConfig& cfg) {
  PopulateStream stream(tpl, partial, cfg);
  std::vector<EventRepresentation> out;
  EventRepresentation e;
  while (stream.next(e)) out.push_back(std::move(e));
  return out;
}

std::string GenerationConfig::signature() const {
  std::string s = lexicon.signature();
  s += "|limits:" + std::to_string(limits.max_relative_clauses) +
       std::to_string(limits.allow_rc_on_agent) + std::to_string(limits.allow_rc_on_patient);
  s += "|constraint:" + constraint_to_text(constraint);
  s += "|voices:";
  for (Voice v : features.voices) s += to_string(v) + ",";
  s += "|tenses:";
  for (Tense v : features.tenses) s += to_string(v) + ",";
  s += "|aspects:";
  for (Aspect v : features.aspects) s += to_string(v) + ",";
  s += "|polarities:";
  for (Polarity v : features.polarities) s += to_string(v) + ",";
  s += "|numbers:";
  for (Number v : features.numbers) s += to_string(v) + ",";
  s += "|adverbs:";
  for (const auto& seq : features.adverb_sequences) s += join(seq, "+") + ";";
  s += "|distinct:" + std::to_string(static_cast<int>(distinctness));
  s += "|cap:" + std::to_string(max_pool_size);
  s += "|seed:" + std::to_string(seed);
  return "g" + to_hex(fnv1a64(s));
}

EventPool generate_pool(const GenerationConfig& cfg) {
  EventPool pool;
  pool.config_hash = cfg.signature();

  struct Item {
    std::uint64_t ordinal;
    EventRepresentation event;
  };
  std::vector<Item> reservoir;
  const std::uint64_t cap = cfg.max_pool_size == 0 ? UINT64_MAX : cfg.max_pool_size;
  Rng rng(mix64(cfg.seed ^ 0x706f6f6cULL));
  std::uint64_t matched = 0;

  for (const StructuralTemplate& tpl : enumerate_templates(cfg.limits)) {
    if (shape_conflict(tpl, cfg.constraint.required)) continue;
    Schema schema = compile_schema(tpl, cfg.constraint.required, cfg);
    if (schema_empty(schema)) continue;
    std::vector<std::size_t> idx(schema.dims.size(), 0);
    std::uint64_t tpl_count = 0;
    bool more = true;
    while (more) {
      if (candidate_passes(schema, idx)) {
        bool admit_checked = false;
        std::uint64_t slot = 0;
        if (reservoir.size() < cap) {
          admit_checked = true;
          slot = reservoir.size();
        } else {
          slot = rng.below(matched + 1);
          admit_checked = slot < cap;
        }
        bool counted = true;
        if (schema.post_match || admit_checked) {
          EventRepresentation e = build_event(schema, idx);
          if (schema.post_match && !match_constraint(e, cfg.constraint)) {
            counted = false;
          } else if (admit_checked) {
            if (slot == reservoir.size()) {
              reservoir.push_back(Item{matched, std::move(e)});
            } else {
              reservoir[slot] = Item{matched, std::move(e)};
            }
          }
        }
        if (counted) {
          ++matched;
          ++tpl_count;
        }
      }
      more = advance_odometer(schema, idx);
    }
    if (tpl_count) pool.per_template_counts[tpl.name()] = tpl_count;
  }

  pool.exhaustive_count = matched;
  pool.subsampled = matched > cap;
  std::sort(reservoir.begin(), reservoir.end(),
            [](const Item& a, const Item& b) { return a.ordinal < b.ordinal; });
  pool.events.reserve(reservoir.size());
  for (Item& item : reservoir) pool.events.push_back(std::move(item.event));
  dedupe(pool);
  if (pool.events.empty()) pool.warnings.push_back("empty pool: constraints are unsatisfiable");
  return pool;
}

void dedupe(EventPool& pool) {
  std::set<std::string> seen;
  std::vector<EventRepresentation> unique;
  unique.reserve(pool.events.size());
  for (EventRepresentation& e : pool.events) {
    if (seen.insert(e.id).second) unique.push_back(std::move(e));
  }
  pool.events = std::move(unique);
}

namespace {

ClauseFrame with_adverbs(const ClauseFrame& frame, const AdverbDecorationConfig& cfg, Rng& rng) {
  ClauseFrame out = frame;
  const int span = cfg.max_run - cfg.min_run + 1;
  const int run = cfg.min_run + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
  std::vector<std::string> inventory = cfg.adverbs;
  rng.shuffle(inventory);
  out.features.adverbs.assign(inventory.begin(),
                              inventory.begin() + std::min<std::size_t>(run, inventory.size()));
  auto decorate_slot = [&](std::optional<ArgumentSlot>& slot) {
    if (slot && slot->rc && slot->rc->frame) {
      RelativeClause rc = *slot->rc;
      rc.frame = std::make_shared<const ClauseFrame>(with_adverbs(*rc.frame, cfg, rng));
      slot->rc = std::move(rc);
    }
  };
  if (out.agent.rc && out.agent.rc->frame) {
    RelativeClause rc = *out.agent.rc;
    rc.frame = std::make_shared<const ClauseFrame>(with_adverbs(*rc.frame, cfg, rng));
    out.agent.rc = std::move(rc);
  }
  decorate_slot(out.patient);
  return out;
}

}  // namespace

EventPool decorate_adverbs(const EventPool& pool, const AdverbDecorationConfig& cfg) {
  if (cfg.adverbs.empty() || cfg.min_run < 0 || cfg.max_run < cfg.min_run)
    throw GenerationError("bad adverb decoration config");
  if (cfg.max_run > static_cast<int>(cfg.adverbs.size()))
    throw GenerationError("adverb run longer than inventory");
  EventPool out;
  out.config_hash = pool.config_hash;
  out.exhaustive_count = pool.exhaustive_count;
  out.subsampled = pool.subsampled;
  out.per_template_counts = pool.per_template_counts;
  out.events.reserve(pool.events.size());
  for (const EventRepresentation& e : pool.events) {
    Rng rng(mix64(cfg.seed ^ fnv1a64(e.id)));
    out.events.push_back(EventRepresentation::make(with_adverbs(e.main, cfg, rng)));
  }
  dedupe(out);
  return out;
}

void save_pool(const EventPool& pool, const std::filesystem::path& events_path,
               const std::filesystem::path& manifest_path) {
  std::string lines;
  for (const EventRepresentation& e : pool.events) {
    lines += event_to_json(e);
    lines += "\n";
  }
  atomic_write_file(events_path, lines);

  ojson m;
  m["config_hash"] = pool.config_hash;
  m["count"] = pool.events.size();
  m["exhaustive_count"] = pool.exhaustive_count;
  m["subsampled"] = pool.subsampled;
  ojson counts;
  for (const auto& [name, n] : pool.per_template_counts) counts[name] = n;
  m["per_template_counts"] = counts;
  m["warnings"] = pool.warnings;
  atomic_write_file(manifest_path, m.dump(2) + "\n");
}

EventPool load_pool(const std::filesystem::path& events_path,
                    const std::filesystem::path& manifest_path) {
  EventPool pool;
  const std::string text = read_file(events_path);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    pool.events.push_back(event_from_json(line));
  }
  const ojson m = ojson::parse(read_file(manifest_path));
  pool.config_hash = m.at("config_hash").get<std::string>();
  pool.exhaustive_count = m.at("exhaustive_count").get<std::uint64_t>();
  pool.subsampled = m.at("subsampled").get<bool>();
  for (const auto& [key, value] : m.at("per_template_counts").items()) {
    pool.per_template_counts[key] = value.get<std::uint64_t>();
  }
  pool.warnings = m.at("warnings").get<std::vector<std::string>>();
  return pool;
}

}  // namespace sentprobe
