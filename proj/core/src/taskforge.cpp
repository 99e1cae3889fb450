#include "sentprobe/taskforge.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sentprobe/errors.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

using ojson = nlohmann::ordered_json;

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::semrole: return "semrole";
    case TaskKind::negation: return "negation";
    case TaskKind::content1: return "content1";
    case TaskKind::content2: return "content2";
    case TaskKind::order: return "order";
  }
  return "?";
}

TaskKind task_from_string(const std::string& s) {
  if (s == "semrole") return TaskKind::semrole;
  if (s == "negation") return TaskKind::negation;
  if (s == "content1") return TaskKind::content1;
  if (s == "content2") return TaskKind::content2;
  if (s == "order") return TaskKind::order;
  throw ParseError("unknown task: " + s);
}

const AnnotatedSentence& TaskDataset::sentence(const std::string& id) const {
  auto it = sentence_index.find(id);
  if (it == sentence_index.end()) throw Error("unknown sentence id: " + id);
  return sentences[it->second];
}

namespace {

void register_sentence(TaskDataset& ds, AnnotatedSentence s) {
  if (ds.sentence_index.count(s.id)) return;
  ds.sentence_index[s.id] = ds.sentences.size();
  ds.sentences.push_back(std::move(s));
}

// Deterministic 80/20 sentence-level split keyed on content ids.
bool hashed_to_test(const std::string& id, std::uint64_t seed) {
  return mix64(fnv1a64(id) ^ seed) % 5 == 0;
}

std::uint64_t stratum_seed(std::uint64_t seed, const std::string& key) {
  return mix64(seed ^ fnv1a64(key));
}

struct PairCount {
  long long pos = 0;
  long long neg = 0;
};

void check_exact_balance(const TaskDataset& ds) {
  for (const auto* split : {&ds.train, &ds.test}) {
    long long pos = 0;
    for (const TaskInstance& i : *split) pos += i.label;
    if (2 * pos != static_cast<long long>(split->size()))
      throw Error("internal: split labels not balanced for task " + to_string(ds.task));
  }
}

// ---------------- semrole ----------------

struct ClauseEntry {
  std::string agent;
  std::string patient;
  std::string verb;
};

std::vector<ClauseEntry> transitive_clauses(const EventRepresentation& e) {
  std::vector<ClauseEntry> out;
  auto visit = [&](const ClauseFrame& f) {
    if (f.transitivity == Transitivity::transitive && f.patient)
      out.push_back({f.agent.noun, f.patient->noun, f.verb});
  };
  visit(e.main);
  if (e.main.agent.rc && e.main.agent.rc->frame) visit(*e.main.agent.rc->frame);
  if (e.main.patient && e.main.patient->rc && e.main.patient->rc->frame)
    visit(*e.main.patient->rc->frame);
  return out;
}

std::string pair_key(const std::string& a, const std::string& b) {
  return a < b ? a + "|" + b : b + "|" + a;
}

}  // namespace

TaskDataset build_semrole(const EventPool& pool, const Lexicon& lex, const TaskBuildConfig& cfg) {
  TaskDataset ds;
  ds.task = TaskKind::semrole;

  const std::vector<std::string> trans_verbs = lex.verbs(Transitivity::transitive);
  if (trans_verbs.empty()) throw InsufficientPoolError("semrole: no transitive verbs in vocabulary");

  // candidate events per stratum (unordered noun pair x verb) and
  // orientation (0 = lexicographically smaller noun is the agent);
  // realization is deferred until an event is actually claimed
  struct Candidate {
    const EventRepresentation* event;
    ClauseEntry clause;
  };
  std::map<std::string, std::array<std::vector<Candidate>, 2>> strata;

  for (const EventRepresentation& e : pool.events) {
    const GoldAnnotations gold = gold_labels(e);
    if (gold.conflict) continue;
    for (const ClauseEntry& c : transitive_clauses(e)) {
      const int orientation = c.agent < c.patient ? 0 : 1;
      strata[pair_key(c.agent, c.patient) + "|" + c.verb][orientation].push_back(
          Candidate{&e, c});
    }
  }

  // choose held-out probe-pair strata; both (noun, verb) pairs of a chosen
  // stratum are reserved for test
  const std::size_t all_pairs = lex.nouns().size() * trans_verbs.size();
  const std::size_t want_test_pairs = static_cast<std::size_t>(
      cfg.policy.semrole_pair_holdout_fraction * static_cast<double>(all_pairs) + 0.5);
  const std::size_t want_strata = std::max<std::size_t>(1, want_test_pairs / 2);
  const std::size_t test_quota_sentences = cfg.test_size / 2;
  const std::size_t per_stratum_need =
      (test_quota_sentences + want_strata - 1) / want_strata / 2 + 1;

  std::vector<std::string> stratum_keys;
  for (const std::string& na : lex.nouns()) {
    for (const std::string& nb : lex.nouns()) {
      if (na >= nb) continue;
      for (const std::string& v : trans_verbs) stratum_keys.push_back(pair_key(na, nb) + "|" + v);
    }
  }
  {
    Rng rng(stratum_seed(cfg.seed, "semrole-holdout"));
    rng.shuffle(stratum_keys);
  }

  std::set<std::pair<std::string, std::string>> heldout;  // (noun, verb)
  std::vector<std::string> test_strata;
  auto coverage_ok = [&](const std::set<std::pair<std::string, std::string>>& t) {
    // every noun and every verb must keep at least one whole train stratum
    for (const std::string& n : lex.nouns()) {
      bool ok = false;
      for (const std::string& other : lex.nouns()) {
        if (other == n) continue;
        for (const std::string& v : trans_verbs) {
          if (!t.count({n, v}) && !t.count({other, v})) { ok = true; break; }
        }
        if (ok) break;
      }
      if (!ok) return false;
    }
    for (const std::string& v : trans_verbs) {
      bool ok = false;
      for (const std::string& na : lex.nouns()) {
        for (const std::string& nb : lex.nouns()) {
          if (na >= nb) continue;
          if (!t.count({na, v}) && !t.count({nb, v})) { ok = true; break; }
        }
        if (ok) break;
      }
      if (!ok) return false;
    }
    return true;
  };
  for (const std::string& key : stratum_keys) {
    if (test_strata.size() >= want_strata) break;
    const auto it = strata.find(key);
    if (it == strata.end()) continue;
    if (it->second[0].size() < per_stratum_need || it->second[1].size() < per_stratum_need)
      continue;
    const std::vector<std::string> parts = split(key, '|');
    std::set<std::pair<std::string, std::string>> tentative = heldout;
    tentative.insert({parts[0], parts[2]});
    tentative.insert({parts[1], parts[2]});
    if (!coverage_ok(tentative)) continue;
    heldout = std::move(tentative);
    test_strata.push_back(key);
  }
  if (test_strata.size() < want_strata)
    throw InsufficientPoolError("semrole: cannot reserve " + std::to_string(want_strata) +
                                " held-out probe-pair strata from this pool");

  auto stratum_is_train = [&](const std::string& key) {
    const std::vector<std::string> parts = split(key, '|');
    return !heldout.count({parts[0], parts[2]}) && !heldout.count({parts[1], parts[2]});
  };
  auto event_touches_heldout = [&](const EventRepresentation& e) {
    for (const ClauseEntry& c : transitive_clauses(e)) {
      if (heldout.count({c.agent, c.verb}) || heldout.count({c.patient, c.verb})) return true;
    }
    return false;
  };

  // shuffle candidate queues
  for (auto& [key, orientations] : strata) {
    for (int o = 0; o < 2; ++o) {
      Rng rng(stratum_seed(cfg.seed, "semrole-q|" + key + "|" + std::to_string(o)));
      rng.shuffle(orientations[o]);
    }
  }

  std::set<std::string> claimed;
  auto fill = [&](const std::vector<std::string>& keys, std::size_t quota_sentences,
                  bool strict_train, std::vector<TaskInstance>& out) {
    std::vector<std::pair<std::string, int>> queues;
    for (const std::string& key : keys) {
      queues.emplace_back(key, 0);
      queues.emplace_back(key, 1);
    }
    std::vector<std::size_t> cursor(queues.size(), 0);
    std::size_t taken = 0;
    bool progress = true;
    while (taken < quota_sentences && progress) {
      progress = false;
      for (std::size_t q = 0; q < queues.size() && taken < quota_sentences; ++q) {
        auto& [key, orientation] = queues[q];
        std::vector<Candidate>& list = strata[key][orientation];
        while (cursor[q] < list.size()) {
          const Candidate& cand = list[cursor[q]++];
          if (claimed.count(cand.event->id)) continue;
          if (strict_train && event_touches_heldout(*cand.event)) continue;
          claimed.insert(cand.event->id);
          AnnotatedSentence s = realize(*cand.event, lex);
          const std::string sid = s.id;
          register_sentence(ds, std::move(s));
          out.push_back({TaskKind::semrole, sid, cand.clause.agent, cand.clause.verb, 1});
          out.push_back({TaskKind::semrole, sid, cand.clause.patient, cand.clause.verb, 0});
          ++taken;
          progress = true;
          break;
        }
      }
    }
    if (taken < quota_sentences)
      throw InsufficientPoolError("semrole: pool exhausted at " + std::to_string(taken) + "/" +
                                  std::to_string(quota_sentences) + " sentences");
  };

  fill(test_strata, cfg.test_size / 2, false, ds.test);
  std::vector<std::string> train_keys;
  for (const auto& [key, orientations] : strata) {
    if (stratum_is_train(key)) train_keys.push_back(key);
  }
  fill(train_keys, cfg.train_size / 2, true, ds.train);

  ds.heldout_pairs.assign(heldout.begin(), heldout.end());
  check_exact_balance(ds);
  return ds;
}

// ---------------- negation ----------------

namespace {

struct NegationFrames {
  const ClauseFrame* main = nullptr;
  const ClauseFrame* rc = nullptr;
};

const ClauseFrame* event_rc_frame(const EventRepresentation& e) {
  if (e.main.agent.rc && e.main.agent.rc->frame) return e.main.agent.rc->frame.get();
  if (e.main.patient && e.main.patient->rc && e.main.patient->rc->frame)
    return e.main.patient->rc->frame.get();
  return nullptr;
}

int rc_count_of(const EventRepresentation& e) {
  int n = 0;
  if (e.main.agent.rc) ++n;
  if (e.main.patient && e.main.patient->rc) ++n;
  return n;
}

bool aux_bearing(const ClauseFrame& f) {
  return f.features.voice == Voice::passive || f.features.aspect == Aspect::progressive;
}

}  // namespace

TaskDataset build_negation(const EventPool& pool, const Lexicon& lex, const TaskBuildConfig& cfg) {
  TaskDataset ds;
  ds.task = TaskKind::negation;

  std::vector<std::string> adverbs = lex.adverbs();
  const int k = cfg.policy.negation_heldout_adverbs;
  if (k <= 0 || k >= static_cast<int>(adverbs.size()))
    throw Error("negation: held-out adverb count must split the inventory");
  {
    Rng rng(stratum_seed(cfg.seed, "negation-adverbs"));
    rng.shuffle(adverbs);
  }
  const std::vector<std::string> test_adverbs(adverbs.end() - k, adverbs.end());
  const std::vector<std::string> train_adverbs(adverbs.begin(), adverbs.end() - k);
  if (cfg.max_adverb_run > static_cast<int>(test_adverbs.size()) ||
      cfg.max_adverb_run > static_cast<int>(train_adverbs.size()))
    throw Error("negation: adverb run exceeds a split inventory");

  // usable events: main + one embedded clause, distinct verb lemmas,
  // exactly one negated frame, and both verbs behind an auxiliary so the
  // probe verb's inflection is independent of its polarity
  struct Candidate {
    EventRepresentation event;
  };
  // stratum: unordered verb pair, orientation 0 = smaller lemma negated
  std::map<std::string, std::array<std::array<std::vector<Candidate>, 2>, 2>> strata;
  // indexing: [orientation][split] with split 0 = train, 1 = test

  for (const EventRepresentation& e : pool.events) {
    if (rc_count_of(e) != 1) continue;
    const ClauseFrame* rc = event_rc_frame(e);
    if (!rc || rc->verb == e.main.verb) continue;
    const bool main_neg = e.main.features.polarity == Polarity::negative;
    const bool rc_neg = rc->features.polarity == Polarity::negative;
    if (main_neg == rc_neg) continue;
    if (!aux_bearing(e.main) || !aux_bearing(*rc)) continue;
    if (gold_labels(e).conflict) continue;
    const std::string neg_verb = main_neg ? e.main.verb : rc->verb;
    const std::string small = std::min(e.main.verb, rc->verb);
    const int orientation = neg_verb == small ? 0 : 1;
    const int split = hashed_to_test(e.id, mix64(cfg.seed ^ 0x6e6567ULL)) ? 1 : 0;
    strata[pair_key(e.main.verb, rc->verb)][orientation][split].push_back(Candidate{e});
  }

  for (auto& [key, orientations] : strata) {
    for (int o = 0; o < 2; ++o) {
      for (int sp = 0; sp < 2; ++sp) {
        Rng rng(stratum_seed(cfg.seed, "negation-q|" + key + "|" + std::to_string(o) +
                                           std::to_string(sp)));
        rng.shuffle(orientations[o][sp]);
      }
    }
  }

  auto fill = [&](int split, std::size_t quota_sentences,
                  const std::set<std::string>* allowed_verbs,
                  std::vector<EventRepresentation>& out) {
    std::vector<std::pair<std::string, int>> queues;
    for (const auto& [key, orientations] : strata) {
      queues.emplace_back(key, 0);
      queues.emplace_back(key, 1);
    }
    std::vector<std::size_t> cursor(queues.size(), 0);
    std::size_t taken = 0;
    bool progress = true;
    while (taken < quota_sentences && progress) {
      progress = false;
      for (std::size_t q = 0; q < queues.size() && taken < quota_sentences; ++q) {
        std::vector<Candidate>& list = strata[queues[q].first][queues[q].second][split];
        while (cursor[q] < list.size()) {
          const EventRepresentation& e = list[cursor[q]++].event;
          if (allowed_verbs &&
              (!allowed_verbs->count(e.main.verb) ||
               !allowed_verbs->count(event_rc_frame(e)->verb)))
            continue;
          out.push_back(e);
          ++taken;
          progress = true;
          break;
        }
      }
    }
    if (taken < quota_sentences)
      throw InsufficientPoolError("negation: pool exhausted at " + std::to_string(taken) + "/" +
                                  std::to_string(quota_sentences) + " sentences (split " +
                                  std::to_string(split) + ")");
  };

  std::vector<EventRepresentation> train_events, test_events;
  fill(0, cfg.train_size / 2, nullptr, train_events);
  std::set<std::string> train_verbs;
  for (const EventRepresentation& e : train_events) {
    train_verbs.insert(e.main.verb);
    train_verbs.insert(event_rc_frame(e)->verb);
  }
  fill(1, cfg.test_size / 2, &train_verbs, test_events);

  auto decorate_and_emit = [&](std::vector<EventRepresentation> events,
                               const std::vector<std::string>& inventory, std::uint64_t salt,
                               std::vector<TaskInstance>& out) {
    EventPool base;
    base.events = std::move(events);
    AdverbDecorationConfig adv;
    adv.adverbs = inventory;
    adv.min_run = cfg.min_adverb_run;
    adv.max_run = cfg.max_adverb_run;
    adv.seed = mix64(cfg.seed ^ salt);
    const EventPool decorated = decorate_adverbs(base, adv);
    for (const EventRepresentation& e : decorated.events) {
      AnnotatedSentence s = realize(e, lex);
      const ClauseFrame* rc = event_rc_frame(e);
      const bool main_neg = e.main.features.polarity == Polarity::negative;
      const std::string pos_verb = main_neg ? rc->verb : e.main.verb;
      const std::string neg_verb = main_neg ? e.main.verb : rc->verb;
      const std::string sid = s.id;
      out.push_back({TaskKind::negation, sid, "", pos_verb, 1});
      out.push_back({TaskKind::negation, sid, "", neg_verb, 0});
      register_sentence(ds, std::move(s));
    }
  };

  decorate_and_emit(std::move(train_events), train_adverbs, 0x747261696eULL, ds.train);
  decorate_and_emit(std::move(test_events), test_adverbs, 0x74657374ULL, ds.test);

  ds.heldout_adverbs = test_adverbs;
  std::sort(ds.heldout_adverbs.begin(), ds.heldout_adverbs.end());
  check_exact_balance(ds);
  return ds;
}

// ---------------- content ----------------

namespace {

struct LemmaSets {
  std::vector<std::string> nouns_present;
  std::vector<std::string> verbs_present;
};

LemmaSets lemma_sets(const AnnotatedSentence& s) {
  std::set<std::string> nouns, verbs;
  for (const TokenAlignment& a : s.alignment) {
    if (a.slot == "verb") verbs.insert(a.lemma);
    else if (a.slot == "agent" || a.slot == "patient") nouns.insert(a.lemma);
  }
  return {std::vector<std::string>(nouns.begin(), nouns.end()),
          std::vector<std::string>(verbs.begin(), verbs.end())};
}

std::vector<std::string> complement(const std::vector<std::string>& all,
                                    const std::vector<std::string>& present) {
  std::vector<std::string> out;
  for (const std::string& x : all) {
    if (std::find(present.begin(), present.end(), x) == present.end()) out.push_back(x);
  }
  return out;
}

}  // namespace

TaskDataset build_content(const EventPool& pool, int arity, const Lexicon& lex,
                          const TaskBuildConfig& cfg) {
  if (arity != 1 && arity != 2) throw Error("content: arity must be 1 or 2");
  TaskDataset ds;
  ds.task = arity == 1 ? TaskKind::content1 : TaskKind::content2;

  std::vector<const EventRepresentation*> train_events, test_events;
  for (const EventRepresentation& e : pool.events) {
    (hashed_to_test(e.id, mix64(cfg.seed ^ 0x636f6eULL)) ? test_events : train_events)
        .push_back(&e);
  }

  // test probes must stay within the lemmas already probed in training,
  // so the one-hot mapping is learnable
  const std::set<std::string>* allowed_nouns = nullptr;
  const std::set<std::string>* allowed_verbs = nullptr;
  auto restrict_to_allowed = [&](std::vector<std::string> lemmas, bool nouns) {
    const std::set<std::string>* allowed = nouns ? allowed_nouns : allowed_verbs;
    if (!allowed) return lemmas;
    std::vector<std::string> kept;
    for (std::string& l : lemmas) {
      if (allowed->count(l)) kept.push_back(std::move(l));
    }
    return kept;
  };
  auto fill = [&](std::vector<const EventRepresentation*> events, std::size_t quota_sentences,
                  std::uint64_t salt, std::vector<TaskInstance>& out) {
    Rng rng(mix64(cfg.seed ^ salt));
    rng.shuffle(events);
    // per-lemma probe counts, used to keep probe frequency matched across labels
    std::map<std::string, PairCount> verb_counts, noun_counts;
    int negative_type_toggle = 0;  // content2: alternate neither / exactly-one
    int one_present_toggle = 0;
    std::size_t taken = 0;
    for (const EventRepresentation* e : events) {
      if (taken >= quota_sentences) break;
      AnnotatedSentence s = realize(*e, lex);
      const std::string sid = s.id;
      if (ds.sentence_index.count(sid)) continue;
      const LemmaSets base_sets = lemma_sets(s);
      LemmaSets sets;
      sets.nouns_present = restrict_to_allowed(base_sets.nouns_present, true);
      sets.verbs_present = restrict_to_allowed(base_sets.verbs_present, false);
      if (sets.verbs_present.empty()) continue;
      // absence is judged against the full surface, not the restricted sets
      const std::vector<std::string> verbs_absent =
          restrict_to_allowed(complement(lex.verbs(), base_sets.verbs_present), false);
      const std::vector<std::string> nouns_absent =
          restrict_to_allowed(complement(lex.nouns(), base_sets.nouns_present), true);

      if (arity == 1) {
        if (verbs_absent.empty()) continue;
        auto pick = [&](const std::vector<std::string>& from, bool positive) {
          const std::string* best = nullptr;
          long long best_score = 0;
          for (const std::string& v : from) {
            const PairCount& c = verb_counts[v];
            const long long score = positive ? c.pos - c.neg : c.neg - c.pos;
            if (!best || score < best_score) { best = &v; best_score = score; }
          }
          return *best;
        };
        const std::string vp = pick(sets.verbs_present, true);
        const std::string vn = pick(verbs_absent, false);
        verb_counts[vp].pos++;
        verb_counts[vn].neg++;
        out.push_back({ds.task, sid, "", vp, 1});
        out.push_back({ds.task, sid, "", vn, 0});
      } else {
        if (sets.nouns_present.empty()) continue;
        auto pick_pair = [&](const std::vector<std::string>& nouns,
                             const std::vector<std::string>& verbs, bool positive) {
          std::pair<std::string, std::string> best;
          long long best_score = 0;
          bool have = false;
          for (const std::string& n : nouns) {
            for (const std::string& v : verbs) {
              const long long score =
                  positive ? (noun_counts[n].pos - noun_counts[n].neg) +
                                 (verb_counts[v].pos - verb_counts[v].neg)
                           : (noun_counts[n].neg - noun_counts[n].pos) +
                                 (verb_counts[v].neg - verb_counts[v].pos);
              if (!have || score < best_score) {
                best = {n, v};
                best_score = score;
                have = true;
              }
            }
          }
          return best;
        };
        const auto [np, vp] = pick_pair(sets.nouns_present, sets.verbs_present, true);

        // negative: alternate between "neither present" and "exactly one present"
        std::pair<std::string, std::string> neg;
        bool have_neg = false;
        for (int attempt = 0; attempt < 2 && !have_neg; ++attempt) {
          const int type = (negative_type_toggle + attempt) % 2;
          if (type == 0 && !nouns_absent.empty() && !verbs_absent.empty()) {
            neg = pick_pair(nouns_absent, verbs_absent, false);
            have_neg = true;
            negative_type_toggle = (type + 1) % 2;
          } else if (type == 1) {
            for (int attempt2 = 0; attempt2 < 2 && !have_neg; ++attempt2) {
              const int sub = (one_present_toggle + attempt2) % 2;
              if (sub == 0 && !verbs_absent.empty()) {
                neg = pick_pair(sets.nouns_present, verbs_absent, false);
                have_neg = true;
                one_present_toggle = (sub + 1) % 2;
              } else if (sub == 1 && !nouns_absent.empty()) {
                neg = pick_pair(nouns_absent, sets.verbs_present, false);
                have_neg = true;
                one_present_toggle = (sub + 1) % 2;
              }
            }
            if (have_neg) negative_type_toggle = (type + 1) % 2;
          }
        }
        if (!have_neg) continue;
        noun_counts[np].pos++;
        verb_counts[vp].pos++;
        noun_counts[neg.first].neg++;
        verb_counts[neg.second].neg++;
        out.push_back({ds.task, sid, np, vp, 1});
        out.push_back({ds.task, sid, neg.first, neg.second, 0});
      }
      register_sentence(ds, std::move(s));
      ++taken;
    }
    if (taken < quota_sentences)
      throw InsufficientPoolError("content" + std::to_string(arity) + ": pool exhausted at " +
                                  std::to_string(taken) + "/" + std::to_string(quota_sentences));
  };

  fill(std::move(train_events), cfg.train_size / 2, 0x74726eULL, ds.train);
  std::set<std::string> train_nouns, train_verbs;
  for (const TaskInstance& i : ds.train) {
    if (!i.probe_noun.empty()) train_nouns.insert(i.probe_noun);
    train_verbs.insert(i.probe_verb);
  }
  allowed_nouns = &train_nouns;
  allowed_verbs = &train_verbs;
  fill(std::move(test_events), cfg.test_size / 2, 0x747374ULL, ds.test);
  check_exact_balance(ds);
  return ds;
}

// ---------------- order ----------------

TaskDataset build_order(const EventPool& pool, const Lexicon& lex, const TaskBuildConfig& cfg) {
  TaskDataset ds;
  ds.task = TaskKind::order;

  std::vector<const EventRepresentation*> train_events, test_events;
  for (const EventRepresentation& e : pool.events) {
    (hashed_to_test(e.id, mix64(cfg.seed ^ 0x6f7264ULL)) ? test_events : train_events)
        .push_back(&e);
  }

  const std::set<std::string>* allowed_nouns = nullptr;
  const std::set<std::string>* allowed_verbs = nullptr;
  auto fill = [&](std::vector<const EventRepresentation*> events, std::size_t quota_sentences,
                  std::uint64_t salt, std::vector<TaskInstance>& out) {
    Rng rng(mix64(cfg.seed ^ salt));
    rng.shuffle(events);
    std::map<std::string, PairCount> pair_counts;  // key "noun|verb"
    std::size_t taken = 0;
    for (const EventRepresentation* e : events) {
      if (taken >= quota_sentences) break;
      AnnotatedSentence s = realize(*e, lex);
      const std::string sid = s.id;
      if (ds.sentence_index.count(sid)) continue;
      // single-occurrence content lemmas with their token positions
      std::map<std::string, std::pair<int, int>> noun_occ, verb_occ;  // lemma -> (count, pos)
      for (const TokenAlignment& a : s.alignment) {
        if (a.slot == "verb") {
          auto& o = verb_occ[a.lemma];
          o.first++;
          o.second = a.token;
        } else if (a.slot == "agent" || a.slot == "patient") {
          auto& o = noun_occ[a.lemma];
          o.first++;
          o.second = a.token;
        }
      }
      std::vector<std::pair<std::string, std::string>> pos_pairs, neg_pairs;
      for (const auto& [n, no] : noun_occ) {
        if (no.first != 1) continue;
        if (allowed_nouns && !allowed_nouns->count(n)) continue;
        for (const auto& [v, vo] : verb_occ) {
          if (vo.first != 1) continue;
          if (allowed_verbs && !allowed_verbs->count(v)) continue;
          (no.second < vo.second ? pos_pairs : neg_pairs).emplace_back(n, v);
        }
      }
      if (pos_pairs.empty() || neg_pairs.empty()) continue;
      auto pick = [&](const std::vector<std::pair<std::string, std::string>>& pairs,
                      bool positive) {
        const std::pair<std::string, std::string>* best = nullptr;
        long long best_score = 0;
        for (const auto& p : pairs) {
          const PairCount& c = pair_counts[p.first + "|" + p.second];
          const long long score = positive ? c.pos - c.neg : c.neg - c.pos;
          if (!best || score < best_score) { best = &p; best_score = score; }
        }
        return *best;
      };
      const auto pp = pick(pos_pairs, true);
      const auto np = pick(neg_pairs, false);
      pair_counts[pp.first + "|" + pp.second].pos++;
      pair_counts[np.first + "|" + np.second].neg++;
      out.push_back({TaskKind::order, sid, pp.first, pp.second, 1});
      out.push_back({TaskKind::order, sid, np.first, np.second, 0});
      register_sentence(ds, std::move(s));
      ++taken;
    }
    if (taken < quota_sentences)
      throw InsufficientPoolError("order: pool exhausted at " + std::to_string(taken) + "/" +
                                  std::to_string(quota_sentences));
  };

  fill(std::move(train_events), cfg.train_size / 2, 0x6f74726eULL, ds.train);
  std::set<std::string> train_nouns, train_verbs;
  for (const TaskInstance& i : ds.train) {
    train_nouns.insert(i.probe_noun);
    train_verbs.insert(i.probe_verb);
  }
  allowed_nouns = &train_nouns;
  allowed_verbs = &train_verbs;
  fill(std::move(test_events), cfg.test_size / 2, 0x6f747374ULL, ds.test);
  check_exact_balance(ds);
  return ds;
}

// ---------------- audits ----------------

BalanceReport audit_balance(const TaskDataset& ds, double flag_threshold) {
  BalanceReport report;
  std::uint64_t pos = 0, neg = 0;
  auto visit = [&](const TaskInstance& inst) {
    const bool p = inst.label == 1;
    (p ? pos : neg)++;
    const AnnotatedSentence& s = ds.sentence(inst.sentence_id);
    for (const TokenAlignment& a : s.alignment) {
      auto& entry = report.sentence_lemmas[a.lemma];
      (p ? entry.count_pos : entry.count_neg)++;
    }
    if (!inst.probe_noun.empty()) {
      auto& entry = report.probe_lemmas[inst.probe_noun];
      (p ? entry.count_pos : entry.count_neg)++;
    }
    auto& entry = report.probe_lemmas[inst.probe_verb];
    (p ? entry.count_pos : entry.count_neg)++;
    auto& len = report.length_distribution[static_cast<int>(s.tokens.size())];
    (p ? len.count_pos : len.count_neg)++;
  };
  for (const TaskInstance& i : ds.train) visit(i);
  for (const TaskInstance& i : ds.test) visit(i);
  const double total = static_cast<double>(pos + neg);
  report.label_ratio = total > 0 ? static_cast<double>(pos) / total : 0.0;

  auto divergence = [&](const std::map<std::string, BalanceEntry>& table, double& max_out) {
    for (const auto& [lemma, entry] : table) {
      const double f1 = pos ? static_cast<double>(entry.count_pos) / static_cast<double>(pos) : 0;
      const double f0 = neg ? static_cast<double>(entry.count_neg) / static_cast<double>(neg) : 0;
      const double d = std::abs(f1 - f0);
      if (d > max_out) max_out = d;
      if (d > flag_threshold) report.flags.push_back(lemma);
    }
  };
  divergence(report.sentence_lemmas, report.max_sentence_lemma_divergence);
  divergence(report.probe_lemmas, report.max_probe_lemma_divergence);
  return report;
}

SplitVerdict verify_split(const TaskDataset& ds, const SplitPolicy& policy) {
  SplitVerdict verdict;
  auto fail = [&](const std::string& msg) {
    verdict.pass = false;
    verdict.failures.push_back(msg);
  };

  std::set<std::string> train_ids, test_ids;
  for (const TaskInstance& i : ds.train) train_ids.insert(i.sentence_id);
  for (const TaskInstance& i : ds.test) test_ids.insert(i.sentence_id);
  for (const std::string& id : test_ids) {
    if (train_ids.count(id)) fail("sentence in both splits: " + id);
  }
  // duplicate surface strings across splits (ids are content hashes of the
  // token sequence, but double-check the strings themselves)
  std::set<std::string> train_strings;
  for (const std::string& id : train_ids) train_strings.insert(join(ds.sentence(id).tokens, " "));
  for (const std::string& id : test_ids) {
    if (train_strings.count(join(ds.sentence(id).tokens, " ")))
      fail("surface string in both splits: " + id);
  }

  if (ds.task == TaskKind::semrole) {
    std::set<std::pair<std::string, std::string>> train_pairs, test_pairs;
    for (const TaskInstance& i : ds.train) train_pairs.insert({i.probe_noun, i.probe_verb});
    for (const TaskInstance& i : ds.test) test_pairs.insert({i.probe_noun, i.probe_verb});
    for (const auto& p : test_pairs) {
      if (train_pairs.count(p))
        fail("test probe pair seen in training: (" + p.first + ", " + p.second + ")");
    }
  }

  if (ds.task == TaskKind::negation) {
    auto adverbs_of = [&](const std::set<std::string>& ids) {
      std::set<std::string> out;
      for (const std::string& id : ids) {
        for (const TokenAlignment& a : ds.sentence(id).alignment) {
          if (a.slot == "adverb") out.insert(a.lemma);
        }
      }
      return out;
    };
    const std::set<std::string> train_adv = adverbs_of(train_ids);
    for (const std::string& adv : adverbs_of(test_ids)) {
      if (train_adv.count(adv)) fail("test adverb seen in training sentences: " + adv);
    }
    if (static_cast<int>(adverbs_of(test_ids).size()) > policy.negation_heldout_adverbs)
      fail("test sentences use more adverbs than the held-out inventory");
  }

  // every probe lemma seen at test time must occur as a training probe
  std::set<std::string> train_nouns, train_verbs;
  for (const TaskInstance& i : ds.train) {
    if (!i.probe_noun.empty()) train_nouns.insert(i.probe_noun);
    train_verbs.insert(i.probe_verb);
  }
  for (const TaskInstance& i : ds.test) {
    if (!i.probe_noun.empty() && !train_nouns.count(i.probe_noun))
      fail("test probe noun never trained: " + i.probe_noun);
    if (!train_verbs.count(i.probe_verb))
      fail("test probe verb never trained: " + i.probe_verb);
  }
  return verdict;
}

int surface_oracle_label(TaskKind task, std::span<const std::string> tokens, const Lexicon& lex,
                         const std::string& probe_noun, const std::string& probe_verb) {
  auto occurrences = [&](const std::string& lemma) {
    std::vector<int> positions;
    const std::vector<std::string> forms = lex.forms_of(lemma);
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
      if (std::find(forms.begin(), forms.end(), tokens[i]) != forms.end()) positions.push_back(i);
    }
    return positions;
  };
  switch (task) {
    case TaskKind::content1:
      return occurrences(probe_verb).empty() ? 0 : 1;
    case TaskKind::content2:
      return (!occurrences(probe_noun).empty() && !occurrences(probe_verb).empty()) ? 1 : 0;
    case TaskKind::order: {
      const std::vector<int> n = occurrences(probe_noun);
      const std::vector<int> v = occurrences(probe_verb);
      if (n.size() != 1)
        throw AmbiguityError("order probe '" + probe_noun + "' occurs " +
                             std::to_string(n.size()) + " times");
      if (v.size() != 1)
        throw AmbiguityError("order probe '" + probe_verb + "' occurs " +
                             std::to_string(v.size()) + " times");
      return n[0] < v[0] ? 1 : 0;
    }
    default:
      throw Error("surface oracle only covers content and order tasks");
  }
}

// ---------------- io ----------------

void save_dataset(const TaskDataset& ds, const std::filesystem::path& tsv_path,
                  const std::filesystem::path& corpus_path,
                  const std::filesystem::path& manifest_path) {
  std::string tsv = "# task\tsplit\tsentence_id\tprobe_noun\tprobe_verb\tlabel\n";
  auto emit = [&](const std::vector<TaskInstance>& list, const char* split) {
    for (const TaskInstance& i : list) {
      tsv += to_string(i.task) + "\t" + split + "\t" + i.sentence_id + "\t" +
             (i.probe_noun.empty() ? "-" : i.probe_noun) + "\t" + i.probe_verb + "\t" +
             std::to_string(i.label) + "\n";
    }
  };
  emit(ds.train, "train");
  emit(ds.test, "test");
  atomic_write_file(tsv_path, tsv);
  save_corpus(ds.sentences, corpus_path);

  const BalanceReport balance = audit_balance(ds);
  ojson m;
  m["task"] = to_string(ds.task);
  m["config_hash"] = ds.config_hash;
  m["train_instances"] = ds.train.size();
  m["test_instances"] = ds.test.size();
  m["sentences"] = ds.sentences.size();
  ojson pairs = ojson::array();
  for (const auto& [n, v] : ds.heldout_pairs) pairs.push_back(ojson::array({n, v}));
  m["heldout_pairs"] = pairs;
  m["heldout_adverbs"] = ds.heldout_adverbs;
  m["label_ratio"] = balance.label_ratio;
  m["max_sentence_lemma_divergence"] = balance.max_sentence_lemma_divergence;
  m["max_probe_lemma_divergence"] = balance.max_probe_lemma_divergence;
  m["balance_flags"] = balance.flags;
  const SplitVerdict verdict = verify_split(ds, SplitPolicy{});
  m["split_pass"] = verdict.pass;
  m["split_failures"] = verdict.failures;
  atomic_write_file(manifest_path, m.dump(2) + "\n");
}

TaskDataset load_dataset(const std::filesystem::path& tsv_path,
                         const std::filesystem::path& corpus_path,
                         const std::filesystem::path& manifest_path) {
  TaskDataset ds;
  for (AnnotatedSentence& s : load_corpus(corpus_path)) register_sentence(ds, std::move(s));

  std::istringstream in(read_file(tsv_path));
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::vector<std::string> f = split(t, '\t');
    if (f.size() != 6) throw ParseError("bad dataset row: " + t);
    TaskInstance inst;
    inst.task = task_from_string(f[0]);
    inst.sentence_id = f[2];
    inst.probe_noun = f[3] == "-" ? "" : f[3];
    inst.probe_verb = f[4];
    inst.label = std::stoi(f[5]);
    ds.task = inst.task;
    (f[1] == "train" ? ds.train : ds.test).push_back(std::move(inst));
  }

  const ojson m = ojson::parse(read_file(manifest_path));
  ds.config_hash = m.at("config_hash").get<std::string>();
  for (const ojson& p : m.at("heldout_pairs")) {
    ds.heldout_pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  }
  ds.heldout_adverbs = m.at("heldout_adverbs").get<std::vector<std::string>>();
  return ds;
}

}  // namespace sentprobe
