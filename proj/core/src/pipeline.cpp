#include "sentprobe/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sentprobe/embedding.hpp"
#include "sentprobe/errors.hpp"
#include "sentprobe/seq_autoencoder.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

using ojson = nlohmann::ordered_json;

std::string to_string(Stage s) {
  switch (s) {
    case Stage::generate: return "generate";
    case Stage::build_tasks: return "build-tasks";
    case Stage::train_encoders: return "train-encoders";
    case Stage::embed: return "embed";
    case Stage::probe: return "probe";
    case Stage::report: return "report";
  }
  return "?";
}

std::optional<Stage> stage_from_string(const std::string& s) {
  for (Stage stage : all_stages()) {
    if (to_string(stage) == s) return stage;
  }
  return std::nullopt;
}

std::vector<Stage> all_stages() {
  return {Stage::generate, Stage::build_tasks, Stage::train_encoders,
          Stage::embed,    Stage::probe,       Stage::report};
}

namespace {

const std::vector<TaskKind> kAllTasks{TaskKind::semrole, TaskKind::negation, TaskKind::content1,
                                      TaskKind::content2, TaskKind::order};

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
  return p.is_absolute() ? p : base / p;
}

std::filesystem::path stage_manifest_path(const PipelineConfig& cfg, Stage stage) {
  switch (stage) {
    case Stage::generate: return cfg.out_dir / "pools" / "manifest.json";
    case Stage::build_tasks: return cfg.out_dir / "tasks" / "manifest.json";
    case Stage::train_encoders: return cfg.out_dir / "encoders" / "manifest.json";
    case Stage::embed: return cfg.out_dir / "embeddings" / "manifest.json";
    case Stage::probe: return cfg.out_dir / "report" / "manifest.json";
    case Stage::report: return cfg.out_dir / "report" / "render_manifest.json";
  }
  throw PipelineError("bad stage");
}

void write_stage_manifest(const PipelineConfig& cfg, Stage stage,
                          const std::vector<std::string>& artifacts,
                          const std::vector<std::string>& notes) {
  ojson m;
  m["stage"] = to_string(stage);
  m["config_hash"] = cfg.config_hash;
  m["artifacts"] = artifacts;
  m["notes"] = notes;
  atomic_write_file(stage_manifest_path(cfg, stage), m.dump(2) + "\n");
}

void require_stage(const PipelineConfig& cfg, Stage dependency) {
  const std::filesystem::path path = stage_manifest_path(cfg, dependency);
  if (!std::filesystem::exists(path))
    throw PipelineError("missing input: " + path.string() + "; run stage '" +
                        to_string(dependency) + "' first");
  const ojson m = ojson::parse(read_file(path));
  const std::string hash = m.at("config_hash").get<std::string>();
  if (hash != cfg.config_hash)
    throw PipelineError("stale input: " + path.string() + " built with config hash " + hash +
                        ", current config hash is " + cfg.config_hash);
}

}  // namespace

std::filesystem::path pool_events_path(const PipelineConfig& cfg, const std::string& name) {
  return cfg.out_dir / "pools" / (name + ".pool.jsonl");
}
std::filesystem::path pool_manifest_path(const PipelineConfig& cfg, const std::string& name) {
  return cfg.out_dir / "pools" / (name + ".manifest.json");
}
std::filesystem::path dataset_tsv_path(const PipelineConfig& cfg, TaskKind task) {
  return cfg.out_dir / "tasks" / (to_string(task) + ".tsv");
}
std::filesystem::path dataset_corpus_path(const PipelineConfig& cfg, TaskKind task) {
  return cfg.out_dir / "tasks" / (to_string(task) + ".corpus.jsonl");
}
std::filesystem::path dataset_manifest_path(const PipelineConfig& cfg, TaskKind task) {
  return cfg.out_dir / "tasks" / (to_string(task) + ".manifest.json");
}
std::filesystem::path encoder_dir(const PipelineConfig& cfg) { return cfg.out_dir / "encoders"; }
std::filesystem::path embeddings_dir(const PipelineConfig& cfg) {
  return cfg.out_dir / "embeddings";
}
std::filesystem::path report_jsonl_path(const PipelineConfig& cfg) {
  return cfg.out_dir / "report" / "report.jsonl";
}
std::filesystem::path report_grid_path(const PipelineConfig& cfg) {
  return cfg.out_dir / "report" / "report.txt";
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  ojson j;
  try {
    j = ojson::parse(raw);
  } catch (const std::exception& ex) {
    throw ParseError("config " + path.string() + ": " + ex.what());
  }

  PipelineConfig cfg;
  cfg.config_dir = path.has_parent_path() ? path.parent_path() : ".";
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  cfg.vocabulary_file = resolve(cfg.config_dir, j.at("vocabulary").get<std::string>());
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

  for (TaskKind task : kAllTasks) {
    const ojson& t = j.at("tasks").at(to_string(task));
    TaskPipelineConfig tc;
    tc.constraint_file = resolve(cfg.config_dir, t.at("constraint").get<std::string>());
    if (t.contains("train")) tc.train_size = t.at("train").get<std::size_t>();
    if (t.contains("test")) tc.test_size = t.at("test").get<std::size_t>();
    if (t.contains("pool_cap")) tc.pool_cap = t.at("pool_cap").get<std::uint64_t>();
    cfg.tasks[task] = tc;
  }

  const ojson& corpus = j.at("corpus");
  if (corpus.contains("pools")) {
    for (const ojson& p : corpus.at("pools")) {
      PipelineConfig::CorpusPool cp;
      cp.constraint_file = resolve(cfg.config_dir, p.at("constraint").get<std::string>());
      if (p.contains("pool_cap")) cp.pool_cap = p.at("pool_cap").get<std::uint64_t>();
      cfg.corpus_pools.push_back(std::move(cp));
    }
  } else {
    PipelineConfig::CorpusPool cp;
    cp.constraint_file = resolve(cfg.config_dir, corpus.at("constraint").get<std::string>());
    if (corpus.contains("pool_cap")) cp.pool_cap = corpus.at("pool_cap").get<std::uint64_t>();
    cfg.corpus_pools.push_back(std::move(cp));
  }
  if (cfg.corpus_pools.empty()) throw ParseError("config: corpus needs at least one pool");
  if (corpus.contains("size")) cfg.corpus_size = corpus.at("size").get<std::size_t>();
  if (corpus.contains("min_adverb_run"))
    cfg.corpus_min_adverb_run = corpus.at("min_adverb_run").get<int>();
  if (corpus.contains("max_adverb_run"))
    cfg.corpus_max_adverb_run = corpus.at("max_adverb_run").get<int>();

  if (j.contains("split_policy")) {
    const ojson& sp = j.at("split_policy");
    if (sp.contains("semrole_pair_holdout_fraction"))
      cfg.split_policy.semrole_pair_holdout_fraction =
          sp.at("semrole_pair_holdout_fraction").get<double>();
    if (sp.contains("negation_heldout_adverbs"))
      cfg.split_policy.negation_heldout_adverbs = sp.at("negation_heldout_adverbs").get<int>();
  }
  if (j.contains("negation_adverbs")) {
    const ojson& na = j.at("negation_adverbs");
    if (na.contains("min_run")) cfg.negation_min_adverb_run = na.at("min_run").get<int>();
    if (na.contains("max_run")) cfg.negation_max_adverb_run = na.at("max_run").get<int>();
  }

  if (j.contains("skipgram")) {
    const ojson& sg = j.at("skipgram");
    if (sg.contains("dim")) cfg.skipgram.dim = sg.at("dim").get<int>();
    if (sg.contains("window")) cfg.skipgram.window = sg.at("window").get<int>();
    if (sg.contains("negatives")) cfg.skipgram.negatives = sg.at("negatives").get<int>();
    if (sg.contains("epochs")) cfg.skipgram.epochs = sg.at("epochs").get<int>();
    if (sg.contains("learning_rate"))
      cfg.skipgram.learning_rate = sg.at("learning_rate").get<double>();
    if (sg.contains("sample")) cfg.skipgram.sample = sg.at("sample").get<double>();
    if (sg.contains("min_count")) cfg.skipgram.min_count = sg.at("min_count").get<int>();
  }
  if (j.contains("sdae")) {
    const ojson& sd = j.at("sdae");
    if (sd.contains("word_dim")) cfg.sdae.word_dim = sd.at("word_dim").get<int>();
    if (sd.contains("hidden_dim")) cfg.sdae.hidden_dim = sd.at("hidden_dim").get<int>();
    if (sd.contains("epochs")) cfg.sdae.epochs = sd.at("epochs").get<int>();
    if (sd.contains("batch_size")) cfg.sdae.batch_size = sd.at("batch_size").get<int>();
    if (sd.contains("learning_rate"))
      cfg.sdae.learning_rate = sd.at("learning_rate").get<double>();
    if (sd.contains("drop_prob")) cfg.sdae.drop_prob = sd.at("drop_prob").get<double>();
    if (sd.contains("swap_prob")) cfg.sdae.swap_prob = sd.at("swap_prob").get<double>();
    if (sd.contains("target_accuracy"))
      cfg.sdae.target_accuracy = sd.at("target_accuracy").get<double>();
    if (sd.contains("min_reconstruction_accuracy"))
      cfg.sdae_min_reconstruction = sd.at("min_reconstruction_accuracy").get<double>();
  }
  if (j.contains("classifier")) {
    const ojson& cl = j.at("classifier");
    if (cl.contains("learning_rate"))
      cfg.classifier.learning_rate = cl.at("learning_rate").get<double>();
    if (cl.contains("batch_size")) cfg.classifier.batch_size = cl.at("batch_size").get<int>();
    if (cl.contains("max_epochs")) cfg.classifier.max_epochs = cl.at("max_epochs").get<int>();
    if (cl.contains("patience")) cfg.classifier.patience = cl.at("patience").get<int>();
    if (cl.contains("dev_fraction"))
      cfg.classifier.dev_fraction = cl.at("dev_fraction").get<double>();
  }
  if (j.contains("probe_seeds"))
    cfg.probe_seeds = j.at("probe_seeds").get<std::vector<std::uint64_t>>();

  // Semantic hash: numeric fields plus referenced file contents; output
  // locations are excluded so artifacts can be relocated.
  {
    ojson sem = j;
    sem.erase("out_dir");
    std::string sig = sem.dump();
    sig += "|vocab:" + read_file(cfg.vocabulary_file);
    std::set<std::filesystem::path> files;
    for (const auto& [task, tc] : cfg.tasks) files.insert(tc.constraint_file);
    for (const auto& cp : cfg.corpus_pools) files.insert(cp.constraint_file);
    for (const std::filesystem::path& f : files) sig += "|constraint:" + read_file(f);
    cfg.config_hash = "c" + to_hex(fnv1a64(sig));
  }
  cfg.sdae.seed = mix64(cfg.seed ^ 0x5dae0001ULL);
  cfg.skipgram.seed = mix64(cfg.seed ^ 0x5caf0001ULL);
  return cfg;
}

namespace {

GenerationConfig make_generation_config(const PipelineConfig& cfg, const Lexicon& lex,
                                        const std::filesystem::path& constraint_file,
                                        std::uint64_t cap, const std::string& salt) {
  GenerationConfig g;
  g.lexicon = lex;
  g.constraint = parse_constraint_file(constraint_file);
  g.max_pool_size = cap;
  g.seed = mix64(cfg.seed ^ fnv1a64(salt));
  return g;
}

StageResult stage_generate(const PipelineConfig& cfg) {
  StageResult result{Stage::generate, {}, {}};
  const Lexicon lex = Lexicon::load(cfg.vocabulary_file);
  for (TaskKind task : kAllTasks) {
    const TaskPipelineConfig& tc = cfg.tasks.at(task);
    const GenerationConfig g =
        make_generation_config(cfg, lex, tc.constraint_file, tc.pool_cap, to_string(task));
    EventPool pool = generate_pool(g);
    for (const std::string& w : pool.warnings) result.notes.push_back(to_string(task) + ": " + w);
    save_pool(pool, pool_events_path(cfg, to_string(task)),
              pool_manifest_path(cfg, to_string(task)));
    result.artifacts.push_back(pool_events_path(cfg, to_string(task)));
    result.notes.push_back(to_string(task) + " pool: " + std::to_string(pool.events.size()) +
                           " events of " + std::to_string(pool.exhaustive_count) + " matches");
  }
  {
    // the encoder corpus may union several constrained pools so that rarer
    // clause shapes reach the skip-gram count threshold
    EventPool combined;
    std::string hash_sig;
    for (std::size_t i = 0; i < cfg.corpus_pools.size(); ++i) {
      const auto& cp = cfg.corpus_pools[i];
      const GenerationConfig g = make_generation_config(cfg, lex, cp.constraint_file, cp.pool_cap,
                                                        "corpus" + std::to_string(i));
      EventPool pool = generate_pool(g);
      for (const std::string& w : pool.warnings) result.notes.push_back("corpus: " + w);
      combined.exhaustive_count += pool.exhaustive_count;
      combined.subsampled = combined.subsampled || pool.subsampled;
      for (const auto& [name, n] : pool.per_template_counts)
        combined.per_template_counts[name] += n;
      for (EventRepresentation& e : pool.events) combined.events.push_back(std::move(e));
      hash_sig += pool.config_hash + "+";
    }
    combined.config_hash = "g" + to_hex(fnv1a64(hash_sig));
    dedupe(combined);
    save_pool(combined, pool_events_path(cfg, "corpus"), pool_manifest_path(cfg, "corpus"));
    result.artifacts.push_back(pool_events_path(cfg, "corpus"));
    result.notes.push_back("corpus pool: " + std::to_string(combined.events.size()) +
                           " events of " + std::to_string(combined.exhaustive_count) +
                           " matches");
  }
  std::vector<std::string> names;
  for (const std::filesystem::path& p : result.artifacts) names.push_back(p.filename().string());
  write_stage_manifest(cfg, Stage::generate, names, result.notes);
  return result;
}

TaskBuildConfig make_task_build_config(const PipelineConfig& cfg, TaskKind task) {
  TaskBuildConfig tc;
  tc.train_size = cfg.tasks.at(task).train_size;
  tc.test_size = cfg.tasks.at(task).test_size;
  tc.seed = mix64(cfg.seed ^ fnv1a64("build|" + to_string(task)));
  tc.policy = cfg.split_policy;
  tc.min_adverb_run = cfg.negation_min_adverb_run;
  tc.max_adverb_run = cfg.negation_max_adverb_run;
  return tc;
}

StageResult stage_build_tasks(const PipelineConfig& cfg) {
  require_stage(cfg, Stage::generate);
  StageResult result{Stage::build_tasks, {}, {}};
  const Lexicon lex = Lexicon::load(cfg.vocabulary_file);
  for (TaskKind task : kAllTasks) {
    const EventPool pool =
        load_pool(pool_events_path(cfg, to_string(task)), pool_manifest_path(cfg, to_string(task)));
    const TaskBuildConfig tc = make_task_build_config(cfg, task);
    TaskDataset ds;
    switch (task) {
      case TaskKind::semrole: ds = build_semrole(pool, lex, tc); break;
      case TaskKind::negation: ds = build_negation(pool, lex, tc); break;
      case TaskKind::content1: ds = build_content(pool, 1, lex, tc); break;
      case TaskKind::content2: ds = build_content(pool, 2, lex, tc); break;
      case TaskKind::order: ds = build_order(pool, lex, tc); break;
    }
    ds.config_hash = cfg.config_hash;
    const SplitVerdict verdict = verify_split(ds, cfg.split_policy);
    if (!verdict.pass)
      throw PipelineError("task " + to_string(task) +
                          " failed split verification: " + join(verdict.failures, "; "));
    save_dataset(ds, dataset_tsv_path(cfg, task), dataset_corpus_path(cfg, task),
                 dataset_manifest_path(cfg, task));
    result.artifacts.push_back(dataset_tsv_path(cfg, task));
    result.notes.push_back(to_string(task) + ": " + std::to_string(ds.train.size()) + " train, " +
                           std::to_string(ds.test.size()) + " test, " +
                           std::to_string(ds.sentences.size()) + " sentences");
  }
  std::vector<std::string> names;
  for (const std::filesystem::path& p : result.artifacts) names.push_back(p.filename().string());
  write_stage_manifest(cfg, Stage::build_tasks, names, result.notes);
  return result;
}

std::set<std::string> all_test_sentence_strings(const PipelineConfig& cfg) {
  std::set<std::string> out;
  for (TaskKind task : kAllTasks) {
    const TaskDataset ds = load_dataset(dataset_tsv_path(cfg, task), dataset_corpus_path(cfg, task),
                                        dataset_manifest_path(cfg, task));
    std::set<std::string> test_ids;
    for (const TaskInstance& i : ds.test) test_ids.insert(i.sentence_id);
    for (const std::string& id : test_ids) out.insert(join(ds.sentence(id).tokens, " "));
  }
  return out;
}

StageResult stage_train_encoders(const PipelineConfig& cfg) {
  require_stage(cfg, Stage::generate);
  require_stage(cfg, Stage::build_tasks);
  StageResult result{Stage::train_encoders, {}, {}};
  const Lexicon lex = Lexicon::load(cfg.vocabulary_file);

  // assemble the encoder training corpus: adverb-decorated broad pool,
  // shuffled, with every task test sentence removed by surface string
  EventPool base = load_pool(pool_events_path(cfg, "corpus"), pool_manifest_path(cfg, "corpus"));
  EventPool decorated;
  if (cfg.corpus_max_adverb_run > 0) {
    AdverbDecorationConfig adv;
    adv.adverbs = lex.adverbs();
    adv.min_run = cfg.corpus_min_adverb_run;
    adv.max_run = cfg.corpus_max_adverb_run;
    adv.seed = mix64(cfg.seed ^ 0xadbedecULL);
    decorated = decorate_adverbs(base, adv);
  } else {
    decorated = std::move(base);
  }
  std::vector<AnnotatedSentence> sentences;
  sentences.reserve(decorated.events.size());
  std::set<std::string> seen;
  const std::set<std::string> banned = all_test_sentence_strings(cfg);
  for (const EventRepresentation& e : decorated.events) {
    AnnotatedSentence s = realize(e, lex);
    const std::string text = join(s.tokens, " ");
    if (banned.count(text) || !seen.insert(text).second) continue;
    sentences.push_back(std::move(s));
  }
  {
    Rng rng(mix64(cfg.seed ^ 0xc09b05ULL));
    rng.shuffle(sentences);
  }
  if (sentences.size() < cfg.corpus_size)
    throw PipelineError("encoder corpus: only " + std::to_string(sentences.size()) +
                        " sentences available, need " + std::to_string(cfg.corpus_size) +
                        " (raise corpus pool_cap)");
  sentences.resize(cfg.corpus_size);
  export_plaintext(sentences, encoder_dir(cfg) / "corpus.txt");
  result.artifacts.push_back(encoder_dir(cfg) / "corpus.txt");

  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(sentences.size());
  for (const AnnotatedSentence& s : sentences) corpus.push_back(s.tokens);

  SkipgramStats sg_stats;
  const auto sg_start = std::chrono::steady_clock::now();
  const EmbeddingTable table = train_skipgram(corpus, cfg.skipgram, &sg_stats);
  const double sg_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - sg_start).count();
  save_embedding_table(table, encoder_dir(cfg) / "skipgram.emb");
  result.artifacts.push_back(encoder_dir(cfg) / "skipgram.emb");
  {
    std::string csv = "epoch,loss\n";
    for (std::size_t i = 0; i < sg_stats.epoch_loss.size(); ++i)
      csv += std::to_string(i) + "," + format_double(sg_stats.epoch_loss[i]) + "\n";
    atomic_write_file(encoder_dir(cfg) / "skipgram_curve.csv", csv);
  }

  SdaeTrainStats sd_stats;
  const auto sd_start = std::chrono::steady_clock::now();
  const SdaeParams sdae = train_seq_autoencoder(corpus, cfg.sdae, &sd_stats);
  const double sd_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - sd_start).count();
  const double recon = sd_stats.heldout_accuracy.empty() ? 0.0 : sd_stats.heldout_accuracy.back();
  if (recon < cfg.sdae_min_reconstruction)
    throw PipelineError("sdae held-out reconstruction accuracy " + std::to_string(recon) +
                        " below " + std::to_string(cfg.sdae_min_reconstruction));
  save_sdae(sdae, encoder_dir(cfg) / "sdae.params");
  result.artifacts.push_back(encoder_dir(cfg) / "sdae.params");
  {
    std::string csv = "epoch,train_loss,heldout_loss,heldout_accuracy\n";
    for (std::size_t i = 0; i < sd_stats.train_loss.size(); ++i) {
      csv += std::to_string(i) + "," + format_double(sd_stats.train_loss[i]) + "," +
             format_double(sd_stats.heldout_loss[i]) + "," +
             format_double(sd_stats.heldout_accuracy[i]) + "\n";
    }
    atomic_write_file(encoder_dir(cfg) / "sdae_curve.csv", csv);
  }
  result.notes.push_back("sdae held-out reconstruction accuracy: " + std::to_string(recon));

  std::vector<std::string> names;
  for (const std::filesystem::path& p : result.artifacts) names.push_back(p.filename().string());
  write_stage_manifest(cfg, Stage::train_encoders, names, result.notes);
  result.notes.push_back("timing: skipgram_seconds=" + format_double(sg_seconds));
  result.notes.push_back("timing: sdae_seconds=" + format_double(sd_seconds));
  return result;
}

StageResult stage_embed(const PipelineConfig& cfg, const EmbedOptions& options) {
  require_stage(cfg, Stage::build_tasks);
  require_stage(cfg, Stage::train_encoders);
  StageResult result{Stage::embed, {}, {}};

  // union of task sentences, by id
  std::map<std::string, std::vector<std::string>> sentences;
  for (TaskKind task : kAllTasks) {
    const TaskDataset ds = load_dataset(dataset_tsv_path(cfg, task), dataset_corpus_path(cfg, task),
                                        dataset_manifest_path(cfg, task));
    for (const AnnotatedSentence& s : ds.sentences) sentences[s.id] = s.tokens;
  }
  result.notes.push_back(std::to_string(sentences.size()) + " distinct sentences to encode");

  {
    const EmbeddingTable table = load_embedding_table(encoder_dir(cfg) / "skipgram.emb");
    SentenceVectorSet bow;
    bow.encoder = "bow";
    bow.dim = table.dim;
    for (const auto& [id, tokens] : sentences) bow.add({id, bow_encode(tokens, table)});
    save_vectors(bow, embeddings_dir(cfg) / "bow.vec");
    result.artifacts.push_back(embeddings_dir(cfg) / "bow.vec");
  }
  {
    const SdaeParams sdae = load_sdae(encoder_dir(cfg) / "sdae.params");
    SentenceVectorSet enc;
    enc.encoder = "sdae";
    enc.dim = sdae.hidden_dim;
    for (const auto& [id, tokens] : sentences) enc.add({id, seq_encode(tokens, sdae)});
    save_vectors(enc, embeddings_dir(cfg) / "sdae.vec");
    result.artifacts.push_back(embeddings_dir(cfg) / "sdae.vec");
  }
  for (const auto& [tag, path] : options.imports) {
    if (tag == "bow" || tag == "sdae")
      throw PipelineError("import tag collides with a built-in encoder: " + tag);
    const SentenceVectorSet imported = load_vectors(path, tag);
    for (const auto& [id, tokens] : sentences) {
      if (!imported.find(id))
        throw PipelineError("import '" + tag + "': no vector for sentence id " + id);
    }
    save_vectors(imported, embeddings_dir(cfg) / (tag + ".vec"));
    result.artifacts.push_back(embeddings_dir(cfg) / (tag + ".vec"));
    result.notes.push_back("imported encoder '" + tag + "' from " + path.string());
  }

  std::vector<std::string> names;
  for (const std::filesystem::path& p : result.artifacts) names.push_back(p.filename().string());
  write_stage_manifest(cfg, Stage::embed, names, result.notes);
  return result;
}

StageResult stage_probe(const PipelineConfig& cfg) {
  require_stage(cfg, Stage::build_tasks);
  require_stage(cfg, Stage::embed);
  StageResult result{Stage::probe, {}, {}};
  const Lexicon lex = Lexicon::load(cfg.vocabulary_file);

  std::map<TaskKind, TaskDataset> tasks;
  for (TaskKind task : kAllTasks) {
    tasks[task] = load_dataset(dataset_tsv_path(cfg, task), dataset_corpus_path(cfg, task),
                               dataset_manifest_path(cfg, task));
  }
  std::map<std::string, SentenceVectorSet> encoders;
  {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(embeddings_dir(cfg))) {
      if (entry.path().extension() == ".vec") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const std::filesystem::path& f : files) {
      const std::string tag = f.stem().string();
      encoders[tag] = load_vectors(f, tag);
    }
  }
  if (encoders.empty()) throw PipelineError("no encoder vector files under " +
                                            embeddings_dir(cfg).string());

  const EmbeddingTable table = load_embedding_table(encoder_dir(cfg) / "skipgram.emb");
  SuiteConfig suite;
  suite.classifier = cfg.classifier;
  suite.seeds = cfg.probe_seeds;
  suite.config_hash = cfg.config_hash;
  const ProbeReport report = run_suite(tasks, encoders, lex, suite, &table);

  int failed = 0;
  for (const ProbeCell& c : report.cells) {
    if (!c.error.empty()) {
      ++failed;
      result.notes.push_back("cell failed: " + to_string(c.task) + "/" + c.encoder + "/" +
                             to_string(c.mode) + " seed " + std::to_string(c.seed) + ": " +
                             c.error);
    }
  }
  result.notes.push_back(std::to_string(report.cells.size()) + " cells, " +
                         std::to_string(failed) + " failed");
  atomic_write_file(report_jsonl_path(cfg), report.to_jsonl());
  result.artifacts.push_back(report_jsonl_path(cfg));
  write_stage_manifest(cfg, Stage::probe, {"report.jsonl"}, result.notes);
  std::map<std::string, double> encoder_seconds;
  for (const ProbeCell& c : report.cells) encoder_seconds[c.encoder] += c.seconds;
  for (const auto& [tag, seconds] : encoder_seconds) {
    result.notes.push_back("timing: probe_" + tag + "_seconds=" + format_double(seconds));
  }
  return result;
}

StageResult stage_report(const PipelineConfig& cfg) {
  require_stage(cfg, Stage::probe);
  StageResult result{Stage::report, {}, {}};
  const ProbeReport report = ProbeReport::from_jsonl(read_file(report_jsonl_path(cfg)));
  atomic_write_file(report_grid_path(cfg), report.render_grid());
  result.artifacts.push_back(report_grid_path(cfg));
  write_stage_manifest(cfg, Stage::report, {"report.txt"}, {});
  return result;
}

}  // namespace

StageResult run_stage(Stage stage, const PipelineConfig& cfg, const EmbedOptions& embed) {
  switch (stage) {
    case Stage::generate: return stage_generate(cfg);
    case Stage::build_tasks: return stage_build_tasks(cfg);
    case Stage::train_encoders: return stage_train_encoders(cfg);
    case Stage::embed: return stage_embed(cfg, embed);
    case Stage::probe: return stage_probe(cfg);
    case Stage::report: return stage_report(cfg);
  }
  throw PipelineError("bad stage");
}

std::vector<StageResult> run_all_stages(const PipelineConfig& cfg, const EmbedOptions& embed) {
  std::vector<StageResult> results;
  for (Stage stage : all_stages()) results.push_back(run_stage(stage, cfg, embed));
  return results;
}

}  // namespace sentprobe
