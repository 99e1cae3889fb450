// Acceptance suite: runs the full default pipeline and checks every gate,
// printing one PASS/FAIL line per criterion. Exit status is nonzero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <vector>

#include "sentprobe/embedding.hpp"
#include "sentprobe/errors.hpp"
#include "sentprobe/pipeline.hpp"
#include "sentprobe/prober.hpp"
#include "sentprobe/realizer.hpp"
#include "sentprobe/seq_autoencoder.hpp"
#include "sentprobe/taskforge.hpp"
#include "sentprobe/util.hpp"

using namespace sentprobe;

namespace {

struct Outcome {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Outcome> outcomes;

void record(int id, bool pass, const std::string& detail) {
  outcomes.push_back({id, pass, detail});
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::optional<double> timing_note(const StageResult& result, const std::string& key) {
  const std::string prefix = "timing: " + key + "=";
  for (const std::string& note : result.notes) {
    if (note.rfind(prefix, 0) == 0) return std::stod(note.substr(prefix.size()));
  }
  return std::nullopt;
}

ArgumentSlot slot(const std::string& noun, Number num, Role role) {
  ArgumentSlot s;
  s.noun = noun;
  s.number = num;
  s.role = role;
  return s;
}

ClauseFrame frame(const std::string& verb, Transitivity t, ArgumentSlot agent,
                  std::optional<ArgumentSlot> patient, Voice v, Tense tense, Aspect a,
                  Polarity p) {
  ClauseFrame f;
  f.verb = verb;
  f.transitivity = t;
  f.agent = std::move(agent);
  f.patient = std::move(patient);
  f.features = {v, tense, a, p, {}};
  return f;
}

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", x * 100.0);
  return buf;
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// ---- criterion 1: attested surface forms from hand-written events ----
void criterion_generation_fidelity(const Lexicon& lex) {
  const auto start = std::chrono::steady_clock::now();

  const EventRepresentation sleeping = EventRepresentation::make(
      frame("sleep", Transitivity::intransitive, slot("man", Number::plural, Role::agent),
            std::nullopt, Voice::active, Tense::past, Aspect::progressive, Polarity::positive));

  ClauseFrame meet_rc =
      frame("meet", Transitivity::transitive, slot("student", Number::singular, Role::agent),
            slot("lawyer", Number::singular, Role::patient), Voice::active, Tense::present,
            Aspect::progressive, Polarity::positive);
  ArgumentSlot lawyer = slot("lawyer", Number::singular, Role::patient);
  lawyer.rc = RelativeClause{GapType::object_gap,
                             std::make_shared<const ClauseFrame>(std::move(meet_rc))};
  const EventRepresentation followed = EventRepresentation::make(
      frame("follow", Transitivity::transitive, slot("woman", Number::singular, Role::agent),
            std::move(lawyer), Voice::active, Tense::past, Aspect::simple, Polarity::positive));

  ClauseFrame sleep_rc =
      frame("sleep", Transitivity::intransitive, slot("student", Number::singular, Role::agent),
            std::nullopt, Voice::active, Tense::present, Aspect::progressive, Polarity::positive);
  ArgumentSlot student = slot("student", Number::singular, Role::patient);
  student.rc = RelativeClause{GapType::subject_gap,
                              std::make_shared<const ClauseFrame>(std::move(sleep_rc))};
  const EventRepresentation figure = EventRepresentation::make(
      frame("help", Transitivity::transitive, slot("professor", Number::singular, Role::agent),
            std::move(student), Voice::passive, Tense::past, Aspect::simple, Polarity::negative));

  const std::vector<std::pair<const EventRepresentation*, std::string>> expected{
      {&sleeping, "the men were sleeping"},
      {&followed, "the woman followed the lawyer that the student is meeting"},
      {&figure, "the student that is sleeping was not helped by the professor"},
  };
  bool pass = true;
  std::string detail;
  for (const auto& [event, text] : expected) {
    const std::string got = join(realize(*event, lex).tokens, " ");
    if (got != text) {
      pass = false;
      detail += " [got '" + got + "' expected '" + text + "']";
    }
  }
  const double dt = seconds_since(start);
  pass = pass && dt < 1.0;
  record(1, pass,
         "generation fidelity: 3/3 attested sentences exact in " + format_double(dt) + " s" +
             detail);
}

// ---- criterion 2: dataset labels vs independent recomputation ----
void criterion_oracle_agreement(const std::map<TaskKind, TaskDataset>& tasks, const Lexicon& lex) {
  const auto start = std::chrono::steady_clock::now();
  long checked = 0, disagreements = 0;
  for (const auto& [task, ds] : tasks) {
    for (const auto* split : {&ds.train, &ds.test}) {
      for (const TaskInstance& inst : *split) {
        const AnnotatedSentence& s = ds.sentence(inst.sentence_id);
        int expected = -1;
        switch (task) {
          case TaskKind::content1:
          case TaskKind::content2:
          case TaskKind::order:
            expected =
                surface_oracle_label(task, s.tokens, lex, inst.probe_noun, inst.probe_verb);
            break;
          case TaskKind::semrole: {
            const GoldAnnotations gold = gold_labels(s.event);
            for (const RoleFact& f : gold.roles) {
              if (f.noun == inst.probe_noun && f.verb == inst.probe_verb)
                expected = f.relation == Role::agent ? 1 : 0;
            }
            break;
          }
          case TaskKind::negation: {
            const GoldAnnotations gold = gold_labels(s.event);
            expected = gold.verb_polarity.at(inst.probe_verb) == Polarity::positive ? 1 : 0;
            break;
          }
        }
        ++checked;
        if (inst.label != expected) ++disagreements;
      }
    }
  }
  const double dt = seconds_since(start);
  const bool pass = checked >= 10000 && disagreements == 0 && dt < 60.0;
  record(2, pass,
         "oracle agreement: " + std::to_string(checked) + " instances, " +
             std::to_string(disagreements) + " disagreements, " + format_double(dt) + " s");
}

// ---- criterion 3: split purity ----
void criterion_split_purity(const std::map<TaskKind, TaskDataset>& tasks,
                            const SplitPolicy& policy) {
  bool pass = true;
  std::string detail;
  for (const auto& [task, ds] : tasks) {
    const SplitVerdict verdict = verify_split(ds, policy);
    if (!verdict.pass) {
      pass = false;
      detail += " " + to_string(task) + ": " + verdict.failures.front() + ";";
    }
  }
  record(3, pass, pass ? "split purity: verify_split passes on all five datasets"
                       : "split purity failed:" + detail);
}

// ---- criterion 7: gradient checks and exact permutation invariance ----
bool gradient_checks_pass(std::string& detail) {
  bool ok = true;
  // skip-gram objective
  {
    Rng rng(101);
    std::vector<double> center(5);
    for (double& x : center) x = rng.normal() * 0.3;
    std::vector<std::vector<double>> outputs(4, std::vector<double>(5));
    for (auto& o : outputs)
      for (double& x : o) x = rng.normal() * 0.3;
    const std::vector<int> labels{1, 0, 0, 1};
    std::vector<double> gc;
    std::vector<std::vector<double>> go;
    sgns_objective(center, outputs, labels, &gc, &go);
    const double eps = 1e-6;
    double worst = 0;
    for (int i = 0; i < 5; ++i) {
      const double keep = center[i];
      center[i] = keep + eps;
      const double up = sgns_objective(center, outputs, labels, nullptr, nullptr);
      center[i] = keep - eps;
      const double down = sgns_objective(center, outputs, labels, nullptr, nullptr);
      center[i] = keep;
      const double fd = (up - down) / (2 * eps);
      worst = std::max(worst, std::abs(gc[i] - fd) / std::max({1.0, std::abs(fd)}));
      if (!close_rel(gc[i], fd, 1e-4)) ok = false;
    }
    detail += " sgns_max_rel=" + format_double(worst);
  }
  // autoencoder
  {
    std::vector<std::vector<std::string>> corpus{{"a", "b", "c"}, {"c", "b"}, {"b", "a", "a"}};
    SdaeConfig cfg;
    cfg.word_dim = 3;
    cfg.hidden_dim = 4;
    cfg.epochs = 1;
    cfg.batch_size = 3;
    cfg.drop_prob = 0;
    cfg.swap_prob = 0;
    cfg.heldout_sentences = 1;
    cfg.divergence_patience = 100;
    SdaeParams params = train_seq_autoencoder(corpus, cfg);
    std::vector<std::vector<int>> batch;
    for (const auto& sent : corpus) {
      std::vector<int> ids;
      for (const std::string& tok : sent) ids.push_back(params.lookup(tok));
      batch.push_back(ids);
    }
    std::map<std::string, std::vector<double>> grads;
    sdae_loss_and_gradients(params, batch, batch, &grads);
    const double eps = 1e-6;
    double worst = 0;
    bool local_ok = true;
    params.for_each_tensor([&](const std::string& name, std::vector<double>& tensor) {
      const std::vector<double>& g = grads.at(name);
      for (std::size_t i = 0; i < tensor.size(); ++i) {
        const double keep = tensor[i];
        tensor[i] = keep + eps;
        const double up = sdae_loss_and_gradients(params, batch, batch, nullptr);
        tensor[i] = keep - eps;
        const double down = sdae_loss_and_gradients(params, batch, batch, nullptr);
        tensor[i] = keep;
        const double fd = (up - down) / (2 * eps);
        worst = std::max(worst, std::abs(g[i] - fd) / std::max({1.0, std::abs(fd)}));
        if (!close_rel(g[i], fd, 1e-4)) local_ok = false;
      }
    });
    detail += " sdae_max_rel=" + format_double(worst);
    ok = ok && local_ok;
  }
  // classifier
  {
    FeatureMatrix batch;
    batch.rows = 10;
    batch.cols = 8;
    Rng rng(55);
    batch.data.resize(80);
    for (double& x : batch.data) x = rng.normal();
    for (int i = 0; i < 10; ++i) batch.labels.push_back(static_cast<int>(rng.below(2)));
    std::vector<int> rows(10);
    for (int i = 0; i < 10; ++i) rows[i] = i;
    MlpParams params;
    params.input_dim = 8;
    params.hidden_dim = 8;
    params.w1.resize(64);
    params.b1.resize(8);
    params.w2.resize(16);
    params.b2.resize(2);
    for (auto* t : {&params.w1, &params.b1, &params.w2, &params.b2})
      for (double& x : *t) x = rng.normal() * 0.4;
    MlpParams grads;
    mlp_loss_and_gradients(params, batch, rows, &grads);
    const double eps = 1e-6;
    double worst = 0;
    bool local_ok = true;
    auto check = [&](std::vector<double>& tensor, const std::vector<double>& g) {
      for (std::size_t i = 0; i < tensor.size(); ++i) {
        const double keep = tensor[i];
        tensor[i] = keep + eps;
        const double up = mlp_loss_and_gradients(params, batch, rows, nullptr);
        tensor[i] = keep - eps;
        const double down = mlp_loss_and_gradients(params, batch, rows, nullptr);
        tensor[i] = keep;
        const double fd = (up - down) / (2 * eps);
        worst = std::max(worst, std::abs(g[i] - fd) / std::max({1.0, std::abs(fd)}));
        if (!close_rel(g[i], fd, 1e-4)) local_ok = false;
      }
    };
    check(params.w1, grads.w1);
    check(params.b1, grads.b1);
    check(params.w2, grads.w2);
    check(params.b2, grads.b2);
    detail += " mlp_max_rel=" + format_double(worst);
    ok = ok && local_ok;
  }
  return ok;
}

}  // namespace

int main() {
  const std::filesystem::path repo = SENTPROBE_REPO_DIR;
  const std::filesystem::path out = std::filesystem::current_path() / "acceptance_out";
  std::filesystem::remove_all(out);

  PipelineConfig cfg = load_pipeline_config(repo / "configs" / "default.json");
  cfg.out_dir = out;
  const Lexicon lex = Lexicon::load(cfg.vocabulary_file);

  criterion_generation_fidelity(lex);

  try {
    // ---- single pipeline pass, timed per stage ----
    const auto t_gen = std::chrono::steady_clock::now();
    run_stage(Stage::generate, cfg);
    const double gen_s = seconds_since(t_gen);

    const auto t_build = std::chrono::steady_clock::now();
    run_stage(Stage::build_tasks, cfg);
    const double build_s = seconds_since(t_build);

    std::map<TaskKind, TaskDataset> tasks;
    for (TaskKind task : {TaskKind::semrole, TaskKind::negation, TaskKind::content1,
                          TaskKind::content2, TaskKind::order}) {
      tasks[task] = load_dataset(dataset_tsv_path(cfg, task), dataset_corpus_path(cfg, task),
                                 dataset_manifest_path(cfg, task));
    }
    criterion_oracle_agreement(tasks, lex);
    criterion_split_purity(tasks, cfg.split_policy);

    const StageResult enc = run_stage(Stage::train_encoders, cfg);
    const double skipgram_s = timing_note(enc, "skipgram_seconds").value_or(0.0);
    const double sdae_s = timing_note(enc, "sdae_seconds").value_or(0.0);

    const auto t_embed = std::chrono::steady_clock::now();
    run_stage(Stage::embed, cfg);
    const double embed_s = seconds_since(t_embed);

    const StageResult probe = run_stage(Stage::probe, cfg);
    const double probe_bow_s = timing_note(probe, "probe_bow_seconds").value_or(0.0);
    const double probe_sdae_s = timing_note(probe, "probe_sdae_seconds").value_or(0.0);
    run_stage(Stage::report, cfg);

    const ProbeReport report = ProbeReport::from_jsonl(read_file(report_jsonl_path(cfg)));
    auto mean = [&](TaskKind task, const std::string& encoder, ProbeMode mode) {
      const std::optional<double> m = report.mean_accuracy(task, encoder, mode);
      if (!m) throw Error("missing report cell: " + to_string(task) + "/" + encoder);
      return *m;
    };

    // ---- criterion 4: self-trained skip-gram + mean-pooled sentence vectors ----
    {
      const double c1 = mean(TaskKind::content1, "bow", ProbeMode::onehot);
      const double c2 = mean(TaskKind::content2, "bow", ProbeMode::onehot);
      const double order = mean(TaskKind::order, "bow", ProbeMode::onehot);
      const double semrole = mean(TaskKind::semrole, "bow", ProbeMode::onehot);
      const double negation = mean(TaskKind::negation, "bow", ProbeMode::onehot);
      const double runtime = gen_s + build_s + skipgram_s + embed_s + probe_bow_s;
      const bool pass = c1 >= 0.99 && c2 >= 0.90 && order <= 0.57 && semrole >= 0.47 &&
                        semrole <= 0.53 && negation >= 0.47 && negation <= 0.53 &&
                        runtime <= 600.0;
      record(4, pass,
             "bow row: content1=" + pct(c1) + " content2=" + pct(c2) + " order=" + pct(order) +
                 " semrole=" + pct(semrole) + " negation=" + pct(negation) + " runtime=" +
                 format_double(runtime) + " s");
    }

    // ---- criterion 5: recurrent autoencoder clears bow on order and negation ----
    {
      const double bow_order = mean(TaskKind::order, "bow", ProbeMode::onehot);
      const double bow_neg = mean(TaskKind::negation, "bow", ProbeMode::onehot);
      const double sd_order = mean(TaskKind::order, "sdae", ProbeMode::onehot);
      const double sd_neg = mean(TaskKind::negation, "sdae", ProbeMode::onehot);
      const double sd_semrole = mean(TaskKind::semrole, "sdae", ProbeMode::onehot);
      const double runtime = sdae_s + embed_s + probe_sdae_s;
      const bool pass =
          sd_order >= bow_order + 0.15 && sd_neg >= bow_neg + 0.20 && runtime <= 1800.0;
      record(5, pass,
             "sequence model: order=" + pct(sd_order) + " (bow " + pct(bow_order) +
                 ") negation=" + pct(sd_neg) + " (bow " + pct(bow_neg) + ") semrole=" +
                 pct(sd_semrole) + " (reported, no threshold) runtime=" + format_double(runtime) +
                 " s");
    }

    // ---- criterion 6: random-vector controls at chance ----
    {
      bool pass = true;
      std::string detail;
      double worst = 0.5;
      for (const auto& [task, ds] : tasks) {
        for (const std::string encoder : {"bow", "sdae"}) {
          for (ProbeMode mode : {ProbeMode::random_sentence, ProbeMode::random_probe}) {
            const double acc = mean(task, encoder, mode);
            if (std::abs(acc - 0.5) > std::abs(worst - 0.5)) worst = acc;
            if (acc < 0.46 || acc > 0.54) {
              pass = false;
              detail += " " + to_string(task) + "/" + encoder + "/" + to_string(mode) + "=" +
                        pct(acc);
            }
          }
        }
      }
      record(6, pass, "controls within 50+-4: worst cell " + pct(worst) + detail);
    }

    // ---- criterion 7: numerical checks ----
    {
      std::string detail;
      bool pass = gradient_checks_pass(detail);

      // exact permutation invariance of mean pooling, 1000 shuffles
      const EmbeddingTable table = load_embedding_table(encoder_dir(cfg) / "skipgram.emb");
      const std::string corpus_text = read_file(encoder_dir(cfg) / "corpus.txt");
      std::vector<std::vector<std::string>> sentences;
      std::istringstream in(corpus_text);
      std::string line;
      while (std::getline(in, line) && sentences.size() < 50) {
        if (!trim(line).empty()) sentences.push_back(split_ws(line));
      }
      Rng rng(2024);
      int exact = 0;
      const int trials = 1000;
      for (int t = 0; t < trials; ++t) {
        std::vector<std::string> tokens = sentences[t % sentences.size()];
        const std::vector<double> base = bow_encode(tokens, table);
        rng.shuffle(tokens);
        if (bow_encode(tokens, table) == base) ++exact;
      }
      pass = pass && exact == trials;
      record(7, pass,
             "numerical checks:" + detail + " permutation_exact=" + std::to_string(exact) + "/" +
                 std::to_string(trials));
    }

    // ---- criterion 9: one-hot vs embedding probes on content tasks ----
    {
      bool pass = true;
      std::string detail;
      for (TaskKind task : {TaskKind::content1, TaskKind::content2}) {
        for (const std::string encoder : {"bow", "sdae"}) {
          const double onehot = mean(task, encoder, ProbeMode::onehot);
          const double emb = mean(task, encoder, ProbeMode::embedding_probe);
          detail += " " + to_string(task) + "/" + encoder + ": onehot=" + pct(onehot) +
                    " embedding=" + pct(emb);
          if (std::abs(onehot - emb) > 0.03) pass = false;
        }
      }
      record(9, pass, "probe ablation within 3 points:" + detail);
    }

    // ---- criterion 8: full rerun is bit-identical ----
    {
      const std::string report_bytes = read_file(report_jsonl_path(cfg));
      const std::string grid_bytes = read_file(report_grid_path(cfg));
      for (Stage stage : all_stages()) run_stage(stage, cfg);
      const bool pass = read_file(report_jsonl_path(cfg)) == report_bytes &&
                        read_file(report_grid_path(cfg)) == grid_bytes;
      record(8, pass, pass ? "determinism: rerun report is bit-identical"
                           : "determinism: rerun report differs");
    }
  } catch (const std::exception& ex) {
    std::printf("FAIL pipeline: %s\n", ex.what());
    return 1;
  }

  int failed = 0;
  for (const Outcome& o : outcomes) failed += o.pass ? 0 : 1;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(outcomes.size()) - failed,
              outcomes.size());
  return failed == 0 ? 0 : 1;
}
