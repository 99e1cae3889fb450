#include "sentprobe/prober.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sentprobe/errors.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

using ojson = nlohmann::ordered_json;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string to_string(ProbeMode m) {
  switch (m) {
    case ProbeMode::onehot: return "onehot";
    case ProbeMode::embedding_probe: return "embedding-probe";
    case ProbeMode::random_sentence: return "random-sentence";
    case ProbeMode::random_probe: return "random-probe";
  }
  return "?";
}

namespace {

ProbeMode mode_from_string(const std::string& s) {
  if (s == "onehot") return ProbeMode::onehot;
  if (s == "embedding-probe") return ProbeMode::embedding_probe;
  if (s == "random-sentence") return ProbeMode::random_sentence;
  if (s == "random-probe") return ProbeMode::random_probe;
  throw ParseError("unknown probe mode: " + s);
}

bool two_probe_task(TaskKind k) {
  return k == TaskKind::semrole || k == TaskKind::content2 || k == TaskKind::order;
}

std::vector<double> random_block(const std::string& key, int dim, std::uint64_t seed) {
  Rng rng(mix64(fnv1a64(key) ^ seed));
  std::vector<double> out(dim);
  for (double& x : out) x = rng.normal();
  return out;
}

}  // namespace

FeatureMatrix assemble_features(const TaskDataset& ds, bool use_test_split,
                                const SentenceVectorSet& vectors, ProbeMode mode,
                                const Lexicon& lex, const EmbeddingTable* word_table,
                                std::uint64_t control_seed) {
  const std::vector<TaskInstance>& instances = use_test_split ? ds.test : ds.train;
  const std::vector<std::string> inventory = lex.probe_lemmas();
  std::map<std::string, int> inv_index;
  for (std::size_t i = 0; i < inventory.size(); ++i)
    inv_index[inventory[i]] = static_cast<int>(i);

  if (mode == ProbeMode::embedding_probe && word_table == nullptr)
    throw Error("embedding-probe mode needs a word embedding table");

  const int arity = two_probe_task(ds.task) ? 2 : 1;
  const int sentence_dim = vectors.dim;
  const int block_dim = mode == ProbeMode::embedding_probe ? word_table->dim
                                                           : static_cast<int>(inventory.size());
  FeatureMatrix out;
  out.rows = static_cast<int>(instances.size());
  out.cols = sentence_dim + arity * block_dim;
  out.data.assign(static_cast<std::size_t>(out.rows) * out.cols, 0.0);
  out.labels.reserve(instances.size());

  auto probe_form = [&](const std::string& lemma) {
    if (lex.is_noun(lemma)) return lex.noun_paradigm(lemma).singular;
    if (lex.is_verb(lemma)) return lex.verb_paradigm(lemma).base;
    throw Error("unknown probe lemma: " + lemma);
  };

  for (int r = 0; r < out.rows; ++r) {
    const TaskInstance& inst = instances[r];
    double* row = out.row(r);
    // sentence block
    if (mode == ProbeMode::random_sentence) {
      const std::vector<double> v =
          random_block("sent|" + inst.sentence_id, sentence_dim, control_seed);
      std::copy(v.begin(), v.end(), row);
    } else {
      const SentenceVector* v = vectors.find(inst.sentence_id);
      if (v == nullptr)
        throw Error("missing sentence vector for id " + inst.sentence_id + " (encoder " +
                    vectors.encoder + ")");
      std::copy(v->values.begin(), v->values.end(), row);
    }
    // probe blocks: noun first when present, then verb
    std::vector<std::string> probes;
    if (arity == 2) probes.push_back(inst.probe_noun);
    probes.push_back(inst.probe_verb);
    for (int b = 0; b < arity; ++b) {
      double* block = row + sentence_dim + static_cast<std::size_t>(b) * block_dim;
      const std::string& lemma = probes[b];
      if (!inv_index.count(lemma)) throw Error("unknown probe lemma: " + lemma);
      switch (mode) {
        case ProbeMode::onehot:
        case ProbeMode::random_sentence:
          block[inv_index.at(lemma)] = 1.0;
          break;
        case ProbeMode::random_probe: {
          const std::vector<double> v = random_block("probe|" + lemma, block_dim, control_seed);
          std::copy(v.begin(), v.end(), block);
          break;
        }
        case ProbeMode::embedding_probe: {
          const int rowid = word_table->lookup(probe_form(lemma));
          if (rowid < 0) throw OovError("probe form not in word table: " + probe_form(lemma));
          const std::span<const double> v = word_table->row(rowid);
          std::copy(v.begin(), v.end(), block);
          break;
        }
      }
    }
    out.labels.push_back(inst.label);
  }
  return out;
}

namespace {

struct MlpGrads {
  std::vector<double> w1, b1, w2, b2;
};

double mlp_batch(const MlpParams& params, const FeatureMatrix& data,
                 const std::vector<int>& rows, MlpParams* grads, int* correct) {
  const int B = static_cast<int>(rows.size());
  const int in = params.input_dim;
  const int hidden = params.hidden_dim;

  RowMatrix x(B, in);
  Eigen::VectorXi y(B);
  for (int b = 0; b < B; ++b) {
    std::copy(data.row(rows[b]), data.row(rows[b]) + in, x.row(b).data());
    y[b] = data.labels[rows[b]];
  }

  Eigen::Map<const RowMatrix> w1(params.w1.data(), hidden, in);
  Eigen::Map<const Eigen::VectorXd> b1(params.b1.data(), hidden);
  Eigen::Map<const RowMatrix> w2(params.w2.data(), 2, hidden);
  Eigen::Map<const Eigen::VectorXd> b2(params.b2.data(), 2);

  RowMatrix z1 = x * w1.transpose();
  z1.rowwise() += b1.transpose();
  const RowMatrix a = z1.cwiseMax(0.0);
  RowMatrix logits = a * w2.transpose();
  logits.rowwise() += b2.transpose();

  RowMatrix sm(B, 2);
  double loss = 0.0;
  for (int b = 0; b < B; ++b) {
    const double m = std::max(logits(b, 0), logits(b, 1));
    const double e0 = std::exp(logits(b, 0) - m);
    const double e1 = std::exp(logits(b, 1) - m);
    const double denom = e0 + e1;
    sm(b, 0) = e0 / denom;
    sm(b, 1) = e1 / denom;
    loss += -std::log(std::max(sm(b, y[b]), 1e-300));
    if (correct && (sm(b, 1) > sm(b, 0)) == (y[b] == 1)) ++*correct;
  }
  loss /= B;
  if (grads == nullptr) return loss;

  RowMatrix dlogits = sm;
  for (int b = 0; b < B; ++b) dlogits(b, y[b]) -= 1.0;
  dlogits /= static_cast<double>(B);

  grads->input_dim = in;
  grads->hidden_dim = hidden;
  grads->w1.assign(params.w1.size(), 0.0);
  grads->b1.assign(params.b1.size(), 0.0);
  grads->w2.assign(params.w2.size(), 0.0);
  grads->b2.assign(params.b2.size(), 0.0);
  Eigen::Map<RowMatrix> gw2(grads->w2.data(), 2, hidden);
  Eigen::Map<Eigen::VectorXd> gb2(grads->b2.data(), 2);
  Eigen::Map<RowMatrix> gw1(grads->w1.data(), hidden, in);
  Eigen::Map<Eigen::VectorXd> gb1(grads->b1.data(), hidden);

  gw2.noalias() = dlogits.transpose() * a;
  gb2 = dlogits.colwise().sum().transpose();
  RowMatrix da = dlogits * w2;
  const RowMatrix dz1 = (da.array() * (z1.array() > 0.0).cast<double>()).matrix();
  gw1.noalias() = dz1.transpose() * x;
  gb1 = dz1.colwise().sum().transpose();
  return loss;
}

}  // namespace

double mlp_loss_and_gradients(const MlpParams& params, const FeatureMatrix& batch,
                              const std::vector<int>& rows, MlpParams* grads) {
  return mlp_batch(params, batch, rows, grads, nullptr);
}

TrainResult train_classifier(const FeatureMatrix& train, const MlpConfig& cfg) {
  if (train.rows < 2) throw TrainingError("classifier: need at least two training rows");
  {
    bool has0 = false, has1 = false;
    for (int l : train.labels) (l ? has1 : has0) = true;
    if (!has0 || !has1) throw TrainingError("classifier: degenerate labels (one class present)");
  }

  const int in = train.cols;
  const int hidden = in;  // fixed architecture, no tuning
  MlpParams params;
  params.input_dim = in;
  params.hidden_dim = hidden;
  Rng rng(mix64(cfg.seed ^ 0x6d6c70ULL));
  auto glorot = [&](std::vector<double>& w, int fan_in, int fan_out, std::size_t n) {
    const double scale = std::sqrt(6.0 / (fan_in + fan_out));
    w.resize(n);
    for (double& x : w) x = (rng.uniform() * 2.0 - 1.0) * scale;
  };
  glorot(params.w1, in, hidden, static_cast<std::size_t>(hidden) * in);
  params.b1.assign(hidden, 0.0);
  glorot(params.w2, hidden, 2, static_cast<std::size_t>(2) * hidden);
  params.b2.assign(2, 0.0);

  // dev slice carved from the training rows only
  std::vector<int> rows(train.rows);
  for (int i = 0; i < train.rows; ++i) rows[i] = i;
  rng.shuffle(rows);
  const int dev_n = std::max(1, static_cast<int>(train.rows * cfg.dev_fraction));
  TrainResult result;
  result.dev_indices.assign(rows.end() - dev_n, rows.end());
  std::vector<int> fit_rows(rows.begin(), rows.end() - dev_n);
  {
    bool has0 = false, has1 = false;
    for (int r : fit_rows) (train.labels[r] ? has1 : has0) = true;
    if (!has0 || !has1) throw TrainingError("classifier: degenerate labels after dev split");
  }

  struct AdamState {
    std::vector<double> m, v;
  };
  std::map<std::string, AdamState> adam;
  long adam_t = 0;
  auto adam_step = [&](const std::string& name, std::vector<double>& p,
                       const std::vector<double>& g) {
    AdamState& st = adam[name];
    if (st.m.empty()) {
      st.m.assign(p.size(), 0.0);
      st.v.assign(p.size(), 0.0);
    }
    const double c1 = 1.0 - std::pow(0.9, static_cast<double>(adam_t));
    const double c2 = 1.0 - std::pow(0.999, static_cast<double>(adam_t));
    for (std::size_t i = 0; i < p.size(); ++i) {
      st.m[i] = 0.9 * st.m[i] + 0.1 * g[i];
      st.v[i] = 0.999 * st.v[i] + 0.001 * g[i] * g[i];
      p[i] -= cfg.learning_rate * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + 1e-8);
    }
  };

  MlpParams grads;
  MlpParams best = params;
  double best_dev = 1e300;
  int best_epoch = 0;
  double best_dev_acc = 0.0;
  int stale = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(fit_rows);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < fit_rows.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(fit_rows.size(), start + cfg.batch_size);
      const std::vector<int> batch(fit_rows.begin() + start, fit_rows.begin() + end);
      epoch_loss += mlp_batch(params, train, batch, &grads, nullptr);
      ++adam_t;
      adam_step("w1", params.w1, grads.w1);
      adam_step("b1", params.b1, grads.b1);
      adam_step("w2", params.w2, grads.w2);
      adam_step("b2", params.b2, grads.b2);
      ++batches;
    }
    result.train_loss.push_back(batches ? epoch_loss / batches : 0.0);
    if (!std::isfinite(result.train_loss.back()))
      throw TrainingError("classifier: loss diverged");

    int dev_correct = 0;
    const double dev_loss = mlp_batch(params, train, result.dev_indices, nullptr, &dev_correct);
    result.dev_loss.push_back(dev_loss);
    if (dev_loss < best_dev - 1e-9) {
      best_dev = dev_loss;
      best = params;
      best_epoch = epoch;
      best_dev_acc = static_cast<double>(dev_correct) / dev_n;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  result.params = std::move(best);
  result.best_epoch = best_epoch;
  result.dev_accuracy = best_dev_acc;
  return result;
}

EvalResult evaluate(const MlpParams& params, const FeatureMatrix& test) {
  if (test.cols != params.input_dim)
    throw Error("evaluate: feature width " + std::to_string(test.cols) +
                " does not match classifier input " + std::to_string(params.input_dim));
  EvalResult result;
  int class_total[2] = {0, 0};
  int class_correct[2] = {0, 0};
  for (int start = 0; start < test.rows; start += 256) {
    const int end = std::min(test.rows, start + 256);
    std::vector<int> rows;
    for (int r = start; r < end; ++r) rows.push_back(r);
    const int B = static_cast<int>(rows.size());
    RowMatrix x(B, test.cols);
    for (int b = 0; b < B; ++b)
      std::copy(test.row(rows[b]), test.row(rows[b]) + test.cols, x.row(b).data());
    Eigen::Map<const RowMatrix> w1(params.w1.data(), params.hidden_dim, params.input_dim);
    Eigen::Map<const Eigen::VectorXd> b1(params.b1.data(), params.hidden_dim);
    Eigen::Map<const RowMatrix> w2(params.w2.data(), 2, params.hidden_dim);
    Eigen::Map<const Eigen::VectorXd> b2(params.b2.data(), 2);
    RowMatrix z1 = x * w1.transpose();
    z1.rowwise() += b1.transpose();
    RowMatrix logits = z1.cwiseMax(0.0) * w2.transpose();
    logits.rowwise() += b2.transpose();
    for (int b = 0; b < B; ++b) {
      const int pred = logits(b, 1) > logits(b, 0) ? 1 : 0;
      const int y = test.labels[rows[b]];
      ++class_total[y];
      if (pred == y) ++class_correct[y];
    }
  }
  result.total = class_total[0] + class_total[1];
  result.correct = class_correct[0] + class_correct[1];
  result.accuracy = result.total ? static_cast<double>(result.correct) / result.total : 0.0;
  for (int c = 0; c < 2; ++c) {
    result.class_accuracy[c] =
        class_total[c] ? static_cast<double>(class_correct[c]) / class_total[c] : 0.0;
  }
  return result;
}

std::optional<double> ProbeReport::mean_accuracy(TaskKind task, const std::string& encoder,
                                                 ProbeMode mode) const {
  double sum = 0.0;
  int n = 0;
  for (const ProbeCell& c : cells) {
    if (c.task == task && c.encoder == encoder && c.mode == mode && c.error.empty()) {
      sum += c.accuracy;
      ++n;
    }
  }
  if (!n) return std::nullopt;
  return sum / n;
}

std::string ProbeReport::render_grid() const {
  const std::vector<TaskKind> task_order{TaskKind::content1, TaskKind::content2, TaskKind::order,
                                         TaskKind::semrole, TaskKind::negation};
  std::vector<std::pair<std::string, ProbeMode>> rows;
  for (const ProbeCell& c : cells) {
    const std::pair<std::string, ProbeMode> key{c.encoder, c.mode};
    if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
  }
  std::ostringstream out;
  out << "encoder      mode              ";
  for (TaskKind t : task_order) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%-10s", to_string(t).c_str());
    out << buf;
  }
  out << "\n";
  for (const auto& [encoder, mode] : rows) {
    char head[64];
    std::snprintf(head, sizeof(head), "%-12s %-17s ", encoder.c_str(),
                  to_string(mode).c_str());
    out << head;
    for (TaskKind t : task_order) {
      const std::optional<double> acc = mean_accuracy(t, encoder, mode);
      char cell[16];
      if (acc) {
        std::snprintf(cell, sizeof(cell), "%-10.1f", *acc * 100.0);
      } else {
        std::snprintf(cell, sizeof(cell), "%-10s", "-");
      }
      out << cell;
    }
    out << "\n";
  }
  return out.str();
}

std::string ProbeReport::to_jsonl() const {
  std::string out;
  for (const ProbeCell& c : cells) {
    ojson j;
    j["task"] = to_string(c.task);
    j["encoder"] = c.encoder;
    j["mode"] = to_string(c.mode);
    j["seed"] = c.seed;
    j["accuracy"] = c.accuracy;
    j["dev_accuracy"] = c.dev_accuracy;
    j["epochs_run"] = c.epochs_run;
    j["error"] = c.error;
    j["config_hash"] = config_hash;
    out += j.dump();
    out += "\n";
  }
  return out;
}

ProbeReport ProbeReport::from_jsonl(const std::string& text) {
  ProbeReport report;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const ojson j = ojson::parse(line);
    ProbeCell c;
    c.task = task_from_string(j.at("task").get<std::string>());
    c.encoder = j.at("encoder").get<std::string>();
    c.mode = mode_from_string(j.at("mode").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.accuracy = j.at("accuracy").get<double>();
    c.dev_accuracy = j.at("dev_accuracy").get<double>();
    c.epochs_run = j.at("epochs_run").get<int>();
    c.error = j.at("error").get<std::string>();
    report.config_hash = j.at("config_hash").get<std::string>();
    report.cells.push_back(std::move(c));
  }
  return report;
}

ProbeReport run_suite(const std::map<TaskKind, TaskDataset>& tasks,
                      const std::map<std::string, SentenceVectorSet>& encoders,
                      const Lexicon& lex, const SuiteConfig& cfg,
                      const EmbeddingTable* word_table) {
  ProbeReport report;
  report.config_hash = cfg.config_hash;

  for (const auto& [task, ds] : tasks) {
    for (const auto& [tag, vectors] : encoders) {
      std::vector<ProbeMode> modes{ProbeMode::onehot};
      if (cfg.run_controls) {
        modes.push_back(ProbeMode::random_sentence);
        modes.push_back(ProbeMode::random_probe);
      }
      const bool content_task = task == TaskKind::content1 || task == TaskKind::content2;
      if (cfg.run_probe_ablation && content_task && word_table != nullptr)
        modes.push_back(ProbeMode::embedding_probe);
      for (ProbeMode mode : modes) {
        for (std::uint64_t seed : cfg.seeds) {
          ProbeCell cell;
          cell.task = task;
          cell.encoder = tag;
          cell.mode = mode;
          cell.seed = seed;
          const auto cell_start = std::chrono::steady_clock::now();
          try {
            const std::uint64_t cell_salt =
                fnv1a64(to_string(task) + "|" + tag + "|" + to_string(mode));
            MlpConfig mlp = cfg.classifier;
            mlp.seed = mix64(seed ^ cell_salt);
            const std::uint64_t control_seed = mix64(mlp.seed ^ 0xc0117201ULL);
            const FeatureMatrix train =
                assemble_features(ds, false, vectors, mode, lex, word_table, control_seed);
            const FeatureMatrix test =
                assemble_features(ds, true, vectors, mode, lex, word_table, control_seed);
            TrainResult trained = train_classifier(train, mlp);
            for (int idx : trained.dev_indices) {
              if (idx < 0 || idx >= train.rows)
                throw Error("dev split escaped the training rows");
            }
            const EvalResult eval = evaluate(trained.params, test);
            cell.accuracy = eval.accuracy;
            cell.dev_accuracy = trained.dev_accuracy;
            cell.epochs_run = static_cast<int>(trained.train_loss.size());
          } catch (const std::exception& ex) {
            cell.error = ex.what();
          }
          cell.seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - cell_start)
                  .count();
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return report;
}

}  // namespace sentprobe
