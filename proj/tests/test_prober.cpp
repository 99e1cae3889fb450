#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sentprobe/errors.hpp"
#include "sentprobe/prober.hpp"
#include "sentprobe/taskforge.hpp"
#include "sentprobe/util.hpp"

using namespace sentprobe;

namespace {

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// toy two-instance dataset over real machinery, for feature layout checks
struct Fixture {
  Lexicon lex = Lexicon::builtin();
  TaskDataset ds;
  SentenceVectorSet vectors;

  explicit Fixture(int dim) {
    GenerationConfig cfg;
    cfg.lexicon = lex;
    cfg.max_pool_size = 10;
    const EventPool pool = generate_pool(cfg);
    const AnnotatedSentence s = realize(pool.events[0], lex);
    ds.task = TaskKind::semrole;
    ds.sentences = {s};
    ds.sentence_index = {{s.id, 0}};
    ds.train = {{TaskKind::semrole, s.id, "professor", "help", 1},
                {TaskKind::semrole, s.id, "student", "help", 0}};
    ds.test = ds.train;
    vectors.encoder = "toy";
    vectors.dim = dim;
    SentenceVector v;
    v.id = s.id;
    for (int d = 0; d < dim; ++d) v.values.push_back(0.25 * d);
    vectors.add(std::move(v));
  }
};

FeatureMatrix random_binary_features(int rows, int cols, std::uint64_t seed, bool separable) {
  FeatureMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.data.resize(static_cast<std::size_t>(rows) * cols);
  Rng rng(seed);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m.row(r)[c] = rng.normal();
    if (separable) {
      const int label = m.row(r)[0] + 0.5 * m.row(r)[1] > 0 ? 1 : 0;
      m.labels.push_back(label);
    } else {
      m.labels.push_back(static_cast<int>(rng.below(2)));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("features: width is sentence dim plus probe blocks") {
  Fixture fx(128);
  const FeatureMatrix m = assemble_features(fx.ds, false, fx.vectors, ProbeMode::onehot, fx.lex);
  CHECK(m.cols == 128 + 14 + 14);
  CHECK(m.rows == 2);
  // exactly one hot entry per block
  for (int r = 0; r < m.rows; ++r) {
    for (int block = 0; block < 2; ++block) {
      int hot = 0;
      for (int i = 0; i < 14; ++i) hot += m.row(r)[128 + block * 14 + i] == 1.0 ? 1 : 0;
      CHECK(hot == 1);
    }
  }
  // sentence block carries the vector
  CHECK(m.row(0)[1] == doctest::Approx(0.25));
  CHECK(m.labels == std::vector<int>{1, 0});
}

TEST_CASE("features: one-probe tasks get a single block") {
  Fixture fx(64);
  fx.ds.task = TaskKind::negation;
  for (auto* split : {&fx.ds.train, &fx.ds.test}) {
    for (TaskInstance& i : *split) {
      i.task = TaskKind::negation;
      i.probe_noun.clear();
    }
  }
  const FeatureMatrix m = assemble_features(fx.ds, false, fx.vectors, ProbeMode::onehot, fx.lex);
  CHECK(m.cols == 64 + 14);
}

TEST_CASE("features: control modes are reproducible and substitute one block") {
  Fixture fx(32);
  const FeatureMatrix a =
      assemble_features(fx.ds, false, fx.vectors, ProbeMode::random_sentence, fx.lex, nullptr, 42);
  const FeatureMatrix b =
      assemble_features(fx.ds, false, fx.vectors, ProbeMode::random_sentence, fx.lex, nullptr, 42);
  CHECK(a.data == b.data);
  const FeatureMatrix c =
      assemble_features(fx.ds, false, fx.vectors, ProbeMode::random_sentence, fx.lex, nullptr, 43);
  CHECK(a.data != c.data);
  // probe blocks still one-hot under random-sentence
  int hot = 0;
  for (int i = 0; i < 28; ++i) hot += a.row(0)[32 + i] == 1.0 ? 1 : 0;
  CHECK(hot == 2);

  const FeatureMatrix d =
      assemble_features(fx.ds, false, fx.vectors, ProbeMode::random_probe, fx.lex, nullptr, 42);
  // sentence block intact, probe blocks randomized
  CHECK(d.row(0)[1] == doctest::Approx(0.25));
  CHECK(d.row(0)[32 + 4] != 0.0);
}

TEST_CASE("features: missing vector raises with the id") {
  Fixture fx(16);
  SentenceVectorSet empty;
  empty.dim = 16;
  try {
    assemble_features(fx.ds, false, empty, ProbeMode::onehot, fx.lex);
    FAIL("expected error");
  } catch (const Error& ex) {
    CHECK(std::string(ex.what()).find(fx.ds.train[0].sentence_id) != std::string::npos);
  }
}

TEST_CASE("classifier: separates a linear toy problem") {
  const FeatureMatrix train = random_binary_features(600, 6, 11, true);
  MlpConfig cfg;
  cfg.seed = 2;
  const TrainResult result = train_classifier(train, cfg);
  const EvalResult on_train = evaluate(result.params, train);
  CHECK(on_train.accuracy >= 0.99);
  // dev rows never escape the training matrix
  for (int idx : result.dev_indices) {
    CHECK(idx >= 0);
    CHECK(idx < train.rows);
  }
}

TEST_CASE("classifier: shuffled labels stay at chance on dev") {
  const FeatureMatrix train = random_binary_features(1000, 8, 12, false);
  MlpConfig cfg;
  cfg.seed = 3;
  const TrainResult result = train_classifier(train, cfg);
  CHECK(result.dev_accuracy > 0.47 - 0.03);
  CHECK(result.dev_accuracy < 0.53 + 0.03);
}

TEST_CASE("classifier: degenerate labels and width mismatches raise") {
  FeatureMatrix train = random_binary_features(50, 4, 13, true);
  std::fill(train.labels.begin(), train.labels.end(), 1);
  MlpConfig cfg;
  CHECK_THROWS_AS(train_classifier(train, cfg), TrainingError);

  const FeatureMatrix ok = random_binary_features(60, 4, 14, true);
  const TrainResult result = train_classifier(ok, MlpConfig{});
  const FeatureMatrix wrong = random_binary_features(10, 5, 15, true);
  CHECK_THROWS_AS(evaluate(result.params, wrong), Error);
}

TEST_CASE("classifier: constant prediction scores 50 on a balanced split") {
  FeatureMatrix test;
  test.rows = 100;
  test.cols = 4;
  test.data.assign(400, 0.5);
  for (int i = 0; i < 100; ++i) test.labels.push_back(i % 2);
  MlpParams params;
  params.input_dim = 4;
  params.hidden_dim = 4;
  params.w1.assign(16, 0.0);
  params.b1.assign(4, 0.0);
  params.w2.assign(8, 0.0);
  params.b2 = {1.0, 0.0};  // always class 0
  const EvalResult r = evaluate(params, test);
  CHECK(r.accuracy == doctest::Approx(0.5));
  CHECK(r.class_accuracy[0] == doctest::Approx(1.0));
  CHECK(r.class_accuracy[1] == doctest::Approx(0.0));
}

TEST_CASE("classifier: analytic gradients match finite differences (width 8)") {
  const FeatureMatrix batch = random_binary_features(12, 8, 16, true);
  std::vector<int> rows(batch.rows);
  for (int i = 0; i < batch.rows; ++i) rows[i] = i;

  MlpParams params;
  params.input_dim = 8;
  params.hidden_dim = 8;
  Rng rng(21);
  params.w1.resize(64);
  params.w2.resize(16);
  params.b1.resize(8);
  params.b2.resize(2);
  for (auto* t : {&params.w1, &params.w2, &params.b1, &params.b2}) {
    for (double& x : *t) x = rng.normal() * 0.4;
  }

  MlpParams grads;
  mlp_loss_and_gradients(params, batch, rows, &grads);

  const double eps = 1e-6;
  auto check_tensor = [&](std::vector<double>& tensor, const std::vector<double>& g) {
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double keep = tensor[i];
      tensor[i] = keep + eps;
      const double up = mlp_loss_and_gradients(params, batch, rows, nullptr);
      tensor[i] = keep - eps;
      const double down = mlp_loss_and_gradients(params, batch, rows, nullptr);
      tensor[i] = keep;
      CHECK(close_rel(g[i], (up - down) / (2 * eps), 1e-4));
    }
  };
  check_tensor(params.w1, grads.w1);
  check_tensor(params.b1, grads.b1);
  check_tensor(params.w2, grads.w2);
  check_tensor(params.b2, grads.b2);
}

TEST_CASE("report: jsonl round trip, grid rendering, seed means") {
  ProbeReport report;
  report.config_hash = "cdeadbeef";
  for (std::uint64_t seed : {1, 2, 3}) {
    ProbeCell cell;
    cell.task = TaskKind::content1;
    cell.encoder = "bow";
    cell.mode = ProbeMode::onehot;
    cell.seed = seed;
    cell.accuracy = 0.90 + 0.01 * static_cast<double>(seed);
    report.cells.push_back(cell);
  }
  ProbeCell failed;
  failed.task = TaskKind::order;
  failed.encoder = "bow";
  failed.mode = ProbeMode::onehot;
  failed.error = "boom";
  report.cells.push_back(failed);

  const auto mean = report.mean_accuracy(TaskKind::content1, "bow", ProbeMode::onehot);
  REQUIRE(mean.has_value());
  CHECK(*mean == doctest::Approx(0.92));
  CHECK_FALSE(report.mean_accuracy(TaskKind::order, "bow", ProbeMode::onehot).has_value());

  const ProbeReport back = ProbeReport::from_jsonl(report.to_jsonl());
  REQUIRE(back.cells.size() == report.cells.size());
  CHECK(back.cells[0].accuracy == report.cells[0].accuracy);
  CHECK(back.cells[3].error == "boom");
  CHECK(back.config_hash == "cdeadbeef");
  CHECK(back.to_jsonl() == report.to_jsonl());

  const std::string grid = report.render_grid();
  CHECK(grid.find("bow") != std::string::npos);
  CHECK(grid.find("92.0") != std::string::npos);
}

TEST_CASE("suite: cell failures do not abort the grid") {
  Fixture fx(8);
  // duplicate instances so the classifier has enough rows
  std::vector<TaskInstance> train;
  for (int i = 0; i < 40; ++i) train.insert(train.end(), fx.ds.train.begin(), fx.ds.train.end());
  fx.ds.train = train;

  std::map<TaskKind, TaskDataset> tasks{{TaskKind::semrole, fx.ds}};
  std::map<std::string, SentenceVectorSet> encoders;
  encoders["toy"] = fx.vectors;
  SentenceVectorSet broken;
  broken.encoder = "broken";
  broken.dim = 8;  // no vectors registered -> every cell fails
  encoders["broken"] = broken;

  SuiteConfig cfg;
  cfg.seeds = {1};
  cfg.run_controls = false;
  cfg.run_probe_ablation = false;
  cfg.classifier.max_epochs = 3;
  const ProbeReport report = run_suite(tasks, encoders, fx.lex, cfg);
  REQUIRE(report.cells.size() == 2);
  int failed = 0, ok = 0;
  for (const ProbeCell& c : report.cells) (c.error.empty() ? ok : failed)++;
  CHECK(failed == 1);
  CHECK(ok == 1);
}
