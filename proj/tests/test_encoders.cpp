#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentprobe/embedding.hpp"
#include "sentprobe/errors.hpp"
#include "sentprobe/generator.hpp"
#include "sentprobe/realizer.hpp"
#include "sentprobe/sentence_vectors.hpp"
#include "sentprobe/seq_autoencoder.hpp"
#include "sentprobe/util.hpp"

using namespace sentprobe;

namespace {

std::vector<std::vector<std::string>> small_corpus(std::size_t cap = 3000, std::uint64_t seed = 9) {
  const Lexicon lex = Lexicon::builtin();
  GenerationConfig cfg;
  cfg.lexicon = lex;
  cfg.max_pool_size = cap;
  cfg.seed = seed;
  const EventPool pool = generate_pool(cfg);
  std::vector<std::vector<std::string>> corpus;
  for (const EventRepresentation& e : pool.events) corpus.push_back(realize(e, lex).tokens);
  return corpus;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb) + 1e-12);
}

// |a-b| <= tol * max(1, |a|, |b|)
bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("skip-gram: loss decreases on a repetitive corpus") {
  // a single sentence, repeated; enough distinct words that sampled
  // negatives are mostly true negatives
  std::vector<std::vector<std::string>> corpus(
      60, std::vector<std::string>{"the", "man", "that", "was", "sleeping", "helped", "the",
                                   "student", "while", "a", "doctor", "danced"});
  SkipgramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 10;  // schedule spans 10 epochs; the first 5 must improve strictly
  cfg.min_count = 1;
  cfg.sample = 0.0;
  cfg.seed = 4;
  SkipgramStats stats;
  const EmbeddingTable table = train_skipgram(corpus, cfg, &stats);
  REQUIRE(stats.epoch_loss.size() == 10);
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK(stats.epoch_loss[i] < stats.epoch_loss[i - 1]);
  }
  for (double v : table.vectors) CHECK(std::isfinite(v));
}

TEST_CASE("skip-gram: nouns cluster tighter than noun-verb pairs") {
  const Lexicon lex = Lexicon::builtin();
  SkipgramConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 4;
  cfg.min_count = 1;
  cfg.seed = 13;
  for (std::uint64_t seed : {13ull, 14ull}) {
    cfg.seed = seed;
    const EmbeddingTable table = train_skipgram(small_corpus(), cfg);
    std::vector<std::string> noun_forms, verb_forms;
    for (const std::string& n : lex.nouns()) noun_forms.push_back(lex.noun_paradigm(n).singular);
    for (const std::string& v : lex.verbs()) verb_forms.push_back(lex.verb_paradigm(v).base);
    double intra = 0, cross = 0;
    int intra_n = 0, cross_n = 0;
    for (std::size_t i = 0; i < noun_forms.size(); ++i) {
      const int ri = table.lookup(noun_forms[i]);
      REQUIRE(ri >= 0);
      for (std::size_t j = i + 1; j < noun_forms.size(); ++j) {
        const int rj = table.lookup(noun_forms[j]);
        REQUIRE(rj >= 0);
        intra += cosine(table.row(ri), table.row(rj));
        ++intra_n;
      }
      for (const std::string& vf : verb_forms) {
        const int rv = table.lookup(vf);
        REQUIRE(rv >= 0);
        cross += cosine(table.row(ri), table.row(rv));
        ++cross_n;
      }
    }
    CAPTURE(seed);
    CHECK(intra / intra_n > cross / cross_n);
  }
}

TEST_CASE("skip-gram: seeds change matrices but not determinism") {
  SkipgramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 2;
  cfg.min_count = 1;
  cfg.seed = 3;
  const auto corpus = small_corpus(500);
  const EmbeddingTable a = train_skipgram(corpus, cfg);
  const EmbeddingTable b = train_skipgram(corpus, cfg);
  CHECK(a.vectors == b.vectors);
  cfg.seed = 4;
  const EmbeddingTable c = train_skipgram(corpus, cfg);
  CHECK(a.vectors != c.vectors);
}

TEST_CASE("skip-gram: undertrained vocabulary raises with the rare forms") {
  std::vector<std::vector<std::string>> corpus(
      60, std::vector<std::string>{"the", "man", "helped", "the", "student"});
  corpus.push_back({"the", "doctor", "slept"});
  SkipgramConfig cfg;
  cfg.min_count = 50;
  try {
    train_skipgram(corpus, cfg);
    FAIL("expected TrainingError");
  } catch (const TrainingError& ex) {
    const std::string msg = ex.what();
    CHECK(msg.find("doctor") != std::string::npos);
    CHECK(msg.find("slept") != std::string::npos);
  }
}

TEST_CASE("sgns objective: analytic gradients match finite differences") {
  Rng rng(31);
  const int dim = 5;
  std::vector<double> center(dim);
  for (double& x : center) x = rng.normal() * 0.3;
  std::vector<std::vector<double>> outputs(4, std::vector<double>(dim));
  for (auto& o : outputs) {
    for (double& x : o) x = rng.normal() * 0.3;
  }
  const std::vector<int> labels{1, 0, 0, 1};

  std::vector<double> grad_center;
  std::vector<std::vector<double>> grad_outputs;
  sgns_objective(center, outputs, labels, &grad_center, &grad_outputs);

  const double eps = 1e-6;
  auto loss_at = [&]() { return sgns_objective(center, outputs, labels, nullptr, nullptr); };
  for (int i = 0; i < dim; ++i) {
    const double keep = center[i];
    center[i] = keep + eps;
    const double up = loss_at();
    center[i] = keep - eps;
    const double down = loss_at();
    center[i] = keep;
    CHECK(close_rel(grad_center[i], (up - down) / (2 * eps), 1e-4));
  }
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    for (int i = 0; i < dim; ++i) {
      const double keep = outputs[j][i];
      outputs[j][i] = keep + eps;
      const double up = loss_at();
      outputs[j][i] = keep - eps;
      const double down = loss_at();
      outputs[j][i] = keep;
      CHECK(close_rel(grad_outputs[j][i], (up - down) / (2 * eps), 1e-4));
    }
  }
}

TEST_CASE("bow: identical tokens, toy hand average, permutation invariance") {
  EmbeddingTable toy;
  toy.dim = 2;
  toy.forms = {"the", "men", "were", "sleeping"};
  for (std::size_t i = 0; i < toy.forms.size(); ++i) toy.index[toy.forms[i]] = i;
  toy.vectors = {1.0, 2.0, 3.0, -4.0, 0.5, 0.5, -1.0, 8.0};

  const std::vector<std::string> twice{"sleeping", "sleeping"};
  CHECK(bow_encode(twice, toy) == std::vector<double>{-1.0, 8.0});

  const std::vector<std::string> sentence{"the", "men", "were", "sleeping"};
  const std::vector<double> mean = bow_encode(sentence, toy);
  CHECK(mean[0] == doctest::Approx((1.0 + 3.0 + 0.5 - 1.0) / 4));
  CHECK(mean[1] == doctest::Approx((2.0 - 4.0 + 0.5 + 8.0) / 4));

  // exact equality under permutation
  Rng rng(77);
  std::vector<std::string> shuffled = sentence;
  for (int trial = 0; trial < 200; ++trial) {
    rng.shuffle(shuffled);
    CHECK(bow_encode(shuffled, toy) == mean);
  }
  CHECK_THROWS_AS(bow_encode(std::vector<std::string>{"unknown"}, toy), OovError);
}

TEST_CASE("embedding table io round trip is exact") {
  SkipgramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 1;
  cfg.min_count = 1;
  const EmbeddingTable table = train_skipgram(small_corpus(300), cfg);
  const auto dir = std::filesystem::temp_directory_path() / "sentprobe_test_emb";
  std::filesystem::create_directories(dir);
  save_embedding_table(table, dir / "t.emb");
  const EmbeddingTable back = load_embedding_table(dir / "t.emb");
  CHECK(back.forms == table.forms);
  CHECK(back.vectors == table.vectors);  // bitwise
}

TEST_CASE("sdae: gradients match finite differences on a toy model") {
  // tiny dimensions so the full parameter set can be checked
  std::vector<std::vector<std::string>> corpus{
      {"a", "b", "c"}, {"c", "b"}, {"a", "c", "b", "a"}};
  SdaeConfig cfg;
  cfg.word_dim = 3;
  cfg.hidden_dim = 4;
  cfg.epochs = 1;
  cfg.batch_size = 3;
  cfg.drop_prob = 0;
  cfg.swap_prob = 0;
  cfg.seed = 17;
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
  int checked = 0;
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
      if (!close_rel(g[i], fd, 1e-4)) {
        CAPTURE(name);
        CAPTURE(i);
        CHECK(close_rel(g[i], fd, 1e-4));
      }
      ++checked;
    }
  });
  CHECK(checked > 200);  // every parameter of the toy model
}

TEST_CASE("sdae: memorizes a tiny corpus without noise") {
  const auto corpus = small_corpus(200, 31);
  std::vector<std::vector<std::string>> tiny(corpus.begin(), corpus.begin() + 10);
  SdaeConfig cfg;
  cfg.word_dim = 24;
  cfg.hidden_dim = 48;
  cfg.epochs = 400;
  cfg.batch_size = 10;
  cfg.learning_rate = 3e-3;
  cfg.drop_prob = 0;
  cfg.swap_prob = 0;
  cfg.seed = 19;
  cfg.heldout_sentences = 0;  // memorization test trains on everything
  cfg.divergence_patience = 1000;
  cfg.target_accuracy = 2.0;  // never early-exit
  const SdaeParams params = train_seq_autoencoder(tiny, cfg);
  CHECK(reconstruction_accuracy(tiny, params) >= 0.95);

  // inference is deterministic
  const std::vector<double> a = seq_encode(tiny[0], params);
  const std::vector<double> b = seq_encode(tiny[0], params);
  CHECK(a == b);
  CHECK(static_cast<int>(a.size()) == cfg.hidden_dim);

  // order sensitivity, in contrast with bow_encode
  std::vector<std::string> reversed = tiny[0];
  std::reverse(reversed.begin(), reversed.end());
  if (reversed != tiny[0]) CHECK(seq_encode(reversed, params) != a);

  CHECK_THROWS_AS(seq_encode(std::vector<std::string>{"zzz"}, params), OovError);
}

TEST_CASE("sdae: params io round trip is exact") {
  std::vector<std::vector<std::string>> corpus{{"a", "b"}, {"b", "a"}, {"a", "a", "b"}};
  SdaeConfig cfg;
  cfg.word_dim = 3;
  cfg.hidden_dim = 4;
  cfg.epochs = 1;
  cfg.batch_size = 2;
  cfg.heldout_sentences = 1;
  cfg.divergence_patience = 100;
  const SdaeParams params = train_seq_autoencoder(corpus, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "sentprobe_test_sdae";
  std::filesystem::create_directories(dir);
  save_sdae(params, dir / "p.txt");
  SdaeParams back = load_sdae(dir / "p.txt");
  CHECK(back.forms == params.forms);
  CHECK(back.embedding == params.embedding);
  CHECK(back.encoder.u == params.encoder.u);
  CHECK(back.w_out == params.w_out);
  CHECK(seq_encode(corpus[0], back) == seq_encode(corpus[0], params));
}

TEST_CASE("random vectors: reproducible per id, zero-mean distribution") {
  const std::vector<std::string> ids{"s1", "s2", "s3"};
  const SentenceVectorSet a = random_vectors(ids, 16, 99);
  const SentenceVectorSet b = random_vectors(ids, 16, 99);
  for (const std::string& id : ids) CHECK(a.find(id)->values == b.find(id)->values);
  const SentenceVectorSet c = random_vectors(ids, 16, 100);
  CHECK(a.find("s1")->values != c.find("s1")->values);

  // mean of 1e5 draws within three standard errors of zero
  std::vector<std::string> many;
  for (int i = 0; i < 6250; ++i) many.push_back("id" + std::to_string(i));
  const SentenceVectorSet big = random_vectors(many, 16, 7);
  double sum = 0;
  long n = 0;
  for (const SentenceVector& v : big.vectors) {
    sum = std::accumulate(v.values.begin(), v.values.end(), sum);
    n += static_cast<long>(v.values.size());
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sentence vector files: exact round trip and malformed inputs") {
  SentenceVectorSet set;
  set.encoder = "test";
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    SentenceVector v;
    v.id = "s" + std::to_string(i);
    for (int d = 0; d < 7; ++d) v.values.push_back(rng.normal());
    set.add(std::move(v));
  }
  const auto dir = std::filesystem::temp_directory_path() / "sentprobe_test_vec";
  std::filesystem::create_directories(dir);
  save_vectors(set, dir / "v.vec");
  const SentenceVectorSet back = load_vectors(dir / "v.vec", "test");
  REQUIRE(back.vectors.size() == set.vectors.size());
  for (std::size_t i = 0; i < set.vectors.size(); ++i) {
    CHECK(back.vectors[i].id == set.vectors[i].id);
    CHECK(back.vectors[i].values == set.vectors[i].values);  // bitwise
  }
  // saving the loaded set reproduces the file byte for byte
  save_vectors(back, dir / "v2.vec");
  CHECK(read_file(dir / "v.vec") == read_file(dir / "v2.vec"));

  atomic_write_file(dir / "bad_arity.vec", "2 3\na 1 2 3\nb 1 2\n");
  try {
    load_vectors(dir / "bad_arity.vec");
    FAIL("expected IoError");
  } catch (const IoError& ex) {
    const std::string msg = ex.what();
    CHECK(msg.find("dimension mismatch") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
  }
  atomic_write_file(dir / "bad_count.vec", "3 2\na 1 2\nb 3 4\n");
  CHECK_THROWS_WITH_AS(load_vectors(dir / "bad_count.vec"),
                       doctest::Contains("malformed header"), IoError);
  atomic_write_file(dir / "dup.vec", "2 2\na 1 2\na 3 4\n");
  CHECK_THROWS_WITH_AS(load_vectors(dir / "dup.vec"), doctest::Contains("duplicate"), IoError);
  atomic_write_file(dir / "bad_header.vec", "x y\n");
  CHECK_THROWS_WITH_AS(load_vectors(dir / "bad_header.vec"),
                       doctest::Contains("malformed header"), IoError);
}
