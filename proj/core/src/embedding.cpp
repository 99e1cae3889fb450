#include "sentprobe/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sentprobe/errors.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

int EmbeddingTable::lookup(const std::string& form) const {
  auto it = index.find(form);
  return it == index.end() ? -1 : it->second;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// shared inner routine of the trainer and the public objective
double sgns_eval(const double* v, int dim, const double* const* outs, const int* labels, int k,
                 double* grad_v, double* grad_outs) {
  double loss = 0.0;
  std::fill(grad_v, grad_v + dim, 0.0);
  for (int j = 0; j < k; ++j) {
    const double* u = outs[j];
    double dot = 0.0;
    for (int i = 0; i < dim; ++i) dot += u[i] * v[i];
    const double p = sigmoid(dot);
    loss += labels[j] ? -std::log(std::max(p, 1e-12)) : -std::log(std::max(1.0 - p, 1e-12));
    const double g = p - static_cast<double>(labels[j]);
    double* gu = grad_outs + static_cast<std::size_t>(j) * dim;
    for (int i = 0; i < dim; ++i) {
      grad_v[i] += g * u[i];
      gu[i] = g * v[i];
    }
  }
  return loss;
}

}  // namespace

double sgns_objective(std::span<const double> center,
                      const std::vector<std::vector<double>>& outputs,
                      const std::vector<int>& labels, std::vector<double>* grad_center,
                      std::vector<std::vector<double>>* grad_outputs) {
  const int dim = static_cast<int>(center.size());
  const int k = static_cast<int>(outputs.size());
  if (static_cast<int>(labels.size()) != k) throw Error("sgns: outputs/labels size mismatch");
  std::vector<const double*> outs(k);
  for (int j = 0; j < k; ++j) {
    if (static_cast<int>(outputs[j].size()) != dim) throw Error("sgns: dimension mismatch");
    outs[j] = outputs[j].data();
  }
  std::vector<double> gv(dim), gouts(static_cast<std::size_t>(k) * dim);
  const double loss = sgns_eval(center.data(), dim, outs.data(), labels.data(), k, gv.data(),
                                gouts.data());
  if (grad_center) *grad_center = gv;
  if (grad_outputs) {
    grad_outputs->assign(k, std::vector<double>(dim));
    for (int j = 0; j < k; ++j) {
      std::copy(gouts.begin() + static_cast<std::size_t>(j) * dim,
                gouts.begin() + static_cast<std::size_t>(j + 1) * dim, (*grad_outputs)[j].begin());
    }
  }
  return loss;
}

EmbeddingTable train_skipgram(const std::vector<std::vector<std::string>>& corpus,
                              const SkipgramConfig& cfg, SkipgramStats* stats) {
  if (corpus.empty()) throw TrainingError("skip-gram: empty corpus");

  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total_tokens = 0;
  for (const auto& sentence : corpus) {
    for (const std::string& tok : sentence) {
      ++counts[tok];
      ++total_tokens;
    }
  }
  std::vector<std::string> rare;
  for (const auto& [form, n] : counts) {
    if (n < static_cast<std::uint64_t>(cfg.min_count)) rare.push_back(form);
  }
  if (!rare.empty())
    throw TrainingError("skip-gram: undertrained vocabulary, forms below count " +
                        std::to_string(cfg.min_count) + ": " + join(rare, ", "));

  EmbeddingTable table;
  table.dim = cfg.dim;
  {
    std::vector<std::pair<std::string, std::uint64_t>> by_count(counts.begin(), counts.end());
    std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (const auto& [form, n] : by_count) {
      table.index[form] = static_cast<int>(table.forms.size());
      table.forms.push_back(form);
    }
  }
  const int vocab = static_cast<int>(table.forms.size());
  const int dim = cfg.dim;

  Rng rng(mix64(cfg.seed ^ 0x736774ULL));
  table.vectors.resize(static_cast<std::size_t>(vocab) * dim);
  for (double& x : table.vectors) x = (rng.uniform() - 0.5) / dim;
  std::vector<double> out_vectors(static_cast<std::size_t>(vocab) * dim, 0.0);

  // unigram^0.75 cumulative distribution for negative sampling
  std::vector<double> cdf(vocab);
  {
    double acc = 0.0;
    for (int i = 0; i < vocab; ++i) {
      acc += std::pow(static_cast<double>(counts[table.forms[i]]), 0.75);
      cdf[i] = acc;
    }
    for (double& x : cdf) x /= acc;
  }
  auto sample_negative = [&]() {
    const double u = rng.uniform();
    return static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  };

  // token ids per sentence
  std::vector<std::vector<int>> ids(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    ids[s].reserve(corpus[s].size());
    for (const std::string& tok : corpus[s]) ids[s].push_back(table.index.at(tok));
  }

  const int k = cfg.negatives + 1;
  std::vector<const double*> outs(k);
  std::vector<int> out_ids(k), labels(k);
  std::vector<double> grad_v(dim), grad_outs(static_cast<std::size_t>(k) * dim);
  std::vector<int> kept;

  const double total_schedule =
      static_cast<double>(total_tokens) * std::max(1, cfg.epochs);
  std::uint64_t tokens_seen = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::uint64_t epoch_pairs = 0;
    for (const std::vector<int>& sentence : ids) {
      kept.clear();
      for (int id : sentence) {
        ++tokens_seen;
        if (cfg.sample > 0.0) {
          const double f =
              static_cast<double>(counts[table.forms[id]]) / static_cast<double>(total_tokens);
          const double keep = (std::sqrt(f / cfg.sample) + 1.0) * cfg.sample / f;
          if (keep < 1.0 && rng.uniform() > keep) continue;
        }
        kept.push_back(id);
      }
      const double progress = static_cast<double>(tokens_seen) / total_schedule;
      const double lr =
          std::max(cfg.learning_rate * (1.0 - progress), cfg.learning_rate * 1e-4);
      const int n = static_cast<int>(kept.size());
      for (int i = 0; i < n; ++i) {
        const int center = kept[i];
        double* v = table.vectors.data() + static_cast<std::size_t>(center) * dim;
        for (int off = -cfg.window; off <= cfg.window; ++off) {
          if (off == 0) continue;
          const int j = i + off;
          if (j < 0 || j >= n) continue;
          out_ids[0] = kept[j];
          labels[0] = 1;
          for (int neg = 1; neg < k; ++neg) {
            int cand = sample_negative();
            if (cand == kept[j]) cand = (cand + 1) % vocab;
            out_ids[neg] = cand;
            labels[neg] = 0;
          }
          for (int o = 0; o < k; ++o)
            outs[o] = out_vectors.data() + static_cast<std::size_t>(out_ids[o]) * dim;
          epoch_loss += sgns_eval(v, dim, outs.data(), labels.data(), k, grad_v.data(),
                                  grad_outs.data());
          ++epoch_pairs;
          for (int o = 0; o < k; ++o) {
            double* u = out_vectors.data() + static_cast<std::size_t>(out_ids[o]) * dim;
            const double* gu = grad_outs.data() + static_cast<std::size_t>(o) * dim;
            for (int d = 0; d < dim; ++d) u[d] -= lr * gu[d];
          }
          for (int d = 0; d < dim; ++d) v[d] -= lr * grad_v[d];
        }
      }
    }
    if (stats) stats->epoch_loss.push_back(epoch_pairs ? epoch_loss / epoch_pairs : 0.0);
    if (!std::isfinite(epoch_loss)) throw TrainingError("skip-gram: loss diverged");
  }
  return table;
}

std::vector<double> bow_encode(std::span<const std::string> tokens, const EmbeddingTable& table) {
  if (tokens.empty()) throw OovError("bow: empty token sequence");
  std::vector<int> rows;
  rows.reserve(tokens.size());
  for (const std::string& tok : tokens) {
    const int row = table.lookup(tok);
    if (row < 0) throw OovError("bow: out-of-vocabulary token '" + tok + "'");
    rows.push_back(row);
  }
  // summing in row order makes the mean exactly permutation-invariant
  std::sort(rows.begin(), rows.end());
  std::vector<double> out(table.dim, 0.0);
  for (int row : rows) {
    const std::span<const double> v = table.row(row);
    for (int d = 0; d < table.dim; ++d) out[d] += v[d];
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (double& x : out) x *= inv;
  return out;
}

void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::string out = std::to_string(table.forms.size()) + " " + std::to_string(table.dim) + "\n";
  for (std::size_t i = 0; i < table.forms.size(); ++i) {
    out += table.forms[i];
    const std::span<const double> v = table.row(static_cast<int>(i));
    for (double x : v) {
      out += ' ';
      out += format_double(x);
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string header;
  if (!std::getline(in, header)) throw IoError("embedding file: missing header");
  const std::vector<std::string> h = split_ws(header);
  if (h.size() != 2) throw IoError("embedding file: malformed header");
  std::size_t count = 0;
  int dim = 0;
  try {
    count = std::stoul(h[0]);
    dim = std::stoi(h[1]);
  } catch (const std::exception&) {
    throw IoError("embedding file: malformed header");
  }
  EmbeddingTable table;
  table.dim = dim;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_ws(line);
    if (static_cast<int>(f.size()) != dim + 1)
      throw IoError("embedding file line " + std::to_string(lineno) + ": dimension mismatch");
    if (table.index.count(f[0]))
      throw IoError("embedding file line " + std::to_string(lineno) + ": duplicate id " + f[0]);
    table.index[f[0]] = static_cast<int>(table.forms.size());
    table.forms.push_back(f[0]);
    for (int d = 0; d < dim; ++d) table.vectors.push_back(std::stod(f[d + 1]));
  }
  if (table.forms.size() != count) throw IoError("embedding file: malformed header (count mismatch)");
  return table;
}

}  // namespace sentprobe
