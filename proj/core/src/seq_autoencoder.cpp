#include "sentprobe/seq_autoencoder.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "sentprobe/errors.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<Matrix>;
using ConstMap = Eigen::Map<const Matrix>;

Matrix sigmoid(const Matrix& x) { return ((-x.array()).exp() + 1.0).inverse().matrix(); }

struct GruStep {
  Matrix x;      // B x D input embeddings
  Matrix hprev;  // B x H
  Matrix z, r, c, h;
  Eigen::ArrayXd mask;  // B, 1 = step valid for this row
};

struct GruGrads {
  Matrix w = Matrix();
  Matrix u = Matrix();
  Eigen::VectorXd b;
};

// One recurrent step over a batch. Rows with mask 0 carry the previous
// state through unchanged.
void gru_forward(const GruCell& cell, int d, int h, GruStep& step) {
  const int b = static_cast<int>(step.x.rows());
  ConstMap w(cell.w.data(), 3 * h, d);
  ConstMap u(cell.u.data(), 3 * h, h);
  Eigen::Map<const Eigen::VectorXd> bias(cell.b.data(), 3 * h);

  const Matrix xw = step.x * w.transpose();  // B x 3H
  step.z = sigmoid(xw.middleCols(0, h) + step.hprev * u.block(0, 0, h, h).transpose() +
                   bias.segment(0, h).transpose().replicate(b, 1));
  step.r = sigmoid(xw.middleCols(h, h) + step.hprev * u.block(h, 0, h, h).transpose() +
                   bias.segment(h, h).transpose().replicate(b, 1));
  step.c = (xw.middleCols(2 * h, h) +
            (step.r.array() * step.hprev.array()).matrix() * u.block(2 * h, 0, h, h).transpose() +
            bias.segment(2 * h, h).transpose().replicate(b, 1))
               .array()
               .tanh()
               .matrix();
  Matrix fresh =
      ((1.0 - step.z.array()) * step.hprev.array() + step.z.array() * step.c.array()).matrix();
  step.h = (fresh.array().colwise() * step.mask +
            step.hprev.array().colwise() * (1.0 - step.mask))
               .matrix();
}

// Backward through one step: consumes dL/dH_t, emits dL/dH_{t-1} and dL/dX_t,
// accumulating parameter gradients.
void gru_backward(const GruCell& cell, int d, int h, const GruStep& step, const Matrix& dh,
                  Matrix& dhprev, Matrix& dx, GruGrads& g) {
  ConstMap w(cell.w.data(), 3 * h, d);
  ConstMap u(cell.u.data(), 3 * h, h);

  const Matrix dh_step = (dh.array().colwise() * step.mask).matrix();
  dhprev = (dh.array().colwise() * (1.0 - step.mask)).matrix();

  const Matrix dzlin = (dh_step.array() * (step.c.array() - step.hprev.array()) * step.z.array() *
                        (1.0 - step.z.array()))
                           .matrix();
  const Matrix dclin =
      (dh_step.array() * step.z.array() * (1.0 - step.c.array().square())).matrix();
  dhprev.array() += dh_step.array() * (1.0 - step.z.array());

  const Matrix drh = dclin * u.block(2 * h, 0, h, h);  // d(r*hprev)
  const Matrix drlin =
      (drh.array() * step.hprev.array() * step.r.array() * (1.0 - step.r.array())).matrix();
  dhprev.array() += drh.array() * step.r.array();

  // parameter gradients
  g.w.block(0, 0, h, d).noalias() += dzlin.transpose() * step.x;
  g.w.block(h, 0, h, d).noalias() += drlin.transpose() * step.x;
  g.w.block(2 * h, 0, h, d).noalias() += dclin.transpose() * step.x;
  g.u.block(0, 0, h, h).noalias() += dzlin.transpose() * step.hprev;
  g.u.block(h, 0, h, h).noalias() += drlin.transpose() * step.hprev;
  g.u.block(2 * h, 0, h, h).noalias() +=
      dclin.transpose() * (step.r.array() * step.hprev.array()).matrix();
  g.b.segment(0, h) += dzlin.colwise().sum().transpose();
  g.b.segment(h, h) += drlin.colwise().sum().transpose();
  g.b.segment(2 * h, h) += dclin.colwise().sum().transpose();

  dhprev.noalias() += dzlin * u.block(0, 0, h, h);
  dhprev.noalias() += drlin * u.block(h, 0, h, h);
  dx.noalias() = dzlin * w.block(0, 0, h, d);
  dx.noalias() += drlin * w.block(h, 0, h, d);
  dx.noalias() += dclin * w.block(2 * h, 0, h, d);
}

struct BatchWork {
  std::vector<GruStep> enc_steps;
  std::vector<GruStep> dec_steps;
  std::vector<std::vector<int>> enc_ids;  // per step, B token ids (-1 = pad)
  std::vector<std::vector<int>> dec_in_ids;
  std::vector<std::vector<int>> dec_targets;  // -1 = pad
  Matrix enc_final;
  double loss = 0.0;
  long correct = 0;
  long predicted = 0;
};

void gather_rows(const std::vector<double>& table, int dim, const std::vector<int>& ids,
                 Matrix& out) {
  out.resize(static_cast<int>(ids.size()), dim);
  for (std::size_t b = 0; b < ids.size(); ++b) {
    const int id = std::max(ids[b], 0);
    out.row(static_cast<int>(b)) =
        Eigen::Map<const Eigen::RowVectorXd>(table.data() + static_cast<std::size_t>(id) * dim,
                                             dim);
  }
}

}  // namespace

int SdaeParams::lookup(const std::string& form) const {
  auto it = index.find(form);
  return it == index.end() ? -1 : it->second;
}

void SdaeParams::for_each_tensor(
    const std::function<void(const std::string&, std::vector<double>&)>& fn) {
  fn("embedding", embedding);
  fn("enc.w", encoder.w);
  fn("enc.u", encoder.u);
  fn("enc.b", encoder.b);
  fn("dec.w", decoder.w);
  fn("dec.u", decoder.u);
  fn("dec.b", decoder.b);
  fn("w_out", w_out);
  fn("b_out", b_out);
}

double sdae_loss_and_gradients(SdaeParams& params, const std::vector<std::vector<int>>& inputs,
                               const std::vector<std::vector<int>>& targets,
                               std::map<std::string, std::vector<double>>* grads) {
  if (inputs.size() != targets.size() || inputs.empty())
    throw Error("sdae batch: inputs/targets mismatch");
  const int B = static_cast<int>(inputs.size());
  const int D = params.word_dim;
  const int H = params.hidden_dim;
  const int V = static_cast<int>(params.forms.size());

  std::size_t t_enc = 0, t_dec = 0;
  for (int b = 0; b < B; ++b) {
    t_enc = std::max(t_enc, inputs[b].size());
    t_dec = std::max(t_dec, targets[b].size() + 1);  // +1 for the EOS prediction
  }

  BatchWork work;
  // ---- encoder forward ----
  Matrix h = Matrix::Zero(B, H);
  for (std::size_t t = 0; t < t_enc; ++t) {
    GruStep step;
    std::vector<int> ids(B, -1);
    step.mask = Eigen::ArrayXd::Zero(B);
    for (int b = 0; b < B; ++b) {
      if (t < inputs[b].size()) {
        ids[b] = inputs[b][t];
        step.mask[b] = 1.0;
      }
    }
    gather_rows(params.embedding, D, ids, step.x);
    step.hprev = h;
    gru_forward(params.encoder, D, H, step);
    h = step.h;
    work.enc_ids.push_back(std::move(ids));
    work.enc_steps.push_back(std::move(step));
  }
  work.enc_final = h;

  // ---- decoder forward (teacher forcing; predicts targets then EOS) ----
  ConstMap wout(params.w_out.data(), V, H);
  Eigen::Map<const Eigen::VectorXd> bout(params.b_out.data(), V);
  std::vector<Matrix> softmaxes;
  softmaxes.reserve(t_dec);
  double loss = 0.0;
  long valid_total = 0;
  for (int b = 0; b < B; ++b) valid_total += static_cast<long>(targets[b].size()) + 1;

  for (std::size_t t = 0; t < t_dec; ++t) {
    GruStep step;
    std::vector<int> in_ids(B, -1), tgt(B, -1);
    step.mask = Eigen::ArrayXd::Zero(B);
    for (int b = 0; b < B; ++b) {
      const std::size_t n = targets[b].size();
      if (t <= n) {
        in_ids[b] = t == 0 ? params.bos_id : targets[b][t - 1];
        tgt[b] = t == n ? params.eos_id : targets[b][t];
        step.mask[b] = 1.0;
      }
    }
    gather_rows(params.embedding, D, in_ids, step.x);
    step.hprev = h;
    gru_forward(params.decoder, D, H, step);
    h = step.h;

    Matrix logits = step.h * wout.transpose();
    logits.rowwise() += bout.transpose();
    const Eigen::VectorXd rowmax = logits.rowwise().maxCoeff();
    Matrix sm = (logits.colwise() - rowmax).array().exp().matrix();
    const Eigen::VectorXd denom = sm.rowwise().sum();
    sm.array().colwise() /= denom.array();
    for (int b = 0; b < B; ++b) {
      if (tgt[b] < 0) continue;
      loss += -std::log(std::max(sm(b, tgt[b]), 1e-300));
      if (grads == nullptr) {
        int arg = 0;
        sm.row(b).maxCoeff(&arg);
        work.predicted += 1;
        work.correct += arg == tgt[b] ? 1 : 0;
      }
    }
    softmaxes.push_back(std::move(sm));
    work.dec_in_ids.push_back(std::move(in_ids));
    work.dec_targets.push_back(std::move(tgt));
    work.dec_steps.push_back(std::move(step));
  }
  loss /= static_cast<double>(valid_total);
  work.loss = loss;

  if (grads == nullptr) return loss;

  // ---- backward ----
  std::map<std::string, std::vector<double>>& g = *grads;
  params.for_each_tensor([&](const std::string& name, std::vector<double>& tensor) {
    g[name].assign(tensor.size(), 0.0);
  });
  Map gemb(g["embedding"].data(), V, D);
  GruGrads genc, gdec;
  genc.w = Matrix::Zero(3 * H, D);
  genc.u = Matrix::Zero(3 * H, H);
  genc.b = Eigen::VectorXd::Zero(3 * H);
  gdec.w = Matrix::Zero(3 * H, D);
  gdec.u = Matrix::Zero(3 * H, H);
  gdec.b = Eigen::VectorXd::Zero(3 * H);
  Map gwout(g["w_out"].data(), V, H);
  Eigen::Map<Eigen::VectorXd> gbout(g["b_out"].data(), V);

  const double inv_total = 1.0 / static_cast<double>(valid_total);
  Matrix dh = Matrix::Zero(B, H);
  Matrix dx(B, D), dhprev(B, H);
  for (std::size_t t = t_dec; t-- > 0;) {
    const GruStep& step = work.dec_steps[t];
    Matrix dlogits = softmaxes[t];
    for (int b = 0; b < B; ++b) {
      const int tgt = work.dec_targets[t][b];
      if (tgt < 0) {
        dlogits.row(b).setZero();
      } else {
        dlogits(b, tgt) -= 1.0;
        dlogits.row(b) *= inv_total;
      }
    }
    gwout.noalias() += dlogits.transpose() * step.h;
    gbout += dlogits.colwise().sum().transpose();
    dh.noalias() += dlogits * ConstMap(params.w_out.data(), V, H);

    gru_backward(params.decoder, D, H, step, dh, dhprev, dx, gdec);
    for (int b = 0; b < B; ++b) {
      const int id = work.dec_in_ids[t][b];
      if (id >= 0) gemb.row(id) += dx.row(b);
    }
    dh = dhprev;
  }
  // gradient w.r.t. the encoder's final state
  for (std::size_t t = t_enc; t-- > 0;) {
    const GruStep& step = work.enc_steps[t];
    gru_backward(params.encoder, D, H, step, dh, dhprev, dx, genc);
    for (int b = 0; b < B; ++b) {
      const int id = work.enc_ids[t][b];
      if (id >= 0) gemb.row(id) += dx.row(b);
    }
    dh = dhprev;
  }

  Map(g["enc.w"].data(), 3 * H, D) = genc.w;
  Map(g["enc.u"].data(), 3 * H, H) = genc.u;
  Eigen::Map<Eigen::VectorXd>(g["enc.b"].data(), 3 * H) = genc.b;
  Map(g["dec.w"].data(), 3 * H, D) = gdec.w;
  Map(g["dec.u"].data(), 3 * H, H) = gdec.u;
  Eigen::Map<Eigen::VectorXd>(g["dec.b"].data(), 3 * H) = gdec.b;
  return loss;
}

namespace {

struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;
  std::map<std::string, std::vector<double>> m, v;

  void step(SdaeParams& params, std::map<std::string, std::vector<double>>& grads) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    params.for_each_tensor([&](const std::string& name, std::vector<double>& tensor) {
      std::vector<double>& gm = m[name];
      std::vector<double>& gv = v[name];
      if (gm.empty()) gm.assign(tensor.size(), 0.0);
      if (gv.empty()) gv.assign(tensor.size(), 0.0);
      const std::vector<double>& g = grads[name];
      for (std::size_t i = 0; i < tensor.size(); ++i) {
        gm[i] = beta1 * gm[i] + (1.0 - beta1) * g[i];
        gv[i] = beta2 * gv[i] + (1.0 - beta2) * g[i] * g[i];
        tensor[i] -= lr * (gm[i] / c1) / (std::sqrt(gv[i] / c2) + eps);
      }
    });
  }
};

std::vector<int> apply_noise(const std::vector<int>& ids, double drop_prob, double swap_prob,
                             Rng& rng) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (rng.uniform() < drop_prob) continue;
    out.push_back(id);
  }
  if (out.empty()) out.push_back(ids.front());
  std::size_t i = 0;
  while (i + 1 < out.size()) {
    if (rng.uniform() < swap_prob) {
      std::swap(out[i], out[i + 1]);
      i += 2;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<std::vector<int>> to_ids(const std::vector<std::vector<std::string>>& corpus,
                                     const SdaeParams& params) {
  std::vector<std::vector<int>> out;
  out.reserve(corpus.size());
  for (const auto& sentence : corpus) {
    std::vector<int> ids;
    ids.reserve(sentence.size());
    for (const std::string& tok : sentence) {
      const int id = params.lookup(tok);
      if (id < 0) throw OovError("sdae: out-of-vocabulary token '" + tok + "'");
      ids.push_back(id);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace

double reconstruction_cross_entropy(const std::vector<std::vector<std::string>>& corpus,
                                    const SdaeParams& params) {
  SdaeParams& p = const_cast<SdaeParams&>(params);
  const std::vector<std::vector<int>> ids = to_ids(corpus, params);
  double total = 0.0;
  long batches = 0;
  for (std::size_t start = 0; start < ids.size(); start += 64) {
    const std::size_t end = std::min(ids.size(), start + 64);
    std::vector<std::vector<int>> batch(ids.begin() + start, ids.begin() + end);
    total += sdae_loss_and_gradients(p, batch, batch, nullptr);
    ++batches;
  }
  return batches ? total / batches : 0.0;
}

double reconstruction_accuracy(const std::vector<std::vector<std::string>>& corpus,
                               const SdaeParams& params) {
  // teacher-forced next-token argmax accuracy on clean inputs
  SdaeParams& p = const_cast<SdaeParams&>(params);
  const std::vector<std::vector<int>> ids = to_ids(corpus, params);
  const int D = p.word_dim, H = p.hidden_dim, V = static_cast<int>(p.forms.size());
  long correct = 0, total = 0;
  for (std::size_t start = 0; start < ids.size(); start += 64) {
    const std::size_t end = std::min(ids.size(), start + 64);
    const int B = static_cast<int>(end - start);
    std::size_t t_enc = 0, t_dec = 0;
    for (int b = 0; b < B; ++b) {
      t_enc = std::max(t_enc, ids[start + b].size());
      t_dec = std::max(t_dec, ids[start + b].size() + 1);
    }
    Matrix h = Matrix::Zero(B, H);
    for (std::size_t t = 0; t < t_enc; ++t) {
      GruStep step;
      std::vector<int> in(B, -1);
      step.mask = Eigen::ArrayXd::Zero(B);
      for (int b = 0; b < B; ++b) {
        if (t < ids[start + b].size()) { in[b] = ids[start + b][t]; step.mask[b] = 1.0; }
      }
      gather_rows(p.embedding, D, in, step.x);
      step.hprev = h;
      gru_forward(p.encoder, D, H, step);
      h = step.h;
    }
    ConstMap wout(p.w_out.data(), V, H);
    Eigen::Map<const Eigen::VectorXd> bout(p.b_out.data(), V);
    for (std::size_t t = 0; t < t_dec; ++t) {
      GruStep step;
      std::vector<int> in(B, -1), tgt(B, -1);
      step.mask = Eigen::ArrayXd::Zero(B);
      for (int b = 0; b < B; ++b) {
        const std::size_t n = ids[start + b].size();
        if (t <= n) {
          in[b] = t == 0 ? p.bos_id : ids[start + b][t - 1];
          tgt[b] = t == n ? p.eos_id : ids[start + b][t];
          step.mask[b] = 1.0;
        }
      }
      gather_rows(p.embedding, D, in, step.x);
      step.hprev = h;
      gru_forward(p.decoder, D, H, step);
      h = step.h;
      Matrix logits = step.h * wout.transpose();
      logits.rowwise() += bout.transpose();
      for (int b = 0; b < B; ++b) {
        if (tgt[b] < 0) continue;
        int arg = 0;
        logits.row(b).maxCoeff(&arg);
        ++total;
        correct += arg == tgt[b] ? 1 : 0;
      }
    }
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

SdaeParams train_seq_autoencoder(const std::vector<std::vector<std::string>>& corpus,
                                 const SdaeConfig& cfg, SdaeTrainStats* stats) {
  if (corpus.empty()) throw TrainingError("sdae: empty corpus");

  SdaeParams params;
  params.word_dim = cfg.word_dim;
  params.hidden_dim = cfg.hidden_dim;
  {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& s : corpus) {
      for (const std::string& tok : s) ++counts[tok];
    }
    std::vector<std::pair<std::string, std::uint64_t>> by_count(counts.begin(), counts.end());
    std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (const auto& [form, n] : by_count) {
      params.index[form] = static_cast<int>(params.forms.size());
      params.forms.push_back(form);
    }
    params.bos_id = static_cast<int>(params.forms.size());
    params.forms.push_back("<s>");
    params.index["<s>"] = params.bos_id;
    params.eos_id = static_cast<int>(params.forms.size());
    params.forms.push_back("</s>");
    params.index["</s>"] = params.eos_id;
  }
  const int V = static_cast<int>(params.forms.size());
  const int D = cfg.word_dim, H = cfg.hidden_dim;

  Rng init_rng(mix64(cfg.seed ^ 0x73646165ULL));
  auto init = [&](std::vector<double>& tensor, std::size_t n, double scale) {
    tensor.resize(n);
    for (double& x : tensor) x = (init_rng.uniform() * 2.0 - 1.0) * scale;
  };
  init(params.embedding, static_cast<std::size_t>(V) * D, 0.08);
  init(params.encoder.w, static_cast<std::size_t>(3 * H) * D, std::sqrt(1.0 / D));
  init(params.encoder.u, static_cast<std::size_t>(3 * H) * H, std::sqrt(1.0 / H));
  params.encoder.b.assign(3 * H, 0.0);
  init(params.decoder.w, static_cast<std::size_t>(3 * H) * D, std::sqrt(1.0 / D));
  init(params.decoder.u, static_cast<std::size_t>(3 * H) * H, std::sqrt(1.0 / H));
  params.decoder.b.assign(3 * H, 0.0);
  init(params.w_out, static_cast<std::size_t>(V) * H, std::sqrt(1.0 / H));
  params.b_out.assign(V, 0.0);

  std::vector<std::vector<int>> all_ids = to_ids(corpus, params);
  std::vector<std::size_t> order(all_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  {
    Rng rng(mix64(cfg.seed ^ 0x686f6cULL));
    rng.shuffle(order);
  }
  const std::size_t heldout_n =
      std::min<std::size_t>(cfg.heldout_sentences, all_ids.size() / 10 + 1);
  std::vector<std::size_t> train_order;
  std::vector<std::vector<std::string>> heldout_tokens;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i + heldout_n >= order.size()) {
      heldout_tokens.push_back(corpus[order[i]]);
    } else {
      train_order.push_back(order[i]);
    }
  }

  Adam adam;
  adam.lr = cfg.learning_rate;
  std::map<std::string, std::vector<double>> grads;
  double best_heldout = 1e300;
  int stale = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(mix64(cfg.seed ^ (0x65700000ULL + static_cast<std::uint64_t>(epoch))));
    std::vector<std::size_t> epoch_order = train_order;
    rng.shuffle(epoch_order);

    double epoch_loss = 0.0;
    long batches = 0;
    for (std::size_t start = 0; start < epoch_order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(epoch_order.size(), start + cfg.batch_size);
      std::vector<std::vector<int>> inputs, targets;
      inputs.reserve(end - start);
      targets.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const std::vector<int>& clean = all_ids[epoch_order[i]];
        inputs.push_back(apply_noise(clean, cfg.drop_prob, cfg.swap_prob, rng));
        targets.push_back(clean);
      }
      const double loss = sdae_loss_and_gradients(params, inputs, targets, &grads);
      if (!std::isfinite(loss)) throw TrainingError("sdae: loss diverged (not finite)");
      adam.step(params, grads);
      epoch_loss += loss;
      ++batches;
    }
    const double train_loss = batches ? epoch_loss / batches : 0.0;

    const double held_ce = reconstruction_cross_entropy(heldout_tokens, params);
    const double held_acc = reconstruction_accuracy(heldout_tokens, params);
    if (stats) {
      stats->train_loss.push_back(train_loss);
      stats->heldout_loss.push_back(held_ce);
      stats->heldout_accuracy.push_back(held_acc);
    }
    if (held_acc >= cfg.target_accuracy) break;
    if (held_ce < best_heldout - 1e-9) {
      best_heldout = held_ce;
      stale = 0;
    } else if (++stale >= cfg.divergence_patience) {
      throw TrainingError("sdae: held-out reconstruction loss stopped decreasing");
    }
  }
  return params;
}

std::vector<double> seq_encode(std::span<const std::string> tokens, const SdaeParams& params) {
  SdaeParams& p = const_cast<SdaeParams&>(params);
  const int D = p.word_dim, H = p.hidden_dim;
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& tok : tokens) {
    const int id = p.lookup(tok);
    if (id < 0) throw OovError("sdae: out-of-vocabulary token '" + tok + "'");
    ids.push_back(id);
  }
  if (ids.empty()) throw OovError("sdae: empty token sequence");
  Matrix h = Matrix::Zero(1, H);
  for (int id : ids) {
    GruStep step;
    step.mask = Eigen::ArrayXd::Ones(1);
    gather_rows(p.embedding, D, {id}, step.x);
    step.hprev = h;
    gru_forward(p.encoder, D, H, step);
    h = step.h;
  }
  return std::vector<double>(h.data(), h.data() + H);
}

void save_sdae(const SdaeParams& params, const std::filesystem::path& path) {
  std::string out;
  out += "sdae " + std::to_string(params.forms.size()) + " " + std::to_string(params.word_dim) +
         " " + std::to_string(params.hidden_dim) + " " + std::to_string(params.bos_id) + " " +
         std::to_string(params.eos_id) + "\n";
  for (const std::string& f : params.forms) out += f + "\n";
  SdaeParams& p = const_cast<SdaeParams&>(params);
  p.for_each_tensor([&](const std::string& name, std::vector<double>& tensor) {
    out += name + " " + std::to_string(tensor.size());
    for (double x : tensor) {
      out += ' ';
      out += format_double(x);
    }
    out += '\n';
  });
  atomic_write_file(path, out);
}

SdaeParams load_sdae(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("sdae file: missing header");
  const std::vector<std::string> h = split_ws(line);
  if (h.size() != 6 || h[0] != "sdae") throw IoError("sdae file: malformed header");
  SdaeParams params;
  const std::size_t vocab = std::stoul(h[1]);
  params.word_dim = std::stoi(h[2]);
  params.hidden_dim = std::stoi(h[3]);
  params.bos_id = std::stoi(h[4]);
  params.eos_id = std::stoi(h[5]);
  for (std::size_t i = 0; i < vocab; ++i) {
    if (!std::getline(in, line)) throw IoError("sdae file: truncated vocabulary");
    params.index[line] = static_cast<int>(params.forms.size());
    params.forms.push_back(line);
  }
  std::map<std::string, std::vector<double>> tensors;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_ws(line);
    if (f.size() < 2) throw IoError("sdae file: bad tensor line");
    const std::size_t n = std::stoul(f[1]);
    if (f.size() != n + 2) throw IoError("sdae file: tensor size mismatch for " + f[0]);
    std::vector<double> values;
    values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) values.push_back(std::stod(f[i + 2]));
    tensors[f[0]] = std::move(values);
  }
  params.for_each_tensor([&](const std::string& name, std::vector<double>& tensor) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw IoError("sdae file: missing tensor " + name);
    tensor = std::move(it->second);
  });
  return params;
}

}  // namespace sentprobe
