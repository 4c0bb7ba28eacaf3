#pragma once

// LSTM encoder with structured self-attention pooling and a linear output
// layer. Trained on per-label sigmoid binary cross-entropy with Adam;
// prediction applies a threshold to the softmax of the logits.
//
// Shapes (h = hidden size, T = sequence length):
//   x_t  = E[id_t]                               (d_emb)
//   z_t  = Wx x_t + Wh h_{t-1} + b                (4h; gate order i, f, o, g)
//   c_t  = f * c_{t-1} + i * g,  h_t = o * tanh(c_t)
//   A    = row_softmax(Ws2 tanh(Ws1 H))           (r x T), H = [h_1 .. h_T]
//   M    = A H^T flattened row-major               (r*h)
//   y    = Wo M + bo                               (n_labels)
// Each sequence runs at its own length, which is what masking padded steps
// in a padded batch computes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "emomine/corpus.hpp"
#include "emomine/error.hpp"
#include "emomine/features.hpp"
#include "emomine/metrics.hpp"
#include "emomine/rng.hpp"

namespace emomine {

struct LstmHyperParams {
  std::size_t d_emb = 64;
  std::size_t d_h = 64;
  std::size_t d_a = 64;
  std::size_t r = 4;
  std::size_t batch_size = 32;
  int epochs = 30;
  std::size_t max_length = 50;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double threshold = 0.3;
  double init_scale = 0.1;
  bool freeze_embeddings = false;
  std::uint64_t seed = 0;
};

/// Every trainable tensor. Also used as the gradient container.
struct LstmParams {
  Eigen::MatrixXd E;    // vocab x d_emb
  Eigen::MatrixXd Wx;   // 4h x d_emb
  Eigen::MatrixXd Wh;   // 4h x h
  Eigen::VectorXd b;    // 4h
  Eigen::MatrixXd Ws1;  // d_a x h
  Eigen::MatrixXd Ws2;  // r x d_a
  Eigen::MatrixXd Wo;   // n_labels x r*h
  Eigen::VectorXd bo;   // n_labels

  /// (name, contiguous storage) for every tensor, in a fixed order.
  std::vector<std::pair<std::string, std::span<double>>> tensors() {
    return {{"E", span(E)},     {"Wx", span(Wx)},   {"Wh", span(Wh)}, {"b", span(b)},
            {"Ws1", span(Ws1)}, {"Ws2", span(Ws2)}, {"Wo", span(Wo)}, {"bo", span(bo)}};
  }

  LstmParams zeros_like() const {
    LstmParams z;
    z.E = Eigen::MatrixXd::Zero(E.rows(), E.cols());
    z.Wx = Eigen::MatrixXd::Zero(Wx.rows(), Wx.cols());
    z.Wh = Eigen::MatrixXd::Zero(Wh.rows(), Wh.cols());
    z.b = Eigen::VectorXd::Zero(b.size());
    z.Ws1 = Eigen::MatrixXd::Zero(Ws1.rows(), Ws1.cols());
    z.Ws2 = Eigen::MatrixXd::Zero(Ws2.rows(), Ws2.cols());
    z.Wo = Eigen::MatrixXd::Zero(Wo.rows(), Wo.cols());
    z.bo = Eigen::VectorXd::Zero(bo.size());
    return z;
  }

  void set_zero() {
    for (auto& [_, t] : tensors()) std::fill(t.begin(), t.end(), 0.0);
  }

 private:
  template <typename M>
  static std::span<double> span(M& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
  }
};

struct LSTMAttModel {
  LstmHyperParams hyper;
  std::size_t vocab_size = 0;
  std::size_t n_labels = 0;
  LstmParams params;
  double threshold = 0.3;
};

struct SequenceExample {
  std::vector<int> ids;
  LabelSet labels;
};

struct TrainingCurve {
  std::vector<double> train_loss;
  std::vector<double> validation_micro_fm;
  int chosen_epoch = -1;
  bool operator==(const TrainingCurve&) const = default;
};

/// Token ids against a vocabulary: 0 is the out-of-vocabulary id, term i
/// maps to i + 1. Sequences are cut to `max_length`.
inline std::vector<int> token_ids(const Document& doc, const Vocabulary& vocab,
                                  std::size_t max_length) {
  std::vector<int> ids;
  for (const auto& t : doc.tokens) {
    if (ids.size() == max_length) break;
    auto i = vocab.find(t);
    ids.push_back(i ? static_cast<int>(*i) + 1 : 0);
  }
  return ids;
}

inline LSTMAttModel init_lstm(const LstmHyperParams& hp, std::size_t vocab_size,
                              std::size_t n_labels) {
  if (vocab_size == 0 || n_labels == 0) throw Error("LSTM: empty vocabulary or label set");
  LSTMAttModel m;
  m.hyper = hp;
  m.vocab_size = vocab_size;
  m.n_labels = n_labels;
  m.threshold = hp.threshold;
  const auto h = static_cast<Eigen::Index>(hp.d_h);
  const auto de = static_cast<Eigen::Index>(hp.d_emb);
  const auto da = static_cast<Eigen::Index>(hp.d_a);
  const auto r = static_cast<Eigen::Index>(hp.r);
  const auto nl = static_cast<Eigen::Index>(n_labels);
  auto& p = m.params;
  p.E.resize(static_cast<Eigen::Index>(vocab_size), de);
  p.Wx.resize(4 * h, de);
  p.Wh.resize(4 * h, h);
  p.b = Eigen::VectorXd::Zero(4 * h);
  p.b.segment(h, h).setOnes();  // forget gate starts open
  p.Ws1.resize(da, h);
  p.Ws2.resize(r, da);
  p.Wo.resize(nl, r * h);
  p.bo = Eigen::VectorXd::Zero(nl);
  Rng rng(hp.seed);
  const auto fill = [&](Eigen::MatrixXd& w, double scale) {
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-scale, scale);
  };
  fill(p.E, hp.init_scale);
  fill(p.Wx, 1.0 / std::sqrt(static_cast<double>(hp.d_emb)));
  fill(p.Wh, 1.0 / std::sqrt(static_cast<double>(hp.d_h)));
  fill(p.Ws1, 1.0 / std::sqrt(static_cast<double>(hp.d_h)));
  fill(p.Ws2, 1.0 / std::sqrt(static_cast<double>(hp.d_a)));
  fill(p.Wo, 1.0 / std::sqrt(static_cast<double>(hp.r * hp.d_h)));
  return m;
}

/// Pre-trained rows for vocabulary terms; the OOV row and terms missing from
/// the table stay zero. Embeddings are frozen in this mode.
inline void load_pretrained(LSTMAttModel& m, const Vocabulary& vocab, const EmbeddingTable& table) {
  if (table.dim != m.hyper.d_emb) throw Error("LSTM: embedding width differs from d_emb");
  if (vocab.size() + 1 != m.vocab_size) throw Error("LSTM: vocabulary size mismatch");
  m.params.E.setZero();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (const auto* v = table.find(vocab.terms[i])) {
      for (std::size_t c = 0; c < table.dim; ++c)
        m.params.E(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(c)) = (*v)[c];
    }
  }
  m.hyper.freeze_embeddings = true;
}

namespace detail {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

struct ForwardCache {
  std::vector<int> ids;
  Eigen::MatrixXd X;      // d_emb x T
  Eigen::MatrixXd gates;  // 4h x T, activated
  Eigen::MatrixXd C;      // h x T
  Eigen::MatrixXd H;      // h x T
  Eigen::MatrixXd U;      // d_a x T
  Eigen::MatrixXd A;      // r x T
  Eigen::VectorXd m;      // r*h
  Eigen::VectorXd logits;
};

inline void forward_cached(const LSTMAttModel& model, std::span<const int> ids,
                           ForwardCache& fc) {
  if (ids.empty()) throw Error("LSTM: empty token sequence");
  const auto& p = model.params;
  const auto h = static_cast<Eigen::Index>(model.hyper.d_h);
  const auto T = static_cast<Eigen::Index>(ids.size());
  fc.ids.assign(ids.begin(), ids.end());
  fc.X.resize(p.E.cols(), T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const int id = ids[static_cast<std::size_t>(t)];
    if (id < 0 || static_cast<std::size_t>(id) >= model.vocab_size) {
      throw Error("LSTM: token id " + std::to_string(id) + " out of range");
    }
    fc.X.col(t) = p.E.row(id).transpose();
  }
  Eigen::MatrixXd pre = p.Wx * fc.X;
  pre.colwise() += p.b;
  fc.gates.resize(4 * h, T);
  fc.C.resize(h, T);
  fc.H.resize(h, T);
  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::VectorXd z = pre.col(t) + p.Wh * h_prev;
    for (Eigen::Index k = 0; k < 3 * h; ++k) z(k) = sigmoid(z(k));
    z.segment(3 * h, h) = z.segment(3 * h, h).array().tanh();
    fc.gates.col(t) = z;
    const auto i = z.segment(0, h).array();
    const auto f = z.segment(h, h).array();
    const auto o = z.segment(2 * h, h).array();
    const auto g = z.segment(3 * h, h).array();
    fc.C.col(t) = (f * c_prev.array() + i * g).matrix();
    fc.H.col(t) = (o * fc.C.col(t).array().tanh()).matrix();
    h_prev = fc.H.col(t);
    c_prev = fc.C.col(t);
  }
  fc.U = (p.Ws1 * fc.H).array().tanh().matrix();
  Eigen::MatrixXd S = p.Ws2 * fc.U;
  fc.A.resize(S.rows(), T);
  for (Eigen::Index j = 0; j < S.rows(); ++j) {
    const double mx = S.row(j).maxCoeff();
    Eigen::RowVectorXd e = (S.row(j).array() - mx).exp().matrix();
    fc.A.row(j) = e / e.sum();
  }
  const Eigen::MatrixXd M = fc.A * fc.H.transpose();  // r x h
  fc.m.resize(M.size());
  for (Eigen::Index j = 0; j < M.rows(); ++j) fc.m.segment(j * h, h) = M.row(j).transpose();
  fc.logits = p.Wo * fc.m + p.bo;
}

/// Accumulates d(loss)/d(params) into `g` given d(loss)/d(logits).
inline void backward(const LSTMAttModel& model, const ForwardCache& fc,
                     const Eigen::VectorXd& dlogits, LstmParams& g) {
  const auto& p = model.params;
  const auto h = static_cast<Eigen::Index>(model.hyper.d_h);
  const auto r = static_cast<Eigen::Index>(model.hyper.r);
  const Eigen::Index T = fc.H.cols();

  g.Wo.noalias() += dlogits * fc.m.transpose();
  g.bo += dlogits;
  const Eigen::VectorXd dm = p.Wo.transpose() * dlogits;
  Eigen::MatrixXd dM(r, h);
  for (Eigen::Index j = 0; j < r; ++j) dM.row(j) = dm.segment(j * h, h).transpose();

  const Eigen::MatrixXd dA = dM * fc.H;         // r x T
  Eigen::MatrixXd dH = dM.transpose() * fc.A;   // h x T
  Eigen::MatrixXd dS(r, T);
  for (Eigen::Index j = 0; j < r; ++j) {
    const double dot = (dA.row(j).array() * fc.A.row(j).array()).sum();
    dS.row(j) = (fc.A.row(j).array() * (dA.row(j).array() - dot)).matrix();
  }
  g.Ws2.noalias() += dS * fc.U.transpose();
  const Eigen::MatrixXd dZa =
      ((p.Ws2.transpose() * dS).array() * (1.0 - fc.U.array().square())).matrix();
  g.Ws1.noalias() += dZa * fc.H.transpose();
  dH.noalias() += p.Ws1.transpose() * dZa;

  Eigen::MatrixXd dZ(4 * h, T);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto z = fc.gates.col(t);
    const Eigen::ArrayXd i = z.segment(0, h).array();
    const Eigen::ArrayXd f = z.segment(h, h).array();
    const Eigen::ArrayXd o = z.segment(2 * h, h).array();
    const Eigen::ArrayXd gg = z.segment(3 * h, h).array();
    const Eigen::ArrayXd c = fc.C.col(t).array();
    const Eigen::ArrayXd c_prev =
        t > 0 ? Eigen::ArrayXd(fc.C.col(t - 1).array()) : Eigen::ArrayXd::Zero(h);
    const Eigen::ArrayXd tc = c.tanh();
    const Eigen::ArrayXd dh = dH.col(t).array() + dh_next.array();
    const Eigen::ArrayXd dc = dh * o * (1.0 - tc.square()) + dc_next.array();
    dZ.col(t).segment(0, h) = (dc * gg * i * (1.0 - i)).matrix();
    dZ.col(t).segment(h, h) = (dc * c_prev * f * (1.0 - f)).matrix();
    dZ.col(t).segment(2 * h, h) = (dh * tc * o * (1.0 - o)).matrix();
    dZ.col(t).segment(3 * h, h) = (dc * i * (1.0 - gg.square())).matrix();
    dc_next = (dc * f).matrix();
    dh_next.noalias() = p.Wh.transpose() * dZ.col(t);
  }
  g.Wx.noalias() += dZ * fc.X.transpose();
  if (T > 1) g.Wh.noalias() += dZ.rightCols(T - 1) * fc.H.leftCols(T - 1).transpose();
  g.b += dZ.rowwise().sum();
  if (!model.hyper.freeze_embeddings) {
    const Eigen::MatrixXd dX = p.Wx.transpose() * dZ;  // d_emb x T
    for (Eigen::Index t = 0; t < T; ++t) g.E.row(fc.ids[static_cast<std::size_t>(t)]) += dX.col(t).transpose();
  }
}

}  // namespace detail

struct ForwardResult {
  Eigen::VectorXd logits;
  Eigen::MatrixXd attention;  // r x T, rows sum to 1
};

inline ForwardResult forward(const LSTMAttModel& model, std::span<const int> ids) {
  detail::ForwardCache fc;
  detail::forward_cached(model, ids, fc);
  return {std::move(fc.logits), std::move(fc.A)};
}

/// Mean over samples of the per-sample sum over labels of sigmoid binary
/// cross-entropy, computed as softplus(y_hat) - y * y_hat. Returns a
/// non-negative value to minimize.
inline double bce_loss(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw Error("BCE: logits and targets differ in shape");
  }
  if (logits.rows() == 0) throw Error("BCE: empty batch");
  double s = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    for (Eigen::Index l = 0; l < logits.cols(); ++l) {
      const double y = targets(i, l);
      if (y != 0.0 && y != 1.0) throw Error("BCE: targets must be 0 or 1");
      s += detail::softplus(logits(i, l)) - y * logits(i, l);
    }
  return s / static_cast<double>(logits.rows());
}

inline Eigen::VectorXd target_vector(const LabelSet& labels, std::size_t n_labels) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_labels));
  for (LabelId l : labels) y(l) = 1.0;
  return y;
}

/// Batch loss and its exact gradient with respect to every parameter.
inline double lstm_loss_and_gradient(const LSTMAttModel& model,
                                     std::span<const SequenceExample> batch, LstmParams& grad) {
  if (batch.empty()) throw Error("LSTM: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  detail::ForwardCache fc;
  for (const auto& ex : batch) {
    detail::forward_cached(model, ex.ids, fc);
    const Eigen::VectorXd y = target_vector(ex.labels, model.n_labels);
    Eigen::VectorXd dl(fc.logits.size());
    for (Eigen::Index l = 0; l < fc.logits.size(); ++l) {
      loss += detail::softplus(fc.logits(l)) - y(l) * fc.logits(l);
      dl(l) = (detail::sigmoid(fc.logits(l)) - y(l)) * inv_n;
    }
    detail::backward(model, fc, dl, grad);
  }
  return loss * inv_n;
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double mx = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - mx).exp().matrix();
  return e / e.sum();
}

/// Labels whose softmax probability exceeds t; the argmax label (lowest
/// index on ties) when none does.
inline LabelSet threshold_softmax(const Eigen::VectorXd& probs, double t) {
  if (!(t > 0.0 && t < 1.0)) throw Error("threshold must lie in (0, 1)");
  LabelSet out;
  for (Eigen::Index l = 0; l < probs.size(); ++l)
    if (probs(l) > t) out.push_back(static_cast<LabelId>(l));
  if (out.empty()) {
    Eigen::Index best = 0;
    for (Eigen::Index l = 1; l < probs.size(); ++l)
      if (probs(l) > probs(best)) best = l;
    out.push_back(static_cast<LabelId>(best));
  }
  return out;
}

inline LabelSet predict_multilabel(const LSTMAttModel& model, std::span<const int> ids, double t) {
  if (!(t > 0.0 && t < 1.0)) throw Error("threshold must lie in (0, 1)");
  return threshold_softmax(softmax(forward(model, ids).logits), t);
}

inline LabelSet predict_multilabel(const LSTMAttModel& model, std::span<const int> ids) {
  return predict_multilabel(model, ids, model.threshold);
}

inline std::vector<double> default_threshold_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 10; ++i) g.push_back(0.05 * i);
  return g;
}

/// Threshold maximizing validation Micro-FM over `grid` (ties: smaller t).
inline double tune_threshold(const LSTMAttModel& model, std::span<const SequenceExample> val,
                             std::vector<double> grid = default_threshold_grid()) {
  if (val.empty()) throw Error("tune_threshold: empty validation set");
  if (grid.empty()) throw Error("tune_threshold: empty grid");
  std::sort(grid.begin(), grid.end());
  std::vector<Eigen::VectorXd> probs;
  std::vector<LabelSet> truth;
  for (const auto& ex : val) {
    probs.push_back(softmax(forward(model, ex.ids).logits));
    truth.push_back(ex.labels);
  }
  double best_t = grid.front();
  double best = -1.0;
  for (double t : grid) {
    std::vector<LabelSet> pred;
    for (const auto& p : probs) pred.push_back(threshold_softmax(p, t));
    const double f = micro_fm(truth, pred, model.n_labels);
    if (f > best) {
      best = f;
      best_t = t;
    }
  }
  return best_t;
}

struct AdamState {
  LstmParams m;
  LstmParams v;
  std::uint64_t step = 0;
};

inline void adam_update(LSTMAttModel& model, LstmParams& grad, AdamState& st) {
  const auto& hp = model.hyper;
  ++st.step;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(st.step));
  auto params = model.params.tensors();
  auto grads = grad.tensors();
  auto ms = st.m.tensors();
  auto vs = st.v.tensors();
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (k == 0 && hp.freeze_embeddings) continue;
    auto w = params[k].second;
    auto g = grads[k].second;
    auto m = ms[k].second;
    auto v = vs[k].second;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
      w[i] -= hp.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + hp.epsilon);
    }
  }
}

/// Mini-batch Adam with seeded shuffling. After every epoch the model is
/// scored on `val` (Micro-FM at the configured threshold); the parameters of
/// the best epoch (earliest on ties) are returned.
inline std::pair<LSTMAttModel, TrainingCurve> train_lstm(LSTMAttModel model,
                                                         std::span<const SequenceExample> train,
                                                         std::span<const SequenceExample> val) {
  if (train.empty() || val.empty()) throw Error("LSTM: empty training or validation set");
  const auto& hp = model.hyper;
  if (hp.epochs <= 0 || hp.batch_size == 0) throw Error("LSTM: epochs and batch size must be positive");
  constexpr std::uint64_t kShuffleStream = 1;
  TrainingCurve curve;
  AdamState adam{model.params.zeros_like(), model.params.zeros_like(), 0};
  LstmParams grad = model.params.zeros_like();
  LstmParams best = model.params;
  double best_fm = -1.0;
  Rng rng(mix_seed(hp.seed, kShuffleStream));
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<SequenceExample> batch;
  std::vector<LabelSet> truth;
  for (const auto& ex : val) truth.push_back(ex.labels);

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(train[order[k]]);
      grad.set_zero();
      const double loss = lstm_loss_and_gradient(model, batch, grad);
      epoch_loss += loss * static_cast<double>(batch.size());
      adam_update(model, grad, adam);
    }
    curve.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));
    std::vector<LabelSet> pred;
    for (const auto& ex : val) pred.push_back(predict_multilabel(model, ex.ids));
    const double fm = micro_fm(truth, pred, model.n_labels);
    curve.validation_micro_fm.push_back(fm);
    if (fm > best_fm) {
      best_fm = fm;
      best = model.params;
      curve.chosen_epoch = epoch;
    }
  }
  model.params = std::move(best);
  return {std::move(model), std::move(curve)};
}

// ---------------------------------------------------------------------------

inline constexpr int kLstmFormatVersion = 1;

inline nlohmann::ordered_json to_json(const LSTMAttModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "emomine-lstm-att";
  j["version"] = kLstmFormatVersion;
  const auto& hp = m.hyper;
  j["hyper"] = {{"d_emb", hp.d_emb},         {"d_h", hp.d_h},
                {"d_a", hp.d_a},             {"r", hp.r},
                {"batch_size", hp.batch_size}, {"epochs", hp.epochs},
                {"max_length", hp.max_length}, {"learning_rate", hp.learning_rate},
                {"beta1", hp.beta1},         {"beta2", hp.beta2},
                {"epsilon", hp.epsilon},     {"init_scale", hp.init_scale},
                {"freeze_embeddings", hp.freeze_embeddings}, {"seed", hp.seed}};
  j["threshold"] = m.threshold;
  j["vocab_size"] = m.vocab_size;
  j["n_labels"] = m.n_labels;
  auto& ts = j["tensors"] = nlohmann::ordered_json::object();
  auto params = m.params;
  for (auto& [name, data] : params.tensors()) {
    ts[name] = std::vector<double>(data.begin(), data.end());
  }
  return j;
}

inline LSTMAttModel lstm_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "emomine-lstm-att" || j.value("version", 0) != kLstmFormatVersion) {
    throw Error("not a version-1 LSTM-Att checkpoint");
  }
  LstmHyperParams hp;
  const auto& h = j.at("hyper");
  hp.d_emb = h.at("d_emb");
  hp.d_h = h.at("d_h");
  hp.d_a = h.at("d_a");
  hp.r = h.at("r");
  hp.batch_size = h.at("batch_size");
  hp.epochs = h.at("epochs");
  hp.max_length = h.at("max_length");
  hp.learning_rate = h.at("learning_rate");
  hp.beta1 = h.at("beta1");
  hp.beta2 = h.at("beta2");
  hp.epsilon = h.at("epsilon");
  hp.init_scale = h.at("init_scale");
  hp.freeze_embeddings = h.at("freeze_embeddings");
  hp.seed = h.at("seed");
  hp.threshold = j.at("threshold");
  LSTMAttModel m = init_lstm(hp, j.at("vocab_size"), j.at("n_labels"));
  m.hyper.freeze_embeddings = hp.freeze_embeddings;
  for (auto& [name, data] : m.params.tensors()) {
    const auto values = j.at("tensors").at(name).get<std::vector<double>>();
    if (values.size() != data.size()) throw Error("LSTM checkpoint: tensor '" + name + "' has wrong size");
    std::copy(values.begin(), values.end(), data.begin());
  }
  return m;
}

}  // namespace emomine
