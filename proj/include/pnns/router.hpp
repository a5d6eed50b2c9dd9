#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pnns/adam.hpp"
#include "pnns/common.hpp"
#include "pnns/serial.hpp"

// Cluster prediction model: embedding -> two ReLU hidden layers of width H ->
// softmax over r clusters. Supplies the probe list for partitioned search and
// assigns new documents to clusters.

namespace pnns {

template <typename S = float>
class RouterModel {
 public:
  RouterModel() = default;
  RouterModel(std::uint32_t input_dim, std::uint32_t hidden, std::uint32_t classes)
      : in_(input_dim), h_(hidden), r_(classes) {
    if (in_ == 0 || h_ == 0 || r_ == 0) throw DataError("RouterModel: zero dimension");
    params_.assign(param_count(), S(0));
  }

  std::uint32_t input_dim() const { return in_; }
  std::uint32_t hidden() const { return h_; }
  std::uint32_t num_clusters() const { return r_; }

  std::size_t param_count() const {
    return std::size_t(h_) * in_ + h_ + std::size_t(h_) * h_ + h_ + std::size_t(r_) * h_ + r_;
  }
  std::vector<S>& params() { return params_; }
  const std::vector<S>& params() const { return params_; }

  void init_xavier(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto fill = [&](S* w, std::size_t count, std::uint32_t fan_in, std::uint32_t fan_out) {
      const double limit = std::sqrt(6.0 / (double(fan_in) + double(fan_out)));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (std::size_t i = 0; i < count; ++i) w[i] = S(u(rng));
    };
    fill(w1(), std::size_t(h_) * in_, in_, h_);
    fill(w2(), std::size_t(h_) * h_, h_, h_);
    fill(w3(), std::size_t(r_) * h_, h_, r_);
    // biases stay zero
  }

  /// Softmax distribution over clusters; entries >= 0 and sum to 1.
  std::vector<S> predict(std::span<const S> q) const {
    if (q.size() != in_) throw DataError("predict: input dim mismatch");
    std::vector<S> z1(h_), z2(h_), z3(r_);
    forward(q, z1, z2, z3);
    softmax_in_place(z3);
    return z3;
  }

  /// Argmax cluster; ties resolve to the lowest cluster id.
  std::uint32_t assign(std::span<const S> embedding) const {
    auto p = predict(embedding);
    std::uint32_t best = 0;
    for (std::uint32_t c = 1; c < r_; ++c)
      if (p[c] > p[best]) best = c;
    return best;
  }

  // Layer views over the flat parameter block, ordered W1 b1 W2 b2 W3 b3.
  S* w1() { return params_.data(); }
  S* b1() { return params_.data() + std::size_t(h_) * in_; }
  S* w2() { return b1() + h_; }
  S* b2() { return w2() + std::size_t(h_) * h_; }
  S* w3() { return b2() + h_; }
  S* b3() { return w3() + std::size_t(r_) * h_; }
  const S* w1() const { return params_.data(); }
  const S* b1() const { return params_.data() + std::size_t(h_) * in_; }
  const S* w2() const { return b1() + h_; }
  const S* b2() const { return w2() + std::size_t(h_) * h_; }
  const S* w3() const { return b2() + h_; }
  const S* b3() const { return w3() + std::size_t(r_) * h_; }

  void forward(std::span<const S> q, std::span<S> z1, std::span<S> z2, std::span<S> z3) const {
    matvec(w1(), q.data(), b1(), z1.data(), h_, in_);
    for (std::uint32_t i = 0; i < h_; ++i) z1[i] = std::max(S(0), z1[i]);
    matvec(w2(), z1.data(), b2(), z2.data(), h_, h_);
    for (std::uint32_t i = 0; i < h_; ++i) z2[i] = std::max(S(0), z2[i]);
    matvec(w3(), z2.data(), b3(), z3.data(), r_, h_);
  }

  static void softmax_in_place(std::span<S> z) {
    S mx = z[0];
    for (S v : z) mx = std::max(mx, v);
    S sum = S(0);
    for (S& v : z) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (S& v : z) v /= sum;
  }

 private:
  static void matvec(const S* w, const S* x, const S* b, S* out, std::uint32_t rows, std::uint32_t cols) {
    for (std::uint32_t i = 0; i < rows; ++i) {
      S acc = b[i];
      const S* row = w + std::size_t(i) * cols;
      for (std::uint32_t j = 0; j < cols; ++j) acc += row[j] * x[j];
      out[i] = acc;
    }
  }

  std::uint32_t in_ = 0, h_ = 0, r_ = 0;
  std::vector<S> params_;
};

/// Probe list: clusters in descending probability order, truncated at the
/// first prefix whose mass reaches t and capped at d entries (always >= 1).
/// A cutoff t >= 1 never truncates by mass, so all d probes are kept.
template <typename S>
inline std::vector<std::uint32_t> top_clusters(std::span<const S> probs, std::uint32_t d, double t) {
  if (d < 1) throw DataError("top_clusters: d must be >= 1");
  if (!(t > 0.0 && t <= 1.0)) throw DataError("top_clusters: need 0 < t <= 1");
  std::vector<std::uint32_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;
  });
  std::vector<std::uint32_t> out;
  double mass = 0.0;
  for (std::uint32_t c : order) {
    out.push_back(c);
    mass += double(probs[c]);
    if (out.size() >= d) break;
    if (t < 1.0 && mass >= t) break;
  }
  return out;
}

struct RouterTrainConfig {
  std::uint32_t hidden = 64;
  std::uint32_t epochs = 30;
  std::uint32_t batch_size = 128;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

namespace detail {

// Cross-entropy loss and gradient for one minibatch; grads accumulate into
// the flat gradient block. Returns summed loss.
template <typename S>
inline S router_batch_backward(const RouterModel<S>& m, std::span<const S> inputs,
                               std::span<const std::uint32_t> labels, std::size_t batch,
                               std::vector<S>& grad) {
  const std::uint32_t in = m.input_dim(), h = m.hidden(), r = m.num_clusters();
  std::vector<S> z1(h), z2(h), z3(r), dz1(h), dz2(h), dz3(r);
  // Gradient views mirroring the parameter layout.
  S* gw1 = grad.data();
  S* gb1 = gw1 + std::size_t(h) * in;
  S* gw2 = gb1 + h;
  S* gb2 = gw2 + std::size_t(h) * h;
  S* gw3 = gb2 + h;
  S* gb3 = gw3 + std::size_t(r) * h;
  const S inv_b = S(1) / S(batch);
  S total = S(0);

  for (std::size_t e = 0; e < batch; ++e) {
    std::span<const S> x = inputs.subspan(e * in, in);
    m.forward(x, z1, z2, z3);
    // log-sum-exp for a stable cross entropy
    S mx = z3[0];
    for (S v : z3) mx = std::max(mx, v);
    S sum = S(0);
    for (std::uint32_t c = 0; c < r; ++c) sum += std::exp(z3[c] - mx);
    const std::uint32_t label = labels[e];
    total += std::log(sum) + mx - z3[label];

    for (std::uint32_t c = 0; c < r; ++c) dz3[c] = std::exp(z3[c] - mx) / sum * inv_b;
    dz3[label] -= inv_b;

    for (std::uint32_t i = 0; i < r; ++i) {
      gb3[i] += dz3[i];
      S* row = gw3 + std::size_t(i) * h;
      for (std::uint32_t j = 0; j < h; ++j) row[j] += dz3[i] * z2[j];
    }
    for (std::uint32_t j = 0; j < h; ++j) {
      S acc = S(0);
      for (std::uint32_t i = 0; i < r; ++i) acc += m.w3()[std::size_t(i) * h + j] * dz3[i];
      dz2[j] = z2[j] > S(0) ? acc : S(0);
    }
    for (std::uint32_t i = 0; i < h; ++i) {
      gb2[i] += dz2[i];
      S* row = gw2 + std::size_t(i) * h;
      for (std::uint32_t j = 0; j < h; ++j) row[j] += dz2[i] * z1[j];
    }
    for (std::uint32_t j = 0; j < h; ++j) {
      S acc = S(0);
      for (std::uint32_t i = 0; i < h; ++i) acc += m.w2()[std::size_t(i) * h + j] * dz2[i];
      dz1[j] = z1[j] > S(0) ? acc : S(0);
    }
    for (std::uint32_t i = 0; i < h; ++i) {
      gb1[i] += dz1[i];
      S* row = gw1 + std::size_t(i) * in;
      for (std::uint32_t j = 0; j < in; ++j) row[j] += dz1[i] * x[j];
    }
  }
  return total * inv_b;
}

}  // namespace detail

struct RouterTrainResult {
  double final_accuracy = 0.0;
  std::vector<double> epoch_loss;
};

/// Trains the cluster-prediction model by cross entropy with Adam.
/// `embeddings` is row-major (count x dim); labels lie in [0, r).
template <typename S = float>
inline RouterModel<S> train_router(std::span<const S> embeddings, std::span<const std::uint32_t> labels,
                                   std::uint32_t dim, std::uint32_t r, const RouterTrainConfig& cfg,
                                   RouterTrainResult* result = nullptr) {
  const std::size_t n = labels.size();
  if (n == 0) throw DataError("train_router: no examples");
  if (embeddings.size() != n * dim) throw DataError("train_router: embeddings/labels size mismatch");
  for (std::uint32_t label : labels)
    if (label >= r) throw DataError("train_router: label out of range");

  RouterModel<S> m(dim, cfg.hidden, r);
  m.init_xavier(cfg.seed);
  Adam<S> opt(m.param_count(), cfg.adam);
  std::vector<S> grad(m.param_count(), S(0));
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<S> batch_in(std::size_t(cfg.batch_size) * dim);
  std::vector<std::uint32_t> batch_labels(cfg.batch_size);

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(cfg.seed * 2654435761ull + epoch + 1);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t batch = std::min<std::size_t>(cfg.batch_size, n - start);
      for (std::size_t i = 0; i < batch; ++i) {
        std::uint32_t src = order[start + i];
        std::copy_n(embeddings.data() + std::size_t(src) * dim, dim, batch_in.data() + i * dim);
        batch_labels[i] = labels[src];
      }
      std::fill(grad.begin(), grad.end(), S(0));
      S loss = detail::router_batch_backward(m, std::span<const S>(batch_in.data(), batch * dim),
                                             std::span<const std::uint32_t>(batch_labels.data(), batch),
                                             batch, grad);
      if (!std::isfinite(double(loss)))
        throw DataError("train_router: loss diverged at epoch " + std::to_string(epoch));
      opt.step(m.params(), grad);
      epoch_loss += double(loss);
      ++batches;
    }
    if (result) result->epoch_loss.push_back(batches ? epoch_loss / double(batches) : 0.0);
  }
  if (result) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (m.assign(embeddings.subspan(i * dim, dim)) == labels[i]) ++correct;
    result->final_accuracy = double(correct) / double(n);
  }
  return m;
}

/// Checkpoint: magic `RTR1`, u32 input dim, u32 H, u32 r, then W1 b1 W2 b2
/// W3 b3 row-major f32 LE.
template <typename S>
inline void save_router(const RouterModel<S>& m, const std::string& path) {
  auto os = detail::open_binary_out(path);
  detail::write_magic(os, "RTR1");
  detail::write_u32(os, m.input_dim());
  detail::write_u32(os, m.hidden());
  detail::write_u32(os, m.num_clusters());
  for (S v : m.params()) detail::write_f32(os, float(v));
  if (!os) throw DataError("write failed: " + path);
}

template <typename S = float>
inline RouterModel<S> load_router(const std::string& path) {
  auto is = detail::open_binary_in(path);
  detail::expect_magic(is, "RTR1", path);
  std::uint32_t in = detail::read_u32(is);
  std::uint32_t h = detail::read_u32(is);
  std::uint32_t r = detail::read_u32(is);
  RouterModel<S> m(in, h, r);
  for (auto& v : m.params()) v = S(detail::read_f32(is));
  return m;
}

}  // namespace pnns
