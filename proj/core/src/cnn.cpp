#include "mshedge/cnn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "mshedge/errors.hpp"
#include "mshedge/parallel.hpp"
#include "mshedge/random.hpp"

namespace mshedge {

namespace {

constexpr std::size_t kIn = FeatureTensor::kChannels;
constexpr std::size_t kLen = FeatureTensor::kDays;
constexpr std::size_t kC1 = 4, kK1 = 5;
constexpr std::size_t kC2 = 8, kK2 = 5;
constexpr std::size_t kC3 = 8, kK3 = 3;
constexpr std::size_t kL1 = kLen, kP1 = kL1 / 2;
constexpr std::size_t kL2 = kP1, kP2 = kL2 / 2;
constexpr std::size_t kL3 = kP2;
constexpr std::size_t kFlat = kC3 * kL3;
constexpr std::size_t kH1 = 24, kH2 = 16, kOut = PeriodGrid::kSize;

CnnLayout make_layout() {
  CnnLayout l{};
  std::size_t off = 0;
  auto conv = [&](std::size_t in, std::size_t out, std::size_t k, std::size_t len) {
    CnnLayout::Conv c{in, out, k, len, off, off + out * in * k};
    off += out * in * k + out;
    return c;
  };
  auto dense = [&](std::size_t in, std::size_t out) {
    CnnLayout::Dense d{in, out, off, off + out * in};
    off += out * in + out;
    return d;
  };
  l.conv[0] = conv(kIn, kC1, kK1, kL1);
  l.conv[1] = conv(kC1, kC2, kK2, kL2);
  l.conv[2] = conv(kC2, kC3, kK3, kL3);
  l.dense[0] = dense(kFlat, kH1);
  l.dense[1] = dense(kH1, kH2);
  l.dense[2] = dense(kH2, kOut);
  l.param_count = off;
  return l;
}

// y[o][t] = b[o] + sum_i sum_j w[o][i][j] x[i][t + j - pad], zero padded.
void conv_forward(const CnnLayout::Conv& c, const double* p, const double* x, double* y) {
  const auto pad = static_cast<std::ptrdiff_t>(c.kernel / 2);
  const auto len = static_cast<std::ptrdiff_t>(c.length);
  for (std::size_t o = 0; o < c.out_ch; ++o) {
    const double bias = p[c.bias_offset + o];
    for (std::ptrdiff_t t = 0; t < len; ++t) {
      double acc = bias;
      for (std::size_t i = 0; i < c.in_ch; ++i) {
        const double* w = p + c.weight_offset + (o * c.in_ch + i) * c.kernel;
        const double* xi = x + i * c.length;
        for (std::size_t j = 0; j < c.kernel; ++j) {
          const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(j) - pad;
          if (src >= 0 && src < len) acc += w[j] * xi[src];
        }
      }
      y[o * c.length + static_cast<std::size_t>(t)] = acc;
    }
  }
}

void conv_backward(const CnnLayout::Conv& c, const double* p, const double* x, const double* dy, double* g,
                   double* dx) {
  const auto pad = static_cast<std::ptrdiff_t>(c.kernel / 2);
  const auto len = static_cast<std::ptrdiff_t>(c.length);
  if (dx) std::fill(dx, dx + c.in_ch * c.length, 0.0);
  for (std::size_t o = 0; o < c.out_ch; ++o) {
    for (std::ptrdiff_t t = 0; t < len; ++t) {
      const double d = dy[o * c.length + static_cast<std::size_t>(t)];
      if (d == 0.0) continue;
      g[c.bias_offset + o] += d;
      for (std::size_t i = 0; i < c.in_ch; ++i) {
        const std::size_t wbase = c.weight_offset + (o * c.in_ch + i) * c.kernel;
        for (std::size_t j = 0; j < c.kernel; ++j) {
          const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(j) - pad;
          if (src < 0 || src >= len) continue;
          const std::size_t xi = i * c.length + static_cast<std::size_t>(src);
          g[wbase + j] += d * x[xi];
          if (dx) dx[xi] += d * p[wbase + j];
        }
      }
    }
  }
}

void dense_forward(const CnnLayout::Dense& d, const double* p, const double* x, double* y) {
  for (std::size_t o = 0; o < d.out; ++o) {
    const double* w = p + d.weight_offset + o * d.in;
    double acc = p[d.bias_offset + o];
    for (std::size_t i = 0; i < d.in; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
}

void dense_backward(const CnnLayout::Dense& d, const double* p, const double* x, const double* dy, double* g,
                    double* dx) {
  std::fill(dx, dx + d.in, 0.0);
  for (std::size_t o = 0; o < d.out; ++o) {
    const double dyo = dy[o];
    g[d.bias_offset + o] += dyo;
    const std::size_t wbase = d.weight_offset + o * d.in;
    for (std::size_t i = 0; i < d.in; ++i) {
      g[wbase + i] += dyo * x[i];
      dx[i] += dyo * p[wbase + i];
    }
  }
}

// Max-pool by 2 (floor); remembers the winning index (first on ties).
void pool_forward(std::size_t channels, std::size_t len, const double* x, double* y, std::size_t* arg) {
  const std::size_t out_len = len / 2;
  for (std::size_t ch = 0; ch < channels; ++ch) {
    for (std::size_t t = 0; t < out_len; ++t) {
      const std::size_t a = ch * len + 2 * t;
      const std::size_t win = x[a + 1] > x[a] ? a + 1 : a;
      y[ch * out_len + t] = x[win];
      arg[ch * out_len + t] = win;
    }
  }
}

void relu(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::max(x[i], 0.0);
}

// Zeroes dy wherever the forward activation was clipped.
void relu_backward(const double* activated, double* dy, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (activated[i] <= 0.0) dy[i] = 0.0;
  }
}

struct Activations {
  std::array<double, kC1 * kL1> a1;
  std::array<double, kC1 * kP1> p1;
  std::array<std::size_t, kC1 * kP1> arg1;
  std::array<double, kC2 * kL2> a2;
  std::array<double, kC2 * kP2> p2;
  std::array<std::size_t, kC2 * kP2> arg2;
  std::array<double, kFlat> a3;
  std::array<double, kH1> h1;
  std::array<double, kH2> h2;
  std::array<double, kOut> probs;
};

void forward(const CnnLayout& l, const double* p, const FeatureTensor& x, Activations& act) {
  conv_forward(l.conv[0], p, x.values.data(), act.a1.data());
  relu(act.a1.data(), act.a1.size());
  pool_forward(kC1, kL1, act.a1.data(), act.p1.data(), act.arg1.data());
  conv_forward(l.conv[1], p, act.p1.data(), act.a2.data());
  relu(act.a2.data(), act.a2.size());
  pool_forward(kC2, kL2, act.a2.data(), act.p2.data(), act.arg2.data());
  conv_forward(l.conv[2], p, act.p2.data(), act.a3.data());
  relu(act.a3.data(), act.a3.size());
  dense_forward(l.dense[0], p, act.a3.data(), act.h1.data());
  relu(act.h1.data(), act.h1.size());
  dense_forward(l.dense[1], p, act.h1.data(), act.h2.data());
  relu(act.h2.data(), act.h2.size());
  std::array<double, kOut> logits;
  dense_forward(l.dense[2], p, act.h2.data(), logits.data());
  const double peak = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t k = 0; k < kOut; ++k) {
    act.probs[k] = std::exp(logits[k] - peak);
    z += act.probs[k];
  }
  for (double& q : act.probs) q /= z;
}

void check_params(const CnnModel& model) {
  if (model.params.size() != cnn_layout().param_count) {
    throw InputError("cnn: parameter vector has " + std::to_string(model.params.size()) + " entries, expected " +
                     std::to_string(cnn_layout().param_count));
  }
}

double sample_loss(const Activations& act, std::size_t label) {
  return -std::log(std::max(act.probs[label], 1e-300));
}

}  // namespace

const CnnLayout& cnn_layout() {
  static const CnnLayout layout = make_layout();
  return layout;
}

CnnModel CnnModel::zeros() {
  CnnModel m;
  m.params.assign(cnn_layout().param_count, 0.0);
  return m;
}

CnnModel CnnModel::initialized(std::uint64_t seed) {
  const auto& l = cnn_layout();
  CnnModel m = zeros();
  Rng rng(mix64(seed));
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < count; ++i) m.params[offset + i] = dist(rng);
  };
  for (const auto& c : l.conv) fill(c.weight_offset, c.out_ch * c.in_ch * c.kernel, c.in_ch * c.kernel);
  for (const auto& d : l.dense) fill(d.weight_offset, d.out * d.in, d.in);
  return m;
}

ProbVector cnn_forward(const CnnModel& model, const FeatureTensor& x) {
  check_params(model);
  Activations act;
  forward(cnn_layout(), model.params.data(), x, act);
  ProbVector out;
  std::copy(act.probs.begin(), act.probs.end(), out.begin());
  return out;
}

double cnn_loss(const CnnModel& model, std::span<const Sample> batch) {
  check_params(model);
  if (batch.empty()) throw InputError("cnn_loss: empty batch");
  Activations act;
  double loss = 0.0;
  for (const auto& s : batch) {
    forward(cnn_layout(), model.params.data(), s.features, act);
    loss += sample_loss(act, s.label_index);
  }
  return loss / static_cast<double>(batch.size());
}

double cnn_loss_and_gradient(const CnnModel& model, std::span<const Sample> batch, std::span<double> grad) {
  check_params(model);
  const auto& l = cnn_layout();
  if (grad.size() != l.param_count) throw InputError("cnn: gradient buffer has the wrong size");
  if (batch.empty()) throw InputError("cnn: empty batch");
  std::fill(grad.begin(), grad.end(), 0.0);
  const double* p = model.params.data();
  double* g = grad.data();
  const double scale = 1.0 / static_cast<double>(batch.size());

  Activations act;
  double loss = 0.0;
  for (const auto& s : batch) {
    if (s.label_index >= kOut) throw InputError("cnn: label out of range");
    forward(l, p, s.features, act);
    loss += sample_loss(act, s.label_index);

    std::array<double, kOut> d_logits;
    for (std::size_t k = 0; k < kOut; ++k) d_logits[k] = scale * (act.probs[k] - (k == s.label_index ? 1.0 : 0.0));

    std::array<double, kH2> d_h2;
    dense_backward(l.dense[2], p, act.h2.data(), d_logits.data(), g, d_h2.data());
    relu_backward(act.h2.data(), d_h2.data(), kH2);
    std::array<double, kH1> d_h1;
    dense_backward(l.dense[1], p, act.h1.data(), d_h2.data(), g, d_h1.data());
    relu_backward(act.h1.data(), d_h1.data(), kH1);
    std::array<double, kFlat> d_a3;
    dense_backward(l.dense[0], p, act.a3.data(), d_h1.data(), g, d_a3.data());
    relu_backward(act.a3.data(), d_a3.data(), kFlat);

    std::array<double, kC2 * kP2> d_p2;
    conv_backward(l.conv[2], p, act.p2.data(), d_a3.data(), g, d_p2.data());
    std::array<double, kC2 * kL2> d_a2{};
    for (std::size_t i = 0; i < d_p2.size(); ++i) d_a2[act.arg2[i]] += d_p2[i];
    relu_backward(act.a2.data(), d_a2.data(), d_a2.size());

    std::array<double, kC1 * kP1> d_p1;
    conv_backward(l.conv[1], p, act.p1.data(), d_a2.data(), g, d_p1.data());
    std::array<double, kC1 * kL1> d_a1{};
    for (std::size_t i = 0; i < d_p1.size(); ++i) d_a1[act.arg1[i]] += d_p1[i];
    relu_backward(act.a1.data(), d_a1.data(), d_a1.size());

    conv_backward(l.conv[0], p, s.features.values.data(), d_a1.data(), g, nullptr);
  }
  return loss * scale;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || batch_size == 0 || epochs == 0 || ensemble_size == 0) {
    throw ConfigError("train config: learning rate, batch size, epochs and ensemble size must be positive");
  }
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw ConfigError("train config: Adam moment coefficients must lie in (0, 1)");
  }
}

TrainedCnn cnn_train(std::span<const Sample> train, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw InputError("cnn_train: empty training split");
  TrainedCnn out;
  out.model = CnnModel::initialized(cfg.init_seed);
  out.report.seed = cfg.init_seed;
  const std::size_t n_params = out.model.params.size();
  std::vector<double> grad(n_params), m1(n_params, 0.0), m2(n_params, 0.0);
  std::vector<std::size_t> order(train.size());
  std::vector<Sample> batch;
  batch.reserve(cfg.batch_size);
  double beta1_t = 1.0, beta2_t = 1.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_rng(cfg.init_seed, StreamKind::kShuffle, epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      const double loss = cnn_loss_and_gradient(out.model, batch, grad);
      if (!std::isfinite(loss)) {
        throw NumericalError("cnn_train: loss diverged at epoch " + std::to_string(epoch) + ", batch starting at " +
                             std::to_string(start) + " (seed " + std::to_string(cfg.init_seed) + ")");
      }
      epoch_loss += loss * static_cast<double>(end - start);
      beta1_t *= cfg.beta1;
      beta2_t *= cfg.beta2;
      for (std::size_t k = 0; k < n_params; ++k) {
        m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * grad[k];
        m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
        const double m_hat = m1[k] / (1.0 - beta1_t);
        const double v_hat = m2[k] / (1.0 - beta2_t);
        out.model.params[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      }
    }
    out.report.loss_curve.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return out;
}

std::vector<TrainedCnn> cnn_train_ensemble(std::span<const Sample> train, const TrainConfig& cfg, std::size_t threads) {
  cfg.validate();
  std::vector<TrainedCnn> members(cfg.ensemble_size);
  parallel_for(cfg.ensemble_size, threads, [&](std::size_t m) {
    TrainConfig member_cfg = cfg;
    member_cfg.init_seed = stream_seed(cfg.init_seed, StreamKind::kInit, m);
    members[m] = cnn_train(train, member_cfg);
  });
  return members;
}

}  // namespace mshedge
