#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "elastolab/loss.hpp"
#include "elastolab/optim.hpp"
#include "elastolab/patch.hpp"
#include "elastolab/unet.hpp"

namespace elastolab {

struct TrainConfig {
  double lr = 3e-4;
  int batch_size = 32;       // paper scale: 128
  int epochs = 30;           // paper scale: 150
  double lr_decay = 0.8;
  int lr_decay_every = 20;
  double tv_lambda = 1e-3;
  double tv_epsilon = 1e-8;
  int patience = 10;
  int base_channels = 32;    // paper scale: 64
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
    if (!(lr_decay > 0.0) || lr_decay > 1.0) throw std::invalid_argument("lr_decay must be in (0, 1]");
    if (!(tv_epsilon > 0.0)) throw std::invalid_argument("tv_epsilon must be > 0");
    if (batch_size < 1 || epochs < 1 || patience < 0) throw std::invalid_argument("bad train config");
  }
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

template <typename T>
struct TrainResult {
  UNet<T> net;  // best-validation-loss parameters
  std::vector<EpochStats> history;
  double best_val_loss = 0.0;
  int best_epoch = 0;
  bool diverged = false;
};

namespace detail_train {

// Targets are trained in kPa so loss magnitudes stay O(1).
inline constexpr double kPaPerKpa = 1000.0;

template <typename T>
void fill_batch(const PatchSet& set, const std::vector<int>& order, std::size_t begin,
                std::size_t end, Tensor4<T>& x, Tensor4<T>& y) {
  const int s = set.patch_size;
  const int n = static_cast<int>(end - begin);
  x = Tensor4<T>(n, 2, s, s);
  y = Tensor4<T>(n, 1, s, s);
  for (int i = 0; i < n; ++i) {
    const Patch& p = set.patches[order[begin + i]];
    for (std::size_t k = 0; k < p.input.size(); ++k)
      x.v[static_cast<std::size_t>(i) * p.input.size() + k] = static_cast<T>(p.input[k]);
    const auto& t = *p.target;
    for (std::size_t k = 0; k < t.size(); ++k)
      y.v[static_cast<std::size_t>(i) * t.size() + k] = static_cast<T>(t[k] / kPaPerKpa);
  }
}

template <typename T>
double dataset_loss(UNet<T>& net, const PatchSet& set, const TrainConfig& cfg) {
  std::vector<int> order(set.patches.size());
  std::iota(order.begin(), order.end(), 0);
  double total = 0.0;
  for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
    const std::size_t end = std::min(begin + cfg.batch_size, order.size());
    Tensor4<T> x, y;
    fill_batch(set, order, begin, end, x, y);
    const Tensor4<T> pred = net.forward(x, /*training=*/false);
    total += loss_forward(pred, y, cfg.tv_lambda, cfg.tv_epsilon).total * static_cast<double>(end - begin);
  }
  return total / static_cast<double>(order.size());
}

inline void shuffle(std::vector<int>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);
}

}  // namespace detail_train

// Seeded training loop: shuffled batches, Adam with step-decayed learning
// rate, early stopping on validation loss, best checkpoint retained.
// Training and validation sets must come from disjoint source fields; that
// split is the dataset builder's job.
template <typename T>
TrainResult<T> train(const PatchSet& train_set, const PatchSet& val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.patches.empty() || val_set.patches.empty())
    throw std::invalid_argument("empty training or validation set");
  if (!train_set.has_targets || !val_set.has_targets)
    throw std::invalid_argument("training requires target patches");

  UNetConfig net_cfg;
  net_cfg.base_channels = cfg.base_channels;
  UNet<T> net(net_cfg);
  net.init(cfg.seed);

  Adam<T> adam;
  TrainResult<T> result{net, {}, std::numeric_limits<double>::infinity(), 0, false};

  std::vector<int> order(train_set.patches.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = scheduled_lr(cfg.lr, cfg.lr_decay, cfg.lr_decay_every, epoch - 1);
    Rng rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    detail_train::shuffle(order, rng);

    double train_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, order.size());
      Tensor4<T> x, y;
      detail_train::fill_batch(train_set, order, begin, end, x, y);
      net.zero_grad();
      const Tensor4<T> pred = net.forward(x, /*training=*/true);
      const auto loss = loss_forward(pred, y, cfg.tv_lambda, cfg.tv_epsilon);
      if (!std::isfinite(loss.total)) {
        result.diverged = true;
        return result;
      }
      train_loss += loss.total * static_cast<double>(end - begin);
      net.backward(loss_backward(pred, y, cfg.tv_lambda, cfg.tv_epsilon));
      adam.step_begin();
      net.visit_params([&](const std::string& name, std::vector<T>& param, std::vector<T>& grad) {
        adam.update(name, param, grad, lr);
      });
    }
    train_loss /= static_cast<double>(order.size());

    const double val_loss = detail_train::dataset_loss(net, val_set, cfg);
    result.history.push_back({epoch, lr, train_loss, val_loss});
    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.net = net;
    }
    if (epoch - result.best_epoch >= cfg.patience && cfg.patience > 0) break;
  }
  return result;
}

inline std::string history_csv(const std::vector<EpochStats>& history) {
  std::string out = "epoch,lr,train_loss,val_loss\n";
  char line[128];
  for (const auto& e : history) {
    std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g\n", e.epoch, e.lr, e.train_loss, e.val_loss);
    out += line;
  }
  return out;
}

}  // namespace elastolab
