#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

namespace elastolab {

// Adam with bias-corrected moments. beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
template <typename T>
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// One update for a named parameter tensor; call step_begin() once per
  /// optimizer step before updating the parameters.
  void step_begin() { ++t_; }

  void update(const std::string& name, std::vector<T>& param, const std::vector<T>& grad, double lr) {
    auto& slot = state_[name];
    if (slot.m.empty()) {
      slot.m.assign(param.size(), 0.0);
      slot.v.assign(param.size(), 0.0);
    }
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t k = 0; k < param.size(); ++k) {
      const double g = grad[k];
      slot.m[k] = beta1_ * slot.m[k] + (1.0 - beta1_) * g;
      slot.v[k] = beta2_ * slot.v[k] + (1.0 - beta2_) * g * g;
      const double mhat = slot.m[k] / bc1;
      const double vhat = slot.v[k] / bc2;
      param[k] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }

  long steps() const { return t_; }

 private:
  struct Slot {
    std::vector<double> m, v;
  };
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::unordered_map<std::string, Slot> state_;
};

/// Step-decay schedule: lr(epoch) = lr0 * decay^floor(epoch / every).
inline double scheduled_lr(double lr0, double decay, int every, int epoch) {
  if (every <= 0) return lr0;
  return lr0 * std::pow(decay, epoch / every);
}

}  // namespace elastolab
