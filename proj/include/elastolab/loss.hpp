#pragma once

#include <cmath>

#include "elastolab/tensor.hpp"

namespace elastolab {

// Composite loss: mean squared error plus lambda times isotropic total
// variation of the prediction. MSE is normalized by N*C*H*W; TV is the plain
// sum over all pixels of sqrt(gx^2 + gy^2 + eps) with forward differences
// (zero at the last row/column).
template <typename T>
struct LossValue {
  double total = 0.0;
  double mse = 0.0;
  double tv = 0.0;
};

template <typename T>
LossValue<T> loss_forward(const Tensor4<T>& pred, const Tensor4<T>& target, double tv_lambda,
                          double tv_epsilon) {
  if (!pred.same_shape(target)) throw std::invalid_argument("loss shape mismatch");
  LossValue<T> out;
  double se = 0.0;
  for (std::size_t k = 0; k < pred.v.size(); ++k) {
    const double d = static_cast<double>(pred.v[k]) - target.v[k];
    se += d * d;
  }
  out.mse = se / static_cast<double>(pred.v.size());

  double tv = 0.0;
  for (int i = 0; i < pred.n; ++i) {
    for (int ch = 0; ch < pred.c; ++ch) {
      for (int r = 0; r < pred.h; ++r) {
        for (int c = 0; c < pred.w; ++c) {
          const double v = pred.at(i, ch, r, c);
          const double gx = c + 1 < pred.w ? pred.at(i, ch, r, c + 1) - v : 0.0;
          const double gy = r + 1 < pred.h ? pred.at(i, ch, r + 1, c) - v : 0.0;
          tv += std::sqrt(gx * gx + gy * gy + tv_epsilon);
        }
      }
    }
  }
  out.tv = tv;
  out.total = out.mse + tv_lambda * out.tv;
  return out;
}

template <typename T>
Tensor4<T> loss_backward(const Tensor4<T>& pred, const Tensor4<T>& target, double tv_lambda,
                         double tv_epsilon) {
  Tensor4<T> grad(pred.n, pred.c, pred.h, pred.w);
  const double inv_count = 1.0 / static_cast<double>(pred.v.size());
  for (std::size_t k = 0; k < pred.v.size(); ++k)
    grad.v[k] = static_cast<T>(2.0 * (static_cast<double>(pred.v[k]) - target.v[k]) * inv_count);

  if (tv_lambda != 0.0) {
    for (int i = 0; i < pred.n; ++i) {
      for (int ch = 0; ch < pred.c; ++ch) {
        for (int r = 0; r < pred.h; ++r) {
          for (int c = 0; c < pred.w; ++c) {
            const double v = pred.at(i, ch, r, c);
            const double gx = c + 1 < pred.w ? pred.at(i, ch, r, c + 1) - v : 0.0;
            const double gy = r + 1 < pred.h ? pred.at(i, ch, r + 1, c) - v : 0.0;
            const double t = std::sqrt(gx * gx + gy * gy + tv_epsilon);
            if (t <= 0.0) continue;
            const double s = tv_lambda / t;
            grad.at(i, ch, r, c) -= static_cast<T>(s * (gx + gy));
            if (c + 1 < pred.w) grad.at(i, ch, r, c + 1) += static_cast<T>(s * gx);
            if (r + 1 < pred.h) grad.at(i, ch, r + 1, c) += static_cast<T>(s * gy);
          }
        }
      }
    }
  }
  return grad;
}

}  // namespace elastolab
