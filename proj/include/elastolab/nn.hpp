#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elastolab/rng.hpp"
#include "elastolab/tensor.hpp"

namespace elastolab {

// Building blocks for the patch-regression network. Every layer implements
// forward() and a matching backward() that consumes the upstream gradient
// and accumulates parameter gradients; caches live in the layer between the
// two calls. All state is deterministic given the seed.

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Parameter visitor: name, data, gradient.
template <typename T>
using ParamVisitor = std::function<void(const std::string&, std::vector<T>&, std::vector<T>&)>;

namespace nn_detail {

inline int reflect_index(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
  return i;
}

}  // namespace nn_detail

// 3x3 convolution, stride 1, reflect padding 1 (spatial dims preserved).
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int kernel = 3)
      : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), pad_(kernel / 2) {
    weight_.assign(static_cast<std::size_t>(out_ch) * in_ch * kernel * kernel, T(0));
    bias_.assign(out_ch, T(0));
    wgrad_.assign(weight_.size(), T(0));
    bgrad_.assign(bias_.size(), T(0));
  }

  void init_kaiming(Rng& rng) {
    // Kaiming-uniform fan-in bound; biases start at zero.
    const double fan_in = static_cast<double>(in_ch_) * kernel_ * kernel_;
    const double bound = std::sqrt(6.0 / fan_in);
    for (auto& w : weight_) w = static_cast<T>(rng.uniform(-bound, bound));
  }

  Tensor4<T> forward(const Tensor4<T>& x) {
    if (x.c != in_ch_) throw std::invalid_argument("conv input channel mismatch");
    input_ = x;
    Tensor4<T> y(x.n, out_ch_, x.h, x.w);
    const int cols = x.h * x.w;
    const int krows = in_ch_ * kernel_ * kernel_;
    MatRM<T> col(krows, cols);
    Eigen::Map<const MatRM<T>> wmat(weight_.data(), out_ch_, krows);
    for (int i = 0; i < x.n; ++i) {
      im2col(x, i, col);
      Eigen::Map<MatRM<T>> out(y.sample(i), out_ch_, cols);
      out.noalias() = wmat * col;
      for (int o = 0; o < out_ch_; ++o) out.row(o).array() += bias_[o];
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) {
    const Tensor4<T>& x = input_;
    Tensor4<T> dx(x.n, x.c, x.h, x.w);
    const int cols = x.h * x.w;
    const int krows = in_ch_ * kernel_ * kernel_;
    MatRM<T> col(krows, cols);
    MatRM<T> dcol(krows, cols);
    Eigen::Map<const MatRM<T>> wmat(weight_.data(), out_ch_, krows);
    Eigen::Map<MatRM<T>> dwmat(wgrad_.data(), out_ch_, krows);
    for (int i = 0; i < x.n; ++i) {
      im2col(x, i, col);
      Eigen::Map<const MatRM<T>> dout(dy.sample(i), out_ch_, cols);
      dwmat.noalias() += dout * col.transpose();
      for (int o = 0; o < out_ch_; ++o) bgrad_[o] += dout.row(o).sum();
      dcol.noalias() = wmat.transpose() * dout;
      col2im_add(dcol, dx, i);
    }
    input_ = Tensor4<T>();
    return dx;
  }

  void visit(const std::string& prefix, const ParamVisitor<T>& fn) {
    fn(prefix + ".weight", weight_, wgrad_);
    fn(prefix + ".bias", bias_, bgrad_);
  }

  int out_channels() const { return out_ch_; }

 private:
  void im2col(const Tensor4<T>& x, int sample, MatRM<T>& col) const {
    const int h = x.h, w = x.w;
    const T* base = x.sample(sample);
    int row = 0;
    for (int ch = 0; ch < in_ch_; ++ch) {
      const T* plane = base + static_cast<std::size_t>(ch) * h * w;
      for (int kr = 0; kr < kernel_; ++kr) {
        for (int kc = 0; kc < kernel_; ++kc, ++row) {
          T* dst = col.data() + static_cast<std::size_t>(row) * h * w;
          for (int r = 0; r < h; ++r) {
            const int sr = nn_detail::reflect_index(r + kr - pad_, h);
            const T* src = plane + static_cast<std::size_t>(sr) * w;
            for (int c = 0; c < w; ++c) dst[r * w + c] = src[nn_detail::reflect_index(c + kc - pad_, w)];
          }
        }
      }
    }
  }

  void col2im_add(const MatRM<T>& dcol, Tensor4<T>& dx, int sample) const {
    const int h = dx.h, w = dx.w;
    T* base = dx.sample(sample);
    int row = 0;
    for (int ch = 0; ch < in_ch_; ++ch) {
      T* plane = base + static_cast<std::size_t>(ch) * h * w;
      for (int kr = 0; kr < kernel_; ++kr) {
        for (int kc = 0; kc < kernel_; ++kc, ++row) {
          const T* src = dcol.data() + static_cast<std::size_t>(row) * h * w;
          for (int r = 0; r < h; ++r) {
            const int sr = nn_detail::reflect_index(r + kr - pad_, h);
            T* dst = plane + static_cast<std::size_t>(sr) * w;
            for (int c = 0; c < w; ++c) dst[nn_detail::reflect_index(c + kc - pad_, w)] += src[r * w + c];
          }
        }
      }
    }
  }

  int in_ch_ = 0, out_ch_ = 0, kernel_ = 3, pad_ = 1;
  std::vector<T> weight_, bias_, wgrad_, bgrad_;
  Tensor4<T> input_;
};

// Per-channel batch normalization. Training mode normalizes with biased
// batch statistics and tracks running stats (momentum 0.1, unbiased var);
// inference mode uses the running stats only.
template <typename T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels) : channels_(channels) {
    gamma_.assign(channels, T(1));
    beta_.assign(channels, T(0));
    running_mean_.assign(channels, T(0));
    running_var_.assign(channels, T(1));
    ggrad_.assign(channels, T(0));
    bgrad_.assign(channels, T(0));
  }

  Tensor4<T> forward(const Tensor4<T>& x, bool training) {
    if (x.c != channels_) throw std::invalid_argument("batchnorm channel mismatch");
    Tensor4<T> y(x.n, x.c, x.h, x.w);
    const std::size_t plane = x.plane();
    const double m = static_cast<double>(x.n) * plane;
    if (training) {
      xhat_ = Tensor4<T>(x.n, x.c, x.h, x.w);
      invstd_.assign(channels_, T(0));
      for (int ch = 0; ch < channels_; ++ch) {
        double mean = 0.0;
        for (int i = 0; i < x.n; ++i) {
          const T* p = x.sample(i) + ch * plane;
          for (std::size_t k = 0; k < plane; ++k) mean += p[k];
        }
        mean /= m;
        double var = 0.0;
        for (int i = 0; i < x.n; ++i) {
          const T* p = x.sample(i) + ch * plane;
          for (std::size_t k = 0; k < plane; ++k) {
            const double d = p[k] - mean;
            var += d * d;
          }
        }
        var /= m;
        const double invstd = 1.0 / std::sqrt(var + kEps);
        invstd_[ch] = static_cast<T>(invstd);
        for (int i = 0; i < x.n; ++i) {
          const T* p = x.sample(i) + ch * plane;
          T* xh = xhat_.sample(i) + ch * plane;
          T* out = y.sample(i) + ch * plane;
          for (std::size_t k = 0; k < plane; ++k) {
            xh[k] = static_cast<T>((p[k] - mean) * invstd);
            out[k] = gamma_[ch] * xh[k] + beta_[ch];
          }
        }
        const double unbiased = m > 1.0 ? var * m / (m - 1.0) : var;
        running_mean_[ch] = static_cast<T>((1.0 - kMomentum) * running_mean_[ch] + kMomentum * mean);
        running_var_[ch] = static_cast<T>((1.0 - kMomentum) * running_var_[ch] + kMomentum * unbiased);
      }
    } else {
      for (int ch = 0; ch < channels_; ++ch) {
        const double invstd = 1.0 / std::sqrt(static_cast<double>(running_var_[ch]) + kEps);
        const double mean = running_mean_[ch];
        for (int i = 0; i < x.n; ++i) {
          const T* p = x.sample(i) + ch * plane;
          T* out = y.sample(i) + ch * plane;
          for (std::size_t k = 0; k < plane; ++k)
            out[k] = static_cast<T>(gamma_[ch] * (p[k] - mean) * invstd + beta_[ch]);
        }
      }
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) {
    const std::size_t plane = dy.plane();
    const double m = static_cast<double>(dy.n) * plane;
    Tensor4<T> dx(dy.n, dy.c, dy.h, dy.w);
    for (int ch = 0; ch < channels_; ++ch) {
      double sum_dy = 0.0;
      double sum_dy_xhat = 0.0;
      for (int i = 0; i < dy.n; ++i) {
        const T* d = dy.sample(i) + ch * plane;
        const T* xh = xhat_.sample(i) + ch * plane;
        for (std::size_t k = 0; k < plane; ++k) {
          sum_dy += d[k];
          sum_dy_xhat += static_cast<double>(d[k]) * xh[k];
        }
      }
      ggrad_[ch] += static_cast<T>(sum_dy_xhat);
      bgrad_[ch] += static_cast<T>(sum_dy);
      const double scale = gamma_[ch] * invstd_[ch] / m;
      for (int i = 0; i < dy.n; ++i) {
        const T* d = dy.sample(i) + ch * plane;
        const T* xh = xhat_.sample(i) + ch * plane;
        T* out = dx.sample(i) + ch * plane;
        for (std::size_t k = 0; k < plane; ++k)
          out[k] = static_cast<T>(scale * (m * d[k] - sum_dy - xh[k] * sum_dy_xhat));
      }
    }
    xhat_ = Tensor4<T>();
    return dx;
  }

  void visit(const std::string& prefix, const ParamVisitor<T>& fn) {
    fn(prefix + ".gamma", gamma_, ggrad_);
    fn(prefix + ".beta", beta_, bgrad_);
  }

  // Running stats are state, not optimized parameters; checkpoints carry
  // them through a separate visitor.
  void visit_state(const std::string& prefix, const std::function<void(const std::string&, std::vector<T>&)>& fn) {
    fn(prefix + ".running_mean", running_mean_);
    fn(prefix + ".running_var", running_var_);
  }

  const std::vector<T>& running_mean() const { return running_mean_; }
  const std::vector<T>& running_var() const { return running_var_; }

  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

 private:
  int channels_ = 0;
  std::vector<T> gamma_, beta_, running_mean_, running_var_, ggrad_, bgrad_;
  Tensor4<T> xhat_;
  std::vector<T> invstd_;
};

template <typename T>
class LeakyReLU {
 public:
  explicit LeakyReLU(double slope = 0.01) : slope_(static_cast<T>(slope)) {}

  Tensor4<T> forward(const Tensor4<T>& x) {
    input_ = x;
    Tensor4<T> y = x;
    for (auto& v : y.v) v = v > T(0) ? v : slope_ * v;
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) {
    Tensor4<T> dx = dy;
    for (std::size_t k = 0; k < dx.v.size(); ++k)
      if (input_.v[k] <= T(0)) dx.v[k] *= slope_;
    input_ = Tensor4<T>();
    return dx;
  }

 private:
  T slope_;
  Tensor4<T> input_;
};

template <typename T>
class MaxPool2x2 {
 public:
  Tensor4<T> forward(const Tensor4<T>& x) {
    if (x.h % 2 != 0 || x.w % 2 != 0) throw std::invalid_argument("maxpool needs even dims");
    Tensor4<T> y(x.n, x.c, x.h / 2, x.w / 2);
    argmax_.assign(y.size(), 0);
    in_h_ = x.h;
    in_w_ = x.w;
    std::size_t out_idx = 0;
    for (int i = 0; i < x.n; ++i) {
      for (int ch = 0; ch < x.c; ++ch) {
        const T* plane = x.sample(i) + static_cast<std::size_t>(ch) * x.plane();
        for (int r = 0; r < y.h; ++r) {
          for (int c = 0; c < y.w; ++c, ++out_idx) {
            std::size_t best = static_cast<std::size_t>(2 * r) * x.w + 2 * c;
            T best_v = plane[best];
            const std::size_t cand[3] = {best + 1, best + x.w, best + x.w + 1};
            for (std::size_t idx : cand) {
              if (plane[idx] > best_v) {
                best_v = plane[idx];
                best = idx;
              }
            }
            y.v[out_idx] = best_v;
            argmax_[out_idx] = best;
          }
        }
      }
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) {
    Tensor4<T> dx(dy.n, dy.c, in_h_, in_w_);
    std::size_t out_idx = 0;
    for (int i = 0; i < dy.n; ++i) {
      for (int ch = 0; ch < dy.c; ++ch) {
        T* plane = dx.sample(i) + static_cast<std::size_t>(ch) * dx.plane();
        const std::size_t count = dy.plane();
        for (std::size_t k = 0; k < count; ++k, ++out_idx) plane[argmax_[out_idx]] += dy.v[out_idx];
      }
    }
    return dx;
  }

 private:
  std::vector<std::size_t> argmax_;
  int in_h_ = 0, in_w_ = 0;
};

template <typename T>
class UpsampleNearest2x {
 public:
  Tensor4<T> forward(const Tensor4<T>& x) {
    Tensor4<T> y(x.n, x.c, x.h * 2, x.w * 2);
    for (int i = 0; i < x.n; ++i)
      for (int ch = 0; ch < x.c; ++ch) {
        const T* src = x.sample(i) + static_cast<std::size_t>(ch) * x.plane();
        T* dst = y.sample(i) + static_cast<std::size_t>(ch) * y.plane();
        for (int r = 0; r < y.h; ++r)
          for (int c = 0; c < y.w; ++c) dst[static_cast<std::size_t>(r) * y.w + c] = src[static_cast<std::size_t>(r / 2) * x.w + c / 2];
      }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) {
    Tensor4<T> dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
    for (int i = 0; i < dy.n; ++i)
      for (int ch = 0; ch < dy.c; ++ch) {
        const T* src = dy.sample(i) + static_cast<std::size_t>(ch) * dy.plane();
        T* dst = dx.sample(i) + static_cast<std::size_t>(ch) * dx.plane();
        for (int r = 0; r < dy.h; ++r)
          for (int c = 0; c < dy.w; ++c) dst[static_cast<std::size_t>(r / 2) * dx.w + c / 2] += src[static_cast<std::size_t>(r) * dy.w + c];
      }
    return dx;
  }
};

template <typename T>
inline Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) throw std::invalid_argument("concat shape mismatch");
  Tensor4<T> y(a.n, a.c + b.c, a.h, a.w);
  const std::size_t pa = a.c * a.plane();
  const std::size_t pb = b.c * b.plane();
  for (int i = 0; i < a.n; ++i) {
    std::copy(a.sample(i), a.sample(i) + pa, y.sample(i));
    std::copy(b.sample(i), b.sample(i) + pb, y.sample(i) + pa);
  }
  return y;
}

template <typename T>
inline void split_channels(const Tensor4<T>& dy, Tensor4<T>& da, Tensor4<T>& db, int ca, int cb) {
  da = Tensor4<T>(dy.n, ca, dy.h, dy.w);
  db = Tensor4<T>(dy.n, cb, dy.h, dy.w);
  const std::size_t pa = da.c * da.plane();
  const std::size_t pb = db.c * db.plane();
  for (int i = 0; i < dy.n; ++i) {
    std::copy(dy.sample(i), dy.sample(i) + pa, da.sample(i));
    std::copy(dy.sample(i) + pa, dy.sample(i) + pa + pb, db.sample(i));
  }
}

// Reflect padding to a fixed spatial size, centered; the inverse crop and
// their adjoints. Used to bring arbitrary patch sizes to a multiple of 16.
template <typename T>
class ReflectPadTo {
 public:
  ReflectPadTo(int target_h, int target_w) : th_(target_h), tw_(target_w) {}

  Tensor4<T> forward(const Tensor4<T>& x) {
    ih_ = x.h;
    iw_ = x.w;
    top_ = (th_ - x.h) / 2;
    left_ = (tw_ - x.w) / 2;
    if (th_ < x.h || tw_ < x.w) throw std::invalid_argument("pad target smaller than input");
    Tensor4<T> y(x.n, x.c, th_, tw_);
    for (int i = 0; i < x.n; ++i)
      for (int ch = 0; ch < x.c; ++ch) {
        const T* src = x.sample(i) + static_cast<std::size_t>(ch) * x.plane();
        T* dst = y.sample(i) + static_cast<std::size_t>(ch) * y.plane();
        for (int r = 0; r < th_; ++r) {
          const int sr = nn_detail::reflect_index(r - top_, x.h);
          for (int c = 0; c < tw_; ++c)
            dst[static_cast<std::size_t>(r) * tw_ + c] =
                src[static_cast<std::size_t>(sr) * x.w + nn_detail::reflect_index(c - left_, x.w)];
        }
      }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) {
    Tensor4<T> dx(dy.n, dy.c, ih_, iw_);
    for (int i = 0; i < dy.n; ++i)
      for (int ch = 0; ch < dy.c; ++ch) {
        const T* src = dy.sample(i) + static_cast<std::size_t>(ch) * dy.plane();
        T* dst = dx.sample(i) + static_cast<std::size_t>(ch) * dx.plane();
        for (int r = 0; r < th_; ++r) {
          const int sr = nn_detail::reflect_index(r - top_, ih_);
          for (int c = 0; c < tw_; ++c)
            dst[static_cast<std::size_t>(sr) * iw_ + nn_detail::reflect_index(c - left_, iw_)] +=
                src[static_cast<std::size_t>(r) * tw_ + c];
        }
      }
    return dx;
  }

  /// Center crop back to the original input size.
  Tensor4<T> crop(const Tensor4<T>& y) const {
    Tensor4<T> out(y.n, y.c, ih_, iw_);
    for (int i = 0; i < y.n; ++i)
      for (int ch = 0; ch < y.c; ++ch) {
        const T* src = y.sample(i) + static_cast<std::size_t>(ch) * y.plane();
        T* dst = out.sample(i) + static_cast<std::size_t>(ch) * out.plane();
        for (int r = 0; r < ih_; ++r)
          for (int c = 0; c < iw_; ++c)
            dst[static_cast<std::size_t>(r) * iw_ + c] = src[static_cast<std::size_t>(r + top_) * tw_ + c + left_];
      }
    return out;
  }

  Tensor4<T> crop_backward(const Tensor4<T>& dout, int channels) const {
    Tensor4<T> dy(dout.n, channels, th_, tw_);
    for (int i = 0; i < dout.n; ++i)
      for (int ch = 0; ch < channels; ++ch) {
        const T* src = dout.sample(i) + static_cast<std::size_t>(ch) * dout.plane();
        T* dst = dy.sample(i) + static_cast<std::size_t>(ch) * dy.plane();
        for (int r = 0; r < ih_; ++r)
          for (int c = 0; c < iw_; ++c)
            dst[static_cast<std::size_t>(r + top_) * tw_ + c + left_] = src[static_cast<std::size_t>(r) * iw_ + c];
      }
    return dy;
  }

 private:
  int th_ = 0, tw_ = 0, ih_ = 0, iw_ = 0, top_ = 0, left_ = 0;
};

}  // namespace elastolab
