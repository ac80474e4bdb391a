#pragma once

#include <string>
#include <vector>

#include "elastolab/nn.hpp"

namespace elastolab {

// Encoder/decoder regression network mapping 2-channel complex displacement
// patches to a 1-channel stiffness patch. Four encoder and four decoder
// blocks with symmetric skip connections; channels follow base * 2^level up
// to level 3, the bottleneck stays at 8*base. Inputs of arbitrary size >= 8
// are reflect-padded to the next multiple of 16 and the output cropped back.
struct UNetConfig {
  int in_channels = 2;
  int base_channels = 32;
  double leaky_slope = 0.01;

  void validate() const {
    if (in_channels < 1 || base_channels < 1) throw std::invalid_argument("bad UNet config");
  }
};

// conv -> LeakyReLU -> BN, twice.
template <typename T>
class ConvBlock {
 public:
  ConvBlock() = default;
  ConvBlock(int in_ch, int out_ch, double slope)
      : conv1_(in_ch, out_ch), bn1_(out_ch), act1_(slope), conv2_(out_ch, out_ch), bn2_(out_ch), act2_(slope) {}

  Tensor4<T> forward(const Tensor4<T>& x, bool training) {
    Tensor4<T> t = bn1_.forward(act1_.forward(conv1_.forward(x)), training);
    return bn2_.forward(act2_.forward(conv2_.forward(t)), training);
  }

  Tensor4<T> backward(const Tensor4<T>& dy) {
    Tensor4<T> d = conv2_.backward(act2_.backward(bn2_.backward(dy)));
    return conv1_.backward(act1_.backward(bn1_.backward(d)));
  }

  void init(Rng& rng) {
    conv1_.init_kaiming(rng);
    conv2_.init_kaiming(rng);
  }

  void visit(const std::string& prefix, const ParamVisitor<T>& fn) {
    conv1_.visit(prefix + ".conv1", fn);
    bn1_.visit(prefix + ".bn1", fn);
    conv2_.visit(prefix + ".conv2", fn);
    bn2_.visit(prefix + ".bn2", fn);
  }

  void visit_state(const std::string& prefix, const std::function<void(const std::string&, std::vector<T>&)>& fn) {
    bn1_.visit_state(prefix + ".bn1", fn);
    bn2_.visit_state(prefix + ".bn2", fn);
  }

 private:
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn1_;
  LeakyReLU<T> act1_{0.01};
  Conv2d<T> conv2_;
  BatchNorm2d<T> bn2_;
  LeakyReLU<T> act2_{0.01};
};

template <typename T>
class UNet {
 public:
  explicit UNet(const UNetConfig& cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    const int b = cfg_.base_channels;
    enc_[0] = ConvBlock<T>(cfg_.in_channels, b, cfg_.leaky_slope);
    enc_[1] = ConvBlock<T>(b, 2 * b, cfg_.leaky_slope);
    enc_[2] = ConvBlock<T>(2 * b, 4 * b, cfg_.leaky_slope);
    enc_[3] = ConvBlock<T>(4 * b, 8 * b, cfg_.leaky_slope);
    bottleneck_ = ConvBlock<T>(8 * b, 8 * b, cfg_.leaky_slope);
    up_conv_[3] = Conv2d<T>(8 * b, 8 * b);
    up_conv_[2] = Conv2d<T>(8 * b, 4 * b);
    up_conv_[1] = Conv2d<T>(4 * b, 2 * b);
    up_conv_[0] = Conv2d<T>(2 * b, b);
    dec_[3] = ConvBlock<T>(16 * b, 8 * b, cfg_.leaky_slope);
    dec_[2] = ConvBlock<T>(8 * b, 4 * b, cfg_.leaky_slope);
    dec_[1] = ConvBlock<T>(4 * b, 2 * b, cfg_.leaky_slope);
    dec_[0] = ConvBlock<T>(2 * b, b, cfg_.leaky_slope);
    out_conv_ = Conv2d<T>(b, 1);
  }

  const UNetConfig& config() const { return cfg_; }

  void init(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& e : enc_) e.init(rng);
    bottleneck_.init(rng);
    for (auto& u : up_conv_) u.init_kaiming(rng);
    for (auto& d : dec_) d.init(rng);
    out_conv_.init_kaiming(rng);
  }

  /// Output spatial dims equal input dims; input dims must be >= 8.
  Tensor4<T> forward(const Tensor4<T>& x, bool training) {
    if (x.c != cfg_.in_channels) throw std::invalid_argument("UNet input channel mismatch");
    if (x.h < 8 || x.w < 8) throw std::invalid_argument("UNet input must be at least 8x8");
    const int ph = next_multiple16(x.h);
    const int pw = next_multiple16(x.w);
    pad_ = ReflectPadTo<T>(ph, pw);
    Tensor4<T> t = pad_.forward(x);

    std::array<Tensor4<T>, 4> skip;
    for (int l = 0; l < 4; ++l) {
      skip[l] = enc_[l].forward(t, training);
      t = pool_[l].forward(skip[l]);
    }
    t = bottleneck_.forward(t, training);
    for (int l = 3; l >= 0; --l) {
      Tensor4<T> up = up_conv_[l].forward(upsample_[l].forward(t));
      skip_channels_[l] = skip[l].c;
      t = dec_[l].forward(concat_channels(up, skip[l]), training);
    }
    Tensor4<T> y = out_conv_.forward(t);
    return pad_.crop(y);
  }

  /// Reverse pass for the most recent training-mode forward; accumulates
  /// parameter gradients. Returns nothing useful for the caller.
  void backward(const Tensor4<T>& dy_cropped) {
    Tensor4<T> d = pad_.crop_backward(dy_cropped, 1);
    d = out_conv_.backward(d);
    std::array<Tensor4<T>, 4> skip_grad;
    for (int l = 0; l <= 3; ++l) {
      d = dec_[l].backward(d);
      Tensor4<T> d_up;
      split_channels(d, d_up, skip_grad[l], d.c - skip_channels_[l], skip_channels_[l]);
      d = upsample_[l].backward(up_conv_[l].backward(d_up));
    }
    d = bottleneck_.backward(d);
    for (int l = 3; l >= 0; --l) {
      Tensor4<T> de = pool_[l].backward(d);
      for (std::size_t k = 0; k < de.v.size(); ++k) de.v[k] += skip_grad[l].v[k];
      d = enc_[l].backward(de);
    }
    pad_.backward(d);  // input gradient discarded
  }

  void visit_params(const ParamVisitor<T>& fn) {
    for (int l = 0; l < 4; ++l) enc_[l].visit("enc" + std::to_string(l), fn);
    bottleneck_.visit("bottleneck", fn);
    for (int l = 3; l >= 0; --l) up_conv_[l].visit("up" + std::to_string(l), fn);
    for (int l = 3; l >= 0; --l) dec_[l].visit("dec" + std::to_string(l), fn);
    out_conv_.visit("out", fn);
  }

  void visit_state(const std::function<void(const std::string&, std::vector<T>&)>& fn) {
    for (int l = 0; l < 4; ++l) enc_[l].visit_state("enc" + std::to_string(l), fn);
    bottleneck_.visit_state("bottleneck", fn);
    for (int l = 3; l >= 0; --l) dec_[l].visit_state("dec" + std::to_string(l), fn);
  }

  void zero_grad() {
    visit_params([](const std::string&, std::vector<T>&, std::vector<T>& grad) {
      std::fill(grad.begin(), grad.end(), T(0));
    });
  }

  static int next_multiple16(int v) { return ((v + 15) / 16) * 16; }

 private:
  UNetConfig cfg_;
  std::array<ConvBlock<T>, 4> enc_;
  ConvBlock<T> bottleneck_;
  std::array<Conv2d<T>, 4> up_conv_;
  std::array<ConvBlock<T>, 4> dec_;
  Conv2d<T> out_conv_;
  std::array<MaxPool2x2<T>, 4> pool_;
  std::array<UpsampleNearest2x<T>, 4> upsample_;
  ReflectPadTo<T> pad_{16, 16};
  std::array<int, 4> skip_channels_{};
};

}  // namespace elastolab
