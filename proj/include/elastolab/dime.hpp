#pragma once

#include <algorithm>
#include <vector>

#include "elastolab/patch.hpp"
#include "elastolab/train.hpp"
#include "elastolab/unet.hpp"

namespace elastolab {

struct DimeResult {
  ScalarField mu;        // Pa
  ScalarField coverage;  // patches covering each pixel
};

// Patch-wise learned inversion: overlapping tiling, per-patch forward in
// inference mode, overlap-averaged reconstruction. Output is converted from
// the network's kPa scale back to Pa.
template <typename T>
DimeResult dime_invert(UNet<T>& net, const ComplexField& u, int patch_size = 20, int stride = 3,
                       int batch_size = 64) {
  const PatchSet set = extract_inference(u, patch_size, stride);
  std::vector<Prediction> predictions;
  predictions.reserve(set.patches.size());

  const int s = set.patch_size;
  for (std::size_t begin = 0; begin < set.patches.size(); begin += batch_size) {
    const std::size_t end = std::min(begin + batch_size, set.patches.size());
    const int n = static_cast<int>(end - begin);
    Tensor4<T> x(n, 2, s, s);
    for (int i = 0; i < n; ++i) {
      const Patch& p = set.patches[begin + i];
      for (std::size_t k = 0; k < p.input.size(); ++k)
        x.v[static_cast<std::size_t>(i) * p.input.size() + k] = static_cast<T>(p.input[k]);
    }
    const Tensor4<T> y = net.forward(x, /*training=*/false);
    for (int i = 0; i < n; ++i) {
      const Patch& p = set.patches[begin + i];
      Prediction pred;
      pred.origin_row = p.origin_row;
      pred.origin_col = p.origin_col;
      pred.height = s;
      pred.width = s;
      pred.values.resize(static_cast<std::size_t>(s) * s);
      const T* src = y.sample(i);
      for (std::size_t k = 0; k < pred.values.size(); ++k)
        pred.values[k] = static_cast<double>(src[k]) * detail_train::kPaPerKpa;
      predictions.push_back(std::move(pred));
    }
  }

  AggregateResult agg = aggregate(predictions, u.height, u.width, u.spacing_mm);
  return {std::move(agg.map), std::move(agg.coverage)};
}

}  // namespace elastolab
