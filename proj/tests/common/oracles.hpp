// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

// Reference computations shared by the unit and acceptance suites. Nothing
// here calls into the library's conv or backprop code.

#pragma once

#include <array>

#include "cuenet/layers/dense.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::oracle {

/// Six nested loops, zero padding k/2, stride 1; per output the products are
/// summed over (input channel, kernel row, kernel column), then the bias is added.
inline Tensor<double> naive_conv(const Tensor<double>& w, const Tensor<double>& b, const Tensor<double>& x) {
  const std::size_t co = w.dim(0), ci = w.dim(1), k = w.dim(2), h = x.dim(1), wd = x.dim(2);
  const long pad = static_cast<long>(k / 2);
  Tensor<double> out({co, h, wd});
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < wd; ++xx) {
        double acc = 0.0;
        for (std::size_t c = 0; c < ci; ++c)
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long sy = static_cast<long>(y + ky) - pad, sx = static_cast<long>(xx + kx) - pad;
              if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(wd)) continue;
              acc += w.at(o, c, ky, kx) * x.at(c, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
            }
        out.at(o, y, xx) = acc + b.at(o);
      }
  return out;
}

// 2-3-2 sigmoid network, quadratic loss. Expected values were computed
// outside this code base with 30-digit arithmetic by writing out
//   z1 = W1 x + b1, a1 = s(z1), z2 = W2 a1 + b2, a2 = s(z2)
//   d2 = (a2 - y) * s'(z2)
//   d1 = (W2^T d2) * s'(z1)
//   dL/db = d, dL/dW[j][k] = d[j] * a_prev[k]
struct HandFixture {
  layers::DenseNet<double> net{{
      layers::DenseLayer<double>(Tensor<double>({3, 2}, {0.1, 0.4, -0.2, 0.3, 0.5, -0.6}),
                                 Tensor<double>({3}, {0.05, -0.1, 0.2})),
      layers::DenseLayer<double>(Tensor<double>({2, 3}, {0.3, -0.7, 0.2, 0.6, 0.1, -0.4}),
                                 Tensor<double>({2}, {0.0, 0.1})),
  }};
  Tensor<double> x{{2}, {0.5, -0.3}};
  Tensor<double> y{{2}, {1.0, 0.0}};

  static constexpr double loss = 0.27587379845053624738;
  static constexpr std::array<double, 2> output = {0.49484899111197855086, 0.54458245943152316118};
  static constexpr std::array<double, 6> grad_w1 = {
      0.0053939128825031069517,  -0.003236347729501864171,  0.012473203419425412285,
      -0.0074839220516552473711, -0.0089882668672143137552, 0.0053929601203285882531};
  static constexpr std::array<double, 3> grad_b1 = {0.010787825765006213903, 0.02494640683885082457,
                                                    -0.01797653373442862751};
  static constexpr std::array<double, 6> grad_w2 = {
      -0.062505823851639117223, -0.054045909728306122705, -0.082392682135971717771,
      0.066856309038702454214,  0.057807574085413740892,  0.088127318063749561819};
  static constexpr std::array<double, 2> grad_b2 = {-0.12627434910455769977, 0.13506320510922960458};

  /// All 17 expected gradients in layer order: W1, b1, W2, b2.
  static std::vector<double> expected_gradients() {
    std::vector<double> g(grad_w1.begin(), grad_w1.end());
    g.insert(g.end(), grad_b1.begin(), grad_b1.end());
    g.insert(g.end(), grad_w2.begin(), grad_w2.end());
    g.insert(g.end(), grad_b2.begin(), grad_b2.end());
    return g;
  }
};

}  // namespace cuenet::oracle
