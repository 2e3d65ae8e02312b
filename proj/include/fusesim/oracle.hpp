// Copyright 2026 The fusesim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "fusesim/tensor.hpp"
#include "fusesim/topology.hpp"

namespace fusesim {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Direct loop-nest convolution. Padded taps are multiplied as zeros so the
/// multiply count matches the closed-form MAC count.
template <class Scalar>
Tensor3<Scalar> conv2d(const Tensor3<Scalar>& input, const std::vector<Tensor3<Scalar>>& filters, int stride,
                       int padding) {
  if (filters.empty()) throw ShapeError("conv2d needs at least one filter");
  const int k = filters.front().height();
  for (const auto& f : filters) {
    if (f.channels() != input.channels() || f.height() != k || f.width() != k) {
      throw ShapeError("conv2d filter shape does not match input");
    }
  }
  const int m = output_extent(input.height(), k, stride, padding);
  const int n = output_extent(input.width(), k, stride, padding);
  if (m < 1 || n < 1) throw ShapeError("conv2d output would be empty");
  Tensor3<Scalar> out(static_cast<int>(filters.size()), m, n);
  for (int o = 0; o < out.channels(); ++o) {
    for (int y = 0; y < m; ++y) {
      for (int x = 0; x < n; ++x) {
        Scalar acc(0);
        for (int c = 0; c < input.channels(); ++c) {
          for (int dy = 0; dy < k; ++dy) {
            for (int dx = 0; dx < k; ++dx) {
              acc += filters[o](c, dy, dx) * input.padded(c, y * stride - padding + dy, x * stride - padding + dx);
            }
          }
        }
        out(o, y, x) = acc;
      }
    }
  }
  return out;
}

/// Per-channel KxK convolution; kernel dims (C, K, K).
template <class Scalar>
Tensor3<Scalar> depthwise(const Tensor3<Scalar>& input, const Tensor3<Scalar>& kernel, int stride, int padding) {
  if (kernel.channels() != input.channels() || kernel.height() != kernel.width()) {
    throw ShapeError("depthwise kernel must be (C, K, K) with C matching the input");
  }
  const int k = kernel.height();
  const int m = output_extent(input.height(), k, stride, padding);
  const int n = output_extent(input.width(), k, stride, padding);
  if (m < 1 || n < 1) throw ShapeError("depthwise output would be empty");
  Tensor3<Scalar> out(input.channels(), m, n);
  for (int c = 0; c < input.channels(); ++c) {
    for (int y = 0; y < m; ++y) {
      for (int x = 0; x < n; ++x) {
        Scalar acc(0);
        for (int dy = 0; dy < k; ++dy) {
          for (int dx = 0; dx < k; ++dx) {
            acc += kernel(c, dy, dx) * input.padded(c, y * stride - padding + dy, x * stride - padding + dx);
          }
        }
        out(c, y, x) = acc;
      }
    }
  }
  return out;
}

/// 1x1 convolution with a C' x C weight matrix.
template <class Scalar>
Tensor3<Scalar> pointwise(const Tensor3<Scalar>& input, const Matrix<Scalar>& weights) {
  if (weights.cols() != input.channels()) throw ShapeError("pointwise weights must have C columns");
  Tensor3<Scalar> out(static_cast<int>(weights.rows()), input.height(), input.width());
  for (int o = 0; o < out.channels(); ++o) {
    for (int y = 0; y < input.height(); ++y) {
      for (int x = 0; x < input.width(); ++x) {
        Scalar acc(0);
        for (int c = 0; c < input.channels(); ++c) acc += weights(o, c) * input(c, y, x);
        out(o, y, x) = acc;
      }
    }
  }
  return out;
}

/// 1xK filter along the width of `channel`; output row y reads input row
/// y*stride + (K-1)/2 - padding.
template <class Scalar, class Filter>
void fuse_row_path(const Tensor3<Scalar>& input, int channel, const Filter& f, int stride, int padding,
                   Tensor3<Scalar>& out, int out_channel) {
  const int k = static_cast<int>(f.size());
  const int mid = (k - 1) / 2;
  for (int y = 0; y < out.height(); ++y) {
    const int src = y * stride + mid - padding;
    for (int x = 0; x < out.width(); ++x) {
      Scalar acc(0);
      for (int t = 0; t < k; ++t) acc += f(t) * input.padded(channel, src, x * stride - padding + t);
      out(out_channel, y, x) = acc;
    }
  }
}

/// Kx1 filter along the height of `channel`.
template <class Scalar, class Filter>
void fuse_col_path(const Tensor3<Scalar>& input, int channel, const Filter& f, int stride, int padding,
                   Tensor3<Scalar>& out, int out_channel) {
  const int k = static_cast<int>(f.size());
  const int mid = (k - 1) / 2;
  for (int x = 0; x < out.width(); ++x) {
    const int src = x * stride + mid - padding;
    for (int y = 0; y < out.height(); ++y) {
      Scalar acc(0);
      for (int t = 0; t < k; ++t) acc += f(t) * input.padded(channel, y * stride - padding + t, src);
      out(out_channel, y, x) = acc;
    }
  }
}

/// FuSe operator. Half: row filters on channels [0, C_r), col filters on
/// [C_r, C). Full: both sets on every channel, 2C outputs. Row-group outputs
/// come first.
template <class Scalar>
Tensor3<Scalar> fuseconv(const Tensor3<Scalar>& input, const Matrix<Scalar>& row_filters,
                         const Matrix<Scalar>& col_filters, FuseVariant variant, int stride, int padding) {
  const int c = input.channels();
  const int cr = static_cast<int>(row_filters.rows());
  const int cc = static_cast<int>(col_filters.rows());
  if (row_filters.cols() != col_filters.cols() && cr > 0 && cc > 0) {
    throw ShapeError("row and column filters must share K");
  }
  const int k = static_cast<int>(cr > 0 ? row_filters.cols() : col_filters.cols());
  if (variant == FuseVariant::Half && cr + cc != c) throw ShapeError("FuSe-Half groups must cover C channels");
  if (variant == FuseVariant::Full && (cr != c || cc != c)) throw ShapeError("FuSe-Full needs C row and C column filters");
  const int m = output_extent(input.height(), k, stride, padding);
  const int n = output_extent(input.width(), k, stride, padding);
  if (k < 1 || m < 1 || n < 1) throw ShapeError("fuseconv output would be empty");
  Tensor3<Scalar> out(cr + cc, m, n);
  for (int i = 0; i < cr; ++i) fuse_row_path(input, i, row_filters.row(i).transpose(), stride, padding, out, i);
  const int col_base = variant == FuseVariant::Half ? cr : 0;
  for (int i = 0; i < cc; ++i) {
    fuse_col_path(input, col_base + i, col_filters.row(i).transpose(), stride, padding, out, cr + i);
  }
  return out;
}

}  // namespace fusesim
