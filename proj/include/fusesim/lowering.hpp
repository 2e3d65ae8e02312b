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

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fusesim/tensor.hpp"
#include "fusesim/topology.hpp"

namespace fusesim {

struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

Rational make_rational(std::int64_t num, std::int64_t den);

/// GEMM view of a convolution. Depthwise lowers to `groups` independent
/// per-channel GEMMs with a single filter column each.
struct Im2colWorkload {
  std::int64_t a_prime_rows = 0;  // N*M
  std::int64_t a_prime_cols = 0;  // K*K*C (K*K per channel for depthwise)
  std::int64_t b_cols = 0;        // C' (1 for depthwise)
  std::int64_t groups = 1;
  Rational replication_factor;  // elements of A' over input elements actually read
};

Im2colWorkload lower_im2col(const LayerDescriptor& layer);

struct ChannelwiseWorkload {
  std::int64_t vector_len = 0;    // C
  std::int64_t dot_products = 0;  // N*M*K*K per filter
  std::int64_t filters = 0;       // C'
  bool needs_adder_tree = true;
};

class ChannelwiseInapplicable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

ChannelwiseWorkload lower_channelwise(const LayerDescriptor& layer);

/// Number of input positions along one axis touched by at least one window.
std::int64_t covered_extent(int in, int kernel, int stride, int padding);

enum class Orientation { Row, Col };

std::string_view to_string(Orientation o);

/// One 1D strip of the input feature map.
struct Slice {
  int channel = 0;      // input channel read
  int out_channel = 0;  // output channel written
  int spatial = 0;      // output row (Row) or output column (Col)
  Orientation orientation = Orientation::Row;
  int source_line = 0;  // input row/column read, may lie in the zero halo
  int input_len = 0;    // padded length
  int kernel_len = 0;
  int stride = 1;
  int padding = 0;
  int outputs = 0;
};

struct FoldEntry {
  int array_row = 0;
  int slice = 0;
  int out_start = 0;
  int out_len = 0;
};

using Fold = std::vector<FoldEntry>;

class LoweringError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SliceMap {
  MappingStrategy strategy = MappingStrategy::Hybrid;
  int rows = 0;  // array dims the map was packed for
  int cols = 0;
  int kernel = 0;
  int in_channels = 0;  // channels of the source feature map
  int in_h = 0;
  int in_w = 0;
  int out_channels = 0;
  int out_h = 0;
  int out_w = 0;
  std::vector<Slice> slices;
  std::vector<Fold> folds;
};

/// Slices of one FuSe layer. Row slices read channels
/// [channel_base, channel_base + C_group) and write from out_channel_base.
SliceMap lower_stos(const LayerDescriptor& layer, const ArrayConfig& cfg, MappingStrategy strategy,
                    int channel_base = 0, int out_channel_base = 0);

/// Row half first, then column half.
SliceMap lower_stos(const LayerDescriptor& row, const LayerDescriptor& col, const ArrayConfig& cfg,
                    MappingStrategy strategy, FuseVariant variant);

/// Widest output segment in a fold.
int fold_width(const SliceMap& map, const Fold& fold);

/// Number of distinct filters a fold needs.
int fold_filters(const SliceMap& map, const Fold& fold);

// ---- materialized im2col, used as a GEMM oracle path --------------------

/// A' rows are output pixels (row-major), columns (c, dy, dx) for channels
/// [c0, c0 + count).
template <class Scalar>
Matrix<Scalar> im2col(const Tensor3<Scalar>& in, int k, int stride, int padding, int c0, int count) {
  const int m = output_extent(in.height(), k, stride, padding);
  const int n = output_extent(in.width(), k, stride, padding);
  Matrix<Scalar> a(Eigen::Index{m} * n, Eigen::Index{k} * k * count);
  for (int y = 0; y < m; ++y) {
    for (int x = 0; x < n; ++x) {
      const Eigen::Index row = Eigen::Index{y} * n + x;
      for (int c = 0; c < count; ++c) {
        for (int dy = 0; dy < k; ++dy) {
          for (int dx = 0; dx < k; ++dx) {
            a(row, (Eigen::Index{c} * k + dy) * k + dx) =
                in.padded(c0 + c, y * stride - padding + dy, x * stride - padding + dx);
          }
        }
      }
    }
  }
  return a;
}

/// B: one column per filter, rows ordered like im2col columns.
template <class Scalar>
Matrix<Scalar> filter_matrix(const std::vector<Tensor3<Scalar>>& filters) {
  const auto& f0 = filters.front();
  Matrix<Scalar> b(f0.size(), static_cast<Eigen::Index>(filters.size()));
  for (std::size_t j = 0; j < filters.size(); ++j) b.col(static_cast<Eigen::Index>(j)) = filters[j].data();
  return b;
}

template <class Scalar>
Tensor3<Scalar> conv2d_im2col(const Tensor3<Scalar>& in, const std::vector<Tensor3<Scalar>>& filters, int stride,
                              int padding) {
  const int k = filters.front().height();
  const int m = output_extent(in.height(), k, stride, padding);
  const int n = output_extent(in.width(), k, stride, padding);
  Matrix<Scalar> out = im2col(in, k, stride, padding, 0, in.channels()) * filter_matrix(filters);
  Tensor3<Scalar> t(static_cast<int>(filters.size()), m, n);
  for (Eigen::Index o = 0; o < out.cols(); ++o) {
    t.channel(static_cast<int>(o)) = Eigen::Map<const Matrix<Scalar>>(out.col(o).data(), n, m).transpose();
  }
  return t;
}

template <class Scalar>
Tensor3<Scalar> depthwise_im2col(const Tensor3<Scalar>& in, const Tensor3<Scalar>& kernel, int stride, int padding) {
  const int k = kernel.height();
  const int m = output_extent(in.height(), k, stride, padding);
  const int n = output_extent(in.width(), k, stride, padding);
  Tensor3<Scalar> t(in.channels(), m, n);
  const Eigen::Index taps = Eigen::Index{k} * k;
  for (int c = 0; c < in.channels(); ++c) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> col = im2col(in, k, stride, padding, c, 1) *
                                                   kernel.data().segment(taps * c, taps);
    t.channel(c) = Eigen::Map<const Matrix<Scalar>>(col.data(), n, m).transpose();
  }
  return t;
}

}  // namespace fusesim
