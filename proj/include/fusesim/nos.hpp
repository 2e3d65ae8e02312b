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
#include <functional>
#include <stdexcept>
#include <vector>

#include "fusesim/oracle.hpp"
#include "fusesim/tensor.hpp"

namespace fusesim {

enum class ChannelRole { RowFilter, ColFilter };

/// Row roles on the first ceil(C/2) channels, column roles on the rest.
std::vector<ChannelRole> half_roles(int channels);

/// Depthwise kernels T_w (C, K, K) plus one K x K adapter shared by every
/// filter of the layer, in both the row and the column role.
template <class Scalar>
struct ScaffoldedLayer {
  Tensor3<Scalar> kernel;
  Matrix<Scalar> adapter;
  std::vector<ChannelRole> roles;

  int channels() const { return kernel.channels(); }
  int k() const { return kernel.height(); }

  void validate() const {
    const int c = channels();
    const int k = this->k();
    if (kernel.width() != k) throw std::invalid_argument("depthwise kernels must be square");
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("scaffold needs an odd kernel size");
    if (adapter.rows() != k || adapter.cols() != k) throw std::invalid_argument("adapter must be K x K");
    if (!adapter.allFinite()) throw std::invalid_argument("adapter has non-finite entries");
    if (static_cast<int>(roles.size()) != c) throw std::invalid_argument("one role per channel required");
    int rows = 0;
    for (ChannelRole r : roles) rows += r == ChannelRole::RowFilter ? 1 : 0;
    if (rows != (c + 1) / 2) throw std::invalid_argument("roles do not match the Half split");
  }

  /// Depthwise kernels plus the shared adapter.
  std::int64_t trainable_params() const {
    return std::int64_t{channels()} * k() * k() + std::int64_t{k()} * k();
  }
};

template <class Scalar>
struct FuseFilters {
  Matrix<Scalar> row;  // (C_r, K)
  Matrix<Scalar> col;  // (C_c, K)
  std::vector<int> row_channels;
  std::vector<int> col_channels;

  std::int64_t params() const { return row.size() + col.size(); }
};

/// R_w[c] = A * T_w[c, :, mid] for row roles, C_w[c] = A * T_w[c, mid, :]
/// for column roles.
template <class Scalar>
FuseFilters<Scalar> project(const ScaffoldedLayer<Scalar>& layer) {
  layer.validate();
  const int k = layer.k();
  const int mid = (k - 1) / 2;
  FuseFilters<Scalar> f;
  for (int c = 0; c < layer.channels(); ++c) {
    (layer.roles[static_cast<std::size_t>(c)] == ChannelRole::RowFilter ? f.row_channels : f.col_channels)
        .push_back(c);
  }
  f.row.resize(static_cast<Eigen::Index>(f.row_channels.size()), k);
  f.col.resize(static_cast<Eigen::Index>(f.col_channels.size()), k);
  for (std::size_t i = 0; i < f.row_channels.size(); ++i) {
    const auto plane = layer.kernel.channel(f.row_channels[i]);
    f.row.row(static_cast<Eigen::Index>(i)) = (layer.adapter * plane.col(mid)).transpose();
  }
  for (std::size_t i = 0; i < f.col_channels.size(); ++i) {
    const auto plane = layer.kernel.channel(f.col_channels[i]);
    f.col.row(static_cast<Eigen::Index>(i)) = (layer.adapter * plane.row(mid).transpose()).transpose();
  }
  return f;
}

/// Plain FuSe filters; the adapter is folded away.
template <class Scalar>
FuseFilters<Scalar> collapse(const ScaffoldedLayer<Scalar>& layer) {
  return project(layer);
}

/// Forward through standalone filters: row-role outputs first, each in
/// channel order.
template <class Scalar>
Tensor3<Scalar> fuse_forward(const FuseFilters<Scalar>& f, const Tensor3<Scalar>& input, int stride, int padding) {
  const int k = static_cast<int>(f.row.rows() > 0 ? f.row.cols() : f.col.cols());
  const int m = output_extent(input.height(), k, stride, padding);
  const int n = output_extent(input.width(), k, stride, padding);
  if (m < 1 || n < 1) throw ShapeError("FuSe output would be empty");
  Tensor3<Scalar> out(static_cast<int>(f.row_channels.size() + f.col_channels.size()), m, n);
  int o = 0;
  for (std::size_t i = 0; i < f.row_channels.size(); ++i) {
    fuse_row_path(input, f.row_channels[i], f.row.row(static_cast<Eigen::Index>(i)).transpose(), stride, padding,
                  out, o++);
  }
  for (std::size_t i = 0; i < f.col_channels.size(); ++i) {
    fuse_col_path(input, f.col_channels[i], f.col.row(static_cast<Eigen::Index>(i)).transpose(), stride, padding,
                  out, o++);
  }
  return out;
}

/// Scaffold forward on the FuSe path: each filter is projected on the fly.
template <class Scalar>
Tensor3<Scalar> scaffold_forward(const ScaffoldedLayer<Scalar>& layer, const Tensor3<Scalar>& input, int stride,
                                 int padding) {
  layer.validate();
  if (input.channels() != layer.channels()) throw ShapeError("input channels do not match the layer");
  const int k = layer.k();
  const int mid = (k - 1) / 2;
  const int m = output_extent(input.height(), k, stride, padding);
  const int n = output_extent(input.width(), k, stride, padding);
  if (m < 1 || n < 1) throw ShapeError("FuSe output would be empty");
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Tensor3<Scalar> out(layer.channels(), m, n);
  int o = 0;
  for (ChannelRole want : {ChannelRole::RowFilter, ChannelRole::ColFilter}) {
    for (int c = 0; c < layer.channels(); ++c) {
      if (layer.roles[static_cast<std::size_t>(c)] != want) continue;
      const auto plane = layer.kernel.channel(c);
      if (want == ChannelRole::RowFilter) {
        const Vector f = layer.adapter * plane.col(mid);
        fuse_row_path(input, c, f, stride, padding, out, o++);
      } else {
        const Vector f = layer.adapter * plane.row(mid).transpose();
        fuse_col_path(input, c, f, stride, padding, out, o++);
      }
    }
  }
  return out;
}

enum class LayerChoice { Depthwise, FuSe };

/// One fair coin per layer, from mt19937_64 seeded with `seed`.
std::vector<LayerChoice> sample_config(std::size_t num_layers, std::uint64_t seed);

/// Forward of one scaffolded layer under a sampled choice.
template <class Scalar>
Tensor3<Scalar> sampled_forward(const ScaffoldedLayer<Scalar>& layer, LayerChoice choice, const Tensor3<Scalar>& input,
                                int stride, int padding) {
  if (choice == LayerChoice::Depthwise) return depthwise(input, layer.kernel, stride, padding);
  return scaffold_forward(layer, input, stride, padding);
}

/// Mean squared difference of logits.
double distill_loss(const std::vector<double>& student, const std::vector<double>& teacher);

/// Scalar loss of a layer output together with its gradient.
struct Loss {
  std::function<double(const Tensor3d&)> value;
  std::function<Tensor3d(const Tensor3d&)> grad;
};

/// sum(weights .* y)
Loss linear_loss(const Tensor3d& weights);

/// distill_loss between the flattened output and a fixed teacher.
Loss distill_loss_against(const Tensor3d& teacher);

struct GradCheckResult {
  double max_rel_error = 0.0;
  Matrix<double> adapter_grad;
  Tensor3d kernel_grad;
};

/// Analytic gradients of loss(scaffold_forward(...)) with respect to the
/// adapter and the depthwise kernels. Kernel entries off the middle
/// row/column get zero.
GradCheckResult analytic_gradients(const ScaffoldedLayer<double>& layer, const Tensor3d& input, const Loss& loss,
                                   int stride, int padding);

/// Compares analytic gradients to central differences with step h. The error
/// for one entry is |a - n| / max(1, |a|, |n|).
GradCheckResult grad_check(const ScaffoldedLayer<double>& layer, const Tensor3d& input, const Loss& loss,
                           int stride = 1, int padding = 0, double h = 1e-5);

}  // namespace fusesim
