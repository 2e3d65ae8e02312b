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
#include <string>

#include <Eigen/Dense>

namespace fusesim {

/// Dense (channels, height, width) tensor, row-major within a channel.
template <class Scalar>
class Tensor3 {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using PlaneMap = Eigen::Map<Plane>;
  using ConstPlaneMap = Eigen::Map<const Plane>;

  Tensor3() = default;
  Tensor3(int channels, int height, int width)
      : channels_(channels), height_(height), width_(width) {
    if (channels < 0 || height < 0 || width < 0) throw std::invalid_argument("negative tensor dims");
    data_ = Vector::Zero(Eigen::Index{channels} * height * width);
  }
  Tensor3(int channels, int height, int width, Vector data)
      : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != Eigen::Index{channels} * height * width) {
      throw std::invalid_argument("tensor data length does not match dims");
    }
  }

  static Tensor3 Constant(int channels, int height, int width, Scalar value) {
    Tensor3 t(channels, height, width);
    t.data_.setConstant(value);
    return t;
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  Eigen::Index size() const { return data_.size(); }

  Scalar& operator()(int c, int y, int x) { return data_[index(c, y, x)]; }
  const Scalar& operator()(int c, int y, int x) const { return data_[index(c, y, x)]; }

  /// Value with implicit zero padding outside the spatial extent.
  Scalar padded(int c, int y, int x) const {
    if (y < 0 || y >= height_ || x < 0 || x >= width_) return Scalar(0);
    return data_[index(c, y, x)];
  }

  PlaneMap channel(int c) { return PlaneMap(data_.data() + plane() * c, height_, width_); }
  ConstPlaneMap channel(int c) const { return ConstPlaneMap(data_.data() + plane() * c, height_, width_); }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  bool same_shape(const Tensor3& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }
  bool operator==(const Tensor3& o) const { return same_shape(o) && data_ == o.data_; }

  template <class Other>
  Tensor3<Other> cast() const {
    return Tensor3<Other>(channels_, height_, width_, data_.template cast<Other>());
  }

 private:
  Eigen::Index plane() const { return Eigen::Index{height_} * width_; }
  Eigen::Index index(int c, int y, int x) const { return plane() * c + Eigen::Index{y} * width_ + x; }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  Vector data_;
};

using Tensor3i = Tensor3<std::int64_t>;
using Tensor3d = Tensor3<double>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace fusesim
