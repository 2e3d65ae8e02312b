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

#include <doctest.h>

#include "fusesim/lowering.hpp"
#include "fusesim/oracle.hpp"
#include "support.hpp"

using namespace fusesim;
using fusesim::testing::Gen;

namespace {

using Mi = Matrix<std::int64_t>;

/// Second, independently written convolution: gathers a padded copy first and
/// indexes it directly.
Tensor3i naive_conv(const Tensor3i& in, const std::vector<Tensor3i>& f, int stride, int pad) {
  const int c = in.channels(), h = in.height(), w = in.width(), k = f[0].height();
  Tensor3i p(c, h + 2 * pad, w + 2 * pad);
  for (int z = 0; z < c; ++z)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) p(z, y + pad, x + pad) = in(z, y, x);
  const int m = (h + 2 * pad - k) / stride + 1, n = (w + 2 * pad - k) / stride + 1;
  Tensor3i out(static_cast<int>(f.size()), m, n);
  for (std::size_t o = 0; o < f.size(); ++o)
    for (int y = 0; y < m; ++y)
      for (int x = 0; x < n; ++x) {
        std::int64_t s = 0;
        for (int z = 0; z < c; ++z)
          for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) s += f[o](z, a, b) * p(z, y * stride + a, x * stride + b);
        out(static_cast<int>(o), y, x) = s;
      }
  return out;
}

/// 1D sliding dot product.
std::vector<std::int64_t> conv1d(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& f, int stride,
                                 int pad, int outputs) {
  std::vector<std::int64_t> y(static_cast<std::size_t>(outputs), 0);
  for (int o = 0; o < outputs; ++o) {
    for (std::size_t t = 0; t < f.size(); ++t) {
      const int i = o * stride - pad + static_cast<int>(t);
      if (i >= 0 && i < static_cast<int>(x.size())) y[static_cast<std::size_t>(o)] += f[t] * x[static_cast<std::size_t>(i)];
    }
  }
  return y;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("scalar conv: [5] * [3] = [15]") {
    const Tensor3i in = Tensor3i::Constant(1, 1, 1, 5);
    const auto out = conv2d(in, {Tensor3i::Constant(1, 1, 1, 3)}, 1, 0);
    CHECK(out == Tensor3i::Constant(1, 1, 1, 15));
  }

  TEST_CASE("all-ones 4x4 with all-ones 3x3 gives a 2x2 of nines") {
    const auto out = conv2d(Tensor3i::Constant(1, 4, 4, 1), {Tensor3i::Constant(1, 3, 3, 1)}, 1, 0);
    CHECK(out == Tensor3i::Constant(1, 2, 2, 9));
  }

  TEST_CASE("conv2d agrees with an independent loop nest") {
    Gen g(30);
    for (int i = 0; i < 100; ++i) {
      const int k = g.range(1, 4), s = g.range(1, 2), p = g.range(0, k - 1);
      const int c = g.range(1, 3);
      const auto in = g.tensor(c, g.range(k, 7), g.range(k, 7));
      std::vector<Tensor3i> f;
      for (int o = g.range(1, 3); o > 0; --o) f.push_back(g.tensor(c, k, k));
      CHECK(conv2d(in, f, s, p) == naive_conv(in, f, s, p));
      CHECK(conv2d_im2col(in, f, s, p) == conv2d(in, f, s, p));
    }
  }

  TEST_CASE("conv2d shape errors") {
    CHECK_THROWS_AS(conv2d(Tensor3i(2, 4, 4), {Tensor3i(1, 3, 3)}, 1, 0), ShapeError);
    CHECK_THROWS_AS(conv2d(Tensor3i(1, 4, 4), {}, 1, 0), ShapeError);
    CHECK_THROWS_AS(depthwise(Tensor3i(2, 4, 4), Tensor3i(3, 3, 3), 1, 0), ShapeError);
    CHECK_THROWS_AS(pointwise(Tensor3i(2, 4, 4), Matrix<std::int64_t>(3, 3)), ShapeError);
  }

  TEST_CASE("depthwise with C=1 equals conv2d with one filter") {
    Gen g(31);
    const auto in = g.tensor(1, 6, 6);
    const auto k = g.tensor(1, 3, 3);
    CHECK(depthwise(in, k, 1, 1) == conv2d(in, {k}, 1, 1));
  }

  TEST_CASE("delta kernel with K/2 padding is the identity") {
    Gen g(32);
    const auto in = g.tensor(3, 5, 6);
    Tensor3i k(3, 5, 5);
    for (int c = 0; c < 3; ++c) k(c, 2, 2) = 1;
    CHECK(depthwise(in, k, 1, 2) == in);
  }

  TEST_CASE("depthwise matches the im2col GEMM path") {
    Gen g(33);
    for (int i = 0; i < 100; ++i) {
      const int k = g.range(1, 5), s = g.range(1, 2), p = g.range(0, k - 1);
      const auto in = g.tensor(g.range(1, 4), g.range(k, 9), g.range(k, 9));
      const auto ker = g.tensor(in.channels(), k, k);
      CHECK(depthwise_im2col(in, ker, s, p) == depthwise(in, ker, s, p));
    }
  }

  TEST_CASE("pointwise: identity, channel sum and dense GEMM") {
    Gen g(34);
    const auto in = g.tensor(4, 3, 5);
    CHECK(pointwise(in, Mi(Mi::Identity(4, 4))) == in);
    const auto sum = pointwise(in, Mi(Mi::Constant(1, 4, 1)));
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 5; ++x) CHECK(sum(0, y, x) == in(0, y, x) + in(1, y, x) + in(2, y, x) + in(3, y, x));
    const auto w = g.matrix(6, 4);
    const auto out = pointwise(in, w);
    // (C' x C) * (C x HW) with the channel planes as rows.
    const Matrix<std::int64_t> flat = Eigen::Map<const Matrix<std::int64_t>>(in.data().data(), 15, 4).transpose();
    const Matrix<std::int64_t> ref = w * flat;
    for (int o = 0; o < 6; ++o)
      for (int i = 0; i < 15; ++i) CHECK(out(o, i / 5, i % 5) == ref(o, i));
  }

  TEST_CASE("fuseconv with unit 1-tap filters is the identity per group") {
    Gen g(35);
    const auto in = g.tensor(5, 4, 6);
    const auto out = fuseconv(in, Mi(Mi::Ones(3, 1)), Mi(Mi::Ones(2, 1)), FuseVariant::Half,
                              1, 0);
    CHECK(out == in);
  }

  TEST_CASE("Half on C=2: row output is 1D conv of rows, col output of columns") {
    Gen g(36);
    for (int pad : {0, 1}) {
      const auto in = g.tensor(2, 4, 4);
      const auto rf = g.matrix(1, 3);
      const auto cf = g.matrix(1, 3);
      const auto out = fuseconv(in, rf, cf, FuseVariant::Half, 1, pad);
      const int m = 4 + 2 * pad - 2;
      REQUIRE(out.channels() == 2);
      REQUIRE(out.height() == m);
      const std::vector<std::int64_t> fr{rf(0, 0), rf(0, 1), rf(0, 2)}, fc{cf(0, 0), cf(0, 1), cf(0, 2)};
      for (int y = 0; y < m; ++y) {
        const int src = y + 1 - pad;
        std::vector<std::int64_t> line(4, 0);
        if (src >= 0 && src < 4)
          for (int x = 0; x < 4; ++x) line[static_cast<std::size_t>(x)] = in(0, src, x);
        const auto ref = conv1d(line, fr, 1, pad, m);
        for (int x = 0; x < m; ++x) CHECK(out(0, y, x) == ref[static_cast<std::size_t>(x)]);
      }
      for (int x = 0; x < m; ++x) {
        const int src = x + 1 - pad;
        std::vector<std::int64_t> line(4, 0);
        if (src >= 0 && src < 4)
          for (int y = 0; y < 4; ++y) line[static_cast<std::size_t>(y)] = in(1, y, src);
        const auto ref = conv1d(line, fc, 1, pad, m);
        for (int y = 0; y < m; ++y) CHECK(out(1, y, x) == ref[static_cast<std::size_t>(y)]);
      }
    }
  }

  TEST_CASE("Full on a 3x3 two-channel example, unrolled by hand") {
    // Channel 0 = 1..9, channel 1 = 10..90; row filter [1 0 -1], col filter [1 1 1]; pad 1.
    Tensor3i in(2, 3, 3);
    for (int i = 0; i < 9; ++i) {
      in(0, i / 3, i % 3) = i + 1;
      in(1, i / 3, i % 3) = 10 * (i + 1);
    }
    Matrix<std::int64_t> rf(2, 3), cf(2, 3);
    rf << 1, 0, -1, 1, 0, -1;
    cf << 1, 1, 1, 1, 1, 1;
    const auto out = fuseconv(in, rf, cf, FuseVariant::Full, 1, 1);
    REQUIRE(out.channels() == 4);
    // Row path on channel 0, row 0 = [1 2 3]: [0-2, 1-3, 2-0] = [-2, -2, 2].
    CHECK(out(0, 0, 0) == -2);
    CHECK(out(0, 0, 1) == -2);
    CHECK(out(0, 0, 2) == 2);
    CHECK(out(1, 2, 1) == 70 - 90);
    // Column path on channel 0, column 1 = [2 5 8]: [7, 15, 13].
    CHECK(out(2, 0, 1) == 7);
    CHECK(out(2, 1, 1) == 15);
    CHECK(out(2, 2, 1) == 13);
    CHECK(out(3, 1, 0) == 10 + 40 + 70);
    // The first two channels equal the Half row path run over both channels.
    const auto half0 = fuseconv(in, Mi(rf.topRows(1)), Mi(cf.topRows(1)), FuseVariant::Half, 1, 1);
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 3; ++x) CHECK(out(0, y, x) == half0(0, y, x));
  }

  TEST_CASE("fuseconv group errors") {
    const Tensor3i in(4, 5, 5);
    CHECK_THROWS_AS(fuseconv(in, Matrix<std::int64_t>(1, 3), Matrix<std::int64_t>(1, 3), FuseVariant::Half, 1, 1),
                    ShapeError);
    CHECK_THROWS_AS(fuseconv(in, Matrix<std::int64_t>(2, 3), Matrix<std::int64_t>(2, 3), FuseVariant::Full, 1, 1),
                    ShapeError);
    CHECK_THROWS_AS(fuseconv(in, Matrix<std::int64_t>(2, 3), Matrix<std::int64_t>(2, 5), FuseVariant::Half, 1, 1),
                    ShapeError);
  }

  TEST_CASE("property: fuseconv output dims equal depthwise output dims") {
    Gen g(37);
    for (int i = 0; i < 300; ++i) {
      const int k = g.range(1, 5), s = g.range(1, 3), p = g.range(0, k - 1);
      const int c = g.range(2, 6);
      const auto in = g.tensor(c, g.range(k, 10), g.range(k, 10));
      const int cr = (c + 1) / 2;
      const auto h = fuseconv(in, g.matrix(cr, k), g.matrix(c - cr, k), FuseVariant::Half, s, p);
      const auto d = depthwise(in, g.tensor(c, k, k), s, p);
      CHECK(h.channels() == c);
      CHECK(h.height() == d.height());
      CHECK(h.width() == d.width());
      const auto f = fuseconv(in, g.matrix(c, k), g.matrix(c, k), FuseVariant::Full, s, p);
      CHECK(f.channels() == 2 * c);
      CHECK(f.height() == d.height());
    }
  }
}
