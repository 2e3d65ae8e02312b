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

#include "fusesim/format.hpp"
#include "fusesim/nos.hpp"
#include "support.hpp"

using namespace fusesim;
using fusesim::testing::Gen;

namespace {

using Md = Matrix<double>;

ScaffoldedLayer<double> random_layer(Gen& g, int c, int k) {
  ScaffoldedLayer<double> l;
  l.kernel = g.real_tensor(c, k, k);
  l.adapter = Md(k, k);
  for (Eigen::Index i = 0; i < l.adapter.size(); ++i) l.adapter.data()[i] = g.real(-1.0, 1.0);
  l.roles = half_roles(c);
  return l;
}

ScaffoldedLayer<double> counting_layer() {
  // Both channels hold [[1,2,3],[4,5,6],[7,8,9]].
  ScaffoldedLayer<double> l;
  l.kernel = Tensor3d(2, 3, 3);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 9; ++i) l.kernel(c, i / 3, i % 3) = i + 1;
  l.adapter = Md::Identity(3, 3);
  l.roles = half_roles(2);
  return l;
}

double max_abs_diff(const Tensor3d& a, const Tensor3d& b) {
  REQUIRE(a.same_shape(b));
  return (a.data() - b.data()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("nos") {
  TEST_CASE("identity adapter on the 1..9 kernel gives (2,5,8) and (4,5,6)") {
    const auto f = project(counting_layer());
    REQUIRE(f.row.rows() == 1);
    REQUIRE(f.col.rows() == 1);
    CHECK(f.row(0, 0) == 2);
    CHECK(f.row(0, 1) == 5);
    CHECK(f.row(0, 2) == 8);
    CHECK(f.col(0, 0) == 4);
    CHECK(f.col(0, 1) == 5);
    CHECK(f.col(0, 2) == 6);
  }

  TEST_CASE("identity adapter returns the middle column; zero adapter returns zeros") {
    Gen g(50);
    auto l = random_layer(g, 5, 5);
    l.adapter = Md::Identity(5, 5);
    const auto f = project(l);
    for (std::size_t i = 0; i < f.row_channels.size(); ++i)
      for (int t = 0; t < 5; ++t) CHECK(f.row(static_cast<Eigen::Index>(i), t) == l.kernel(f.row_channels[i], t, 2));
    l.adapter = Md::Zero(5, 5);
    const auto z = project(l);
    CHECK(z.row.isZero());
    CHECK(z.col.isZero());
  }

  TEST_CASE("scaffold validation") {
    Gen g(51);
    auto even = random_layer(g, 4, 3);
    even.kernel = g.real_tensor(4, 4, 4);
    even.adapter = Md::Identity(4, 4);
    CHECK_THROWS_AS(project(even), std::invalid_argument);
    auto bad_roles = random_layer(g, 4, 3);
    bad_roles.roles = {ChannelRole::RowFilter, ChannelRole::RowFilter, ChannelRole::RowFilter, ChannelRole::ColFilter};
    CHECK_THROWS_AS(project(bad_roles), std::invalid_argument);
    auto nan = random_layer(g, 4, 3);
    nan.adapter(1, 1) = std::nan("");
    CHECK_THROWS_AS(project(nan), std::invalid_argument);
    auto shape = random_layer(g, 4, 3);
    shape.adapter = Md::Identity(2, 2);
    CHECK_THROWS_AS(project(shape), std::invalid_argument);
  }

  TEST_CASE("collapse: 6 parameters for K=3, C=2; K^2 extra while scaffolded") {
    const auto l = counting_layer();
    CHECK(collapse(l).params() == 6);
    CHECK(l.trainable_params() == 2 * 9 + 9);
    Gen g(52);
    for (int i = 0; i < 20; ++i) {
      const int c = g.range(2, 16), k = 2 * g.range(0, 3) + 1;
      const auto r = random_layer(g, c, k);
      CHECK(r.trainable_params() - std::int64_t{c} * k * k == std::int64_t{k} * k);
      CHECK(collapse(r).params() == std::int64_t{k} * c);
    }
  }

  TEST_CASE("property: collapsed forward equals the scaffold forward") {
    Gen g(53);
    for (int i = 0; i < 100; ++i) {
      const int c = g.range(2, 6), k = 2 * g.range(0, 2) + 1;
      const int s = g.range(1, 2), p = g.range(0, k - 1);
      auto l = random_layer(g, c, k);
      if (g.coin()) std::reverse(l.roles.begin(), l.roles.end());
      const auto in = g.real_tensor(c, g.range(k, 8), g.range(k, 8));
      const auto a = fuse_forward(collapse(l), in, s, p);
      const auto b = scaffold_forward(l, in, s, p);
      CHECK(max_abs_diff(a, b) <= 1e-12);
      // Collapsing is idempotent: the same filters come out twice.
      const auto f1 = collapse(l), f2 = collapse(l);
      CHECK(f1.row == f2.row);
      CHECK(f1.col == f2.col);
    }
  }

  TEST_CASE("property: projection is linear in the adapter and in the kernels") {
    Gen g(54);
    for (int i = 0; i < 100; ++i) {
      const int c = g.range(2, 6), k = 2 * g.range(0, 2) + 1;
      const auto l1 = random_layer(g, c, k);
      auto l2 = random_layer(g, c, k);
      l2.adapter = l1.adapter;
      l2.roles = l1.roles;
      const double alpha = g.real(-3.0, 3.0);
      auto scaled = l1;
      scaled.adapter *= alpha;
      const auto p1 = project(l1), p2 = project(l2), ps = project(scaled);
      CHECK((ps.row - alpha * p1.row).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((ps.col - alpha * p1.col).cwiseAbs().maxCoeff() <= 1e-12);
      auto sum = l1;
      sum.kernel.data() = l1.kernel.data() + l2.kernel.data();
      const auto pp = project(sum);
      CHECK((pp.row - p1.row - p2.row).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((pp.col - p1.col - p2.col).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("FuSe path on half roles matches fuseconv Half") {
    Gen g(55);
    const auto l = random_layer(g, 5, 3);
    const auto in = g.real_tensor(5, 6, 7);
    const auto f = collapse(l);
    const auto want = fuseconv(in, f.row, f.col, FuseVariant::Half, 1, 1);
    CHECK(max_abs_diff(scaffold_forward(l, in, 1, 1), want) <= 1e-12);
  }

  TEST_CASE("sample_config: reproducible, empty for zero layers, fair per layer") {
    CHECK(sample_config(0, 7).empty());
    CHECK(sample_config(12, 7) == sample_config(12, 7));
    CHECK(sample_config(64, 7) != sample_config(64, 8));
    constexpr int kDraws = 10000, kLayers = 8;
    std::vector<int> fuse(kLayers, 0);
    for (int s = 0; s < kDraws; ++s) {
      const auto cfg = sample_config(kLayers, static_cast<std::uint64_t>(s));
      for (int i = 0; i < kLayers; ++i) fuse[static_cast<std::size_t>(i)] += cfg[static_cast<std::size_t>(i)] == LayerChoice::FuSe;
    }
    for (int n : fuse) {
      CHECK(n >= 0.47 * kDraws);
      CHECK(n <= 0.53 * kDraws);
    }
  }

  TEST_CASE("sampled forward: depthwise choice runs the depthwise kernels") {
    Gen g(56);
    const auto l = random_layer(g, 4, 3);
    const auto in = g.real_tensor(4, 6, 6);
    CHECK(max_abs_diff(sampled_forward(l, LayerChoice::Depthwise, in, 1, 1), depthwise(in, l.kernel, 1, 1)) == 0.0);
    CHECK(max_abs_diff(sampled_forward(l, LayerChoice::FuSe, in, 1, 1), scaffold_forward(l, in, 1, 1)) == 0.0);
  }

  TEST_CASE("distillation loss is the mean squared logit difference") {
    CHECK(distill_loss({1.0, -2.0, 3.5}, {1.0, -2.0, 3.5}) == 0.0);
    CHECK(distill_loss({0.0, 0.0}, {2.0, 0.0}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(distill_loss({1.0}, {1.0, 2.0}), std::invalid_argument);
  }

  TEST_CASE("gradient check: linear loss with identity adapter is exact") {
    Gen g(57);
    auto l = random_layer(g, 4, 3);
    l.adapter = Md::Identity(3, 3);
    const auto in = g.real_tensor(4, 6, 6);
    const auto r = grad_check(l, in, linear_loss(g.real_tensor(4, 6, 6)), 1, 1);
    CHECK(r.max_rel_error < 1e-9);
  }

  TEST_CASE("gradient check: random distillation cases stay under 1e-4") {
    Gen g(58);
    for (int i = 0; i < 30; ++i) {
      const int c = g.range(2, 5), k = 2 * g.range(0, 2) + 1, s = g.range(1, 2), p = g.range(0, k - 1);
      const auto l = random_layer(g, c, k);
      const auto in = g.real_tensor(c, g.range(k, 7), g.range(k, 7));
      const auto y = scaffold_forward(l, in, s, p);
      const auto teacher = g.real_tensor(y.channels(), y.height(), y.width());
      CHECK(grad_check(l, in, distill_loss_against(teacher), s, p).max_rel_error < 1e-4);
    }
  }

  TEST_CASE("zero input gives a zero adapter gradient") {
    Gen g(59);
    const auto l = random_layer(g, 4, 3);
    const Tensor3d zero(4, 5, 5);
    const auto r = analytic_gradients(l, zero, distill_loss_against(g.real_tensor(4, 5, 5)), 1, 1);
    CHECK(r.adapter_grad.isZero());
  }

  TEST_CASE("kernel gradient is zero off the middle row and column") {
    Gen g(60);
    const auto l = random_layer(g, 4, 5);
    const auto r = analytic_gradients(l, g.real_tensor(4, 7, 7), linear_loss(g.real_tensor(4, 7, 7)), 1, 2);
    for (int c = 0; c < 4; ++c)
      for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
          if (y != 2 && x != 2) CHECK(r.kernel_grad(c, y, x) == 0.0);
  }

  TEST_CASE("scaffold JSON round-trips exactly") {
    Gen g(61);
    auto l = random_layer(g, 5, 3);
    std::swap(l.roles[0], l.roles[4]);
    const auto back = scaffold_from_json(Json::parse(dump(scaffold_to_json(l))));
    CHECK(back.kernel == l.kernel);
    CHECK(back.adapter == l.adapter);
    CHECK(back.roles == l.roles);
  }
}
