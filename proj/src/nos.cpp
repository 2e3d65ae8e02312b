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

#include "fusesim/nos.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fusesim {

std::vector<ChannelRole> half_roles(int channels) {
  if (channels < 0) throw std::invalid_argument("negative channel count");
  std::vector<ChannelRole> roles(static_cast<std::size_t>(channels), ChannelRole::ColFilter);
  std::fill_n(roles.begin(), (channels + 1) / 2, ChannelRole::RowFilter);
  return roles;
}

std::vector<LayerChoice> sample_config(std::size_t num_layers, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LayerChoice> out(num_layers);
  for (auto& c : out) c = (rng() >> 63) ? LayerChoice::FuSe : LayerChoice::Depthwise;
  return out;
}

double distill_loss(const std::vector<double>& student, const std::vector<double>& teacher) {
  if (student.size() != teacher.size()) throw std::invalid_argument("logit vectors differ in length");
  if (student.empty()) throw std::invalid_argument("empty logit vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    const double d = student[i] - teacher[i];
    s += d * d;
  }
  return s / static_cast<double>(student.size());
}

Loss linear_loss(const Tensor3d& weights) {
  return {[weights](const Tensor3d& y) {
            if (!y.same_shape(weights)) throw ShapeError("loss weights do not match the output");
            return weights.data().dot(y.data());
          },
          [weights](const Tensor3d&) { return weights; }};
}

Loss distill_loss_against(const Tensor3d& teacher) {
  return {[teacher](const Tensor3d& y) {
            if (!y.same_shape(teacher)) throw ShapeError("teacher does not match the output");
            return (y.data() - teacher.data()).squaredNorm() / static_cast<double>(y.size());
          },
          [teacher](const Tensor3d& y) {
            Tensor3d g = y;
            g.data() = 2.0 * (y.data() - teacher.data()) / static_cast<double>(y.size());
            return g;
          }};
}

GradCheckResult analytic_gradients(const ScaffoldedLayer<double>& layer, const Tensor3d& input, const Loss& loss,
                                   int stride, int padding) {
  const Tensor3d y = scaffold_forward(layer, input, stride, padding);
  const Tensor3d g = loss.grad(y);
  if (!g.same_shape(y)) throw ShapeError("loss gradient has the wrong shape");
  const int k = layer.k();
  const int mid = (k - 1) / 2;
  GradCheckResult r;
  r.adapter_grad = Matrix<double>::Zero(k, k);
  r.kernel_grad = Tensor3d(layer.channels(), k, k);
  int o = 0;
  for (ChannelRole want : {ChannelRole::RowFilter, ChannelRole::ColFilter}) {
    for (int c = 0; c < layer.channels(); ++c) {
      if (layer.roles[static_cast<std::size_t>(c)] != want) continue;
      const bool row = want == ChannelRole::RowFilter;
      // dL/dfilter[t] = sum over outputs of g * input tap t.
      Eigen::VectorXd df = Eigen::VectorXd::Zero(k);
      for (int yy = 0; yy < y.height(); ++yy) {
        for (int xx = 0; xx < y.width(); ++xx) {
          const double go = g(o, yy, xx);
          for (int t = 0; t < k; ++t) {
            const double in = row ? input.padded(c, yy * stride + mid - padding, xx * stride - padding + t)
                                  : input.padded(c, yy * stride - padding + t, xx * stride + mid - padding);
            df[t] += go * in;
          }
        }
      }
      const auto plane = layer.kernel.channel(c);
      const Eigen::VectorXd base = row ? Eigen::VectorXd(plane.col(mid)) : Eigen::VectorXd(plane.row(mid).transpose());
      r.adapter_grad += df * base.transpose();
      const Eigen::VectorXd dbase = layer.adapter.transpose() * df;
      auto gp = r.kernel_grad.channel(c);
      if (row) {
        gp.col(mid) = dbase;
      } else {
        gp.row(mid) = dbase.transpose();
      }
      ++o;
    }
  }
  return r;
}

GradCheckResult grad_check(const ScaffoldedLayer<double>& layer, const Tensor3d& input, const Loss& loss, int stride,
                           int padding, double h) {
  GradCheckResult r = analytic_gradients(layer, input, loss, stride, padding);
  auto rel = [](double a, double n) { return std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)}); };
  auto eval = [&](const ScaffoldedLayer<double>& l) { return loss.value(scaffold_forward(l, input, stride, padding)); };
  ScaffoldedLayer<double> probe = layer;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < layer.adapter.size(); ++i) {
    const double v = layer.adapter.data()[i];
    probe.adapter.data()[i] = v + h;
    const double up = eval(probe);
    probe.adapter.data()[i] = v - h;
    const double down = eval(probe);
    probe.adapter.data()[i] = v;
    worst = std::max(worst, rel(r.adapter_grad.data()[i], (up - down) / (2.0 * h)));
  }
  for (Eigen::Index i = 0; i < layer.kernel.size(); ++i) {
    const double v = layer.kernel.data()[i];
    probe.kernel.data()[i] = v + h;
    const double up = eval(probe);
    probe.kernel.data()[i] = v - h;
    const double down = eval(probe);
    probe.kernel.data()[i] = v;
    worst = std::max(worst, rel(r.kernel_grad.data()[i], (up - down) / (2.0 * h)));
  }
  r.max_rel_error = worst;
  return r;
}

}  // namespace fusesim
