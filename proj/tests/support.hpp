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
#include <random>
#include <string>
#include <vector>

#include "fusesim/lowering.hpp"
#include "fusesim/tensor.hpp"
#include "fusesim/topology.hpp"

namespace fusesim::testing {

inline std::string data_path(const std::string& rel) { return std::string(FUSESIM_DATA_DIR) + "/" + rel; }

inline std::string topology_path(const std::string& net) { return data_path("topologies/" + net + ".csv"); }

inline const std::vector<std::string>& golden_networks() {
  static const std::vector<std::string> nets = {"mobilenet_v1", "mobilenet_v2", "mobilenet_v3_large",
                                                "mobilenet_v3_small", "mnasnet_b1"};
  return nets;
}

/// Small deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t next() { return rng_(); }
  int range(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin() { return (rng_() >> 63) != 0; }
  double real(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(range(0, static_cast<int>(v.size()) - 1))];
  }

  /// Any valid layer of the given kind with small dims.
  LayerDescriptor layer(LayerKind kind, int max_hw = 12, int max_c = 8) {
    LayerDescriptor l;
    l.name = "l" + std::to_string(counter_++);
    l.kind = kind;
    const bool unit = kind == LayerKind::Pointwise || kind == LayerKind::Gemm;
    l.kernel = unit ? 1 : range(1, 5);
    l.stride = unit ? 1 : range(1, 2);
    l.padding = unit ? 0 : range(0, l.kernel - 1);
    l.ifmap_h = range(std::max(1, l.kernel - 2 * l.padding), max_hw);
    l.ifmap_w = range(std::max(1, l.kernel - 2 * l.padding), max_hw);
    l.in_channels = range(1, max_c);
    l.out_channels = (kind == LayerKind::Depthwise || is_fuse(kind)) ? l.in_channels : range(1, max_c);
    return l;
  }

  Tensor3i tensor(int c, int h, int w, int lo = -9, int hi = 9) {
    Tensor3i t(c, h, w);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = range(lo, hi);
    return t;
  }

  Tensor3d real_tensor(int c, int h, int w) {
    Tensor3d t(c, h, w);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = real(-1.0, 1.0);
    return t;
  }

  Matrix<std::int64_t> matrix(Eigen::Index r, Eigen::Index c, int lo = -9, int hi = 9) {
    Matrix<std::int64_t> m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = range(lo, hi);
    return m;
  }

  ArrayConfig array(Dataflow df) {
    ArrayConfig cfg;
    cfg.rows = range(1, 8);
    cfg.cols = range(1, 8);
    cfg.dataflow = df;
    cfg.stos_strategy = pick(std::vector<MappingStrategy>{MappingStrategy::SpatialFirst, MappingStrategy::ChannelsFirst,
                                                          MappingStrategy::Hybrid});
    cfg.ifmap_sram_bytes = pick(std::vector<std::int64_t>{64, 256, 4096});
    cfg.weight_sram_bytes = pick(std::vector<std::int64_t>{64, 256, 4096});
    cfg.ofmap_sram_bytes = pick(std::vector<std::int64_t>{64, 256, 4096});
    cfg.element_bytes = range(1, 1);
    cfg.dram_bw_cap = coin() ? 0 : range(1, 16);
    return cfg;
  }

 private:
  std::mt19937_64 rng_;
  int counter_ = 0;
};

}  // namespace fusesim::testing
