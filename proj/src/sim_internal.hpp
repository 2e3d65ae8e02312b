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

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fusesim/sim.hpp"

namespace fusesim::detail {

struct GemmFold {
  std::int64_t group = 0;
  std::int64_t cf = 0;  // column-fold index
  std::int64_t rf = 0;  // row-fold index (output rows for OS, inner for WS)
  std::int64_t nrf = 1;
  std::int64_t ru = 0;
  std::int64_t su = 0;
  std::int64_t t = 0;  // accumulation length (OS) or stream length (WS)
};

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

/// Folds in execution order: group, then column tile, then row tile.
template <class F>
void for_each_gemm_fold(const GemmWorkload& w, const ArrayConfig& cfg, Dataflow df, F&& f) {
  const bool ws = df == Dataflow::WeightStationary;
  const std::int64_t row_dim = ws ? w.inner : w.rows;
  const std::int64_t t = ws ? w.rows : w.inner;
  const std::int64_t nrf = ceil_div(row_dim, cfg.rows);
  const std::int64_t ncf = ceil_div(w.cols, cfg.cols);
  for (std::int64_t g = 0; g < w.groups; ++g) {
    for (std::int64_t cf = 0; cf < ncf; ++cf) {
      const std::int64_t su = std::min<std::int64_t>(cfg.cols, w.cols - cf * cfg.cols);
      for (std::int64_t rf = 0; rf < nrf; ++rf) {
        const std::int64_t ru = std::min<std::int64_t>(cfg.rows, row_dim - rf * cfg.rows);
        f(GemmFold{g, cf, rf, nrf, ru, su, t});
      }
    }
  }
}

struct DramPlan {
  std::int64_t ifmap = 0;
  std::int64_t weight = 0;
  std::int64_t psum = 0;  // partial sums re-read (WS spill)
  std::int64_t write = 0;
  std::int64_t reads() const { return ifmap + weight + psum; }
};

inline std::int64_t apportion(std::int64_t total, std::int64_t n, std::int64_t start, std::int64_t len) {
  return total * (start + len) / n - total * start / n;
}

DramPlan gemm_dram(const GemmWorkload& w, const ArrayConfig& cfg, Dataflow df, const GemmFold& f);
std::vector<DramPlan> stos_dram(const SliceMap& map, const ArrayConfig& cfg);

/// Orders folds in time with double-buffered DRAM prefetch: data for fold f
/// streams in while fold f-1 computes; a bandwidth cap can stall fold f.
class Sequencer {
 public:
  Sequencer(std::int64_t cap, CycleTraffic* traffic) : cap_(cap), traffic_(traffic) {}

  /// Returns the start cycle of the next fold.
  std::int64_t begin(std::int64_t read_bytes) {
    const std::int64_t pf_start = first_ ? 0 : std::max(prev_start_, pf_end_);
    const std::int64_t dur = cap_ > 0 ? ceil_div(read_bytes, cap_) : 0;
    pf_end_ = pf_start + dur;
    if (traffic_ && read_bytes > 0) {
      if (cap_ > 0) {
        std::int64_t left = read_bytes;
        for (std::int64_t c = pf_start; left > 0; ++c) {
          const std::int64_t b = std::min(cap_, left);
          traffic_->add(c, Interface::Dram, Direction::Read, b);
          left -= b;
        }
      } else {
        traffic_->add(pf_start, Interface::Dram, Direction::Read, read_bytes);
      }
    }
    const std::int64_t start = std::max(end_, pf_end_);
    stalls_ += start - end_;
    prev_start_ = start;
    first_ = false;
    return start;
  }

  void end(std::int64_t start, std::int64_t len, std::int64_t write_bytes) {
    end_ = start + len;
    if (traffic_ && write_bytes > 0) traffic_->add(end_ - 1, Interface::Dram, Direction::Write, write_bytes);
  }

  std::int64_t cycles() const { return end_; }
  std::int64_t stalls() const { return stalls_; }

 private:
  std::int64_t cap_;
  CycleTraffic* traffic_;
  bool first_ = true;
  std::int64_t prev_start_ = 0;
  std::int64_t pf_end_ = 0;
  std::int64_t end_ = 0;
  std::int64_t stalls_ = 0;
};

/// Valid input element indices a ST-OS row reads, per polyphase chain, with
/// the cycle (relative to fold start) each one is injected.
struct StosInjection {
  int chain;
  int element;     // index within the chain
  int coordinate;  // unpadded position along the slice axis, may be out of range
  std::int64_t cycle;
};

/// Elements chain q must receive for a row producing `len` outputs.
inline int stos_chain_need(int len, int kernel, int stride, int q) {
  if (q >= kernel) return 0;
  return len + (kernel - 1 - q) / stride;
}

inline std::int64_t stos_injection_cycle(int element, std::int64_t s_used, int stride) {
  if (element < s_used) return element;
  return s_used - 1 + std::int64_t{stride} * (element - s_used + 1);
}

/// True when the slice's source line lies inside the feature map.
bool slice_line_valid(const SliceMap& map, const Slice& s);

/// Unpadded coordinate along the slice axis of chain element j.
inline int stos_coordinate(const Slice& s, const FoldEntry& e, int q, int j) {
  return e.out_start * s.stride + j * s.stride + q - s.padding;
}

inline int slice_axis_len(const SliceMap& map, const Slice& s) {
  return s.orientation == Orientation::Row ? map.in_w : map.in_h;
}

void check_tiles(const ArrayConfig& cfg);

}  // namespace fusesim::detail
