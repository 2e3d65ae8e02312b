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

#include <algorithm>
#include <optional>
#include <vector>

#include "fusesim/sim.hpp"
#include "sim_internal.hpp"

namespace fusesim {

namespace {

using detail::GemmFold;
using detail::Sequencer;

constexpr std::int64_t kEmpty = -1;

/// R x S grid of operand tags.
struct Grid {
  Grid(int r, int s) : rows(r), cols(s), v(static_cast<std::size_t>(r) * s, kEmpty) {}
  std::int64_t& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  bool empty() const {
    return std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == kEmpty; });
  }
  void shift_right() {
    for (int r = 0; r < rows; ++r) {
      for (int c = cols - 1; c > 0; --c) (*this)(r, c) = (*this)(r, c - 1);
      (*this)(r, 0) = kEmpty;
    }
  }
  void shift_down() {
    for (int r = rows - 1; r > 0; --r) {
      for (int c = 0; c < cols; ++c) (*this)(r, c) = (*this)(r - 1, c);
    }
    for (int c = 0; c < cols; ++c) (*this)(0, c) = kEmpty;
  }
  int rows, cols;
  std::vector<std::int64_t> v;
};

/// One OS fold; returns its length and adds MACs performed.
std::int64_t replay_os_fold(const GemmFold& f, const ArrayConfig& cfg, std::int64_t t0, CycleTraffic& tr,
                            std::int64_t& macs) {
  const int R = cfg.rows, S = cfg.cols;
  const std::int64_t eb = cfg.element_bytes;
  Grid a(R, S), b(R, S);
  const std::int64_t last_inject = std::max(f.ru, f.su) - 1 + f.t - 1;
  std::int64_t tau = 0;
  for (;; ++tau) {
    a.shift_right();
    b.shift_down();
    for (int r = 0; r < f.ru; ++r) {
      const std::int64_t k = tau - r;
      if (k >= 0 && k < f.t) {
        a(r, 0) = k;
        tr.add(t0 + tau, Interface::IfmapSram, Direction::Read, eb);
      }
    }
    for (int c = 0; c < f.su; ++c) {
      const std::int64_t k = tau - c;
      if (k >= 0 && k < f.t) {
        b(0, c) = k;
        tr.add(t0 + tau, Interface::WeightSram, Direction::Read, eb);
      }
    }
    if (tau > last_inject && a.empty() && b.empty()) break;
    for (int r = 0; r < R; ++r) {
      for (int c = 0; c < S; ++c) {
        if (a(r, c) != kEmpty && a(r, c) == b(r, c)) ++macs;
      }
    }
  }
  // Accumulators drain upward, one row per cycle.
  const std::int64_t d0 = tau;
  for (int d = 0; d < R; ++d) {
    const int row = R - 1 - d;
    if (row < f.ru) tr.add(t0 + d0 + d, Interface::OfmapSram, Direction::Write, f.su * eb);
  }
  return d0 + R;
}

std::int64_t replay_ws_fold(const GemmFold& f, const ArrayConfig& cfg, std::int64_t t0, CycleTraffic& tr,
                            std::int64_t& macs) {
  const int R = cfg.rows, S = cfg.cols;
  const std::int64_t eb = cfg.element_bytes;
  Grid w(R, S);
  for (int tau = 0; tau < R; ++tau) {
    w.shift_down();
    const int r = R - 1 - tau;
    if (r < f.ru) {
      for (int c = 0; c < f.su; ++c) w(0, c) = r;
      tr.add(t0 + tau, Interface::WeightSram, Direction::Read, f.su * eb);
    }
  }
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < S; ++c) {
      const bool want = r < f.ru && c < f.su;
      if (want != (w(r, c) == r)) throw std::logic_error("weight preload misplaced");
    }
  }
  Grid x(R, S), y(R, S);
  const std::int64_t last_inject = R + std::max(f.ru, f.su) - 1 + f.t - 1;
  std::int64_t tau = R;
  for (;; ++tau) {
    x.shift_right();
    y.shift_down();
    for (int r = 0; r < f.ru; ++r) {
      const std::int64_t p = tau - R - r;
      if (p >= 0 && p < f.t) {
        x(r, 0) = p;
        tr.add(t0 + tau, Interface::IfmapSram, Direction::Read, eb);
      }
    }
    for (int c = 0; c < f.su; ++c) {
      const std::int64_t p = tau - R - c;
      if (p >= 0 && p < f.t) {
        y(0, c) = p;
        if (f.rf > 0) tr.add(t0 + tau, Interface::OfmapSram, Direction::Read, eb);
      }
    }
    if (tau > last_inject && x.empty() && y.empty()) break;
    for (int r = 0; r < R; ++r) {
      for (int c = 0; c < S; ++c) {
        if (w(r, c) != kEmpty && x(r, c) != kEmpty && x(r, c) == y(r, c)) ++macs;
      }
    }
    for (int c = 0; c < S; ++c) {
      if (y(R - 1, c) != kEmpty) tr.add(t0 + tau, Interface::OfmapSram, Direction::Write, eb);
    }
  }
  return tau;
}

struct StosData {
  const Matrix<std::int64_t>* row_filters;
  const Matrix<std::int64_t>* col_filters;
  const Tensor3i* input;
  Tensor3i* output;
};

/// Polyphase chain register: position c holds (coordinate, value).
struct ChainCell {
  bool valid = false;
  int coord = 0;
  std::int64_t value = 0;
};

std::int64_t replay_stos_fold(const SliceMap& map, const Fold& fold, const ArrayConfig& cfg, std::int64_t t0,
                              CycleTraffic& tr, std::int64_t& macs, const StosData* data) {
  const std::int64_t eb = cfg.element_bytes;
  const int K = map.kernel;
  const int su = fold_width(map, fold);
  const std::int64_t filters = fold_filters(map, fold);
  const std::int64_t len = stos_fold_cycles(K, su);

  struct RowState {
    const FoldEntry* e;
    const Slice* s;
    bool line_ok;
    int axis;
    std::vector<std::vector<ChainCell>> chains;  // [q][position]
    std::vector<int> injected;                   // next element per chain
    std::vector<std::int64_t> acc;
  };
  std::vector<RowState> rows;
  for (const FoldEntry& e : fold) {
    const Slice& s = map.slices[static_cast<std::size_t>(e.slice)];
    RowState st{&e, &s, detail::slice_line_valid(map, s), detail::slice_axis_len(map, s),
                std::vector<std::vector<ChainCell>>(static_cast<std::size_t>(s.stride),
                                                    std::vector<ChainCell>(static_cast<std::size_t>(su))),
                std::vector<int>(static_cast<std::size_t>(s.stride), 0),
                std::vector<std::int64_t>(static_cast<std::size_t>(e.out_len), 0)};
    rows.push_back(std::move(st));
  }

  auto inject = [&](RowState& st, int q, std::int64_t tau) {
    const int j = st.injected[static_cast<std::size_t>(q)]++;
    auto& chain = st.chains[static_cast<std::size_t>(q)];
    for (int c = 0; c + 1 < su; ++c) chain[static_cast<std::size_t>(c)] = chain[static_cast<std::size_t>(c + 1)];
    ChainCell cell;
    if (j < detail::stos_chain_need(st.e->out_len, K, st.s->stride, q)) {
      cell.valid = true;
      cell.coord = detail::stos_coordinate(*st.s, *st.e, q, j);
      if (st.line_ok && cell.coord >= 0 && cell.coord < st.axis) {
        tr.add(t0 + tau, Interface::IfmapSram, Direction::Read, eb);
        if (data) {
          const bool row = st.s->orientation == Orientation::Row;
          cell.value = row ? (*data->input)(st.s->channel, st.s->source_line, cell.coord)
                           : (*data->input)(st.s->channel, cell.coord, st.s->source_line);
        }
      }
    }
    chain[static_cast<std::size_t>(su - 1)] = cell;
  };

  // Preload: one element per cycle into each chain.
  for (int tau = 0; tau < su; ++tau) {
    for (auto& st : rows) {
      for (int q = 0; q < st.s->stride; ++q) inject(st, q, tau);
    }
  }
  for (int k = 0; k < K; ++k) {
    const std::int64_t tau = su - 1 + k;
    tr.add(t0 + tau, Interface::WeightSram, Direction::Read, filters * eb);
    for (auto& st : rows) {
      const int s = st.s->stride;
      const auto& chain = st.chains[static_cast<std::size_t>(k % s)];
      std::int64_t w = 0;
      if (data) {
        w = st.s->orientation == Orientation::Row
                ? (*data->row_filters)(st.s->out_channel, k)
                : (*data->col_filters)(st.s->out_channel - data->row_filters->rows(), k);
      }
      for (int c = 0; c < st.e->out_len; ++c) {
        const ChainCell& cell = chain[static_cast<std::size_t>(c)];
        const int want = (st.e->out_start + c) * s + k - st.s->padding;
        if (!cell.valid || cell.coord != want) continue;
        ++macs;
        st.acc[static_cast<std::size_t>(c)] += w * cell.value;
      }
      if ((k + 1) % s == 0 && k + 1 < K) {
        for (int q = 0; q < s; ++q) inject(st, q, tau + 1);
      }
    }
  }
  std::int64_t outs = 0;
  for (auto& st : rows) {
    outs += st.e->out_len;
    if (!data) continue;
    for (int c = 0; c < st.e->out_len; ++c) {
      const int pos = st.e->out_start + c;
      if (st.s->orientation == Orientation::Row) {
        (*data->output)(st.s->out_channel, st.s->spatial, pos) = st.acc[static_cast<std::size_t>(c)];
      } else {
        (*data->output)(st.s->out_channel, pos, st.s->spatial) = st.acc[static_cast<std::size_t>(c)];
      }
    }
  }
  tr.add(t0 + len - 1, Interface::OfmapSram, Direction::Write, outs * eb);
  return len;
}

ReplayResult run_stos_replay(const SliceMap& map, const ArrayConfig& cfg, const StosData* data) {
  if (cfg.dataflow != Dataflow::STOS) throw SimulationError("dataflow/workload mismatch: slice map needs an STOS config");
  if (map.rows != cfg.rows || map.cols != cfg.cols) {
    throw SimulationError("slice map was packed for a different array size");
  }
  detail::check_tiles(cfg);
  ReplayResult res;
  const auto plan = detail::stos_dram(map, cfg);
  Sequencer seq(cfg.dram_bw_cap, &res.traffic);
  for (std::size_t i = 0; i < map.folds.size(); ++i) {
    const std::int64_t t0 = seq.begin(plan[i].reads());
    const std::int64_t len = replay_stos_fold(map, map.folds[i], cfg, t0, res.traffic, res.macs, data);
    seq.end(t0, len, plan[i].write);
    ++res.folds;
  }
  res.cycles = seq.cycles();
  res.stall_cycles = seq.stalls();
  res.traffic.finish(res.cycles);
  return res;
}

}  // namespace

ReplayResult replay_gemm(const GemmWorkload& w, const ArrayConfig& cfg, Dataflow df) {
  if (df == Dataflow::STOS) throw SimulationError("dataflow/workload mismatch: GEMM workload on an ST-OS fold");
  detail::check_tiles(cfg);
  ReplayResult res;
  Sequencer seq(cfg.dram_bw_cap, &res.traffic);
  detail::for_each_gemm_fold(w, cfg, df, [&](const GemmFold& f) {
    const auto plan = detail::gemm_dram(w, cfg, df, f);
    const std::int64_t t0 = seq.begin(plan.reads());
    const std::int64_t len = df == Dataflow::OutputStationary ? replay_os_fold(f, cfg, t0, res.traffic, res.macs)
                                                              : replay_ws_fold(f, cfg, t0, res.traffic, res.macs);
    seq.end(t0, len, plan.write);
    ++res.folds;
  });
  res.cycles = seq.cycles();
  res.stall_cycles = seq.stalls();
  res.traffic.finish(res.cycles);
  return res;
}

ReplayResult replay_stos(const SliceMap& map, const ArrayConfig& cfg) { return run_stos_replay(map, cfg, nullptr); }

Tensor3i replay_functional(const SliceMap& map, const ArrayConfig& cfg, const Matrix<std::int64_t>& row_filters,
                           const Matrix<std::int64_t>& col_filters, const Tensor3i& input) {
  if (input.channels() < map.in_channels || input.height() != map.in_h || input.width() != map.in_w) {
    throw SimulationError("input tensor does not match the slice map");
  }
  for (const Slice& s : map.slices) {
    const auto& f = s.orientation == Orientation::Row ? row_filters : col_filters;
    const auto oc = s.orientation == Orientation::Row ? s.out_channel : s.out_channel - row_filters.rows();
    if (oc < 0 || oc >= f.rows() || f.cols() != s.kernel_len) {
      throw SimulationError("filter matrix does not cover the slice map");
    }
  }
  Tensor3i out(map.out_channels, map.out_h, map.out_w);
  StosData data{&row_filters, &col_filters, &input, &out};
  run_stos_replay(map, cfg, &data);
  return out;
}

}  // namespace fusesim
