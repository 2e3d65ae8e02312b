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

#include "fusesim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "fusesim/metrics.hpp"
#include "sim_internal.hpp"

namespace fusesim {

using detail::ceil_div;

std::string_view to_string(Interface i) {
  switch (i) {
    case Interface::IfmapSram: return "IfmapSram";
    case Interface::WeightSram: return "WeightSram";
    case Interface::OfmapSram: return "OfmapSram";
    case Interface::Dram: return "Dram";
  }
  return "?";
}

std::string_view to_string(Direction d) { return d == Direction::Read ? "Read" : "Write"; }

namespace {

constexpr std::size_t slot(Interface i, Direction d) {
  return static_cast<std::size_t>(i) * 2 + static_cast<std::size_t>(d);
}

}  // namespace

void CycleTraffic::add_range(std::int64_t begin, std::int64_t end, Interface i, Direction d, std::int64_t b) {
  if (b == 0 || end <= begin) return;
  if (finished) throw std::logic_error("CycleTraffic already finished");
  auto& v = series[slot(i, d)];
  if (static_cast<std::int64_t>(v.size()) < end + 1) v.resize(static_cast<std::size_t>(end + 1), 0);
  v[static_cast<std::size_t>(begin)] += static_cast<std::int32_t>(b);
  v[static_cast<std::size_t>(end)] -= static_cast<std::int32_t>(b);
}

void CycleTraffic::finish(std::int64_t n) {
  for (auto& v : series) {
    if (v.empty()) continue;
    std::int32_t run = 0;
    for (auto& x : v) {
      run += x;
      x = run;
    }
    if (static_cast<std::int64_t>(v.size()) > n) {
      if (std::any_of(v.begin() + n, v.end(), [](std::int32_t x) { return x != 0; })) {
        throw std::logic_error("traffic recorded after the last cycle");
      }
      v.resize(static_cast<std::size_t>(n));
    }
  }
  cycles = n;
  finished = true;
}

std::int64_t CycleTraffic::at(std::int64_t cycle, Interface i, Direction d) const {
  const auto& v = series[slot(i, d)];
  return cycle >= 0 && cycle < static_cast<std::int64_t>(v.size()) ? v[static_cast<std::size_t>(cycle)] : 0;
}

std::int64_t CycleTraffic::total(Interface i, Direction d) const {
  std::int64_t t = 0;
  for (auto x : series[slot(i, d)]) t += x;
  return t;
}

bool CycleTraffic::operator==(const CycleTraffic& o) const {
  if (cycles != o.cycles) return false;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& a = series[k];
    const auto& b = o.series[k];
    const std::size_t n = std::max(a.size(), b.size());
    for (std::size_t c = 0; c < n; ++c) {
      if ((c < a.size() ? a[c] : 0) != (c < b.size() ? b[c] : 0)) return false;
    }
  }
  return true;
}

GemmWorkload gemm_workload(const LayerDescriptor& l) {
  validate_layer(l);
  GemmWorkload w;
  w.rows = std::int64_t{l.out_h()} * l.out_w();
  const std::int64_t cov_h = covered_extent(l.ifmap_h, l.kernel, l.stride, l.padding);
  const std::int64_t cov_w = covered_extent(l.ifmap_w, l.kernel, l.stride, l.padding);
  const std::int64_t k = l.kernel;
  switch (l.kind) {
    case LayerKind::Standard:
    case LayerKind::Pointwise:
    case LayerKind::Gemm:
      w.cols = l.out_channels;
      w.inner = k * k * l.in_channels;
      w.groups = 1;
      w.unique_inputs = cov_h * cov_w * l.in_channels;
      break;
    case LayerKind::Depthwise:
      w.cols = 1;
      w.inner = k * k;
      w.groups = l.in_channels;
      w.unique_inputs = cov_h * cov_w;
      break;
    case LayerKind::FuSeRow:
    case LayerKind::FuSeCol: {
      // One 1xK (or Kx1) GEMM per channel.
      const bool row = l.kind == LayerKind::FuSeRow;
      const int mid = (l.kernel - 1) / 2;
      const int lines = row ? l.out_h() : l.out_w();
      const int extent = row ? l.ifmap_h : l.ifmap_w;
      std::int64_t valid = 0;
      for (int s = 0; s < lines; ++s) {
        const int src = s * l.stride + mid - l.padding;
        valid += (src >= 0 && src < extent) ? 1 : 0;
      }
      w.cols = 1;
      w.inner = k;
      w.groups = l.in_channels;
      w.unique_inputs = valid * (row ? cov_w : cov_h);
      break;
    }
  }
  return w;
}

std::int64_t os_fold_cycles(int R, int S, std::int64_t ru, std::int64_t su, std::int64_t t) {
  return R + t - 2 + std::max(ru + S, su + R);
}

std::int64_t ws_fold_cycles(int R, int S, std::int64_t ru, std::int64_t su, std::int64_t t) {
  return std::max(R + ru + S, 2 * std::int64_t{R} + su) + t - 2;
}

std::int64_t stos_fold_cycles(int K, std::int64_t su) { return K + su - 1; }

namespace detail {

void check_tiles(const ArrayConfig& cfg) {
  const std::int64_t tile = std::int64_t{cfg.rows} * cfg.cols * cfg.element_bytes;
  auto check = [&](std::int64_t bytes, const char* bank) {
    if (bytes < tile) {
      throw SimulationError(std::string("array tile of ") + std::to_string(tile) + " bytes exceeds " + bank +
                            " SRAM of " + std::to_string(bytes) + " bytes");
    }
  };
  check(cfg.ifmap_sram_bytes, "ifmap");
  check(cfg.weight_sram_bytes, "weight");
  check(cfg.ofmap_sram_bytes, "ofmap");
}

DramPlan gemm_dram(const GemmWorkload& w, const ArrayConfig& cfg, Dataflow df, const GemmFold& f) {
  const std::int64_t eb = cfg.element_bytes;
  const std::int64_t in_bytes = w.unique_inputs * eb;
  const bool in_fits = in_bytes <= cfg.ifmap_sram_bytes / 2;
  DramPlan p;
  if (df == Dataflow::WeightStationary) {
    if (f.cf == 0 || !in_fits) p.ifmap = apportion(in_bytes, w.inner, f.rf * cfg.rows, f.ru);
    p.weight = f.ru * f.su * eb;
    const std::int64_t psum = w.rows * f.su * eb;
    const bool spill = f.nrf > 1 && psum > cfg.ofmap_sram_bytes / 2;
    if (spill && f.rf > 0) p.psum = psum;
    if (spill || f.rf == f.nrf - 1) p.write = psum;
  } else {
    if (f.cf == 0 || !in_fits) p.ifmap = apportion(in_bytes, w.rows, f.rf * cfg.rows, f.ru);
    const std::int64_t tile = w.inner * f.su * eb;
    if (f.rf == 0 || tile > cfg.weight_sram_bytes / 2) p.weight = tile;
    p.write = f.ru * f.su * eb;
  }
  return p;
}

bool slice_line_valid(const SliceMap& map, const Slice& s) {
  const int extent = s.orientation == Orientation::Row ? map.in_h : map.in_w;
  return s.source_line >= 0 && s.source_line < extent;
}

namespace {

std::int64_t entry_valid_inputs(const SliceMap& map, const FoldEntry& e) {
  const Slice& s = map.slices[static_cast<std::size_t>(e.slice)];
  if (!slice_line_valid(map, s)) return 0;
  const int axis = slice_axis_len(map, s);
  std::int64_t n = 0;
  for (int q = 0; q < s.stride; ++q) {
    const int need = stos_chain_need(e.out_len, s.kernel_len, s.stride, q);
    for (int j = 0; j < need; ++j) {
      const int x = stos_coordinate(s, e, q, j);
      n += (x >= 0 && x < axis) ? 1 : 0;
    }
  }
  return n;
}

}  // namespace

std::vector<DramPlan> stos_dram(const SliceMap& map, const ArrayConfig& cfg) {
  const std::int64_t eb = cfg.element_bytes;
  // Distinct input lines, each read over its covered extent.
  std::set<std::tuple<int, int, int>> lines;
  std::int64_t unique = 0;
  std::set<std::pair<int, int>> filters;
  for (const Slice& s : map.slices) {
    filters.insert({s.out_channel, static_cast<int>(s.orientation)});
    if (!slice_line_valid(map, s)) continue;
    if (lines.insert({static_cast<int>(s.orientation), s.channel, s.source_line}).second) {
      unique += covered_extent(slice_axis_len(map, s), s.kernel_len, s.stride, s.padding);
    }
  }
  const std::int64_t in_bytes = unique * eb;
  const bool in_fits = in_bytes <= cfg.ifmap_sram_bytes / 2;
  const std::int64_t w_bytes = std::int64_t{map.kernel} * static_cast<std::int64_t>(filters.size()) * eb;
  const bool w_fits = w_bytes <= cfg.weight_sram_bytes / 2;

  std::int64_t entries = 0;
  for (const Fold& f : map.folds) entries += static_cast<std::int64_t>(f.size());
  std::vector<DramPlan> plan(map.folds.size());
  std::int64_t seen = 0;
  for (std::size_t i = 0; i < map.folds.size(); ++i) {
    const Fold& f = map.folds[i];
    DramPlan& p = plan[i];
    if (in_fits) {
      p.ifmap = apportion(in_bytes, entries, seen, static_cast<std::int64_t>(f.size()));
    } else {
      for (const FoldEntry& e : f) p.ifmap += entry_valid_inputs(map, e) * eb;
    }
    if (!w_fits) {
      p.weight = std::int64_t{map.kernel} * fold_filters(map, f) * eb;
    } else if (i == 0) {
      p.weight = w_bytes;
    }
    for (const FoldEntry& e : f) p.write += std::int64_t{e.out_len} * eb;
    seen += static_cast<std::int64_t>(f.size());
  }
  return plan;
}

}  // namespace detail

namespace {

using detail::DramPlan;
using detail::GemmFold;
using detail::Sequencer;

void fill_bandwidth(LayerReport& rep, const CycleTraffic& tr, const ArrayConfig& cfg) {
  const std::int64_t n = rep.cycles;
  for (int i = 0; i < 4; ++i) {
    const auto iface = static_cast<Interface>(i);
    const auto& rd = tr.series[slot(iface, Direction::Read)];
    const auto& wr = tr.series[slot(iface, Direction::Write)];
    if (n == 0 || (rd.empty() && wr.empty())) continue;
    auto at = [&](std::int64_t c) -> std::int64_t {
      std::int64_t v = 0;
      if (c < static_cast<std::int64_t>(rd.size())) v += rd[static_cast<std::size_t>(c)];
      if (c < static_cast<std::int64_t>(wr.size())) v += wr[static_cast<std::size_t>(c)];
      return v;
    };
    const std::int64_t win = std::min<std::int64_t>(cfg.bw_window, n);
    std::int64_t sum = 0, total = 0, best = 0;
    for (std::int64_t c = 0; c < n; ++c) {
      const std::int64_t v = at(c);
      total += v;
      sum += v;
      if (c >= win) sum -= at(c - win);
      if (c >= win - 1) best = std::max(best, sum);
    }
    rep.bandwidth[static_cast<std::size_t>(i)] = {static_cast<double>(total) / static_cast<double>(n),
                                                  static_cast<double>(best) / static_cast<double>(win)};
  }
}

void emit_trace(const CycleTraffic& tr, const TraceSink& sink) {
  for (std::int64_t c = 0; c < tr.cycles; ++c) {
    for (int i = 0; i < 4; ++i) {
      for (int d = 0; d < 2; ++d) {
        const auto iface = static_cast<Interface>(i);
        const auto dir = static_cast<Direction>(d);
        const std::int64_t b = tr.at(c, iface, dir);
        if (b > 0) sink(TraceEvent{c, iface, dir, b});
      }
    }
  }
}

void finalize(LayerReport& rep, const ArrayConfig& cfg, double mapped_pe_cycles, CycleTraffic* tr,
              const SimOptions& opt) {
  const double pe_cycles = static_cast<double>(cfg.rows) * cfg.cols * static_cast<double>(rep.cycles);
  rep.utilization = rep.cycles > 0 ? static_cast<double>(rep.macs_scheduled) / pe_cycles : 0.0;
  rep.mapping_efficiency = rep.cycles > 0 ? mapped_pe_cycles / pe_cycles : 0.0;
  rep.latency_s = static_cast<double>(rep.cycles) / static_cast<double>(cfg.freq_hz);
  if (tr) {
    tr->finish(rep.cycles);
    fill_bandwidth(rep, *tr, cfg);
    if (opt.sink) emit_trace(*tr, *opt.sink);
  }
}

/// Walks the GEMM folds once, producing totals and (optionally) the per-cycle
/// schedule of traffic.
LayerReport run_gemm(const GemmWorkload& w, const ArrayConfig& cfg, Dataflow df, CycleTraffic* tr) {
  if (df == Dataflow::STOS) throw SimulationError("dataflow/workload mismatch: GEMM workload on an ST-OS fold");
  detail::check_tiles(cfg);
  const std::int64_t eb = cfg.element_bytes;
  const int R = cfg.rows, S = cfg.cols;
  LayerReport rep;
  rep.dataflow = df;
  Sequencer seq(cfg.dram_bw_cap, tr);
  double mapped = 0.0;
  detail::for_each_gemm_fold(w, cfg, df, [&](const GemmFold& f) {
    const DramPlan p = detail::gemm_dram(w, cfg, df, f);
    const std::int64_t t0 = seq.begin(p.reads());
    std::int64_t len;
    if (df == Dataflow::OutputStationary) {
      len = os_fold_cycles(R, S, f.ru, f.su, f.t);
      rep.sram_reads[0] += f.ru * f.t * eb;
      rep.sram_reads[1] += f.su * f.t * eb;
      rep.sram_writes[2] += f.ru * f.su * eb;
      if (tr) {
        for (std::int64_t r = 0; r < f.ru; ++r) {
          tr->add_range(t0 + r, t0 + r + f.t, Interface::IfmapSram, Direction::Read, eb);
        }
        for (std::int64_t c = 0; c < f.su; ++c) {
          tr->add_range(t0 + c, t0 + c + f.t, Interface::WeightSram, Direction::Read, eb);
        }
        const std::int64_t drain = t0 + std::max(f.ru + S, f.su + R) + f.t - 2;
        for (std::int64_t r = 0; r < f.ru; ++r) {
          tr->add(drain + R - 1 - r, Interface::OfmapSram, Direction::Write, f.su * eb);
        }
      }
    } else {
      len = ws_fold_cycles(R, S, f.ru, f.su, f.t);
      rep.sram_reads[0] += f.ru * f.t * eb;
      rep.sram_reads[1] += f.ru * f.su * eb;
      rep.sram_writes[2] += f.su * f.t * eb;
      if (f.rf > 0) rep.sram_reads[2] += f.su * f.t * eb;
      if (tr) {
        for (std::int64_t r = 0; r < f.ru; ++r) {
          tr->add(t0 + R - 1 - r, Interface::WeightSram, Direction::Read, f.su * eb);
          tr->add_range(t0 + R + r, t0 + R + r + f.t, Interface::IfmapSram, Direction::Read, eb);
        }
        for (std::int64_t c = 0; c < f.su; ++c) {
          if (f.rf > 0) tr->add_range(t0 + R + c, t0 + R + c + f.t, Interface::OfmapSram, Direction::Read, eb);
          tr->add_range(t0 + 2 * R - 1 + c, t0 + 2 * R - 1 + c + f.t, Interface::OfmapSram, Direction::Write, eb);
        }
      }
    }
    seq.end(t0, len, p.write);
    rep.macs_scheduled += f.ru * f.su * f.t;
    mapped += static_cast<double>(f.ru * f.su) * static_cast<double>(len);
    rep.folds += 1;
    rep.sram_writes[0] += p.ifmap;
    rep.sram_writes[1] += p.weight;
    rep.dram_reads += p.reads();
    rep.dram_writes += p.write;
  });
  rep.cycles = seq.cycles();
  rep.stall_cycles = seq.stalls();
  rep.mapping_efficiency = mapped;  // raw PE-cycles; finalize() normalizes
  return rep;
}

LayerReport run_stos(const SliceMap& map, const ArrayConfig& cfg, CycleTraffic* tr) {
  if (cfg.dataflow != Dataflow::STOS) throw SimulationError("dataflow/workload mismatch: slice map needs an STOS config");
  if (map.rows != cfg.rows || map.cols != cfg.cols) {
    throw SimulationError("slice map was packed for a different array size");
  }
  detail::check_tiles(cfg);
  const std::int64_t eb = cfg.element_bytes;
  const int K = map.kernel;
  LayerReport rep;
  rep.dataflow = Dataflow::STOS;
  const std::vector<DramPlan> plan = detail::stos_dram(map, cfg);
  Sequencer seq(cfg.dram_bw_cap, tr);
  double mapped = 0.0;
  for (std::size_t fi = 0; fi < map.folds.size(); ++fi) {
    const Fold& f = map.folds[fi];
    const DramPlan& p = plan[fi];
    const std::int64_t t0 = seq.begin(p.reads());
    const std::int64_t su = fold_width(map, f);
    const std::int64_t len = stos_fold_cycles(K, su);
    const std::int64_t filters = fold_filters(map, f);
    std::int64_t outs = 0;
    for (const FoldEntry& e : f) {
      outs += e.out_len;
      const Slice& s = map.slices[static_cast<std::size_t>(e.slice)];
      if (!detail::slice_line_valid(map, s)) continue;
      const int axis = detail::slice_axis_len(map, s);
      for (int q = 0; q < s.stride; ++q) {
        const int need = detail::stos_chain_need(e.out_len, K, s.stride, q);
        for (int j = 0; j < need; ++j) {
          const int x = detail::stos_coordinate(s, e, q, j);
          if (x < 0 || x >= axis) continue;
          rep.sram_reads[0] += eb;
          if (tr) {
            tr->add(t0 + detail::stos_injection_cycle(j, su, s.stride), Interface::IfmapSram, Direction::Read, eb);
          }
        }
      }
    }
    rep.sram_reads[1] += K * filters * eb;
    rep.sram_writes[2] += outs * eb;
    if (tr) {
      tr->add_range(t0 + su - 1, t0 + su - 1 + K, Interface::WeightSram, Direction::Read, filters * eb);
      tr->add(t0 + su + K - 2, Interface::OfmapSram, Direction::Write, outs * eb);
    }
    seq.end(t0, len, p.write);
    rep.macs_scheduled += outs * K;
    mapped += static_cast<double>(outs) * static_cast<double>(len);
    rep.folds += 1;
    rep.sram_writes[0] += p.ifmap;
    rep.sram_writes[1] += p.weight;
    rep.dram_reads += p.reads();
    rep.dram_writes += p.write;
  }
  rep.cycles = seq.cycles();
  rep.stall_cycles = seq.stalls();
  rep.mapping_efficiency = mapped;
  return rep;
}

}  // namespace

CycleTraffic schedule_gemm_traffic(const GemmWorkload& w, const ArrayConfig& cfg, Dataflow df) {
  CycleTraffic tr;
  LayerReport rep = run_gemm(w, cfg, df, &tr);
  tr.finish(rep.cycles);
  return tr;
}

CycleTraffic schedule_stos_traffic(const SliceMap& map, const ArrayConfig& cfg) {
  CycleTraffic tr;
  LayerReport rep = run_stos(map, cfg, &tr);
  tr.finish(rep.cycles);
  return tr;
}

LayerReport simulate_gemm(const GemmWorkload& w, const ArrayConfig& cfg, Dataflow df, const SimOptions& opt) {
  CycleTraffic tr;
  CycleTraffic* trp = opt.traffic || opt.sink ? &tr : nullptr;
  LayerReport rep = run_gemm(w, cfg, df, trp);
  const double mapped = rep.mapping_efficiency;
  finalize(rep, cfg, mapped, trp, opt);
  return rep;
}

LayerReport simulate_slicemap(const SliceMap& map, const ArrayConfig& cfg, const SimOptions& opt) {
  CycleTraffic tr;
  CycleTraffic* trp = opt.traffic || opt.sink ? &tr : nullptr;
  LayerReport rep = run_stos(map, cfg, trp);
  const double mapped = rep.mapping_efficiency;
  finalize(rep, cfg, mapped, trp, opt);
  return rep;
}

LayerReport simulate_layer(const LayerDescriptor& layer, const ArrayConfig& cfg, const SimOptions& opt) {
  try {
    LayerReport rep;
    if (is_fuse(layer.kind) && cfg.dataflow == Dataflow::STOS) {
      rep = simulate_slicemap(lower_stos(layer, cfg, cfg.stos_strategy), cfg, opt);
    } else {
      const Dataflow df = cfg.dataflow == Dataflow::WeightStationary ? Dataflow::WeightStationary
                                                                     : Dataflow::OutputStationary;
      rep = simulate_gemm(gemm_workload(layer), cfg, df, opt);
    }
    rep.layer = layer.name;
    rep.kind = layer.kind;
    return rep;
  } catch (const std::exception& e) {
    throw SimulationError("layer '" + layer.name + "': " + e.what());
  }
}

std::string bucket_of(LayerKind kind) {
  switch (kind) {
    case LayerKind::Depthwise: return "Depthwise";
    case LayerKind::FuSeRow:
    case LayerKind::FuSeCol: return "FuSe";
    case LayerKind::Pointwise: return "Pointwise";
    default: return "Other";
  }
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the
/// lowest-index failure.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::map<std::string, LatencyBucket> make_breakdown(const std::vector<LayerReport>& layers, const ArrayConfig& cfg) {
  std::map<std::string, LatencyBucket> b;
  for (const char* k : {"Depthwise", "FuSe", "Pointwise", "Other"}) b[k] = {};
  std::int64_t total = 0;
  for (const auto& l : layers) {
    b[bucket_of(l.kind)].cycles += l.cycles;
    total += l.cycles;
  }
  for (auto& [k, v] : b) {
    v.latency_s = static_cast<double>(v.cycles) / static_cast<double>(cfg.freq_hz);
    v.share = total > 0 ? static_cast<double>(v.cycles) / static_cast<double>(total) : 0.0;
  }
  return b;
}

}  // namespace

NetworkReport simulate_network(const NetworkTopology& net, const ArrayConfig& cfg, const SimOptions& opt) {
  NetworkReport r;
  r.network = net.name;
  r.config = cfg;
  r.layers.resize(net.layers.size());
  SimOptions layer_opt = opt;
  layer_opt.sink = nullptr;
  parallel_for(net.layers.size(), opt.sink ? 1 : opt.threads,
               [&](std::size_t i) { r.layers[i] = simulate_layer(net.layers[i], cfg, layer_opt); });
  if (opt.sink) {
    // Traces are offset so layers follow each other on one timeline.
    std::int64_t base = 0;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      const TraceSink shifted = [&](const TraceEvent& e) {
        TraceEvent s = e;
        s.cycle += base;
        (*opt.sink)(s);
      };
      SimOptions one = opt;
      one.sink = &shifted;
      simulate_layer(net.layers[i], cfg, one);
      base += r.layers[i].cycles;
    }
  }
  for (std::size_t i = 0; i < r.layers.size(); ++i) {
    r.total_cycles += r.layers[i].cycles;
    r.total_macs += r.layers[i].macs_scheduled;
  }
  r.total_latency_s = static_cast<double>(r.total_cycles) / static_cast<double>(cfg.freq_hz);
  r.breakdown = make_breakdown(r.layers, cfg);
  return r;
}

std::vector<SweepRow> scaling_sweep(const NetworkTopology& net, const std::vector<std::pair<int, int>>& sizes,
                                    const ArrayConfig& base, int threads) {
  if (sizes.empty()) throw std::invalid_argument("scaling sweep needs at least one array size");
  const NetworkTopology fused =
      fuse_replace(net, FuseVariant::Half, std::vector<bool>(depthwise_count(net), true));
  SimOptions opt;
  opt.traffic = false;
  opt.threads = threads;
  std::vector<SweepRow> rows;
  for (const auto& [r, s] : sizes) {
    if (r < 1 || s < 1) throw std::invalid_argument("array dimensions must be positive");
    ArrayConfig cfg = base;
    cfg.rows = r;
    cfg.cols = s;
    cfg.dataflow = Dataflow::OutputStationary;
    const NetworkReport b = simulate_network(net, cfg, opt);
    cfg.dataflow = Dataflow::STOS;
    const NetworkReport f = simulate_network(fused, cfg, opt);
    SweepRow row;
    row.rows = r;
    row.cols = s;
    row.baseline_cycles = b.total_cycles;
    row.fuse_cycles = f.total_cycles;
    row.baseline_latency_s = b.total_latency_s;
    row.fuse_latency_s = f.total_latency_s;
    row.speedup = f.total_cycles > 0 ? static_cast<double>(b.total_cycles) / static_cast<double>(f.total_cycles) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

CompareResult compare_network(const NetworkTopology& net, const ArrayConfig& cfg, int threads) {
  SimOptions opt;
  opt.traffic = false;
  opt.threads = threads;
  const std::vector<bool> all(depthwise_count(net), true);
  const NetworkTopology half = fuse_replace(net, FuseVariant::Half, all);
  const NetworkTopology full = fuse_replace(net, FuseVariant::Full, all);

  ArrayConfig os = cfg, ws = cfg, st = cfg;
  os.dataflow = Dataflow::OutputStationary;
  ws.dataflow = Dataflow::WeightStationary;
  st.dataflow = Dataflow::STOS;
  const NetworkReport b_os = simulate_network(net, os, opt);
  const NetworkReport b_ws = simulate_network(net, ws, opt);
  const NetworkReport h = simulate_network(half, st, opt);
  const NetworkReport f = simulate_network(full, st, opt);

  CompareResult res;
  auto row = [&](const char* variant, Dataflow df, const NetworkReport& r) {
    CompareRow c;
    c.variant = variant;
    c.dataflow = df;
    c.cycles = r.total_cycles;
    c.latency_s = r.total_latency_s;
    c.speedup = r.total_cycles > 0 ? static_cast<double>(b_os.total_cycles) / static_cast<double>(r.total_cycles) : 0.0;
    c.breakdown = r.breakdown;
    res.rows.push_back(std::move(c));
  };
  row("baseline", Dataflow::OutputStationary, b_os);
  row("baseline", Dataflow::WeightStationary, b_ws);
  row("fuse_half", Dataflow::STOS, h);
  row("fuse_full", Dataflow::STOS, f);

  // Map baseline layer i to its span in the FuSe-Half network.
  std::vector<std::pair<std::size_t, std::size_t>> span(net.layers.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const std::size_t width = net.layers[i].kind == LayerKind::Depthwise ? 2 : 1;
    span[i] = {j, j + width - 1};
    j += width;
  }
  auto fuse_cycles = [&](std::size_t first, std::size_t last) {
    std::int64_t c = 0;
    for (std::size_t k = span[first].first; k <= span[last].second; ++k) c += h.layers[k].cycles;
    return c;
  };
  auto speedup = [](std::int64_t a, std::int64_t b) {
    return b > 0 ? static_cast<double>(a) / static_cast<double>(b) : 0.0;
  };
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    LayerSpeedup s{net.layers[i].name, net.layers[i].kind, b_os.layers[i].cycles, fuse_cycles(i, i), 0.0};
    s.speedup = speedup(s.baseline_cycles, s.fuse_cycles);
    res.layerwise.push_back(s);
  }
  for (const BottleneckGroup& g : net.bottleneck_groups) {
    LayerSpeedup s{net.layers[g.middle].name, LayerKind::Depthwise, 0, fuse_cycles(g.first, g.last), 0.0};
    for (std::size_t k = g.first; k <= g.last; ++k) s.baseline_cycles += b_os.layers[k].cycles;
    s.speedup = speedup(s.baseline_cycles, s.fuse_cycles);
    res.bottleneck.push_back(s);
  }
  return res;
}

std::vector<BandwidthRow> bandwidth_profile(const std::vector<LayerReport>& reports) {
  std::vector<BandwidthRow> rows;
  rows.reserve(reports.size());
  for (const auto& r : reports) rows.push_back({r.layer, r.kind, r.bandwidth});
  return rows;
}

}  // namespace fusesim
