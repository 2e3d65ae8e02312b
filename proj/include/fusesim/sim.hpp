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

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fusesim/lowering.hpp"
#include "fusesim/tensor.hpp"
#include "fusesim/topology.hpp"

namespace fusesim {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Interface { IfmapSram = 0, WeightSram = 1, OfmapSram = 2, Dram = 3 };
enum class Direction { Read = 0, Write = 1 };

std::string_view to_string(Interface i);
std::string_view to_string(Direction d);

struct TraceEvent {
  std::int64_t cycle = 0;
  Interface interface = Interface::IfmapSram;
  Direction direction = Direction::Read;
  std::int64_t bytes = 0;
  bool operator==(const TraceEvent&) const = default;
};

using TraceSink = std::function<void(const TraceEvent&)>;

struct BandwidthStats {
  double avg = 0.0;  // bytes per cycle over the layer
  double max = 0.0;  // max over sliding windows of cfg.bw_window cycles
};

struct LayerReport {
  std::string layer;
  LayerKind kind = LayerKind::Standard;
  Dataflow dataflow = Dataflow::OutputStationary;
  std::int64_t cycles = 0;
  std::int64_t macs_scheduled = 0;
  std::int64_t folds = 0;
  std::int64_t stall_cycles = 0;
  double utilization = 0.0;         // macs / (R * S * cycles)
  double mapping_efficiency = 0.0;  // time-weighted fraction of PEs holding a mapped output
  std::array<std::int64_t, 3> sram_reads{};   // ifmap, weight, ofmap bank
  std::array<std::int64_t, 3> sram_writes{};  // ifmap/weight: DRAM fills; ofmap: results
  std::int64_t dram_reads = 0;
  std::int64_t dram_writes = 0;
  std::array<BandwidthStats, 4> bandwidth{};  // indexed by Interface
  double latency_s = 0.0;
};

/// GEMM view used by the OS and WS dataflows: `groups` independent
/// (rows x inner) * (inner x cols) products.
struct GemmWorkload {
  std::int64_t rows = 1;   // output pixels
  std::int64_t cols = 1;   // filters
  std::int64_t inner = 1;  // reduction length
  std::int64_t groups = 1;
  std::int64_t unique_inputs = 0;  // distinct input elements per group
};

GemmWorkload gemm_workload(const LayerDescriptor& layer);

/// Cycle length of one fold.
std::int64_t os_fold_cycles(int R, int S, std::int64_t r_used, std::int64_t s_used, std::int64_t t);
std::int64_t ws_fold_cycles(int R, int S, std::int64_t r_used, std::int64_t s_used, std::int64_t t);
std::int64_t stos_fold_cycles(int K, std::int64_t s_used);

struct SimOptions {
  bool traffic = true;          // compute per-cycle traffic and bandwidth
  const TraceSink* sink = nullptr;  // receives per-cycle aggregated events in cycle order
  int threads = 1;              // simulate_network only
};

/// OS or WS per cfg.dataflow (STOS falls back to OS for GEMMs).
LayerReport simulate_gemm(const GemmWorkload& w, const ArrayConfig& cfg, Dataflow df, const SimOptions& opt = {});

/// ST-OS execution of a slice map.
LayerReport simulate_slicemap(const SliceMap& map, const ArrayConfig& cfg, const SimOptions& opt = {});

/// Lowers per cfg.dataflow: FuSe layers go through a slice map under STOS,
/// everything else through im2col GEMMs (OS when cfg says STOS).
LayerReport simulate_layer(const LayerDescriptor& layer, const ArrayConfig& cfg, const SimOptions& opt = {});

struct LatencyBucket {
  std::int64_t cycles = 0;
  double latency_s = 0.0;
  double share = 0.0;
};

struct NetworkReport {
  std::string network;
  ArrayConfig config;
  std::vector<LayerReport> layers;
  std::int64_t total_cycles = 0;
  double total_latency_s = 0.0;
  std::int64_t total_macs = 0;
  std::map<std::string, LatencyBucket> breakdown;  // Depthwise, FuSe, Pointwise, Other
};

std::string bucket_of(LayerKind kind);

NetworkReport simulate_network(const NetworkTopology& net, const ArrayConfig& cfg, const SimOptions& opt = {});

// ---- replay ---------------------------------------------------------------

/// Per-cycle bytes per (interface, direction). Built in difference form,
/// resolved by finish().
struct CycleTraffic {
  void add(std::int64_t cycle, Interface i, Direction d, std::int64_t b) { add_range(cycle, cycle + 1, i, d, b); }
  void add_range(std::int64_t begin, std::int64_t end, Interface i, Direction d, std::int64_t b);
  std::int64_t at(std::int64_t cycle, Interface i, Direction d) const;
  std::int64_t total(Interface i, Direction d) const;
  void finish(std::int64_t cycles);
  bool operator==(const CycleTraffic& o) const;

  std::int64_t cycles = 0;
  bool finished = false;
  std::array<std::vector<std::int32_t>, 8> series;
};

struct ReplayResult {
  std::int64_t cycles = 0;
  std::int64_t macs = 0;
  std::int64_t folds = 0;
  std::int64_t stall_cycles = 0;
  CycleTraffic traffic;
};

/// Register-transfer replay: operands are injected at the array edges and
/// move one PE per cycle; a MAC fires only where matching operands meet.
ReplayResult replay_gemm(const GemmWorkload& w, const ArrayConfig& cfg, Dataflow df);
ReplayResult replay_stos(const SliceMap& map, const ArrayConfig& cfg);

/// Same ST-OS replay carrying integer data. Row filters are indexed by output
/// channel, column filters by output channel minus row_filters.rows().
Tensor3i replay_functional(const SliceMap& map, const ArrayConfig& cfg, const Matrix<std::int64_t>& row_filters,
                           const Matrix<std::int64_t>& col_filters, const Tensor3i& input);

/// Fast schedule of the same traffic, used by simulate_*.
CycleTraffic schedule_gemm_traffic(const GemmWorkload& w, const ArrayConfig& cfg, Dataflow df);
CycleTraffic schedule_stos_traffic(const SliceMap& map, const ArrayConfig& cfg);

// ---- studies ----------------------------------------------------------------

struct SweepRow {
  int rows = 0;
  int cols = 0;
  std::int64_t baseline_cycles = 0;
  std::int64_t fuse_cycles = 0;
  double baseline_latency_s = 0.0;
  double fuse_latency_s = 0.0;
  double speedup = 0.0;
};

/// Baseline on OS against FuSe-Half (all depthwise replaced) on ST-OS.
std::vector<SweepRow> scaling_sweep(const NetworkTopology& net, const std::vector<std::pair<int, int>>& sizes,
                                    const ArrayConfig& base, int threads = 1);

struct CompareRow {
  std::string variant;  // baseline, fuse_half, fuse_full
  Dataflow dataflow;
  std::int64_t cycles = 0;
  double latency_s = 0.0;
  double speedup = 0.0;  // against baseline OS
  std::map<std::string, LatencyBucket> breakdown;
};

struct LayerSpeedup {
  std::string layer;  // baseline layer name
  LayerKind kind;
  std::int64_t baseline_cycles = 0;
  std::int64_t fuse_cycles = 0;
  double speedup = 0.0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::vector<LayerSpeedup> layerwise;   // per baseline layer, FuSe-Half ST-OS vs baseline OS
  std::vector<LayerSpeedup> bottleneck;  // per bottleneck group
};

CompareResult compare_network(const NetworkTopology& net, const ArrayConfig& cfg, int threads = 1);

struct BandwidthRow {
  std::string layer;
  LayerKind kind;
  std::array<BandwidthStats, 4> bandwidth;
};

std::vector<BandwidthRow> bandwidth_profile(const std::vector<LayerReport>& reports);

}  // namespace fusesim
