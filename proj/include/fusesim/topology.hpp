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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fusesim {

enum class LayerKind { Standard, Depthwise, Pointwise, FuSeRow, FuSeCol, Gemm };

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> parse_layer_kind(std::string_view text);

inline bool is_fuse(LayerKind k) { return k == LayerKind::FuSeRow || k == LayerKind::FuSeCol; }

/// Output extent of a sliding window along one axis.
inline int output_extent(int in, int kernel, int stride, int padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

/// One layer of a network, shape only.
///
/// For FuSeRow/FuSeCol, in_channels == out_channels is the size of the channel
/// group the 1D filters run over.
struct LayerDescriptor {
  std::string name;
  LayerKind kind = LayerKind::Standard;
  int ifmap_h = 1;
  int ifmap_w = 1;
  int kernel = 1;
  int in_channels = 1;
  int out_channels = 1;
  int stride = 1;
  int padding = 0;

  int out_h() const { return output_extent(ifmap_h, kernel, stride, padding); }
  int out_w() const { return output_extent(ifmap_w, kernel, stride, padding); }

  bool operator==(const LayerDescriptor&) const = default;
};

/// Inclusive index range of a mobile bottleneck: optional expansion pointwise,
/// the depthwise layer (or FuSe pair), optional Gemm layers, optional
/// projection pointwise.
struct BottleneckGroup {
  std::size_t first = 0;
  std::size_t middle = 0;  // depthwise layer, or the FuSeRow of a pair
  std::size_t last = 0;
  bool operator==(const BottleneckGroup&) const = default;
};

struct NetworkTopology {
  std::string name;
  std::vector<LayerDescriptor> layers;
  std::vector<BottleneckGroup> bottleneck_groups;

  bool operator==(const NetworkTopology&) const = default;
};

enum class Dataflow { OutputStationary, WeightStationary, STOS };

std::string_view to_string(Dataflow df);
std::optional<Dataflow> parse_dataflow(std::string_view text);

enum class MappingStrategy { SpatialFirst, ChannelsFirst, Hybrid };

std::string_view to_string(MappingStrategy s);
std::optional<MappingStrategy> parse_strategy(std::string_view text);

struct ArrayConfig {
  int rows = 16;
  int cols = 16;
  Dataflow dataflow = Dataflow::OutputStationary;
  std::int64_t ifmap_sram_bytes = 64 * 1024;
  std::int64_t weight_sram_bytes = 64 * 1024;
  std::int64_t ofmap_sram_bytes = 64 * 1024;
  std::int64_t freq_hz = 1'000'000'000;
  int element_bytes = 1;
  /// DRAM bytes per cycle; 0 means unconstrained.
  std::int64_t dram_bw_cap = 0;
  /// Sliding window for max bandwidth, in cycles.
  int bw_window = 16;
  /// Slice packing used for FuSe layers under ST-OS.
  MappingStrategy stos_strategy = MappingStrategy::Hybrid;

  bool operator==(const ArrayConfig&) const = default;
};

/// Thrown for malformed input text. line/column are 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Thrown when a well-formed description violates a shape invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks the per-layer invariants; throws ValidationError naming the layer.
void validate_layer(const LayerDescriptor& layer);

/// Checks every layer, channel/spatial chaining and FuSe pairing.
void validate_network(const NetworkTopology& net);

std::vector<BottleneckGroup> infer_bottleneck_groups(const std::vector<LayerDescriptor>& layers);

NetworkTopology parse_topology(std::string_view text, std::string name);
NetworkTopology load_topology(const std::string& path);
std::string write_topology(const NetworkTopology& net);

enum class FuseVariant { Half, Full };

std::string_view to_string(FuseVariant v);

std::size_t depthwise_count(const NetworkTopology& net);

/// Replaces every masked depthwise layer by a FuSeRow + FuSeCol pair.
NetworkTopology fuse_replace(const NetworkTopology& net, FuseVariant variant,
                             const std::vector<bool>& layer_mask);

ArrayConfig parse_array_config(std::string_view text);
ArrayConfig load_array_config(const std::string& path);
std::string write_array_config(const ArrayConfig& cfg);

/// Reads a whole file; throws ParseError if it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace fusesim
