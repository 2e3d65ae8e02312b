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

#include "fusesim/lowering.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace fusesim {

Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

std::int64_t covered_extent(int in, int kernel, int stride, int padding) {
  const int out = output_extent(in, kernel, stride, padding);
  std::vector<bool> hit(static_cast<std::size_t>(in), false);
  for (int o = 0; o < out; ++o) {
    const int lo = std::max(0, o * stride - padding);
    const int hi = std::min(in - 1, o * stride - padding + kernel - 1);
    for (int x = lo; x <= hi; ++x) hit[static_cast<std::size_t>(x)] = true;
  }
  return std::count(hit.begin(), hit.end(), true);
}

Im2colWorkload lower_im2col(const LayerDescriptor& l) {
  validate_layer(l);
  const std::int64_t nm = std::int64_t{l.out_h()} * l.out_w();
  const std::int64_t kk = std::int64_t{l.kernel} * l.kernel;
  const std::int64_t read = covered_extent(l.ifmap_h, l.kernel, l.stride, l.padding) *
                            covered_extent(l.ifmap_w, l.kernel, l.stride, l.padding);
  Im2colWorkload w;
  w.a_prime_rows = nm;
  switch (l.kind) {
    case LayerKind::Standard:
    case LayerKind::Pointwise:
    case LayerKind::Gemm:
      w.a_prime_cols = kk * l.in_channels;
      w.b_cols = l.out_channels;
      w.groups = 1;
      break;
    case LayerKind::Depthwise:
      w.a_prime_cols = kk;
      w.b_cols = 1;
      w.groups = l.in_channels;
      break;
    default:
      throw LoweringError("layer '" + l.name + "': im2col does not apply to " + std::string(to_string(l.kind)));
  }
  w.replication_factor = make_rational(nm * kk, read);
  return w;
}

ChannelwiseWorkload lower_channelwise(const LayerDescriptor& l) {
  validate_layer(l);
  if (l.kind == LayerKind::Depthwise || is_fuse(l.kind)) {
    throw ChannelwiseInapplicable("layer '" + l.name + "': " + std::string(to_string(l.kind)) +
                                  " has no cross-channel reduction");
  }
  ChannelwiseWorkload w;
  w.vector_len = l.in_channels;
  w.dot_products = std::int64_t{l.out_h()} * l.out_w() * l.kernel * l.kernel;
  w.filters = l.out_channels;
  return w;
}

std::string_view to_string(Orientation o) { return o == Orientation::Row ? "Row" : "Col"; }

SliceMap lower_stos(const LayerDescriptor& l, const ArrayConfig& cfg, MappingStrategy strategy, int channel_base,
                    int out_channel_base) {
  if (cfg.dataflow != Dataflow::STOS) throw LoweringError("ST-OS lowering needs an STOS array config");
  if (!is_fuse(l.kind)) throw LoweringError("layer '" + l.name + "': ST-OS lowering needs a FuSe layer");
  const int m = l.out_h();
  const int n = l.out_w();
  if (l.ifmap_h < 1 || l.ifmap_w < 1 || m < 1 || n < 1) {
    throw LoweringError("layer '" + l.name + "': zero-size feature map");
  }
  validate_layer(l);
  const bool row = l.kind == LayerKind::FuSeRow;
  const int mid = (l.kernel - 1) / 2;
  const int groups = l.in_channels;
  const int lines = row ? m : n;

  SliceMap map;
  map.strategy = strategy;
  map.rows = cfg.rows;
  map.cols = cfg.cols;
  map.kernel = l.kernel;
  map.in_channels = channel_base + groups;
  map.in_h = l.ifmap_h;
  map.in_w = l.ifmap_w;
  map.out_channels = out_channel_base + groups;
  map.out_h = m;
  map.out_w = n;
  map.slices.reserve(static_cast<std::size_t>(groups) * lines);
  for (int c = 0; c < groups; ++c) {
    for (int s = 0; s < lines; ++s) {
      Slice sl;
      sl.channel = channel_base + c;
      sl.out_channel = out_channel_base + c;
      sl.spatial = s;
      sl.orientation = row ? Orientation::Row : Orientation::Col;
      sl.source_line = s * l.stride + mid - l.padding;
      sl.input_len = (row ? l.ifmap_w : l.ifmap_h) + 2 * l.padding;
      sl.kernel_len = l.kernel;
      sl.stride = l.stride;
      sl.padding = l.padding;
      sl.outputs = row ? n : m;
      map.slices.push_back(sl);
    }
  }

  std::vector<int> order(map.slices.size());
  if (strategy == MappingStrategy::SpatialFirst) {
    std::iota(order.begin(), order.end(), 0);
  } else {
    std::size_t i = 0;
    for (int s = 0; s < lines; ++s) {
      for (int c = 0; c < groups; ++c) order[i++] = c * lines + s;
    }
  }

  const int outputs = row ? n : m;
  const int chunks = (outputs + cfg.cols - 1) / cfg.cols;
  Fold cur;
  std::vector<char> used(static_cast<std::size_t>(groups), 0);
  auto close = [&] {
    if (cur.empty()) return;
    map.folds.push_back(std::move(cur));
    cur.clear();
    std::fill(used.begin(), used.end(), 0);
  };
  for (int j = 0; j < chunks; ++j) {
    const int start = j * cfg.cols;
    const int len = std::min(cfg.cols, outputs - start);
    for (int id : order) {
      const int ch = map.slices[static_cast<std::size_t>(id)].channel - channel_base;
      if (static_cast<int>(cur.size()) == cfg.rows ||
          (strategy == MappingStrategy::ChannelsFirst && used[static_cast<std::size_t>(ch)])) {
        close();
      }
      used[static_cast<std::size_t>(ch)] = 1;
      cur.push_back({static_cast<int>(cur.size()), id, start, len});
    }
  }
  close();
  return map;
}

SliceMap lower_stos(const LayerDescriptor& row, const LayerDescriptor& col, const ArrayConfig& cfg,
                    MappingStrategy strategy, FuseVariant variant) {
  if (row.kind != LayerKind::FuSeRow || col.kind != LayerKind::FuSeCol) {
    throw LoweringError("expected a FuSeRow, FuSeCol pair");
  }
  SliceMap map = lower_stos(row, cfg, strategy, 0, 0);
  const int col_base = variant == FuseVariant::Half ? row.in_channels : 0;
  SliceMap cm = lower_stos(col, cfg, strategy, col_base, row.out_channels);
  const int offset = static_cast<int>(map.slices.size());
  map.slices.insert(map.slices.end(), cm.slices.begin(), cm.slices.end());
  for (Fold& f : cm.folds) {
    for (FoldEntry& e : f) e.slice += offset;
    map.folds.push_back(std::move(f));
  }
  map.in_channels = std::max(map.in_channels, cm.in_channels);
  map.out_channels = cm.out_channels;
  return map;
}

int fold_width(const SliceMap&, const Fold& fold) {
  int w = 0;
  for (const auto& e : fold) w = std::max(w, e.out_len);
  return w;
}

int fold_filters(const SliceMap& map, const Fold& fold) {
  std::vector<std::pair<int, int>> seen;
  for (const auto& e : fold) {
    const Slice& s = map.slices[static_cast<std::size_t>(e.slice)];
    std::pair<int, int> key{s.out_channel, static_cast<int>(s.orientation)};
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) seen.push_back(key);
  }
  return static_cast<int>(seen.size());
}

}  // namespace fusesim
