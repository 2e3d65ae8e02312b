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

#include "fusesim/metrics.hpp"

#include <sstream>

namespace fusesim {

std::int64_t macs(const LayerDescriptor& l) {
  const std::int64_t nm = std::int64_t{l.out_h()} * l.out_w();
  const std::int64_t k = l.kernel;
  switch (l.kind) {
    case LayerKind::Standard: return nm * l.out_channels * k * k * l.in_channels;
    case LayerKind::Depthwise: return nm * l.in_channels * k * k;
    case LayerKind::Pointwise:
    case LayerKind::Gemm: return nm * l.in_channels * l.out_channels;
    case LayerKind::FuSeRow:
    case LayerKind::FuSeCol: return nm * l.in_channels * k;
  }
  return 0;
}

std::int64_t params(const LayerDescriptor& l) {
  const std::int64_t k = l.kernel;
  switch (l.kind) {
    case LayerKind::Standard: return k * k * l.in_channels * l.out_channels;
    case LayerKind::Depthwise: return k * k * l.in_channels;
    case LayerKind::Pointwise:
    case LayerKind::Gemm: return std::int64_t{l.in_channels} * l.out_channels;
    case LayerKind::FuSeRow:
    case LayerKind::FuSeCol: return k * l.in_channels;
  }
  return 0;
}

CountReport network_counts(const NetworkTopology& net) {
  CountReport r;
  for (const auto& l : net.layers) {
    LayerCount c{l.name, l.kind, macs(l), params(l)};
    r.total_macs += c.macs;
    r.total_params += c.params;
    auto [it, inserted] = r.by_kind.try_emplace(l.kind, LayerCount{std::string(to_string(l.kind)), l.kind, 0, 0});
    it->second.macs += c.macs;
    it->second.params += c.params;
    r.layers.push_back(std::move(c));
  }
  return r;
}

std::string count_csv(const CountReport& report) {
  std::ostringstream out;
  out << "layer,kind,macs,params\n";
  for (const auto& c : report.layers) {
    out << c.name << ',' << to_string(c.kind) << ',' << c.macs << ',' << c.params << '\n';
  }
  out << "total,All," << report.total_macs << ',' << report.total_params << '\n';
  return out.str();
}

}  // namespace fusesim
