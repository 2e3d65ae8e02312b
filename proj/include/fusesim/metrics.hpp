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
#include <map>
#include <string>
#include <vector>

#include "fusesim/topology.hpp"

namespace fusesim {

/// Multiply-accumulates of one layer, biases and activations excluded.
std::int64_t macs(const LayerDescriptor& layer);

/// Weight count of one layer, biases excluded.
std::int64_t params(const LayerDescriptor& layer);

struct LayerCount {
  std::string name;
  LayerKind kind;
  std::int64_t macs;
  std::int64_t params;
};

struct CountReport {
  std::vector<LayerCount> layers;
  std::int64_t total_macs = 0;
  std::int64_t total_params = 0;
  std::map<LayerKind, LayerCount> by_kind;
};

CountReport network_counts(const NetworkTopology& net);

/// `layer,kind,macs,params` rows plus a trailing total row.
std::string count_csv(const CountReport& report);

}  // namespace fusesim
