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

#include <string>
#include <vector>

#include <json.hpp>

#include "fusesim/lowering.hpp"
#include "fusesim/metrics.hpp"
#include "fusesim/nos.hpp"
#include "fusesim/ria.hpp"
#include "fusesim/search.hpp"
#include "fusesim/sim.hpp"

namespace fusesim {

using Json = nlohmann::json;  // std::map objects, so keys come out sorted

/// Six significant digits, '.' decimal, no locale.
std::string format_float(double v);

Json to_json(const ArrayConfig& cfg);
Json to_json(const LayerReport& r);
Json to_json(const NetworkReport& r);
Json to_json(const SliceMap& m);
Json to_json(const RiaVerdict& v);
Json to_json(const CompareResult& r);

Json tensor_to_json(const Tensor3d& t);
Tensor3d tensor_from_json(const Json& j);
Json scaffold_to_json(const ScaffoldedLayer<double>& l);
ScaffoldedLayer<double> scaffold_from_json(const Json& j);

/// Pretty JSON with a trailing newline.
std::string dump(const Json& j);

std::string layer_csv(const NetworkReport& r);
std::string bandwidth_csv(const std::vector<BandwidthRow>& rows);
std::string compare_csv(const CompareResult& r);
std::string layerwise_csv(const std::vector<LayerSpeedup>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string pareto_csv(const std::vector<Individual>& rows);

inline constexpr const char* kTraceHeader = "cycle,interface,direction,bytes";
std::string trace_line(const TraceEvent& e);

}  // namespace fusesim
