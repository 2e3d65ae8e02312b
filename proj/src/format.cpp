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

#include "fusesim/format.hpp"

#include <charconv>
#include <sstream>

namespace fusesim {

std::string format_float(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

namespace {

const char* kIfaceKeys[4] = {"ifmap_sram", "weight_sram", "ofmap_sram", "dram"};

std::string str(std::string_view s) { return std::string(s); }

Json buckets(const std::map<std::string, LatencyBucket>& b) {
  Json j = Json::object();
  for (const auto& [k, v] : b) j[k] = {{"cycles", v.cycles}, {"latency_s", v.latency_s}, {"share", v.share}};
  return j;
}

}  // namespace

Json to_json(const ArrayConfig& c) {
  return {{"rows", c.rows},
          {"cols", c.cols},
          {"dataflow", str(to_string(c.dataflow))},
          {"ifmap_sram_bytes", c.ifmap_sram_bytes},
          {"weight_sram_bytes", c.weight_sram_bytes},
          {"ofmap_sram_bytes", c.ofmap_sram_bytes},
          {"freq_hz", c.freq_hz},
          {"element_bytes", c.element_bytes},
          {"dram_bw_cap", c.dram_bw_cap},
          {"bw_window", c.bw_window},
          {"stos_strategy", str(to_string(c.stos_strategy))}};
}

Json to_json(const LayerReport& r) {
  Json bw = Json::object();
  for (int i = 0; i < 4; ++i) {
    bw[kIfaceKeys[i]] = {{"avg", r.bandwidth[static_cast<std::size_t>(i)].avg},
                         {"max", r.bandwidth[static_cast<std::size_t>(i)].max}};
  }
  return {{"layer", r.layer},
          {"kind", str(to_string(r.kind))},
          {"dataflow", str(to_string(r.dataflow))},
          {"cycles", r.cycles},
          {"macs", r.macs_scheduled},
          {"folds", r.folds},
          {"stall_cycles", r.stall_cycles},
          {"utilization", r.utilization},
          {"mapping_efficiency", r.mapping_efficiency},
          {"sram_reads", {{"ifmap", r.sram_reads[0]}, {"weight", r.sram_reads[1]}, {"ofmap", r.sram_reads[2]}}},
          {"sram_writes", {{"ifmap", r.sram_writes[0]}, {"weight", r.sram_writes[1]}, {"ofmap", r.sram_writes[2]}}},
          {"dram_reads", r.dram_reads},
          {"dram_writes", r.dram_writes},
          {"bandwidth", bw},
          {"latency_s", r.latency_s}};
}

Json to_json(const NetworkReport& r) {
  Json layers = Json::array();
  for (const auto& l : r.layers) layers.push_back(to_json(l));
  return {{"network", r.network},
          {"config", to_json(r.config)},
          {"layers", layers},
          {"total_cycles", r.total_cycles},
          {"total_latency_s", r.total_latency_s},
          {"total_macs", r.total_macs},
          {"breakdown", buckets(r.breakdown)}};
}

Json to_json(const SliceMap& m) {
  Json slices = Json::array();
  for (const auto& s : m.slices) {
    slices.push_back({{"channel", s.channel},
                      {"out_channel", s.out_channel},
                      {"spatial", s.spatial},
                      {"orientation", str(to_string(s.orientation))},
                      {"source_line", s.source_line},
                      {"input_len", s.input_len},
                      {"kernel_len", s.kernel_len},
                      {"stride", s.stride},
                      {"padding", s.padding},
                      {"outputs", s.outputs}});
  }
  Json folds = Json::array();
  for (const auto& f : m.folds) {
    Json entries = Json::array();
    for (const auto& e : f) {
      entries.push_back({{"array_row", e.array_row}, {"slice", e.slice}, {"out_start", e.out_start}, {"out_len", e.out_len}});
    }
    folds.push_back(entries);
  }
  return {{"strategy", str(to_string(m.strategy))},
          {"rows", m.rows},
          {"cols", m.cols},
          {"kernel", m.kernel},
          {"in_channels", m.in_channels},
          {"in_h", m.in_h},
          {"in_w", m.in_w},
          {"out_channels", m.out_channels},
          {"out_h", m.out_h},
          {"out_w", m.out_w},
          {"slices", slices},
          {"folds", folds}};
}

Json to_json(const RiaVerdict& v) {
  Json w = Json::array();
  for (const auto& x : v.witnesses) {
    w.push_back({{"condition", std::string(1, x.condition)},
                 {"relation", x.relation},
                 {"lhs", x.lhs},
                 {"term", x.term},
                 {"term_text", x.term_text},
                 {"dimension", x.dimension},
                 {"reason", x.reason}});
  }
  return {{"is_ria", v.is_ria},
          {"single_assignment", v.single_assignment},
          {"indexed", v.indexed},
          {"constant_offsets", v.constant_offsets},
          {"witnesses", w}};
}

Json to_json(const CompareResult& r) {
  Json rows = Json::array();
  for (const auto& c : r.rows) {
    rows.push_back({{"variant", c.variant},
                    {"dataflow", str(to_string(c.dataflow))},
                    {"cycles", c.cycles},
                    {"latency_s", c.latency_s},
                    {"speedup", c.speedup},
                    {"breakdown", buckets(c.breakdown)}});
  }
  auto speedups = [](const std::vector<LayerSpeedup>& v) {
    Json a = Json::array();
    for (const auto& s : v) {
      a.push_back({{"layer", s.layer},
                   {"kind", str(to_string(s.kind))},
                   {"baseline_cycles", s.baseline_cycles},
                   {"fuse_cycles", s.fuse_cycles},
                   {"speedup", s.speedup}});
    }
    return a;
  };
  return {{"rows", rows}, {"layerwise", speedups(r.layerwise)}, {"bottleneck", speedups(r.bottleneck)}};
}

Json tensor_to_json(const Tensor3d& t) {
  return {{"dims", {t.channels(), t.height(), t.width()}},
          {"data", std::vector<double>(t.data().data(), t.data().data() + t.size())}};
}

Tensor3d tensor_from_json(const Json& j) {
  const auto dims = j.at("dims").get<std::vector<int>>();
  if (dims.size() != 3) throw std::invalid_argument("tensor dims must have 3 entries");
  const auto data = j.at("data").get<std::vector<double>>();
  Tensor3d t(dims[0], dims[1], dims[2]);
  if (static_cast<Eigen::Index>(data.size()) != t.size()) throw std::invalid_argument("tensor data length mismatch");
  std::copy(data.begin(), data.end(), t.data().data());
  return t;
}

Json scaffold_to_json(const ScaffoldedLayer<double>& l) {
  Json roles = Json::array();
  for (auto r : l.roles) roles.push_back(r == ChannelRole::RowFilter ? "Row" : "Col");
  std::vector<double> a(static_cast<std::size_t>(l.adapter.size()));
  for (Eigen::Index i = 0; i < l.adapter.rows(); ++i) {
    for (Eigen::Index k = 0; k < l.adapter.cols(); ++k) a[static_cast<std::size_t>(i * l.adapter.cols() + k)] = l.adapter(i, k);
  }
  return {{"kernel", tensor_to_json(l.kernel)}, {"adapter", a}, {"roles", roles}};
}

ScaffoldedLayer<double> scaffold_from_json(const Json& j) {
  ScaffoldedLayer<double> l;
  l.kernel = tensor_from_json(j.at("kernel"));
  const int k = l.kernel.height();
  const auto a = j.at("adapter").get<std::vector<double>>();
  if (static_cast<int>(a.size()) != k * k) throw std::invalid_argument("adapter must have K*K entries");
  l.adapter.resize(k, k);
  for (int i = 0; i < k; ++i) {
    for (int c = 0; c < k; ++c) l.adapter(i, c) = a[static_cast<std::size_t>(i * k + c)];
  }
  for (const auto& r : j.at("roles")) {
    const auto s = r.get<std::string>();
    if (s != "Row" && s != "Col") throw std::invalid_argument("role must be Row or Col");
    l.roles.push_back(s == "Row" ? ChannelRole::RowFilter : ChannelRole::ColFilter);
  }
  l.validate();
  return l;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string layer_csv(const NetworkReport& r) {
  std::ostringstream o;
  o << "layer,kind,dataflow,cycles,macs,folds,stall_cycles,utilization,mapping_efficiency,"
       "ifmap_sram_reads,weight_sram_reads,ofmap_sram_reads,ifmap_sram_writes,weight_sram_writes,"
       "ofmap_sram_writes,dram_reads,dram_writes,latency_s\n";
  for (const auto& l : r.layers) {
    o << l.layer << ',' << to_string(l.kind) << ',' << to_string(l.dataflow) << ',' << l.cycles << ','
      << l.macs_scheduled << ',' << l.folds << ',' << l.stall_cycles << ',' << format_float(l.utilization) << ','
      << format_float(l.mapping_efficiency);
    for (auto v : l.sram_reads) o << ',' << v;
    for (auto v : l.sram_writes) o << ',' << v;
    o << ',' << l.dram_reads << ',' << l.dram_writes << ',' << format_float(l.latency_s) << '\n';
  }
  return o.str();
}

std::string bandwidth_csv(const std::vector<BandwidthRow>& rows) {
  std::ostringstream o;
  o << "layer,kind";
  for (const char* k : kIfaceKeys) o << ',' << k << "_avg," << k << "_max";
  o << '\n';
  for (const auto& r : rows) {
    o << r.layer << ',' << to_string(r.kind);
    for (const auto& b : r.bandwidth) o << ',' << format_float(b.avg) << ',' << format_float(b.max);
    o << '\n';
  }
  return o.str();
}

std::string compare_csv(const CompareResult& r) {
  std::ostringstream o;
  o << "variant,dataflow,cycles,latency_s,speedup,depthwise_share,fuse_share,pointwise_share,other_share\n";
  for (const auto& c : r.rows) {
    auto share = [&](const char* k) {
      auto it = c.breakdown.find(k);
      return format_float(it == c.breakdown.end() ? 0.0 : it->second.share);
    };
    o << c.variant << ',' << to_string(c.dataflow) << ',' << c.cycles << ',' << format_float(c.latency_s) << ','
      << format_float(c.speedup) << ',' << share("Depthwise") << ',' << share("FuSe") << ',' << share("Pointwise")
      << ',' << share("Other") << '\n';
  }
  return o.str();
}

std::string layerwise_csv(const std::vector<LayerSpeedup>& rows) {
  std::ostringstream o;
  o << "layer,kind,baseline_cycles,fuse_cycles,speedup\n";
  for (const auto& s : rows) {
    o << s.layer << ',' << to_string(s.kind) << ',' << s.baseline_cycles << ',' << s.fuse_cycles << ','
      << format_float(s.speedup) << '\n';
  }
  return o.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream o;
  o << "rows,cols,baseline_cycles,fuse_cycles,baseline_latency_s,fuse_latency_s,speedup\n";
  for (const auto& r : rows) {
    o << r.rows << ',' << r.cols << ',' << r.baseline_cycles << ',' << r.fuse_cycles << ','
      << format_float(r.baseline_latency_s) << ',' << format_float(r.fuse_latency_s) << ',' << format_float(r.speedup)
      << '\n';
  }
  return o.str();
}

std::string pareto_csv(const std::vector<Individual>& rows) {
  std::ostringstream o;
  o << "genome,accuracy,latency_s\n";
  for (const auto& r : rows) {
    o << genome_string(r.genome) << ',' << format_float(r.fitness.accuracy) << ','
      << format_float(r.fitness.latency_s) << '\n';
  }
  return o.str();
}

std::string trace_line(const TraceEvent& e) {
  std::string s = std::to_string(e.cycle);
  s += ',';
  s += to_string(e.interface);
  s += ',';
  s += to_string(e.direction);
  s += ',';
  s += std::to_string(e.bytes);
  return s;
}

}  // namespace fusesim
