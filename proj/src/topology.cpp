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

#include "fusesim/topology.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fusesim {

namespace {

constexpr std::string_view kHeader =
    "name,ifmap_h,ifmap_w,kernel,in_channels,out_channels,stride,padding,kind";

constexpr std::array<std::pair<LayerKind, std::string_view>, 6> kKindNames{{
    {LayerKind::Standard, "Standard"},
    {LayerKind::Depthwise, "Depthwise"},
    {LayerKind::Pointwise, "Pointwise"},
    {LayerKind::FuSeRow, "FuSeRow"},
    {LayerKind::FuSeCol, "FuSeCol"},
    {LayerKind::Gemm, "Gemm"},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Splits text into lines, dropping a trailing CR on each.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string layer_error(const LayerDescriptor& l, const std::string& msg) {
  return "layer '" + l.name + "': " + msg;
}

struct Unit {
  std::size_t first;
  std::size_t last;
  int in_channels;  // channels consumed from the previous unit
  int out_channels;
  bool is_gemm;
};

Unit make_unit(const std::vector<LayerDescriptor>& layers, std::size_t i, int prev_out) {
  const LayerDescriptor& l = layers[i];
  if (l.kind == LayerKind::FuSeCol) {
    throw ValidationError(layer_error(l, "FuSeCol must directly follow a FuSeRow"));
  }
  if (l.kind != LayerKind::FuSeRow) {
    return {i, i, l.in_channels, l.out_channels, l.kind == LayerKind::Gemm};
  }
  if (i + 1 >= layers.size() || layers[i + 1].kind != LayerKind::FuSeCol) {
    throw ValidationError(layer_error(l, "FuSeRow must be followed by a FuSeCol"));
  }
  const LayerDescriptor& c = layers[i + 1];
  if (c.ifmap_h != l.ifmap_h || c.ifmap_w != l.ifmap_w || c.kernel != l.kernel ||
      c.stride != l.stride || c.padding != l.padding) {
    throw ValidationError(layer_error(c, "FuSe pair members disagree on shape"));
  }
  int consumed = l.in_channels + c.in_channels;
  // Full variant: both halves read every input channel.
  if (prev_out > 0 && l.in_channels == prev_out && c.in_channels == prev_out) consumed = prev_out;
  return {i, i + 1, consumed, l.out_channels + c.out_channels, false};
}

}  // namespace

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) +
                                        (column > 0 ? ", column " + std::to_string(column) : "") +
                                        ": " + what
                                  : what),
      line_(line),
      column_(column) {}

std::string_view to_string(LayerKind kind) {
  for (const auto& [k, n] : kKindNames) {
    if (k == kind) return n;
  }
  return "?";
}

std::optional<LayerKind> parse_layer_kind(std::string_view text) {
  for (const auto& [k, n] : kKindNames) {
    if (n == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Dataflow df) {
  switch (df) {
    case Dataflow::OutputStationary: return "OS";
    case Dataflow::WeightStationary: return "WS";
    case Dataflow::STOS: return "STOS";
  }
  return "?";
}

std::optional<Dataflow> parse_dataflow(std::string_view text) {
  std::string t = lower(trim(text));
  if (t == "os" || t == "outputstationary") return Dataflow::OutputStationary;
  if (t == "ws" || t == "weightstationary") return Dataflow::WeightStationary;
  if (t == "stos" || t == "st-os") return Dataflow::STOS;
  return std::nullopt;
}

std::string_view to_string(MappingStrategy s) {
  switch (s) {
    case MappingStrategy::SpatialFirst: return "SpatialFirst";
    case MappingStrategy::ChannelsFirst: return "ChannelsFirst";
    case MappingStrategy::Hybrid: return "Hybrid";
  }
  return "?";
}

std::optional<MappingStrategy> parse_strategy(std::string_view text) {
  std::string t = lower(trim(text));
  if (t == "spatialfirst" || t == "spatial") return MappingStrategy::SpatialFirst;
  if (t == "channelsfirst" || t == "channels") return MappingStrategy::ChannelsFirst;
  if (t == "hybrid") return MappingStrategy::Hybrid;
  return std::nullopt;
}

std::string_view to_string(FuseVariant v) { return v == FuseVariant::Half ? "Half" : "Full"; }

void validate_layer(const LayerDescriptor& l) {
  auto fail = [&](const std::string& msg) { throw ValidationError(layer_error(l, msg)); };
  if (l.name.empty()) throw ValidationError("layer with empty name");
  if (l.ifmap_h < 1 || l.ifmap_w < 1) fail("ifmap dims must be positive");
  if (l.kernel < 1) fail("kernel must be positive");
  if (l.in_channels < 1 || l.out_channels < 1) fail("channel counts must be positive");
  if (l.stride < 1) fail("stride must be positive");
  if (l.padding < 0) fail("padding must be non-negative");
  switch (l.kind) {
    case LayerKind::Depthwise:
      if (l.out_channels != l.in_channels) fail("depthwise needs out_channels == in_channels");
      break;
    case LayerKind::Pointwise:
    case LayerKind::Gemm:
      if (l.kernel != 1 || l.stride != 1) fail("pointwise/gemm needs kernel 1 and stride 1");
      break;
    case LayerKind::FuSeRow:
    case LayerKind::FuSeCol:
      if (l.out_channels != l.in_channels) fail("FuSe layer needs out_channels == in_channels");
      break;
    case LayerKind::Standard:
      break;
  }
  if (l.ifmap_h + 2 * l.padding < l.kernel || l.ifmap_w + 2 * l.padding < l.kernel) {
    fail("kernel larger than padded input");
  }
}

void validate_network(const NetworkTopology& net) {
  if (net.layers.empty()) throw ValidationError("no layers");
  for (const auto& l : net.layers) validate_layer(l);
  int prev_out = 0;
  int prev_h = 0, prev_w = 0;
  bool prev_gemm = true;
  for (std::size_t i = 0; i < net.layers.size();) {
    Unit u = make_unit(net.layers, i, prev_out);
    const LayerDescriptor& head = net.layers[u.first];
    if (i > 0) {
      if (u.in_channels != prev_out) {
        throw ValidationError(layer_error(head, "expects " + std::to_string(u.in_channels) +
                                                    " input channels but previous layer produces " +
                                                    std::to_string(prev_out)));
      }
      if (!u.is_gemm && !prev_gemm && (head.ifmap_h != prev_h || head.ifmap_w != prev_w)) {
        throw ValidationError(layer_error(head, "ifmap " + std::to_string(head.ifmap_h) + "x" +
                                                    std::to_string(head.ifmap_w) +
                                                    " does not match previous output " +
                                                    std::to_string(prev_h) + "x" +
                                                    std::to_string(prev_w)));
      }
    }
    prev_out = u.out_channels;
    if (!u.is_gemm) {
      prev_h = head.out_h();
      prev_w = head.out_w();
    }
    prev_gemm = u.is_gemm;
    i = u.last + 1;
  }
}

std::vector<BottleneckGroup> infer_bottleneck_groups(const std::vector<LayerDescriptor>& layers) {
  std::vector<BottleneckGroup> groups;
  const std::size_t n = layers.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t mid_end;
    if (layers[i].kind == LayerKind::Depthwise) {
      mid_end = i;
    } else if (layers[i].kind == LayerKind::FuSeRow && i + 1 < n &&
               layers[i + 1].kind == LayerKind::FuSeCol) {
      mid_end = i + 1;
    } else {
      continue;
    }
    BottleneckGroup g;
    g.middle = i;
    g.first = (i > 0 && layers[i - 1].kind == LayerKind::Pointwise) ? i - 1 : i;
    std::size_t j = mid_end + 1;
    while (j < n && layers[j].kind == LayerKind::Gemm) ++j;
    g.last = (j < n && layers[j].kind == LayerKind::Pointwise) ? j : mid_end;
    groups.push_back(g);
    i = mid_end;
  }
  return groups;
}

NetworkTopology parse_topology(std::string_view text, std::string name) {
  NetworkTopology net;
  net.name = std::move(name);
  bool seen_header = false;
  int line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      std::string compact;
      for (char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
      }
      if (compact != kHeader) throw ParseError("expected header '" + std::string(kHeader) + "'", line_no, 1);
      seen_header = true;
      continue;
    }
    std::vector<std::pair<std::string_view, int>> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      fields.emplace_back(f, static_cast<int>(start) + 1 + static_cast<int>(raw.find(line)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 9) {
      throw ParseError("expected 9 fields, found " + std::to_string(fields.size()), line_no, 1);
    }
    LayerDescriptor l;
    l.name = std::string(trim(fields[0].first));
    if (l.name.empty()) throw ParseError("empty layer name", line_no, fields[0].second);
    int* targets[] = {&l.ifmap_h, &l.ifmap_w, &l.kernel, &l.in_channels,
                      &l.out_channels, &l.stride, &l.padding};
    for (std::size_t k = 0; k < 7; ++k) {
      if (!parse_int(fields[k + 1].first, *targets[k])) {
        throw ParseError("invalid integer '" + std::string(trim(fields[k + 1].first)) + "'", line_no,
                         fields[k + 1].second);
      }
    }
    auto kind = parse_layer_kind(trim(fields[8].first));
    if (!kind) {
      throw ParseError("unknown layer kind '" + std::string(trim(fields[8].first)) + "'", line_no,
                       fields[8].second);
    }
    l.kind = *kind;
    try {
      validate_layer(l);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
    net.layers.push_back(std::move(l));
  }
  if (net.layers.empty()) throw ParseError("no layers");
  validate_network(net);
  net.bottleneck_groups = infer_bottleneck_groups(net.layers);
  return net;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

NetworkTopology load_topology(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_topology(text, std::filesystem::path(path).stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string write_topology(const NetworkTopology& net) {
  std::ostringstream out;
  if (!net.name.empty()) out << "# " << net.name << '\n';
  out << kHeader << '\n';
  for (const auto& l : net.layers) {
    out << l.name << ',' << l.ifmap_h << ',' << l.ifmap_w << ',' << l.kernel << ',' << l.in_channels << ','
        << l.out_channels << ',' << l.stride << ',' << l.padding << ',' << to_string(l.kind) << '\n';
  }
  return out.str();
}

std::size_t depthwise_count(const NetworkTopology& net) {
  return static_cast<std::size_t>(std::count_if(net.layers.begin(), net.layers.end(), [](const auto& l) {
    return l.kind == LayerKind::Depthwise;
  }));
}

NetworkTopology fuse_replace(const NetworkTopology& net, FuseVariant variant,
                             const std::vector<bool>& layer_mask) {
  const std::size_t dw = depthwise_count(net);
  if (layer_mask.size() != dw) {
    throw ValidationError("mask length " + std::to_string(layer_mask.size()) + " does not match " +
                          std::to_string(dw) + " depthwise layers");
  }
  NetworkTopology out;
  out.name = net.name;
  std::size_t dw_index = 0;
  int pending = 0;  // channel count being doubled by a Full pair, 0 if none
  std::string pending_from;
  for (const auto& l : net.layers) {
    if (pending > 0) {
      LayerDescriptor copy = l;
      if (l.kind == LayerKind::Gemm) {
        if (copy.in_channels == pending) copy.in_channels *= 2;
        if (copy.out_channels == pending) copy.out_channels *= 2;
        out.layers.push_back(std::move(copy));
        continue;
      }
      if (l.kind != LayerKind::Pointwise || l.in_channels != pending) {
        throw ValidationError("layer '" + pending_from +
                              "': FuSe-Full replacement needs a following pointwise layer");
      }
      copy.in_channels *= 2;
      out.layers.push_back(std::move(copy));
      pending = 0;
      continue;
    }
    if (l.kind != LayerKind::Depthwise || !layer_mask[dw_index++]) {
      out.layers.push_back(l);
      continue;
    }
    const int c = l.in_channels;
    LayerDescriptor row = l, col = l;
    row.name = l.name + "_row";
    row.kind = LayerKind::FuSeRow;
    col.name = l.name + "_col";
    col.kind = LayerKind::FuSeCol;
    if (variant == FuseVariant::Half) {
      if (c < 2) throw ValidationError(layer_error(l, "FuSe-Half needs at least 2 channels"));
      row.in_channels = row.out_channels = (c + 1) / 2;
      col.in_channels = col.out_channels = c / 2;
    } else {
      pending = c;
      pending_from = l.name;
    }
    out.layers.push_back(std::move(row));
    out.layers.push_back(std::move(col));
  }
  if (pending > 0) {
    throw ValidationError("layer '" + pending_from + "': FuSe-Full replacement needs a following pointwise layer");
  }
  out.bottleneck_groups = infer_bottleneck_groups(out.layers);
  return out;
}

ArrayConfig parse_array_config(std::string_view text) {
  ArrayConfig cfg;
  int line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    std::string_view line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no, 1);
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    const int col = static_cast<int>(eq) + 2;
    auto int_value = [&](auto& field) {
      if (!parse_int(value, field) || field < 0) {
        throw ParseError("invalid value for '" + key + "'", line_no, col);
      }
    };
    if (key == "rows") int_value(cfg.rows);
    else if (key == "cols") int_value(cfg.cols);
    else if (key == "ifmap_sram_bytes") int_value(cfg.ifmap_sram_bytes);
    else if (key == "weight_sram_bytes") int_value(cfg.weight_sram_bytes);
    else if (key == "ofmap_sram_bytes") int_value(cfg.ofmap_sram_bytes);
    else if (key == "freq_hz") int_value(cfg.freq_hz);
    else if (key == "element_bytes") int_value(cfg.element_bytes);
    else if (key == "dram_bw_cap") int_value(cfg.dram_bw_cap);
    else if (key == "bw_window") int_value(cfg.bw_window);
    else if (key == "dataflow") {
      auto df = parse_dataflow(value);
      if (!df) throw ParseError("unknown dataflow '" + std::string(value) + "'", line_no, col);
      cfg.dataflow = *df;
    } else if (key == "stos_strategy") {
      auto s = parse_strategy(value);
      if (!s) throw ParseError("unknown strategy '" + std::string(value) + "'", line_no, col);
      cfg.stos_strategy = *s;
    } else {
      throw ParseError("unknown key '" + key + "'", line_no, 1);
    }
  }
  if (cfg.rows < 1 || cfg.cols < 1 || cfg.ifmap_sram_bytes < 1 || cfg.weight_sram_bytes < 1 ||
      cfg.ofmap_sram_bytes < 1 || cfg.freq_hz < 1 || cfg.element_bytes < 1 || cfg.bw_window < 1) {
    throw ParseError("array dimensions, SRAM sizes, frequency, element size and window must be positive");
  }
  return cfg;
}

ArrayConfig load_array_config(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_array_config(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string write_array_config(const ArrayConfig& cfg) {
  std::ostringstream out;
  out << "rows = " << cfg.rows << '\n'
      << "cols = " << cfg.cols << '\n'
      << "dataflow = " << lower(to_string(cfg.dataflow)) << '\n'
      << "ifmap_sram_bytes = " << cfg.ifmap_sram_bytes << '\n'
      << "weight_sram_bytes = " << cfg.weight_sram_bytes << '\n'
      << "ofmap_sram_bytes = " << cfg.ofmap_sram_bytes << '\n'
      << "freq_hz = " << cfg.freq_hz << '\n'
      << "element_bytes = " << cfg.element_bytes << '\n'
      << "dram_bw_cap = " << cfg.dram_bw_cap << '\n'
      << "bw_window = " << cfg.bw_window << '\n'
      << "stos_strategy = " << lower(to_string(cfg.stos_strategy)) << '\n';
  return out.str();
}

}  // namespace fusesim
