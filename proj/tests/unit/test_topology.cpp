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

#include <doctest.h>

#include <map>
#include <string>

#include "fusesim/topology.hpp"
#include "support.hpp"

using namespace fusesim;
using fusesim::testing::Gen;

namespace {

const char* kHeader = "name,ifmap_h,ifmap_w,kernel,in_channels,out_channels,stride,padding,kind\n";

NetworkTopology parse(const std::string& body) { return parse_topology(std::string(kHeader) + body, "t"); }

/// Pointwise-depthwise-pointwise stack with random shapes.
NetworkTopology random_bottleneck_net(Gen& g, int blocks) {
  NetworkTopology net;
  net.name = "rand";
  int c = g.range(2, 8) * 2;
  int hw = g.range(6, 16);
  net.layers.push_back({"stem", LayerKind::Standard, hw, hw, 3, 3, c, 1, 1});
  for (int b = 0; b < blocks; ++b) {
    const int e = g.range(1, 4) * c;
    const int k = g.pick(std::vector<int>{3, 5});
    const int s = hw >= 4 ? g.range(1, 2) : 1;
    const std::string p = "b" + std::to_string(b);
    net.layers.push_back({p + "_expand", LayerKind::Pointwise, hw, hw, 1, c, e, 1, 0});
    net.layers.push_back({p + "_dw", LayerKind::Depthwise, hw, hw, k, e, e, s, k / 2});
    hw = output_extent(hw, k, s, k / 2);
    c = g.range(1, 8) * 2;
    net.layers.push_back({p + "_project", LayerKind::Pointwise, hw, hw, 1, e, c, 1, 0});
  }
  net.bottleneck_groups = infer_bottleneck_groups(net.layers);
  return net;
}

}  // namespace

TEST_SUITE("topology") {
  TEST_CASE("single standard row gives a one-layer topology with 112x112 output") {
    const auto net = parse("conv1,224,224,3,3,32,2,1,Standard\n");
    REQUIRE(net.layers.size() == 1);
    CHECK(net.layers[0].out_h() == 112);
    CHECK(net.layers[0].out_w() == 112);
    CHECK(net.layers[0].kind == LayerKind::Standard);
  }

  TEST_CASE("empty input is rejected with 'no layers'") {
    CHECK_THROWS_WITH_AS(parse_topology("", "e"), doctest::Contains("no layers"), ParseError);
    CHECK_THROWS_WITH_AS(parse(""), doctest::Contains("no layers"), ParseError);
  }

  TEST_CASE("comments and blank lines are skipped") {
    const auto net = parse_topology(std::string("# a comment\n\n") + kHeader + "# more\nc,8,8,3,3,4,1,1,Standard\n",
                                    "t");
    CHECK(net.layers.size() == 1);
  }

  TEST_CASE("parse errors carry line and column") {
    SUBCASE("bad integer") {
      try {
        parse("c1,8,8,3,3,4,1,1,Standard\nc2,8,x8,1,4,4,1,0,Pointwise\n");
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 6);
      }
    }
    SUBCASE("wrong field count") {
      try {
        parse("c1,8,8,3,3,4,1,Standard\n");
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(e.line() == 2);
      }
    }
    SUBCASE("unknown kind") {
      CHECK_THROWS_WITH_AS(parse("c1,8,8,3,3,4,1,1,Dilated\n"), doctest::Contains("Dilated"), ParseError);
    }
    SUBCASE("missing header") {
      CHECK_THROWS_AS(parse_topology("c1,8,8,3,3,4,1,1,Standard\n", "t"), ParseError);
    }
  }

  TEST_CASE("invariant violations name the layer") {
    CHECK_THROWS_WITH(parse("dwx,8,8,3,4,5,1,1,Depthwise\n"), doctest::Contains("dwx"));
    CHECK_THROWS_WITH(parse("pw,8,8,3,4,5,1,1,Pointwise\n"), doctest::Contains("pw"));
    CHECK_THROWS_WITH(parse("big,2,2,5,4,5,1,0,Standard\n"), doctest::Contains("big"));
    CHECK_THROWS_WITH(parse("a,8,8,3,3,4,1,1,Standard\nb,8,8,1,5,4,1,0,Pointwise\n"), doctest::Contains("'b'"));
  }

  TEST_CASE("missing file is a parse error") {
    CHECK_THROWS_AS(load_topology("/nonexistent/net.csv"), ParseError);
  }

  TEST_CASE("golden topologies load with the published layer counts") {
    const std::map<std::string, std::size_t> counts = {{"mobilenet_v1", 28},       {"mobilenet_v2", 53},
                                                       {"mobilenet_v3_large", 64}, {"mobilenet_v3_small", 54},
                                                       {"mnasnet_b1", 53}};
    for (const auto& [name, n] : counts) {
      CAPTURE(name);
      const auto net = load_topology(fusesim::testing::topology_path(name));
      CHECK(net.layers.size() == n);
      CHECK_NOTHROW(validate_network(net));
      CHECK(net.name == name);
    }
  }

  TEST_CASE("MobileNet-V2 has 17 bottleneck groups around its depthwise layers") {
    const auto net = load_topology(fusesim::testing::topology_path("mobilenet_v2"));
    CHECK(depthwise_count(net) == 17);
    REQUIRE(net.bottleneck_groups.size() == 17);
    for (const auto& g : net.bottleneck_groups) {
      CHECK(net.layers[g.middle].kind == LayerKind::Depthwise);
      CHECK(net.layers[g.last].kind == LayerKind::Pointwise);
      CHECK(g.first <= g.middle);
    }
    // The first block has no expansion layer.
    CHECK(net.bottleneck_groups[0].first == net.bottleneck_groups[0].middle);
  }

  TEST_CASE("write then parse round-trips golden and random networks") {
    for (const auto& name : fusesim::testing::golden_networks()) {
      const auto net = load_topology(fusesim::testing::topology_path(name));
      const auto back = parse_topology(write_topology(net), net.name);
      CHECK(back.layers == net.layers);
    }
    Gen g(11);
    for (int i = 0; i < 50; ++i) {
      const auto net = random_bottleneck_net(g, g.range(1, 4));
      const auto back = parse_topology(write_topology(net), net.name);
      CHECK(back.layers == net.layers);
      CHECK(back.bottleneck_groups.size() == net.bottleneck_groups.size());
    }
  }

  TEST_CASE("fuse_replace with an all-zero mask is the identity") {
    const auto net = load_topology(fusesim::testing::topology_path("mobilenet_v2"));
    const auto same = fuse_replace(net, FuseVariant::Half, std::vector<bool>(depthwise_count(net), false));
    CHECK(same.layers == net.layers);
  }

  TEST_CASE("Half splits C=32 into 16 row and 16 column channels") {
    const auto net = parse("pw1,8,8,1,8,32,1,0,Pointwise\ndw,8,8,3,32,32,1,1,Depthwise\npw2,8,8,1,32,16,1,0,Pointwise\n");
    const auto h = fuse_replace(net, FuseVariant::Half, {true});
    REQUIRE(h.layers.size() == 4);
    CHECK(h.layers[1].name == "dw_row");
    CHECK(h.layers[1].kind == LayerKind::FuSeRow);
    CHECK(h.layers[1].in_channels == 16);
    CHECK(h.layers[1].kernel == 3);
    CHECK(h.layers[2].kind == LayerKind::FuSeCol);
    CHECK(h.layers[2].in_channels == 16);
    CHECK(h.layers[3] == net.layers[2]);
    CHECK_NOTHROW(validate_network(h));
  }

  TEST_CASE("Full keeps 32 channels per half and doubles the next pointwise input") {
    const auto net = parse("pw1,8,8,1,8,32,1,0,Pointwise\ndw,8,8,3,32,32,1,1,Depthwise\npw2,8,8,1,32,16,1,0,Pointwise\n");
    const auto f = fuse_replace(net, FuseVariant::Full, {true});
    REQUIRE(f.layers.size() == 4);
    CHECK(f.layers[1].in_channels == 32);
    CHECK(f.layers[2].in_channels == 32);
    CHECK(f.layers[3].in_channels == 64);
    CHECK(f.layers[3].out_channels == 16);
    CHECK_NOTHROW(validate_network(f));
  }

  TEST_CASE("Half with odd C gives ceil to rows and floor to columns") {
    const auto net = parse("dw,8,8,3,7,7,1,1,Depthwise\n");
    const auto h = fuse_replace(net, FuseVariant::Half, {true});
    CHECK(h.layers[0].in_channels == 4);
    CHECK(h.layers[1].in_channels == 3);
    const auto one = parse("dw,8,8,3,1,1,1,1,Depthwise\n");
    CHECK_THROWS_AS(fuse_replace(one, FuseVariant::Half, {true}), ValidationError);
  }

  TEST_CASE("fuse_replace errors") {
    const auto net = parse("dw,8,8,3,8,8,1,1,Depthwise\n");
    CHECK_THROWS_AS(fuse_replace(net, FuseVariant::Half, {}), ValidationError);
    CHECK_THROWS_AS(fuse_replace(net, FuseVariant::Half, {true, false}), ValidationError);
    // Full needs somewhere to send the doubled channels.
    CHECK_THROWS_AS(fuse_replace(net, FuseVariant::Full, {true}), ValidationError);
  }

  TEST_CASE("Full doubles squeeze-excite Gemm widths that match C") {
    const auto net = parse(
        "dw,8,8,3,16,16,1,1,Depthwise\nse1,1,1,1,16,4,1,0,Gemm\nse2,1,1,1,4,16,1,0,Gemm\npw,8,8,1,16,8,1,0,Pointwise\n");
    const auto f = fuse_replace(net, FuseVariant::Full, {true});
    CHECK(f.layers[2].in_channels == 32);
    CHECK(f.layers[2].out_channels == 4);
    CHECK(f.layers[3].in_channels == 4);
    CHECK(f.layers[3].out_channels == 32);
    CHECK(f.layers[4].in_channels == 32);
  }

  TEST_CASE("property: fuse_replace preserves output spatial dims") {
    Gen g(5);
    for (int i = 0; i < 100; ++i) {
      const auto net = random_bottleneck_net(g, g.range(1, 4));
      std::vector<bool> mask(depthwise_count(net));
      for (std::size_t b = 0; b < mask.size(); ++b) mask[b] = g.coin();
      for (auto v : {FuseVariant::Half, FuseVariant::Full}) {
        const auto out = fuse_replace(net, v, mask);
        CHECK_NOTHROW(validate_network(out));
        std::size_t j = 0;
        for (const auto& l : net.layers) {
          if (is_fuse(out.layers[j].kind)) {
            for (int t = 0; t < 2; ++t, ++j) {
              CHECK(out.layers[j].out_h() == l.out_h());
              CHECK(out.layers[j].out_w() == l.out_w());
            }
          } else {
            CHECK(out.layers[j].out_h() == l.out_h());
            ++j;
          }
        }
        CHECK(j == out.layers.size());
      }
    }
  }

  TEST_CASE("array config parses, validates and round-trips") {
    const auto cfg = parse_array_config("rows = 32\ncols=8 # comment\ndataflow = stos\nstos_strategy = SpatialFirst\n"
                                        "dram_bw_cap = 64\n");
    CHECK(cfg.rows == 32);
    CHECK(cfg.cols == 8);
    CHECK(cfg.dataflow == Dataflow::STOS);
    CHECK(cfg.stos_strategy == MappingStrategy::SpatialFirst);
    CHECK(cfg.dram_bw_cap == 64);
    CHECK(parse_array_config(write_array_config(cfg)) == cfg);
    CHECK(parse_array_config("") == ArrayConfig{});
    CHECK_THROWS_AS(parse_array_config("rowz = 3\n"), ParseError);
    CHECK_THROWS_AS(parse_array_config("rows = 0\n"), ParseError);
    CHECK_THROWS_AS(parse_array_config("dataflow = xy\n"), ParseError);
  }
}
