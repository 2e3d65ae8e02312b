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

#include <algorithm>

#include "fusesim/search.hpp"
#include "fusesim/sim.hpp"
#include "support.hpp"

using namespace fusesim;
using fusesim::testing::Gen;

namespace {

ArrayConfig array16() {
  ArrayConfig cfg;
  cfg.rows = cfg.cols = 16;
  return cfg;
}

NetworkTopology net(const std::string& name) { return load_topology(fusesim::testing::topology_path(name)); }

std::size_t popcount(const Genome& g) { return static_cast<std::size_t>(std::count(g.begin(), g.end(), true)); }

bool dominated_by(const Individual& p, const Individual& q) {
  return q.fitness.accuracy >= p.fitness.accuracy && q.fitness.latency_s <= p.fitness.latency_s &&
         (q.fitness.accuracy > p.fitness.accuracy || q.fitness.latency_s < p.fitness.latency_s);
}

}  // namespace

TEST_SUITE("search") {
  TEST_CASE("EA config validation") {
    EAConfig ea;
    CHECK_NOTHROW(validate_ea(ea));
    ea.mutation_prob = 1.0;
    CHECK_THROWS_AS(validate_ea(ea), std::invalid_argument);
    ea = EAConfig{};
    ea.parent_ratio = 0.0;
    CHECK_THROWS_AS(validate_ea(ea), std::invalid_argument);
    ea = EAConfig{};
    ea.population = 0;
    CHECK_THROWS_AS(validate_ea(ea), std::invalid_argument);
  }

  TEST_CASE("all-zero genome costs the baseline latency") {
    const auto base = net("mobilenet_v2");
    LatencyModel model(base, array16());
    const Genome zeros(model.bits(), false);
    SimOptions opt;
    opt.traffic = false;
    CHECK(model.bits() == 17);
    CHECK(model.cycles_of(zeros) == simulate_network(base, array16(), opt).total_cycles);
    CHECK(model.latency_of(zeros) == model.latency_of(zeros));
    CHECK_THROWS_AS(model.cycles_of(Genome(3, true)), std::invalid_argument);
  }

  TEST_CASE("all-ones genome matches simulating the fully replaced network") {
    const auto base = net("mobilenet_v2");
    LatencyModel model(base, array16());
    ArrayConfig st = array16();
    st.dataflow = Dataflow::STOS;
    SimOptions opt;
    opt.traffic = false;
    const auto fused = fuse_replace(base, FuseVariant::Half, std::vector<bool>(17, true));
    CHECK(model.cycles_of(Genome(17, true)) == simulate_network(fused, st, opt).total_cycles);
  }

  TEST_CASE("all-ones MobileNet-V3-Large on 16x16 is 4-12x below baseline") {
    LatencyModel model(net("mobilenet_v3_large"), array16());
    const double ratio = model.latency_of(Genome(model.bits(), false)) / model.latency_of(Genome(model.bits(), true));
    CAPTURE(ratio);
    CHECK(ratio >= 4.0);
    CHECK(ratio <= 12.0);
  }

  TEST_CASE("flipping the costliest depthwise layer saves more than flipping the cheapest") {
    LatencyModel model(net("mobilenet_v2"), array16());
    const auto& c = model.depthwise_cycles();
    const auto hi = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
    const auto lo = static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
    Genome a(model.bits(), false), b(model.bits(), false);
    a[hi] = true;
    b[lo] = true;
    CHECK(model.latency_of(a) < model.latency_of(b));
  }

  TEST_CASE("property: adding a FuSe bit never increases latency") {
    LatencyModel model(net("mnasnet_b1"), array16());
    Gen g(70);
    for (int i = 0; i < 300; ++i) {
      Genome x(model.bits());
      for (std::size_t b = 0; b < x.size(); ++b) x[b] = g.coin();
      const std::size_t flip = static_cast<std::size_t>(g.range(0, static_cast<int>(x.size()) - 1));
      Genome y = x;
      y[flip] = true;
      CHECK(model.latency_of(y) <= model.latency_of(x));
    }
  }

  TEST_CASE("constant accuracy: the pareto set is the all-ones genome") {
    const auto base = net("mobilenet_v2");
    EAConfig ea;
    ea.seed = 3;
    const auto res = evolve(base, array16(), ea, [](const Genome&) { return 0.75; });
    REQUIRE(res.pareto.size() == 1);
    CHECK(popcount(res.pareto[0].genome) == 17);
  }

  TEST_CASE("population 1 with no mutation is static") {
    EAConfig ea;
    ea.population = 1;
    ea.mutation_prob = 0.0;
    ea.iterations = 50;
    const auto res = evolve(10, ea, [](const Genome& g) { return 1.0 - 0.01 * double(std::count(g.begin(), g.end(), true)); },
                            synthetic_accuracy());
    CHECK(res.history.size() == 1);
    REQUIRE(res.final_population.size() == 1);
    CHECK(res.final_population[0].genome == res.history[0].genome);
  }

  TEST_CASE("monotone synthetic fitness reaches all-ones on 16 bits for at least 95% of seeds") {
    auto latency = [](const Genome& g) { return double(16 - std::count(g.begin(), g.end(), true)); };
    const auto accuracy = synthetic_accuracy(0.75, 0.002);
    int hit = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      EAConfig ea;
      ea.seed = seed;
      const auto res = evolve(16, ea, latency, accuracy);
      const auto best = std::max_element(res.final_population.begin(), res.final_population.end(),
                                         [](const Individual& a, const Individual& b) { return a.fitness.score < b.fitness.score; });
      hit += popcount(best->genome) == 16;
    }
    CHECK(hit >= 95);
  }

  TEST_CASE("evolve is deterministic per seed and its pareto set is non-dominated") {
    const auto base = net("mobilenet_v3_small");
    EAConfig ea;
    ea.population = 40;
    ea.iterations = 30;
    ea.seed = 11;
    ea.lambda = 10.0;
    const auto a = evolve(base, array16(), ea, synthetic_accuracy(), 1);
    const auto b = evolve(base, array16(), ea, synthetic_accuracy(), 4);
    REQUIRE(a.pareto.size() == b.pareto.size());
    for (std::size_t i = 0; i < a.pareto.size(); ++i) {
      CHECK(a.pareto[i].genome == b.pareto[i].genome);
      CHECK(a.pareto[i].fitness.latency_s == b.pareto[i].fitness.latency_s);
    }
    CHECK(a.history.size() == 40 + 30 * 30);
    for (const auto& p : a.pareto) {
      for (const auto& q : a.history) CHECK_FALSE(dominated_by(p, q));
    }
    for (std::size_t i = 1; i < a.pareto.size(); ++i) {
      CHECK(a.pareto[i - 1].fitness.latency_s <= a.pareto[i].fitness.latency_s);
      CHECK(a.pareto[i - 1].genome != a.pareto[i].genome);
    }
    ea.seed = 12;
    const auto c = evolve(base, array16(), ea, synthetic_accuracy(), 1);
    CHECK(c.history[0].genome != a.history[0].genome);
  }

  TEST_CASE("pareto front keeps one point per genome and drops dominated ones") {
    std::vector<Individual> pts = {{{true, false}, {2.0, 0.7, 0}, 0},
                                   {{false, true}, {1.0, 0.6, 0}, 1},
                                   {{true, true}, {1.0, 0.5, 0}, 2},
                                   {{true, false}, {2.0, 0.7, 0}, 3},
                                   {{false, false}, {3.0, 0.7, 0}, 4}};
    const auto f = pareto_front(pts);
    REQUIRE(f.size() == 2);
    CHECK(genome_string(f[0].genome) == "01");
    CHECK(genome_string(f[1].genome) == "10");
    CHECK(pareto_front({}).empty());
  }

  TEST_CASE("accuracy table estimator") {
    NetworkTopology n;
    n.name = "tiny";
    n.layers = {{"dwa", LayerKind::Depthwise, 8, 8, 3, 4, 4, 1, 1},
                {"pw", LayerKind::Pointwise, 8, 8, 1, 4, 4, 1, 0},
                {"dwb", LayerKind::Depthwise, 8, 8, 3, 4, 4, 1, 1}};
    const auto acc = table_accuracy("# deltas\nbase,0.75\ndwa,-0.01\ndwb,-0.002\n", n);
    CHECK(acc({false, false}) == doctest::Approx(0.75));
    CHECK(acc({true, true}) == doctest::Approx(0.738));
    CHECK(acc({false, true}) == doctest::Approx(0.748));
    CHECK_THROWS_AS(table_accuracy("base,0.75\ndwa,-0.01\n", n), ParseError);
    CHECK_THROWS_AS(table_accuracy("base,0.75\ndwa,-0.01\ndwb,0\npw,0\n", n), ParseError);
    CHECK_THROWS_AS(table_accuracy("dwa,-0.01\ndwb,0\n", n), ParseError);
    CHECK_THROWS_AS(table_accuracy("base,x\n", n), ParseError);
  }

  TEST_CASE("greedy half replaces the costliest floor(N/2) depthwise layers") {
    LatencyModel model(net("mobilenet_v2"), array16());
    const auto g = greedy_half(model);
    CHECK(popcount(g) == 8);
    const auto& c = model.depthwise_cycles();
    std::int64_t min_on = INT64_MAX, max_off = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i]) min_on = std::min(min_on, c[i]);
      else max_off = std::max(max_off, c[i]);
    }
    CHECK(min_on >= max_off);
  }
}
