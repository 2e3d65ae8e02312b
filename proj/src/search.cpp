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

#include "fusesim/search.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "fusesim/sim.hpp"

namespace fusesim {

std::string genome_string(const Genome& g) {
  std::string s(g.size(), '0');
  for (std::size_t i = 0; i < g.size(); ++i) s[i] = g[i] ? '1' : '0';
  return s;
}

void validate_ea(const EAConfig& ea) {
  if (ea.population < 1) throw std::invalid_argument("population must be at least 1");
  if (!(ea.mutation_prob >= 0.0 && ea.mutation_prob < 1.0)) {
    throw std::invalid_argument("mutation probability must lie in [0, 1)");
  }
  if (!(ea.parent_ratio > 0.0 && ea.parent_ratio <= 1.0)) {
    throw std::invalid_argument("parent ratio must lie in (0, 1]");
  }
  if (ea.iterations < 0) throw std::invalid_argument("iterations must be non-negative");
}

LatencyModel::LatencyModel(const NetworkTopology& base, const ArrayConfig& cfg, int threads) : cfg_(cfg) {
  cfg_.dataflow = Dataflow::STOS;
  const std::size_t n = depthwise_count(base);
  const NetworkTopology fused = fuse_replace(base, FuseVariant::Half, std::vector<bool>(n, true));
  SimOptions opt;
  opt.traffic = false;
  opt.threads = threads;
  const NetworkReport b = simulate_network(base, cfg_, opt);
  const NetworkReport f = simulate_network(fused, cfg_, opt);
  std::size_t j = 0;
  for (std::size_t i = 0; i < base.layers.size(); ++i) {
    if (base.layers[i].kind == LayerKind::Depthwise) {
      dw_cycles_.push_back(b.layers[i].cycles);
      fuse_cycles_.push_back(f.layers[j].cycles + f.layers[j + 1].cycles);
      j += 2;
    } else {
      fixed_cycles_ += b.layers[i].cycles;
      j += 1;
    }
  }
}

std::int64_t LatencyModel::cycles_of(const Genome& g) const {
  if (g.size() != dw_cycles_.size()) throw std::invalid_argument("genome length does not match the network");
  std::int64_t c = fixed_cycles_;
  for (std::size_t i = 0; i < g.size(); ++i) c += g[i] ? fuse_cycles_[i] : dw_cycles_[i];
  return c;
}

double LatencyModel::latency_of(const Genome& g) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = memo_.find(g);
  if (it != memo_.end()) return it->second;
  const double v = static_cast<double>(cycles_of(g)) / static_cast<double>(cfg_.freq_hz);
  memo_.emplace(g, v);
  return v;
}

namespace {

bool dominates(const Fitness& a, const Fitness& b) {
  return a.accuracy >= b.accuracy && a.latency_s <= b.latency_s &&
         (a.accuracy > b.accuracy || a.latency_s < b.latency_s);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<Individual> pareto_front(const std::vector<Individual>& points) {
  std::map<Genome, const Individual*> unique;
  for (const auto& p : points) unique.emplace(p.genome, &p);
  std::vector<Individual> front;
  for (const auto& [g, p] : unique) {
    const bool dominated = std::any_of(unique.begin(), unique.end(),
                                       [&](const auto& q) { return dominates(q.second->fitness, p->fitness); });
    if (!dominated) front.push_back(*p);
  }
  std::sort(front.begin(), front.end(), [](const Individual& a, const Individual& b) {
    if (a.fitness.latency_s != b.fitness.latency_s) return a.fitness.latency_s < b.fitness.latency_s;
    return a.genome < b.genome;
  });
  return front;
}

EvolveResult evolve(std::size_t bits, const EAConfig& ea, const LatencyFn& latency, const AccuracyFn& accuracy) {
  validate_ea(ea);
  std::mt19937_64 rng(ea.seed);
  EvolveResult res;
  auto evaluate = [&](Genome g) {
    Individual ind;
    ind.fitness.latency_s = latency(g);
    ind.fitness.accuracy = accuracy(g);
    ind.fitness.score = ind.fitness.accuracy - ea.lambda * ind.fitness.latency_s;
    ind.genome = std::move(g);
    ind.born = static_cast<std::int64_t>(res.history.size());
    res.history.push_back(ind);
    return ind;
  };

  std::vector<Individual> pop;
  for (int i = 0; i < ea.population; ++i) {
    Genome g(bits);
    for (std::size_t b = 0; b < bits; ++b) g[b] = (rng() >> 63) != 0;
    pop.push_back(evaluate(std::move(g)));
  }

  const std::size_t parents = std::max<std::size_t>(1, static_cast<std::size_t>(ea.parent_ratio * ea.population));
  const std::size_t children = static_cast<std::size_t>(ea.population) - parents;
  for (int it = 0; it < ea.iterations && children > 0; ++it) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pop[a].fitness.score > pop[b].fitness.score;
    });
    // Children are generated before any evaluation so RNG order is fixed.
    std::vector<Genome> kids;
    for (std::size_t k = 0; k < children; ++k) {
      std::size_t a = 0, b = 0;
      if (parents > 1) {
        a = static_cast<std::size_t>(rng() % parents);
        b = static_cast<std::size_t>(rng() % (parents - 1));
        if (b >= a) ++b;
      }
      const Genome& pa = pop[order[a]].genome;
      const Genome& pb = pop[order[b]].genome;
      Genome g(bits);
      for (std::size_t i = 0; i < bits; ++i) {
        g[i] = (rng() >> 63) ? pa[i] : pb[i];
        if (unit(rng) < ea.mutation_prob) g[i] = !g[i];
      }
      kids.push_back(std::move(g));
    }
    std::sort(pop.begin(), pop.end(), [](const Individual& a, const Individual& b) { return a.born < b.born; });
    pop.erase(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(children));
    for (auto& g : kids) pop.push_back(evaluate(std::move(g)));
  }
  std::sort(pop.begin(), pop.end(), [](const Individual& a, const Individual& b) { return a.born < b.born; });
  res.final_population = std::move(pop);
  res.pareto = pareto_front(res.history);
  return res;
}

EvolveResult evolve(const NetworkTopology& base, const ArrayConfig& cfg, const EAConfig& ea,
                    const AccuracyFn& accuracy, int threads) {
  LatencyModel model(base, cfg, threads);
  return evolve(model.bits(), ea, [&](const Genome& g) { return model.latency_of(g); }, accuracy);
}

AccuracyFn synthetic_accuracy(double base, double per_layer) {
  return [base, per_layer](const Genome& g) {
    return base - per_layer * static_cast<double>(std::count(g.begin(), g.end(), true));
  };
}

AccuracyFn table_accuracy(std::string_view text, const NetworkTopology& net) {
  std::map<std::string, std::size_t> bit;
  for (const auto& l : net.layers) {
    if (l.kind == LayerKind::Depthwise) bit.emplace(l.name, bit.size());
  }
  std::optional<double> base;
  std::vector<std::optional<double>> delta(bit.size());
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected '<name>,<value>'", lineno, 1);
    const std::string key = line.substr(0, comma);
    const std::string val = line.substr(comma + 1);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc() || p != val.data() + val.size()) {
      throw ParseError("bad number '" + val + "'", lineno, static_cast<int>(comma) + 2);
    }
    if (key == "base") {
      base = v;
    } else if (auto it = bit.find(key); it != bit.end()) {
      delta[it->second] = v;
    } else {
      throw ParseError("'" + key + "' is not a depthwise layer of " + net.name, lineno, 1);
    }
  }
  if (!base) throw ParseError("accuracy table has no base line", lineno, 1);
  std::vector<double> d;
  for (const auto& [name, i] : bit) {
    if (!delta[i]) throw ParseError("accuracy table has no entry for " + name, lineno, 1);
  }
  for (const auto& x : delta) d.push_back(*x);
  return [b = *base, d](const Genome& g) {
    if (g.size() != d.size()) throw std::invalid_argument("genome length does not match the accuracy table");
    double a = b;
    for (std::size_t i = 0; i < g.size(); ++i) a += g[i] ? d[i] : 0.0;
    return a;
  };
}

Genome greedy_half(const LatencyModel& model) {
  const auto& c = model.depthwise_cycles();
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c[a] > c[b]; });
  Genome g(c.size(), false);
  for (std::size_t i = 0; i < c.size() / 2; ++i) g[order[i]] = true;
  return g;
}

}  // namespace fusesim
