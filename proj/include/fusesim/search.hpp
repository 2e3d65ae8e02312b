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
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "fusesim/topology.hpp"

namespace fusesim {

/// One bit per depthwise layer of the base network; 1 = FuSe-Half.
using Genome = std::vector<bool>;

std::string genome_string(const Genome& g);

struct EAConfig {
  int population = 100;
  double mutation_prob = 0.1;
  double parent_ratio = 0.25;  // top fraction eligible as parents
  int iterations = 100;
  std::uint64_t seed = 0;
  double lambda = 1.0;  // score = accuracy - lambda * latency_s
};

void validate_ea(const EAConfig& ea);

struct Fitness {
  double latency_s = 0.0;
  double accuracy = 0.0;
  double score = 0.0;
};

struct Individual {
  Genome genome;
  Fitness fitness;
  std::int64_t born = 0;  // evaluation index
};

using LatencyFn = std::function<double(const Genome&)>;
using AccuracyFn = std::function<double(const Genome&)>;

/// Latency of hybrid networks on the ST-OS array. Layers are independent, so
/// each depthwise layer is simulated once per choice and genomes are summed
/// from those costs; results are also memoized per genome.
class LatencyModel {
 public:
  LatencyModel(const NetworkTopology& base, const ArrayConfig& cfg, int threads = 1);

  double latency_of(const Genome& g);
  std::int64_t cycles_of(const Genome& g) const;
  std::size_t bits() const { return dw_cycles_.size(); }

  /// Baseline cycles of each depthwise layer, in network order.
  const std::vector<std::int64_t>& depthwise_cycles() const { return dw_cycles_; }
  const std::vector<std::int64_t>& fuse_cycles() const { return fuse_cycles_; }

 private:
  ArrayConfig cfg_;
  std::int64_t fixed_cycles_ = 0;
  std::vector<std::int64_t> dw_cycles_;
  std::vector<std::int64_t> fuse_cycles_;
  std::map<Genome, double> memo_;
  std::mutex mu_;
};

struct EvolveResult {
  std::vector<Individual> pareto;   // sorted by latency, then genome
  std::vector<Individual> history;  // every evaluation, in order
  std::vector<Individual> final_population;
};

/// Regularized evolution. Each iteration the top parent_ratio of the
/// population are parents; population - parents children are produced by
/// uniform crossover of two distinct parents and per-bit mutation, and the
/// same number of oldest individuals are retired.
EvolveResult evolve(std::size_t bits, const EAConfig& ea, const LatencyFn& latency, const AccuracyFn& accuracy);

EvolveResult evolve(const NetworkTopology& base, const ArrayConfig& cfg, const EAConfig& ea,
                    const AccuracyFn& accuracy, int threads = 1);

/// Non-dominated points (higher accuracy, lower latency) among `points`,
/// one per distinct genome.
std::vector<Individual> pareto_front(const std::vector<Individual>& points);

/// accuracy = base - per_layer * popcount
AccuracyFn synthetic_accuracy(double base = 0.75, double per_layer = 0.002);

/// Table with lines `base,<value>` and `<depthwise layer name>,<delta>`;
/// accuracy = base + sum of deltas of FuSe layers. Every depthwise layer of
/// `net` needs an entry.
AccuracyFn table_accuracy(std::string_view text, const NetworkTopology& net);

/// Replaces the half of the depthwise layers with the highest baseline
/// latency (ties to the earlier layer).
Genome greedy_half(const LatencyModel& model);

}  // namespace fusesim
