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

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "fusesim/format.hpp"
#include "fusesim/lowering.hpp"
#include "fusesim/metrics.hpp"
#include "fusesim/nos.hpp"
#include "fusesim/ria.hpp"
#include "fusesim/search.hpp"
#include "fusesim/sim.hpp"
#include "fusesim/topology.hpp"
#include "manifest.hpp"

namespace fusesim::cli {

int thread_budget() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("SIM_THREADS")) {
    int cap = 0;
    const std::string_view s(env);
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec == std::errc() && p == s.data() + s.size() && cap >= 1) n = std::min(n, cap);
  }
  return n;
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  std::vector<std::string> command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool trace = false;
  ArrayConfig cfg;
  RunManifest manifest;

  void input(const std::string& path) { manifest.input_digests[path] = sha256_hex(read_file(path)); }

  void emit(const std::string& name, const std::string& content) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    write_atomic(path, content);
    manifest.output_digests[name] = sha256_hex(content);
  }

  void finish() {
    if (out_dir.empty()) return;
    manifest.command = command;
    manifest.config_json = to_json(cfg).dump();
    manifest.tool_version = kToolVersion;
    manifest.seed = seed;
    write_atomic((std::filesystem::path(out_dir) / "manifest.json").string(), manifest.to_json());
  }
};

NetworkTopology load_net(Context& ctx, const std::string& path) {
  NetworkTopology net = load_topology(path);
  ctx.input(path);
  return net;
}

NetworkTopology apply_fuse(const NetworkTopology& net, const std::string& fuse) {
  if (fuse == "none") return net;
  const FuseVariant v = fuse == "half" ? FuseVariant::Half : FuseVariant::Full;
  return fuse_replace(net, v, std::vector<bool>(depthwise_count(net), true));
}

std::vector<std::pair<int, int>> parse_sizes(const std::string& text) {
  std::vector<std::pair<int, int>> sizes;
  std::stringstream ss(text);
  std::string tok;
  auto num = [&](std::string_view s) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v < 1) throw UsageError("bad array size '" + tok + "'");
    return v;
  };
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const auto x = tok.find('x');
    if (x == std::string::npos) {
      const int v = num(tok);
      sizes.emplace_back(v, v);
    } else {
      sizes.emplace_back(num(std::string_view(tok).substr(0, x)), num(std::string_view(tok).substr(x + 1)));
    }
  }
  if (sizes.empty()) throw UsageError("size list is empty");
  return sizes;
}

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.command = args;
  CLI::App app{"Systolic-array simulator for FuSe convolutions", "fusesim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  app.add_option("--config", ctx.config_path, "Array config file (key = value)");
  app.add_option("--seed", ctx.seed, "RNG seed");
  app.add_option("--out", ctx.out_dir, "Output directory");
  app.add_flag("--trace", ctx.trace, "Write a per-cycle trace CSV (simulate)");
  app.fallthrough();

  std::string topology, dataflow, fuse = "none", strategy;
  auto* sim = app.add_subcommand("simulate", "Simulate one network");
  sim->add_option("topology", topology, "Topology CSV")->required();
  sim->add_option("--dataflow", dataflow, "os, ws or stos");
  sim->add_option("--fuse", fuse, "Replace depthwise layers: none, half, full")
      ->check(CLI::IsMember({"none", "half", "full"}));
  sim->add_option("--strategy", strategy, "ST-OS slice strategy");

  auto* cmp = app.add_subcommand("compare", "Baseline OS/WS against FuSe-Half/Full on ST-OS");
  cmp->add_option("topology", topology, "Topology CSV")->required();

  std::string sizes = "8,16,32,64";
  auto* sweep = app.add_subcommand("sweep", "Speedup across array sizes");
  sweep->add_option("topology", topology, "Topology CSV")->required();
  sweep->add_option("--sizes", sizes, "Comma-separated sizes, N or RxS");

  auto* count = app.add_subcommand("count", "MAC and parameter counts");
  count->add_option("topology", topology, "Topology CSV")->required();
  count->add_option("--fuse", fuse, "Replace depthwise layers: none, half, full")
      ->check(CLI::IsMember({"none", "half", "full"}));

  std::string ria_file;
  auto* ria = app.add_subcommand("ria", "Recurrence analysis");
  ria->require_subcommand(1);
  auto* ria_check = ria->add_subcommand("check", "Classify a recurrence system");
  ria_check->add_option("file", ria_file, "Recurrence DSL file")->required();

  EAConfig ea;
  ea.lambda = 10.0;
  std::string estimator = "synthetic", table;
  auto* search = app.add_subcommand("search", "Hybrid network search");
  search->require_subcommand(1);
  auto* evolve_cmd = search->add_subcommand("evolve", "Regularized evolution over depthwise/FuSe choices");
  evolve_cmd->add_option("topology", topology, "Topology CSV")->required();
  evolve_cmd->add_option("--lambda", ea.lambda, "Latency weight: score = accuracy - lambda * latency_s");
  evolve_cmd->add_option("--population", ea.population);
  evolve_cmd->add_option("--iterations", ea.iterations);
  evolve_cmd->add_option("--mutation", ea.mutation_prob);
  evolve_cmd->add_option("--parent-ratio", ea.parent_ratio);
  evolve_cmd->add_option("--estimator", estimator, "synthetic or constant")
      ->check(CLI::IsMember({"synthetic", "constant"}));
  evolve_cmd->add_option("--accuracy-table", table, "Lines `base,<v>` and `<layer>,<delta>`");

  int cases = 50, channels = 4, kernel = 3, size = 6, stride = 1, padding = 1;
  std::string layer_file, input_file;
  auto* nos = app.add_subcommand("nos", "Neural operator scaffolding");
  nos->require_subcommand(1);
  auto* grad = nos->add_subcommand("gradcheck", "Analytic vs finite-difference gradients");
  grad->add_option("--cases", cases)->check(CLI::PositiveNumber);
  grad->add_option("--channels", channels)->check(CLI::PositiveNumber);
  grad->add_option("--kernel", kernel)->check(CLI::PositiveNumber);
  grad->add_option("--size", size)->check(CLI::PositiveNumber);
  grad->add_option("--stride", stride)->check(CLI::PositiveNumber);
  grad->add_option("--padding", padding)->check(CLI::NonNegativeNumber);
  grad->add_option("--layer", layer_file, "Scaffolded layer JSON");
  grad->add_option("--input", input_file, "Input tensor JSON");

  std::string layer_name;
  auto* lower = app.add_subcommand("lower", "Lowering inspection");
  lower->require_subcommand(1);
  auto* dump_cmd = lower->add_subcommand("dump", "Emit the ST-OS slice map of one layer as JSON");
  dump_cmd->add_option("topology", topology, "Topology CSV")->required();
  dump_cmd->add_option("--layer", layer_name, "FuSe layer, or a depthwise layer to lower as a FuSe-Half pair")
      ->required();
  dump_cmd->add_option("--strategy", strategy, "ST-OS slice strategy");

  std::vector<std::string> argv_store = args;
  argv_store.insert(argv_store.begin(), "fusesim");
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!ctx.config_path.empty()) {
      ctx.cfg = load_array_config(ctx.config_path);
      ctx.input(ctx.config_path);
    }
    if (!dataflow.empty()) {
      auto df = parse_dataflow(dataflow);
      if (!df) throw UsageError("unknown dataflow '" + dataflow + "'");
      ctx.cfg.dataflow = *df;
    }
    if (!strategy.empty()) {
      auto s = parse_strategy(strategy);
      if (!s) throw UsageError("unknown strategy '" + strategy + "'");
      ctx.cfg.stos_strategy = *s;
    }
    if (ctx.trace && ctx.out_dir.empty()) throw UsageError("--trace needs --out");
    const int threads = thread_budget();
    const bool files = !ctx.out_dir.empty();

    if (*sim) {
      const NetworkTopology net = apply_fuse(load_net(ctx, topology), fuse);
      SimOptions opt;
      opt.threads = threads;
      std::optional<std::ofstream> trace_file;
      std::string trace_tmp;
      TraceSink sink;
      if (ctx.trace) {
        std::filesystem::create_directories(ctx.out_dir);
        trace_tmp = (std::filesystem::path(ctx.out_dir) / "trace.csv.tmp").string();
        trace_file.emplace(trace_tmp, std::ios::binary | std::ios::trunc);
        *trace_file << kTraceHeader << '\n';
        sink = [&](const TraceEvent& e) { *trace_file << trace_line(e) << '\n'; };
        opt.sink = &sink;
      }
      const NetworkReport rep = simulate_network(net, ctx.cfg, opt);
      const std::string json = dump(to_json(rep));
      if (files) {
        ctx.emit("report.json", json);
        ctx.emit("layers.csv", layer_csv(rep));
        ctx.emit("bandwidth.csv", bandwidth_csv(bandwidth_profile(rep.layers)));
        if (trace_file) {
          trace_file->close();
          const std::string final_path = (std::filesystem::path(ctx.out_dir) / "trace.csv").string();
          std::filesystem::rename(trace_tmp, final_path);
          ctx.manifest.output_digests["trace.csv"] = sha256_hex(read_file(final_path));
        }
        out << rep.network << ": " << rep.total_cycles << " cycles, " << format_float(rep.total_latency_s * 1e3)
            << " ms\n";
      } else {
        out << json;
      }
    } else if (*cmp) {
      const NetworkTopology net = load_net(ctx, topology);
      const CompareResult res = compare_network(net, ctx.cfg, threads);
      const std::string csv = compare_csv(res);
      if (files) {
        ctx.emit("compare.csv", csv);
        ctx.emit("layerwise.csv", layerwise_csv(res.layerwise));
        ctx.emit("bottleneck.csv", layerwise_csv(res.bottleneck));
        ctx.emit("compare.json", dump(to_json(res)));
      }
      out << csv;
    } else if (*sweep) {
      const auto list = parse_sizes(sizes);
      const NetworkTopology net = load_net(ctx, topology);
      const std::string csv = sweep_csv(scaling_sweep(net, list, ctx.cfg, threads));
      if (files) ctx.emit("sweep.csv", csv);
      out << csv;
    } else if (*count) {
      const NetworkTopology net = apply_fuse(load_net(ctx, topology), fuse);
      const std::string csv = count_csv(network_counts(net));
      if (files) ctx.emit("count.csv", csv);
      out << csv;
    } else if (*ria_check) {
      const std::string text = read_file(ria_file);
      ctx.input(ria_file);
      const std::string json = dump(to_json(classify(parse_recurrences(text))));
      if (files) ctx.emit("ria.json", json);
      out << json;
    } else if (*evolve_cmd) {
      const NetworkTopology net = load_net(ctx, topology);
      ea.seed = ctx.seed;
      AccuracyFn acc;
      if (!table.empty()) {
        acc = table_accuracy(read_file(table), net);
        ctx.input(table);
      } else if (estimator == "constant") {
        acc = [](const Genome&) { return 0.75; };
      } else {
        acc = synthetic_accuracy();
      }
      const EvolveResult res = evolve(net, ctx.cfg, ea, acc, threads);
      const std::string csv = pareto_csv(res.pareto);
      if (files) ctx.emit("pareto.csv", csv);
      out << csv;
    } else if (*grad) {
      std::mt19937_64 rng(ctx.seed);
      std::ostringstream csv;
      csv << "case,max_rel_error\n";
      double worst = 0.0;
      std::optional<ScaffoldedLayer<double>> fixed_layer;
      std::optional<Tensor3d> fixed_input;
      if (!layer_file.empty()) {
        fixed_layer = scaffold_from_json(Json::parse(read_file(layer_file)));
        ctx.input(layer_file);
      }
      if (!input_file.empty()) {
        fixed_input = tensor_from_json(Json::parse(read_file(input_file)));
        ctx.input(input_file);
      }
      for (int i = 0; i < cases; ++i) {
        ScaffoldedLayer<double> layer;
        if (fixed_layer) {
          layer = *fixed_layer;
        } else {
          layer.kernel = Tensor3d(channels, kernel, kernel);
          for (Eigen::Index j = 0; j < layer.kernel.size(); ++j) layer.kernel.data()[j] = uniform(rng);
          layer.adapter.resize(kernel, kernel);
          for (Eigen::Index j = 0; j < layer.adapter.size(); ++j) layer.adapter.data()[j] = uniform(rng);
          layer.roles = half_roles(channels);
        }
        Tensor3d input;
        if (fixed_input) {
          input = *fixed_input;
        } else {
          input = Tensor3d(layer.channels(), size, size);
          for (Eigen::Index j = 0; j < input.size(); ++j) input.data()[j] = uniform(rng);
        }
        const Tensor3d y = scaffold_forward(layer, input, stride, padding);
        Tensor3d teacher(y.channels(), y.height(), y.width());
        for (Eigen::Index j = 0; j < teacher.size(); ++j) teacher.data()[j] = uniform(rng);
        const double e = grad_check(layer, input, distill_loss_against(teacher), stride, padding).max_rel_error;
        worst = std::max(worst, e);
        csv << i << ',' << format_float(e) << '\n';
      }
      if (files) ctx.emit("gradcheck.csv", csv.str());
      out << csv.str() << "max," << format_float(worst) << '\n';
    } else if (*dump_cmd) {
      const NetworkTopology net = load_net(ctx, topology);
      ArrayConfig cfg = ctx.cfg;
      cfg.dataflow = Dataflow::STOS;
      const auto it = std::find_if(net.layers.begin(), net.layers.end(),
                                   [&](const LayerDescriptor& l) { return l.name == layer_name; });
      if (it == net.layers.end()) throw UsageError("no layer named '" + layer_name + "'");
      SliceMap map;
      if (it->kind == LayerKind::Depthwise) {
        std::vector<bool> mask(depthwise_count(net), false);
        std::size_t bit = 0;
        for (auto l = net.layers.begin(); l != it; ++l) bit += l->kind == LayerKind::Depthwise ? 1 : 0;
        mask[bit] = true;
        const NetworkTopology fused = fuse_replace(net, FuseVariant::Half, mask);
        const auto row = std::find_if(fused.layers.begin(), fused.layers.end(),
                                      [&](const LayerDescriptor& l) { return l.name == layer_name + "_row"; });
        map = lower_stos(*row, *(row + 1), cfg, cfg.stos_strategy, FuseVariant::Half);
      } else {
        map = lower_stos(*it, cfg, cfg.stos_strategy);
      }
      const std::string json = dump(to_json(map));
      if (files) ctx.emit("slicemap.json", json);
      out << json;
    }
    ctx.finish();
    return 0;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace fusesim::cli
