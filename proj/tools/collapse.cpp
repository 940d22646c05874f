// collapse: command-line driver for the SPMD -> MPMD pipeline.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "collapse/bench.hpp"
#include "collapse/dump.hpp"
#include "collapse/exec.hpp"
#include "collapse/hostdesc.hpp"
#include "collapse/parser.hpp"
#include "collapse/transform.hpp"

namespace {

using namespace collapse;

enum Exit : int { kOk = 0, kDivergence = 1, kUsage = 2, kTransform = 3, kRuntime = 4 };

struct Common {
  std::string mode = "auto";
  int warp_size = 32;
  int block_size = 0;
  int grid_size = 0;
  bool specialize = false;
  int workers = static_cast<int>(default_workers());
  bool json = false;
  std::string mutate;
  std::string kernel;
};

CollapseMode parse_mode(const std::string& s) {
  if (s == "flat") return CollapseMode::Flat;
  if (s == "hier") return CollapseMode::Hier;
  return CollapseMode::Auto;
}

TransformOptions transform_options(const Common& c) {
  TransformOptions t;
  t.mode = parse_mode(c.mode);
  t.warp_size = c.warp_size;
  t.block_size = c.block_size;
  t.skip_raw = c.mutate == "raw";
  t.skip_war = c.mutate == "war";
  t.skip_extra = c.mutate == "extra";
  return t;
}

EngineOptions engine_options(const Common& c) {
  EngineOptions e;
  e.mode = parse_mode(c.mode);
  e.warp_size = c.warp_size;
  e.specialize = c.specialize;
  e.workers = c.workers;
  e.grid_override = c.grid_size;
  e.block_override = c.block_size;
  e.transform = transform_options(c);
  return e;
}

void add_common(CLI::App* app, Common& c, bool launch_flags) {
  app->add_option("--mode", c.mode, "Collapsing mode")->check(CLI::IsMember({"flat", "hier", "auto"}));
  app->add_option("--warp-size", c.warp_size, "Warp size")->check(CLI::PositiveNumber);
  app->add_option("--block-size", c.block_size, "Block size (threads per block)")->check(CLI::PositiveNumber);
  app->add_option("--grid-size", c.grid_size, "Grid size (blocks)")->check(CLI::NonNegativeNumber);
  app->add_flag("--specialize", c.specialize, "Fold launch dimensions into the program");
  app->add_flag("--json", c.json, "Machine-readable output");
  app->add_option("--kernel", c.kernel, "Kernel to process (default: all)");
  auto* m = app->add_option("--mutate", c.mutate, "Disable one barrier class")->check(
      CLI::IsMember({"raw", "war", "extra"}));
  m->group("");
  if (launch_flags) app->add_option("--workers", c.workers, "Concurrent block executors")->check(CLI::PositiveNumber);
}

std::vector<const KernelDef*> select(const KernelModule& m, const std::string& name) {
  std::vector<const KernelDef*> out;
  for (const auto& k : m.kernels) {
    if (name.empty() || k.name == name) out.push_back(&k);
  }
  if (!name.empty() && out.empty()) throw CLI::ValidationError("--kernel", "no kernel named '" + name + "'");
  return out;
}

// ------------------------------------------------------------------ transform

struct TransformArgs {
  Common common;
  std::string input;
  std::string emit_cfg;
  std::string emit_ir;
  std::string output;
};

int cmd_transform(const TransformArgs& a) {
  KernelModule module = parse_module_file(a.input);
  std::optional<int> emit_step;
  const bool as_dot = !a.emit_cfg.empty();
  const std::string& emit = as_dot ? a.emit_cfg : a.emit_ir;
  if (!emit.empty() && emit != "final") {
    if (emit.rfind("step", 0) != 0 || emit.size() != 5 || emit[4] < '0' || emit[4] > '6') {
      std::cerr << "error: --emit-cfg/--emit-ir expect step0..step6 or final\n";
      return kUsage;
    }
    emit_step = emit[4] - '0';
  }
  std::ostringstream out;
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const KernelDef* k : select(module, a.common.kernel)) {
    TransformOptions t = transform_options(a.common);
    std::string step_dot;
    if (emit_step) {
      t.on_step = [&](int n, const KernelIR& ir) {
        if (n != *emit_step) return;
        step_dot = as_dot ? dump_dot(ir, ir.name + " step" + std::to_string(n)) : dump_text(ir);
        // Intermediate dumps stay visible when a later step fails.
        if (!a.common.json && a.output.empty()) {
          std::cout << step_dot << std::flush;
          step_dot.clear();
        }
      };
    }
    MpmdProgram p = hybrid_transform(*k, t);
    if (a.common.specialize) {
      if (a.common.block_size <= 0) {
        std::cerr << "error: --specialize needs --block-size\n";
        return kUsage;
      }
      p = specialize(p, a.common.block_size, a.common.grid_size > 0 ? a.common.grid_size : 1);
    }
    std::string text = emit_step                ? step_dot
                       : as_dot                ? dump_dot(p.ir, p.ir.name + " final")
                                               : dump_text(p.ir);
    if (a.common.json) {
      nlohmann::ordered_json j;
      j["kernel"] = k->name;
      j["mode"] = std::string(to_string(p.mode));
      j["warp_regions"] = p.warp_regions.size();
      j["block_regions"] = p.block_regions.size();
      nlohmann::ordered_json reps = nlohmann::ordered_json::array();
      for (const auto& r : p.replicated) {
        reps.push_back({{"name", r.name}, {"extent", r.extent == Replication::Warp ? "warp" : "block"}});
      }
      j["replicated"] = reps;
      j["ir"] = text;
      doc.push_back(j);
    } else if (!text.empty()) {
      out << text;
      if (text.back() != '\n') out << '\n';
    }
  }
  std::string result = a.common.json ? doc.dump(2) + "\n" : out.str();
  if (a.output.empty()) {
    std::cout << result;
  } else {
    std::ofstream f(a.output);
    f << result;
  }
  return kOk;
}

// ------------------------------------------------------------------ run

struct RunArgs {
  Common common;
  std::string host;
  std::string source;
  std::string engine = "mpmd";
  std::string out_dir;
  bool trace_counts = false;
};

KernelModule load_module(const HostDesc& desc, const std::string& override_source) {
  std::string path = !override_source.empty() ? override_source : desc.source.string();
  if (path.empty()) throw HostDescError("host description names no kernel source; pass --source");
  return parse_module_file(path);
}

int cmd_run(const RunArgs& a) {
  HostDesc desc = load_host_desc(a.host);
  desc.output_dir = a.out_dir;
  KernelModule module = load_module(desc, a.source);
  ExecTrace trace;
  EngineOptions e = engine_options(a.common);
  if (a.trace_counts) e.trace = &trace;
  LaunchHook hook = a.engine == "oracle" ? oracle_hook(e) : mpmd_hook(e);
  std::ostringstream dumps;
  HostResult r = execute_host(desc, module, hook, a.common.json ? nullptr : &dumps);
  if (a.common.json) {
    nlohmann::ordered_json j;
    j["dumps"] = r.dumps;
    if (a.trace_counts) j["trace"] = nlohmann::ordered_json::parse(trace.to_json());
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << dumps.str();
    if (a.trace_counts) std::cout << "trace: " << trace.to_json() << "\n";
  }
  return kOk;
}

// ------------------------------------------------------------------ diff

struct DiffArgs {
  Common common;
  std::string input;
  std::string host;
  double fp_tol = 0.0;
};

int cmd_diff(const DiffArgs& a) {
  KernelModule module = parse_module_file(a.input);
  HostDesc desc = load_host_desc(a.host);
  EngineOptions e = engine_options(a.common);
  DiffOptions opts;
  opts.fp_tol = a.fp_tol;
  std::vector<std::pair<std::string, DiffReport>> reports;
  bool equal = true;
  LaunchHook hook = [&](const KernelDef& kernel, const LaunchConfig& requested, DeviceMemory& memory,
                        const std::vector<KernelArg>& args) {
    const LaunchConfig config = configure(e, requested);
    TransformOptions t = e.transform;
    t.block_size = config.block_size;
    MpmdProgram p = hybrid_transform(kernel, t);
    if (e.specialize) p = specialize(p, config.block_size, config.grid_size);
    DiffReport r = diff_run(kernel, p, config, memory, args, opts);
    equal = equal && r.equal;
    reports.emplace_back(kernel.name, r);
    run_oracle(kernel, config, memory, args);
  };
  execute_host(desc, module, hook);
  if (a.common.json) {
    nlohmann::ordered_json j;
    j["equal"] = equal;
    nlohmann::ordered_json launches = nlohmann::ordered_json::array();
    for (const auto& [name, r] : reports) {
      nlohmann::ordered_json x = nlohmann::ordered_json::parse(r.json());
      x["kernel"] = name;
      launches.push_back(x);
    }
    j["launches"] = launches;
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& [name, r] : reports) std::cout << name << ": " << r.text() << "\n";
    if (reports.empty()) std::cout << "equal (no launches)\n";
  }
  return equal ? kOk : kDivergence;
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
  Common common;
  std::string input;
  std::string host;
  std::string compare = "modes";
  int iterations = 1000;
  int runs = 5;
  int max_grid = 0;
};

int cmd_bench(const BenchArgs& a) {
  KernelModule module = parse_module_file(a.input);
  HostDesc desc = load_host_desc(a.host);
  Workload w = capture_workload(desc, module);
  w.config = configure(engine_options(a.common), w.config);
  auto build = [&](CollapseMode mode, bool spec, const LaunchConfig& c) {
    TransformOptions t = transform_options(a.common);
    t.mode = mode;
    t.block_size = c.block_size;
    MpmdProgram p = hybrid_transform(w.kernel, t);
    if (spec) p = specialize(p, c.block_size, c.grid_size);
    return CompiledProgram(p);
  };
  std::vector<Timing> timings;
  const std::string k = w.kernel.name;
  if (a.compare == "modes") {
    if (!uses_warp_features(canonical_ir(w.kernel))) {
      timings.push_back(time_launches(k + "/flat", build(CollapseMode::Flat, false, w.config), w.config, w.memory,
                                      w.args, a.iterations, a.runs));
    }
    timings.push_back(time_launches(k + "/hier", build(CollapseMode::Hier, false, w.config), w.config, w.memory,
                                    w.args, a.iterations, a.runs));
  } else if (a.compare == "specialize") {
    CollapseMode m = parse_mode(a.common.mode);
    timings.push_back(
        time_launches(k + "/normal", build(m, false, w.config), w.config, w.memory, w.args, a.iterations, a.runs));
    timings.push_back(time_launches(k + "/specialized", build(m, true, w.config), w.config, w.memory, w.args,
                                    a.iterations, a.runs));
  } else {
    const int top = a.max_grid > 0 ? a.max_grid : 2 * static_cast<int>(default_workers());
    for (int g = 1; g <= top; ++g) {
      LaunchConfig c = w.config;
      c.grid_size = g;
      timings.push_back(time_launches(k + "/grid" + std::to_string(g), build(parse_mode(a.common.mode), false, c), c,
                                      w.memory, w.args, a.iterations, a.runs));
    }
  }
  std::cout << (a.common.json ? timings_json(timings) + "\n" : timings_table(timings));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collapse: hierarchical SPMD-to-MPMD kernel transformer and runtime"};
  app.require_subcommand(1);

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "Transform kernels and print the MPMD IR");
  transform->add_option("input", ta.input, "Kernel source (.spk)")->required()->check(CLI::ExistingFile);
  add_common(transform, ta.common, false);
  transform->add_option("--emit-cfg", ta.emit_cfg, "Emit Graphviz for step0..step6 or final");
  transform->add_option("--emit-ir", ta.emit_ir, "Emit the text IR of step0..step6 or final")->excludes("--emit-cfg");
  transform->add_option("-o,--output", ta.output, "Write to a file instead of stdout");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Execute a host description");
  run->add_option("host", ra.host, "Host description (.json)")->required()->check(CLI::ExistingFile);
  add_common(run, ra.common, true);
  run->add_option("--source", ra.source, "Kernel source overriding the description")->check(CLI::ExistingFile);
  run->add_option("--engine", ra.engine, "Execution engine")->check(CLI::IsMember({"mpmd", "oracle"}));
  run->add_option("--out-dir", ra.out_dir, "Directory for dump files")->check(CLI::ExistingDirectory);
  run->add_flag("--trace-counts", ra.trace_counts, "Print instruction execution counts");

  DiffArgs da;
  auto* diff = app.add_subcommand("diff", "Compare the transformed program against the reference interpreter");
  diff->add_option("input", da.input, "Kernel source (.spk)")->required()->check(CLI::ExistingFile);
  diff->add_option("host", da.host, "Host description (.json)")->required()->check(CLI::ExistingFile);
  add_common(diff, da.common, true);
  diff->add_option("--fp-tol", da.fp_tol, "Absolute tolerance for f32 elements")->check(CLI::NonNegativeNumber);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time launches of one workload across variants");
  bench->add_option("input", ba.input, "Kernel source (.spk)")->required()->check(CLI::ExistingFile);
  bench->add_option("host", ba.host, "Host description supplying the launch")->required()->check(CLI::ExistingFile);
  add_common(bench, ba.common, true);
  bench->add_option("--compare", ba.compare, "Variants to compare")
      ->check(CLI::IsMember({"modes", "specialize", "scaling"}));
  bench->add_option("--iterations", ba.iterations, "Launches per run")->check(CLI::PositiveNumber);
  bench->add_option("--runs", ba.runs, "Timed runs")->check(CLI::PositiveNumber);
  bench->add_option("--max-grid", ba.max_grid, "Largest grid of the scaling sweep")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*transform) return cmd_transform(ta);
    if (*run) return cmd_run(ra);
    if (*diff) return cmd_diff(da);
    if (*bench) return cmd_bench(ba);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const HostDescError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kTransform;
  } catch (const TransformError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kTransform;
  } catch (const ExecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const DeviceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
