#include <algorithm>
#include <chrono>
#include <cstdio>

#include "json.hpp"

#include "collapse/bench.hpp"

namespace collapse {

namespace {

struct Captured {};

}  // namespace

Workload capture_workload(const HostDesc& desc, const KernelModule& module, std::size_t launch_index) {
  Workload w;
  std::size_t seen = 0;
  LaunchHook hook = [&](const KernelDef& kernel, const LaunchConfig& config, DeviceMemory& memory,
                        const std::vector<KernelArg>& args) {
    if (seen++ != launch_index) return;
    w.kernel = kernel;
    w.config = config;
    w.memory = memory;
    w.args = args;
    throw Captured{};
  };
  try {
    execute_host(desc, module, hook);
  } catch (const Captured&) {
    return w;
  }
  throw HostDescError("host description has no launch #" + std::to_string(launch_index));
}

double Timing::median() const {
  if (seconds_per_launch.empty()) return 0.0;
  std::vector<double> v = seconds_per_launch;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Timing time_launches(const std::string& label, const CompiledProgram& program, const LaunchConfig& config,
                     DeviceMemory memory, const std::vector<KernelArg>& args, int iterations, int runs) {
  Timing t;
  t.label = label;
  t.iterations = iterations;
  for (int i = 0; i < std::max(1, iterations / 5); ++i) launch(program, config, memory, args);
  for (int r = 0; r < runs; ++r) {
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < iterations; ++i) launch(program, config, memory, args);
    std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
    t.seconds_per_launch.push_back(d.count() / std::max(1, iterations));
  }
  return t;
}

std::string timings_json(const std::vector<Timing>& timings) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& t : timings) {
    j.push_back({{"label", t.label},
                 {"iterations", t.iterations},
                 {"runs", t.seconds_per_launch},
                 {"median_seconds", t.median()}});
  }
  return j.dump(2);
}

std::string timings_table(const std::vector<Timing>& timings) {
  std::size_t width = 8;
  for (const auto& t : timings) width = std::max(width, t.label.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %12s %8s\n", static_cast<int>(width), "variant", "median(us)", "iters");
  out += buf;
  for (const auto& t : timings) {
    std::snprintf(buf, sizeof buf, "%-*s %12.3f %8d\n", static_cast<int>(width), t.label.c_str(), t.median() * 1e6,
                  t.iterations);
    out += buf;
  }
  return out;
}

}  // namespace collapse
