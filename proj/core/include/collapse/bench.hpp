#pragma once

#include <string>
#include <vector>

#include "collapse/exec.hpp"
#include "collapse/hostdesc.hpp"

namespace collapse {

/// One captured kernel launch: kernel, configuration and device state.
struct Workload {
  KernelDef kernel;
  LaunchConfig config;
  DeviceMemory memory;
  std::vector<KernelArg> args;
};

/// Runs the host steps up to the `launch_index`-th launch and captures it.
Workload capture_workload(const HostDesc& desc, const KernelModule& module, std::size_t launch_index = 0);

struct Timing {
  std::string label;
  int iterations = 0;
  std::vector<double> seconds_per_launch;  // one entry per run
  double median() const;
};

/// Times `iterations` back-to-back launches, `runs` times. Thread fork/join
/// is part of every launch.
Timing time_launches(const std::string& label, const CompiledProgram& program, const LaunchConfig& config,
                     DeviceMemory memory, const std::vector<KernelArg>& args, int iterations, int runs);

std::string timings_json(const std::vector<Timing>& timings);
std::string timings_table(const std::vector<Timing>& timings);

}  // namespace collapse
