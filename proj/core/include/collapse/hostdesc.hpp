#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "collapse/ast.hpp"
#include "collapse/exec.hpp"
#include "collapse/runtime.hpp"

namespace collapse {

/// Malformed host description: bad JSON, unknown fields, inconsistent types.
class HostDescError : public Error {
 public:
  using Error::Error;
};

struct HostArray {
  ScalarKind type = ScalarKind::I32;
  std::vector<Bits> data;
};

struct LaunchArgSpec {
  enum class Kind { Buffer, I32, F32 } kind = Kind::I32;
  std::string buffer;
  std::int32_t i32 = 0;
  float f32 = 0.0F;
};

struct HostStep {
  enum class Kind { Alloc, Copy, Launch, Dump, Free } kind = Kind::Alloc;
  std::string name;  // alloc/dump/free target
  ScalarKind type = ScalarKind::I32;
  std::size_t count = 0;
  std::string dst;  // copy
  std::string src;
  std::string kernel;  // launch
  int grid = 1;
  int block = 1;
  std::vector<LaunchArgSpec> args;
  std::string file;  // dump destination; empty for the dump stream
};

/// Declarative host program: host arrays plus an ordered list of steps.
struct HostDesc {
  std::filesystem::path source;  // kernel source, resolved against the description's directory
  std::map<std::string, HostArray> host;
  std::vector<HostStep> steps;
  std::filesystem::path base_dir;
  /// Directory for dump files; the description's directory when empty.
  std::filesystem::path output_dir;
};

HostDesc parse_host_desc(std::string_view json_text, const std::filesystem::path& base_dir = {});
HostDesc load_host_desc(const std::filesystem::path& path);

/// Executes one kernel launch on behalf of a host program.
using LaunchHook = std::function<void(const KernelDef& kernel, const LaunchConfig& config, DeviceMemory& memory,
                                      const std::vector<KernelArg>& args)>;

struct EngineOptions {
  CollapseMode mode = CollapseMode::Auto;
  int warp_size = 32;
  bool specialize = false;
  int workers = static_cast<int>(default_workers());
  ExecTrace* trace = nullptr;
  /// Replaces the grid/block sizes of every launch step when positive.
  int grid_override = 0;
  int block_override = 0;
  TransformOptions transform;  // mutation flags and verification
};

/// Launch configuration of a step after applying engine settings and overrides.
LaunchConfig configure(const EngineOptions& options, const LaunchConfig& requested);

/// Transforms each launched kernel for its configuration and runs it on the block executors.
LaunchHook mpmd_hook(const EngineOptions& options);
/// Runs each launched kernel on the reference interpreter.
LaunchHook oracle_hook(const EngineOptions& options);

struct HostResult {
  std::map<std::string, HostArray> host;  // final host arrays
  std::vector<std::string> dumps;         // rendered dump steps, in order
};

/// Runs the steps of `desc` with kernels from `module`. Dumps with a file go
/// to that file (relative to the description); the rest are rendered into
/// the result and written to `out` when given.
HostResult execute_host(const HostDesc& desc, const KernelModule& module, const LaunchHook& hook,
                        std::ostream* out = nullptr);

/// Whitespace-separated rendering used by dumps and `@file` initializers.
std::string render_values(ScalarKind type, const std::vector<Bits>& values);
std::vector<Bits> parse_values(ScalarKind type, std::string_view text);

}  // namespace collapse
