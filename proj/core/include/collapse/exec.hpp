#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "collapse/runtime.hpp"
#include "collapse/transform.hpp"

namespace collapse {

namespace detail {
struct CompiledCode;
}

/// An MPMD program resolved to slot-addressed form for repeated execution.
class CompiledProgram {
 public:
  explicit CompiledProgram(const MpmdProgram& program);
  ~CompiledProgram();
  CompiledProgram(CompiledProgram&&) noexcept;
  CompiledProgram& operator=(CompiledProgram&&) noexcept;

  const MpmdProgram& program() const { return program_; }

  /// Sizes the per-block storage of `ctx` for the launch configuration.
  void prepare(BlockContext& ctx, const LaunchConfig& config, bool tracing) const;
  /// Executes one block. `ctx` must have been prepared for the same config.
  void run_block(BlockContext& ctx, const BoundArgs& args) const;
  /// Adds the trace counters of `ctx` to `trace`.
  void collect(const BlockContext& ctx, ExecTrace& trace) const;

 private:
  MpmdProgram program_;
  std::unique_ptr<detail::CompiledCode> code_;
};

/// Executes block `ctx.block_index` of a transformed program on `memory`.
void run_mpmd(const CompiledProgram& program, BlockContext& ctx, DeviceMemory& memory,
              const std::vector<KernelArg>& args, ExecTrace* trace = nullptr);

struct OracleOptions {
  /// Upper bound on executed instructions per block.
  std::uint64_t step_limit = std::uint64_t{1} << 32;
};

/// Lockstep SPMD reference interpreter. Runs every block of the grid
/// sequentially; warps run serially to their next synchronization point.
void run_oracle(const KernelIR& canonical, const LaunchConfig& config, DeviceMemory& memory,
                const std::vector<KernelArg>& args, ExecTrace* trace = nullptr, const OracleOptions& options = {});
void run_oracle(const KernelDef& kernel, const LaunchConfig& config, DeviceMemory& memory,
                const std::vector<KernelArg>& args, ExecTrace* trace = nullptr, const OracleOptions& options = {});

struct DiffReport {
  bool equal = true;
  std::string buffer;      // first diverging buffer, by parameter name
  std::int64_t element = -1;
  std::string expected;    // oracle value
  std::string actual;      // transformed-program value
  std::string error;       // execution error of the transformed program
  std::size_t elements_compared = 0;

  std::string text() const;
  std::string json() const;
};

struct DiffOptions {
  /// Maximum absolute difference accepted for f32 elements; 0 is bit-exact.
  double fp_tol = 0.0;
};

/// Runs the oracle and the transformed program on copies of `memory` and
/// compares every buffer argument. Oracle errors propagate; errors of the
/// transformed program are reported as divergence.
DiffReport diff_run(const KernelDef& kernel, const MpmdProgram& program, const LaunchConfig& config,
                    const DeviceMemory& memory, const std::vector<KernelArg>& args, const DiffOptions& options = {});

}  // namespace collapse
