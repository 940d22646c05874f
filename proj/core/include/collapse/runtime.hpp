#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "collapse/ir.hpp"
#include "collapse/scalar.hpp"

namespace collapse {

unsigned default_workers();

struct LaunchConfig {
  int grid_size = 1;
  int block_size = 32;
  int warp_size = 32;
  CollapseMode mode = CollapseMode::Auto;
  bool specialize = false;
  int workers = static_cast<int>(default_workers());
};

/// Throws TransformError(Configuration) when the configuration is unusable.
void validate(const LaunchConfig& config, bool hierarchical);

using BufferId = int;

enum class CopyDirection { HostToDevice, DeviceToHost, DeviceToDevice };

/// Global memory: a table of byte regions addressed by id. Table operations
/// are thread-safe; element access during a launch is unsynchronized.
class DeviceMemory {
 public:
  DeviceMemory() = default;
  DeviceMemory(const DeviceMemory& other);
  DeviceMemory& operator=(const DeviceMemory& other);

  BufferId alloc(std::size_t bytes);
  void free(BufferId id);
  void copy_to_device(BufferId dst, const void* src, std::size_t bytes, std::size_t offset = 0);
  void copy_to_host(void* dst, BufferId src, std::size_t bytes, std::size_t offset = 0) const;
  void copy_device(BufferId dst, BufferId src, std::size_t bytes);
  /// Dispatches on `direction`; host pointers are `void*` for the host side.
  void copy(CopyDirection direction, BufferId device, void* host, std::size_t bytes);

  std::size_t size_bytes(BufferId id) const;
  bool contains(BufferId id) const;
  /// 32-bit element view of a buffer; stable until the buffer is freed.
  std::span<Bits> elements(BufferId id);
  std::span<const Bits> elements(BufferId id) const;
  std::vector<BufferId> ids() const;

  std::size_t live_buffers() const;
  std::size_t live_bytes() const;

 private:
  struct Buffer {
    std::size_t bytes = 0;
    std::vector<Bits> cells;
  };
  const Buffer& get(BufferId id) const;
  Buffer& get(BufferId id);

  mutable std::mutex mutex_;
  std::map<BufferId, std::shared_ptr<Buffer>> buffers_;
  BufferId next_ = 1;
};

struct KernelArg {
  enum class Kind { Buffer, I32, F32 } kind = Kind::I32;
  BufferId buffer = 0;
  std::int32_t i32 = 0;
  float f32 = 0.0F;

  static KernelArg buf(BufferId id);
  static KernelArg int32(std::int32_t v);
  static KernelArg float32(float v);
};

/// Kernel parameters resolved against device memory for one launch.
struct BoundArgs {
  std::vector<Bits> scalars;                // per parameter; unused for buffers
  std::vector<std::span<Bits>> buffers;     // per parameter; empty for scalars
};

/// Checks arity and kinds, throwing ExecError(BadArguments).
BoundArgs bind_arguments(const std::vector<Param>& params, const std::vector<KernelArg>& args, DeviceMemory& memory);

/// Per-block state of one block executor; never shared between executors.
struct BlockContext {
  int block_index = 0;
  const LaunchConfig* config = nullptr;
  std::vector<Bits> regs;       // scalar locals followed by replicated arrays
  std::vector<Bits> shared;     // __shared__ arrays
  std::vector<Bits> warp_vote;  // lane buffers, warp size each
  std::vector<Bits> warp_shfl;
  std::vector<std::uint64_t> counts;  // trace counters, when tracing
};

/// Instruction id -> execution count, keyed as in IR dumps ("i3", "t5.peel").
struct ExecTrace {
  std::map<std::string, std::uint64_t> counts;
  void merge(const ExecTrace& other);
  std::string to_json() const;
};

class CompiledProgram;
struct MpmdProgram;

/// Runs every block of the grid with fork/join semantics on up to
/// `config.workers` threads. The first executor error is rethrown after join.
void launch(const CompiledProgram& program, const LaunchConfig& config, DeviceMemory& memory,
            const std::vector<KernelArg>& args, ExecTrace* trace = nullptr);
void launch(const MpmdProgram& program, const LaunchConfig& config, DeviceMemory& memory,
            const std::vector<KernelArg>& args, ExecTrace* trace = nullptr);

}  // namespace collapse
