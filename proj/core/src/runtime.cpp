#include <algorithm>
#include <atomic>
#include <cstring>
#include <exception>
#include <sstream>
#include <thread>

#include "collapse/exec.hpp"
#include "collapse/runtime.hpp"

namespace collapse {

unsigned default_workers() { return std::max(1U, std::thread::hardware_concurrency()); }

void validate(const LaunchConfig& config, bool hierarchical) {
  auto fail = [](const std::string& m) { throw TransformError(TransformErrorKind::Configuration, m); };
  if (config.grid_size < 0) fail("grid size must be non-negative");
  if (config.block_size < 1) fail("block size must be positive");
  if (config.warp_size < 1) fail("warp size must be at least 1");
  if (config.workers < 1) fail("worker count must be positive");
  if (hierarchical && config.block_size % config.warp_size != 0) {
    fail("block size " + std::to_string(config.block_size) + " is not a multiple of warp size " +
         std::to_string(config.warp_size));
  }
}

// ---------------------------------------------------------------- device memory

DeviceMemory::DeviceMemory(const DeviceMemory& other) { *this = other; }

DeviceMemory& DeviceMemory::operator=(const DeviceMemory& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  buffers_.clear();
  for (const auto& [id, buf] : other.buffers_) buffers_[id] = std::make_shared<Buffer>(*buf);
  next_ = other.next_;
  return *this;
}

const DeviceMemory::Buffer& DeviceMemory::get(BufferId id) const {
  auto it = buffers_.find(id);
  if (it == buffers_.end()) throw DeviceError("unknown buffer id " + std::to_string(id));
  return *it->second;
}

DeviceMemory::Buffer& DeviceMemory::get(BufferId id) {
  return const_cast<Buffer&>(static_cast<const DeviceMemory&>(*this).get(id));
}

BufferId DeviceMemory::alloc(std::size_t bytes) {
  std::lock_guard lock(mutex_);
  auto buf = std::make_shared<Buffer>();
  buf->bytes = bytes;
  buf->cells.assign((bytes + sizeof(Bits) - 1) / sizeof(Bits), 0);
  BufferId id = next_++;
  buffers_[id] = std::move(buf);
  return id;
}

void DeviceMemory::free(BufferId id) {
  std::lock_guard lock(mutex_);
  if (buffers_.erase(id) == 0) throw DeviceError("free of unknown buffer id " + std::to_string(id));
}

namespace {

void check_range(std::size_t offset, std::size_t bytes, std::size_t size, BufferId id) {
  if (offset > size || bytes > size - offset) {
    throw DeviceError("copy of " + std::to_string(bytes) + " bytes at offset " + std::to_string(offset) +
                      " exceeds buffer " + std::to_string(id) + " of " + std::to_string(size) + " bytes");
  }
}

}  // namespace

void DeviceMemory::copy_to_device(BufferId dst, const void* src, std::size_t bytes, std::size_t offset) {
  std::lock_guard lock(mutex_);
  Buffer& b = get(dst);
  check_range(offset, bytes, b.bytes, dst);
  if (bytes != 0) std::memcpy(reinterpret_cast<std::byte*>(b.cells.data()) + offset, src, bytes);
}

void DeviceMemory::copy_to_host(void* dst, BufferId src, std::size_t bytes, std::size_t offset) const {
  std::lock_guard lock(mutex_);
  const Buffer& b = get(src);
  check_range(offset, bytes, b.bytes, src);
  if (bytes != 0) std::memcpy(dst, reinterpret_cast<const std::byte*>(b.cells.data()) + offset, bytes);
}

void DeviceMemory::copy_device(BufferId dst, BufferId src, std::size_t bytes) {
  std::lock_guard lock(mutex_);
  Buffer& d = get(dst);
  const Buffer& s = get(src);
  check_range(0, bytes, d.bytes, dst);
  check_range(0, bytes, s.bytes, src);
  if (bytes != 0) std::memmove(d.cells.data(), s.cells.data(), bytes);
}

void DeviceMemory::copy(CopyDirection direction, BufferId device, void* host, std::size_t bytes) {
  switch (direction) {
    case CopyDirection::HostToDevice: copy_to_device(device, host, bytes); return;
    case CopyDirection::DeviceToHost: copy_to_host(host, device, bytes); return;
    case CopyDirection::DeviceToDevice: copy_device(device, *static_cast<const BufferId*>(host), bytes); return;
  }
}

std::size_t DeviceMemory::size_bytes(BufferId id) const {
  std::lock_guard lock(mutex_);
  return get(id).bytes;
}

bool DeviceMemory::contains(BufferId id) const {
  std::lock_guard lock(mutex_);
  return buffers_.count(id) != 0;
}

std::span<Bits> DeviceMemory::elements(BufferId id) {
  std::lock_guard lock(mutex_);
  Buffer& b = get(id);
  return {b.cells.data(), b.bytes / sizeof(Bits)};
}

std::span<const Bits> DeviceMemory::elements(BufferId id) const {
  std::lock_guard lock(mutex_);
  const Buffer& b = get(id);
  return {b.cells.data(), b.bytes / sizeof(Bits)};
}

std::vector<BufferId> DeviceMemory::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<BufferId> out;
  for (const auto& [id, buf] : buffers_) out.push_back(id);
  return out;
}

std::size_t DeviceMemory::live_buffers() const {
  std::lock_guard lock(mutex_);
  return buffers_.size();
}

std::size_t DeviceMemory::live_bytes() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [id, buf] : buffers_) n += buf->bytes;
  return n;
}

// ---------------------------------------------------------------- arguments

KernelArg KernelArg::buf(BufferId id) {
  KernelArg a;
  a.kind = Kind::Buffer;
  a.buffer = id;
  return a;
}

KernelArg KernelArg::int32(std::int32_t v) {
  KernelArg a;
  a.kind = Kind::I32;
  a.i32 = v;
  return a;
}

KernelArg KernelArg::float32(float v) {
  KernelArg a;
  a.kind = Kind::F32;
  a.f32 = v;
  return a;
}

BoundArgs bind_arguments(const std::vector<Param>& params, const std::vector<KernelArg>& args, DeviceMemory& memory) {
  if (params.size() != args.size()) {
    throw ExecError(ExecErrorKind::BadArguments, "kernel takes " + std::to_string(params.size()) +
                                                     " arguments but " + std::to_string(args.size()) + " were given");
  }
  BoundArgs out;
  out.scalars.resize(params.size(), 0);
  out.buffers.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Param& p = params[i];
    const KernelArg& a = args[i];
    auto bad = [&](const std::string& want) {
      throw ExecError(ExecErrorKind::BadArguments, "argument " + std::to_string(i) + " ('" + p.name + "') must be " + want);
    };
    if (p.type.is_buffer) {
      if (a.kind != KernelArg::Kind::Buffer) bad("a buffer");
      if (!memory.contains(a.buffer)) {
        throw ExecError(ExecErrorKind::BadArguments,
                        "argument " + std::to_string(i) + " ('" + p.name + "') names unknown buffer " +
                            std::to_string(a.buffer));
      }
      out.buffers[i] = memory.elements(a.buffer);
    } else if (p.type.elem == ScalarKind::I32) {
      if (a.kind != KernelArg::Kind::I32) bad("an i32 scalar");
      out.scalars[i] = from_i32(a.i32);
    } else {
      if (a.kind == KernelArg::Kind::Buffer) bad("an f32 scalar");
      out.scalars[i] = a.kind == KernelArg::Kind::F32 ? from_f32(a.f32) : from_f32(static_cast<float>(a.i32));
    }
  }
  return out;
}

// ---------------------------------------------------------------- traces

void ExecTrace::merge(const ExecTrace& other) {
  for (const auto& [k, v] : other.counts) counts[k] += v;
}

std::string ExecTrace::to_json() const {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [k, v] : counts) {
    os << (first ? "" : ", ") << "\"" << k << "\": " << v;
    first = false;
  }
  os << "}";
  return os.str();
}

// ---------------------------------------------------------------- launch

void launch(const CompiledProgram& program, const LaunchConfig& config, DeviceMemory& memory,
            const std::vector<KernelArg>& args, ExecTrace* trace) {
  const MpmdProgram& p = program.program();
  validate(config, p.mode == CollapseMode::Hier);
  if (config.warp_size != p.warp_size) {
    throw TransformError(TransformErrorKind::Configuration,
                         "program was transformed for warp size " + std::to_string(p.warp_size) + ", launched with " +
                             std::to_string(config.warp_size));
  }
  if (p.specialized && (config.block_size != p.block_size || config.grid_size != p.grid_size)) {
    throw TransformError(TransformErrorKind::Configuration, "specialized program launched with different dimensions");
  }
  BoundArgs bound = bind_arguments(p.ir.params, args, memory);
  if (config.grid_size == 0) return;

  const int workers = std::min(config.workers, config.grid_size);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<ExecTrace> traces(static_cast<std::size_t>(workers));

  auto worker = [&](int w) {
    BlockContext ctx;
    try {
      for (;;) {
        int b = next.fetch_add(1);
        if (b >= config.grid_size || failed.load()) break;
        program.prepare(ctx, config, trace != nullptr);
        ctx.block_index = b;
        program.run_block(ctx, bound);
        if (trace != nullptr) program.collect(ctx, traces[static_cast<std::size_t>(w)]);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
      failed.store(true);
    }
  };

  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  if (trace != nullptr) {
    for (const auto& t : traces) trace->merge(t);
  }
}

void launch(const MpmdProgram& program, const LaunchConfig& config, DeviceMemory& memory,
            const std::vector<KernelArg>& args, ExecTrace* trace) {
  launch(CompiledProgram(program), config, memory, args, trace);
}

}  // namespace collapse
