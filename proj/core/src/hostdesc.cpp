#include <cctype>
#include <cstdio>
#include <cstring>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "collapse/hostdesc.hpp"
#include "collapse/parser.hpp"

namespace collapse {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& m) { throw HostDescError("host description: " + m); }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail("cannot read '" + p.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ScalarKind parse_type(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where + ": \"type\" must be \"i32\" or \"f32\"");
  const auto s = j.get<std::string>();
  if (s == "i32") return ScalarKind::I32;
  if (s == "f32") return ScalarKind::F32;
  fail(where + ": unknown type '" + s + "'");
}

Bits number(ScalarKind type, const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + ": expected a number");
  if (type == ScalarKind::I32) {
    if (!j.is_number_integer()) fail(where + ": expected an integer");
    return from_i32(static_cast<std::int32_t>(j.get<std::int64_t>()));
  }
  return from_f32(j.get<float>());
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) fail(where + ": unknown field \"" + k + "\"");
  }
}

std::size_t parse_count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) fail(where + ": \"count\" must be a non-negative integer");
  return j.get<std::size_t>();
}

HostArray parse_array(const std::string& name, const json& j, const std::filesystem::path& base) {
  const std::string where = "host array '" + name + "'";
  if (!j.is_object()) fail(where + " must be an object");
  check_keys(j, {"type", "count", "init"}, where);
  HostArray a;
  a.type = parse_type(j.value("type", json("i32")), where);
  std::size_t count = j.contains("count") ? parse_count(j["count"], where) : 0;
  const json& init = j.contains("init") ? j["init"] : json();
  std::vector<Bits> values;
  if (init.is_null()) {
    values.assign(count, 0);
  } else if (init.is_array()) {
    for (const auto& v : init) values.push_back(number(a.type, v, where));
  } else if (init.is_string()) {
    const auto s = init.get<std::string>();
    if (s.empty() || s[0] != '@') fail(where + ": string initializer must be \"@file\"");
    values = parse_values(a.type, read_file(base / s.substr(1)));
  } else if (init.is_object()) {
    check_keys(init, {"iota", "step", "fill", "random", "min", "max"}, where);
    if (!j.contains("count")) fail(where + ": generated initializers need \"count\"");
    if (init.contains("iota")) {
      const json step = init.value("step", json(1));
      for (std::size_t i = 0; i < count; ++i) {
        if (a.type == ScalarKind::I32) {
          values.push_back(from_i32(static_cast<std::int32_t>(init["iota"].get<std::int64_t>() +
                                                              static_cast<std::int64_t>(i) * step.get<std::int64_t>())));
        } else {
          values.push_back(from_f32(init["iota"].get<float>() + static_cast<float>(i) * step.get<float>()));
        }
      }
    } else if (init.contains("fill")) {
      values.assign(count, number(a.type, init["fill"], where));
    } else if (init.contains("random")) {
      std::mt19937 rng(init["random"].get<std::uint32_t>());
      if (a.type == ScalarKind::I32) {
        std::uniform_int_distribution<std::int32_t> d(init.value("min", -100), init.value("max", 100));
        for (std::size_t i = 0; i < count; ++i) values.push_back(from_i32(d(rng)));
      } else {
        std::uniform_real_distribution<float> d(init.value("min", -1.0F), init.value("max", 1.0F));
        for (std::size_t i = 0; i < count; ++i) values.push_back(from_f32(d(rng)));
      }
    } else {
      fail(where + ": initializer needs one of iota, fill, random");
    }
  } else {
    fail(where + ": unsupported initializer");
  }
  if (j.contains("count") && values.size() != count) {
    fail(where + ": initializer has " + std::to_string(values.size()) + " values, count is " + std::to_string(count));
  }
  a.data = std::move(values);
  return a;
}

std::string need_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) fail(where + ": missing string field \"" + key + "\"");
  return j[key].get<std::string>();
}

int need_int(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer()) fail(where + ": missing integer field \"" + key + "\"");
  return j[key].get<int>();
}

HostStep parse_step(const json& j, std::size_t index) {
  const std::string where = "step " + std::to_string(index);
  if (!j.is_object()) fail(where + " must be an object");
  HostStep s;
  const std::string op = need_string(j, "op", where);
  if (op == "alloc") {
    check_keys(j, {"op", "name", "type", "count", "like"}, where);
    s.kind = HostStep::Kind::Alloc;
    s.name = need_string(j, "name", where);
    if (j.contains("like")) {
      s.src = need_string(j, "like", where);
    } else {
      s.type = parse_type(j.value("type", json("i32")), where);
      if (!j.contains("count")) fail(where + ": alloc needs \"count\" or \"like\"");
      s.count = parse_count(j["count"], where);
    }
  } else if (op == "copy") {
    check_keys(j, {"op", "dst", "src", "count"}, where);
    s.kind = HostStep::Kind::Copy;
    s.dst = need_string(j, "dst", where);
    s.src = need_string(j, "src", where);
    s.count = j.contains("count") ? parse_count(j["count"], where) : static_cast<std::size_t>(-1);
  } else if (op == "launch") {
    check_keys(j, {"op", "kernel", "grid", "block", "args"}, where);
    s.kind = HostStep::Kind::Launch;
    s.kernel = need_string(j, "kernel", where);
    s.grid = need_int(j, "grid", where);
    s.block = need_int(j, "block", where);
    if (j.contains("args")) {
      if (!j["args"].is_array()) fail(where + ": \"args\" must be an array");
      for (const auto& a : j["args"]) {
        LaunchArgSpec arg;
        if (a.is_string()) {
          arg.kind = LaunchArgSpec::Kind::Buffer;
          arg.buffer = a.get<std::string>();
        } else if (a.is_number_integer()) {
          arg.kind = LaunchArgSpec::Kind::I32;
          arg.i32 = a.get<std::int32_t>();
        } else if (a.is_number()) {
          arg.kind = LaunchArgSpec::Kind::F32;
          arg.f32 = a.get<float>();
        } else if (a.is_object() && a.size() == 1 && a.contains("f32") && a["f32"].is_number()) {
          arg.kind = LaunchArgSpec::Kind::F32;
          arg.f32 = a["f32"].get<float>();
        } else if (a.is_object() && a.size() == 1 && a.contains("i32") && a["i32"].is_number_integer()) {
          arg.kind = LaunchArgSpec::Kind::I32;
          arg.i32 = a["i32"].get<std::int32_t>();
        } else {
          fail(where + ": invalid launch argument " + a.dump());
        }
        s.args.push_back(arg);
      }
    }
  } else if (op == "dump") {
    check_keys(j, {"op", "name", "file"}, where);
    s.kind = HostStep::Kind::Dump;
    s.name = need_string(j, "name", where);
    if (j.contains("file")) s.file = need_string(j, "file", where);
  } else if (op == "free") {
    check_keys(j, {"op", "name"}, where);
    s.kind = HostStep::Kind::Free;
    s.name = need_string(j, "name", where);
  } else {
    fail(where + ": unknown op '" + op + "'");
  }
  return s;
}

struct DeviceArray {
  BufferId id = 0;
  ScalarKind type = ScalarKind::I32;
  std::size_t count = 0;
};

}  // namespace

std::string render_values(ScalarKind type, const std::vector<Bits>& values) {
  std::string out;
  char buf[48];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (type == ScalarKind::I32) {
      std::snprintf(buf, sizeof buf, "%d", as_i32(values[i]));
    } else {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(as_f32(values[i])));
    }
    out += buf;
    out += (i + 1 == values.size() || (i + 1) % 16 == 0) ? '\n' : ' ';
  }
  return out;
}

std::vector<Bits> parse_values(ScalarKind type, std::string_view text) {
  std::vector<Bits> out;
  std::string s(text);
  const char* p = s.c_str();
  for (;;) {
    while (*p != '\0' && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (*p == '\0') break;
    char* end = nullptr;
    if (type == ScalarKind::I32) {
      long long v = std::strtoll(p, &end, 0);
      if (end == p) fail("invalid i32 value near '" + std::string(p, std::min<std::size_t>(16, std::strlen(p))) + "'");
      out.push_back(from_i32(static_cast<std::int32_t>(v)));
    } else {
      float v = std::strtof(p, &end);
      if (end == p) fail("invalid f32 value near '" + std::string(p, std::min<std::size_t>(16, std::strlen(p))) + "'");
      out.push_back(from_f32(v));
    }
    p = end;
  }
  return out;
}

HostDesc parse_host_desc(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("top level must be an object");
  check_keys(j, {"source", "host", "steps"}, "top level");
  HostDesc d;
  d.base_dir = base_dir;
  if (j.contains("source")) d.source = base_dir / need_string(j, "source", "top level");
  try {
    if (j.contains("host")) {
      if (!j["host"].is_object()) fail("\"host\" must be an object");
      for (const auto& [name, a] : j["host"].items()) d.host[name] = parse_array(name, a, base_dir);
    }
    if (j.contains("steps")) {
      if (!j["steps"].is_array()) fail("\"steps\" must be an array");
      for (std::size_t i = 0; i < j["steps"].size(); ++i) d.steps.push_back(parse_step(j["steps"][i], i));
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed field: ") + e.what());
  }
  return d;
}

HostDesc load_host_desc(const std::filesystem::path& path) {
  return parse_host_desc(read_file(path), path.parent_path());
}

LaunchConfig configure(const EngineOptions& options, const LaunchConfig& requested) {
  LaunchConfig c = requested;
  c.mode = options.mode;
  c.warp_size = options.warp_size;
  c.specialize = options.specialize;
  c.workers = options.workers;
  if (options.grid_override > 0) c.grid_size = options.grid_override;
  if (options.block_override > 0) c.block_size = options.block_override;
  return c;
}

LaunchHook mpmd_hook(const EngineOptions& options) {
  return [options](const KernelDef& kernel, const LaunchConfig& requested, DeviceMemory& memory,
                   const std::vector<KernelArg>& args) {
    const LaunchConfig config = configure(options, requested);
    TransformOptions t = options.transform;
    t.mode = options.mode;
    t.warp_size = options.warp_size;
    t.block_size = config.block_size;
    MpmdProgram program = hybrid_transform(kernel, t);
    if (options.specialize) program = specialize(program, config.block_size, config.grid_size);
    launch(program, config, memory, args, options.trace);
  };
}

LaunchHook oracle_hook(const EngineOptions& options) {
  return [options](const KernelDef& kernel, const LaunchConfig& requested, DeviceMemory& memory,
                   const std::vector<KernelArg>& args) {
    run_oracle(kernel, configure(options, requested), memory, args, options.trace);
  };
}

HostResult execute_host(const HostDesc& desc, const KernelModule& module, const LaunchHook& hook, std::ostream* out) {
  HostResult result;
  result.host = desc.host;
  DeviceMemory memory;
  std::map<std::string, DeviceArray> device;

  auto host_array = [&](const std::string& n) -> HostArray* {
    auto it = result.host.find(n);
    return it == result.host.end() ? nullptr : &it->second;
  };
  auto device_array = [&](const std::string& n) -> DeviceArray* {
    auto it = device.find(n);
    return it == device.end() ? nullptr : &it->second;
  };

  for (std::size_t i = 0; i < desc.steps.size(); ++i) {
    const HostStep& s = desc.steps[i];
    const std::string where = "step " + std::to_string(i);
    switch (s.kind) {
      case HostStep::Kind::Alloc: {
        if (device.count(s.name) || host_array(s.name) != nullptr) fail(where + ": '" + s.name + "' already exists");
        DeviceArray d;
        d.type = s.type;
        d.count = s.count;
        if (!s.src.empty()) {
          const HostArray* like = host_array(s.src);
          const DeviceArray* like_dev = device_array(s.src);
          if (like != nullptr) {
            d.type = like->type;
            d.count = like->data.size();
          } else if (like_dev != nullptr) {
            d.type = like_dev->type;
            d.count = like_dev->count;
          } else {
            fail(where + ": unknown array '" + s.src + "'");
          }
        }
        d.id = memory.alloc(d.count * sizeof(Bits));
        device[s.name] = d;
        break;
      }
      case HostStep::Kind::Copy: {
        HostArray* hd = host_array(s.dst);
        HostArray* hs = host_array(s.src);
        DeviceArray* dd = device_array(s.dst);
        DeviceArray* ds = device_array(s.src);
        if ((hd == nullptr && dd == nullptr) || (hs == nullptr && ds == nullptr)) {
          throw DeviceError(where + ": copy between unknown buffers '" + s.src + "' -> '" + s.dst + "'");
        }
        if (hd != nullptr && hs != nullptr) fail(where + ": host-to-host copies are not device operations");
        const std::size_t src_count = hs != nullptr ? hs->data.size() : ds->count;
        const std::size_t n = s.count == static_cast<std::size_t>(-1) ? src_count : s.count;
        const std::size_t bytes = n * sizeof(Bits);
        if (hs != nullptr) {
          if (n > hs->data.size()) throw DeviceError(where + ": copy of " + std::to_string(n) + " elements exceeds source");
          memory.copy_to_device(dd->id, hs->data.data(), bytes);
        } else if (hd != nullptr) {
          if (n > hd->data.size()) {
            throw DeviceError(where + ": copy of " + std::to_string(n) + " elements exceeds '" + s.dst + "'");
          }
          memory.copy_to_host(hd->data.data(), ds->id, bytes);
        } else {
          memory.copy_device(dd->id, ds->id, bytes);
        }
        break;
      }
      case HostStep::Kind::Launch: {
        const KernelDef* k = module.find(s.kernel);
        if (k == nullptr) throw ExecError(ExecErrorKind::BadArguments, where + ": no kernel named '" + s.kernel + "'");
        std::vector<KernelArg> args;
        for (const auto& a : s.args) {
          switch (a.kind) {
            case LaunchArgSpec::Kind::Buffer: {
              const DeviceArray* d = device_array(a.buffer);
              if (d == nullptr) {
                throw ExecError(ExecErrorKind::BadArguments,
                                where + ": launch argument '" + a.buffer + "' is not an allocated device buffer");
              }
              args.push_back(KernelArg::buf(d->id));
              break;
            }
            case LaunchArgSpec::Kind::I32: args.push_back(KernelArg::int32(a.i32)); break;
            case LaunchArgSpec::Kind::F32: args.push_back(KernelArg::float32(a.f32)); break;
          }
        }
        LaunchConfig config;
        config.grid_size = s.grid;
        config.block_size = s.block;
        hook(*k, config, memory, args);
        break;
      }
      case HostStep::Kind::Dump: {
        std::vector<Bits> values;
        ScalarKind type = ScalarKind::I32;
        if (const HostArray* h = host_array(s.name)) {
          values = h->data;
          type = h->type;
        } else if (const DeviceArray* d = device_array(s.name)) {
          values.resize(d->count);
          memory.copy_to_host(values.data(), d->id, d->count * sizeof(Bits));
          type = d->type;
        } else {
          throw DeviceError(where + ": dump of unknown buffer '" + s.name + "'");
        }
        std::string text = render_values(type, values);
        if (!s.file.empty()) {
          std::ofstream f((desc.output_dir.empty() ? desc.base_dir : desc.output_dir) / s.file, std::ios::binary);
          if (!f) throw DeviceError(where + ": cannot write '" + s.file + "'");
          f << text;
        } else if (out != nullptr) {
          *out << s.name << ":\n" << text;
        }
        result.dumps.push_back(std::move(text));
        break;
      }
      case HostStep::Kind::Free: {
        const DeviceArray* d = device_array(s.name);
        if (d == nullptr) throw DeviceError(where + ": free of unknown device buffer '" + s.name + "'");
        memory.free(d->id);
        device.erase(s.name);
        break;
      }
    }
  }
  return result;
}

}  // namespace collapse
