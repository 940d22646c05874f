#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"

#include "collapse/exec.hpp"

namespace collapse {

namespace {

std::string format_value(ScalarKind type, Bits v) {
  char buf[64];
  if (type == ScalarKind::I32) {
    std::snprintf(buf, sizeof buf, "%d", as_i32(v));
  } else {
    std::snprintf(buf, sizeof buf, "%.9g (0x%08x)", static_cast<double>(as_f32(v)), v);
  }
  return buf;
}

bool same(ScalarKind type, Bits a, Bits b, double tol) {
  if (a == b) return true;
  if (type != ScalarKind::F32 || tol <= 0.0) return false;
  const double x = as_f32(a);
  const double y = as_f32(b);
  if (std::isnan(x) && std::isnan(y)) return true;
  return std::fabs(x - y) <= tol;
}

}  // namespace

std::string DiffReport::text() const {
  if (equal) return "equal (" + std::to_string(elements_compared) + " elements compared)";
  if (!error.empty()) return "divergence: transformed program failed: " + error;
  return "divergence: buffer '" + buffer + "' element " + std::to_string(element) + ": expected " + expected +
         ", got " + actual;
}

std::string DiffReport::json() const {
  nlohmann::ordered_json j;
  j["equal"] = equal;
  j["elements_compared"] = elements_compared;
  if (!equal) {
    if (!error.empty()) {
      j["error"] = error;
    } else {
      j["buffer"] = buffer;
      j["element"] = element;
      j["expected"] = expected;
      j["actual"] = actual;
    }
  }
  return j.dump();
}

DiffReport diff_run(const KernelDef& kernel, const MpmdProgram& program, const LaunchConfig& config,
                    const DeviceMemory& memory, const std::vector<KernelArg>& args, const DiffOptions& options) {
  DiffReport report;
  DeviceMemory expected = memory;
  run_oracle(kernel, config, expected, args);

  DeviceMemory actual = memory;
  try {
    launch(program, config, actual, args);
  } catch (const ExecError& e) {
    report.equal = false;
    report.error = e.what();
    return report;
  }

  std::set<BufferId> seen;
  for (std::size_t i = 0; i < kernel.params.size() && i < args.size(); ++i) {
    const Param& p = kernel.params[i];
    if (!p.type.is_buffer || !seen.insert(args[i].buffer).second) continue;
    auto e = expected.elements(args[i].buffer);
    auto a = actual.elements(args[i].buffer);
    for (std::size_t k = 0; k < e.size(); ++k) {
      ++report.elements_compared;
      if (same(p.type.elem, e[k], a[k], options.fp_tol)) continue;
      report.equal = false;
      report.buffer = p.name;
      report.element = static_cast<std::int64_t>(k);
      report.expected = format_value(p.type.elem, e[k]);
      report.actual = format_value(p.type.elem, a[k]);
      return report;
    }
  }
  return report;
}

}  // namespace collapse
