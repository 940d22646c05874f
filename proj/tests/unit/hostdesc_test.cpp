#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "collapse/hostdesc.hpp"
#include "collapse/parser.hpp"
#include "corpus.hpp"

namespace collapse {
namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("collapse_hostdesc_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

constexpr const char* kIncrement = "__global__ void inc(global i32* a, i32 k) { a[threadIdx.x] += k; }";

HostResult run_desc(const std::string& json, const std::string& src = kIncrement, std::ostream* out = nullptr,
                    bool mpmd = true) {
  HostDesc d = parse_host_desc(json);
  EngineOptions opt;
  opt.workers = 1;
  return execute_host(d, parse_module(src), mpmd ? mpmd_hook(opt) : oracle_hook(opt), out);
}

TEST(HostDesc, InitializersFillHostArrays) {
  HostDesc d = parse_host_desc(R"({
    "host": {
      "a": {"type": "i32", "count": 4, "init": {"iota": 3, "step": 2}},
      "b": {"type": "f32", "init": [1, 2.5]},
      "c": {"count": 3, "init": {"fill": 7}},
      "z": {"type": "f32", "count": 2},
      "r": {"count": 50, "init": {"random": 5, "min": -3, "max": 3}}
    }
  })");
  EXPECT_EQ(render_values(ScalarKind::I32, d.host["a"].data), render_values(ScalarKind::I32, {3, 5, 7, 9}));
  EXPECT_EQ(d.host["b"].type, ScalarKind::F32);
  EXPECT_FLOAT_EQ(as_f32(d.host["b"].data[1]), 2.5F);
  EXPECT_EQ(d.host["c"].data, (std::vector<Bits>{7, 7, 7}));
  EXPECT_EQ(d.host["z"].data, (std::vector<Bits>{0, 0}));
  for (Bits v : d.host["r"].data) {
    EXPECT_GE(as_i32(v), -3);
    EXPECT_LE(as_i32(v), 3);
  }
  HostDesc again = parse_host_desc(R"({"host": {"r": {"count": 50, "init": {"random": 5, "min": -3, "max": 3}}}})");
  EXPECT_EQ(again.host["r"].data, d.host["r"].data);
}

TEST(HostDesc, MalformedDescriptionsAreRejected) {
  for (const char* bad : {
           "not json",
           "[]",
           R"({"unknown": 1})",
           R"({"host": {"a": {"count": 2, "init": [1]}}})",
           R"({"host": {"a": {"type": "f64", "count": 1}}})",
           R"({"host": {"a": {"count": -1}}})",
           R"({"host": {"a": {"init": "file.txt"}}})",
           R"({"steps": [{"op": "jump"}]})",
           R"({"steps": [{"op": "alloc", "name": "d"}]})",
           R"({"steps": [{"op": "launch", "kernel": "k", "grid": 1, "block": 1, "args": 3}]})",
           R"({"steps": [{"op": "free", "name": "d", "extra": 1}]})",
       }) {
    EXPECT_THROW(parse_host_desc(bad), HostDescError) << bad;
  }
}

TEST(HostDesc, StepsRunInOrderOnBothEngines) {
  const std::string json = R"({
    "host": {"h": {"count": 32, "init": {"iota": 0}}},
    "steps": [
      {"op": "alloc", "name": "d", "like": "h"},
      {"op": "copy", "dst": "d", "src": "h"},
      {"op": "launch", "kernel": "inc", "grid": 1, "block": 32, "args": ["d", 10]},
      {"op": "launch", "kernel": "inc", "grid": 1, "block": 32, "args": ["d", 5]},
      {"op": "copy", "dst": "h", "src": "d"},
      {"op": "dump", "name": "h"},
      {"op": "free", "name": "d"}
    ]
  })";
  for (bool mpmd : {true, false}) {
    std::ostringstream out;
    HostResult r = run_desc(json, kIncrement, &out, mpmd);
    ASSERT_EQ(r.dumps.size(), 1U);
    std::vector<Bits> want;
    for (std::int32_t i = 0; i < 32; ++i) want.push_back(from_i32(i + 15));
    EXPECT_EQ(r.host["h"].data, want);
    EXPECT_EQ(r.dumps[0], render_values(ScalarKind::I32, want));
    EXPECT_EQ(out.str().rfind("h:\n", 0), 0U);
  }
}

TEST(HostDesc, RuntimeMisuseIsReported) {
  EXPECT_THROW(run_desc(R"({"steps": [{"op": "free", "name": "d"}]})"), DeviceError);
  EXPECT_THROW(run_desc(R"({"host": {"h": {"count": 4}},
    "steps": [{"op": "alloc", "name": "d", "count": 2}, {"op": "copy", "dst": "d", "src": "h"}]})"), DeviceError);
  EXPECT_THROW(run_desc(R"({"steps": [{"op": "launch", "kernel": "inc", "grid": 1, "block": 4, "args": ["nope", 1]}]})"),
               ExecError);
  EXPECT_THROW(run_desc(R"({"steps": [{"op": "launch", "kernel": "other", "grid": 1, "block": 4, "args": []}]})"),
               ExecError);
  EXPECT_THROW(run_desc(R"({"steps": [{"op": "alloc", "name": "d", "count": 1}, {"op": "alloc", "name": "d", "count": 1}]})"),
               HostDescError);
}

TEST(HostDesc, ValuesRoundTripThroughText) {
  std::vector<Bits> ints{from_i32(-5), from_i32(0), from_i32(2147483647)};
  EXPECT_EQ(parse_values(ScalarKind::I32, render_values(ScalarKind::I32, ints)), ints);
  std::vector<Bits> floats{from_f32(0.1F), from_f32(-3.25F), from_f32(1e-30F)};
  EXPECT_EQ(parse_values(ScalarKind::F32, render_values(ScalarKind::F32, floats)), floats);
  EXPECT_EQ(parse_values(ScalarKind::I32, "  1\n2\t3 "), (std::vector<Bits>{1, 2, 3}));
}

TEST(HostDesc, VecCopyWritesTheExpectedFile) {
  HostDesc d = load_host_desc(testing::corpus_dir() / "veccopy.json");
  d.output_dir = scratch_dir("veccopy");
  KernelModule m = parse_module_file(d.source.string());
  EngineOptions opt;
  execute_host(d, m, mpmd_hook(opt));
  const std::string written = slurp(d.output_dir / "veccopy_output.txt");
  EXPECT_EQ(written, slurp(testing::corpus_dir() / "veccopy_output.txt"));
  EXPECT_EQ(parse_values(ScalarKind::I32, written), d.host["h_src"].data);
}

TEST(HostDesc, EngineOverridesReplaceLaunchShape) {
  EngineOptions opt;
  opt.block_override = 64;
  opt.grid_override = 3;
  opt.warp_size = 16;
  LaunchConfig requested;
  requested.block_size = 8;
  requested.grid_size = 1;
  LaunchConfig c = configure(opt, requested);
  EXPECT_EQ(c.block_size, 64);
  EXPECT_EQ(c.grid_size, 3);
  EXPECT_EQ(c.warp_size, 16);
  opt.block_override = 0;
  EXPECT_EQ(configure(opt, requested).block_size, 8);
}

TEST(HostDesc, EveryCorpusDescriptionLoads) {
  for (const auto& name : testing::corpus_names()) {
    HostDesc d = load_host_desc(testing::corpus_dir() / (name + ".json"));
    EXPECT_TRUE(std::filesystem::exists(d.source)) << name;
    EXPECT_FALSE(d.steps.empty()) << name;
  }
}

}  // namespace
}  // namespace collapse
