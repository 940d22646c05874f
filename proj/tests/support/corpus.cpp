#include "corpus.hpp"

#include <algorithm>

namespace collapse::testing {

std::filesystem::path corpus_dir() { return COLLAPSE_CORPUS_DIR; }

std::vector<std::string> corpus_names() {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir())) {
    if (entry.is_regular_file() && entry.path().extension() == ".spk") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

namespace {

CorpusCase load(const std::string& name, int block_size) {
  CorpusCase c;
  c.name = name;
  c.module = parse_module_file((corpus_dir() / (name + ".spk")).string());
  c.desc = load_host_desc(corpus_dir() / (name + ".json"));
  c.desc.output_dir = std::filesystem::temp_directory_path() / "collapse_corpus_dumps";
  std::filesystem::create_directories(c.desc.output_dir);
  if (block_size > 0) {
    for (auto& step : c.desc.steps) {
      if (step.kind == HostStep::Kind::Launch) step.block = block_size;
    }
  }
  EngineOptions engine;
  engine.workers = 1;
  LaunchHook oracle = oracle_hook(engine);
  LaunchHook hook = [&](const KernelDef& kernel, const LaunchConfig& config, DeviceMemory& memory,
                        const std::vector<KernelArg>& args) {
    c.launches.push_back(Workload{kernel, config, memory, args});
    oracle(kernel, config, memory, args);
  };
  execute_host(c.desc, c.module, hook);
  return c;
}

}  // namespace

CorpusCase load_case(const std::string& name) { return load(name, 0); }

CorpusCase load_case_at(const std::string& name, int block_size) { return load(name, block_size); }

}  // namespace collapse::testing
