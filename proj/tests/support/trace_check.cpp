#include "trace_check.hpp"

#include <map>
#include <set>

namespace collapse::testing {

namespace {

std::string mismatch(const std::string& key, std::uint64_t expected, std::uint64_t actual) {
  return key + ": expected " + std::to_string(expected) + ", got " + std::to_string(actual);
}

std::uint64_t lookup(const ExecTrace& t, const std::string& key) {
  auto it = t.counts.find(key);
  return it == t.counts.end() ? 0 : it->second;
}

}  // namespace

std::vector<std::string> compare_traces(const ExecTrace& oracle, const ExecTrace& mpmd, const MpmdProgram& program,
                                        int block_size, bool allow_folded) {
  std::map<std::string, PeelLevel> peels;
  for (const auto& b : program.ir.cfg.blocks) {
    if (b.term.kind == TermKind::CondBr && b.term.peel != PeelLevel::None && b.term.id >= 0) {
      peels["t" + std::to_string(b.term.id)] = b.term.peel;
    }
  }

  std::vector<std::string> problems;
  std::set<std::string> explained;
  auto expect = [&](const std::string& key, std::uint64_t want, bool optional) {
    explained.insert(key);
    const std::uint64_t got = lookup(mpmd, key);
    if (got == want) return;
    if (optional && got == 0) return;
    problems.push_back(mismatch(key, want, got));
  };

  for (const auto& [key, count] : oracle.counts) {
    if (key.front() == 'i') {
      if (mpmd.counts.count(key + ".store") || mpmd.counts.count(key + ".load")) {
        expect(key + ".store", count, false);
        expect(key + ".load", count, false);
      } else {
        expect(key, count, false);
      }
      continue;
    }
    auto peel = peels.find(key);
    if (peel == peels.end()) {
      expect(key, count, allow_folded);
      continue;
    }
    const auto group = static_cast<std::uint64_t>(peel->second == PeelLevel::Warp ? program.warp_size : block_size);
    if (count % group != 0) {
      problems.push_back(key + ": " + std::to_string(count) + " evaluations do not fill whole groups of " +
                         std::to_string(group));
      continue;
    }
    expect(key + ".flag", count, allow_folded);
    expect(key + ".peel", count / group, allow_folded);
  }
  for (const auto& [key, count] : mpmd.counts) {
    if (!explained.count(key)) problems.push_back(key + ": unexpected counter with value " + std::to_string(count));
  }
  return problems;
}

}  // namespace collapse::testing
