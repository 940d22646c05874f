#include <algorithm>
#include <functional>

#include "collapse/cfg.hpp"

namespace collapse {

namespace {

using Graph = std::vector<std::vector<int>>;

// Iterative dominators (Cooper, Harvey, Kennedy) over `succ` from `root`.
// Returns idom with idom[root] == root and -1 for unreachable nodes, plus RPO.
std::pair<std::vector<int>, std::vector<int>> iterative_dominators(const Graph& succ, int root) {
  const std::size_t n = succ.size();
  std::vector<int> order;
  std::vector<char> state(n, 0);
  // Iterative DFS post-order.
  std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
  state[static_cast<std::size_t>(root)] = 1;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto& s = succ[static_cast<std::size_t>(node)];
    if (next < s.size()) {
      int child = s[next++];
      if (!state[static_cast<std::size_t>(child)]) {
        state[static_cast<std::size_t>(child)] = 1;
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  std::reverse(order.begin(), order.end());
  std::vector<int> index(n, -1);
  for (std::size_t i = 0; i < order.size(); ++i) index[static_cast<std::size_t>(order[i])] = static_cast<int>(i);

  Graph pred(n);
  for (std::size_t u = 0; u < n; ++u) {
    if (index[u] < 0) continue;
    for (int v : succ[u]) pred[static_cast<std::size_t>(v)].push_back(static_cast<int>(u));
  }

  std::vector<int> idom(n, -1);
  idom[static_cast<std::size_t>(root)] = root;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (index[static_cast<std::size_t>(a)] > index[static_cast<std::size_t>(b)]) a = idom[static_cast<std::size_t>(a)];
      while (index[static_cast<std::size_t>(b)] > index[static_cast<std::size_t>(a)]) b = idom[static_cast<std::size_t>(b)];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 1; i < order.size(); ++i) {
      int b = order[i];
      int new_idom = -1;
      for (int p : pred[static_cast<std::size_t>(b)]) {
        if (idom[static_cast<std::size_t>(p)] < 0) continue;
        new_idom = new_idom < 0 ? p : intersect(p, new_idom);
      }
      if (new_idom != idom[static_cast<std::size_t>(b)]) {
        idom[static_cast<std::size_t>(b)] = new_idom;
        changed = true;
      }
    }
  }
  return {idom, order};
}

}  // namespace

bool DomTrees::dominates(int a, int b) const {
  if (!reachable(a) || !reachable(b)) return false;
  while (true) {
    if (a == b) return true;
    int up = idom[static_cast<std::size_t>(b)];
    if (up < 0) return false;
    b = up;
  }
}

bool DomTrees::postdominates(int a, int b) const {
  if (a == b) return true;
  while (true) {
    int up = ipdom[static_cast<std::size_t>(b)];
    if (up < 0) return false;
    if (up == a) return true;
    b = up;
  }
}

DomTrees compute_domtrees(const Cfg& cfg) {
  const std::size_t n = cfg.size();
  Graph succ(n);
  for (std::size_t b = 0; b < n; ++b) succ[b] = cfg.successors(static_cast<int>(b));

  DomTrees t;
  auto [idom, order] = iterative_dominators(succ, cfg.entry);
  idom[static_cast<std::size_t>(cfg.entry)] = -1;
  t.idom = std::move(idom);
  t.rpo = std::move(order);
  t.rpo_index.assign(n, -1);
  for (std::size_t i = 0; i < t.rpo.size(); ++i) t.rpo_index[static_cast<std::size_t>(t.rpo[i])] = static_cast<int>(i);

  // Post-dominators on the reversed graph with a virtual sink joined to every return.
  Graph rev(n + 1);
  const int sink = static_cast<int>(n);
  for (std::size_t b = 0; b < n; ++b) {
    if (cfg.blocks[b].term.kind == TermKind::Ret) rev[static_cast<std::size_t>(sink)].push_back(static_cast<int>(b));
    for (int s : succ[b]) rev[static_cast<std::size_t>(s)].push_back(static_cast<int>(b));
  }
  auto [pdom, porder] = iterative_dominators(rev, sink);
  t.ipdom.assign(n, -1);
  for (std::size_t b = 0; b < n; ++b) {
    int p = pdom[b];
    t.ipdom[b] = (p < 0 || p == sink) ? -1 : p;
  }
  return t;
}

std::vector<LoopInfo> find_loops(const Cfg& cfg, const DomTrees& trees) {
  const std::size_t n = cfg.size();
  // Retreating edges: DFS tree edges to an ancestor on the current stack.
  std::vector<char> state(n, 0);
  std::vector<std::pair<int, int>> retreating;
  std::vector<std::pair<int, std::size_t>> stack{{cfg.entry, 0}};
  state[static_cast<std::size_t>(cfg.entry)] = 1;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    auto succ = cfg.successors(node);
    if (next < succ.size()) {
      int child = succ[next++];
      char& st = state[static_cast<std::size_t>(child)];
      if (st == 0) {
        st = 1;
        stack.emplace_back(child, 0);
      } else if (st == 1) {
        retreating.emplace_back(node, child);
      }
    } else {
      state[static_cast<std::size_t>(node)] = 2;
      stack.pop_back();
    }
  }

  std::vector<LoopInfo> loops;
  auto preds = cfg.predecessors();
  for (auto [src, header] : retreating) {
    if (!trees.dominates(header, src)) {
      throw TransformError(TransformErrorKind::Irreducible,
                           "irreducible control flow: edge " + cfg[src].name + " -> " + cfg[header].name);
    }
    auto it = std::find_if(loops.begin(), loops.end(), [&](const LoopInfo& l) { return l.header == header; });
    if (it == loops.end()) {
      loops.emplace_back();
      it = std::prev(loops.end());
      it->header = header;
      it->body.insert(header);
    }
    it->latches.push_back(src);
    std::vector<int> work{src};
    while (!work.empty()) {
      int b = work.back();
      work.pop_back();
      if (!it->body.insert(b).second) continue;
      for (int p : preds[static_cast<std::size_t>(b)]) {
        if (trees.reachable(p)) work.push_back(p);
      }
    }
  }

  for (auto& l : loops) {
    std::sort(l.latches.begin(), l.latches.end());
    l.latch = l.latches.size() == 1 ? l.latches.front() : -1;
    std::vector<int> outside;
    for (int p : preds[static_cast<std::size_t>(l.header)]) {
      if (!l.body.count(p)) outside.push_back(p);
    }
    if (outside.size() == 1 && cfg.successors(outside.front()).size() == 1) l.preheader = outside.front();
    for (int b : l.body) {
      bool exiting = false;
      for (int s : cfg.successors(b)) {
        if (l.body.count(s)) continue;
        exiting = true;
        if (std::find(l.exits.begin(), l.exits.end(), s) == l.exits.end()) l.exits.push_back(s);
      }
      if (exiting) l.exiting.push_back(b);
    }
    std::sort(l.exits.begin(), l.exits.end());
  }
  // Outermost first: larger bodies contain their nested loops.
  std::stable_sort(loops.begin(), loops.end(),
                   [](const LoopInfo& a, const LoopInfo& b) { return a.body.size() > b.body.size(); });
  return loops;
}

}  // namespace collapse
