#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace sbcheck::detail {

struct Sccs {
  /// Component of each vertex, -1 for vertices outside the subgraph.
  std::vector<std::int32_t> comp;
  /// A component is cyclic if it has more than one vertex or a self-loop.
  std::vector<std::uint8_t> cyclic;
};

// Iterative Tarjan over the subgraph induced by `in`. `succ(v)` returns an
// iterable range of vertex indices.
template <class Succ, class In>
Sccs strongly_connected(std::uint32_t n, Succ&& succ, In&& in) {
  Sccs out;
  out.comp.assign(n, -1);
  std::vector<std::uint32_t> index(n, UINT32_MAX), low(n, 0);
  std::vector<std::uint8_t> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::uint32_t counter = 0;

  struct Frame {
    std::uint32_t v;
    std::size_t next;
  };
  std::vector<Frame> call;

  for (std::uint32_t root = 0; root < n; ++root) {
    if (!in(root) || index[root] != UINT32_MAX) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& fr = call.back();
      const auto v = fr.v;
      auto range = succ(v);
      auto begin = std::begin(range);
      auto end = std::end(range);
      bool descended = false;
      while (begin + static_cast<std::ptrdiff_t>(fr.next) != end) {
        const std::uint32_t w = *(begin + static_cast<std::ptrdiff_t>(fr.next));
        ++fr.next;
        if (!in(w)) continue;
        if (index[w] == UINT32_MAX) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        const auto id = static_cast<std::int32_t>(out.cyclic.size());
        std::size_t members = 0;
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          out.comp[w] = id;
          ++members;
        } while (w != v);
        bool cyc = members > 1;
        if (!cyc) {
          for (std::uint32_t x : succ(v)) {
            if (x == v) {
              cyc = true;
              break;
            }
          }
        }
        out.cyclic.push_back(cyc ? 1 : 0);
      }
      call.pop_back();
      if (!call.empty()) {
        auto& parent = call.back();
        low[parent.v] = std::min(low[parent.v], low[v]);
      }
    }
  }
  return out;
}

}  // namespace sbcheck::detail
