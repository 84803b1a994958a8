#include <algorithm>

#include "amort/bytecode.hpp"

namespace amort {

WlpOrder order_for_wlp(const Procedure& proc) {
  WlpOrder out;
  const std::size_t n = proc.code.size();
  if (n == 0) return out;

  auto succ = [&](std::size_t pc) {
    std::vector<std::size_t> s;
    for (std::size_t t : successors(proc.code[pc], pc)) {
      if (t < n) s.push_back(t);
    }
    return s;
  };

  std::vector<char> visited(n, 0);
  std::vector<std::size_t> post;
  // iterative DFS; each stack entry remembers how many successors were expanded
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  visited[0] = 1;
  while (!stack.empty()) {
    auto& [pc, k] = stack.back();
    auto s = succ(pc);
    if (k < s.size()) {
      std::size_t next = s[k++];
      if (!visited[next]) {
        visited[next] = 1;
        stack.emplace_back(next, 0);
      }
    } else {
      post.push_back(pc);
      stack.pop_back();
    }
  }
  out.order.assign(post.rbegin(), post.rend());

  std::vector<std::size_t> pos(n, n);
  for (std::size_t i = 0; i < out.order.size(); ++i) pos[out.order[i]] = i;
  for (std::size_t pc : out.order) {
    for (std::size_t t : succ(pc)) {
      if (pos[t] <= pos[pc]) out.back_edge_targets.insert(t);
    }
  }
  for (std::size_t pc = 0; pc < n; ++pc) {
    if (!visited[pc]) {
      out.unreachable.insert(pc);
      out.order.push_back(pc);
    }
  }
  return out;
}

}  // namespace amort
