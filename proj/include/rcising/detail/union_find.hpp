#pragma once

#include <numeric>
#include <utility>
#include <vector>

namespace rci::detail {

// Union by size with path halving.
class UnionFind {
 public:
  explicit UnionFind(int n = 0) { reset(n); }

  void reset(int n) {
    parent_.resize(static_cast<std::size_t>(n));
    size_.assign(static_cast<std::size_t>(n), 1);
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int v) {
    auto* p = parent_.data();
    while (p[v] != v) {
      p[v] = p[p[v]];
      v = p[v];
    }
    return v;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[static_cast<std::size_t>(a)] < size_[static_cast<std::size_t>(b)]) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
    size_[static_cast<std::size_t>(a)] += size_[static_cast<std::size_t>(b)];
    return true;
  }

  int component_size(int v) { return size_[static_cast<std::size_t>(find(v))]; }
  int count() const { return static_cast<int>(parent_.size()); }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

}  // namespace rci::detail
