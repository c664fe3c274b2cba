#pragma once

#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace resto {

// Union-find with path halving and union by size. Each root also carries a
// sticky flag that is OR-ed on union (used to mark energized trees).
class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1), flag_(n, false) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // false when x and y were already in the same set
    bool unite(std::size_t x, std::size_t y) {
        x = find(x);
        y = find(y);
        if (x == y) return false;
        if (size_[x] < size_[y]) std::swap(x, y);
        parent_[y] = x;
        size_[x] += size_[y];
        flag_[x] = flag_[x] || flag_[y];
        return true;
    }

    void mark(std::size_t x) { flag_[find(x)] = true; }
    bool marked(std::size_t x) { return flag_[find(x)]; }

    std::size_t size() const noexcept { return parent_.size(); }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
    std::vector<bool> flag_;
};

} // namespace resto
