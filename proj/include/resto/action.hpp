#pragma once

#include "resto/error.hpp"
#include "resto/system_state.hpp"

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace resto {

/**
 * A nonempty set of branches whose breakers are closed simultaneously.
 * Stored sorted; ordering is lexicographic on the sorted indices, which is
 * also the tie-break order of the solver.
 */
class Action {
public:
    Action() = default;

    explicit Action(std::vector<BranchIndex> branches) : branches_(std::move(branches)) {
        std::sort(branches_.begin(), branches_.end());
        if (branches_.empty())
            throw Error(ErrorCode::invalid_argument, "an action needs at least one branch");
        if (std::adjacent_find(branches_.begin(), branches_.end()) != branches_.end())
            throw Error(ErrorCode::invalid_argument, "duplicate branch in action");
        for (BranchIndex j : branches_) {
            if (j >= SystemState::max_branches)
                throw Error(ErrorCode::invalid_argument, "branch index " + std::to_string(j) + " out of range");
            mask_ |= std::uint64_t{1} << j;
        }
    }

    Action(std::initializer_list<BranchIndex> branches) : Action(std::vector<BranchIndex>(branches)) {}

    static Action from_mask(std::uint64_t mask) {
        std::vector<BranchIndex> v;
        for (BranchIndex j = 0; mask != 0; ++j, mask >>= 1)
            if (mask & 1u) v.push_back(j);
        return Action(std::move(v));
    }

    std::span<const BranchIndex> branches() const noexcept { return branches_; }
    std::size_t size() const noexcept { return branches_.size(); }
    bool empty() const noexcept { return branches_.empty(); }
    std::uint64_t mask() const noexcept { return mask_; }
    bool contains(BranchIndex j) const noexcept { return j < 64 && ((mask_ >> j) & 1u); }

    auto begin() const noexcept { return branches_.begin(); }
    auto end() const noexcept { return branches_.end(); }

    /// "{1,4}"
    std::string to_string() const {
        std::string out = "{";
        for (std::size_t i = 0; i < branches_.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(branches_[i]);
        }
        return out + "}";
    }

    friend bool operator==(const Action& a, const Action& b) { return a.branches_ == b.branches_; }
    friend auto operator<=>(const Action& a, const Action& b) { return a.branches_ <=> b.branches_; }

private:
    std::vector<BranchIndex> branches_;
    std::uint64_t mask_ = 0;
};

/// Space-separated rendering of an action sequence, e.g. "{2} {1,4} {3}".
inline std::string to_string(std::span<const Action> sequence) {
    std::string out;
    for (const Action& a : sequence) {
        if (!out.empty()) out += ' ';
        out += a.to_string();
    }
    return out;
}

} // namespace resto
