#pragma once

#include "resto/error.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace resto {

using BranchIndex = std::size_t;

/// Branch status: unknown (breakers open), energized, damaged.
enum class Status : std::uint8_t { U = 0, E = 1, D = 2 };

inline char to_char(Status s) {
    switch (s) {
    case Status::U: return 'U';
    case Status::E: return 'E';
    case Status::D: return 'D';
    }
    return '?';
}

inline Status status_from_char(char c) {
    switch (c) {
    case 'U': return Status::U;
    case 'E': return Status::E;
    case 'D': return Status::D;
    default: break;
    }
    throw Error(ErrorCode::invalid_argument, std::string("invalid branch status '") + c + "'");
}

/**
 * Status of every branch, packed two bits per branch (U=0, E=1, D=2).
 *
 * The packed code is the canonical dedup key of an MDP state, so two states
 * compare equal iff they have the same size and code.
 */
class SystemState {
public:
    static constexpr std::size_t max_branches = 32;

    SystemState() = default;

    /// All-U state over `branch_count` branches.
    explicit SystemState(std::size_t branch_count) : size_(static_cast<std::uint32_t>(branch_count)) {
        if (branch_count > max_branches)
            throw Error(ErrorCode::limit_exceeded,
                        "at most " + std::to_string(max_branches) + " branches are supported");
    }

    static SystemState from_string(std::string_view text) {
        SystemState s(text.size());
        for (std::size_t i = 0; i < text.size(); ++i)
            s.set(i, status_from_char(text[i]));
        return s;
    }

    static SystemState from_code(std::uint64_t code, std::size_t branch_count) {
        SystemState s(branch_count);
        const std::uint64_t used = branch_count == 32 ? ~0ull : (1ull << (2 * branch_count)) - 1;
        const std::uint64_t high = (code >> 1) & 0x5555555555555555ull;
        if ((code & ~used) != 0 || (code & high) != 0)
            throw Error(ErrorCode::invalid_argument, "state code out of range for " + std::to_string(branch_count) + " branches");
        s.code_ = code;
        return s;
    }

    std::size_t size() const noexcept { return size_; }
    std::uint64_t code() const noexcept { return code_; }

    Status operator[](BranchIndex i) const noexcept {
        return static_cast<Status>((code_ >> (2 * i)) & 0x3u);
    }

    void set(BranchIndex i, Status s) noexcept {
        code_ &= ~(std::uint64_t{0x3} << (2 * i));
        code_ |= std::uint64_t{static_cast<std::uint8_t>(s)} << (2 * i);
    }

    SystemState with(BranchIndex i, Status s) const noexcept {
        SystemState t = *this;
        t.set(i, s);
        return t;
    }

    std::size_t count(Status s) const noexcept {
        std::size_t n = 0;
        for (std::size_t i = 0; i < size_; ++i)
            n += (*this)[i] == s;
        return n;
    }

    /// Bitmask of branches with status `s`.
    std::uint64_t mask(Status s) const noexcept {
        std::uint64_t m = 0;
        for (std::size_t i = 0; i < size_; ++i)
            if ((*this)[i] == s) m |= std::uint64_t{1} << i;
        return m;
    }

    std::string to_string() const {
        std::string out(size_, 'U');
        for (std::size_t i = 0; i < size_; ++i)
            out[i] = to_char((*this)[i]);
        return out;
    }

    friend bool operator==(const SystemState&, const SystemState&) = default;
    friend auto operator<=>(const SystemState&, const SystemState&) = default;

private:
    std::uint64_t code_ = 0;
    std::uint32_t size_ = 0;
};

} // namespace resto
