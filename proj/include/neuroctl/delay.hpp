#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace neuroctl {

// Timestep count or infinity. Infinity is a distinct state, never a large
// sentinel, so sums cannot overflow into finite values.
class Delay {
public:
    constexpr Delay() = default; // zero
    constexpr explicit Delay(std::uint32_t steps) : steps_(steps) {}

    static constexpr Delay infinite() {
        Delay d;
        d.steps_.reset();
        return d;
    }

    [[nodiscard]] constexpr bool is_infinite() const { return !steps_.has_value(); }
    [[nodiscard]] constexpr bool is_finite() const { return steps_.has_value(); }
    // Throws std::bad_optional_access for infinity.
    [[nodiscard]] constexpr std::uint32_t steps() const { return steps_.value(); }

    friend constexpr Delay operator+(Delay a, Delay b) {
        if (a.is_infinite() || b.is_infinite())
            return infinite();
        return Delay(*a.steps_ + *b.steps_);
    }

    friend constexpr bool operator==(Delay a, Delay b) { return a.steps_ == b.steps_; }

    friend constexpr std::strong_ordering operator<=>(Delay a, Delay b) {
        if (a.is_infinite() || b.is_infinite())
            return a.is_infinite() <=> b.is_infinite();
        return *a.steps_ <=> *b.steps_;
    }

    [[nodiscard]] std::string to_string() const { return is_infinite() ? "inf" : std::to_string(*steps_); }

private:
    std::optional<std::uint32_t> steps_ = 0u;
};

} // namespace neuroctl
