#pragma once

#include <compare>

namespace synergy {

// Signed information value in millibits (1 mbit = 1/1000 bit, base-2 logs).
// All entropy and transmission results are carried in this unit; negative
// transmission values indicate synergy (reduction of uncertainty).
class Mbits {
public:
    constexpr Mbits() = default;
    constexpr explicit Mbits(double millibits) : value_(millibits) {}

    static constexpr Mbits from_bits(double bits) { return Mbits(bits * 1000.0); }

    constexpr double value() const { return value_; }
    constexpr double bits() const { return value_ / 1000.0; }

    constexpr Mbits operator+(Mbits other) const { return Mbits(value_ + other.value_); }
    constexpr Mbits operator-(Mbits other) const { return Mbits(value_ - other.value_); }
    constexpr Mbits operator-() const { return Mbits(-value_); }
    constexpr Mbits operator*(double scale) const { return Mbits(value_ * scale); }
    constexpr Mbits& operator+=(Mbits other) {
        value_ += other.value_;
        return *this;
    }

    constexpr auto operator<=>(const Mbits&) const = default;

private:
    double value_ = 0.0;
};

constexpr Mbits operator*(double scale, Mbits m) { return m * scale; }

} // namespace synergy
