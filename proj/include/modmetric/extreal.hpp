#pragma once

#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace modmetric {

/// A value in [0, inf]: the codomain of every modular.
///
/// Infinity is a distinguished variant rather than a large finite
/// sentinel, so absorption under add/scale is exact and can never be
/// confused with an overflowed finite sum.
class ExtReal {
public:
    constexpr ExtReal() noexcept : value_(0.0), infinite_(false) {}

    // Implicit from double on purpose: modular formulas read naturally.
    // Rejects negatives and NaN; IEEE +inf maps onto the infinite variant.
    ExtReal(double v) : value_(v), infinite_(false) {
        if (std::isnan(v)) {
            throw std::invalid_argument("ExtReal: NaN is not a value in [0, inf]");
        }
        if (v < 0.0) {
            throw std::invalid_argument("ExtReal: negative value " + std::to_string(v));
        }
        if (std::isinf(v)) {
            infinite_ = true;
            value_ = 0.0;
        }
    }

    static constexpr ExtReal infinity() noexcept {
        ExtReal e;
        e.infinite_ = true;
        return e;
    }

    constexpr bool is_finite() const noexcept { return !infinite_; }
    constexpr bool is_infinite() const noexcept { return infinite_; }

    /// Finite payload; calling this on the infinite value is a logic error.
    double value() const {
        if (infinite_) {
            throw std::logic_error("ExtReal: value() called on infinity");
        }
        return value_;
    }

    /// Finite payload, or IEEE +inf for the infinite variant.
    constexpr double as_double() const noexcept {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }

    friend ExtReal operator+(const ExtReal& a, const ExtReal& b) {
        if (a.infinite_ || b.infinite_) return infinity();
        double s = a.value_ + b.value_;
        if (std::isinf(s)) return infinity();  // saturate past DBL_MAX
        return ExtReal(s);
    }

    friend constexpr bool operator==(const ExtReal& a, const ExtReal& b) noexcept {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }

    // Total order; infinity is the maximum element.
    friend constexpr std::strong_ordering operator<=>(const ExtReal& a,
                                                      const ExtReal& b) noexcept {
        if (a.infinite_ && b.infinite_) return std::strong_ordering::equal;
        if (a.infinite_) return std::strong_ordering::greater;
        if (b.infinite_) return std::strong_ordering::less;
        if (a.value_ < b.value_) return std::strong_ordering::less;
        if (a.value_ > b.value_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    /// Decimal literal at 17 significant digits (bit-exact round trip),
    /// or "inf" for the infinite variant.
    std::string to_string() const {
        if (infinite_) return "inf";
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), value_,
                                 std::chars_format::general, 17);
        return std::string(buf, res.ptr);
    }

    static ExtReal from_string(std::string_view s) {
        if (s == "inf") return infinity();
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw std::invalid_argument("ExtReal: cannot parse '" + std::string(s) + "'");
        }
        return ExtReal(v);
    }

private:
    double value_;
    bool infinite_;
};

/// c * a for strictly positive finite c; infinity stays infinity.
/// 0 * infinity is deliberately left undefined, hence the precondition.
inline ExtReal scale(double c, const ExtReal& a) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("scale: factor must be strictly positive and finite");
    }
    if (a.is_infinite()) return ExtReal::infinity();
    double p = c * a.value();
    if (std::isinf(p)) return ExtReal::infinity();
    return ExtReal(p);
}

inline bool leq(const ExtReal& a, const ExtReal& b) noexcept { return a <= b; }

namespace detail {

/// Shortest decimal that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

}  // namespace modmetric
