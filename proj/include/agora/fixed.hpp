#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "agora/common.hpp"

namespace agora {

// Credits are exact fixed-point with two decimal places, stored as cents.
// Ledger arithmetic must never round, so there is no implicit conversion
// from floating point; the only float entry point rounds up explicitly.
class Credit {
public:
    constexpr Credit() = default;

    static constexpr Credit from_cents(int64_t cents) {
        if (cents < 0) fail("negative_credit", "credit amount must be >= 0");
        Credit c;
        c.cents_ = cents;
        return c;
    }

    // Accepts "12", "12.3", "12.30". Rejects sign, more than two decimals,
    // and anything non-numeric.
    static Credit parse(std::string_view s) {
        if (s.empty()) fail("bad_credit", "empty credit literal");
        size_t i = 0;
        int64_t whole = 0;
        bool any = false;
        for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i) {
            any = true;
            if (whole > (std::numeric_limits<int64_t>::max() - 9) / 10)
                fail("bad_credit", "credit literal out of range: " + std::string(s));
            whole = whole * 10 + (s[i] - '0');
        }
        if (!any) fail("bad_credit", "malformed credit literal: " + std::string(s));
        int64_t frac = 0;
        if (i < s.size()) {
            if (s[i] != '.') fail("bad_credit", "malformed credit literal: " + std::string(s));
            ++i;
            size_t digits = 0;
            for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i, ++digits)
                frac = frac * 10 + (s[i] - '0');
            if (digits == 0 || digits > 2)
                fail("bad_credit", "credits carry at most two decimals: " + std::string(s));
            if (digits == 1) frac *= 10;
            if (i != s.size()) fail("bad_credit", "malformed credit literal: " + std::string(s));
        }
        if (whole > (std::numeric_limits<int64_t>::max() - frac) / 100)
            fail("bad_credit", "credit literal out of range: " + std::string(s));
        return from_cents(whole * 100 + frac);
    }

    // Smallest credit amount whose value is >= v. Used when converting a
    // real bid rate into a concrete spend.
    static Credit from_real_ceil(double v) {
        if (!(v >= 0) || !std::isfinite(v)) fail("bad_credit", "credit value must be finite and >= 0");
        double cents = std::ceil(v * 100.0 - 1e-9);
        if (cents > 9.0e18) fail("bad_credit", "credit value out of range");
        return from_cents(static_cast<int64_t>(cents));
    }

    constexpr int64_t cents() const { return cents_; }
    double to_real() const { return static_cast<double>(cents_) / 100.0; }
    constexpr bool is_zero() const { return cents_ == 0; }

    std::string str() const {
        int64_t w = cents_ / 100, f = cents_ % 100;
        std::string out = std::to_string(w);
        out += '.';
        out += static_cast<char>('0' + f / 10);
        out += static_cast<char>('0' + f % 10);
        return out;
    }

    Credit operator+(Credit o) const {
        if (cents_ > std::numeric_limits<int64_t>::max() - o.cents_)
            fail("credit_overflow", "credit addition overflow");
        return from_cents(cents_ + o.cents_);
    }

    Credit operator-(Credit o) const {
        if (o.cents_ > cents_) fail("credit_underflow", "credit subtraction below zero");
        return from_cents(cents_ - o.cents_);
    }

    Credit& operator+=(Credit o) { return *this = *this + o; }
    Credit& operator-=(Credit o) { return *this = *this - o; }

    friend constexpr auto operator<=>(Credit, Credit) = default;

private:
    int64_t cents_ = 0;
};

}  // namespace agora
