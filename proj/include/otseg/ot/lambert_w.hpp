#pragma once

#include <cmath>
#include <limits>

#include "otseg/error.hpp"

namespace otseg {

namespace detail {

constexpr int kLambertMaxIter = 20;

// Principal branch from w + log w = s, for s >= 1 (so w >= 1).
inline double lambert_w_log_form(double s) {
    double w = s - std::log(s);
    if (!(w > 0.0)) w = 1.0;
    for (int k = 0; k < kLambertMaxIter; ++k) {
        const double f = w + std::log(w) - s;
        const double d1 = 1.0 + 1.0 / w;
        const double d2 = -1.0 / (w * w);
        double next = w - 2.0 * f * d1 / (2.0 * d1 * d1 - f * d2);
        if (!(next > 0.0)) next = 0.5 * w;
        const double step = std::abs(next - w);
        w = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * w) break;
    }
    return w;
}

inline double lambert_w_direct(double z) {
    double w = std::log1p(z);
    for (int k = 0; k < kLambertMaxIter; ++k) {
        const double e = std::exp(w);
        const double f = w * e - z;
        if (f == 0.0) break;
        const double next = w - f / (e * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
        const double step = std::abs(next - w);
        w = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(w))) break;
    }
    return w;
}

}  // namespace detail

/// Principal branch of the Lambert function on z >= 0.
inline double lambert_w(double z) {
    if (!std::isfinite(z) || z < 0.0) throw DomainError("lambert_w: argument must be finite and nonnegative");
    if (z == 0.0) return 0.0;
    if (z < std::exp(1.0)) return detail::lambert_w_direct(z);
    return detail::lambert_w_log_form(std::log(z));
}

/// W(e^s) without forming e^s.
inline double lambert_w_exp(double s) {
    if (std::isnan(s) || s == std::numeric_limits<double>::infinity())
        throw DomainError("lambert_w_exp: exponent must not be NaN or +inf");
    if (s >= 1.0) return detail::lambert_w_log_form(s);
    const double z = std::exp(s);
    return z == 0.0 ? 0.0 : detail::lambert_w_direct(z);
}

/// W(k e^s) for k > 0.
inline double lambert_w_scaled(double k, double s) {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("lambert_w_scaled: scale must be positive and finite");
    return lambert_w_exp(std::log(k) + s);
}

}  // namespace otseg
