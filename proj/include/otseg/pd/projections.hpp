#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "otseg/error.hpp"

namespace otseg {

inline void project_box(std::span<double> u, double lo = 0.0, double hi = 1.0) {
    for (double& x : u) x = std::clamp(x, lo, hi);
}

inline void project_nonneg(std::span<double> r) {
    for (double& x : r) x = std::max(0.0, x);
}

/// Entrywise clamp to [-radius, radius].
inline void project_linf_ball(std::span<double> h, double radius = 1.0) {
    for (double& x : h) x = std::clamp(x, -radius, radius);
}

/// Pixelwise radial clamp of (v[x], v[N + x]) to norm rho.
inline void project_linf2_ball(std::span<double> v, double rho) {
    const std::size_t n = v.size() / 2;
    for (std::size_t x = 0; x < n; ++x) {
        const double norm = std::hypot(v[x], v[n + x]);
        if (norm > rho) {
            const double s = rho / norm;
            v[x] *= s;
            v[n + x] *= s;
        }
    }
}

/// Euclidean projection onto {x >= 0, sum x = mass} by sort-based thresholding.
inline void project_simplex(std::span<double> v, double mass = 1.0) {
    if (!(mass > 0.0)) throw InvalidArgument("project_simplex: mass must be positive");
    const std::size_t n = v.size();
    if (n == 0) return;
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        cum += s[k];
        const double t = (cum - mass) / double(k + 1);
        if (k + 1 == n || s[k + 1] <= t) {
            theta = t;
            break;
        }
    }
    for (double& x : v) x = std::max(0.0, x - theta);
}

}  // namespace otseg
