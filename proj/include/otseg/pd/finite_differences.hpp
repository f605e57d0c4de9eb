#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "otseg/error.hpp"

namespace otseg {

// Backward differences on a row-major height x width grid with zero values
// outside. Gradient layout: the first N entries hold the vertical component
// v1(i,j) = u(i,j) - u(i-1,j), the next N the horizontal v2(i,j) = u(i,j) - u(i,j-1).

inline void grad(std::span<const double> u, std::size_t width, std::size_t height, std::span<double> v) {
    const std::size_t n = width * height;
    if (u.size() != n || v.size() != 2 * n) throw InvalidArgument("grad: size mismatch");
    auto v1 = v.subspan(0, n), v2 = v.subspan(n, n);
    const auto h = static_cast<std::ptrdiff_t>(height);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < h; ++ii) {
        const std::size_t i = std::size_t(ii);
        for (std::size_t j = 0; j < width; ++j) {
            const std::size_t x = i * width + j;
            v1[x] = u[x] - (i > 0 ? u[x - width] : 0.0);
            v2[x] = u[x] - (j > 0 ? u[x - 1] : 0.0);
        }
    }
}

/// out = grad^T v, i.e. minus the discrete divergence.
inline void grad_adjoint(std::span<const double> v, std::size_t width, std::size_t height, std::span<double> out) {
    const std::size_t n = width * height;
    if (out.size() != n || v.size() != 2 * n) throw InvalidArgument("grad_adjoint: size mismatch");
    auto v1 = v.subspan(0, n), v2 = v.subspan(n, n);
    const auto h = static_cast<std::ptrdiff_t>(height);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < h; ++ii) {
        const std::size_t i = std::size_t(ii);
        for (std::size_t j = 0; j < width; ++j) {
            const std::size_t x = i * width + j;
            double s = v1[x] + v2[x];
            if (i + 1 < height) s -= v1[x + width];
            if (j + 1 < width) s -= v2[x + 1];
            out[x] = s;
        }
    }
}

inline void div(std::span<const double> v, std::size_t width, std::size_t height, std::span<double> out) {
    grad_adjoint(v, width, height, out);
    for (double& x : out) x = -x;
}

inline std::vector<double> grad(std::span<const double> u, std::size_t width, std::size_t height) {
    std::vector<double> v(2 * u.size());
    grad(u, width, height, v);
    return v;
}

inline std::vector<double> div(std::span<const double> v, std::size_t width, std::size_t height) {
    std::vector<double> out(v.size() / 2);
    div(v, width, height, out);
    return out;
}

/// Isotropic total variation sum_x |grad u(x)|.
inline double total_variation(std::span<const double> u, std::size_t width, std::size_t height) {
    const auto v = grad(u, width, height);
    const std::size_t n = u.size();
    double tv = 0.0;
    for (std::size_t x = 0; x < n; ++x) tv += std::hypot(v[x], v[n + x]);
    return tv;
}

}  // namespace otseg
