#pragma once

#include <cstddef>
#include <vector>

#include "otseg/error.hpp"

namespace otseg {

/// Interleaved row-major image with intensities in [0, 255].
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(std::size_t w, std::size_t h, std::size_t c, double fill = 0.0)
        : width(w), height(h), channels(c), data(w * h * c, fill) {}

    std::size_t pixels() const noexcept { return width * height; }
    double& at(std::size_t row, std::size_t col, std::size_t ch) noexcept {
        return data[(row * width + col) * channels + ch];
    }
    double at(std::size_t row, std::size_t col, std::size_t ch) const noexcept {
        return data[(row * width + col) * channels + ch];
    }
};

/// Per-pixel feature vectors, pixel-major.
struct FeatureImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t dim = 0;
    std::vector<double> values;

    std::size_t pixels() const noexcept { return width * height; }
    const double* at(std::size_t pixel) const noexcept { return values.data() + pixel * dim; }
};

}  // namespace otseg
