#pragma once

#include <cmath>
#include <string_view>

#include "otseg/error.hpp"
#include "otseg/features/image.hpp"

namespace otseg {

enum class FeatureKind { rgb, gradnorm };

inline FeatureKind parse_feature_kind(std::string_view s) {
    if (s == "rgb") return FeatureKind::rgb;
    if (s == "gradnorm" || s == "gradient_norm_per_channel") return FeatureKind::gradnorm;
    throw InvalidArgument("unknown feature kind '" + std::string(s) + "'");
}

inline FeatureImage extract_features(const Image& img, FeatureKind kind) {
    if (img.pixels() == 0 || img.channels == 0) throw InvalidArgument("extract_features: empty image");
    FeatureImage f{img.width, img.height, img.channels, std::vector<double>(img.data.size())};
    for (double v : img.data)
        if (!std::isfinite(v)) throw InvalidArgument("extract_features: non-finite intensity");
    if (kind == FeatureKind::rgb) {
        f.values = img.data;
        return f;
    }
    // Backward differences; outside the grid the image is zero.
    for (std::size_t i = 0; i < img.height; ++i)
        for (std::size_t j = 0; j < img.width; ++j)
            for (std::size_t c = 0; c < img.channels; ++c) {
                const double u = img.at(i, j, c);
                const double d1 = u - (i > 0 ? img.at(i - 1, j, c) : 0.0);
                const double d2 = u - (j > 0 ? img.at(i, j - 1, c) : 0.0);
                f.values[(i * img.width + j) * img.channels + c] = std::hypot(d1, d2);
            }
    return f;
}

}  // namespace otseg
