#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/features/assignment.hpp"

namespace otseg {

/// One binary mask per label; masks may overlap.
struct ScribbleSet {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::vector<std::uint8_t>> masks;

    std::size_t labels() const noexcept { return masks.size(); }

    /// From an index map where 0 is unlabeled and k >= 1 marks label k.
    static ScribbleSet from_index_map(std::size_t w, std::size_t h, const std::vector<std::uint8_t>& idx,
                                      std::size_t labels = 0) {
        if (idx.size() != w * h) throw InvalidArgument("scribble map size mismatch");
        std::size_t k = labels;
        for (auto v : idx) k = std::max<std::size_t>(k, v);
        ScribbleSet s{w, h, std::vector<std::vector<std::uint8_t>>(k, std::vector<std::uint8_t>(w * h, 0))};
        for (std::size_t p = 0; p < idx.size(); ++p)
            if (idx[p] > 0) s.masks[idx[p] - 1][p] = 1;
        return s;
    }

    std::size_t nonempty_labels() const {
        std::size_t n = 0;
        for (const auto& m : masks)
            for (auto v : m)
                if (v) {
                    ++n;
                    break;
                }
        return n;
    }
};

/// A polyline of [x, y] points painted with a round brush of integer radius.
struct Stroke {
    std::uint8_t label = 0;
    int radius = 0;
    std::vector<std::array<long, 2>> points;
};

/// Paints strokes into an index map (0 unlabeled); later strokes overwrite earlier ones.
/// Brush pixels outside the image are clipped.
inline void rasterize_strokes(std::vector<std::uint8_t>& idx, std::size_t w, std::size_t h,
                              const std::vector<Stroke>& strokes) {
    if (idx.size() != w * h) throw InvalidArgument("scribble map size mismatch");
    for (const auto& s : strokes) {
        if (s.radius < 0) throw InvalidArgument("stroke radius must be nonnegative");
        const long r = s.radius;
        auto dab = [&](long x, long y) {
            for (long dy = -r; dy <= r; ++dy)
                for (long dx = -r; dx <= r; ++dx) {
                    if (dx * dx + dy * dy > r * r) continue;
                    const long px = x + dx, py = y + dy;
                    if (px >= 0 && py >= 0 && px < long(w) && py < long(h)) idx[std::size_t(py) * w + std::size_t(px)] = s.label;
                }
        };
        if (s.points.size() == 1) dab(s.points[0][0], s.points[0][1]);
        for (std::size_t k = 1; k < s.points.size(); ++k) {
            // Bresenham between consecutive points.
            long x0 = s.points[k - 1][0], y0 = s.points[k - 1][1];
            const long x1 = s.points[k][0], y1 = s.points[k][1];
            const long dx = std::labs(x1 - x0), dy = -std::labs(y1 - y0);
            const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
            long err = dx + dy;
            while (true) {
                dab(x0, y0);
                if (x0 == x1 && y0 == y1) break;
                const long e2 = 2 * err;
                if (e2 >= dy) {
                    err += dy;
                    x0 += sx;
                }
                if (e2 <= dx) {
                    err += dx;
                    y0 += sy;
                }
            }
        }
    }
}

/// Normalized bin histogram of each label's scribbled pixels.
inline std::vector<Histogram> prior_from_scribbles(const AssignmentOperator& op, const ScribbleSet& s) {
    if (s.width * s.height != op.pixels()) throw InvalidArgument("scribbles do not match the image size");
    std::vector<Histogram> priors;
    for (std::size_t k = 0; k < s.labels(); ++k) {
        std::vector<double> h(op.bins, 0.0);
        double count = 0.0;
        for (std::size_t p = 0; p < op.pixels(); ++p)
            if (s.masks[k][p]) {
                h[op.bin_of_pixel[p]] += 1.0;
                count += 1.0;
            }
        if (count == 0.0) throw InvalidArgument("scribble label " + std::to_string(k + 1) + " has no pixels");
        for (double& v : h) v /= count;
        priors.emplace_back(std::move(h));
    }
    return priors;
}

}  // namespace otseg
