#pragma once

// Synthetic region images with known ground truth, shared by the unit tests and
// the acceptance binary.

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "otseg/features/assignment.hpp"
#include "otseg/features/extract.hpp"
#include "otseg/features/kmeans.hpp"
#include "otseg/ot/cost.hpp"
#include "otseg/seg/coseg.hpp"
#include "otseg/seg/segment.hpp"

namespace fixtures {

using otseg::Histogram;

struct Fixture {
    std::size_t width = 0, height = 0;
    otseg::Image image;
    std::vector<std::uint8_t> truth;  ///< region index per pixel
    otseg::Codebook codebook;
    otseg::AssignmentOperator op;
    otseg::CostMatrix cost;
    std::vector<Histogram> priors;  ///< exact normalized histogram of each region

    otseg::SegInput input() const { return {op, width, height, cost}; }
};

using RegionFn = std::function<std::uint8_t(std::size_t row, std::size_t col)>;
using Rgb = std::array<double, 3>;

/// Each region gets its own base colour jittered uniformly by +-jitter; a fraction
/// `noise` of pixels is replaced by uniformly random colours.
inline Fixture make_regions(std::size_t w, std::size_t h, const RegionFn& region, const std::vector<Rgb>& colours,
                            double jitter, double noise, std::size_t bins, std::uint64_t seed) {
    Fixture f;
    f.width = w;
    f.height = h;
    f.image = otseg::Image(w, h, 3);
    f.truth.resize(w * h);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jit(-jitter, jitter), full(0.0, 255.0), u01(0.0, 1.0);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            const auto k = region(i, j);
            f.truth[i * w + j] = k;
            const bool impulse = u01(rng) < noise;
            for (std::size_t c = 0; c < 3; ++c)
                f.image.at(i, j, c) = impulse ? full(rng) : std::clamp(colours.at(k)[c] + jit(rng), 0.0, 255.0);
        }
    const auto feats = otseg::extract_features(f.image, otseg::FeatureKind::rgb);
    f.codebook = otseg::kmeans(feats, bins, seed + 1);
    f.op = otseg::build_assignment(feats, f.codebook);
    f.cost = otseg::default_cost(f.codebook.centroids, f.codebook.centroids);
    std::size_t regions = 0;
    for (auto k : f.truth) regions = std::max<std::size_t>(regions, k + 1);
    for (std::size_t k = 0; k < regions; ++k) {
        std::vector<double> ind(w * h);
        for (std::size_t p = 0; p < w * h; ++p) ind[p] = f.truth[p] == k ? 1.0 : 0.0;
        f.priors.push_back(otseg::histogram_of(f.op, ind).normalized());
    }
    return f;
}

/// The six two-region fixtures (region 1 is the object).
inline std::vector<Fixture> two_region_set(std::size_t size = 32, std::size_t bins = 16) {
    const double s = double(size);
    const double c = (s - 1.0) / 2.0;
    std::vector<Fixture> out;
    out.push_back(make_regions(size, size, [=](std::size_t i, std::size_t j) -> std::uint8_t {
        return std::hypot(i - c, j - c) < 0.3 * s;
    }, {Rgb{40, 60, 200}, Rgb{220, 60, 40}}, 25, 0.0, bins, 11));
    out.push_back(make_regions(size, size, [=](std::size_t i, std::size_t j) -> std::uint8_t {
        return i >= size / 4 && i < 3 * size / 4 && j >= size / 4 && j < 3 * size / 4;
    }, {Rgb{30, 160, 30}, Rgb{230, 230, 60}}, 20, 0.0, bins, 12));
    out.push_back(make_regions(size, size, [=](std::size_t i, std::size_t j) -> std::uint8_t {
        const double r = std::hypot(i - c, j - c);
        return r > 0.18 * s && r < 0.4 * s;
    }, {Rgb{200, 200, 200}, Rgb{60, 20, 90}}, 20, 0.0, bins, 13));
    out.push_back(make_regions(size, size, [=](std::size_t i, std::size_t j) -> std::uint8_t {
        return double(i) + 0.5 * double(j) < 0.8 * s;
    }, {Rgb{90, 50, 20}, Rgb{120, 200, 250}}, 25, 0.005, bins, 14));
    out.push_back(make_regions(size, size, [=](std::size_t i, std::size_t j) -> std::uint8_t {
        const bool a = i >= size / 8 && i < size / 2 && j >= size / 8 && j < size / 2;
        const bool b = i >= 5 * size / 8 && i < 7 * size / 8 && j >= size / 2 && j < 7 * size / 8;
        return a || b;
    }, {Rgb{250, 140, 0}, Rgb{0, 90, 140}}, 30, 0.0, bins, 15));
    out.push_back(make_regions(size, size, [=](std::size_t i, std::size_t j) -> std::uint8_t {
        return (i >= size / 5 && j >= size / 5 && j < 2 * size / 5 && i < 4 * size / 5) ||
               (i >= 3 * size / 5 && i < 4 * size / 5 && j >= size / 5 && j < 4 * size / 5);
    }, {Rgb{20, 20, 20}, Rgb{180, 40, 160}}, 30, 0.01, bins, 16));
    return out;
}

/// A checkered two-colour square object of the given side on a flat background.
struct ObjectImage {
    otseg::Image image;
    std::vector<std::uint8_t> truth;
};

inline ObjectImage object_image(std::size_t w, std::size_t h, std::size_t top, std::size_t left, std::size_t side,
                                Rgb background, std::uint64_t seed, Rgb obj1 = {230, 40, 40},
                                Rgb obj2 = {240, 220, 60}, std::size_t check = 4) {
    ObjectImage r{otseg::Image(w, h, 3), std::vector<std::uint8_t>(w * h)};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jit(-15.0, 15.0);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            const bool in = i >= top && i < top + side && j >= left && j < left + side;
            r.truth[i * w + j] = in;
            const Rgb c = in ? (((i - top) / check + (j - left) / check) % 2 ? obj1 : obj2) : background;
            for (std::size_t ch = 0; ch < 3; ++ch) r.image.at(i, j, ch) = std::clamp(c[ch] + jit(rng), 0.0, 255.0);
        }
    return r;
}

/// Images quantized on one codebook learned from all of them.
struct CosegSet {
    std::vector<ObjectImage> images;
    otseg::Codebook codebook;
    std::vector<otseg::AssignmentOperator> ops;

    std::vector<otseg::CosegImage> inputs() const {
        std::vector<otseg::CosegImage> out;
        for (std::size_t k = 0; k < images.size(); ++k)
            out.push_back({&ops[k], images[k].image.width, images[k].image.height});
        return out;
    }
};

inline CosegSet shared_codebook(std::vector<ObjectImage> images, std::size_t bins, std::uint64_t seed = 7) {
    CosegSet s{std::move(images), {}, {}};
    std::vector<otseg::FeatureImage> feats;
    otseg::FeatureImage all{1, 0, 3, {}};
    for (const auto& im : s.images) {
        feats.push_back(otseg::extract_features(im.image, otseg::FeatureKind::rgb));
        all.height += feats.back().pixels();
        all.values.insert(all.values.end(), feats.back().values.begin(), feats.back().values.end());
    }
    s.codebook = otseg::kmeans(all, bins, seed);
    for (const auto& f : feats) s.ops.push_back(otseg::build_assignment(f, s.codebook));
    return s;
}

/// Same object on two different backgrounds at different positions.
inline CosegSet twin_set() {
    return shared_codebook({object_image(48, 48, 6, 10, 20, {40, 120, 40}, 1),
                            object_image(48, 48, 22, 20, 20, {60, 60, 160}, 2)},
                           16);
}

/// Same object at 1x, 2x and 4x area on three backgrounds.
inline CosegSet scale_set() {
    return shared_codebook({object_image(64, 64, 10, 30, 12, {40, 120, 40}, 1),
                            object_image(64, 64, 30, 8, 17, {60, 60, 160}, 2),
                            object_image(64, 64, 20, 20, 24, {150, 150, 150}, 3)},
                           16);
}

inline double accuracy(const std::vector<std::uint8_t>& labels, const std::vector<std::uint8_t>& truth) {
    std::size_t ok = 0;
    for (std::size_t p = 0; p < truth.size(); ++p) ok += labels[p] == truth[p];
    return double(ok) / double(truth.size());
}

inline double jaccard(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        inter += a[p] && b[p];
        uni += a[p] || b[p];
    }
    return uni ? double(inter) / double(uni) : 1.0;
}

}  // namespace fixtures
