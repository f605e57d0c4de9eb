#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/features/image.hpp"
#include "otseg/ot/cost.hpp"

namespace otseg {

struct Codebook {
    std::size_t dim = 0;
    Centroids centroids;
    std::size_t bins() const noexcept { return centroids.size(); }
};

struct KMeansOptions {
    std::size_t max_iter = 30;
    std::size_t max_samples = 100000;
};

namespace detail {

inline double squared_distance(const double* x, const double* y, std::size_t dim) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = x[k] - y[k];
        s += d * d;
    }
    return s;
}

/// Nearest centroid (ties to the lowest index) and its squared distance.
inline std::pair<std::uint32_t, double> nearest_centroid(const double* x, const std::vector<double>& centers,
                                                         std::size_t m, std::size_t dim) {
    std::uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m; ++c) {
        const double d = squared_distance(x, centers.data() + c * dim, dim);
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::uint32_t>(c);
        }
    }
    return {best, best_d};
}

inline std::size_t count_distinct(const std::vector<double>& pts, std::size_t n, std::size_t dim) {
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = k;
    auto less = [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(pts.begin() + a * dim, pts.begin() + (a + 1) * dim, pts.begin() + b * dim,
                                            pts.begin() + (b + 1) * dim);
    };
    std::sort(idx.begin(), idx.end(), less);
    std::size_t distinct = n > 0 ? 1 : 0;
    for (std::size_t k = 1; k < n; ++k)
        if (less(idx[k - 1], idx[k])) ++distinct;
    return distinct;
}

}  // namespace detail

/// Sum of squared distances of `features` to their nearest centroid.
inline double kmeans_objective(const FeatureImage& f, const Codebook& cb) {
    std::vector<double> flat;
    for (const auto& c : cb.centroids) flat.insert(flat.end(), c.begin(), c.end());
    double s = 0.0;
    for (std::size_t p = 0; p < f.pixels(); ++p) s += detail::nearest_centroid(f.at(p), flat, cb.bins(), f.dim).second;
    return s;
}

/// Seeded k-means++ initialization followed by Lloyd iterations on at most
/// `max_samples` pixels. `objective_trace`, when given, receives the objective
/// after each assignment step.
inline Codebook kmeans(const FeatureImage& f, std::size_t m, std::uint64_t seed, const KMeansOptions& opt = {},
                       std::vector<double>* objective_trace = nullptr) {
    if (f.pixels() == 0 || f.dim == 0) throw InvalidArgument("kmeans: empty feature image");
    if (m == 0) throw InvalidArgument("kmeans: bin count must be positive");
    const std::size_t dim = f.dim;
    std::mt19937_64 rng(seed);

    std::vector<double> pts;
    std::size_t n = f.pixels();
    if (n > opt.max_samples) {
        std::vector<std::size_t> all(n);
        for (std::size_t k = 0; k < n; ++k) all[k] = k;
        for (std::size_t k = 0; k < opt.max_samples; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, n - 1);
            std::swap(all[k], all[pick(rng)]);
        }
        all.resize(opt.max_samples);
        std::sort(all.begin(), all.end());
        for (std::size_t p : all) pts.insert(pts.end(), f.at(p), f.at(p) + dim);
        n = opt.max_samples;
    } else {
        pts = f.values;
    }
    const std::size_t distinct = detail::count_distinct(pts, n, dim);
    if (m > distinct)
        throw InvalidArgument("kmeans: requested " + std::to_string(m) + " bins but only " + std::to_string(distinct) +
                              " distinct feature vectors are available");

    // k-means++ seeding; already chosen points have zero weight so centers stay distinct.
    std::vector<double> centers;
    centers.reserve(m * dim);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    const std::size_t p0 = first(rng);
    centers.insert(centers.end(), pts.begin() + p0 * dim, pts.begin() + (p0 + 1) * dim);
    std::vector<double> d2(n);
    for (std::size_t k = 0; k < n; ++k) d2[k] = detail::squared_distance(&pts[k * dim], centers.data(), dim);
    for (std::size_t c = 1; c < m; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::uniform_real_distribution<double> u(0.0, total);
        const double target = u(rng);
        std::size_t pick = n;
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (d2[k] <= 0.0) continue;
            acc += d2[k];
            pick = k;
            if (acc >= target) break;
        }
        centers.insert(centers.end(), pts.begin() + pick * dim, pts.begin() + (pick + 1) * dim);
        const double* cc = centers.data() + c * dim;
        for (std::size_t k = 0; k < n; ++k) d2[k] = std::min(d2[k], detail::squared_distance(&pts[k * dim], cc, dim));
    }

    std::vector<std::uint32_t> assign(n, std::numeric_limits<std::uint32_t>::max());
    std::vector<double> dist(n);
    std::vector<double> sums(m * dim);
    std::vector<std::size_t> counts(m);
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
            const auto [c, d] = detail::nearest_centroid(&pts[std::size_t(k) * dim], centers, m, dim);
            if (c != assign[k]) changed = true;
            assign[k] = c;
            dist[k] = d;
        }
        if (objective_trace) {
            double obj = 0.0;
            for (double v : dist) obj += v;
            objective_trace->push_back(obj);
        }
        if (!changed) break;
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t k = 0; k < n; ++k) {
            ++counts[assign[k]];
            for (std::size_t d = 0; d < dim; ++d) sums[assign[k] * dim + d] += pts[k * dim + d];
        }
        for (std::size_t c = 0; c < m; ++c) {
            if (counts[c] == 0) {
                // Empty cluster: move it onto the point farthest from its current center.
                const std::size_t far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
                std::copy(pts.begin() + far * dim, pts.begin() + (far + 1) * dim, centers.begin() + c * dim);
                dist[far] = 0.0;
                continue;
            }
            for (std::size_t d = 0; d < dim; ++d) centers[c * dim + d] = sums[c * dim + d] / double(counts[c]);
        }
    }

    Codebook cb{dim, Centroids(m, std::vector<double>(dim))};
    for (std::size_t c = 0; c < m; ++c)
        std::copy(centers.begin() + c * dim, centers.begin() + (c + 1) * dim, cb.centroids[c].begin());
    return cb;
}

/// Default codebook size 8^n.
inline std::size_t default_bins(std::size_t dim) {
    std::size_t m = 1;
    for (std::size_t k = 0; k < dim; ++k) m *= 8;
    return m;
}

}  // namespace otseg
