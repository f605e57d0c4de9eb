#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <variant>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/ot/types.hpp"

namespace otseg {

/// C(i,j) = |A_i - B_j|^p
struct EuclideanPower {
    double p = 1.0;
};

/// C(i,j) = 1 - exp(-gamma |A_i - B_j|)
struct ExpConcave {
    double gamma = 1.0;
};

using CostKind = std::variant<EuclideanPower, ExpConcave>;

using Centroids = std::vector<std::vector<double>>;

inline double euclidean_distance(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        s += d * d;
    }
    return std::sqrt(s);
}

inline CostMatrix build_cost_matrix(const Centroids& src, const Centroids& dst, const CostKind& kind,
                                    bool normalize = false) {
    if (src.empty() || dst.empty()) throw InvalidArgument("cost matrix needs non-empty centroid lists");
    const std::size_t dim = src.front().size();
    for (const auto& c : src)
        if (c.size() != dim) throw InvalidArgument("centroid dimension mismatch");
    for (const auto& c : dst)
        if (c.size() != dim) throw InvalidArgument("centroid dimension mismatch");

    std::visit(
        [](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, EuclideanPower>) {
                if (!(k.p > 0.0)) throw InvalidArgument("cost exponent p must be positive");
            } else {
                if (!(k.gamma > 0.0)) throw InvalidArgument("cost gamma must be positive");
            }
        },
        kind);

    CostMatrix cost{Matrix<double>(src.size(), dst.size())};
    for (std::size_t i = 0; i < src.size(); ++i) {
        for (std::size_t j = 0; j < dst.size(); ++j) {
            const double d = euclidean_distance(src[i], dst[j]);
            cost.entries(i, j) = std::visit(
                [d](const auto& k) -> double {
                    using K = std::decay_t<decltype(k)>;
                    if constexpr (std::is_same_v<K, EuclideanPower>)
                        return d == 0.0 ? 0.0 : std::pow(d, k.p);
                    else
                        return -std::expm1(-k.gamma * d);
                },
                kind);
        }
    }

    if (normalize) {
        const auto flat = cost.entries.flat();
        const double peak = *std::max_element(flat.begin(), flat.end());
        if (peak > 0.0)
            for (double& c : cost.entries.flat()) c /= peak;
    }
    return cost;
}

/// Median of the pairwise distances within one centroid list (0 for a single centroid).
inline double median_pairwise_distance(const Centroids& centroids) {
    std::vector<double> d;
    for (std::size_t i = 0; i < centroids.size(); ++i)
        for (std::size_t j = i + 1; j < centroids.size(); ++j)
            d.push_back(euclidean_distance(centroids[i], centroids[j]));
    if (d.empty()) return 0.0;
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid;
}

/// Exponential-concave cost with gamma = 2 / median pairwise distance of `src`,
/// scaled to a maximum of 1.
inline CostMatrix default_cost(const Centroids& src, const Centroids& dst) {
    const double med = median_pairwise_distance(src);
    return build_cost_matrix(src, dst, ExpConcave{med > 0.0 ? 2.0 / med : 1.0}, true);
}

/// C(i,j) = 2 (1 - delta_ij); optimal transport under this cost equals the l1 distance.
inline CostMatrix l1_equivalent_cost(std::size_t bins) {
    CostMatrix c{Matrix<double>(bins, bins, 2.0)};
    for (std::size_t i = 0; i < bins; ++i) c.entries(i, i) = 0.0;
    return c;
}

}  // namespace otseg
