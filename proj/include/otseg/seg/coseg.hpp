#pragma once

// Unsupervised co-segmentation: a pairwise dissimilarity between the segmented
// histograms of two images, its all-pairs extension, and the l1 barycentric
// model with a jointly estimated barycenter.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/features/assignment.hpp"
#include "otseg/seg/model.hpp"
#include "otseg/seg/segment.hpp"

namespace otseg {

enum class CosegVariant { pairwise, pairwise_multi, barycentric_l1 };

inline CosegVariant parse_coseg_variant(std::string_view s) {
    if (s == "pairwise") return CosegVariant::pairwise;
    if (s == "pairwise_multi") return CosegVariant::pairwise_multi;
    if (s == "barycentric_l1") return CosegVariant::barycentric_l1;
    throw InvalidArgument("unknown co-segmentation variant '" + std::string(s) + "'");
}

inline const char* to_string(CosegVariant v) {
    switch (v) {
        case CosegVariant::pairwise: return "pairwise";
        case CosegVariant::pairwise_multi: return "pairwise_multi";
        case CosegVariant::barycentric_l1: return "barycentric_l1";
    }
    return "?";
}

inline constexpr std::size_t kMaxPairwiseImages = 6;

struct CosegImage {
    const AssignmentOperator* op = nullptr;
    std::size_t width = 0, height = 0;
};

struct CosegConfig {
    CosegVariant variant = CosegVariant::pairwise;
    Variant distance = Variant::l1;  ///< dissimilarity of the pairwise variants
    double rho = 1.0;
    double delta = 1.0;  ///< ballooning weight
    std::vector<double> rho_per_image, delta_per_image;  ///< optional overrides
    double lambda = 100.0;
    CostMatrix cost;  ///< bins x bins, transport distances only
    double threshold = 0.5;
    double precond_r = 1.0, precond_delta = 1.0, precond_gamma = 1.0;
    double tol = 1e-6;
    std::size_t max_iter = 5000;
    bool trace_energy = false;
    std::function<bool(std::size_t, double)> progress;
    std::vector<std::vector<double>> frozen;  ///< per image; a non-empty map holds u fixed
};

struct CosegResult {
    std::vector<std::vector<double>> u;
    std::vector<std::vector<std::uint8_t>> masks;
    std::vector<double> barycenter;  ///< barycentric variant only
    double energy = 0.0;
    SolveReport report;
    std::vector<std::string> warnings;
};

namespace detail {

inline HistogramSaddleModel coseg_model(const std::vector<CosegImage>& images, const CosegConfig& cfg,
                                        std::vector<std::string>* warnings = nullptr) {
    const std::size_t P = images.size();
    if (P < 2) throw InvalidArgument("co-segmentation needs at least two images");
    if (cfg.variant == CosegVariant::pairwise && P != 2) throw InvalidArgument("pairwise co-segmentation takes two images");
    if (cfg.variant == CosegVariant::pairwise_multi && P > kMaxPairwiseImages)
        throw InvalidArgument("pairwise_multi is limited to 6 images; use barycentric_l1");
    if (cfg.variant == CosegVariant::barycentric_l1 && cfg.distance != Variant::l1)
        throw InvalidArgument("the barycentric model supports only the l1 dissimilarity");
    if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) throw InvalidArgument("threshold must lie in (0,1)");
    if (!cfg.rho_per_image.empty() && cfg.rho_per_image.size() != P) throw InvalidArgument("rho overrides: one per image");
    if (!cfg.delta_per_image.empty() && cfg.delta_per_image.size() != P)
        throw InvalidArgument("delta overrides: one per image");
    if (!cfg.frozen.empty() && cfg.frozen.size() != P) throw InvalidArgument("frozen maps: one entry per image");

    const std::size_t bins = images[0].op ? images[0].op->bins : 0;
    std::vector<PixelBlock> blocks;
    std::size_t n_min = SIZE_MAX, n_max = 0;
    for (std::size_t k = 0; k < P; ++k) {
        const auto& im = images[k];
        if (!im.op || im.op->pixels() != im.width * im.height) throw InvalidArgument("image and assignment disagree");
        if (im.op->bins != bins) throw InvalidArgument("co-segmented images must share one codebook");
        const double rho = cfg.rho_per_image.empty() ? cfg.rho : cfg.rho_per_image[k];
        const double delta = cfg.delta_per_image.empty() ? cfg.delta : cfg.delta_per_image[k];
        if (!(delta >= 0.0)) throw InvalidArgument("delta must be nonnegative");
        PixelBlock b{im.width, im.height, rho, delta, {}};
        if (!cfg.frozen.empty()) b.frozen = cfg.frozen[k];
        blocks.push_back(std::move(b));
        n_min = std::min(n_min, im.op->pixels());
        n_max = std::max(n_max, im.op->pixels());
    }

    auto term = [&](Side l, Side r) {
        DataTerm t;
        t.left = std::move(l);
        t.right = std::move(r);
        t.variant = cfg.distance;
        t.lambda = cfg.lambda;
        t.mass_bound = double(n_min);
        if (cfg.distance != Variant::l1) t.cost = cfg.cost;
        return t;
    };
    std::vector<DataTerm> terms;
    if (cfg.variant == CosegVariant::barycentric_l1) {
        for (std::size_t k = 0; k < P; ++k) terms.push_back(term(Side::histogram(k, *images[k].op), Side::barycenter(0)));
        return HistogramSaddleModel(std::move(blocks), std::move(terms), 1, bins);
    }
    if (cfg.distance != Variant::l1 && warnings && n_max > 4 * n_min)
        warnings->push_back("transport dissimilarities force equal segmented areas; image sizes differ by more than 4x");
    for (std::size_t k = 0; k + 1 < P; ++k)
        for (std::size_t l = k + 1; l < P; ++l)
            terms.push_back(term(Side::histogram(k, *images[k].op), Side::histogram(l, *images[l].op)));
    return HistogramSaddleModel(std::move(blocks), std::move(terms));
}

}  // namespace detail

inline CosegResult coseg_multi(const std::vector<CosegImage>& images, const CosegConfig& cfg) {
    CosegResult res;
    const auto model = detail::coseg_model(images, cfg, &res.warnings);
    SolveOptions opt;
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    opt.progress = cfg.progress;
    if (cfg.trace_energy) opt.energy = [&model](std::span<const double> x) { return model.energy(x); };
    auto state = model.initial_state();
    res.report = solve(model, build_preconditioner(model, cfg.precond_r, cfg.precond_delta, cfg.precond_gamma), state,
                       opt);
    for (std::size_t k = 0; k < images.size(); ++k) {
        res.u.push_back(model.real_map(state.primal, k));
        res.masks.push_back(threshold_labels({res.u.back()}, cfg.threshold));
    }
    if (cfg.variant == CosegVariant::barycentric_l1) res.barycenter = model.barycenter(state.primal, 0);
    res.energy = model.energy(state.primal);
    return res;
}

inline CosegResult coseg_pair(const CosegImage& first, const CosegImage& second, CosegConfig cfg) {
    cfg.variant = CosegVariant::pairwise;
    return coseg_multi({first, second}, cfg);
}

/// Co-segmentation energy of given maps (barycenter ignored unless the variant uses one).
inline double coseg_energy(const std::vector<CosegImage>& images, const CosegConfig& cfg,
                           const std::vector<std::vector<double>>& u, const std::vector<double>& barycenter = {}) {
    const auto model = detail::coseg_model(images, cfg);
    if (u.size() != images.size()) throw InvalidArgument("energy: one map per image");
    std::vector<double> x(model.primal_dim(), 0.0);
    std::size_t off = 0;
    for (std::size_t k = 0; k < images.size(); ++k) {
        const auto& blk = model.blocks()[k];
        if (u[k].size() != blk.real_size()) throw InvalidArgument("energy: map size mismatch");
        for (std::size_t p = 0; p < u[k].size(); ++p) x[off + blk.padded_index(p)] = u[k][p];
        off += blk.padded_size();
    }
    if (cfg.variant == CosegVariant::barycentric_l1) {
        if (barycenter.size() != images[0].op->bins) throw InvalidArgument("energy: barycenter size mismatch");
        std::copy(barycenter.begin(), barycenter.end(), x.begin() + std::ptrdiff_t(off));
    }
    return model.energy(x);
}

}  // namespace otseg
