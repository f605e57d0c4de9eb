#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/features/assignment.hpp"
#include "otseg/seg/model.hpp"

namespace otseg {

struct SegConfig {
    Variant variant = Variant::sinkhorn_grad;
    double rho = 1.0;
    double lambda = 100.0;
    double threshold = 0.5;
    double precond_r = 1.0, precond_delta = 1.0, precond_gamma = 1.0;
    double tol = 1e-6;
    std::size_t max_iter = 5000;
    bool trace_energy = false;
    std::function<bool(std::size_t, double)> progress;

    void validate() const {
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be finite and nonnegative");
        if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("threshold must lie in (0,1)");
        if (variant != Variant::l1 && variant != Variant::mk_exact && !(lambda > 0.0 && std::isfinite(lambda)))
            throw InvalidArgument("lambda must be positive and finite");
        if (!(tol >= 0.0)) throw InvalidArgument("tolerance must be nonnegative");
        if (max_iter == 0) throw InvalidArgument("max_iter must be positive");
    }
};

struct SegResult {
    std::size_t width = 0, height = 0;
    std::vector<std::vector<double>> u;  ///< one map for two-phase, K maps for multi-phase
    std::vector<std::uint8_t> labels;
    double energy = 0.0;
    double ambiguous_fraction = 0.0;  ///< pixels whose probabilities are not within 0.05 of 0 or 1
    SolveReport report;
};

/// Image side of a segmentation problem: hard assignment to bins plus the ground
/// cost from image bins (rows) to prior bins (columns).
struct SegInput {
    const AssignmentOperator& op;
    std::size_t width, height;
    const CostMatrix& cost;
    bool shared_codebook = true;  ///< priors live on the image's own codebook
};

/// One map: label 1 where u > t, else 0. Several maps: argmax with ties to the lowest index.
inline std::vector<std::uint8_t> threshold_labels(const std::vector<std::vector<double>>& maps, double t = 0.5) {
    if (maps.empty()) throw InvalidArgument("threshold_labels: no maps");
    const std::size_t n = maps.front().size();
    for (const auto& m : maps)
        if (m.size() != n) throw InvalidArgument("threshold_labels: maps differ in size");
    if (maps.size() > 255) throw InvalidArgument("threshold_labels: too many phases");
    std::vector<std::uint8_t> out(n, 0);
    if (maps.size() == 1) {
        for (std::size_t x = 0; x < n; ++x) out[x] = maps[0][x] > t ? 1 : 0;
        return out;
    }
    for (std::size_t x = 0; x < n; ++x) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < maps.size(); ++k)
            if (maps[k][x] > maps[best][x]) best = k;
        out[x] = std::uint8_t(best);
    }
    return out;
}

inline double ambiguous_fraction(const std::vector<std::vector<double>>& maps) {
    if (maps.empty() || maps.front().empty()) return 0.0;
    const std::size_t n = maps.front().size();
    std::size_t count = 0;
    for (std::size_t x = 0; x < n; ++x)
        for (const auto& m : maps)
            if (m[x] > 0.05 && m[x] < 0.95) {
                ++count;
                break;
            }
    return double(count) / double(n);
}

namespace detail {

inline void check_priors(const SegInput& in, const SegConfig& cfg, const std::vector<Histogram>& priors) {
    if (in.width * in.height != in.op.pixels()) throw InvalidArgument("image size does not match the assignment");
    if (in.cost.rows() != in.op.bins) throw InvalidArgument("cost rows must match the image codebook");
    if (cfg.variant == Variant::l1 && !in.shared_codebook)
        throw InvalidArgument("l1 requires priors on the image's own codebook");
    for (const auto& a : priors) {
        if (a.bins() != in.cost.cols()) throw InvalidArgument("prior bins do not match the cost matrix");
        if (std::abs(a.total_mass() - 1.0) > 1e-9) throw InvalidArgument("priors must be normalized");
    }
}

inline DataTerm make_term(Side left, Side right, const SegInput& in, const SegConfig& cfg) {
    DataTerm t;
    t.left = std::move(left);
    t.right = std::move(right);
    t.variant = cfg.variant;
    t.lambda = cfg.lambda;
    if (cfg.variant != Variant::l1) t.cost = in.cost;
    return t;
}

inline SegResult run_model(const HistogramSaddleModel& model, const SegInput& in, const SegConfig& cfg,
                           std::size_t maps) {
    SolveOptions opt;
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    opt.progress = cfg.progress;
    if (cfg.trace_energy) opt.energy = [&model](std::span<const double> x) { return model.energy(x); };
    auto state = model.initial_state();
    const auto pc = build_preconditioner(model, cfg.precond_r, cfg.precond_delta, cfg.precond_gamma);

    SegResult res;
    res.width = in.width;
    res.height = in.height;
    res.report = solve(model, pc, state, opt);
    for (std::size_t k = 0; k < maps; ++k) res.u.push_back(model.real_map(state.primal, k));
    res.labels = threshold_labels(res.u, cfg.threshold);
    res.energy = model.energy(state.primal);
    res.ambiguous_fraction = ambiguous_fraction(res.u);
    return res;
}

inline HistogramSaddleModel two_phase_model(const SegInput& in, const Histogram& a, const Histogram& b,
                                            const SegConfig& cfg) {
    cfg.validate();
    check_priors(in, cfg, {a, b});
    std::vector<double> av(a.mass().begin(), a.mass().end()), bv(b.mass().begin(), b.mass().end());
    std::vector<DataTerm> terms;
    terms.push_back(make_term(Side::histogram(0, in.op), Side::scaled_prior(0, std::move(av)), in, cfg));
    terms.push_back(make_term(Side::histogram(0, in.op, true), Side::scaled_prior(0, std::move(bv), true), in, cfg));
    return HistogramSaddleModel({PixelBlock{in.width, in.height, cfg.rho, 0.0, {}}}, std::move(terms));
}

}  // namespace detail

/// Foreground/background split: S(Hu, a<u,1>) + S(H(1-u), b<1-u,1>) + rho TV(u).
/// Label 1 marks the region described by `a`.
inline SegResult segment_two_phase(const SegInput& in, const Histogram& a, const Histogram& b, const SegConfig& cfg) {
    const auto model = detail::two_phase_model(in, a, b, cfg);
    return detail::run_model(model, in, cfg, 1);
}

/// K regions with u_k on the per-pixel probability simplex; labels are the argmax.
inline SegResult segment_multi_phase(const SegInput& in, const std::vector<Histogram>& priors, const SegConfig& cfg) {
    cfg.validate();
    if (priors.size() < 2) throw InvalidArgument("multi-phase segmentation needs at least two priors");
    detail::check_priors(in, cfg, priors);
    std::vector<PixelBlock> blocks;
    std::vector<DataTerm> terms;
    for (std::size_t k = 0; k < priors.size(); ++k) {
        blocks.push_back({in.width, in.height, cfg.rho, 0.0, {}});
        std::vector<double> ak(priors[k].mass().begin(), priors[k].mass().end());
        terms.push_back(detail::make_term(Side::histogram(k, in.op), Side::scaled_prior(k, std::move(ak)), in, cfg));
    }
    const HistogramSaddleModel model(std::move(blocks), std::move(terms), 0, 0, true);
    return detail::run_model(model, in, cfg, priors.size());
}

/// Energy of a given two-phase map u (real pixels, values in [0,1]).
inline double two_phase_energy(const SegInput& in, const Histogram& a, const Histogram& b, const SegConfig& cfg,
                               std::span<const double> u) {
    const auto model = detail::two_phase_model(in, a, b, cfg);
    if (u.size() != in.op.pixels()) throw InvalidArgument("energy: map size mismatch");
    for (double v : u)
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("energy: u must lie in [0,1]");
    const auto& blk = model.blocks()[0];
    std::vector<double> x(model.primal_dim(), 0.0);
    for (std::size_t p = 0; p < u.size(); ++p) x[blk.padded_index(p)] = u[p];
    return model.energy(x);
}

}  // namespace otseg
