#pragma once

// Saddle-point model shared by segmentation and co-segmentation. Primal blocks
// are relaxed indicator maps on 1-pixel padded grids, optional barycenter
// histograms and per-term transport plans; every histogram dissimilarity term
// S(left, right) is dualized according to its variant.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/features/assignment.hpp"
#include "otseg/ot/entropic_prox.hpp"
#include "otseg/ot/exact_transport.hpp"
#include "otseg/ot/sinkhorn.hpp"
#include "otseg/ot/sinkhorn_conjugate.hpp"
#include "otseg/pd/finite_differences.hpp"
#include "otseg/pd/projections.hpp"
#include "otseg/pd/solver.hpp"

namespace otseg {

enum class Variant { l1, mk_exact, sinkhorn_grad, sinkhorn_prox };

inline Variant parse_variant(std::string_view s) {
    if (s == "l1") return Variant::l1;
    if (s == "mk_exact") return Variant::mk_exact;
    if (s == "sinkhorn_grad") return Variant::sinkhorn_grad;
    if (s == "sinkhorn_prox") return Variant::sinkhorn_prox;
    throw InvalidArgument("unknown variant '" + std::string(s) + "'");
}

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::l1: return "l1";
        case Variant::mk_exact: return "mk_exact";
        case Variant::sinkhorn_grad: return "sinkhorn_grad";
        case Variant::sinkhorn_prox: return "sinkhorn_prox";
    }
    return "?";
}

inline constexpr std::size_t kMaxTransportBins = 1024;

/// A relaxed indicator map u in [0,1] on a width x height grid, stored padded by one pixel.
struct PixelBlock {
    std::size_t width = 0, height = 0;
    double rho = 1.0;      ///< TV weight
    double balloon = 0.0;  ///< adds -balloon * sum(u) to the energy
    std::vector<double> frozen;  ///< when set (real size), u is held at these values

    std::size_t padded_width() const { return width + 2; }
    std::size_t padded_height() const { return height + 2; }
    std::size_t padded_size() const { return padded_width() * padded_height(); }
    std::size_t real_size() const { return width * height; }
    std::size_t padded_index(std::size_t real) const {
        return (real / width + 1) * padded_width() + real % width + 1;
    }
};

/// One side of a dissimilarity term.
struct Side {
    enum class Kind { histogram, prior, barycenter };
    Kind kind = Kind::histogram;
    std::size_t index = 0;        ///< pixel block, or barycenter for Kind::barycenter
    bool complement = false;      ///< use 1 - u on the real domain instead of u
    const AssignmentOperator* op = nullptr;  ///< Kind::histogram
    std::vector<double> prior;    ///< Kind::prior: histogram scaled by the region mass

    static Side histogram(std::size_t block, const AssignmentOperator& op, bool complement = false) {
        return {Kind::histogram, block, complement, &op, {}};
    }
    static Side scaled_prior(std::size_t block, std::vector<double> a, bool complement = false) {
        return {Kind::prior, block, complement, nullptr, std::move(a)};
    }
    static Side barycenter(std::size_t k) { return {Kind::barycenter, k, false, nullptr, {}}; }
};

struct DataTerm {
    Side left, right;
    Variant variant = Variant::sinkhorn_grad;
    CostMatrix cost;          ///< rows: left bins, columns: right bins (transport variants)
    double lambda = 100.0;    ///< entropic parameter (sinkhorn variants)
    double mass_bound = 0.0;  ///< N of the normalized entropy; 0 selects the left block's pixel count
    double l1_radius = 1.0;   ///< weight of the l1 variant
};

class HistogramSaddleModel {
public:
    HistogramSaddleModel(std::vector<PixelBlock> blocks, std::vector<DataTerm> terms, std::size_t barycenters = 0,
                         std::size_t barycenter_bins = 0, bool simplex_coupling = false)
        : blocks_(std::move(blocks)), terms_(std::move(terms)), n_bary_(barycenters), bary_bins_(barycenter_bins),
          simplex_(simplex_coupling) {
        if (blocks_.empty()) throw InvalidArgument("model needs at least one pixel block");
        for (const auto& b : blocks_) {
            if (b.width == 0 || b.height == 0) throw InvalidArgument("pixel block is empty");
            if (!(b.rho >= 0.0)) throw InvalidArgument("rho must be nonnegative");
            if (!b.frozen.empty() && b.frozen.size() != b.real_size()) throw InvalidArgument("frozen map size mismatch");
        }
        if (simplex_)
            for (const auto& b : blocks_)
                if (b.width != blocks_[0].width || b.height != blocks_[0].height)
                    throw InvalidArgument("simplex-coupled blocks must share the grid");

        std::size_t off = 0;
        for (const auto& b : blocks_) {
            block_off_.push_back(off);
            off += b.padded_size();
        }
        for (std::size_t k = 0; k < n_bary_; ++k) {
            bary_off_.push_back(off);
            off += bary_bins_;
        }
        std::size_t doff = 0;
        for (const auto& b : blocks_) {
            tv_off_.push_back(doff);
            doff += 2 * b.padded_size();
        }
        for (auto& t : terms_) {
            validate_side(t.left);
            validate_side(t.right);
            const std::size_t ml = side_bins(t.left), mr = side_bins(t.right);
            Layout lay;
            if (t.variant == Variant::l1) {
                if (ml != mr) throw InvalidArgument("l1 requires both histograms on the same codebook");
                if (!(t.l1_radius > 0.0)) throw InvalidArgument("l1 weight must be positive");
                lay.dual = doff;
                doff += ml;
            } else {
                if (t.cost.rows() != ml || t.cost.cols() != mr)
                    throw InvalidArgument("cost matrix shape does not match the histogram bins");
                if (t.variant != Variant::sinkhorn_grad && (ml > kMaxTransportBins || mr > kMaxTransportBins))
                    throw InvalidArgument("dense transport variables are limited to 1024 bins; use sinkhorn_grad");
                if (t.variant != Variant::mk_exact && !(t.lambda > 0.0 && std::isfinite(t.lambda)))
                    throw InvalidArgument("lambda must be positive and finite");
                if (t.mass_bound <= 0.0) t.mass_bound = double(blocks_.at(t.left.index).real_size());
                lay.dual = doff;
                doff += ml + mr;
                if (t.variant == Variant::mk_exact || t.variant == Variant::sinkhorn_prox) {
                    lay.plan = off;
                    off += ml * mr;
                }
            }
            lay.ml = ml;
            lay.mr = mr;
            layout_.push_back(lay);
        }
        n_primal_ = off;
        n_dual_ = doff;
    }

    // ---- SaddleProblem interface ----

    std::size_t primal_dim() const { return n_primal_; }
    std::size_t dual_dim() const { return n_dual_; }

    void apply_K(std::span<const double> x, std::span<double> y) const {
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            grad(block(x, b), blocks_[b].padded_width(), blocks_[b].padded_height(),
                 y.subspan(tv_off_[b], 2 * blocks_[b].padded_size()));
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto& term = terms_[t];
            const auto& lay = layout_[t];
            if (term.variant == Variant::l1) {
                auto h = y.subspan(lay.dual, lay.ml);
                std::fill(h.begin(), h.end(), 0.0);
                side_apply(term.left, x, h, 1.0);
                side_apply(term.right, x, h, -1.0);
                continue;
            }
            auto p = y.subspan(lay.dual, lay.ml), q = y.subspan(lay.dual + lay.ml, lay.mr);
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(q.begin(), q.end(), 0.0);
            side_apply(term.left, x, p, 1.0);
            side_apply(term.right, x, q, 1.0);
            if (lay.plan) {
                const double* r = x.data() + *lay.plan;
                for (std::size_t i = 0; i < lay.ml; ++i)
                    for (std::size_t j = 0; j < lay.mr; ++j) {
                        const double v = r[i * lay.mr + j];
                        p[i] -= v;
                        q[j] -= v;
                    }
            }
        }
    }

    void apply_Kt(std::span<const double> y, std::span<double> x) const {
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            grad_adjoint(y.subspan(tv_off_[b], 2 * blocks_[b].padded_size()), blocks_[b].padded_width(),
                         blocks_[b].padded_height(), x.subspan(block_off_[b], blocks_[b].padded_size()));
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto& term = terms_[t];
            const auto& lay = layout_[t];
            if (term.variant == Variant::l1) {
                const auto h = y.subspan(lay.dual, lay.ml);
                side_apply_t(term.left, h, x, 1.0);
                side_apply_t(term.right, h, x, -1.0);
                continue;
            }
            const auto p = y.subspan(lay.dual, lay.ml), q = y.subspan(lay.dual + lay.ml, lay.mr);
            side_apply_t(term.left, p, x, 1.0);
            side_apply_t(term.right, q, x, 1.0);
            if (lay.plan) {
                double* r = x.data() + *lay.plan;
                for (std::size_t i = 0; i < lay.ml; ++i)
                    for (std::size_t j = 0; j < lay.mr; ++j) r[i * lay.mr + j] = -(p[i] + q[j]);
            }
        }
    }

    void prox_R(std::span<double> x, std::span<const double> tau) const {
        if (simplex_) {
            const auto& b0 = blocks_[0];
            std::vector<double> v(blocks_.size());
            for (std::size_t pix = 0; pix < b0.padded_size(); ++pix) {
                if (!is_real(b0, pix)) {
                    for (std::size_t k = 0; k < blocks_.size(); ++k) x[block_off_[k] + pix] = 0.0;
                    continue;
                }
                for (std::size_t k = 0; k < blocks_.size(); ++k) v[k] = x[block_off_[k] + pix];
                project_simplex(v);
                for (std::size_t k = 0; k < blocks_.size(); ++k) x[block_off_[k] + pix] = v[k];
            }
        } else {
            for (std::size_t b = 0; b < blocks_.size(); ++b) {
                auto u = x.subspan(block_off_[b], blocks_[b].padded_size());
                for (std::size_t pix = 0; pix < u.size(); ++pix)
                    u[pix] = is_real(blocks_[b], pix) ? std::clamp(u[pix], 0.0, 1.0) : 0.0;
            }
        }
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            const auto& blk = blocks_[b];
            if (blk.frozen.empty()) continue;
            auto u = x.subspan(block_off_[b], blk.padded_size());
            for (std::size_t p = 0; p < blk.real_size(); ++p) u[blk.padded_index(p)] = blk.frozen[p];
        }
        for (std::size_t k = 0; k < n_bary_; ++k) project_nonneg(x.subspan(bary_off_[k], bary_bins_));
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto& lay = layout_[t];
            if (!lay.plan) continue;
            auto r = x.subspan(*lay.plan, lay.ml * lay.mr);
            if (terms_[t].variant == Variant::mk_exact) {
                project_nonneg(r);
            } else {
                const auto& term = terms_[t];
                const auto c = term.cost.entries.flat();
                for (std::size_t k = 0; k < r.size(); ++k)
                    r[k] = prox_g_lambda(r[k], tau[*lay.plan + k], term.lambda, term.mass_bound, c[k]);
            }
        }
    }

    void grad_T(std::span<const double>, std::span<double> g) const {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            const auto& blk = blocks_[b];
            if (blk.balloon == 0.0) continue;
            for (std::size_t p = 0; p < blk.real_size(); ++p) g[block_off_[b] + blk.padded_index(p)] = -blk.balloon;
        }
        for (std::size_t t = 0; t < terms_.size(); ++t)
            if (terms_[t].variant == Variant::mk_exact) {
                const auto c = terms_[t].cost.entries.flat();
                std::copy(c.begin(), c.end(), g.begin() + std::ptrdiff_t(*layout_[t].plan));
            }
    }

    void prox_Fstar(std::span<double> y, std::span<const double>) const {
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            project_linf2_ball(y.subspan(tv_off_[b], 2 * blocks_[b].padded_size()), blocks_[b].rho);
        for (std::size_t t = 0; t < terms_.size(); ++t)
            if (terms_[t].variant == Variant::l1)
                project_linf_ball(y.subspan(layout_[t].dual, layout_[t].ml), terms_[t].l1_radius);
    }

    void grad_Gstar(std::span<const double> y, std::span<double> g) const {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto& term = terms_[t];
            const auto& lay = layout_[t];
            // Affine parts of the sides (complements) enter G* linearly.
            if (term.variant == Variant::l1) {
                auto gh = g.subspan(lay.dual, lay.ml);
                side_const(term.left, gh, -1.0);
                side_const(term.right, gh, 1.0);
                continue;
            }
            auto gp = g.subspan(lay.dual, lay.ml), gq = g.subspan(lay.dual + lay.ml, lay.mr);
            side_const(term.left, gp, -1.0);
            side_const(term.right, gq, -1.0);
            if (term.variant == Variant::sinkhorn_grad) {
                DualPotentials beta{std::vector<double>(y.begin() + std::ptrdiff_t(lay.dual),
                                                        y.begin() + std::ptrdiff_t(lay.dual + lay.ml)),
                                    std::vector<double>(y.begin() + std::ptrdiff_t(lay.dual + lay.ml),
                                                        y.begin() + std::ptrdiff_t(lay.dual + lay.ml + lay.mr))};
                const auto cg = mk_conj_grad(beta, term.cost, term.lambda, term.mass_bound);
                for (std::size_t i = 0; i < lay.ml; ++i) gp[i] += cg.beta_src[i];
                for (std::size_t j = 0; j < lay.mr; ++j) gq[j] += cg.beta_dst[j];
            }
        }
    }

    double lipschitz_T() const { return 0.0; }

    std::vector<double> lipschitz_Gstar() const {
        std::vector<double> l(n_dual_, 0.0);
        for (std::size_t t = 0; t < terms_.size(); ++t)
            if (terms_[t].variant == Variant::sinkhorn_grad) {
                const double v = 2.0 * mk_conj_lipschitz(terms_[t].lambda, terms_[t].mass_bound);
                std::fill_n(l.begin() + std::ptrdiff_t(layout_[t].dual), layout_[t].ml + layout_[t].mr, v);
            }
        return l;
    }

    std::vector<double> abs_row_sums() const {
        std::vector<double> rows(n_dual_, 0.0);
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            // Both components of a pixel share the larger of their two row sums so the
            // pixelwise ball projection stays exact under diagonal steps.
            const auto& blk = blocks_[b];
            const std::size_t n = blk.padded_size(), w = blk.padded_width();
            for (std::size_t pix = 0; pix < n; ++pix) {
                const double s1 = pix >= w ? 2.0 : 1.0;
                const double s2 = pix % w ? 2.0 : 1.0;
                rows[tv_off_[b] + pix] = rows[tv_off_[b] + n + pix] = std::max(s1, s2);
            }
        }
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto& term = terms_[t];
            const auto& lay = layout_[t];
            if (term.variant == Variant::l1) {
                dual_row_sums({{&term.left, 1.0}, {&term.right, -1.0}}, std::span(rows).subspan(lay.dual, lay.ml));
                continue;
            }
            auto p = std::span(rows).subspan(lay.dual, lay.ml), q = std::span(rows).subspan(lay.dual + lay.ml, lay.mr);
            dual_row_sums({{&term.left, 1.0}}, p);
            dual_row_sums({{&term.right, 1.0}}, q);
            if (lay.plan) {
                for (double& v : p) v += double(lay.mr);
                for (double& v : q) v += double(lay.ml);
            }
        }
        return rows;
    }

    std::vector<double> abs_col_sums() const {
        std::vector<double> cols(n_primal_, 0.0);
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            const auto& blk = blocks_[b];
            const std::size_t w = blk.padded_width(), h = blk.padded_height();
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < w; ++j)
                    cols[block_off_[b] + i * w + j] = 2.0 + (i + 1 < h ? 1.0 : 0.0) + (j + 1 < w ? 1.0 : 0.0);
        }
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto& term = terms_[t];
            const auto& lay = layout_[t];
            if (term.variant == Variant::l1) {
                primal_col_sums({{&term.left, 1.0}, {&term.right, -1.0}}, cols);
                continue;
            }
            primal_col_sums({{&term.left, 1.0}}, cols);
            primal_col_sums({{&term.right, 1.0}}, cols);
            if (lay.plan) std::fill_n(cols.begin() + std::ptrdiff_t(*lay.plan), lay.ml * lay.mr, 2.0);
        }
        return cols;
    }

    double step_floor_scale() const {
        double n = 0.0;
        for (const auto& b : blocks_) n = std::max(n, double(b.real_size()));
        return n;
    }

    // ---- model helpers ----

    const std::vector<PixelBlock>& blocks() const { return blocks_; }
    const std::vector<DataTerm>& terms() const { return terms_; }

    /// Initial point: u = 0.5 (or 1/K under simplex coupling) on the real domain, everything else 0.
    SolveState initial_state() const {
        SolveState s{std::vector<double>(n_primal_, 0.0), std::vector<double>(n_dual_, 0.0)};
        const double u0 = simplex_ ? 1.0 / double(blocks_.size()) : 0.5;
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            const auto& blk = blocks_[b];
            for (std::size_t p = 0; p < blk.real_size(); ++p)
                s.primal[block_off_[b] + blk.padded_index(p)] = blk.frozen.empty() ? u0 : blk.frozen[p];
        }
        return s;
    }

    std::vector<double> real_map(std::span<const double> x, std::size_t b) const {
        const auto& blk = blocks_[b];
        std::vector<double> u(blk.real_size());
        for (std::size_t p = 0; p < u.size(); ++p) u[p] = x[block_off_[b] + blk.padded_index(p)];
        return u;
    }

    std::span<const double> padded_map(std::span<const double> x, std::size_t b) const {
        return x.subspan(block_off_[b], blocks_[b].padded_size());
    }

    std::vector<double> barycenter(std::span<const double> x, std::size_t k) const {
        return {x.begin() + std::ptrdiff_t(bary_off_.at(k)), x.begin() + std::ptrdiff_t(bary_off_[k] + bary_bins_)};
    }

    /// Evaluated value of one side (linear part plus affine constant).
    std::vector<double> side_value(const Side& s, std::span<const double> x) const {
        std::vector<double> out(side_bins(s), 0.0);
        side_apply(s, x, out, 1.0);
        side_const(s, out, 1.0);
        return out;
    }

    /// Primal energy: weighted TV, ballooning and the dissimilarity terms.
    double energy(std::span<const double> x) const {
        double e = 0.0;
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            const auto& blk = blocks_[b];
            const auto u = padded_map(x, b);
            e += blk.rho * total_variation(u, blk.padded_width(), blk.padded_height());
            if (blk.balloon != 0.0) {
                double s = 0.0;
                for (double v : u) s += v;
                e -= blk.balloon * s;
            }
        }
        for (const auto& t : terms_) e += term_value(t, side_value(t.left, x), side_value(t.right, x));
        return e;
    }

    /// Dissimilarity S(left, right) of one term for given histograms. Transport terms
    /// compare the common mass: the heavier histogram is rescaled to the lighter one.
    static double term_value(const DataTerm& t, std::vector<double> l, std::vector<double> r) {
        if (t.variant == Variant::l1) {
            double s = 0.0;
            for (std::size_t i = 0; i < l.size(); ++i) s += std::abs(l[i] - r[i]);
            return t.l1_radius * s;
        }
        for (double& v : l) v = std::max(v, 0.0);
        for (double& v : r) v = std::max(v, 0.0);
        double ml = 0.0, mr = 0.0;
        for (double v : l) ml += v;
        for (double v : r) mr += v;
        const double m = std::min(ml, mr);
        if (!(m > 1e-12 * std::max(1.0, std::max(ml, mr)))) return 0.0;
        for (double& v : l) v *= m / ml;
        for (double& v : r) v *= m / mr;
        Histogram hl(std::move(l)), hr(std::move(r));
        if (t.variant == Variant::mk_exact) return mk_exact(hl, hr, t.cost).cost;
        SinkhornOptions opt;
        opt.require_convergence = false;
        const auto res = sinkhorn(hl, hr, t.cost, t.lambda, opt);
        return sinkhorn_normalized_value(res, t.lambda, t.mass_bound);
    }

private:
    struct Layout {
        std::size_t dual = 0;
        std::optional<std::size_t> plan;
        std::size_t ml = 0, mr = 0;
    };
    struct Weighted {
        const Side* side;
        double coef;
    };

    static bool is_real(const PixelBlock& b, std::size_t pix) {
        const std::size_t w = b.padded_width(), i = pix / w, j = pix % w;
        return i >= 1 && i <= b.height && j >= 1 && j <= b.width;
    }

    std::span<const double> block(std::span<const double> x, std::size_t b) const {
        return x.subspan(block_off_[b], blocks_[b].padded_size());
    }

    void validate_side(const Side& s) const {
        switch (s.kind) {
            case Side::Kind::histogram:
                if (s.index >= blocks_.size() || !s.op) throw InvalidArgument("histogram side without block/operator");
                if (s.op->pixels() != blocks_[s.index].real_size())
                    throw InvalidArgument("assignment operator does not match the block size");
                break;
            case Side::Kind::prior:
                if (s.index >= blocks_.size() || s.prior.empty()) throw InvalidArgument("prior side is malformed");
                break;
            case Side::Kind::barycenter:
                if (s.index >= n_bary_) throw InvalidArgument("barycenter side out of range");
                break;
        }
    }

    std::size_t side_bins(const Side& s) const {
        switch (s.kind) {
            case Side::Kind::histogram: return s.op->bins;
            case Side::Kind::prior: return s.prior.size();
            case Side::Kind::barycenter: return bary_bins_;
        }
        return 0;
    }

    double side_sign(const Side& s) const { return s.complement ? -1.0 : 1.0; }

    // out += coef * (linear part of s)(x)
    void side_apply(const Side& s, std::span<const double> x, std::span<double> out, double coef) const {
        if (s.kind == Side::Kind::barycenter) {
            for (std::size_t i = 0; i < bary_bins_; ++i) out[i] += coef * x[bary_off_[s.index] + i];
            return;
        }
        const auto& blk = blocks_[s.index];
        const double* u = x.data() + block_off_[s.index];
        const double c = coef * side_sign(s);
        if (s.kind == Side::Kind::histogram) {
            const auto& bins = s.op->bin_of_pixel;
            for (std::size_t p = 0; p < bins.size(); ++p) out[bins[p]] += c * u[blk.padded_index(p)];
        } else {
            double mass = 0.0;
            for (std::size_t p = 0; p < blk.real_size(); ++p) mass += u[blk.padded_index(p)];
            for (std::size_t i = 0; i < s.prior.size(); ++i) out[i] += c * s.prior[i] * mass;
        }
    }

    // x += coef * (linear part of s)^T y
    void side_apply_t(const Side& s, std::span<const double> y, std::span<double> x, double coef) const {
        if (s.kind == Side::Kind::barycenter) {
            for (std::size_t i = 0; i < bary_bins_; ++i) x[bary_off_[s.index] + i] += coef * y[i];
            return;
        }
        const auto& blk = blocks_[s.index];
        double* u = x.data() + block_off_[s.index];
        const double c = coef * side_sign(s);
        if (s.kind == Side::Kind::histogram) {
            const auto& bins = s.op->bin_of_pixel;
            for (std::size_t p = 0; p < bins.size(); ++p) u[blk.padded_index(p)] += c * y[bins[p]];
        } else {
            double dot = 0.0;
            for (std::size_t i = 0; i < s.prior.size(); ++i) dot += s.prior[i] * y[i];
            for (std::size_t p = 0; p < blk.real_size(); ++p) u[blk.padded_index(p)] += c * dot;
        }
    }

    // out += coef * (affine constant of s): H 1 or N a for complements
    void side_const(const Side& s, std::span<double> out, double coef) const {
        if (!s.complement) return;
        if (s.kind == Side::Kind::histogram) {
            for (auto b : s.op->bin_of_pixel) out[b] += coef;
        } else if (s.kind == Side::Kind::prior) {
            const double n = double(blocks_[s.index].real_size());
            for (std::size_t i = 0; i < s.prior.size(); ++i) out[i] += coef * n * s.prior[i];
        }
    }

    // Per pixel block, the combined coefficient of a dual row i on pixel x is
    // alpha [bin(x) = i] + beta a_i, with alpha from histogram sides and beta from prior sides.
    struct BlockCoef {
        const AssignmentOperator* op = nullptr;
        double alpha = 0.0;
        const std::vector<double>* prior = nullptr;
        double beta = 0.0;
    };

    std::vector<std::optional<BlockCoef>> gather(std::initializer_list<Weighted> sides,
                                                 std::vector<double>* bary_coef) const {
        std::vector<std::optional<BlockCoef>> per(blocks_.size());
        for (const auto& w : sides) {
            const Side& s = *w.side;
            if (s.kind == Side::Kind::barycenter) {
                if (bary_coef) bary_coef->push_back(w.coef);
                continue;
            }
            auto& bc = per[s.index];
            if (!bc) bc = BlockCoef{};
            if (s.kind == Side::Kind::histogram) {
                if (bc->op && bc->op != s.op) throw InvalidArgument("two histogram operators on one block in a term");
                bc->op = s.op;
                bc->alpha += w.coef * side_sign(s);
            } else {
                if (bc->prior && *bc->prior != s.prior) throw InvalidArgument("two priors on one block in a term");
                bc->prior = &s.prior;
                bc->beta += w.coef * side_sign(s);
            }
        }
        return per;
    }

    void dual_row_sums(std::initializer_list<Weighted> sides, std::span<double> rows) const {
        std::vector<double> bary;
        const auto per = gather(sides, &bary);
        for (double c : bary)
            for (double& v : rows) v += std::abs(c);
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            if (!per[b]) continue;
            const auto& bc = *per[b];
            const double n = double(blocks_[b].real_size());
            std::vector<double> count(rows.size(), 0.0);
            if (bc.op)
                for (auto bin : bc.op->bin_of_pixel) count[bin] += 1.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const double a = bc.prior ? (*bc.prior)[i] : 0.0;
                if (bc.op)
                    rows[i] += count[i] * std::abs(bc.alpha + bc.beta * a) + (n - count[i]) * std::abs(bc.beta * a);
                else
                    rows[i] += n * std::abs(bc.beta * a);
            }
        }
    }

    void primal_col_sums(std::initializer_list<Weighted> sides, std::vector<double>& cols) const {
        std::vector<double> bary;
        const auto per = gather(sides, &bary);
        for (const auto& w : sides)
            if (w.side->kind == Side::Kind::barycenter)
                for (std::size_t i = 0; i < bary_bins_; ++i) cols[bary_off_[w.side->index] + i] += std::abs(w.coef);
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            if (!per[b]) continue;
            const auto& bc = *per[b];
            const auto& blk = blocks_[b];
            double asum = 0.0;
            if (bc.prior)
                for (double a : *bc.prior) asum += a;
            for (std::size_t p = 0; p < blk.real_size(); ++p) {
                double s;
                if (bc.op) {
                    const double ab = bc.prior ? (*bc.prior)[bc.op->bin_of_pixel[p]] : 0.0;
                    s = std::abs(bc.alpha + bc.beta * ab) + std::abs(bc.beta) * (asum - ab);
                } else {
                    s = std::abs(bc.beta) * asum;
                }
                cols[block_off_[b] + blk.padded_index(p)] += s;
            }
        }
    }

    std::vector<PixelBlock> blocks_;
    std::vector<DataTerm> terms_;
    std::size_t n_bary_ = 0, bary_bins_ = 0;
    bool simplex_ = false;
    std::vector<std::size_t> block_off_, bary_off_, tv_off_;
    std::vector<Layout> layout_;
    std::size_t n_primal_ = 0, n_dual_ = 0;
};

}  // namespace otseg
