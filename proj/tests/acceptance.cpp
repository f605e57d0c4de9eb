// One PASS/FAIL line per acceptance criterion. Optional arguments select criteria
// by name; exit status is nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coseg_oracle.hpp"
#include "fixtures.hpp"
#include "otseg/ot/cost.hpp"
#include "otseg/ot/entropic_prox.hpp"
#include "otseg/ot/exact_transport.hpp"
#include "otseg/ot/sinkhorn.hpp"
#include "otseg/ot/sinkhorn_conjugate.hpp"
#include "otseg/pd/solver.hpp"
#include "otseg/seg/coseg.hpp"
#include "otseg/seg/segment.hpp"

using namespace otseg;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::vector<long long> random_composition(std::mt19937_64& rng, std::size_t bins, long long total) {
    std::vector<long long> h(bins, 0);
    std::uniform_int_distribution<std::size_t> pick(0, bins - 1);
    for (long long k = 0; k < total; ++k) ++h[pick(rng)];
    return h;
}

Histogram random_unit_histogram(std::mt19937_64& rng, std::size_t bins) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> h(bins);
    for (auto& v : h) v = u(rng);
    return Histogram(h).normalized();
}

CostMatrix random_cost(std::mt19937_64& rng, std::size_t m, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CostMatrix c{Matrix<double>(m, n)};
    for (double& v : c.entries.flat()) v = u(rng);
    return c;
}

Outcome l1_identity() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    int bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 2 + rng() % 7;
        const long long total = 1 + static_cast<long long>(rng() % 60);
        const auto a = random_composition(rng, m, total), b = random_composition(rng, m, total);
        Matrix<long long> c(m, m, 2);
        for (std::size_t i = 0; i < m; ++i) c(i, i) = 0;
        long long l1 = 0;
        for (std::size_t i = 0; i < m; ++i) l1 += std::llabs(a[i] - b[i]);
        const long long exact = solve_transport<long long>(a, b, c).cost;
        const double viaf = mk_exact(Histogram({a.begin(), a.end()}), Histogram({b.begin(), b.end()}),
                                     l1_equivalent_cost(m)).cost;
        bad += exact != l1 || viaf != double(l1);
    }
    const double t = seconds_since(t0);
    return {bad == 0 && t < 5.0, fmt("%.0f/1000 mismatches, %.2f s (limit 5 s)", bad, t)};
}

Outcome entropic_gap() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(36);
    double worst_low = 0.0, worst_ratio = 0.0;
    SinkhornOptions opt;
    opt.max_iter = 1000000;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + rng() % 15;
        const auto a = random_unit_histogram(rng, m), b = random_unit_histogram(rng, m);
        const auto c = random_cost(rng, m, m);
        const double exact = mk_exact(a, b, c).cost;
        for (double lambda : {10.0, 100.0, 1000.0}) {
            const double gap = sinkhorn(a, b, c, lambda, opt).transport_cost - exact;
            worst_low = std::min(worst_low, gap);
            worst_ratio = std::max(worst_ratio, gap / (2.0 * std::log(double(m)) / lambda));
        }
    }
    const double t = seconds_since(t0);
    // Slightly negative gaps come from the Sinkhorn stopping tolerance.
    const bool ok = worst_low >= -1e-9 && worst_ratio <= 1.0 + 1e-9 && t < 30.0;
    return {ok, fmt("min gap %.2e, max gap/bound %.4f, %.2f s (limit 30 s)", worst_low, worst_ratio, t)};
}

Outcome conjugate() {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> g(0.0, 0.3);
    double worst = 0.0;
    int below = 0, above = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + rng() % 6, n = 2 + rng() % 6;
        const auto c = random_cost(rng, m, n);
        const double lambda = 5.0, mass = 3.0;
        DualPotentials beta{std::vector<double>(m), std::vector<double>(n)};
        const double shift = trial % 2 == 0 ? -0.6 : 0.8;
        for (auto& v : beta.beta_src) v = g(rng) + shift;
        for (auto& v : beta.beta_dst) v = g(rng);
        (detail::conjugate_exponents(beta, c, lambda, mass).log_mass() < 0.0 ? below : above)++;
        const auto grad = mk_conj_grad(beta, c, lambda, mass);
        double norm = 0.0;
        for (double v : beta.beta_src) norm += v * v;
        for (double v : beta.beta_dst) norm += v * v;
        const double h = 1e-5 * (1.0 + std::sqrt(norm));
        auto check = [&](std::vector<double>& coord, const std::vector<double>& gc) {
            for (std::size_t k = 0; k < coord.size(); ++k) {
                const double keep = coord[k];
                coord[k] = keep + h;
                const double up = mk_conj_value(beta, c, lambda, mass);
                coord[k] = keep - h;
                const double down = mk_conj_value(beta, c, lambda, mass);
                coord[k] = keep;
                const double fd = (up - down) / (2.0 * h);
                worst = std::max(worst, std::abs(fd - gc[k]) / std::max(1e-3, std::abs(gc[k])));
            }
        };
        check(beta.beta_src, grad.beta_src);
        check(beta.beta_dst, grad.beta_dst);
    }
    // Single entry: <q,1> = 1 exactly at lambda (b1 + b2 - c) = 1.
    CostMatrix c1{Matrix<double>(1, 1, 0.3)};
    const double lambda = 4.0, n = 7.0;
    double jump = 0.0;
    for (double eps : {1e-12, -1e-12}) {
        const double v = mk_conj_value(DualPotentials{{0.15 + eps}, {0.4}}, c1, lambda, n);
        jump = std::max(jump, std::abs(v - mk_conj_value(DualPotentials{{0.15}, {0.4}}, c1, lambda, n)));
    }
    const bool ok = worst <= 1e-4 && below > 0 && above > 0 && jump <= 1e-10;
    return {ok, fmt("max rel. FD error %.2e (limit 1e-4), branches %.0f/%.0f, jump at boundary %.1e", worst, below,
                    above, jump)};
}

Outcome lipschitz() {
    std::mt19937_64 rng(67);
    std::normal_distribution<double> g(0.0, 0.5);
    double worst = 0.0;
    const double lambda = 3.0, mass = 2.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t m = 2 + trial % 5, n = 2 + (trial / 5) % 5;
        const auto c = random_cost(rng, m, n);
        DualPotentials x{std::vector<double>(m), std::vector<double>(n)}, y = x;
        const double scale = trial % 3 == 0 ? 1e-3 : 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            x.beta_src[i] = g(rng);
            y.beta_src[i] = x.beta_src[i] + scale * g(rng);
        }
        for (std::size_t j = 0; j < n; ++j) {
            x.beta_dst[j] = g(rng);
            y.beta_dst[j] = x.beta_dst[j] + scale * g(rng);
        }
        const auto gx = mk_conj_grad(x, c, lambda, mass), gy = mk_conj_grad(y, c, lambda, mass);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            num += std::pow(gx.beta_src[i] - gy.beta_src[i], 2);
            den += std::pow(x.beta_src[i] - y.beta_src[i], 2);
        }
        for (std::size_t j = 0; j < n; ++j) {
            num += std::pow(gx.beta_dst[j] - gy.beta_dst[j], 2);
            den += std::pow(x.beta_dst[j] - y.beta_dst[j], 2);
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    const double bound = 2.0 * lambda * mass;
    return {worst <= bound * (1.0 + 1e-9), fmt("max quotient %.4f, bound 2 lambda N = %.4f", worst, bound)};
}

Outcome lambert_prox() {
    std::mt19937_64 rng(78);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double foc_worst = 0.0, moreau_worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const double tau = std::pow(10.0, -2.0 + 3.0 * u(rng));
        const double lambda = std::pow(10.0, 3.0 * u(rng));
        const double mass = std::pow(10.0, 4.0 * u(rng));
        const double c = u(rng);
        const double target = -300.0 + 600.0 * u(rng);
        const double r = tau * ((target + 1.0 - std::log(lambda * mass / tau)) / lambda + c);
        const double out = prox_g_lambda(r, tau, lambda, mass, c);
        if (!(out > 0.0)) return {false, fmt("nonpositive prox at exponent %.1f", target)};
        const double foc = out - r + tau * (c + (std::log(out / mass) + 1.0) / lambda);
        foc_worst = std::max(foc_worst, std::abs(foc) / (1.0 + std::abs(r)));
        const double dual = prox_g_lambda_conj(r / tau, tau, lambda, mass, c);
        moreau_worst = std::max(moreau_worst, std::abs(out + tau * dual - r) / (1.0 + std::abs(r)));
    }
    return {foc_worst <= 1e-8 && moreau_worst <= 1e-8,
            fmt("optimality residual %.2e, Moreau residual %.2e (limit 1e-8)", foc_worst, moreau_worst)};
}

Outcome operator_norm() {
    auto fx = fixtures::make_regions(16, 16, [](std::size_t i, std::size_t j) -> std::uint8_t { return i < j; },
                                     {fixtures::Rgb{0, 0, 0}, fixtures::Rgb{250, 250, 250}}, 40, 0.0, 16, 3);
    const double bound = 4.0 * std::sqrt(256.0) + std::sqrt(8.0);
    std::ostringstream os;
    bool ok = true;
    for (auto v : {Variant::l1, Variant::mk_exact, Variant::sinkhorn_grad}) {
        SegConfig cfg;
        cfg.variant = v;
        const auto m = detail::two_phase_model(fx.input(), fx.priors[1], fx.priors[0], cfg);
        const double nrm = estimate_opnorm([&](auto x, auto y) { m.apply_K(x, y); },
                                           [&](auto y, auto x) { m.apply_Kt(y, x); }, m.primal_dim(), m.dual_dim(),
                                           500);
        ok = ok && nrm < bound;
        os << to_string(v) << " " << fmt("%.3f", nrm) << ", ";
    }
    return {ok, os.str() + fmt("bound %.3f", bound)};
}

Outcome variant_equivalence() {
    std::size_t differing = 0, fixtures_differing = 0;
    for (const auto& fx : fixtures::two_region_set(16, 16)) {
        SegConfig cfg;
        cfg.max_iter = 1000000;
        cfg.variant = Variant::sinkhorn_grad;
        const auto grad = segment_two_phase(fx.input(), fx.priors[1], fx.priors[0], cfg);
        cfg.variant = Variant::sinkhorn_prox;
        const auto prox = segment_two_phase(fx.input(), fx.priors[1], fx.priors[0], cfg);
        std::size_t d = 0;
        for (std::size_t p = 0; p < grad.labels.size(); ++p) d += grad.labels[p] != prox.labels[p];
        differing += d;
        fixtures_differing += d > 0;
    }
    return {differing == 0, fmt("%.0f/6 fixtures differ, %.0f pixels in total", fixtures_differing, differing)};
}

Outcome desk_scale() {
    const double c = 31.5;
    auto fx = fixtures::make_regions(64, 64, [=](std::size_t i, std::size_t j) -> std::uint8_t {
        return std::hypot(i - c, j - 0.8 * c) < 20.0;
    }, {fixtures::Rgb{40, 60, 200}, fixtures::Rgb{220, 60, 40}}, 25, 0.02, 64, 101);
    SegConfig cfg;
    cfg.variant = Variant::sinkhorn_prox;
    cfg.lambda = 100.0;
    cfg.rho = 0.2;
    const auto t0 = Clock::now();
    const auto r = segment_two_phase(fx.input(), fx.priors[1], fx.priors[0], cfg);
    const double t = seconds_since(t0);
    const double acc = fixtures::accuracy(r.labels, fx.truth);
    const bool small_ok = acc >= 0.99 && r.ambiguous_fraction <= 0.05 && t < 10.0;
    std::string detail = fmt("64x64: accuracy %.4f, ambiguous %.4f, %.2f s; ", acc, r.ambiguous_fraction, t);

    // Order-of-magnitude runtime: 500 sinkhorn_grad iterations at 1 Mpx, M = 512.
    auto big = fixtures::make_regions(1000, 1000, [](std::size_t i, std::size_t j) -> std::uint8_t {
        return std::hypot(double(i) - 500.0, double(j) - 450.0) < 300.0;
    }, {fixtures::Rgb{40, 60, 200}, fixtures::Rgb{220, 60, 40}}, 25, 0.02, 512, 102);
    SegConfig bcfg;
    bcfg.variant = Variant::sinkhorn_grad;
    bcfg.max_iter = 500;
    bcfg.tol = 0.0;
    const auto t1 = Clock::now();
    const auto br = segment_two_phase(big.input(), big.priors[1], big.priors[0], bcfg);
    const double bt = seconds_since(t1);
    detail += fmt("1 Mpx M=512: %.0f iterations in %.1f s (limit 600 s)", double(br.report.iterations), bt);
    return {small_ok && br.report.iterations == 500 && bt <= 600.0, detail};
}

Outcome multi_phase() {
    auto fx = fixtures::make_regions(64, 64, [](std::size_t i, std::size_t j) -> std::uint8_t {
        if (i < 24) return 0;
        return j < 32 ? 1 : 2;
    }, {fixtures::Rgb{200, 30, 30}, fixtures::Rgb{30, 200, 30}, fixtures::Rgb{30, 30, 200}}, 25, 0.0, 24, 8);
    SegConfig cfg;
    cfg.variant = Variant::mk_exact;
    cfg.rho = 0.5;
    const auto r = segment_multi_phase(fx.input(), fx.priors, cfg);
    const double acc = fixtures::accuracy(r.labels, fx.truth);
    double worst = 0.0;
    for (std::size_t p = 0; p < fx.truth.size(); ++p) {
        double s = 0.0;
        for (const auto& u : r.u) s += u[p];
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return {acc >= 0.99 && worst <= 1e-6, fmt("accuracy %.4f, max |sum u - 1| %.2e", acc, worst)};
}

CosegConfig l1_config(CosegVariant v, double rho, double delta) {
    CosegConfig cfg;
    cfg.variant = v;
    cfg.rho = rho;
    cfg.delta = delta;
    cfg.tol = 1e-9;
    cfg.max_iter = 200000;
    return cfg;
}

bool agrees_with_enumeration(const oracle::Toy& toy, double rho, double delta) {
    const std::size_t n = toy.w * toy.h;
    double best = INFINITY;
    for (std::uint32_t a = 0; a < (1u << n); ++a) {
        const auto ua = oracle::mask_of(a, n);
        for (std::uint32_t b = 0; b < (1u << n); ++b)
            best = std::min(best, toy.energy({ua, oracle::mask_of(b, n)}, rho, delta, false));
    }
    const auto res = coseg_multi(toy.inputs(), l1_config(CosegVariant::pairwise, rho, delta));
    const double binary =
        toy.energy({oracle::as_double(res.masks[0]), oracle::as_double(res.masks[1])}, rho, delta, false);
    return std::abs(binary - best) <= 1e-6 || toy.energy(res.u, rho, delta, false) <= best + 1e-6;
}

Outcome coseg_pairwise() {
    int cases = 0, agree = 0;
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::uint32_t> bin(0, 2);
    for (int trial = 0; trial < 6; ++trial) {
        oracle::Toy toy{{{3, std::vector<std::uint32_t>(4)}, {3, std::vector<std::uint32_t>(4)}}, 2, 2};
        for (auto& op : toy.ops)
            for (auto& b : op.bin_of_pixel) b = bin(rng);
        ++cases;
        agree += agrees_with_enumeration(toy, 0.3 + 0.2 * trial, 0.5 + 0.4 * trial);
    }
    oracle::Toy toy{{{4, {0, 1, 2, 1, 0, 2, 2, 2, 2}}, {4, {3, 3, 3, 3, 0, 1, 3, 1, 0}}}, 3, 3};
    for (auto [rho, delta] : {std::pair{0.2, 0.9}, std::pair{0.5, 1.5}}) {
        ++cases;
        agree += agrees_with_enumeration(toy, rho, delta);
    }
    const auto set = fixtures::twin_set();
    const auto res = coseg_pair(set.inputs()[0], set.inputs()[1], l1_config(CosegVariant::pairwise, 1.0, 0.8));
    const double j0 = fixtures::jaccard(res.masks[0], set.images[0].truth);
    const double j1 = fixtures::jaccard(res.masks[1], set.images[1].truth);
    return {agree == cases && j0 >= 0.95 && j1 >= 0.95,
            fmt("enumeration %.0f/%.0f toy instances, twin Jaccard %.4f / %.4f", agree, cases, j0, j1)};
}

Outcome coseg_barycentric() {
    // Median of histograms under frozen maps.
    const auto small = fixtures::shared_codebook({fixtures::object_image(10, 10, 1, 1, 5, {40, 120, 40}, 1),
                                                  fixtures::object_image(10, 10, 3, 2, 6, {60, 60, 160}, 2),
                                                  fixtures::object_image(10, 10, 4, 4, 4, {150, 150, 150}, 3)},
                                                 10);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto fcfg = l1_config(CosegVariant::barycentric_l1, 1.0, 0.5);
    fcfg.tol = 1e-12;
    fcfg.max_iter = 500000;
    for (std::size_t k = 0; k < 3; ++k) {
        fcfg.frozen.emplace_back(100);
        for (auto& x : fcfg.frozen.back()) x = u01(rng);
    }
    const auto fres = coseg_multi(small.inputs(), fcfg);
    double median_err = 0.0;
    for (std::size_t i = 0; i < small.codebook.bins(); ++i) {
        std::vector<double> col;
        for (std::size_t k = 0; k < 3; ++k) col.push_back(histogram_of(small.ops[k], fcfg.frozen[k]).mass()[i]);
        std::sort(col.begin(), col.end());
        median_err = std::max(median_err, std::abs(fres.barycenter[i] - col[1]));
    }

    // Objects at 1x, 2x and 4x area.
    const auto set = fixtures::scale_set();
    auto cfg = l1_config(CosegVariant::barycentric_l1, 2.0, 1.05);
    cfg.tol = 1e-7;
    const auto res = coseg_multi(set.inputs(), cfg);
    double jmin = 1.0, umean = 0.0, npix = 0.0;
    std::string js;
    for (std::size_t k = 0; k < 3; ++k) {
        const double j = fixtures::jaccard(res.masks[k], set.images[k].truth);
        jmin = std::min(jmin, j);
        js += fmt("%.4f ", j);
        for (std::size_t p = 0; p < res.u[k].size(); ++p)
            if (set.images[k].truth[p]) {
                umean += res.u[k][p];
                npix += 1.0;
            }
    }
    return {median_err <= 1e-6 && jmin >= 0.9,
            fmt("median error %.2e; ", median_err) + "scale Jaccards " + js +
                fmt("(mean u on objects %.4f)", umean / npix)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
        {"l1_transport_identity", l1_identity},
        {"entropic_gap", entropic_gap},
        {"conjugate_correctness", conjugate},
        {"lipschitz_bound", lipschitz},
        {"lambert_prox", lambert_prox},
        {"operator_norm_bound", operator_norm},
        {"variant_equivalence", variant_equivalence},
        {"desk_scale_segmentation", desk_scale},
        {"multi_phase", multi_phase},
        {"coseg_pairwise", coseg_pairwise},
        {"coseg_barycentric", coseg_barycentric},
    };
    const std::vector<std::string> selected(argv + 1, argv + argc);
    int failed = 0;
    for (const auto& [name, fn] : checks) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    return failed ? 1 : 0;
}
