#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "otseg/error.hpp"

namespace otseg {

/// Canonical saddle problem min_u max_p <Ku,p> + R(u) + T(u) - F*(p) - G*(p),
/// with resolvents of R and F* and gradients of T and G*.
template <class P>
concept SaddleProblem = requires(const P& p, std::span<const double> in, std::span<double> out,
                                 std::span<const double> steps) {
    { p.primal_dim() } -> std::convertible_to<std::size_t>;
    { p.dual_dim() } -> std::convertible_to<std::size_t>;
    p.apply_K(in, out);
    p.apply_Kt(in, out);
    p.prox_R(out, steps);
    p.grad_T(in, out);
    p.prox_Fstar(out, steps);
    p.grad_Gstar(in, out);
    { p.lipschitz_T() } -> std::convertible_to<double>;
    { p.lipschitz_Gstar() } -> std::convertible_to<std::vector<double>>;
    { p.abs_row_sums() } -> std::convertible_to<std::vector<double>>;
    { p.abs_col_sums() } -> std::convertible_to<std::vector<double>>;
    { p.step_floor_scale() } -> std::convertible_to<double>;
};

/// Type-erased problem assembled from callbacks.
struct SegProblem {
    using Map = std::function<void(std::span<const double>, std::span<double>)>;
    using Resolvent = std::function<void(std::span<double>, std::span<const double>)>;

    std::size_t n_primal = 0, n_dual = 0;
    Map K, Kt, gradT, gradGstar;
    Resolvent proxR, proxFstar;
    double L_T = 0.0;
    std::vector<double> L_Gstar;  ///< per dual coordinate
    std::vector<double> row_sums, col_sums;
    double floor_scale = 1.0;

    std::size_t primal_dim() const { return n_primal; }
    std::size_t dual_dim() const { return n_dual; }
    void apply_K(std::span<const double> u, std::span<double> out) const { K(u, out); }
    void apply_Kt(std::span<const double> p, std::span<double> out) const { Kt(p, out); }
    void prox_R(std::span<double> u, std::span<const double> tau) const {
        if (proxR) proxR(u, tau);
    }
    void grad_T(std::span<const double> u, std::span<double> out) const {
        if (gradT)
            gradT(u, out);
        else
            std::fill(out.begin(), out.end(), 0.0);
    }
    void prox_Fstar(std::span<double> p, std::span<const double> sigma) const {
        if (proxFstar) proxFstar(p, sigma);
    }
    void grad_Gstar(std::span<const double> p, std::span<double> out) const {
        if (gradGstar)
            gradGstar(p, out);
        else
            std::fill(out.begin(), out.end(), 0.0);
    }
    double lipschitz_T() const { return L_T; }
    std::vector<double> lipschitz_Gstar() const {
        return L_Gstar.empty() ? std::vector<double>(n_dual, 0.0) : L_Gstar;
    }
    std::vector<double> abs_row_sums() const { return row_sums; }
    std::vector<double> abs_col_sums() const { return col_sums; }
    double step_floor_scale() const { return floor_scale; }
};

template <SaddleProblem P>
SegProblem erase(const P& p) {
    SegProblem s;
    s.n_primal = p.primal_dim();
    s.n_dual = p.dual_dim();
    s.K = [&p](std::span<const double> a, std::span<double> b) { p.apply_K(a, b); };
    s.Kt = [&p](std::span<const double> a, std::span<double> b) { p.apply_Kt(a, b); };
    s.gradT = [&p](std::span<const double> a, std::span<double> b) { p.grad_T(a, b); };
    s.gradGstar = [&p](std::span<const double> a, std::span<double> b) { p.grad_Gstar(a, b); };
    s.proxR = [&p](std::span<double> a, std::span<const double> t) { p.prox_R(a, t); };
    s.proxFstar = [&p](std::span<double> a, std::span<const double> t) { p.prox_Fstar(a, t); };
    s.L_T = p.lipschitz_T();
    s.L_Gstar = p.lipschitz_Gstar();
    s.row_sums = p.abs_row_sums();
    s.col_sums = p.abs_col_sums();
    s.floor_scale = p.step_floor_scale();
    return s;
}

struct Preconditioner {
    std::vector<double> tau;    ///< primal steps
    std::vector<double> sigma;  ///< dual steps

    static Preconditioner scalar(double tau, double sigma, std::size_t n_primal, std::size_t n_dual) {
        if (!(tau > 0.0) || !(sigma > 0.0)) throw InvalidArgument("step sizes must be positive");
        return {std::vector<double>(n_primal, tau), std::vector<double>(n_dual, sigma)};
    }
};

/// Diagonal steps 1/tau = L_T/gamma + r colsum|K|, 1/sigma = L_G*/delta + rowsum|K|/r.
/// Zero denominators are floored at 1e-8 * floor_scale / r.
template <SaddleProblem P>
Preconditioner build_preconditioner(const P& problem, double r = 1.0, double delta = 1.0, double gamma = 1.0) {
    if (!(r > 0.0)) throw InvalidArgument("preconditioner: r must be positive");
    if (!(delta > 0.0 && delta < 2.0)) throw InvalidArgument("preconditioner: delta must lie in (0,2)");
    if (!(gamma > 0.0)) throw InvalidArgument("preconditioner: gamma must be positive");
    const double floor = 1e-8 * problem.step_floor_scale() / r;
    const double lt = problem.lipschitz_T();
    const auto lg = problem.lipschitz_Gstar();
    const auto cols = problem.abs_col_sums();
    const auto rows = problem.abs_row_sums();
    if (cols.size() != problem.primal_dim() || rows.size() != problem.dual_dim() || lg.size() != problem.dual_dim())
        throw InvalidArgument("preconditioner: problem reports inconsistent sizes");
    Preconditioner pc{std::vector<double>(cols.size()), std::vector<double>(rows.size())};
    for (std::size_t x = 0; x < cols.size(); ++x) pc.tau[x] = 1.0 / std::max(floor, lt / gamma + r * cols[x]);
    for (std::size_t i = 0; i < rows.size(); ++i) pc.sigma[i] = 1.0 / std::max(floor, lg[i] / delta + rows[i] / r);
    return pc;
}

struct SolveOptions {
    double tol = 1e-6;
    std::size_t max_iter = 5000;
    std::size_t report_every = 10;
    double eps = 1e-8;  ///< guards the residual normalization for vanishing iterates
    /// Called every `report_every` iterations; returning false cancels the solve.
    std::function<bool(std::size_t iteration, double residual)> progress;
    /// Optional primal energy evaluator, sampled every `report_every` iterations.
    std::function<double(std::span<const double>)> energy;
};

struct SolveReport {
    std::size_t iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    std::vector<std::pair<std::size_t, double>> energy_trace;
    std::vector<double> residual_trace;  ///< combined residual per iteration
    bool converged = false;
    bool cancelled = false;
    double wall_seconds = 0.0;
};

struct SolveState {
    std::vector<double> primal;
    std::vector<double> dual;
};

namespace detail {

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

inline double mean(std::span<const double> x) {
    return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

}  // namespace detail

/// Preconditioned primal-dual iterations
///   u+ = prox_{tau R}(u - tau (K^T p + grad T(u)))
///   p+ = prox_{sigma F*}(p + sigma K(2u+ - u) - sigma grad G*(p)).
/// `state` holds the initial point on entry and the final iterate on exit.
template <SaddleProblem P>
SolveReport solve(const P& problem, const Preconditioner& pc, SolveState& state, const SolveOptions& opt = {}) {
    const std::size_t n = problem.primal_dim(), m = problem.dual_dim();
    if (pc.tau.size() != n || pc.sigma.size() != m) throw InvalidArgument("solve: step vectors do not match the problem");
    for (double t : pc.tau)
        if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("solve: primal steps must be finite and positive");
    for (double s : pc.sigma)
        if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("solve: dual steps must be finite and positive");
    if (state.primal.empty()) state.primal.assign(n, 0.0);
    if (state.dual.empty()) state.dual.assign(m, 0.0);
    if (state.primal.size() != n || state.dual.size() != m) throw InvalidArgument("solve: initial point has wrong size");

    const auto t0 = std::chrono::steady_clock::now();
    const double tau_bar = detail::mean(pc.tau), sigma_bar = detail::mean(pc.sigma);
    auto& u = state.primal;
    auto& p = state.dual;
    std::vector<double> u_new(n), ktp(n), gt(n), ubar(n), kub(m), gg(m), p_new(m);
    const auto ni = static_cast<std::ptrdiff_t>(n), mi = static_cast<std::ptrdiff_t>(m);

    SolveReport rep;
    problem.apply_Kt(p, ktp);
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        problem.grad_T(u, gt);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t x = 0; x < ni; ++x) u_new[x] = u[x] - pc.tau[x] * (ktp[x] + gt[x]);
        problem.prox_R(u_new, pc.tau);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t x = 0; x < ni; ++x) ubar[x] = 2.0 * u_new[x] - u[x];
        problem.apply_K(ubar, kub);
        problem.grad_Gstar(p, gg);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < mi; ++i) p_new[i] = p[i] + pc.sigma[i] * (kub[i] - gg[i]);
        problem.prox_Fstar(p_new, pc.sigma);

        double du = 0.0, dp = 0.0;
        for (std::size_t x = 0; x < n; ++x) du += (u_new[x] - u[x]) * (u_new[x] - u[x]);
        for (std::size_t i = 0; i < m; ++i) dp += (p_new[i] - p[i]) * (p_new[i] - p[i]);
        u.swap(u_new);
        p.swap(p_new);
        rep.primal_residual = std::sqrt(du) / (tau_bar * detail::norm2(u) + opt.eps);
        rep.dual_residual = std::sqrt(dp) / (sigma_bar * detail::norm2(p) + opt.eps);
        const double res = rep.primal_residual + rep.dual_residual;
        rep.iterations = it;
        rep.residual_trace.push_back(res);
        if (!std::isfinite(res)) throw Diverged(it);
        problem.apply_Kt(p, ktp);

        if (opt.report_every && it % opt.report_every == 0) {
            if (opt.energy) rep.energy_trace.emplace_back(it, opt.energy(u));
            if (opt.progress && !opt.progress(it, res)) {
                rep.cancelled = true;
                break;
            }
        }
        if (res <= opt.tol) {
            rep.converged = true;
            break;
        }
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// Power-iteration estimate of the spectral norm of K.
template <class ApplyK, class ApplyKt>
double estimate_opnorm(ApplyK&& apply_K, ApplyKt&& apply_Kt, std::size_t n_primal, std::size_t n_dual,
                       std::size_t iters = 200, std::uint64_t seed = 1) {
    if (n_primal == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> x(n_primal), y(n_dual), z(n_primal);
    for (double& v : x) v = g(rng);
    double est = 0.0;
    for (std::size_t k = 0; k < iters; ++k) {
        const double nx = detail::norm2(x);
        if (nx == 0.0) return 0.0;
        for (double& v : x) v /= nx;
        apply_K(std::span<const double>(x), std::span<double>(y));
        est = detail::norm2(y);
        apply_Kt(std::span<const double>(y), std::span<double>(z));
        x.swap(z);
    }
    return est;
}

}  // namespace otseg
