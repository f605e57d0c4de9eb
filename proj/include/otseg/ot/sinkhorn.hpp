#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/ot/types.hpp"

namespace otseg {

enum class SinkhornDomain { automatic, plain, log };

struct SinkhornOptions {
    double tol_relative = 1e-9;  ///< l1 marginal residual bound, relative to the total mass
    std::size_t max_iter = 10000;
    SinkhornDomain domain = SinkhornDomain::automatic;
    /// Automatic mode switches to log-domain updates when lambda * max(C) exceeds this.
    double plain_domain_limit = 30.0;
    /// When false, the last iterate is returned instead of throwing NotConverged.
    bool require_convergence = true;
};

struct SinkhornResult {
    double reg_cost = 0.0;        ///< <P,C> - h(P)/lambda
    double transport_cost = 0.0;  ///< <P,C>
    TransportPlan plan;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool used_log_domain = false;
};

namespace detail {

inline double log_sum_exp(const double* v, std::size_t n) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) peak = std::max(peak, v[k]);
    if (!std::isfinite(peak)) return peak;
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += std::exp(v[k] - peak);
    return peak + std::log(s);
}

}  // namespace detail

/// Entropy-regularized transport by alternate row/column scaling. Empty bins are
/// removed before iterating and come back as zero rows/columns of the plan.
inline SinkhornResult sinkhorn(const Histogram& a, const Histogram& b, const CostMatrix& cost, double lambda,
                               const SinkhornOptions& opt = {}) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("sinkhorn: lambda must be positive and finite");
    if (cost.rows() != a.bins() || cost.cols() != b.bins()) throw InvalidArgument("sinkhorn: cost shape mismatch");
    const double ma = a.total_mass(), mb = b.total_mass();
    if (std::abs(ma - mb) > 1e-9 * std::max(ma, mb)) throw MassMismatch(ma, mb);
    if (!(ma > 0.0)) throw InvalidArgument("sinkhorn: histograms carry no mass");

    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < a.bins(); ++i)
        if (a[i] > 0.0) rows.push_back(i);
    for (std::size_t j = 0; j < b.bins(); ++j)
        if (b[j] > 0.0) cols.push_back(j);
    const std::size_t m = rows.size(), n = cols.size();

    Matrix<double> c(m, n);
    double cmax = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            c(i, j) = cost(rows[i], cols[j]);
            cmax = std::max(cmax, c(i, j));
        }
    std::vector<double> ra(m), rb(n);
    for (std::size_t i = 0; i < m; ++i) ra[i] = a[rows[i]];
    for (std::size_t j = 0; j < n; ++j) rb[j] = b[cols[j]];

    const bool use_log = opt.domain == SinkhornDomain::log ||
                         (opt.domain == SinkhornDomain::automatic && lambda * cmax > opt.plain_domain_limit);
    const double tol = opt.tol_relative * ma;

    Matrix<double> plan(m, n);
    std::size_t it = 0;
    double residual = std::numeric_limits<double>::infinity();

    if (!use_log) {
        Matrix<double> kernel(m, n);
        for (std::size_t k = 0; k < kernel.size(); ++k) kernel.flat()[k] = std::exp(-lambda * c.flat()[k]);
        std::vector<double> x(m, 1.0), y(n), ktx(n), ky(m);
        while (it < opt.max_iter) {
            ++it;
            std::fill(ktx.begin(), ktx.end(), 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                const auto kr = kernel.row(i);
                for (std::size_t j = 0; j < n; ++j) ktx[j] += kr[j] * x[i];
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (!(ktx[j] > 0.0)) throw NumericalUnderflow("sinkhorn: kernel column underflows; use the log domain");
                y[j] = rb[j] / ktx[j];
            }
            for (std::size_t i = 0; i < m; ++i) {
                const auto kr = kernel.row(i);
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j) s += kr[j] * y[j];
                if (!(s > 0.0)) throw NumericalUnderflow("sinkhorn: kernel row underflows; use the log domain");
                ky[i] = s;
                x[i] = ra[i] / s;
            }
            // Rows are exact after the x update; measure the column marginals.
            std::fill(ktx.begin(), ktx.end(), 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                const auto kr = kernel.row(i);
                for (std::size_t j = 0; j < n; ++j) ktx[j] += kr[j] * x[i];
            }
            residual = 0.0;
            for (std::size_t j = 0; j < n; ++j) residual += std::abs(ktx[j] * y[j] - rb[j]);
            if (residual <= tol) break;
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) plan(i, j) = x[i] * kernel(i, j) * y[j];
    } else {
        std::vector<double> f(m, 0.0), g(n, 0.0), scratch(std::max(m, n));
        std::vector<double> log_a(m), log_b(n);
        for (std::size_t i = 0; i < m; ++i) log_a[i] = std::log(ra[i]);
        for (std::size_t j = 0; j < n; ++j) log_b[j] = std::log(rb[j]);
        auto column_lse = [&](std::size_t j) {
            for (std::size_t i = 0; i < m; ++i) scratch[i] = f[i] - lambda * c(i, j);
            return detail::log_sum_exp(scratch.data(), m);
        };
        while (it < opt.max_iter) {
            ++it;
            for (std::size_t j = 0; j < n; ++j) g[j] = log_b[j] - column_lse(j);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < n; ++j) scratch[j] = g[j] - lambda * c(i, j);
                f[i] = log_a[i] - detail::log_sum_exp(scratch.data(), n);
            }
            residual = 0.0;
            for (std::size_t j = 0; j < n; ++j) residual += std::abs(std::exp(g[j] + column_lse(j)) - rb[j]);
            if (residual <= tol) break;
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) plan(i, j) = std::exp(f[i] + g[j] - lambda * c(i, j));
    }

    if (opt.require_convergence && !(residual <= tol)) throw NotConverged("sinkhorn did not reach the marginal tolerance", residual, it);

    SinkhornResult out;
    out.iterations = it;
    out.residual = residual;
    out.used_log_domain = use_log;
    out.plan.entries = Matrix<double>(a.bins(), b.bins());
    out.plan.source_marginal = a;
    out.plan.target_marginal = b;
    double transport = 0.0, neg_entropy = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double p = plan(i, j);
            out.plan.entries(rows[i], cols[j]) = p;
            transport += p * c(i, j);
            if (p > 0.0) neg_entropy += p * std::log(p);
        }
    out.transport_cost = transport;
    out.reg_cost = transport + neg_entropy / lambda;
    return out;
}

/// Value of the mass-normalized entropic cost <P,C> + <P, log(P/N)>/lambda for a Sinkhorn plan.
inline double sinkhorn_normalized_value(const SinkhornResult& r, double lambda, double mass_bound) {
    return r.reg_cost - r.plan.source_marginal.total_mass() * std::log(mass_bound) / lambda;
}

}  // namespace otseg
