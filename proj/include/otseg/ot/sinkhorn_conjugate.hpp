#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "otseg/error.hpp"
#include "otseg/ot/types.hpp"

namespace otseg {

// Legendre conjugate of the mass-bounded entropic transport cost, evaluated
// through the exponents x_ij = lambda (beta_i + beta'_j - c_ij) - 1.

namespace detail {

struct ConjugateExponents {
    Matrix<double> shifted;  ///< exp(x_ij - peak)
    double peak = 0.0;
    double shifted_sum = 0.0;
    double log_mass() const { return peak + std::log(shifted_sum); }  ///< log <q,1>
};

inline ConjugateExponents conjugate_exponents(const DualPotentials& beta, const CostMatrix& c, double lambda,
                                              double mass_bound) {
    if (!(lambda > 0.0) || !(mass_bound > 0.0)) throw InvalidArgument("mk_conj: lambda and N must be positive");
    if (beta.beta_src.size() != c.rows() || beta.beta_dst.size() != c.cols())
        throw InvalidArgument("mk_conj: potentials do not match the cost shape");
    ConjugateExponents e;
    e.shifted = Matrix<double>(c.rows(), c.cols());
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j) {
            const double x = lambda * (beta.beta_src[i] + beta.beta_dst[j] - c(i, j)) - 1.0;
            e.shifted(i, j) = x;
            peak = std::max(peak, x);
        }
    double sum = 0.0;
    for (double& v : e.shifted.flat()) {
        v = std::exp(v - peak);
        sum += v;
    }
    e.peak = peak;
    e.shifted_sum = sum;
    return e;
}

}  // namespace detail

inline double mk_conj_value(const DualPotentials& beta, const CostMatrix& c, double lambda, double mass_bound) {
    const auto e = detail::conjugate_exponents(beta, c, lambda, mass_bound);
    const double s = e.log_mass();
    return s <= 0.0 ? mass_bound / lambda * std::exp(s) : mass_bound / lambda * (s + 1.0);
}

inline DualPotentials mk_conj_grad(const DualPotentials& beta, const CostMatrix& c, double lambda,
                                   double mass_bound) {
    const auto e = detail::conjugate_exponents(beta, c, lambda, mass_bound);
    const double s = e.log_mass();
    const double scale = s <= 0.0 ? mass_bound * std::exp(e.peak) : mass_bound / e.shifted_sum;
    DualPotentials g{std::vector<double>(c.rows(), 0.0), std::vector<double>(c.cols(), 0.0)};
    for (std::size_t i = 0; i < c.rows(); ++i) {
        const auto row = e.shifted.row(i);
        double r = 0.0;
        for (std::size_t j = 0; j < c.cols(); ++j) {
            r += row[j];
            g.beta_dst[j] += row[j];
        }
        g.beta_src[i] = scale * r;
    }
    for (double& v : g.beta_dst) v *= scale;
    return g;
}

/// Lipschitz constant of mk_conj_grad.
inline double mk_conj_lipschitz(double lambda, double mass_bound) { return 2.0 * lambda * mass_bound; }

}  // namespace otseg
