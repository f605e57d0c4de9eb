#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/ot/lambert_w.hpp"
#include "otseg/ot/types.hpp"

namespace otseg {

// Entrywise entropic transport term g(r) = r c + (r / lambda) log(r / N), r >= 0.

/// Exponent t with prox_{tau g}(r) = (tau / lambda) W(e^t).
inline double entropic_prox_exponent(double r, double tau, double lambda, double mass_bound, double c) {
    return std::log(lambda * mass_bound / tau) + lambda * (r / tau - c) - 1.0;
}

inline double prox_g_lambda(double r, double tau, double lambda, double mass_bound, double c) {
    return tau / lambda * lambert_w_exp(entropic_prox_exponent(r, tau, lambda, mass_bound, c));
}

/// prox of g* / tau at p, from the closed form of the conjugate.
inline double prox_g_lambda_conj(double p, double tau, double lambda, double mass_bound, double c) {
    return p - lambert_w_exp(entropic_prox_exponent(tau * p, tau, lambda, mass_bound, c)) / lambda;
}

/// Entrywise prox over a flattened plan with costs `cost` (same layout).
inline std::vector<double> prox_g_lambda(std::span<const double> r, double tau, double lambda, double mass_bound,
                                         const CostMatrix& cost) {
    if (!(tau > 0.0) || !(lambda > 0.0) || !(mass_bound > 0.0))
        throw InvalidArgument("prox_g_lambda: tau, lambda and N must be positive");
    if (r.size() != cost.entries.size()) throw InvalidArgument("prox_g_lambda: size mismatch with cost");
    std::vector<double> out(r.size());
    const auto c = cost.entries.flat();
    for (std::size_t k = 0; k < r.size(); ++k) out[k] = prox_g_lambda(r[k], tau, lambda, mass_bound, c[k]);
    return out;
}

}  // namespace otseg
