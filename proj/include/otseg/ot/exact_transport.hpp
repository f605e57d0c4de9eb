#pragma once

// Exact Monge-Kantorovich transport by the transportation simplex
// (MODI pricing on a spanning-tree basis of m + n - 1 cells).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/ot/types.hpp"

namespace otseg {

inline constexpr std::size_t kExactTransportMaxBins = 4096;

template <class T>
struct ExactTransport {
    T cost{};
    Matrix<T> plan;
    std::vector<T> potential_src;  ///< optimal dual prices, potential_src[0] = 0
    std::vector<T> potential_dst;
    std::size_t pivots = 0;
};

namespace detail {

template <class T>
T mass_tolerance(T total) {
    if constexpr (std::is_floating_point_v<T>)
        return T(1e-9) * total;
    else
        return T{0};
}

template <class T>
class TransportSimplex {
public:
    TransportSimplex(std::span<const T> supply, std::span<const T> demand, const Matrix<T>& cost)
        : m_(supply.size()), n_(demand.size()), cost_(cost), flow_(m_, n_, T{}) {
        northwest_corner(supply, demand);
    }

    ExactTransport<T> solve() {
        std::size_t pivots = 0;
        const std::size_t cap = 50 * (m_ + 1) * (n_ + 1) + 1000;
        T reduced_tol{};
        if constexpr (std::is_floating_point_v<T>) {
            T peak{};
            for (T c : cost_.flat()) peak = std::max(peak, std::abs(c));
            reduced_tol = T(1e-12) * (T(1) + peak);
        }
        for (;;) {
            compute_potentials();
            std::size_t ei = 0, ej = 0;
            T best = -reduced_tol;
            bool found = false;
            for (std::size_t i = 0; i < m_; ++i) {
                const auto crow = cost_.row(i);
                for (std::size_t j = 0; j < n_; ++j) {
                    const T d = crow[j] - u_[i] - v_[j];
                    if (d < best) {
                        best = d;
                        ei = i;
                        ej = j;
                        found = true;
                    }
                }
            }
            if (!found) break;
            if (++pivots > cap) throw NotConverged("transportation simplex pivot cap reached", double(best), pivots);
            pivot(ei, ej);
        }

        ExactTransport<T> out;
        out.plan = flow_;
        out.cost = T{};
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < n_; ++j) out.cost += flow_(i, j) * cost_(i, j);
        out.potential_src = u_;
        out.potential_dst = v_;
        out.pivots = pivots;
        return out;
    }

private:
    struct Cell {
        std::size_t i, j;
    };

    // Node ids: rows are 0..m-1, columns are m..m+n-1.
    void northwest_corner(std::span<const T> supply, std::span<const T> demand) {
        std::vector<T> s(supply.begin(), supply.end());
        std::vector<T> d(demand.begin(), demand.end());
        std::size_t i = 0, j = 0;
        while (i < m_ && j < n_) {
            const T x = std::min(s[i], d[j]);
            flow_(i, j) = x;
            basis_.push_back({i, j});
            s[i] -= x;
            d[j] -= x;
            if (i + 1 == m_) {
                ++j;
            } else if (j + 1 == n_) {
                ++i;
            } else if (s[i] <= d[j]) {
                ++i;  // ties move down the rows; the column keeps a zero-flow basic cell
            } else {
                ++j;
            }
        }
    }

    void build_adjacency() {
        adjacency_.assign(m_ + n_, {});
        for (std::size_t k = 0; k < basis_.size(); ++k) {
            adjacency_[basis_[k].i].push_back(k);
            adjacency_[m_ + basis_[k].j].push_back(k);
        }
    }

    void compute_potentials() {
        build_adjacency();
        u_.assign(m_, T{});
        v_.assign(n_, T{});
        std::vector<char> seen(m_ + n_, 0);
        std::vector<std::size_t> stack;
        for (std::size_t root = 0; root < m_ + n_; ++root) {
            if (seen[root]) continue;
            seen[root] = 1;
            stack.push_back(root);
            while (!stack.empty()) {
                const std::size_t node = stack.back();
                stack.pop_back();
                for (std::size_t k : adjacency_[node]) {
                    const Cell c = basis_[k];
                    if (node < m_) {
                        const std::size_t other = m_ + c.j;
                        if (!seen[other]) {
                            v_[c.j] = cost_(c.i, c.j) - u_[c.i];
                            seen[other] = 1;
                            stack.push_back(other);
                        }
                    } else if (!seen[c.i]) {
                        u_[c.i] = cost_(c.i, c.j) - v_[c.j];
                        seen[c.i] = 1;
                        stack.push_back(c.i);
                    }
                }
            }
        }
    }

    // Tree path from row `ei` to column `ej`, returned as basis indices in order from the row end.
    std::vector<std::size_t> tree_path(std::size_t ei, std::size_t ej) const {
        const std::size_t target = m_ + ej;
        constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
        std::vector<std::size_t> via(m_ + n_, none);
        std::vector<char> seen(m_ + n_, 0);
        std::vector<std::size_t> queue{ei};
        seen[ei] = 1;
        for (std::size_t head = 0; head < queue.size() && !seen[target]; ++head) {
            const std::size_t node = queue[head];
            for (std::size_t k : adjacency_[node]) {
                const std::size_t other = node < m_ ? m_ + basis_[k].j : basis_[k].i;
                if (seen[other]) continue;
                seen[other] = 1;
                via[other] = k;
                queue.push_back(other);
            }
        }
        std::vector<std::size_t> path;
        for (std::size_t node = target; node != ei;) {
            const std::size_t k = via[node];
            path.push_back(k);
            node = node < m_ ? m_ + basis_[k].j : basis_[k].i;
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    void pivot(std::size_t ei, std::size_t ej) {
        const auto path = tree_path(ei, ej);
        // Cells at even positions along the path lose flow, odd positions gain it.
        std::size_t leave = path.front();
        T theta = flow_(basis_[leave].i, basis_[leave].j);
        for (std::size_t p = 0; p < path.size(); p += 2) {
            const Cell c = basis_[path[p]];
            if (flow_(c.i, c.j) < theta) {
                theta = flow_(c.i, c.j);
                leave = path[p];
            }
        }
        for (std::size_t p = 0; p < path.size(); ++p) {
            const Cell c = basis_[path[p]];
            if (p % 2 == 0)
                flow_(c.i, c.j) -= theta;
            else
                flow_(c.i, c.j) += theta;
        }
        flow_(ei, ej) += theta;
        const Cell gone = basis_[leave];
        flow_(gone.i, gone.j) = T{};
        basis_[leave] = {ei, ej};
    }

    std::size_t m_, n_;
    const Matrix<T>& cost_;
    Matrix<T> flow_;
    std::vector<Cell> basis_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<T> u_, v_;
};

}  // namespace detail

/// Optimal transport between two equal-mass nonnegative vectors under `cost`.
/// Integral inputs stay integral throughout, so integer T gives exact results.
template <class T>
ExactTransport<T> solve_transport(std::span<const T> supply, std::span<const T> demand, const Matrix<T>& cost) {
    if (supply.empty() || demand.empty()) throw InvalidArgument("transport: empty marginal");
    if (cost.rows() != supply.size() || cost.cols() != demand.size())
        throw InvalidArgument("transport: cost shape does not match marginals");
    if (supply.size() > kExactTransportMaxBins || demand.size() > kExactTransportMaxBins)
        throw InvalidArgument("transport: exact solver is limited to 4096 bins per side");
    T ts{}, td{};
    for (T s : supply) {
        if (!(s >= T{})) throw InvalidArgument("transport: negative supply");
        ts += s;
    }
    for (T d : demand) {
        if (!(d >= T{})) throw InvalidArgument("transport: negative demand");
        td += d;
    }
    const T diff = ts > td ? ts - td : td - ts;
    if (diff > detail::mass_tolerance(std::max(ts, td))) throw MassMismatch(double(ts), double(td));
    return detail::TransportSimplex<T>(supply, demand, cost).solve();
}

struct ExactTransportResult {
    double cost = 0.0;
    TransportPlan plan;
    DualPotentials potentials;
};

inline ExactTransportResult mk_exact(const Histogram& a, const Histogram& b, const CostMatrix& cost) {
    auto sol = solve_transport<double>(a.mass(), b.mass(), cost.entries);
    ExactTransportResult out;
    out.cost = sol.cost;
    out.plan = TransportPlan{std::move(sol.plan), a, b};
    out.potentials = DualPotentials{std::move(sol.potential_src), std::move(sol.potential_dst)};
    return out;
}

}  // namespace otseg
