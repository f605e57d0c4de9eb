#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "otseg/ot/cost.hpp"
#include "otseg/ot/entropic_prox.hpp"
#include "otseg/ot/exact_transport.hpp"
#include "otseg/ot/lambert_w.hpp"
#include "otseg/ot/marginal_operator.hpp"
#include "otseg/ot/sinkhorn.hpp"
#include "otseg/ot/sinkhorn_conjugate.hpp"

using namespace otseg;

namespace {

// Brute-force minimum over all integer plans with the given marginals.
long long enumerate_min_cost(const std::vector<long long>& a, const std::vector<long long>& b,
                             const Matrix<long long>& c) {
    const std::size_t m = a.size(), n = b.size();
    long long best = std::numeric_limits<long long>::max();
    std::vector<long long> col_left(b);
    std::function<void(std::size_t, std::size_t, long long, long long)> rec = [&](std::size_t i, std::size_t j,
                                                                                 long long row_left, long long acc) {
        if (i == m) {
            for (long long v : col_left)
                if (v != 0) return;
            best = std::min(best, acc);
            return;
        }
        if (j == n - 1) {
            if (row_left > col_left[j]) return;
            col_left[j] -= row_left;
            rec(i + 1, 0, i + 1 < m ? a[i + 1] : 0, acc + row_left * c(i, j));
            col_left[j] += row_left;
            return;
        }
        for (long long x = 0; x <= std::min(row_left, col_left[j]); ++x) {
            col_left[j] -= x;
            rec(i, j + 1, row_left - x, acc + x * c(i, j));
            col_left[j] += x;
        }
    };
    rec(0, 0, a[0], 0);
    return best;
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

}  // namespace

TEST(ExactTransport, IdentityPlanForEqualHistograms) {
    Histogram a({0.2, 0.3, 0.5});
    auto c = l1_equivalent_cost(3);
    const auto r = mk_exact(a, a, c);
    EXPECT_DOUBLE_EQ(r.cost, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(r.plan.entries(i, j), i == j ? a[i] : 0.0);
}

TEST(ExactTransport, SmallL1Example) {
    const auto r = mk_exact(Histogram({2, 1}), Histogram({1, 2}), l1_equivalent_cost(2));
    EXPECT_DOUBLE_EQ(r.cost, 2.0);
}

TEST(ExactTransport, MatchesEnumerationOracle) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long long> cost_draw(0, 9);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t m = 1 + rng() % 3, n = 1 + rng() % 3;
        const long long total = 1 + static_cast<long long>(rng() % 6);
        const auto a = random_composition(rng, m, total);
        const auto b = random_composition(rng, n, total);
        Matrix<long long> c(m, n);
        for (auto& v : c.flat()) v = cost_draw(rng);
        const auto sol = solve_transport<long long>(a, b, c);
        ASSERT_EQ(sol.cost, enumerate_min_cost(a, b, c)) << "trial " << trial;
    }
}

TEST(ExactTransport, PlanIsFeasibleAndDualCertifies) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 2 + rng() % 10, n = 2 + rng() % 10;
        auto a = random_unit_histogram(rng, m), b = random_unit_histogram(rng, n);
        auto c = random_cost(rng, m, n);
        const auto r = mk_exact(a, b, c);
        const auto sums = apply_L_transpose(r.plan.entries);
        for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(sums.beta_src[i], a[i], 1e-12);
        for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(sums.beta_dst[j], b[j], 1e-12);
        for (double p : r.plan.entries.flat()) EXPECT_GE(p, 0.0);
        double dual = 0.0;
        for (std::size_t i = 0; i < m; ++i) dual += a[i] * r.potentials.beta_src[i];
        for (std::size_t j = 0; j < n; ++j) dual += b[j] * r.potentials.beta_dst[j];
        EXPECT_NEAR(dual, r.cost, 1e-10);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                EXPECT_LE(r.potentials.beta_src[i] + r.potentials.beta_dst[j], c(i, j) + 1e-10);
    }
}

TEST(ExactTransport, SymmetricUnderTransposition) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t m = 2 + rng() % 6, n = 2 + rng() % 6;
        auto a = random_unit_histogram(rng, m), b = random_unit_histogram(rng, n);
        auto c = random_cost(rng, m, n);
        EXPECT_NEAR(mk_exact(a, b, c).cost, mk_exact(b, a, c.transposed()).cost, 1e-12);
    }
}

TEST(ExactTransport, IntegerL1Identity) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + rng() % 7;
        const long long total = 1 + static_cast<long long>(rng() % 40);
        const auto a = random_composition(rng, m, total), b = random_composition(rng, m, total);
        Matrix<long long> c(m, m, 2);
        for (std::size_t i = 0; i < m; ++i) c(i, i) = 0;
        long long l1 = 0;
        for (std::size_t i = 0; i < m; ++i) l1 += std::llabs(a[i] - b[i]);
        EXPECT_EQ(solve_transport<long long>(a, b, c).cost, l1);
    }
}

TEST(ExactTransport, Errors) {
    EXPECT_THROW(mk_exact(Histogram({1, 1}), Histogram({1, 2}), l1_equivalent_cost(2)), MassMismatch);
    EXPECT_THROW(mk_exact(Histogram({1, 1}), Histogram({1, 1}), l1_equivalent_cost(3)), InvalidArgument);
    EXPECT_THROW(Histogram({1, -1}), InvalidArgument);
}

TEST(Cost, KindsAndNormalization) {
    Centroids a{{0, 0}, {3, 4}}, b{{0, 0}};
    auto c1 = build_cost_matrix(a, b, EuclideanPower{2.0});
    EXPECT_DOUBLE_EQ(c1(1, 0), 25.0);
    auto c2 = build_cost_matrix(a, b, ExpConcave{0.5});
    EXPECT_NEAR(c2(1, 0), 1.0 - std::exp(-2.5), 1e-15);
    auto c3 = build_cost_matrix(a, a, EuclideanPower{1.0}, true);
    EXPECT_DOUBLE_EQ(c3(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(median_pairwise_distance(a), 5.0);
    EXPECT_THROW(build_cost_matrix(a, {{1, 2, 3}}, EuclideanPower{}), InvalidArgument);
}

TEST(MarginalOperator, AdjointPairing) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    const std::size_t m = 5, n = 7;
    DualPotentials beta{std::vector<double>(m), std::vector<double>(n)};
    for (auto& v : beta.beta_src) v = g(rng);
    for (auto& v : beta.beta_dst) v = g(rng);
    Matrix<double> p(m, n);
    for (auto& v : p.flat()) v = g(rng);
    const auto lb = apply_L(beta);
    const auto ltp = apply_L_transpose(p);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) lhs += lb.flat()[k] * p.flat()[k];
    for (std::size_t i = 0; i < m; ++i) rhs += beta.beta_src[i] * ltp.beta_src[i];
    for (std::size_t j = 0; j < n; ++j) rhs += beta.beta_dst[j] * ltp.beta_dst[j];
    EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(Sinkhorn, BalancedTwoBins) {
    Histogram a({0.5, 0.5});
    const auto r = sinkhorn(a, a, l1_equivalent_cost(2), 100.0);
    EXPECT_GE(r.transport_cost, 0.0);
    EXPECT_LE(r.transport_cost, 2.0 * std::log(2.0) / 100.0);
}

TEST(Sinkhorn, ZeroBinsAreDroppedAndRestored) {
    CostMatrix c{Matrix<double>(2, 1)};
    c.entries(0, 0) = 0.7;
    c.entries(1, 0) = 0.1;
    const auto r = sinkhorn(Histogram({1, 0}), Histogram({1}), c, 10.0);
    EXPECT_DOUBLE_EQ(r.plan.entries(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(r.plan.entries(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(r.transport_cost, 0.7);
}

TEST(Sinkhorn, MarginalsAndPlanStructure) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 2 + rng() % 10, n = 2 + rng() % 10;
        auto a = random_unit_histogram(rng, m), b = random_unit_histogram(rng, n);
        auto c = random_cost(rng, m, n);
        const auto r = sinkhorn(a, b, c, 20.0);
        const auto sums = apply_L_transpose(r.plan.entries);
        double res = 0.0;
        for (std::size_t i = 0; i < m; ++i) res += std::abs(sums.beta_src[i] - a[i]);
        for (std::size_t j = 0; j < n; ++j) res += std::abs(sums.beta_dst[j] - b[j]);
        EXPECT_LE(res, 1e-9 + 1e-14);
        // Rank-one structure of P ./ exp(-lambda C) (cross ratios equal one).
        for (std::size_t i = 1; i < m; ++i)
            for (std::size_t j = 1; j < n; ++j) {
                const double k = [&](std::size_t x, std::size_t y) {
                    return r.plan.entries(x, y) / std::exp(-20.0 * c(x, y));
                }(i, j);
                const double k00 = r.plan.entries(0, 0) / std::exp(-20.0 * c(0, 0));
                const double k0j = r.plan.entries(0, j) / std::exp(-20.0 * c(0, j));
                const double ki0 = r.plan.entries(i, 0) / std::exp(-20.0 * c(i, 0));
                EXPECT_NEAR(k * k00 / (k0j * ki0), 1.0, 1e-9);
            }
    }
}

TEST(Sinkhorn, GapBoundAndMonotoneTightening) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 2 + rng() % 15;
        auto a = random_unit_histogram(rng, m), b = random_unit_histogram(rng, m);
        auto c = random_cost(rng, m, m);
        const double exact = mk_exact(a, b, c).cost;
        double prev = std::numeric_limits<double>::infinity();
        SinkhornOptions opt;
        opt.max_iter = 1000000;  // near-degenerate random costs converge slowly at large lambda
        for (double lambda : {10.0, 100.0, 1000.0}) {
            const auto r = sinkhorn(a, b, c, lambda, opt);
            EXPECT_GE(r.transport_cost - exact, -1e-9);
            EXPECT_LE(r.transport_cost - exact, 2.0 * std::log(double(m)) / lambda + 1e-9);
            EXPECT_LE(r.transport_cost, prev + 1e-9);
            prev = r.transport_cost;
        }
    }
}

TEST(Sinkhorn, LogDomainAgreesWithPlain) {
    std::mt19937_64 rng(44);
    auto a = random_unit_histogram(rng, 6), b = random_unit_histogram(rng, 8);
    auto c = random_cost(rng, 6, 8);
    SinkhornOptions plain, logd;
    plain.domain = SinkhornDomain::plain;
    logd.domain = SinkhornDomain::log;
    const auto p = sinkhorn(a, b, c, 25.0, plain);
    const auto l = sinkhorn(a, b, c, 25.0, logd);
    EXPECT_FALSE(p.used_log_domain);
    EXPECT_TRUE(l.used_log_domain);
    EXPECT_NEAR(p.reg_cost, l.reg_cost, 1e-9);
    for (std::size_t k = 0; k < p.plan.entries.size(); ++k)
        EXPECT_NEAR(p.plan.entries.flat()[k], l.plan.entries.flat()[k], 1e-9);
}

TEST(Sinkhorn, Errors) {
    Histogram a({0.5, 0.5});
    CostMatrix c{Matrix<double>(2, 2, 1.0)};
    c.entries(0, 0) = 0.0;
    c.entries(1, 1) = 0.0;
    SinkhornOptions plain;
    plain.domain = SinkhornDomain::plain;
    CostMatrix far = c;
    for (double& v : far.entries.flat()) v += 1.0;
    EXPECT_THROW(sinkhorn(a, a, far, 1000.0, plain), NumericalUnderflow);
    EXPECT_NO_THROW(sinkhorn(a, a, far, 1000.0));
    SinkhornOptions one;
    one.max_iter = 1;
    std::mt19937_64 rng(1);
    const auto h1 = random_unit_histogram(rng, 5), h2 = random_unit_histogram(rng, 5);
    try {
        sinkhorn(h1, h2, l1_equivalent_cost(5), 50.0, one);
        FAIL() << "expected NotConverged";
    } catch (const NotConverged& e) {
        EXPECT_GT(e.residual, 0.0);
    }
    EXPECT_THROW(sinkhorn(a, Histogram({1, 1}), c, 1.0), MassMismatch);
    EXPECT_THROW(sinkhorn(a, a, c, 0.0), InvalidArgument);
}

TEST(Conjugate, ScalarExample) {
    CostMatrix c{Matrix<double>(1, 1, 0.0)};
    DualPotentials beta{{0.0}, {0.0}};
    EXPECT_NEAR(mk_conj_value(beta, c, 1.0, 1.0), std::exp(-1.0), 1e-15);
}

TEST(Conjugate, BranchContinuity) {
    // With a single entry, <q,1> = 1 exactly when lambda (b1 + b2 - c) = 1.
    CostMatrix c{Matrix<double>(1, 1, 0.3)};
    const double lambda = 4.0, n = 7.0;
    DualPotentials beta{{0.15}, {0.4}};
    const double below = mk_conj_value(DualPotentials{{0.15 - 1e-12}, {0.4}}, c, lambda, n);
    const double at = mk_conj_value(beta, c, lambda, n);
    const double above = mk_conj_value(DualPotentials{{0.15 + 1e-12}, {0.4}}, c, lambda, n);
    EXPECT_NEAR(at, n / lambda, 1e-12);
    EXPECT_NEAR(below, n / lambda, 1e-10);
    EXPECT_NEAR(above, n / lambda, 1e-10);
}

TEST(Conjugate, MatchesGridSearchLegendreTransform) {
    // 1x2 cost: alpha = (m; b1, b2) with m = b1 + b2 <= N, plan = [b1 b2].
    CostMatrix c{Matrix<double>(1, 2)};
    c.entries(0, 0) = 0.2;
    c.entries(0, 1) = 0.5;
    const double lambda = 3.0, n = 2.0;
    for (const DualPotentials& beta : {DualPotentials{{0.1}, {-0.2, 0.3}}, DualPotentials{{0.6}, {0.4, 0.2}}}) {
        double best = -std::numeric_limits<double>::infinity();
        const int steps = 1500;
        for (int x = 0; x <= steps; ++x)
            for (int y = 0; x + y <= steps; ++y) {
                const double b1 = n * x / steps, b2 = n * y / steps;
                double v = (b1 + b2) * beta.beta_src[0] + b1 * beta.beta_dst[0] + b2 * beta.beta_dst[1];
                v -= b1 * c(0, 0) + b2 * c(0, 1);
                if (b1 > 0) v -= b1 * std::log(b1 / n) / lambda;
                if (b2 > 0) v -= b2 * std::log(b2 / n) / lambda;
                best = std::max(best, v);
            }
        EXPECT_NEAR(mk_conj_value(beta, c, lambda, n), best, 2e-5);
    }
}

TEST(Conjugate, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> g(0.0, 0.3);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m = 2 + rng() % 5, n = 2 + rng() % 5;
        auto c = random_cost(rng, m, n);
        const double lambda = 5.0, mass = 3.0;
        DualPotentials beta{std::vector<double>(m), std::vector<double>(n)};
        const double shift = trial % 2 == 0 ? -0.6 : 0.8;  // alternate between the two branches
        for (auto& v : beta.beta_src) v = g(rng) + shift;
        for (auto& v : beta.beta_dst) v = g(rng);
        const auto grad = mk_conj_grad(beta, c, lambda, mass);
        double norm = 0.0;
        for (double v : beta.beta_src) norm += v * v;
        for (double v : beta.beta_dst) norm += v * v;
        const double h = 1e-5 * (1.0 + std::sqrt(norm));
        auto fd = [&](std::vector<double>& coord, std::size_t k) {
            const double keep = coord[k];
            coord[k] = keep + h;
            const double up = mk_conj_value(beta, c, lambda, mass);
            coord[k] = keep - h;
            const double down = mk_conj_value(beta, c, lambda, mass);
            coord[k] = keep;
            return (up - down) / (2.0 * h);
        };
        for (std::size_t i = 0; i < m; ++i) {
            const double f = fd(beta.beta_src, i);
            EXPECT_LE(std::abs(f - grad.beta_src[i]), 1e-4 * std::max(1e-3, std::abs(grad.beta_src[i])));
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double f = fd(beta.beta_dst, j);
            EXPECT_LE(std::abs(f - grad.beta_dst[j]), 1e-4 * std::max(1e-3, std::abs(grad.beta_dst[j])));
        }
    }
}

TEST(Conjugate, GradientVanishesForLargeCost) {
    CostMatrix c{Matrix<double>(3, 3, 50.0)};
    DualPotentials beta{{0, 0, 0}, {0, 0, 0}};
    const auto g = mk_conj_grad(beta, c, 10.0, 1.0);
    for (double v : g.beta_src) EXPECT_LT(v, 1e-200);
}

TEST(Conjugate, LipschitzBoundHolds) {
    std::mt19937_64 rng(66);
    std::normal_distribution<double> g(0.0, 0.5);
    const std::size_t m = 4, n = 4;
    auto c = random_cost(rng, m, n);
    const double lambda = 3.0, mass = 2.0;
    double worst = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
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
    EXPECT_LE(worst, mk_conj_lipschitz(lambda, mass) * (1.0 + 1e-9));
    EXPECT_GT(worst, 0.0);
}

TEST(LambertW, KnownValues) {
    EXPECT_EQ(lambert_w(0.0), 0.0);
    EXPECT_NEAR(lambert_w(std::exp(1.0)), 1.0, 1e-15);
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::exp(mid) < 1.0 ? lo : hi) = mid;
    }
    EXPECT_NEAR(lambert_w(1.0), lo, 1e-15);
    EXPECT_NEAR(lambert_w(1.0), 0.567143290, 1e-9);
}

TEST(LambertW, ResidualOverRange) {
    for (double e = -12.0; e <= 12.0; e += 0.01) {
        const double z = std::pow(10.0, e);
        const double w = lambert_w(z);
        EXPECT_GE(w, 0.0);
        EXPECT_LE(std::abs(w * std::exp(w) - z), 1e-12 * std::max(1.0, z)) << "z=" << z;
    }
}

TEST(LambertW, LogFormMatchesDirect) {
    for (double s = -40.0; s <= 40.0; s += 0.37) EXPECT_NEAR(lambert_w_exp(s), lambert_w(std::exp(s)), 1e-12);
    const double w = lambert_w_exp(1e6);
    EXPECT_NEAR(w + std::log(w), 1e6, 1e-8);
    EXPECT_NEAR(lambert_w_scaled(2.0, 3.0), lambert_w(2.0 * std::exp(3.0)), 1e-13);
}

TEST(LambertW, DomainErrors) {
    EXPECT_THROW(lambert_w(-1e-3), DomainError);
    EXPECT_THROW(lambert_w(std::numeric_limits<double>::infinity()), DomainError);
    EXPECT_THROW(lambert_w(std::nan("")), DomainError);
}

TEST(EntropicProx, Examples) {
    EXPECT_NEAR(prox_g_lambda(2.0, 1.0, 1.0, 1.0, 0.0), 1.0, 1e-14);
    EXPECT_LT(prox_g_lambda(-1e4, 1.0, 1.0, 1.0, 0.0), 1e-300);
    EXPECT_GE(prox_g_lambda(-1e4, 1.0, 1.0, 1.0, 0.0), 0.0);
}

TEST(EntropicProx, OptimalityAndMoreau) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double tau = std::pow(10.0, -2.0 + 3.0 * u(rng));
        const double lambda = std::pow(10.0, 3.0 * u(rng));
        const double mass = std::pow(10.0, 4.0 * u(rng));
        const double c = u(rng);
        const double target = -300.0 + 600.0 * u(rng);
        // Choose r so that the shifted exponent equals `target`.
        const double r = tau * ((target + 1.0 - std::log(lambda * mass / tau)) / lambda + c);
        const double out = prox_g_lambda(r, tau, lambda, mass, c);
        ASSERT_GT(out, 0.0);
        const double foc = out - r + tau * (c + (std::log(out / mass) + 1.0) / lambda);
        EXPECT_LE(std::abs(foc) / (1.0 + std::abs(r)), 1e-8);

        // Dual prox by bisection on tau (y - p) + N exp(lambda (y - c) - 1) = 0, in log form.
        const double p = r / tau;
        auto phi = [&](double y) {
            const double ex = lambda * (y - c) - 1.0 + std::log(mass);
            return ex > 700.0 ? std::numeric_limits<double>::infinity() : tau * (y - p) + std::exp(ex);
        };
        double lo = p - 1.0, hi = p;
        while (phi(lo) > 0.0) lo -= 2.0 * (p - lo);
        for (int k = 0; k < 200; ++k) {
            const double mid = 0.5 * (lo + hi);
            (phi(mid) > 0.0 ? hi : lo) = mid;
        }
        const double dual = 0.5 * (lo + hi);
        EXPECT_NEAR(prox_g_lambda_conj(p, tau, lambda, mass, c), dual, 1e-9 * (1.0 + std::abs(p)));
        EXPECT_LE(std::abs(out + tau * dual - r) / (1.0 + std::abs(r)), 1e-8);
    }
}
