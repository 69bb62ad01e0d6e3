#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/jacobi_elliptic.hpp>
#include <gtest/gtest.h>

#include "biquad/elliptic.hpp"

using namespace biquad;
using namespace biquad::elliptic;

namespace {

double K_quadrature(double k)
{
    // t = sin(phi) removes the endpoint singularity
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate([k](double phi) { return 1.0 / std::sqrt(1.0 - k * k * std::sin(phi) * std::sin(phi)); }, 0.0,
                        std::numbers::pi / 2);
}

} // namespace

TEST(EllipK, DegenerateAndOracle)
{
    EXPECT_NEAR(ellip_K(0.0), std::numbers::pi / 2, 1e-15);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(ellip_K(s), ellip_K(std::sqrt(1.0 - s * s)), 1e-13);
    EXPECT_NEAR(ellip_K(s), 1.85407467730137191843385, 1e-13);
    // frozen high-precision value and a quadrature of the defining integral
    EXPECT_NEAR(ellip_K(0.8), 1.995302777664729403820323, 1e-13);
    EXPECT_NEAR(ellip_K(0.8), K_quadrature(0.8), 1e-12 * ellip_K(0.8));
    EXPECT_THROW(ellip_K(1.0), Error);
}

TEST(Jacobi, SpecialValues)
{
    auto t = *jacobi(0.0, 0.7);
    EXPECT_NEAR(std::abs(t.sn), 0.0, 1e-15);
    EXPECT_NEAR(t.cn.real(), 1.0, 1e-15);
    EXPECT_NEAR(t.dn.real(), 1.0, 1e-15);
    for (double k : {0.1, 0.5, 0.9, 0.99}) {
        auto m = EllipticModulus::from_k(k);
        EXPECT_NEAR(jacobi(m.K, k)->sn.real(), 1.0, 1e-13) << k;
    }
    auto z = *jacobi(cplx(0.4, 0.3), 0.0);
    EXPECT_NEAR(std::abs(z.sn - std::sin(cplx(0.4, 0.3))), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(z.cn - std::cos(cplx(0.4, 0.3))), 0.0, 1e-15);
}

TEST(Jacobi, AgreesWithBoostOnRealLine)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ku(0.01, 0.99), uu(-20, 20);
    for (int i = 0; i < 200; ++i) {
        double k = ku(rng), u = uu(rng);
        double cn, dn;
        double sn = boost::math::jacobi_elliptic(k, u, &cn, &dn);
        auto t = jacobi_real(u, k);
        EXPECT_NEAR(t.sn.real(), sn, 1e-12);
        EXPECT_NEAR(t.cn.real(), cn, 1e-12);
        EXPECT_NEAR(t.dn.real(), dn, 1e-12);
    }
}

TEST(Jacobi, IdentitiesOnComplexGrid)
{
    for (double k : {0.2, 0.6, 0.8, 0.95}) {
        auto m = EllipticModulus::from_k(k);
        for (int i = -8; i <= 8; ++i) {
            for (int j = -8; j <= 8; ++j) {
                cplx u(i * m.K / 4.1, j * m.Kp / 4.3);
                auto t = jacobi(u, k);
                if (!t) continue;
                // identities are checked relative to the size of the terms
                double sc = std::max(1.0, std::norm(t->sn));
                EXPECT_LT(std::abs(t->sn * t->sn + t->cn * t->cn - 1.0) / sc, 1e-12);
                EXPECT_LT(std::abs(t->dn * t->dn + k * k * t->sn * t->sn - 1.0) / sc, 1e-12);
                auto p = jacobi(u + 4.0 * m.K, k);
                ASSERT_TRUE(p);
                EXPECT_LT(std::abs(p->sn - t->sn), 1e-11 * std::max(1.0, std::abs(t->sn)));
            }
        }
    }
}

TEST(Jacobi, SplitAgreesWithThetaRoute)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uu(-1, 1);
    for (double k : {0.3, 0.6, 0.9}) {
        auto m = EllipticModulus::from_k(k);
        for (int i = 0; i < 100; ++i) {
            cplx u(uu(rng) * 2 * m.K, uu(rng) * 0.9 * m.Kp);
            auto a = jacobi(u, k);
            auto b = jacobi_theta(u, k);
            ASSERT_TRUE(a && b);
            EXPECT_LT(std::abs(a->sn - b->sn), 1e-11 * std::max(1.0, std::abs(a->sn)));
            EXPECT_LT(std::abs(a->cn - b->cn), 1e-11 * std::max(1.0, std::abs(a->cn)));
            EXPECT_LT(std::abs(a->dn - b->dn), 1e-11 * std::max(1.0, std::abs(a->dn)));
        }
    }
}

TEST(Jacobi, PoleMarker)
{
    auto m = EllipticModulus::from_k(0.6);
    EXPECT_FALSE(jacobi(cplx(0, m.Kp), 0.6).has_value());
    EXPECT_FALSE(jacobi(cplx(2 * m.K, 3 * m.Kp), 0.6).has_value());
    EXPECT_TRUE(jacobi(cplx(0.1, m.Kp), 0.6).has_value());
    // ns vanishes at the pole of sn
    auto ns = jacobi_ratio("ns", cplx(0, m.Kp), 0.6);
    ASSERT_TRUE(ns);
    EXPECT_NEAR(std::abs(*ns), 0.0, 1e-14);
}

TEST(JacobiRatio, Values)
{
    EXPECT_NEAR(std::abs(*jacobi_ratio("sc", 0.0, 0.6)), 0.0, 1e-15);
    auto m = EllipticModulus::from_k(0.6);
    EXPECT_NEAR(jacobi_ratio("ns", m.K, 0.6)->real(), 1.0, 1e-13);
    EXPECT_NEAR(jacobi_ratio("sc", 0.7, 0.0)->real(), std::tan(0.7), 1e-14);
    EXPECT_FALSE(jacobi_ratio("ns", 0.0, 0.6).has_value());
}

TEST(InvertSc, Cases)
{
    EXPECT_NEAR(invert_sc_min_positive(std::tan(0.3), 0.0), 0.3, 1e-14);
    EXPECT_LT(invert_sc_min_positive(1e-9, 0.5), 1e-8);
    // bisection oracle on sc over (0, K)
    const double k = 0.6;
    auto m = EllipticModulus::from_k(k);
    double lo = 0, hi = m.K * (1 - 1e-12);
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (jacobi_ratio("sc", mid, k)->real() < 1.0) lo = mid; else hi = mid;
    }
    double th = invert_sc_min_positive(1.0, k);
    EXPECT_NEAR(th, 0.5 * (lo + hi), 1e-12);
    EXPECT_NEAR(th, 0.8135192083614769085545352, 1e-12);
    EXPECT_NEAR(jacobi_ratio("sc", th, k)->real(), 1.0, 1e-12);
    EXPECT_THROW(invert_sc_min_positive(-1.0, k), Error);
}

class WeierstrassTest : public ::testing::TestWithParam<std::pair<double, double>> {};

TEST_P(WeierstrassTest, DifferentialEquationAndDerivatives)
{
    auto [g2, g3] = GetParam();
    auto d = WeierstrassData::from_invariants(g2, g3);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 40; ++i) {
        cplx z(u(rng), u(rng));
        if (lattice_distance(z, d) < 1e-2) continue;
        cplx P = wp(z, d), Pp = wp_prime(z, d);
        cplx rhs = 4.0 * P * P * P - d.g2 * P - d.g3;
        double scale = std::max({std::norm(Pp), std::abs(4.0 * P * P * P), 1.0});
        EXPECT_LT(std::abs(Pp * Pp - rhs) / scale, 1e-9);
        // derivative checks by central differences
        const double h = 1e-5;
        cplx dzeta = (w_zeta(z + h, d) - w_zeta(z - h, d)) / (2 * h);
        EXPECT_LT(std::abs(dzeta + P) / std::max(1.0, std::abs(P)), 1e-7);
        cplx dlogs = (std::log(w_sigma(z + h, d)) - std::log(w_sigma(z - h, d))) / (2 * h);
        cplx ze = w_zeta(z, d);
        EXPECT_LT(std::abs(dlogs - ze) / std::max(1.0, std::abs(ze)), 1e-7);
        // periodicity, oddness
        EXPECT_LT(std::abs(wp(z + 2.0 * d.omega1, d) - P), 1e-9 * std::max(1.0, std::abs(P)));
        EXPECT_LT(std::abs(wp(z + 2.0 * d.omega3, d) - P), 1e-9 * std::max(1.0, std::abs(P)));
        EXPECT_LT(std::abs(w_zeta(-z, d) + ze), 1e-12 * std::max(1.0, std::abs(ze)));
        // duplication
        cplx dup = 0.25 * std::pow((12.0 * P * P - d.g2) / (2.0 * Pp), 2) - 2.0 * P;
        cplx P2 = wp(2.0 * z, d);
        if (lattice_distance(2.0 * z, d) > 1e-2)
            EXPECT_LT(std::abs(P2 - dup) / std::max(1.0, std::abs(P2)), 1e-8);
    }
    EXPECT_LT(std::abs(wp(cplx(1e-3, 0), d) * 1e-6 - 1.0), 1e-5);
}

INSTANTIATE_TEST_SUITE_P(Invariants, WeierstrassTest,
                         ::testing::Values(std::pair{2.0, 1.0}, std::pair{4.0, -1.0}, std::pair{-3.0, 2.0},
                                           std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{10.0, 3.0}));

TEST(Weierstrass, SpecialLattices)
{
    auto eq = WeierstrassData::from_invariants(0.0, 1.0);
    cplx r = eq.omega3 / eq.omega1;
    // equianharmonic: ratio is exp(i pi/3) or exp(2 i pi/3) in the reduced basis
    EXPECT_NEAR(std::abs(r), 1.0, 1e-10);
    EXPECT_NEAR(std::abs(r.real()), 0.5, 1e-10);
    auto le = WeierstrassData::from_invariants(1.0, 0.0);
    cplx s = le.omega3 / le.omega1;
    EXPECT_NEAR(s.real(), 0.0, 1e-10);
    EXPECT_NEAR(s.imag(), 1.0, 1e-10);
    EXPECT_THROW(WeierstrassData::from_invariants(3.0, 1.0), Error);
}

TEST(Weierstrass, RoundTrip)
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 50; ++i) {
        cplx g2(u(rng), u(rng)), g3(u(rng), u(rng));
        auto [w1, w3] = periods_from_invariants(g2, g3);
        auto [h2, h3] = invariants_from_periods(w1, w3);
        EXPECT_LT(std::abs(h2 - g2) / std::abs(g2), 1e-9);
        EXPECT_LT(std::abs(h3 - g3) / std::abs(g3), 1e-9);
    }
}
