#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "biquad/elliptic.hpp"
#include "biquad/nonuniq.hpp"

using namespace biquad;
using namespace biquad::nonuniq;

namespace {

constexpr double pi = std::numbers::pi;

curve::CanonicalTag par13_tag(double k, int m, int n)
{
    double K = elliptic::ellip_K(k);
    return curve::tag_from_shift(curve::ParamFamily::par13, k, 2 * K * m / n);
}

double evald(const RationalQ& r, double c)
{
    return r.num().cast<double>()(c) / r.den().cast<double>()(c);
}

} // namespace

TEST(Chebyshev, RecurrenceMatchesCosine)
{
    for (int n : {0, 1, 2, 5, 12}) {
        PolyD T = chebyshev_T(n).cast<double>();
        for (double t = 0; t < 3; t += 0.37) EXPECT_NEAR(T(std::cos(t)), std::cos(n * t), 1e-12);
    }
    EXPECT_EQ(chebyshev_T(4), (PolyQ{rat(1), rat(0), rat(-8), rat(0), rat(8)}));
}

TEST(Ellipse, QuarterTurnIsTheCircleFactorization)
{
    // T4(x) - T4(y) = 8 (x^2 - y^2)(x^2 + y^2 - 1): both sides have degree <= 4 in each
    // variable, so agreement on a 5 x 5 grid is an identity
    PolyQ T4 = chebyshev_T(4);
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j) {
            rat x(i, 3), y(j + 7, 5);
            rat lhs = T4(x) - T4(y);
            rat rhs = 8 * (x * x - y * y) * (x * x + y * y - 1);
            EXPECT_EQ(lhs, rhs);
        }
    auto s = ellipse_solution(1, 2, 1);
    EXPECT_EQ(s.multiplier, 4);
    EXPECT_LE(s.residual, 1e-12);
}

TEST(Ellipse, ThirdTurnAndHigherLevels)
{
    for (auto [M, N] : {std::pair{1, 3}, {2, 5}, {3, 7}, {2, 4}}) {
        for (int n = 1; n <= 3; ++n) {
            auto s = ellipse_solution(M, N, n);
            EXPECT_LE(s.residual, 1e-8);
            EXPECT_EQ(s.samples, 256);
            ASSERT_EQ(s.probes.size(), 8u);
            for (const auto& p : s.probes) EXPECT_GT(std::abs(p[2]), 1e-6);
        }
    }
    // (2, 4) reduces to (1, 2)
    EXPECT_EQ(ellipse_solution(2, 4, 1).multiplier, 4);
}

TEST(Ellipse, IrrationalAngleRefused)
{
    EXPECT_EQ(ellipse_solution_from_angle(pi / 3, 1).N, 3);
    try {
        (void)ellipse_solution_from_angle(1.0, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.name(), "IrrationalAngle");
    }
    try {
        (void)ellipse_solution(1, 1, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.name(), "DegenerateEllipse");
    }
}

TEST(JacobiMultiplication, SmallCases)
{
    rat k2(1, 3);
    auto R1 = jacobi_multiplication(1, k2);
    EXPECT_EQ(R1, RationalQ(PolyQ{rat(0), rat(1)}));
    // duplication: (c^2 - (1 - c^2)(k'^2 + k^2 c^2)) / (1 - k^2 (1 - c^2)^2)
    rat kp2 = 1 - k2;
    PolyQ sn2{rat(1), rat(0), rat(-1)};
    RationalQ dup(PolyQ{rat(0), rat(0), rat(1)} - sn2 * PolyQ{kp2, rat(0), k2}, PolyQ::constant(rat(1)) - sn2 * sn2 * k2);
    EXPECT_EQ(jacobi_multiplication(2, k2), dup);
    EXPECT_EQ(jacobi_multiplication(3, k2).num().degree(), 9);
}

TEST(JacobiMultiplication, MatchesJacobiOracle)
{
    for (auto [p, q] : {std::pair{1, 2}, {1, 5}, {7, 9}}) {
        rat k2(p, q);
        double k = std::sqrt(k2.get_d());
        for (int n = 1; n <= 6; ++n) {
            auto R = jacobi_multiplication(n, k2);
            for (int i = 0; i < 32; ++i) {
                double z = -2.1 + 0.137 * i;
                auto j = elliptic::jacobi_real(z, k), jn = elliptic::jacobi_real(n * z, k);
                EXPECT_NEAR(evald(R, j.cn.real()), jn.cn.real(), 1e-9) << n << " " << z;
                EXPECT_NEAR(cn_multiple(n, j.cn.real(), k), jn.cn.real(), 1e-9);
            }
        }
    }
    try {
        (void)jacobi_multiplication(max_symbolic_multiplier + 1, rat(1, 2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.name(), "SymbolicOverflow");
    }
}

TEST(BuildSolution, PeriodThreeWitness)
{
    double k = std::sqrt(0.5);
    auto tag = par13_tag(k, 1, 3);
    auto v = john::periodicity_criterion(tag);
    ASSERT_EQ(v.n, 3);
    auto s = build_solution(tag, v, 1);
    EXPECT_TRUE(s.exact);
    EXPECT_EQ(s.multiplier, 6);
    EXPECT_LE(s.residual, 1e-9);
    ASSERT_EQ(s.probes.size(), 8u);
    for (const auto& p : s.probes) EXPECT_GT(std::abs(p[2]), 1e-3);
    // f(x) = -g(x): the witness vanishes on the whole diagonal, which crosses the oval
    for (double x : {-0.5, 0.0, 0.3}) EXPECT_NEAR(s(x, x), 0, 1e-12);
    // the same vanishing from explicit curve points
    auto p = curve::parameterize(tag);
    for (double tau = 0.05; tau < p.line_period; tau += 0.31) {
        auto q = p.point(p.branch_base[0] + p.dir * tau);
        ASSERT_TRUE(q);
        EXPECT_NEAR(s(q->first.real(), q->second.real()), 0, 1e-9);
    }
}

TEST(BuildSolution, LevelsAreIndependent)
{
    for (auto [k, m, n] : {std::tuple{std::sqrt(0.5), 1, 3}, {0.6, 2, 5}, {0.8, 1, 4}}) {
        auto tag = par13_tag(k, m, n);
        auto v = john::periodicity_criterion(tag);
        std::vector<SeparatedSolution> fam;
        for (int level = 1; level <= 3; ++level) {
            fam.push_back(build_solution(tag, v, level));
            EXPECT_LE(fam.back().residual, 1e-8) << m << "/" << n << " level " << level;
        }
        // f2 / f1 is not constant
        double r0 = fam[1].f(0.3 * fam[0].x_scale) / fam[0].f(0.3 * fam[0].x_scale);
        double r1 = fam[1].f(0.7 * fam[0].x_scale) / fam[0].f(0.7 * fam[0].x_scale);
        EXPECT_GT(std::abs(r0 - r1), 1e-3);
        EXPECT_LT(gram_condition(fam), 1e8);
    }
}

TEST(BuildSolution, Gates)
{
    double k = 0.6, K = elliptic::ellip_K(k);
    auto tag = curve::tag_from_shift(curve::ParamFamily::par13, k, 2 * K * 0.3819660112501051);
    auto v = john::periodicity_criterion(tag);
    EXPECT_FALSE(v.rational);
    try {
        (void)build_solution(tag, v, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.name(), "NotCertifiedPeriodic");
    }
    auto bax = curve::tag_from_shift(curve::ParamFamily::Bax_par, 0.5, cplx(0.4, 1.0));
    try {
        (void)build_solution(bax, john::periodicity_criterion(bax), 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.name(), "UnsupportedFamily");
    }
}

TEST(Uniqueness, Verdicts)
{
    double k = std::sqrt(0.5);
    auto tag = par13_tag(k, 1, 3);
    auto r = uniqueness_verdict(curve::euler_baxter(tag.a, tag.b, tag.c));
    EXPECT_EQ(r.verdict, Verdict::nonunique);
    EXPECT_EQ(r.n, 3);
    ASSERT_TRUE(r.witness);
    EXPECT_LE(r.witness->residual, 1e-9);

    // a scaled copy keeps the witness on the original coordinates
    double s = 1.7;
    auto scaled = curve::euler_baxter(tag.a * s * s, tag.b * s * s, -std::pow(s, 4));
    auto rs = uniqueness_verdict(scaled);
    ASSERT_TRUE(rs.witness);
    EXPECT_LE(rs.witness->residual, 1e-9);

    double g = (std::sqrt(5.0) - 1) / 2;
    auto gt = curve::tag_from_shift(curve::ParamFamily::par13, k, 2 * elliptic::ellip_K(k) * g);
    auto rg = uniqueness_verdict(curve::euler_baxter(gt.a, gt.b, gt.c));
    EXPECT_EQ(rg.verdict, Verdict::no_period);
    EXPECT_FALSE(rg.witness);

    EXPECT_EQ(uniqueness_verdict(curve::euler_baxter(2, 0.5, 1)).verdict, Verdict::empty_curve);
}
