#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "biquad/pellabel.hpp"

using namespace biquad;
using namespace biquad::pell;

namespace {

PolyQ q(std::initializer_list<int> asc)
{
    std::vector<rat> c;
    for (int v : asc) c.emplace_back(v);
    return PolyQ(std::move(c));
}

PolyQ random_quartic(std::mt19937_64& rng, bool even = false)
{
    std::uniform_int_distribution<int> U(-9, 9), D(1, 7);
    std::vector<rat> c(5);
    for (int i = 0; i < 5; ++i) {
        c[i] = rat(U(rng), D(rng));
        c[i].canonicalize();
    }
    c[4] = rat(D(rng));
    if (even) c[1] = c[3] = 0;
    return PolyQ(std::move(c));
}

void expect_error(const char* name, auto&& fn)
{
    try {
        fn();
        ADD_FAILURE() << "expected " << name;
    } catch (const Error& e) {
        EXPECT_EQ(e.name(), name);
    }
}

} // namespace

TEST(PellAbel, WorkedExamples)
{
    auto s = pell_abel_solve(q({2, 0, -2, 0, 1}), 8);
    EXPECT_EQ(s.P, q({-1, 0, 1}));
    EXPECT_EQ(s.Q, q({1}));
    EXPECT_EQ(s.L, -1);
    EXPECT_TRUE(verify(s));

    auto t = pell_abel_solve(q({-1, 0, 0, 0, 1}), 8);
    EXPECT_EQ(t.P, q({0, 0, 1}));
    EXPECT_EQ(t.Q, q({1}));
    EXPECT_EQ(t.L, 1);
    EXPECT_TRUE(verify(t));
}

TEST(PellAbel, CompositionDoublesDegree)
{
    for (const auto& R : {q({2, 0, -2, 0, 1}), q({-1, 0, 0, 0, 1}), q({0, 4, 6, 4, 1})}) {
        auto s = pell_abel_solve(R, 8);
        auto c = compose(s);
        EXPECT_TRUE(verify(c));
        EXPECT_EQ(c.P.degree(), 2 * s.P.degree());
        EXPECT_EQ(c.L, s.L * s.L);
        auto cc = compose(c);
        EXPECT_TRUE(verify(cc));
    }
    // t^4 - 1: the degree-4 solution (2t^4 - 1, 2t^2)
    auto c = compose(pell_abel_solve(q({-1, 0, 0, 0, 1}), 8));
    EXPECT_EQ(c.P, q({-1, 0, 0, 0, 2}));
    EXPECT_EQ(c.Q, q({0, 0, 2}));
}

TEST(PellAbel, NonMonicInputIsNormalized)
{
    // 4 t^4 - 4 = 4 (t^4 - 1)
    auto s = pell_abel_solve(q({-4, 0, 0, 0, 4}), 8);
    EXPECT_EQ(s.lead, 4);
    EXPECT_EQ(s.R, q({-1, 0, 0, 0, 1}));
    EXPECT_TRUE(verify(s));
}

TEST(PellAbel, BudgetAndDegenerateInputs)
{
    expect_error("BudgetExhausted", [] { (void)pell_abel_solve(q({1, 0, 0, 1, 1}), 8); });
    expect_error("PerfectSquareR", [] { (void)pell_abel_solve(q({1, 0, 2, 0, 1}), 8); });
    expect_error("DegreeMismatch", [] { (void)pell_abel_solve(q({1, 0, 1}), 8); });
}

TEST(PellAbel, EveryReturnedSolutionVerifies)
{
    std::mt19937_64 rng(13);
    int solved = 0;
    for (int it = 0; it < 60; ++it) {
        PolyQ R = random_quartic(rng, it % 2 == 0);
        try {
            auto s = pell_abel_solve(R, 6);
            EXPECT_TRUE(verify(s));
            EXPECT_LE(s.Q.degree(), 6);
            ++solved;
        } catch (const Error& e) {
            EXPECT_EQ(e.name(), "BudgetExhausted");
        }
    }
    // every even quartic has P = t^2 + p/2, Q = 1
    EXPECT_GE(solved, 30);
}

TEST(PellAbel, ShiftInvariance)
{
    std::mt19937_64 rng(3);
    std::vector<PolyQ> cases{q({2, 0, -2, 0, 1}), q({0, 4, 6, 4, 1}), q({1, 0, 0, 1, 1})};
    for (int i = 0; i < 10; ++i) cases.push_back(random_quartic(rng, i % 2 == 0));
    for (const auto& R : cases) {
        for (rat lam : {rat(1), rat(-3, 2), rat(5, 7)}) {
            PolyQ Rs = R.compose(PolyQ{lam, rat(1)});
            bool a = true, b = true;
            try {
                (void)pell_abel_solve(R, 6);
            } catch (const Error&) {
                a = false;
            }
            try {
                (void)pell_abel_solve(Rs, 6);
            } catch (const Error&) {
                b = false;
            }
            EXPECT_EQ(a, b);
        }
    }
}

TEST(Malyshev, GammaOneVanishesForEvenQuartics)
{
    std::mt19937_64 rng(7);
    for (int it = 0; it < 20; ++it) {
        PolyQ R = random_quartic(rng, true);
        EXPECT_EQ(malyshev_gamma(R, 1), 0);
    }
    EXPECT_EQ(malyshev_gamma(q({-1, 0, 0, 0, 1}), 1), 0);
}

TEST(Malyshev, ComposedSolutionIndexing)
{
    // (t + 1)^4 - 1 has the solution P = (t+1)^2 of degree 2 and its composite of degree 4;
    // only Gamma_1 vanishes
    PolyQ R = q({0, 4, 6, 4, 1});
    EXPECT_EQ(malyshev_gamma(R, 1), 0);
    EXPECT_EQ(malyshev_gamma(R, 2), rat(-1, 4));
    EXPECT_EQ(malyshev_gamma(q({-1, 0, 0, 0, 1}), 2), rat(-1, 4));
}

TEST(Malyshev, FloatMatchesExact)
{
    std::mt19937_64 rng(19);
    for (int it = 0; it < 20; ++it) {
        PolyQ R = random_quartic(rng);
        PolyD Rd = R.cast<double>();
        for (int k = 1; k <= 4; ++k) {
            double ex = malyshev_gamma(R, k).get_d(), fl = malyshev_gamma(Rd, k);
            EXPECT_LE(std::abs(ex - fl), 1e-9 * std::max(1.0, std::abs(ex))) << it << " " << k;
        }
    }
}

TEST(Malyshev, VanishingIndexMatchesSolverDegree)
{
    // the minimal solution has deg P = k + 1 exactly when Gamma_k is the first vanishing one
    std::vector<PolyQ> cases{q({2, 0, -2, 0, 1}), q({-1, 0, 0, 0, 1}), q({0, 4, 6, 4, 1})};
    for (const auto& c : even_period_suite()) {
        auto F = poncelet::cayley_polynomial(c.A, c.B);
        cases.push_back(shift_to_root(bridge_cubic_to_quartic(F)).R);
    }
    for (const auto& R : cases) {
        auto s = pell_abel_solve(R, 8);
        int k0 = 0;
        for (int k = 1; k <= 6 && !k0; ++k)
            if (malyshev_gamma(s.R, k) == 0) k0 = k;
        EXPECT_EQ(k0, s.P.degree() - 1);
    }
    // no solution of small degree: no small vanishing index
    PolyQ R = q({1, 0, 0, 1, 1});
    for (int k = 1; k <= 6; ++k) EXPECT_NE(malyshev_gamma(R, k), 0);
}

TEST(BridgeMaps, CubicQuarticRoundTrip)
{
    PolyQ F = q({3, -1, 2, 5});
    PolyQ R = bridge_cubic_to_quartic(F);
    EXPECT_EQ(R, q({0, 5, 2, -1, 3}));
    EXPECT_EQ(quartic_to_cubic(R), F);
    expect_error("DegenerateQuartic", [] { (void)bridge_cubic_to_quartic(q({0, 0, 0, 1})); });
    expect_error("NonzeroConstant", [] { (void)quartic_to_cubic(q({1, 0, 0, 0, 1})); });
}

TEST(BridgeMaps, ShiftToRoot)
{
    // (t - 2)(t + 1)(t^2 + 1)
    PolyQ R = PolyQ{rat(-2), rat(1)} * PolyQ{rat(1), rat(1)} * PolyQ{rat(1), rat(0), rat(1)};
    auto s = shift_to_root(R);
    EXPECT_EQ(s.lambda, -1);
    EXPECT_EQ(s.R[0], 0);
    EXPECT_EQ(s.R, R.compose(q({-1, 1})));
    auto id = shift_to_root(q({0, 4, 6, 4, 1}));
    EXPECT_EQ(id.lambda, 0);
    expect_error("NoRealRoot", [] { (void)shift_to_root(q({1, 0, 0, 0, 1})); });
    // irrational roots only
    expect_error("NoRealRoot", [] { (void)shift_to_root(q({-2, 0, 0, 0, 1})); });
    auto d = shift_to_root(PolyD{-2, 0, 0, 0, 1});
    EXPECT_NEAR(d.lambda, -std::pow(2.0, 0.25), 1e-12);
    EXPECT_NEAR(d.R[0], 0, 1e-12);
}

TEST(Abel, IntegralIdentity)
{
    auto s = pell_abel_solve(q({-1, 0, 0, 0, 1}), 8);
    EXPECT_LE(abel_integral_check(s, 1.5, 2.5), 1e-8);
    EXPECT_EQ(abel_integral_check(s, 2.0, 2.0), 0);
    auto c = compose(s);
    EXPECT_LE(abel_integral_check(c, 1.1, 4.0), 1e-8);
    // L = -1 works with absolute values
    auto m = pell_abel_solve(q({2, 0, -2, 0, 1}), 8);
    EXPECT_LE(abel_integral_check(m, -3.0, 3.0), 1e-8);
    expect_error("IntegrandSingular", [&] { (void)abel_integral_check(s, 0.5, 2.0); });
    // Q = 2 t^2 of the composite vanishes at 0, R < 0 there anyway
    expect_error("IntegrandSingular", [&] { (void)abel_integral_check(c, -0.5, 0.5); });
}

TEST(PonceletBridge, EvenPeriodSuiteAlwaysSolves)
{
    auto suite = even_period_suite();
    ASSERT_EQ(suite.size(), 10u);
    int solved = 0;
    for (const auto& c : suite) {
        auto r = poncelet_pell_bridge_test(c.A, c.B, 12);
        ASSERT_TRUE(r.period);
        EXPECT_EQ(*r.period, c.period);
        EXPECT_TRUE(r.applicable);
        EXPECT_TRUE(r.solved);
        if (!r.solved) continue;
        ++solved;
        EXPECT_TRUE(verify(*r.solution));
        // period 2p: deg P = p and Gamma_{p-1} vanishes
        EXPECT_EQ(r.solution->P.degree(), c.period / 2);
        if (c.period > 2) EXPECT_EQ(malyshev_gamma(r.R.monic(), c.period / 2 - 1), 0);
    }
    EXPECT_EQ(solved, 10);
}

TEST(PonceletBridge, OddAndAperiodic)
{
    auto A = poncelet::to_rational(poncelet::Conic::circle(0, 0, 1).M);
    auto r = poncelet_pell_bridge_test(A, poncelet::to_rational(poncelet::Conic::circle(0, 0, 2).M), 12);
    ASSERT_TRUE(r.period);
    EXPECT_EQ(*r.period, 3);
    EXPECT_FALSE(r.applicable);
    EXPECT_NE(r.note.find("odd period"), std::string::npos);

    auto a = poncelet_pell_bridge_test(A, poncelet::to_rational(poncelet::Conic::circle(0, 0, 3).M), 12);
    EXPECT_FALSE(a.period);
    EXPECT_FALSE(a.solved);
    EXPECT_TRUE(a.budget_exhausted);
}
