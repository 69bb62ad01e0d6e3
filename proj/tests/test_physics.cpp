#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "biquad/johnmap.hpp"
#include "biquad/physics.hpp"

using namespace biquad;
using namespace biquad::physics;

namespace {

template <class F>
std::string error_name(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.name();
    }
    return "";
}

TodaParams real_toda()
{
    TodaParams tp;
    tp.wdata = elliptic::WeierstrassData::from_invariants(4.0, 1.0);
    tp.omega = 0.7;
    tp.p = 0.37;
    tp.r = tp.wdata.omega3;
    return tp;
}

} // namespace

TEST(XY, BothModesAreStationary)
{
    for (double W : {0.3, 0.8, -0.3, -0.8, 0.1, 0.95}) {
        auto c = xy_static(2, W, 12, 0.3);
        EXPECT_EQ(c.mode, std::abs(W) < 0.5 ? 1 : 2) << W;
        EXPECT_EQ(c.staggered, W < 0);
        EXPECT_LE(c.stationarity_residual(), 1e-9) << W;
        EXPECT_LE(c.norm_defect(), 1e-12);
        for (double w : c.integral_values()) EXPECT_NEAR(w, W, 1e-10) << W;
    }
}

TEST(XY, ScalarProductIsNotTheIntegral)
{
    // (r_n, J r_{n+1}) drifts along the chain while (r_n, J^-1 r_{n+1}) stays put
    auto c = xy_static(3, 0.2, 10, 0.1);
    double lo = 1e9, hi = -1e9;
    for (std::size_t n = 0; n + 1 < c.spins.size(); ++n) {
        double v = c.spins[n][0] * c.spins[n + 1][0] + c.j * c.spins[n][1] * c.spins[n + 1][1];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_GT(hi - lo, 1e-2);
}

TEST(XY, Errors)
{
    EXPECT_EQ(error_name([] { (void)xy_static(2, 0.5, 8); }), "ModeBoundary");
    EXPECT_EQ(error_name([] { (void)xy_static(2, 0.0, 8); }), "IrregularChain");
    EXPECT_EQ(error_name([] { (void)xy_static(1, 0.3, 8); }), "InvalidCoupling");
    EXPECT_EQ(error_name([] { (void)xy_static(2, 1.0, 8); }), "InvalidIntegral");
    EXPECT_EQ(error_name([] { (void)xy_static(2, 0.3, 0); }), "InvalidLength");
    EXPECT_EQ(error_name([] { (void)xy_closure(2, 6, 2); }), "InvalidWinding");
    EXPECT_EQ(error_name([] { (void)xy_closure(2, 6, 6); }), "InvalidWinding");
}

TEST(XY, ClosedChains)
{
    auto cl = xy_closure(2, 6, 1);
    auto ch = xy_static(2, cl.W, 6, 0.1);
    EXPECT_LE(ch.closure_defect(), 1e-8);
    EXPECT_NEAR(ch.q, cl.q, 1e-9);
    // m1 / N in (1/4, 3/4) puts q past K, so W < 0 and the chain is staggered
    for (auto [N, m] : {std::pair{5, 2}, {7, 3}, {8, 3}, {7, 2}}) {
        auto c = xy_closure(2.5, N, m);
        auto x = xy_static(2.5, c.W, N, 0.2);
        EXPECT_LE(x.closure_defect(), 1e-8) << N << "/" << m;
        if (4 * m > N && 4 * m < 3 * N) EXPECT_LT(c.W, 0) << N << "/" << m;
    }
}

TEST(XY, GodographIsEulerBaxter)
{
    for (double W : {0.3, 0.7, -0.3}) {
        const double j = 2;
        auto c = xy_static(j, W, 40, 0.37);
        auto eb = xy_eb_curve(j, W);
        std::vector<std::pair<double, double>> pts;
        std::vector<double> u;
        for (const auto& r : c.spins) u.push_back(stereographic(r));
        for (std::size_t n = 0; n + 1 < u.size(); ++n) {
            EXPECT_LE(std::abs(curve::residual(eb, u[n], u[n + 1])), 1e-10) << W << " " << n;
            pts.emplace_back(u[n], u[n + 1]);
        }
        auto fit = fit_biquadratic(pts);
        EXPECT_LE(fit.residual, 1e-8);
        EXPECT_LE(curve_distance(fit.c, eb), 1e-6) << W;

        // T moves the pair two sites along the chain, in one direction or the other
        for (std::size_t n = 3; n + 4 < u.size(); n += 5) {
            auto p = john::make_point(eb, u[n], u[n + 1]);
            auto t = john::john_T(eb, p);
            double fwd = std::hypot(t.x.value() - u[n + 2], t.y.value() - u[n + 3]);
            double bwd = std::hypot(t.x.value() - u[n - 2], t.y.value() - u[n - 1]);
            EXPECT_LE(std::min(fwd, bwd), 1e-7) << W << " " << n;
        }
    }
}

TEST(Toda, FormsAndShift)
{
    auto tp = real_toda();
    for (int n = -3; n <= 3; ++n)
        for (double t : {0.1, 0.9, 2.3}) {
            auto s = toda_eval(tp, n, t);
            EXPECT_LE(std::abs(s.u - s.u_sigma), 1e-10 * (1 + std::abs(s.u)));
            // u_n(t) = u_{n+1}(t + p / omega)
            auto s1 = toda_eval(tp, n + 1, t + (tp.p / tp.omega).real());
            EXPECT_LE(std::abs(s.u - s1.u), 1e-10 * (1 + std::abs(s.u)));
        }
    auto tl = tp;
    tl.lambda = 0.25;
    auto a = toda_eval(tp, 2, 0.4), b = toda_eval(tl, 2, 0.4);
    EXPECT_NEAR(std::abs(a.b - b.b - 0.25), 0, 1e-14);
    EXPECT_EQ(a.u, b.u);
}

TEST(Toda, EquationsOfMotion)
{
    auto tp = real_toda();
    auto r = toda_verify(tp, -4, 4, 0.4);
    EXPECT_LE(r.b, 1e-6);
    EXPECT_LE(r.u, 1e-6);
    EXPECT_LE(r.forms, 1e-10);
    EXPECT_FALSE(r.half_period);
    // central differences: halving h quarters the residual
    auto r1 = toda_verify(tp, -2, 2, 0.4, 1e-2), r2 = toda_verify(tp, -2, 2, 0.4, 5e-3);
    double ratio = std::max(r1.b, r1.u) / std::max(r2.b, r2.u);
    EXPECT_NEAR(ratio, 4, 0.2);

    // a complex lattice with a complex shift
    TodaParams tc;
    tc.wdata = elliptic::WeierstrassData::from_periods(cplx(1.0, 0.0), cplx(0.3, 0.9));
    tc.omega = cplx(0.8, 0.2);
    tc.p = cplx(0.41, 0.17);
    tc.r = cplx(0.1, 0.3);
    tc.lambda = cplx(0.5, -0.1);
    auto rc = toda_verify(tc, -3, 3, 0.25);
    EXPECT_LE(rc.b, 1e-6);
    EXPECT_LE(rc.u, 1e-6);
}

TEST(Toda, Degeneracies)
{
    auto tp = real_toda();
    auto bad = tp;
    bad.p = 2.0 * tp.wdata.omega1;
    EXPECT_EQ(error_name([&] { (void)toda_eval(bad, 0, 0.3); }), "DegenerateShift");
    auto pole = tp;
    pole.r = 0;
    EXPECT_EQ(error_name([&] { (void)toda_eval(pole, 0, 0.0); }), "LatticePole");
    auto half = tp;
    half.p = tp.wdata.omega1;
    auto h = toda_verify(half, 0, 2, 0.3);
    EXPECT_TRUE(h.half_period);
    auto a = toda_eval(half, 0, 0.3), b = toda_eval(half, 2, 0.3);
    EXPECT_LE(std::abs(a.u - b.u), 1e-9 * (1 + std::abs(a.u)));
}

TEST(Toda, PhasePortrait)
{
    auto tp = real_toda();
    auto pp = toda_phase_portrait(tp, 64);
    EXPECT_EQ(pp.points.size(), 64u);
    EXPECT_LE(pp.fit.residual, 1e-7);
    EXPECT_LE(pp.fit.symmetry, 1e-6);
    EXPECT_LE(pp.wp_distance, 1e-6);

    // a shift p = 2 omega1 m1 / N closes the lattice: u_{n+N} = u_n
    auto per = tp;
    const int N = 7, m1 = 2;
    per.p = 2.0 * tp.wdata.omega1 * double(m1) / double(N);
    for (int n = -2; n <= 2; ++n) {
        auto a = toda_eval(per, n, 0.35), b = toda_eval(per, n + N, 0.35);
        EXPECT_LE(std::abs(a.u - b.u), 1e-9 * (1 + std::abs(a.u)));
    }
    EXPECT_LE(toda_phase_portrait(per, 48).fit.residual, 1e-7);

    auto cplx_lattice = tp;
    cplx_lattice.r = cplx(0.2, 0.3); // off both real lines
    EXPECT_EQ(error_name([&] { (void)toda_phase_portrait(cplx_lattice, 32); }), "ComplexPortrait");
}

TEST(Fit, ChaoticOrbitIsNotBiquadratic)
{
    // consecutive pairs of a logistic orbit lie on y = 4x(1 - x), which is biquadratic;
    // the Henon map x' = 1 - 1.4 x^2 + y has no such invariant curve
    std::vector<std::pair<double, double>> pts;
    double x = 0.1, y = 0.2;
    for (int i = 0; i < 300; ++i) {
        double nx = 1 - 1.4 * x * x + y;
        y = 0.3 * x;
        x = nx;
        if (i >= 100) pts.emplace_back(x, y);
    }
    auto fit = fit_biquadratic(pts);
    EXPECT_GT(fit.residual, 1e-3);
    EXPECT_GT(fit.sigma_ratio, 1e-4);

    std::vector<std::pair<double, double>> few(5, {0.1, 0.2});
    EXPECT_EQ(error_name([&] { (void)fit_biquadratic(few); }), "RankDeficientFit");
}
