#include "biquad/physics.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

namespace biquad::physics {

using elliptic::jacobi_real;

namespace {

using Bi = std::array<std::array<double, 3>, 3>;

Bi mul(const Bi& p, const Bi& q)
{
    Bi r{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a + i < 3; ++a)
                for (int b = 0; b + k < 3; ++b) r[i + a][k + b] += p[i][k] * q[a][b];
    return r;
}

double frob(const curve::Curve& c)
{
    double s = 0;
    for (const auto& r : c.a)
        for (double v : r) s += v * v;
    return std::sqrt(s);
}

double real_checked(cplx v, const char* what)
{
    if (std::abs(v.imag()) > 1e-9 * std::max(1.0, std::abs(v)))
        throw invalid("ComplexPortrait", std::string(what) + " is not real");
    return v.real();
}

} // namespace

// ---------------------------------------------------------------------------

double XYChain::stationarity_residual() const
{
    double r = 0;
    for (int n = 1; n + 1 < (int)spins.size(); ++n) {
        double sx = spins[n - 1][0] + spins[n + 1][0], sy = spins[n - 1][1] + spins[n + 1][1];
        r = std::max(r, std::abs(spins[n][0] * j * sy - spins[n][1] * sx));
    }
    return r;
}

std::vector<double> XYChain::integral_values() const
{
    std::vector<double> w;
    for (std::size_t n = 0; n + 1 < spins.size(); ++n)
        w.push_back(spins[n][0] * spins[n + 1][0] + spins[n][1] * spins[n + 1][1] / j);
    return w;
}

double XYChain::norm_defect() const
{
    double d = 0;
    for (const auto& s : spins) d = std::max(d, std::abs(std::hypot(s[0], s[1]) - 1));
    return d;
}

double XYChain::closure_defect() const
{
    return std::hypot(spins.front()[0] - spins.back()[0], spins.front()[1] - spins.back()[1]);
}

XYChain xy_static(double j, double W, int N, double theta)
{
    if (!(j > 1)) throw invalid("InvalidCoupling", "j > 1");
    if (!(std::abs(W) < 1)) throw invalid("InvalidIntegral", "|W| < 1");
    if (N < 1) throw invalid("InvalidLength", "N >= 1");
    const double aw = std::abs(W), ij2 = 1 / (j * j);
    if (std::abs(aw - 1 / j) < 1e-12) throw invalid("ModeBoundary", "|W| = 1/j");

    XYChain ch;
    ch.j = j;
    ch.W = W;
    ch.N = N;
    ch.theta = theta;
    ch.staggered = W < 0;
    ch.mode = aw < 1 / j ? 1 : 2;
    if (ch.mode == 1) {
        ch.k = std::sqrt((1 - ij2) / (1 - aw * aw));
        ch.q = elliptic::ellip_F(std::asin(std::sqrt(1 - aw * aw)), ch.k); // dn q = 1/j
    } else {
        ch.k = std::sqrt((1 - aw * aw) / (1 - ij2));
        ch.q = elliptic::ellip_F(std::acos(1 / j), ch.k); // cn q = 1/j
    }
    for (int n = 0; n <= N; ++n) {
        auto t = jacobi_real(ch.q * (n - theta), ch.k);
        std::array<double, 2> r = ch.mode == 1 ? std::array{t.cn.real(), t.sn.real()}
                                               : std::array{t.dn.real(), ch.k * t.sn.real()};
        if (ch.staggered && n % 2) r = {-r[0], -r[1]};
        ch.spins.push_back(r);
    }
    for (int n = 1; n < N; ++n)
        if (std::hypot(ch.spins[n - 1][0] + ch.spins[n + 1][0], ch.spins[n - 1][1] + ch.spins[n + 1][1]) < 1e-9)
            throw degenerate("IrregularChain", "r_{n-1} + r_{n+1} = 0");
    return ch;
}

XYClosure xy_closure(double j, int N, int m1)
{
    if (!(j > 1)) throw invalid("InvalidCoupling", "j > 1");
    if (m1 < 1 || m1 >= N || std::gcd(m1, N) != 1) throw invalid("InvalidWinding", "1 <= m1 < N coprime");
    const double lo = std::sqrt(1 - 1 / (j * j)), hi = 1 - 1e-15;
    auto f = [&](double k) {
        double K = elliptic::ellip_K(k);
        return jacobi_real(4 * K * m1 / N, k).dn.real() - 1 / j;
    };
    double flo = f(lo), fhi = f(hi);
    double k = lo;
    if (std::abs(flo) > 1e-14) {
        if ((flo > 0) == (fhi > 0)) throw invalid("NoSolutionInMode", "dn(4K m1/N) never reaches 1/j");
        auto r = boost::math::tools::bisect(f, lo, hi, boost::math::tools::eps_tolerance<double>(52));
        k = 0.5 * (r.first + r.second);
    }
    XYClosure out;
    out.k = k;
    // W = cn(q) keeps its sign; a negative W gives the staggered chain, q shifted by 2K
    out.q = 4 * elliptic::ellip_K(k) * m1 / N;
    out.W = jacobi_real(out.q, k).cn.real();
    return out;
}

double stereographic(const std::array<double, 2>& r) { return r[1] / (1 + r[0]); }

curve::Curve xy_eb_curve(double j, double W)
{
    // (1 - u^2)(1 - v^2) + 4 u v / j = W (1 + u^2)(1 + v^2), divided by 1 - W
    double a = -(1 + W) / (1 - W), b = 2 / (j * (1 - W));
    return curve::euler_baxter(a, b, 1.0);
}

// ---------------------------------------------------------------------------

TodaState toda_eval(const TodaParams& tp, int n, double t)
{
    const auto& d = tp.wdata;
    if (elliptic::lattice_distance(tp.p, d) < 1e-3) throw invalid("DegenerateShift", "p is a lattice point");
    const cplx z = tp.omega * t - tp.p * double(n) + tp.r;
    for (cplx w : {z, z - tp.p, z + tp.p})
        if (elliptic::lattice_distance(w, d) < 1e-3) throw numerical("LatticePole", "argument within 1e-3 of a pole");
    TodaState s;
    const cplx w2 = tp.omega * tp.omega;
    s.b = tp.omega * (elliptic::w_zeta(z - tp.p, d) - elliptic::w_zeta(z, d)) - tp.lambda;
    s.u = w2 * (elliptic::wp(tp.p, d) - elliptic::wp(z, d));
    const cplx sp = elliptic::w_sigma(tp.p, d), sz = elliptic::w_sigma(z, d);
    s.u_sigma = w2 * elliptic::w_sigma(z - tp.p, d) * elliptic::w_sigma(z + tp.p, d) / (sp * sp * sz * sz);
    return s;
}

std::vector<TodaState> toda_eval(const TodaParams& tp, int n0, int n1, double t)
{
    std::vector<TodaState> out;
    for (int n = n0; n <= n1; ++n) out.push_back(toda_eval(tp, n, t));
    return out;
}

TodaResiduals toda_verify(const TodaParams& tp, int n0, int n1, double t, double h)
{
    TodaResiduals r;
    r.half_period = elliptic::lattice_distance(2.0 * tp.p, tp.wdata) < 1e-9;
    for (int n = n0; n <= n1; ++n) {
        auto plus = toda_eval(tp, n, t + h), minus = toda_eval(tp, n, t - h);
        auto s = toda_eval(tp, n, t), next = toda_eval(tp, n + 1, t), prev = toda_eval(tp, n - 1, t);
        cplx db = (plus.b - minus.b) / (2 * h), du = (plus.u - minus.u) / (2 * h);
        double scale = 1 + std::abs(s.u) + std::abs(next.u);
        r.b = std::max(r.b, std::abs(db - (next.u - s.u)) / scale);
        r.u = std::max(r.u, std::abs(du - s.u * (s.b - prev.b)) / (1 + std::abs(s.u) * (1 + std::abs(s.b) + std::abs(prev.b))));
        r.forms = std::max(r.forms, std::abs(s.u - s.u_sigma) / std::max(std::abs(s.u), 1e-300));
    }
    return r;
}

// ---------------------------------------------------------------------------

FitResult fit_biquadratic(const std::vector<std::pair<double, double>>& pts)
{
    if (pts.size() < 9) throw numerical("RankDeficientFit", "need at least 9 points");
    const Eigen::Index n = (Eigen::Index)pts.size();
    Eigen::MatrixXd D(n, 9);
    for (Eigen::Index r = 0; r < n; ++r) {
        auto [x, y] = pts[r];
        double xp = 1;
        for (int i = 0; i < 3; ++i, xp *= x) {
            double yp = 1;
            for (int k = 0; k < 3; ++k, yp *= y) D(r, 3 * i + k) = xp * yp;
        }
    }
    Eigen::VectorXd scale = D.colwise().norm().transpose();
    for (int c = 0; c < 9; ++c)
        if (scale(c) == 0) throw numerical("RankDeficientFit", "a monomial vanishes on every point");
    Eigen::MatrixXd Ds = D * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ds, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s(7) < 1e-10 * s(0)) throw numerical("RankDeficientFit", "points lie on more than one biquadratic");
    Eigen::VectorXd v = svd.matrixV().col(8).cwiseQuotient(scale);

    FitResult out;
    out.sigma_ratio = s(8) / s(0);
    Eigen::Index big;
    v.cwiseAbs().maxCoeff(&big);
    v /= v.norm() * (v(big) < 0 ? -1 : 1);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) out.c.a[i][k] = v(3 * i + k);
    for (Eigen::Index r = 0; r < n; ++r) {
        double num = 0, den = 0;
        for (int c = 0; c < 9; ++c) {
            num += v(c) * D(r, c);
            den += std::abs(v(c) * D(r, c));
        }
        out.residual = std::max(out.residual, std::abs(num) / den);
    }
    double asym = 0;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) asym = std::max(asym, std::abs(out.c.a[i][k] - out.c.a[k][i]));
    out.symmetry = asym;
    return out;
}

curve::Curve wp_curve(double g2, double g3, double w)
{
    Bi A{}, B{}, C{};
    A[1][1] = 1;
    A[1][0] = A[0][1] = w;
    A[0][0] = g2 / 4;
    B[1][0] = B[0][1] = 1;
    B[0][0] = w;
    C[1][1] = 4 * w;
    C[0][0] = -g3;
    Bi AA = mul(A, A), BC = mul(B, C);
    curve::Curve c;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) c.a[i][k] = AA[i][k] - BC[i][k];
    return c;
}

double curve_distance(const curve::Curve& a, const curve::Curve& b)
{
    double na = frob(a), nb = frob(b), dp = 0, dm = 0;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            dp += std::pow(a.a[i][k] / na - b.a[i][k] / nb, 2);
            dm += std::pow(a.a[i][k] / na + b.a[i][k] / nb, 2);
        }
    return std::sqrt(std::min(dp, dm));
}

PhasePortrait toda_phase_portrait(const TodaParams& tp, int samples)
{
    const auto& d = tp.wdata;
    const double g2 = real_checked(d.g2, "g2"), g3 = real_checked(d.g3, "g3");
    const double om = real_checked(tp.omega, "omega");
    const double wpp = real_checked(elliptic::wp(tp.p, d), "wp(p)");
    PhasePortrait pp;
    // t sweeps one real period of z = omega t + r
    const double period = 2 * std::abs(d.omega1.real());
    for (int i = 0; i < samples; ++i) {
        double t = period * (i + 0.5) / samples / om;
        auto u0 = toda_eval(tp, 0, t).u, u1 = toda_eval(tp, 1, t).u;
        pp.points.emplace_back(real_checked(u0, "u_0"), real_checked(u1, "u_1"));
    }
    pp.fit = fit_biquadratic(pp.points);
    // u = omega^2 (wp(p) - X) with (X, Y) = (wp(z), wp(z - p)) on the canonical curve, w = wp(p)
    Mobius<double> m{-1 / (om * om), wpp, 0, 1};
    curve::Curve ref = curve::apply_mobius(wp_curve(g2, g3, wpp), m, m);
    pp.wp_distance = curve_distance(pp.fit.c, ref);
    return pp;
}

} // namespace biquad::physics
