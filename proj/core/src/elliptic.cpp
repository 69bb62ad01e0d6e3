#include "biquad/elliptic.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/ellint_1.hpp>

namespace biquad::elliptic {

namespace {
constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);
} // namespace

double ellip_K(double k)
{
    double m = k * k;
    if (m >= 1.0) throw invalid("SingularModulus", "K(k) needs k^2 < 1");
    double a = 1.0, b = std::sqrt(1.0 - m);
    for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
        double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return pi / (2.0 * a);
}

double ellip_F(double phi, double k) { return boost::math::ellint_1(k, phi); }

EllipticModulus EllipticModulus::from_k(double k)
{
    if (!(k >= 0.0 && k < 1.0)) throw invalid("ModulusOutOfRange", "need 0 <= k < 1");
    EllipticModulus m;
    m.k = k;
    m.kp = std::sqrt((1.0 - k) * (1.0 + k));
    m.K = ellip_K(k);
    m.Kp = (k == 0.0) ? std::numeric_limits<double>::infinity() : ellip_K(m.kp);
    return m;
}

EllipticModulus EllipticModulus::from_m(double m) { return from_k(std::sqrt(m)); }

JacobiTriple jacobi_real(double u, double k)
{
    if (k == 0.0) return {std::sin(u), std::cos(u), 1.0};
    if (k >= 1.0) {
        double s = 1.0 / std::cosh(u);
        return {std::tanh(u), s, s};
    }
    // reduce mod 4K
    const double K = ellip_K(k);
    double r = std::remainder(u, 4.0 * K);

    std::array<double, 32> a{}, c{};
    a[0] = 1.0;
    c[0] = k;
    double b = std::sqrt((1.0 - k) * (1.0 + k));
    int n = 0;
    while (std::abs(c[n]) > 1e-17 && n < 30) {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = std::sqrt(a[n] * b);
        ++n;
    }
    double phi = std::ldexp(a[n] * r, n);
    for (int i = n; i >= 1; --i) phi = 0.5 * (phi + std::asin(c[i] / a[i] * std::sin(phi)));
    double sn = std::sin(phi), cn = std::cos(phi);
    double dn = std::sqrt(std::max(0.0, 1.0 - k * k * sn * sn));
    return {sn, cn, dn};
}

std::optional<JacobiTriple> jacobi(cplx u, double k, double pole_tol)
{
    const double x = u.real(), y = u.imag();
    if (k == 0.0) {
        cplx s = std::sin(u), c = std::cos(u);
        return JacobiTriple{s, c, 1.0};
    }
    const auto mod = EllipticModulus::from_k(k);
    // poles at iK' + 2mK + 2niK'
    {
        double dx = std::remainder(x, 2.0 * mod.K);
        double dy = std::remainder(y - mod.Kp, 2.0 * mod.Kp);
        if (std::hypot(dx, dy) < pole_tol * std::max(1.0, mod.K)) return std::nullopt;
    }
    if (y == 0.0) return jacobi_real(x, k);
    auto [s, c, d] = jacobi_real(x, k);
    auto [s1, c1, d1] = jacobi_real(std::remainder(y, 4.0 * mod.Kp), mod.kp);
    const double sr = s.real(), cr = c.real(), dr = d.real();
    const double s1r = s1.real(), c1r = c1.real(), d1r = d1.real();
    const double den = c1r * c1r + k * k * sr * sr * s1r * s1r;
    JacobiTriple out;
    out.sn = cplx(sr * d1r, cr * dr * s1r * c1r) / den;
    out.cn = cplx(cr * c1r, -sr * dr * s1r * d1r) / den;
    out.dn = cplx(dr * c1r * d1r, -k * k * sr * cr * s1r) / den;
    return out;
}

std::optional<JacobiTriple> jacobi_theta(cplx u, double k)
{
    if (k == 0.0) return JacobiTriple{std::sin(u), std::cos(u), 1.0};
    const auto mod = EllipticModulus::from_k(k);
    const double q = std::exp(-pi * mod.Kp / mod.K);
    // all three functions are 4K and 4iK' periodic
    cplx w(std::remainder(u.real(), 4.0 * mod.K), std::remainder(u.imag(), 4.0 * mod.Kp));
    const cplx v = pi * w / (2.0 * mod.K);
    auto th = [&](int which, cplx z) {
        cplx acc = (which >= 3) ? cplx(1.0) : cplx(0.0);
        for (int n = 0; n < 80; ++n) {
            double e = (which <= 2) ? (n + 0.5) * (n + 0.5) : double((n + 1) * (n + 1));
            double qn = std::pow(q, e);
            if (qn == 0.0) break;
            switch (which) {
            case 1: acc += 2.0 * ((n % 2) ? -1.0 : 1.0) * qn * std::sin(double(2 * n + 1) * z); break;
            case 2: acc += 2.0 * qn * std::cos(double(2 * n + 1) * z); break;
            case 3: acc += 2.0 * qn * std::cos(double(2 * (n + 1)) * z); break;
            case 4: acc += 2.0 * ((n % 2) ? 1.0 : -1.0) * qn * std::cos(double(2 * (n + 1)) * z); break;
            }
        }
        return acc;
    };
    const cplx t2 = th(2, 0.0), t3 = th(3, 0.0), t4 = th(4, 0.0);
    const cplx d = th(4, v);
    if (std::abs(d) < 1e-300) return std::nullopt;
    JacobiTriple out;
    out.sn = (t3 / t2) * th(1, v) / d;
    out.cn = (t4 / t2) * th(2, v) / d;
    out.dn = (t4 / t3) * th(3, v) / d;
    return out;
}

Ratio parse_ratio(const std::string& code)
{
    static const std::array<std::pair<const char*, Ratio>, 13> table{{{"sn", Ratio::sn},
                                                                      {"cn", Ratio::cn},
                                                                      {"dn", Ratio::dn},
                                                                      {"sc", Ratio::sc},
                                                                      {"ns", Ratio::ns},
                                                                      {"cs", Ratio::cs},
                                                                      {"ds", Ratio::ds},
                                                                      {"nd", Ratio::nd},
                                                                      {"nc", Ratio::nc},
                                                                      {"sd", Ratio::sd},
                                                                      {"cd", Ratio::cd},
                                                                      {"dc", Ratio::dc},
                                                                      {"nn", Ratio::nn}}};
    for (const auto& [name, r] : table)
        if (code == name) return r;
    throw invalid("UnknownRatio", code);
}

std::string ratio_name(Ratio r)
{
    static const char* names[] = {"sn", "cn", "dn", "sc", "ns", "cs", "ds", "nd", "nc", "sd", "cd", "dc", "nn"};
    return names[static_cast<int>(r)];
}

std::optional<cplx> jacobi_ratio(Ratio code, cplx u, double k)
{
    auto t = jacobi(u, k);
    if (!t) {
        // the pole of sn, cn, dn is a zero of ns, nc, nd and a finite point of the
        // others; shift to the regular image instead of differencing large values
        const auto mod = EllipticModulus::from_k(k);
        auto s = jacobi(u - I * mod.Kp, k);
        if (!s) return std::nullopt;
        // sn(v+iK') = 1/(k sn v), cn(v+iK') = -i dn v/(k sn v), dn(v+iK') = -i cn v/sn v
        auto [sn, cn, dn] = *s;
        switch (code) {
        case Ratio::ns: return k * sn;
        case Ratio::nc: return k * sn / (-I * dn);
        case Ratio::nd: return sn / (-I * cn);
        case Ratio::sc: return I / dn;
        case Ratio::cs: return -I * dn;
        case Ratio::sd: return I / (k * cn);
        case Ratio::ds: return -I * k * cn;
        case Ratio::cd: return dn / (k * cn);
        case Ratio::dc: return k * cn / dn;
        case Ratio::nn: return cplx(1.0);
        default: return std::nullopt;
        }
    }
    const auto [sn, cn, dn] = *t;
    auto div = [](cplx a, cplx b) -> std::optional<cplx> {
        if (std::abs(b) < 1e-300) return std::nullopt;
        return a / b;
    };
    switch (code) {
    case Ratio::sn: return sn;
    case Ratio::cn: return cn;
    case Ratio::dn: return dn;
    case Ratio::sc: return div(sn, cn);
    case Ratio::ns: return div(1.0, sn);
    case Ratio::cs: return div(cn, sn);
    case Ratio::ds: return div(dn, sn);
    case Ratio::nd: return div(1.0, dn);
    case Ratio::nc: return div(1.0, cn);
    case Ratio::sd: return div(sn, dn);
    case Ratio::cd: return div(cn, dn);
    case Ratio::dc: return div(dn, cn);
    case Ratio::nn: return cplx(1.0);
    }
    return std::nullopt;
}

std::optional<cplx> jacobi_ratio(const std::string& code, cplx u, double k)
{
    return jacobi_ratio(parse_ratio(code), u, k);
}

double invert_sc_min_positive(double v, double k)
{
    if (!(v > 0.0) || !std::isfinite(v)) throw invalid("NoSolution", "sc inversion needs finite v > 0");
    if (!(k >= 0.0 && k < 1.0)) throw invalid("ModulusOutOfRange", "need 0 <= k < 1");
    // sc = tan(am): am = atan v
    return ellip_F(std::atan(v), k);
}

// ---------------------------------------------------------------------------
// Weierstrass via q-series on a reduced basis

namespace {

struct Reduced {
    cplx w1, w3; // reduced half-period basis
    cplx q;      // exp(i pi tau)
    cplx eta1, eta3;
};

// sum_{n>=1} n^p q^{2n} / (1 - q^{2n})
cplx lambert(cplx q, int p)
{
    cplx acc = 0.0, q2 = q * q, qn = q2;
    for (int n = 1; n < 200; ++n) {
        cplx term = std::pow(double(n), p) * qn / (1.0 - qn);
        acc += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(acc))) break;
        qn *= q2;
    }
    return acc;
}

Reduced reduce(cplx w1, cplx w3)
{
    if (std::abs(w1) == 0.0 || std::abs(w3) == 0.0) throw invalid("DegenerateLattice", "zero half-period");
    cplx tau = w3 / w1;
    if (std::abs(tau.imag()) < 1e-14 * std::abs(tau)) throw invalid("DegenerateLattice", "collinear half-periods");
    if (tau.imag() < 0) {
        w3 = -w3;
        tau = -tau;
    }
    for (int it = 0; it < 200; ++it) {
        double n = std::round(tau.real());
        if (n != 0.0) {
            w3 -= n * w1;
            tau -= n;
        }
        if (std::norm(tau) < 1.0 - 1e-15) {
            cplx nw1 = w3, nw3 = -w1;
            w1 = nw1;
            w3 = nw3;
            tau = w3 / w1;
        } else {
            break;
        }
    }
    Reduced r;
    r.w1 = w1;
    r.w3 = w3;
    r.q = std::exp(I * pi * tau);
    const cplx e2 = 1.0 - 24.0 * lambert(r.q, 1);
    r.eta1 = pi * pi * e2 / (12.0 * w1);
    // Legendre: eta1 w3 - eta3 w1 = i pi / 2
    r.eta3 = (r.eta1 * w3 - I * pi / 2.0) / w1;
    return r;
}

// z = z0 + 2 m w1 + 2 n w3 with z0 in the centred fundamental parallelogram
void split(cplx z, const Reduced& r, cplx& z0, double& m, double& n)
{
    // solve z = a (2 w1) + b (2 w3) over reals
    cplx A = 2.0 * r.w1, B = 2.0 * r.w3;
    double det = A.real() * B.imag() - A.imag() * B.real();
    double a = (z.real() * B.imag() - z.imag() * B.real()) / det;
    double b = (A.real() * z.imag() - A.imag() * z.real()) / det;
    m = std::round(a);
    n = std::round(b);
    z0 = z - m * A - n * B;
}

} // namespace

std::pair<cplx, cplx> invariants_from_periods(cplx omega1, cplx omega3)
{
    Reduced r = reduce(omega1, omega3);
    cplx e4 = 1.0 + 240.0 * lambert(r.q, 3);
    cplx e6 = 1.0 - 504.0 * lambert(r.q, 5);
    cplx p = pi / r.w1;
    return {std::pow(p, 4) * e4 / 12.0, std::pow(p, 6) * e6 / 216.0};
}

namespace {

cplx agm(cplx a, cplx b)
{
    for (int i = 0; i < 100; ++i) {
        cplx an = 0.5 * (a + b);
        cplx bn = std::sqrt(a * b);
        if (std::abs(an - bn) > std::abs(an + bn)) bn = -bn;
        if (std::abs(an - bn) <= 1e-16 * std::abs(an)) return an;
        a = an;
        b = bn;
    }
    return a;
}

} // namespace

std::pair<cplx, cplx> periods_from_invariants(cplx g2, cplx g3)
{
    cplx disc = g2 * g2 * g2 - 27.0 * g3 * g3;
    double scale = std::max(std::pow(std::abs(g2), 3), 27.0 * std::norm(g3));
    if (std::abs(disc) <= 1e-12 * scale || scale == 0.0)
        throw invalid("DegenerateLattice", "g2^3 - 27 g3^2 vanishes");
    auto e = roots(PolyC({-g3, -g2, 0.0, 4.0}));
    const double gscale = std::max(std::abs(g2), std::pow(std::abs(g3), 2.0 / 3.0));
    const int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    double best = std::numeric_limits<double>::infinity();
    std::pair<cplx, cplx> out;
    for (const auto& p : perm) {
        cplx e1 = e[p[0]], e2 = e[p[1]], e3 = e[p[2]];
        for (int s = 0; s < 4; ++s) {
            cplx r13 = std::sqrt(e1 - e3), r12 = std::sqrt(e1 - e2), r23 = std::sqrt(e2 - e3);
            if (s & 1) r12 = -r12;
            if (s & 2) r23 = -r23;
            cplx a1 = agm(r13, r12), a3 = agm(r13, r23);
            if (std::abs(a1) == 0.0 || std::abs(a3) == 0.0) continue;
            cplx w1 = pi / (2.0 * a1), w3 = I * pi / (2.0 * a3);
            cplx tau = w3 / w1;
            if (std::abs(tau.imag()) < 1e-8 * std::abs(tau)) continue;
            if (tau.imag() < 0) w3 = -w3;
            try {
                auto [G2, G3] = invariants_from_periods(w1, w3);
                double err = std::abs(G2 - g2) / std::max(gscale, 1e-300) +
                             std::abs(G3 - g3) / std::max(std::pow(gscale, 1.5), 1e-300);
                if (err < best) {
                    best = err;
                    out = {w1, w3};
                }
            } catch (const Error&) {
            }
        }
    }
    if (!(best < 1e-8)) throw numerical("PeriodSearchFailed", "no AGM branch reproduces the invariants");
    Reduced r = reduce(out.first, out.second);
    return {r.w1, r.w3};
}

WeierstrassData WeierstrassData::from_invariants(cplx g2, cplx g3)
{
    auto [w1, w3] = periods_from_invariants(g2, g3);
    return {g2, g3, w1, w3};
}

WeierstrassData WeierstrassData::from_periods(cplx omega1, cplx omega3)
{
    Reduced r = reduce(omega1, omega3);
    auto [g2, g3] = invariants_from_periods(r.w1, r.w3);
    return {g2, g3, r.w1, r.w3};
}

std::pair<cplx, cplx> quasi_periods(const WeierstrassData& d)
{
    Reduced r = reduce(d.omega1, d.omega3);
    // the caller's basis differs from the reduced one by an SL2(Z) change
    double m1, n1, m3, n3;
    cplx z0;
    split(2.0 * d.omega1, r, z0, m1, n1);
    split(2.0 * d.omega3, r, z0, m3, n3);
    return {m1 * r.eta1 + n1 * r.eta3, m3 * r.eta1 + n3 * r.eta3};
}

double lattice_distance(cplx z, const WeierstrassData& d)
{
    Reduced r = reduce(d.omega1, d.omega3);
    cplx z0;
    double m, n;
    split(z, r, z0, m, n);
    // z0 is centred, but the nearest lattice point may be a neighbour
    double best = std::abs(z0);
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) best = std::min(best, std::abs(z0 - 2.0 * double(a) * r.w1 - 2.0 * double(b) * r.w3));
    return best / std::abs(r.w1);
}

namespace {

void check_pole(cplx z, const WeierstrassData& d)
{
    if (lattice_distance(z, d) < 1e-12) throw invalid("LatticePointPole", "argument on the period lattice");
}

} // namespace

cplx wp(cplx z, const WeierstrassData& d)
{
    check_pole(z, d);
    Reduced r = reduce(d.omega1, d.omega3);
    cplx z0;
    double m, n;
    split(z, r, z0, m, n);
    const cplx h = pi / (2.0 * r.w1);
    const cplx w = h * z0;
    const cplx s = std::sin(w);
    cplx acc = -r.eta1 / r.w1 + h * h / (s * s);
    cplx q2 = r.q * r.q, qn = q2, sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        cplx term = double(k) * qn / (1.0 - qn) * std::cos(2.0 * double(k) * w);
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
        qn *= q2;
    }
    return acc - 8.0 * h * h * sum;
}

cplx wp_prime(cplx z, const WeierstrassData& d)
{
    check_pole(z, d);
    Reduced r = reduce(d.omega1, d.omega3);
    cplx z0;
    double m, n;
    split(z, r, z0, m, n);
    const cplx h = pi / (2.0 * r.w1);
    const cplx w = h * z0;
    const cplx s = std::sin(w), c = std::cos(w);
    cplx acc = -2.0 * h * h * h * c / (s * s * s);
    cplx q2 = r.q * r.q, qn = q2, sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        cplx term = double(k) * double(k) * qn / (1.0 - qn) * std::sin(2.0 * double(k) * w);
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
        qn *= q2;
    }
    return acc + 16.0 * h * h * h * sum;
}

cplx w_zeta(cplx z, const WeierstrassData& d)
{
    check_pole(z, d);
    Reduced r = reduce(d.omega1, d.omega3);
    cplx z0;
    double m, n;
    split(z, r, z0, m, n);
    const cplx h = pi / (2.0 * r.w1);
    const cplx w = h * z0;
    cplx acc = r.eta1 * z0 / r.w1 + h * std::cos(w) / std::sin(w);
    cplx q2 = r.q * r.q, qn = q2, sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        cplx term = qn / (1.0 - qn) * std::sin(2.0 * double(k) * w);
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
        qn *= q2;
    }
    acc += 4.0 * h * sum;
    return acc + 2.0 * m * r.eta1 + 2.0 * n * r.eta3;
}

cplx w_sigma(cplx z, const WeierstrassData& d)
{
    Reduced r = reduce(d.omega1, d.omega3);
    cplx z0;
    double m, n;
    split(z, r, z0, m, n);
    const cplx h = pi / (2.0 * r.w1);
    const cplx w = h * z0;
    cplx logv = r.eta1 * z0 * z0 / (2.0 * r.w1);
    cplx prod = std::sin(w) / h;
    cplx q2 = r.q * r.q, qn = q2;
    const cplx c2 = std::cos(2.0 * w);
    for (int k = 1; k < 200; ++k) {
        cplx f = (1.0 - 2.0 * qn * c2 + qn * qn) / ((1.0 - qn) * (1.0 - qn));
        prod *= f;
        if (std::abs(f - 1.0) < 1e-18) break;
        qn *= q2;
    }
    // sigma(z0 + 2W) = (-1)^{m+n+mn} exp(2 H (z0 + W)) sigma(z0), W = m w1 + n w3
    const cplx W = m * r.w1 + n * r.w3;
    const cplx H = m * r.eta1 + n * r.eta3;
    logv += 2.0 * H * (z0 + W);
    const long long par = (long long)(m + n + m * n);
    const double sign = (par % 2 == 0) ? 1.0 : -1.0;
    return sign * prod * std::exp(logv);
}

} // namespace biquad::elliptic
