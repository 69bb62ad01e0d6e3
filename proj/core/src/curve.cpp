#include "biquad/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace biquad::curve {

using elliptic::EllipticModulus;
using elliptic::Ratio;

namespace {
const cplx I(0.0, 1.0);

double chord(cplx z, cplx w)
{
    return std::abs(z - w) / std::sqrt((1.0 + std::norm(z)) * (1.0 + std::norm(w)));
}

double hom_residual(const Curve& c, cplx x, cplx y)
{
    return std::abs(c(x, y)) / (c.norm() * (1.0 + std::norm(x)) * (1.0 + std::norm(y)));
}
} // namespace

Curve euler_baxter(double a, double b, double c)
{
    Curve f;
    f.a[2][2] = 1.0;
    f.a[2][0] = f.a[0][2] = a;
    f.a[1][1] = 2.0 * b;
    f.a[0][0] = c;
    return f;
}

Curve asym_iii(double a, double b, double c)
{
    Curve f;
    f.a[2][2] = 1.0;
    f.a[2][0] = a;
    f.a[0][2] = -a;
    f.a[1][1] = 2.0 * b;
    f.a[0][0] = c;
    return f;
}

template <class T>
std::array<Poly<T>, 3> a_form(const BiquadraticCurve<T>& c)
{
    std::array<Poly<T>, 3> out;
    for (int k = 0; k < 3; ++k) out[k] = Poly<T>({c.a[0][k], c.a[1][k], c.a[2][k]});
    return out;
}

template <class T>
std::array<Poly<T>, 3> b_form(const BiquadraticCurve<T>& c)
{
    return a_form(c.transposed());
}

template <class T>
std::pair<Poly<T>, Poly<T>> discriminants(const BiquadraticCurve<T>& c)
{
    auto A = a_form(c);
    auto B = b_form(c);
    return {A[1] * A[1] - A[0] * A[2] * T(4), B[1] * B[1] - B[0] * B[2] * T(4)};
}

template <class T>
std::pair<T, T> curve_invariants(const BiquadraticCurve<T>& c)
{
    auto D1 = discriminants(c).first;
    if (D1.is_zero()) throw degenerate("ZeroDiscriminant", "D1 vanishes identically");
    return invariants_g2_g3(D1);
}

double residual(const Curve& c, double x, double y) { return hom_residual(c, x, y); }

GenusReport genus_and_singularities(const Curve& c, double tol)
{
    GenusReport rep;
    auto A = a_form(c);
    PolyD D1 = A[1] * A[1] - A[0] * A[2] * 4.0;
    if (D1.is_zero()) {
        rep.kind = GenusKind::reducible;
        return rep;
    }
    auto [g2, g3] = invariants_g2_g3(D1);
    rep.delta = g2 * g2 * g2 - 27.0 * g3 * g3;
    double scale = std::pow(D1.norm_inf(), 6);
    if (std::abs(rep.delta) > tol * scale) return rep;

    // D1 a constant times a square: F splits into two rational branches
    auto rts = roots(D1);
    bool all_double = D1.degree() % 2 == 0;
    if (all_double) {
        std::vector<bool> used(rts.size(), false);
        for (std::size_t i = 0; i < rts.size() && all_double; ++i) {
            if (used[i]) continue;
            std::size_t best = i;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < rts.size(); ++j) {
                if (j == i || used[j]) continue;
                double d = std::abs(rts[i] - rts[j]);
                if (d < bd) bd = d, best = j;
            }
            if (best == i || bd > 1e-5 * std::max(1.0, std::abs(rts[i]))) all_double = false;
            used[i] = used[best] = true;
        }
    }
    rep.kind = all_double ? GenusKind::reducible : GenusKind::singular;
    if (all_double) return rep;

    // the multiple root of D1 is the x of a singular point unless it sits at infinity
    if (rts.size() >= 2) {
        double bd = std::numeric_limits<double>::infinity();
        cplx x0 = 0;
        for (std::size_t i = 0; i < rts.size(); ++i)
            for (std::size_t j = i + 1; j < rts.size(); ++j)
                if (std::abs(rts[i] - rts[j]) < bd) {
                    bd = std::abs(rts[i] - rts[j]);
                    x0 = 0.5 * (rts[i] + rts[j]);
                }
        PolyC d1 = D1.cast<cplx>().derivative(), d2 = d1.derivative();
        for (int it = 0; it < 20; ++it) {
            cplx den = d2(x0);
            if (std::abs(den) == 0.0) break;
            cplx step = d1(x0) / den;
            x0 -= step;
            if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(x0))) break;
        }
        cplx a2 = A[2](x0);
        if (std::abs(a2) > 1e-12 * std::max(1.0, A[2].norm_inf())) {
            cplx y0 = -A[1](x0) / (2.0 * a2);
            // refine with Newton on grad F = 0
            for (int it = 0; it < 20; ++it) {
                auto Fx = [&](cplx x, cplx y) {
                    return (A[0].derivative())(x) + (A[1].derivative())(x) * y + (A[2].derivative())(x) * y * y;
                };
                auto Fy = [&](cplx x, cplx y) { return A[1](x) + 2.0 * A[2](x) * y; };
                const double h = 1e-7;
                cplx fx = Fx(x0, y0), fy = Fy(x0, y0);
                cplx j11 = (Fx(x0 + h, y0) - Fx(x0 - h, y0)) / (2 * h);
                cplx j12 = (Fx(x0, y0 + h) - Fx(x0, y0 - h)) / (2 * h);
                cplx j21 = (Fy(x0 + h, y0) - Fy(x0 - h, y0)) / (2 * h);
                cplx j22 = 2.0 * A[2](x0);
                cplx det = j11 * j22 - j12 * j21;
                if (std::abs(det) < 1e-300) break;
                cplx dx = (fx * j22 - fy * j12) / det, dy = (j11 * fy - j21 * fx) / det;
                x0 -= dx;
                y0 -= dy;
                if (std::abs(dx) + std::abs(dy) < 1e-15) break;
            }
            rep.point = std::make_pair(x0, y0);
        }
    }
    return rep;
}

template <class T>
BiquadraticCurve<T> stieltjes_curve(const std::array<T, 5>& b, const T& C)
{
    // b holds b0..b4 of b0 x^4 + 4 b1 x^3 + 6 b2 x^2 + 4 b3 x + b4
    std::vector<std::vector<T>> delta = {
        {b[0], b[1], b[2] - T(2) * C}, {b[1], b[2] + C, b[3]}, {b[2] - T(2) * C, b[3], b[4]}};
    T d = determinant(delta);
    double dm = 0;
    for (const auto& v : b) dm = std::max(dm, scalar_traits<T>::mag(v));
    dm = std::max(dm, scalar_traits<T>::mag(C));
    if constexpr (is_exact_v<T>) {
        if (scalar_traits<T>::is_zero(d)) throw invalid("DegenerateDelta", "the 3x3 minor vanishes");
    } else {
        if (scalar_traits<T>::mag(d) <= 1e-13 * std::max(1.0, dm * dm * dm))
            throw invalid("DegenerateDelta", "the 3x3 minor vanishes");
    }

    auto det4 = [&](const T& x, const T& y) {
        T h = -(x + y) / T(2), p = x * y;
        std::vector<std::vector<T>> m = {{T(0), T(1), h, p},
                                         {T(1), b[0], b[1], b[2] - T(2) * C},
                                         {h, b[1], b[2] + C, b[3]},
                                         {p, b[2] - T(2) * C, b[3], b[4]}};
        return determinant(std::move(m));
    };
    // Lagrange interpolation on the nodes -1, 0, 1 in each variable
    // basis coefficients: L_{-1} = (x^2 - x)/2, L_0 = 1 - x^2, L_1 = (x^2 + x)/2
    const T half = T(1) / T(2);
    const std::array<std::array<T, 3>, 3> L = {
        {{T(0), -half, half}, {T(1), T(0), T(-1)}, {T(0), half, half}}};
    const std::array<T, 3> nodes = {T(-1), T(0), T(1)};
    std::array<std::array<T, 3>, 3> v;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v[i][j] = det4(nodes[i], nodes[j]);
    BiquadraticCurve<T> out;
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
            T acc(0);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) acc += L[i][p] * L[j][q] * v[i][j];
            out.a[p][q] = acc;
        }
    return out;
}

// --- classification ------------------------------------------------------------------

std::string family_name(Family f)
{
    switch (f) {
    case Family::EB_i: return "EB_i";
    case Family::EB_ii: return "EB_ii";
    case Family::ASYM_iii: return "ASYM_iii";
    case Family::degenerate: return "degenerate";
    }
    return "?";
}

double b_tilde(const CanonicalTag& t)
{
    if (t.family == Family::ASYM_iii) return (t.b * t.b + t.a * t.a + 1.0) / t.a;
    return (t.b * t.b - t.a * t.a - t.c) / t.a;
}

namespace {

void fill_case(CanonicalTag& t, double tol)
{
    const double scale = std::max({1.0, std::abs(t.a), std::abs(t.b)});
    if (std::abs(t.a) <= tol * scale) {
        t.family = Family::degenerate;
        return;
    }
    const double bt = b_tilde(t);
    auto near = [&](double v, double target) { return std::abs(v - target) <= tol * std::max(1.0, std::abs(bt)); };
    if (t.family == Family::ASYM_iii) {
        if (near(std::abs(bt), 2.0)) {
            t.family = Family::degenerate;
            return;
        }
        t.subcase = t.a > 0 ? 4 : 5;
        t.x_vertices = t.a > 0 ? 4 : 0;
        t.y_vertices = t.a > 0 ? 0 : 4;
        return;
    }
    if (t.family == Family::EB_ii) {
        t.subcase = 3;
        t.x_vertices = t.y_vertices = 2;
        return;
    }
    if (near(bt, 2.0) || near(bt, -2.0)) {
        t.family = Family::degenerate;
        return;
    }
    if (bt > 2.0) {
        t.subcase = 2;
        t.x_vertices = t.y_vertices = 4;
    } else {
        t.subcase = t.a > 0 ? 0 : 1;
    }
}

} // namespace

CanonicalTag classify(const Curve& c, double tol)
{
    const double n = c.norm();
    if (n == 0.0) throw invalid("ZeroCurve", "all coefficients vanish");
    const double lead = c.a[2][2];
    if (std::abs(lead) <= tol * n) throw invalid("NotCanonical", "x^2 y^2 coefficient vanishes");
    auto g = [&](int i, int k) { return c.a[i][k] / lead; };
    const double m = n / std::abs(lead);
    for (auto [i, k] : {std::pair{2, 1}, {1, 2}, {1, 0}, {0, 1}})
        if (std::abs(g(i, k)) > tol * m) throw invalid("NotCanonical", "odd terms present");

    CanonicalTag t;
    double a = g(2, 0), a2 = g(0, 2), b = g(1, 1) / 2.0, cc = g(0, 0);
    bool sym = std::abs(a - a2) <= tol * m;
    bool anti = std::abs(a + a2) <= tol * m && std::abs(a) > tol * m;
    if (!sym && !anti) throw invalid("NotCanonical", "x^2 and y^2 coefficients unrelated");
    if (std::abs(cc) <= tol * m) {
        t.family = Family::degenerate;
        t.a = a, t.b = b, t.c = cc;
        return t;
    }
    // rescale so that |c| = 1: x = s x~ with s^4 = |c|
    const double s = std::pow(std::abs(cc), 0.25);
    t.scale = s;
    t.a = a / (s * s);
    t.b = b / (s * s);
    t.c = cc > 0 ? 1.0 : -1.0;
    if (sym) {
        t.family = t.c > 0 ? Family::EB_i : Family::EB_ii;
    } else {
        if (t.c > 0) throw invalid("NotCanonical", "the antisymmetric form needs c = -1");
        t.family = Family::ASYM_iii;
    }
    fill_case(t, 1e-12);
    return t;
}

Curve apply_mobius(const Curve& c, const Mobius<double>& mx, const Mobius<double>& my)
{
    PolyD nx{mx.nu, mx.mu}, dx{mx.eta, mx.xi}, ny{my.nu, my.mu}, dy{my.eta, my.xi};
    std::array<PolyD, 3> px, py;
    for (int i = 0; i < 3; ++i) {
        PolyD p = PolyD::constant(1.0), q = PolyD::constant(1.0);
        for (int j = 0; j < i; ++j) p = p * nx, q = q * ny;
        for (int j = i; j < 2; ++j) p = p * dx, q = q * dy;
        px[i] = p;
        py[i] = q;
    }
    Curve out;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            if (c.a[i][k] == 0.0) continue;
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) out.a[p][q] += c.a[i][k] * px[i][p] * py[k][q];
        }
    return out;
}

namespace {

double off_form(const Curve& g)
{
    double n = g.norm();
    double r = std::max({std::abs(g.a[2][1]), std::abs(g.a[1][2]), std::abs(g.a[1][0]), std::abs(g.a[0][1]),
                         std::abs(g.a[2][0] - g.a[0][2])});
    return r / n;
}

struct Candidate {
    Reduction red;
    bool ok = false;
};

// finish a reduction once the involution is x -> -x in the new coordinate
Candidate finish(const Curve& c, Mobius<double> gamma, double tol)
{
    Candidate out;
    Curve g = apply_mobius(c, gamma, gamma);
    double n = g.norm();
    if (std::abs(g.a[2][2]) <= 1e-9 * n) {
        gamma = gamma.compose({0, 1, 1, 0});
        g = apply_mobius(c, gamma, gamma);
        n = g.norm();
    }
    if (std::abs(g.a[2][2]) <= 1e-9 * n) return out;
    double res = off_form(g);
    if (!(res <= tol)) return out;
    CanonicalTag t;
    try {
        // strip the odd terms; they are below tolerance
        Curve e = euler_baxter(0.5 * (g.a[2][0] + g.a[0][2]) / g.a[2][2], 0.5 * g.a[1][1] / g.a[2][2],
                               g.a[0][0] / g.a[2][2]);
        t = classify(e);
    } catch (const Error&) {
        return out;
    }
    if (t.family == Family::degenerate) return out;
    gamma = gamma.compose({t.scale, 0, 0, 1});
    t.scale = 1.0;
    if (t.c < 0 && t.a < 0) {
        gamma = gamma.compose({0, 1, 1, 0});
        t.a = -t.a;
        t.b = -t.b;
        fill_case(t, 1e-12);
    }
    out.red.tag = t;
    out.red.gamma = gamma;
    out.red.off_form_residual = res;
    out.ok = true;
    return out;
}

bool is_asym_case(const CanonicalTag& t) { return t.family == Family::EB_i && t.subcase == 1 && std::abs(b_tilde(t)) < 2; }

} // namespace

Reduction reduce_symmetric_to_eb(const Curve& c, double tol)
{
    const double n = c.norm();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            if (std::abs(c.a[i][k] - c.a[k][i]) > 1e-12 * n) throw invalid("NotSymmetric", "F(x,y) != F(y,x)");

    // already in shape: keep the identity
    if (std::abs(c.a[2][2]) > 1e-12 * n && off_form(c) <= 1e-12) {
        Reduction r;
        Curve e = euler_baxter(c.a[2][0] / c.a[2][2], 0.5 * c.a[1][1] / c.a[2][2], c.a[0][0] / c.a[2][2]);
        r.tag = classify(e);
        if (r.tag.family == Family::degenerate) throw degenerate("DegenerateQuartic", "singular Euler-Baxter curve");
        r.gamma = {r.tag.scale, 0, 0, 1};
        r.tag.scale = 1.0;
        r.off_form_residual = off_form(c);
        return r;
    }

    Mobius<double> pre{1, 0, 0, 1};
    PolyD diag;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Curve cc = apply_mobius(c, pre, pre);
        std::vector<double> d(5, 0.0);
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) d[i + k] += cc.a[i][k];
        diag = PolyD(d);
        if (diag.degree() == 4) break;
        const double s = 0.3 + 0.2 * attempt;
        pre = {1, s, -s, 1};
    }
    if (diag.degree() != 4) throw degenerate("DegenerateQuartic", "F(x,x) has a multiple root at infinity");
    auto r = roots(diag);

    const int pairings[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
    std::vector<Reduction> found;
    for (const auto& pr : pairings) {
        PolyC q1 = PolyC{-r[pr[0]], 1.0} * PolyC{-r[pr[1]], 1.0};
        PolyC q2 = PolyC{-r[pr[2]], 1.0} * PolyC{-r[pr[3]], 1.0};
        PolyC J = q1 * q2.derivative() - q1.derivative() * q2;
        std::vector<cplx> f = roots(J);
        double sc = 1.0;
        for (auto z : r) sc = std::max(sc, std::abs(z));
        bool real = true;
        for (auto z : f) real = real && std::abs(z.imag()) <= 1e-8 * std::max(1.0, std::abs(z));
        if (!real || f.empty()) continue;
        Mobius<double> gamma;
        if (f.size() == 1) gamma = {1, f[0].real(), 0, 1};
        else gamma = {f[1].real(), -f[0].real(), 1, -1};
        if (std::abs(gamma.det()) <= 1e-12 * sc) continue;
        auto cand = finish(c, pre.compose(gamma), tol);
        if (cand.ok) found.push_back(cand.red);
    }
    if (found.empty()) throw degenerate("DegenerateQuartic", "no real pairing of the diagonal roots reduces the curve");
    std::stable_sort(found.begin(), found.end(), [](const Reduction& x, const Reduction& y) {
        auto key = [](const Reduction& r) { return std::make_tuple(is_asym_case(r.tag), !(r.tag.a > 0)); };
        if (key(x) != key(y)) return key(x) < key(y);
        return x.off_form_residual < y.off_form_residual;
    });
    return found.front();
}

// --- parameterization ---------------------------------------------------------------

std::string param_family_name(ParamFamily f)
{
    switch (f) {
    case ParamFamily::Bax_par: return "Bax_par";
    case ParamFamily::par13: return "par13";
    case ParamFamily::par58: return "par58";
    case ParamFamily::par4: return "par4";
    case ParamFamily::par7: return "par7";
    case ParamFamily::par_asym: return "par_asym";
    case ParamFamily::par_a1: return "par_a1";
    case ParamFamily::par_a2: return "par_a2";
    }
    return "?";
}

std::optional<std::pair<cplx, cplx>> Parameterization::canonical_point(cplx t) const
{
    auto fxv = elliptic::jacobi_ratio(fx, t, modulus.k);
    auto fyv = elliptic::jacobi_ratio(fy, t + eta, modulus.k);
    if (!fxv || !fyv) return std::nullopt;
    return std::make_pair(px * *fxv, py * *fyv);
}

std::optional<std::pair<cplx, cplx>> Parameterization::point(cplx t) const
{
    auto p = canonical_point(t);
    if (!p) return std::nullopt;
    auto map = [](const Mobius<double>& m, cplx z) -> std::optional<cplx> {
        cplx den = m.xi * z + m.eta;
        if (std::abs(den) < 1e-300) return std::nullopt;
        return (m.mu * z + m.nu) / den;
    };
    auto x = map(chart, p->first), y = map(chart_y, p->second);
    if (!x || !y) return std::nullopt;
    return std::make_pair(*x, *y);
}

cplx Parameterization::shift() const { return 2.0 * (cy - cx) - 2.0 * eta; }

std::pair<double, double> Parameterization::shift_coordinates() const
{
    cplx s = shift();
    double a11 = w1.real(), a12 = w2.real(), a21 = w1.imag(), a22 = w2.imag();
    double det = a11 * a22 - a12 * a21;
    double alpha = (s.real() * a22 - a12 * s.imag()) / det;
    double beta = (a11 * s.imag() - a21 * s.real()) / det;
    return {alpha, beta};
}

double Parameterization::rotation_ratio() const
{
    double alpha = shift_coordinates().first;
    double r = -alpha - std::floor(-alpha);
    if (r > 1.0 - 1e-13) r = 0.0;
    return r;
}

double Parameterization::stated_ratio() const
{
    switch (family) {
    case ParamFamily::Bax_par: return eta.imag() / modulus.Kp;
    case ParamFamily::par58: return eta.real() / modulus.K;
    case ParamFamily::par_a1: return eta.imag() / (2.0 * modulus.Kp) - 0.5;
    default: return eta.real() / (2.0 * modulus.K);
    }
}

double Parameterization::max_residual(const Curve& c, int samples) const
{
    double worst = 0.0;
    for (cplx base : branch_base)
        for (int i = 0; i < samples; ++i) {
            double tau = line_period * (i + 0.5) / samples;
            auto p = point(base + dir * tau);
            if (!p) continue;
            worst = std::max(worst, hom_residual(c, p->first, p->second));
        }
    return worst;
}

double Parameterization::reality_defect(int samples) const
{
    double worst = 0.0;
    for (cplx base : branch_base)
        for (int i = 0; i < samples; ++i) {
            auto p = canonical_point(base + dir * (line_period * (i + 0.5) / samples));
            if (!p) continue;
            worst = std::max({worst, chord(p->first, p->first.real()), chord(p->second, p->second.real())});
        }
    return worst;
}

namespace {

double real_of(std::optional<cplx> v)
{
    if (!v) throw numerical("ShiftAtPole", "coefficient formula hit a pole");
    return v->real();
}

// one solution of sn^2(eta) = s2 in the period cell, s2 real
cplx arcsn_sq(double s2, const EllipticModulus& m)
{
    const double k = m.k, kp = m.kp;
    if (s2 == 0.0 || !std::isfinite(s2)) throw numerical("ShiftOutOfRange", "no finite shift for these coefficients");
    if (s2 < 0.0) {
        // sn(i phi, k) = i sc(phi, k')
        return I * elliptic::invert_sc_min_positive(std::sqrt(-s2), kp);
    }
    if (s2 <= 1.0) return elliptic::ellip_F(std::asin(std::sqrt(s2)), k);
    if (s2 * k * k >= 1.0) {
        // sn(e + iK') = 1/(k sn e)
        double e2 = 1.0 / (k * k * s2);
        return I * m.Kp + elliptic::ellip_F(std::asin(std::sqrt(std::min(1.0, e2))), k);
    }
    // sn(K + i phi, k) = 1/dn(phi, k')
    double q = (1.0 - 1.0 / s2) / (kp * kp);
    return m.K + I * elliptic::ellip_F(std::asin(std::sqrt(std::min(1.0, q))), kp);
}

EllipticModulus modulus_from_kp(double kp)
{
    if (!(kp > 0.0 && kp < 1.0)) throw invalid("ModulusOutOfRange", "complementary modulus outside (0, 1)");
    return EllipticModulus::from_m((1.0 - kp) * (1.0 + kp));
}

EllipticModulus modulus_from_k(double k)
{
    if (!(k > 0.0 && k < 1.0)) throw invalid("ModulusOutOfRange", "modulus outside (0, 1)");
    return EllipticModulus::from_k(k);
}

// family skeleton without the shift
Parameterization skeleton(ParamFamily fam, const EllipticModulus& m)
{
    Parameterization p;
    p.family = fam;
    p.modulus = m;
    const double K = m.K, Kp = m.Kp, k = m.k, kp = m.kp;
    switch (fam) {
    case ParamFamily::Bax_par:
        p.fx = p.fy = Ratio::sn;
        p.px = p.py = std::sqrt(k);
        p.cx = p.cy = K;
        p.branch_base = {K, -K};
        p.dir = I;
        p.line_period = 2.0 * Kp;
        p.w1 = 2.0 * I * Kp;
        p.w2 = 4.0 * K;
        break;
    case ParamFamily::par13:
    case ParamFamily::par58:
        p.fx = p.fy = fam == ParamFamily::par13 ? Ratio::cn : Ratio::nc;
        p.px = p.py = fam == ParamFamily::par13 ? std::sqrt(k / kp) : std::sqrt(kp / k);
        p.cx = p.cy = 0.0;
        p.branch_base = {0.0};
        p.line_period = 4.0 * K;
        p.w1 = 4.0 * K;
        p.w2 = 2.0 * K + 2.0 * I * Kp;
        break;
    case ParamFamily::par4:
    case ParamFamily::par_asym:
        p.fx = p.fy = Ratio::cs;
        p.px = p.py = 1.0 / std::sqrt(kp);
        p.cx = p.cy = I * Kp;
        p.branch_base = {0.0, 2.0 * I * Kp};
        p.line_period = 2.0 * K;
        p.w1 = 2.0 * K;
        p.w2 = 4.0 * I * Kp;
        break;
    case ParamFamily::par7:
        p.fx = p.fy = Ratio::sn;
        p.px = p.py = std::sqrt(k);
        p.cx = p.cy = K;
        p.branch_base = {0.0, I * Kp};
        p.line_period = 4.0 * K;
        p.w1 = 4.0 * K;
        p.w2 = 2.0 * I * Kp;
        break;
    case ParamFamily::par_a1:
        p.fx = Ratio::nd;
        p.fy = Ratio::cs;
        p.px = std::sqrt(kp);
        p.py = 1.0 / std::sqrt(kp);
        p.cx = 0.0;
        p.cy = I * Kp;
        p.branch_base = {0.0, 2.0 * I * Kp};
        p.line_period = 2.0 * K;
        p.w1 = 2.0 * K;
        p.w2 = 4.0 * I * Kp;
        break;
    case ParamFamily::par_a2:
        p.fx = Ratio::sc;
        p.fy = Ratio::dn;
        p.px = std::sqrt(kp);
        p.py = 1.0 / std::sqrt(kp);
        p.cx = I * Kp;
        p.cy = 0.0;
        p.branch_base = {0.0, 2.0 * I * Kp};
        p.line_period = 2.0 * K;
        p.w1 = 2.0 * K;
        p.w2 = 4.0 * I * Kp;
        break;
    }
    return p;
}

// (a, b) of the family at shift eta, c fixed by the family
std::pair<double, double> coefficients(ParamFamily fam, const EllipticModulus& m, cplx eta)
{
    const double k = m.k, kp = m.kp;
    auto r = [&](Ratio q) { return elliptic::jacobi_ratio(q, eta, k); };
    switch (fam) {
    case ParamFamily::Bax_par:
    case ParamFamily::par7: {
        auto ns = r(Ratio::ns), cs = r(Ratio::cs), ds = r(Ratio::ds);
        if (!ns || !cs || !ds) throw numerical("ShiftAtPole", "coefficient formula hit a pole");
        return {real_of(-*ns * *ns / k), real_of(*cs * *ds / k)};
    }
    case ParamFamily::par13:
    case ParamFamily::par58: {
        auto ds = r(Ratio::ds), cs = r(Ratio::cs), ns = r(Ratio::ns);
        if (!ds || !cs || !ns) throw numerical("ShiftAtPole", "coefficient formula hit a pole");
        double sgn = fam == ParamFamily::par13 ? 1.0 : -1.0;
        return {real_of(sgn * *ds * *ds / (k * kp)), real_of(-sgn * *cs * *ns / (k * kp))};
    }
    case ParamFamily::par4:
    case ParamFamily::par_asym: {
        auto cs = r(Ratio::cs), ds = r(Ratio::ds), ns = r(Ratio::ns);
        if (!cs || !ds || !ns) throw numerical("ShiftAtPole", "coefficient formula hit a pole");
        return {real_of(-*cs * *cs / kp), real_of(*ds * *ns / kp)};
    }
    case ParamFamily::par_a1:
    case ParamFamily::par_a2: {
        auto nd = r(Ratio::nd), sd = r(Ratio::sd), cd = r(Ratio::cd);
        if (!nd || !sd || !cd) throw numerical("ShiftAtPole", "coefficient formula hit a pole");
        double sgn = fam == ParamFamily::par_a1 ? 1.0 : -1.0;
        return {real_of(sgn * kp * *nd * *nd), real_of(k * k * *sd * *cd)};
    }
    }
    return {0, 0};
}

// the barred coordinates x = (1 - xb)/(1 + xb) map EB(a, b, 1) to EB(ab, bb, 1)
std::pair<double, double> bar_params(double a, double b)
{
    double den = 1.0 + a + b;
    if (std::abs(den) < 1e-14) throw degenerate("DegenerateBar", "1 + a + b = 0");
    return {(1.0 + a - b) / den, 2.0 * (1.0 - a) / den};
}

} // namespace

Parameterization parameterize(const CanonicalTag& tag)
{
    if (tag.family == Family::degenerate) throw degenerate("DegenerateCurve", "singular or reducible curve");
    if (tag.family == Family::EB_i && tag.subcase == 0) throw invalid("EmptyRealCurve", "no real points");

    const double bt = b_tilde(tag);
    ParamFamily fam;
    double a = tag.a, b = tag.b;
    Mobius<double> chart{tag.scale, 0, 0, 1}, chart_y = chart;
    if (tag.family == Family::EB_ii) {
        fam = a > 0 ? ParamFamily::par13 : ParamFamily::par58;
    } else if (tag.family == Family::ASYM_iii) {
        fam = a > 0 ? ParamFamily::par_a1 : ParamFamily::par_a2;
    } else if (tag.subcase == 2) {
        fam = a > 0 ? ParamFamily::Bax_par : ParamFamily::par7;
    } else if (bt < -2.0) {
        fam = ParamFamily::par4;
    } else {
        fam = ParamFamily::par_asym;
        // y -> -y flips b; use whichever sign keeps the substitution well conditioned
        const double flip = std::abs(1.0 + a + b) < std::abs(1.0 + a - b) ? -1.0 : 1.0;
        std::tie(a, b) = bar_params(a, flip * b);
        chart = chart.compose({-1, 1, 1, 1});
        chart_y = Mobius<double>{flip, 0, 0, 1}.compose(chart);
    }

    const double bb = (fam == ParamFamily::par_asym) ? (b * b - a * a - 1.0) / a : bt;
    EllipticModulus m;
    switch (fam) {
    case ParamFamily::Bax_par:
    case ParamFamily::par7: m = modulus_from_k(0.5 * (bb - std::sqrt(bb * bb - 4.0))); break;
    case ParamFamily::par13: {
        double r = 0.5 * (bb + std::sqrt(bb * bb + 4.0));
        m = modulus_from_k(r / std::sqrt(1.0 + r * r));
        break;
    }
    case ParamFamily::par58: {
        double r = 0.5 * (bb + std::sqrt(bb * bb + 4.0));
        m = modulus_from_k(1.0 / std::sqrt(1.0 + r * r));
        break;
    }
    case ParamFamily::par4:
    case ParamFamily::par_asym:
    case ParamFamily::par_a2:
        if (!(bb < -2.0)) throw invalid("ModulusOutOfRange", "needs b^ < -2");
        m = modulus_from_kp(0.5 * (-bb - std::sqrt(bb * bb - 4.0)));
        break;
    case ParamFamily::par_a1:
        if (!(bb > 2.0)) throw invalid("ModulusOutOfRange", "needs b^ > 2");
        m = modulus_from_kp(0.5 * (bb - std::sqrt(bb * bb - 4.0)));
        break;
    }
    const double k = m.k, kp = m.kp, K = m.K;

    double s2 = 0;
    switch (fam) {
    case ParamFamily::Bax_par:
    case ParamFamily::par7: s2 = -1.0 / (a * k); break;
    case ParamFamily::par13: s2 = 1.0 / (a * k * kp + k * k); break;
    case ParamFamily::par58: s2 = 1.0 / (-a * k * kp + k * k); break;
    case ParamFamily::par4:
    case ParamFamily::par_asym: s2 = 1.0 / (1.0 - a * kp); break;
    case ParamFamily::par_a1: s2 = (1.0 - kp / a) / (k * k); break;
    case ParamFamily::par_a2: s2 = (1.0 + kp / a) / (k * k); break;
    }
    const cplx e0 = arcsn_sq(s2, m);
    const std::array<cplx, 4> etas = {e0, -e0, 2.0 * K - e0, 2.0 * K + e0};
    const Curve canon = tag.family == Family::ASYM_iii ? asym_iii(a, b, -1.0) : euler_baxter(a, b, tag.c);
    Parameterization best;
    double best_res = std::numeric_limits<double>::infinity();
    for (cplx e : etas)
        for (double sigma : {1.0, -1.0}) {
            Parameterization p = skeleton(fam, m);
            p.eta = e;
            p.py *= sigma;
            double res = std::max(p.max_residual(canon, 32), p.reality_defect(32));
            if (res < best_res - 1e-13) {
                best_res = res;
                best = p;
            }
        }
    if (!(best_res < 1e-7)) throw numerical("ParameterizationFailed", "no shift candidate fits the curve");

    // orient each branch so that the rotation ratio lies in [0, 1/2]
    if (best.rotation_ratio() > 0.5) {
        best.dir = -best.dir;
        best.w1 = -best.w1;
    }
    best.chart = chart;
    best.chart_y = chart_y;
    best.tag = tag;
    return best;
}

CanonicalTag tag_from_shift(ParamFamily fam, double k, cplx eta)
{
    auto m = modulus_from_k(k);
    auto [a, b] = coefficients(fam, m, eta);
    Curve c;
    switch (fam) {
    case ParamFamily::Bax_par:
    case ParamFamily::par4:
    case ParamFamily::par7: c = euler_baxter(a, b, 1.0); break;
    case ParamFamily::par13:
    case ParamFamily::par58: c = euler_baxter(a, b, -1.0); break;
    case ParamFamily::par_asym: {
        auto [ua, ub] = bar_params(a, b);
        c = euler_baxter(ua, ub, 1.0);
        break;
    }
    case ParamFamily::par_a1:
    case ParamFamily::par_a2: c = asym_iii(a, b, -1.0); break;
    }
    return classify(c);
}

Located locate_parameter(const Parameterization& p, const Curve& c, double X, double Y, double on_curve_tol)
{
    if (!(hom_residual(c, X, Y) <= on_curve_tol)) throw invalid("NotOnCurve", "point is not on the curve");
    const cplx target_x = X, target_y = Y;
    auto dist = [&](cplx t) {
        auto q = p.point(t);
        if (!q) return std::numeric_limits<double>::infinity();
        return chord(q->first, target_x) + chord(q->second, target_y);
    };
    const int N = 256;
    double best = std::numeric_limits<double>::infinity();
    int best_branch = 0;
    double best_tau = 0;
    for (std::size_t br = 0; br < p.branch_base.size(); ++br)
        for (int i = 0; i < N; ++i) {
            double tau = p.line_period * i / N;
            double d = dist(p.branch_base[br] + p.dir * tau);
            if (d < best) best = d, best_branch = (int)br, best_tau = tau;
        }

    // Gauss-Newton along the branch, in 1/x where the target is large
    const cplx base = p.branch_base[best_branch];
    auto phi = [](cplx z, cplx ref) { return std::abs(ref) > 1.0 ? 1.0 / z : z; };
    auto resid = [&](double tau, double& rx, double& ry) {
        auto q = p.point(base + p.dir * tau);
        if (!q) return false;
        rx = (phi(q->first, target_x) - phi(target_x, target_x)).real();
        ry = (phi(q->second, target_y) - phi(target_y, target_y)).real();
        return true;
    };
    double tau = best_tau;
    const double h = 1e-6 * p.line_period;
    for (int it = 0; it < 60; ++it) {
        double rx, ry, rxp, ryp, rxm, rym;
        if (!resid(tau, rx, ry) || !resid(tau + h, rxp, ryp) || !resid(tau - h, rxm, rym)) break;
        double jx = (rxp - rxm) / (2 * h), jy = (ryp - rym) / (2 * h);
        double jj = jx * jx + jy * jy;
        if (jj == 0.0) break;
        double step = (rx * jx + ry * jy) / jj;
        step = std::clamp(step, -0.05 * p.line_period, 0.05 * p.line_period);
        tau -= step;
        if (std::abs(step) < 1e-15 * p.line_period) break;
    }
    tau = std::fmod(tau, p.line_period);
    if (tau < 0) tau += p.line_period;
    Located out;
    out.branch = best_branch;
    out.tau = tau;
    out.t = base + p.dir * tau;
    if (!(dist(out.t) <= 1e-8)) throw numerical("LocateFailed", "no parameter reproduces the point");
    return out;
}

#define BIQUAD_CURVE_INST(T)                                                                \
    template std::array<Poly<T>, 3> a_form<T>(const BiquadraticCurve<T>&);                  \
    template std::array<Poly<T>, 3> b_form<T>(const BiquadraticCurve<T>&);                  \
    template std::pair<Poly<T>, Poly<T>> discriminants<T>(const BiquadraticCurve<T>&);      \
    template std::pair<T, T> curve_invariants<T>(const BiquadraticCurve<T>&);               \
    template BiquadraticCurve<T> stieltjes_curve<T>(const std::array<T, 5>&, const T&);

BIQUAD_CURVE_INST(double)
BIQUAD_CURVE_INST(cplx)
BIQUAD_CURVE_INST(rat)

} // namespace biquad::curve
