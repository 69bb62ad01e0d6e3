#include "biquad/johnmap.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace biquad::john {

ProjCoord ProjCoord::finite(double x) { return ProjCoord{x, 1.0}.normalized(); }

ProjCoord ProjCoord::normalized() const
{
    double m = std::max(std::abs(u), std::abs(v));
    if (m == 0.0) throw invalid("ZeroProjectivePoint", "(0 : 0)");
    ProjCoord p{u / m, v / m};
    // fix the sign so that equal points compare equal
    if (p.v < 0 || (p.v == 0 && p.u < 0)) p = {-p.u, -p.v};
    return p;
}

double chordal(const ProjCoord& a, const ProjCoord& b)
{
    double num = std::abs(a.u * b.v - a.v * b.u);
    return num / (std::hypot(a.u, a.v) * std::hypot(b.u, b.v));
}

namespace {

// homogeneous A_j(u, v) = sum_i a[i][j] u^i v^(2-i); row = true gives B_j in y
std::array<double, 3> coeffs(const Curve& c, const ProjCoord& p, bool in_x)
{
    std::array<double, 3> out{};
    const double pw_u[3] = {1.0, p.u, p.u * p.u}, pw_v[3] = {p.v * p.v, p.v, 1.0};
    for (int j = 0; j < 3; ++j) {
        double acc = 0;
        for (int i = 0; i < 3; ++i) acc += (in_x ? c.a[i][j] : c.a[j][i]) * pw_u[i] * pw_v[i];
        out[j] = acc;
    }
    return out;
}

// the root of A2 s^2 + A1 s w + A0 w^2 other than `cur`
ProjCoord other_root(const std::array<double, 3>& A, const ProjCoord& cur, bool& fixed)
{
    const double A0 = A[0], A1 = A[1], A2 = A[2];
    const double scale = std::max({std::abs(A0), std::abs(A1), std::abs(A2)});
    if (scale == 0.0) throw degenerate("LineComponent", "the curve contains this whole line");
    double disc = A1 * A1 - 4.0 * A0 * A2;
    fixed = false;
    if (disc < 0) {
        if (disc < -1e-9 * scale * scale) throw numerical("LeftCurve", "no real second root");
        disc = 0;
    }
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (A1 + (A1 >= 0 ? sq : -sq));
    ProjCoord r1, r2;
    if (q == 0.0) {
        // A1 = 0 and A0 A2 = 0: a double root at 0 or at infinity
        r1 = r2 = std::abs(A2) >= std::abs(A0) ? ProjCoord{0, 1} : ProjCoord{1, 0};
    } else {
        r1 = ProjCoord{q, A2}.normalized();
        r2 = ProjCoord{A0, q}.normalized();
    }
    // Vieta prediction, through the sum or the product, whichever is better scaled
    ProjCoord sum{-A1 * cur.v - A2 * cur.u, A2 * cur.v};
    ProjCoord prod{A0 * cur.v, A2 * cur.u};
    ProjCoord pred = std::hypot(sum.u, sum.v) >= std::hypot(prod.u, prod.v) ? sum : prod;
    if (pred.u == 0 && pred.v == 0) pred = chordal(r1, cur) > chordal(r2, cur) ? r1 : r2;
    pred = pred.normalized();
    ProjCoord pick = chordal(r1, pred) <= chordal(r2, pred) ? r1 : r2;
    if (chordal(r1, r2) < 1e-7) fixed = true;
    return pick;
}

} // namespace

double hom_residual(const Curve& c, const ProjCoord& x, const ProjCoord& y)
{
    ProjCoord xn = x.normalized(), yn = y.normalized();
    auto A = coeffs(c, xn, true);
    double val = A[0] * yn.v * yn.v + A[1] * yn.u * yn.v + A[2] * yn.u * yn.u;
    return std::abs(val) / c.norm();
}

CurvePoint make_point(const Curve& c, ProjCoord x, ProjCoord y)
{
    CurvePoint p{x.normalized(), y.normalized(), 0, false};
    p.residual = hom_residual(c, p.x, p.y);
    return p;
}

CurvePoint make_point(const Curve& c, double x, double y)
{
    return make_point(c, ProjCoord::finite(x), ProjCoord::finite(y));
}

double distance(const CurvePoint& p, const CurvePoint& q) { return std::max(chordal(p.x, q.x), chordal(p.y, q.y)); }

CurvePoint involution_I1(const Curve& c, const CurvePoint& p)
{
    CurvePoint out;
    out.x = p.x;
    out.y = other_root(coeffs(c, p.x, true), p.y, out.fixed);
    out.residual = hom_residual(c, out.x, out.y);
    return out;
}

CurvePoint involution_I2(const Curve& c, const CurvePoint& p)
{
    CurvePoint out;
    out.y = p.y;
    out.x = other_root(coeffs(c, p.y, false), p.x, out.fixed);
    out.residual = hom_residual(c, out.x, out.y);
    return out;
}

CurvePoint john_T(const Curve& c, const CurvePoint& p) { return involution_I2(c, involution_I1(c, p)); }
CurvePoint john_T_inv(const Curve& c, const CurvePoint& p) { return involution_I1(c, involution_I2(c, p)); }

Orbit orbit(const Curve& c, const CurvePoint& start, int max_iter, double tol)
{
    if (start.residual > 1e-7 && hom_residual(c, start.x, start.y) > 1e-7)
        throw invalid("NotOnCurve", "orbit start is not on the curve");
    Orbit o;
    o.points.push_back(start);
    auto extend = [&](int upto) {
        while ((int)o.points.size() <= upto) {
            CurvePoint nx = john_T(c, o.points.back());
            if (nx.residual > 1e-5) throw numerical("LeftCurve", "orbit residual exceeded 1e-5");
            o.points.push_back(nx);
        }
    };
    for (int n = 1; n <= max_iter; ++n) {
        extend(n);
        if (distance(o.points[n], start) >= tol) continue;
        extend(2 * n);
        if (distance(o.points[2 * n], start) < tol) {
            o.period = n;
            o.points.resize(n + 1);
            return o;
        }
    }
    o.points.resize(std::min<std::size_t>(o.points.size(), max_iter + 1));
    return o;
}

namespace {

std::optional<cplx> locate_t(const curve::Parameterization& p, const Curve& c, const CurvePoint& q)
{
    if (q.x.is_infinite(1e-8) || q.y.is_infinite(1e-8)) return std::nullopt;
    try {
        return curve::locate_parameter(p, c, q.x.value(), q.y.value(), 1e-6).t;
    } catch (const Error&) {
        return std::nullopt;
    }
}

// fraction of a turn for a parameter increment dt, in [0, 1)
double turn_fraction(const curve::Parameterization& p, cplx dt)
{
    double a11 = p.w1.real(), a12 = p.w2.real(), a21 = p.w1.imag(), a22 = p.w2.imag();
    double alpha = (dt.real() * a22 - a12 * dt.imag()) / (a11 * a22 - a12 * a21);
    double r = -alpha - std::floor(-alpha);
    if (r > 1.0 - 1e-9) r -= 1.0;
    return r;
}

// lifted increments between consecutive locatable points
std::vector<double> lifted_increments(const curve::Parameterization& p, const Curve& c,
                                      const std::vector<CurvePoint>& pts, std::vector<int>& steps)
{
    std::vector<double> out;
    steps.clear();
    std::optional<cplx> prev;
    int prev_i = 0;
    for (int i = 0; i < (int)pts.size(); ++i) {
        auto t = locate_t(p, c, pts[i]);
        if (!t) continue;
        if (prev) {
            out.push_back(turn_fraction(p, *t - *prev));
            steps.push_back(i - prev_i);
        }
        prev = t;
        prev_i = i;
    }
    return out;
}

} // namespace

int orbit_turns(const curve::Parameterization& p, const Curve& c, const Orbit& o)
{
    if (!o.period) throw invalid("NoPeriod", "turns need a periodic orbit");
    std::vector<int> steps;
    auto inc = lifted_increments(p, c, o.points, steps);
    double total = 0;
    int covered = 0;
    for (std::size_t i = 0; i < inc.size(); ++i) {
        // a multi-step gap carries steps * ratio worth of turns
        double r = p.rotation_ratio();
        double lifted = inc[i] + std::round(steps[i] * r - inc[i]);
        total += lifted;
        covered += steps[i];
    }
    if (covered != *o.period) throw numerical("LocateFailed", "orbit points could not all be located");
    return (int)std::lround(total);
}

Rotation rotation_number(const curve::Parameterization& p, const Curve& c, const CurvePoint& start, int iterations)
{
    Rotation r;
    r.analytic = p.rotation_ratio();
    std::vector<CurvePoint> pts{start};
    for (int i = 0; i < iterations; ++i) pts.push_back(john_T(c, pts.back()));
    std::vector<int> steps;
    auto inc = lifted_increments(p, c, pts, steps);
    double total = 0;
    int covered = 0;
    for (std::size_t i = 0; i < inc.size(); ++i) {
        total += inc[i] + std::round(steps[i] * r.analytic - inc[i]);
        covered += steps[i];
    }
    if (covered == 0) throw numerical("LocateFailed", "no orbit point could be located");
    r.birkhoff = total / covered;
    return r;
}

double rotation_number_angle(const Curve& c, const CurvePoint& start, int iterations)
{
    std::vector<std::pair<double, double>> xy;
    CurvePoint p = start;
    for (int i = 0; i <= iterations; ++i) {
        if (p.x.is_infinite(1e-12) || p.y.is_infinite(1e-12))
            throw invalid("UnboundedUnparameterized", "orbit reaches infinity and no parameterization is given");
        xy.emplace_back(p.x.value(), p.y.value());
        p = john_T(c, p);
    }
    double cx = 0, cy = 0;
    for (auto [x, y] : xy) cx += x, cy += y;
    cx /= xy.size();
    cy /= xy.size();
    double total = 0;
    for (std::size_t i = 1; i < xy.size(); ++i) {
        double a0 = std::atan2(xy[i - 1].second - cy, xy[i - 1].first - cx);
        double a1 = std::atan2(xy[i].second - cy, xy[i].first - cx);
        double d = a1 - a0;
        d -= 2 * std::numbers::pi * std::floor(d / (2 * std::numbers::pi));
        total += d;
    }
    double r = total / (2 * std::numbers::pi * (xy.size() - 1));
    r -= std::floor(r);
    return std::min(r, 1.0 - r);
}

std::pair<long, long> closest_rational(double value, long max_denominator)
{
    if (!std::isfinite(value)) throw invalid("NonFinite", "value must be finite");
    // convergents h/k of the continued fraction, plus the best semiconvergent at the cutoff
    long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double x = value;
    std::pair<long, long> best{std::lround(value), 1};
    for (int it = 0; it < 64; ++it) {
        double fl = std::floor(x);
        long a = (long)fl;
        long h2 = a * h1 + h0, k2 = a * k1 + k0;
        if (k2 > max_denominator) {
            long t = (max_denominator - k0) / k1;
            if (t > 0) {
                long hs = t * h1 + h0, ks = t * k1 + k0;
                if (std::abs(value - double(hs) / ks) < std::abs(value - double(best.first) / best.second))
                    best = {hs, ks};
            }
            break;
        }
        if (std::abs(value - double(h2) / k2) <= std::abs(value - double(best.first) / best.second))
            best = {h2, k2};
        h0 = h1, h1 = h2, k0 = k1, k1 = k2;
        double frac = x - fl;
        if (frac < 1e-15) break;
        x = 1.0 / frac;
    }
    return best;
}

std::optional<std::pair<long, long>> best_rational(double value, long max_denominator, double tol)
{
    auto r = closest_rational(value, max_denominator);
    if (std::abs(value - double(r.first) / r.second) < tol) return r;
    return std::nullopt;
}

RationalVerdict periodicity_criterion(const curve::CanonicalTag& tag, long max_denominator, double tol)
{
    if (tag.family == curve::Family::degenerate) throw invalid("CaseNotCovered", "degenerate curve");
    if (tag.family == curve::Family::EB_i && tag.subcase == 0) throw invalid("CaseNotCovered", "empty real curve");
    auto p = curve::parameterize(tag);
    RationalVerdict v;
    v.family = p.family;
    v.value = p.rotation_ratio();
    v.stated = p.stated_ratio();
    v.max_denominator = max_denominator;
    auto [m, n] = closest_rational(v.value, max_denominator);
    v.m = m;
    v.n = n;
    v.residual = std::abs(v.value - double(m) / n);
    v.rational = v.residual < tol;
    double beta = p.shift_coordinates().second;
    v.swaps_components = std::abs(beta - std::round(beta)) > 0.25;
    v.period = v.swaps_components && n % 2 ? 2 * n : n;
    return v;
}

std::string orbit_csv(const Orbit& o)
{
    std::ostringstream os;
    os << std::setprecision(17);
    os << "n,x_num,x_den,y_num,y_den,residual\n";
    for (std::size_t i = 0; i < o.points.size(); ++i) {
        const auto& p = o.points[i];
        os << i << ',' << p.x.u << ',' << p.x.v << ',' << p.y.u << ',' << p.y.v << ',' << p.residual << '\n';
    }
    return os.str();
}

} // namespace biquad::john
