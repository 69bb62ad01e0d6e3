#include "biquad/nonuniq.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "biquad/elliptic.hpp"

namespace biquad::nonuniq {

namespace {

constexpr double pi = std::numbers::pi;

// off-diagonal probe offsets in scaled coordinates
constexpr std::array<std::array<double, 2>, 8> probe_uv{{
    {0.2, 0.7}, {-0.5, 0.1}, {0.9, -0.4}, {0.1, -0.8}, {-0.6, -0.2}, {0.4, 0.0}, {0.0, 0.55}, {-0.9, 0.3},
}};

void add_probes(SeparatedSolution& s)
{
    for (auto [u, v] : probe_uv) {
        double x = u * s.x_scale, y = v * std::abs(s.y_scale);
        if (std::abs(curve::residual(s.curve, x, y)) < 1e-6) continue;
        s.probes.push_back({x, y, s(x, y)});
    }
}

std::function<double(double)> eval_fn(const RationalQ& r, double scale, double sign)
{
    PolyD n = r.num().cast<double>(), d = r.den().cast<double>();
    return [n, d, scale, sign](double x) { return sign * n(x / scale) / d(x / scale); };
}

} // namespace

PolyQ chebyshev_T(int n)
{
    if (n < 0) throw invalid("InvalidDegree", "n >= 0");
    PolyQ t0 = PolyQ::constant(rat(1)), t1{rat(0), rat(1)};
    if (n == 0) return t0;
    const PolyQ two_x{rat(0), rat(2)};
    for (int i = 1; i < n; ++i) {
        PolyQ t2 = two_x * t1 - t0;
        t0 = std::move(t1);
        t1 = std::move(t2);
    }
    return t1;
}

curve::Curve ellipse_curve(double eps)
{
    curve::Curve c;
    c.a[2][0] = 1;
    c.a[0][2] = 1;
    c.a[1][1] = -2 * std::cos(eps);
    c.a[0][0] = -std::sin(eps) * std::sin(eps);
    return c;
}

SeparatedSolution ellipse_solution(int M, int N, int n)
{
    if (N < 1 || n < 1) throw invalid("InvalidParameters", "N >= 1 and n >= 1");
    int g = std::gcd(M, N);
    M /= g;
    N /= g;
    if (N == 1) throw degenerate("DegenerateEllipse", "eps is a multiple of pi: the ellipse is a pair of lines");
    const double eps = pi * M / N;
    SeparatedSolution s;
    s.M = M;
    s.N = N;
    s.level = n;
    s.multiplier = 2 * N * n;
    s.curve = ellipse_curve(eps);
    s.exact = RationalQ(chebyshev_T(s.multiplier));
    // the three-term recurrence, stable on [-1, 1] unlike the monomial coefficients
    const int L = s.multiplier;
    auto T = [L](double x) {
        double t0 = 1, t1 = x;
        for (int i = 1; i < L; ++i) {
            double t2 = 2 * x * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
        return t1;
    };
    s.f = T;
    s.g = [T](double y) { return -T(y); };
    s.samples = 256;
    for (int i = 0; i < s.samples; ++i) {
        double t = 2 * pi * i / s.samples;
        s.residual = std::max(s.residual, std::abs(s(std::cos(t), std::cos(t + eps))));
    }
    add_probes(s);
    return s;
}

SeparatedSolution ellipse_solution_from_angle(double eps, int n, long max_den)
{
    auto r = john::best_rational(eps / pi, max_den, 1e-12);
    if (!r) throw invalid("IrrationalAngle", "eps / pi is not rational within the denominator bound");
    return ellipse_solution((int)r->first, (int)r->second, n);
}

RationalQ jacobi_multiplication(int n, const rat& k2)
{
    if (n < 1) throw invalid("InvalidMultiplier", "n >= 1");
    if (n > max_symbolic_multiplier)
        throw numerical("SymbolicOverflow", "R_n past n = " + std::to_string(max_symbolic_multiplier));
    const rat kp2 = 1 - k2;
    const RationalQ c(PolyQ{rat(0), rat(1)});
    const RationalQ one(PolyQ::constant(rat(1)));
    const PolyQ sn2{rat(1), rat(0), rat(-1)};
    // sn^2 dn^2 as a polynomial in c
    const PolyQ w = sn2 * PolyQ{kp2, rat(0), k2};
    RationalQ R = c;
    for (int m = 1; m < n; ++m) {
        // cn(m z + z) by the addition theorem; sn(mz) dn(mz) = R_m' sn dn / m
        RationalQ num = R * c - R.derivative() * RationalQ(w * rat(1, m));
        RationalQ den = one - (one - R * R) * RationalQ(sn2 * k2);
        R = num / den;
    }
    return R;
}

double cn_multiple(int n, double c, double k)
{
    c = std::clamp(c, -1.0, 1.0);
    double z = elliptic::ellip_F(std::acos(c), k);
    return elliptic::jacobi_real(n * z, k).cn.real();
}

SeparatedSolution build_solution(const curve::CanonicalTag& tag, const john::RationalVerdict& verdict, int level)
{
    if (level < 1) throw invalid("InvalidLevel", "level >= 1");
    auto p = curve::parameterize(tag);
    if (p.family != curve::ParamFamily::par13)
        throw invalid("UnsupportedFamily", "witnesses are built for the cn parameterization only");
    if (!verdict.rational || !(verdict.residual < 1e-10) || verdict.n < 1)
        throw invalid("NotCertifiedPeriodic", "rotation ratio not certified rational");

    SeparatedSolution s;
    s.M = (int)verdict.m;
    s.N = (int)verdict.n;
    s.level = level;
    s.multiplier = 2 * level * s.N;
    s.curve = curve::euler_baxter(tag.a * tag.scale * tag.scale, tag.b * tag.scale * tag.scale,
                                  tag.c * std::pow(tag.scale, 4));
    s.x_scale = tag.scale * p.px;
    s.y_scale = tag.scale * p.py;

    const double k = p.modulus.k;
    auto k2 = john::best_rational(k * k, 1000, 1e-13);
    if (k2 && s.multiplier <= max_symbolic_multiplier) {
        s.exact = jacobi_multiplication(s.multiplier, rat(k2->first, k2->second));
        // cn is real in [-1, 1] on the branch
        for (double r : real_roots(s.exact->den().cast<double>()))
            if (std::abs(r) <= 1 + 1e-12) throw numerical("PoleOnCurve", "R_n has a pole on the coordinate range");
        s.f = eval_fn(*s.exact, s.x_scale, 1);
        s.g = eval_fn(*s.exact, s.y_scale, -1);
    } else {
        const int L = s.multiplier;
        const double xs = s.x_scale, ys = s.y_scale;
        s.f = [=](double x) { return cn_multiple(L, x / xs, k); };
        s.g = [=](double y) { return -cn_multiple(L, y / ys, k); };
    }

    s.samples = 256;
    for (int i = 0; i < s.samples; ++i) {
        double tau = p.line_period * i / s.samples;
        auto q = p.point(p.branch_base[0] + p.dir * tau);
        if (!q) continue;
        s.residual = std::max(s.residual, std::abs(s(q->first.real(), q->second.real())));
    }
    add_probes(s);
    return s;
}

double gram_condition(const std::vector<SeparatedSolution>& sols, int samples)
{
    if (sols.empty()) throw invalid("EmptyFamily", "no solutions");
    const double xs = sols.front().x_scale;
    Eigen::MatrixXd V(samples, (Eigen::Index)sols.size());
    for (int i = 0; i < samples; ++i) {
        double x = xs * std::cos(pi * (i + 0.5) / samples);
        for (std::size_t j = 0; j < sols.size(); ++j) V(i, (Eigen::Index)j) = sols[j].f(x);
    }
    Eigen::MatrixXd G = V.transpose() * V;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

std::string verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::empty_curve: return "empty-curve";
    case Verdict::nonunique: return "nonunique";
    case Verdict::no_period: return "no-period-within-bound";
    case Verdict::unsupported: return "unsupported";
    }
    return "unsupported";
}

UniquenessReport uniqueness_verdict(const curve::Curve& c, long max_den)
{
    UniquenessReport rep;
    curve::CanonicalTag tag;
    bool direct = true;
    try {
        tag = curve::classify(c);
    } catch (const Error&) {
        tag = curve::reduce_symmetric_to_eb(c).tag;
        direct = false;
    }
    if (tag.family == curve::Family::degenerate) {
        rep.note = "degenerate curve";
        return rep;
    }
    if (tag.family == curve::Family::EB_i && tag.subcase == 0) {
        rep.verdict = Verdict::empty_curve;
        rep.note = "no real points";
        return rep;
    }
    auto v = john::periodicity_criterion(tag, max_den);
    rep.m = v.m;
    rep.n = v.n;
    rep.residual = v.residual;
    if (!v.rational) {
        rep.verdict = Verdict::no_period;
        rep.note = "no period within the denominator bound; uniqueness expected, not certified";
        return rep;
    }
    rep.verdict = Verdict::nonunique;
    if (direct && v.family == curve::ParamFamily::par13 && v.residual < 1e-10) {
        rep.witness = build_solution(tag, v, 1);
        rep.note = "witness constructed";
    } else {
        rep.note = "periodic; no witness builder for this parameterization";
    }
    return rep;
}

} // namespace biquad::nonuniq
