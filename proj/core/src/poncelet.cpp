#include "biquad/poncelet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "biquad/elliptic.hpp"

namespace biquad::poncelet {

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double vnorm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 unit(const Vec3& a)
{
    double n = vnorm(a);
    // sign fixed by the largest component
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(a[i]) > std::abs(a[k])) k = i;
    if (a[k] < 0) n = -n;
    return {a[0] / n, a[1] / n, a[2] / n};
}

// sine of the angle between two projective points
double proj_dist(const Vec3& a, const Vec3& b) { return vnorm(cross(a, b)) / (vnorm(a) * vnorm(b)); }

template <class T>
Poly<T> pcross_comp(const ConicParamT<T>& a, const ConicParamT<T>& b, int i)
{
    int j = (i + 1) % 3, k = (i + 2) % 3;
    return a[j] * b[k] - a[k] * b[j];
}

template <class T>
T det3(const Mat3T<T>& m)
{
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Vec3 second_point(const Vec3& line, const Vec3& P);

// second intersection of the line with C, one intersection being P
Vec3 other_point(const Conic& C, const Vec3& P, const Vec3& line)
{
    Vec3 R = second_point(line, P);
    double rr = C(R), pr = C.bilinear(P, R);
    Vec3 out{rr * P[0] - 2 * pr * R[0], rr * P[1] - 2 * pr * R[1], rr * P[2] - 2 * pr * R[2]};
    double scale = C.norm() * vnorm(P);
    if (vnorm(out) <= 1e-13 * scale) throw degenerate("TangencyDegenerate", "line lies in the conic");
    return unit(out);
}

// roots of c2 u^2 + c1 u v + c0 v^2 as (u, v)
std::vector<john::ProjCoord> proj_quadratic_roots(double c0, double c1, double c2)
{
    double disc = c1 * c1 - 4 * c0 * c2;
    if (disc < 0) disc = 0;
    double s = std::sqrt(disc);
    double q = -0.5 * (c1 + (c1 >= 0 ? s : -s));
    std::vector<john::ProjCoord> out;
    if (q == 0) {
        // c1 = 0 and c0 c2 = 0
        if (c2 == 0 && c0 == 0) return out;
        out.push_back(std::abs(c2) >= std::abs(c0) ? john::ProjCoord{0, 1} : john::ProjCoord{1, 0});
        return out;
    }
    out.push_back(john::ProjCoord{q, c2}.normalized());
    out.push_back(john::ProjCoord{c0, q}.normalized());
    return out;
}

Vec3 lin(const Vec3& a, double s, const Vec3& b, double t) { return {s * a[0] + t * b[0], s * a[1] + t * b[1], s * a[2] + t * b[2]}; }

// real root count of a polynomial of formal degree 4, roots at infinity included;
// -1 when two roots nearly coincide
int count_real_quartic(const PolyD& q, double sep_tol)
{
    if (q.is_zero()) return -1;
    int at_inf = 4 - q.degree();
    if (at_inf > 1) return -1;
    auto rs = roots(q);
    int real = at_inf;
    std::vector<double> reals;
    for (const auto& z : rs) {
        double s = 1 + std::abs(z);
        if (std::abs(z.imag()) <= 1e-9 * s) {
            reals.push_back(z.real());
            ++real;
        } else if (std::abs(z.imag()) < sep_tol * s) {
            return -1;
        }
    }
    std::sort(reals.begin(), reals.end());
    for (std::size_t i = 1; i < reals.size(); ++i)
        if (reals[i] - reals[i - 1] < sep_tol * (1 + std::abs(reals[i]))) return -1;
    if (at_inf == 1)
        for (double r : reals)
            if (std::abs(r) > 1 / sep_tol) return -1;
    return real;
}

PolyD restrict(const Conic& C, const ConicParam& E)
{
    PolyD acc;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (C.M[i][j] != 0) acc += E[i] * E[j] * C.M[i][j];
    return acc;
}

} // namespace

// ---------------------------------------------------------------------------

Conic Conic::circle(double cx, double cy, double r)
{
    Conic c;
    c.M = {{{cx * cx + cy * cy - r * r, -cx, -cy}, {-cx, 1, 0}, {-cy, 0, 1}}};
    return c;
}

Conic Conic::axes(double a1, double b1)
{
    Conic c;
    c.M = {{{-1, 0, 0}, {0, 1 / a1, 0}, {0, 0, 1 / b1}}};
    return c;
}

Conic Conic::parabola()
{
    Conic c;
    c.M = {{{0, 0, 0.5}, {0, -1, 0}, {0.5, 0, 0}}};
    return c;
}

double Conic::operator()(const Vec3& p) const { return bilinear(p, p); }

double Conic::bilinear(const Vec3& p, const Vec3& q) const { return dot(p, apply(q)); }

Vec3 Conic::apply(const Vec3& p) const
{
    Vec3 r{};
    for (int i = 0; i < 3; ++i) r[i] = M[i][0] * p[0] + M[i][1] * p[1] + M[i][2] * p[2];
    return r;
}

double Conic::det() const { return det3(M); }

double Conic::norm() const
{
    double m = 0;
    for (const auto& r : M)
        for (double v : r) m = std::max(m, std::abs(v));
    return m;
}

Conic Conic::congruent(const Mat3& S) const
{
    Conic c;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) s += S[k][i] * M[k][l] * S[l][j];
            c.M[i][j] = s;
        }
    return c;
}

Conic Conic::dual() const
{
    Conic c;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            int i1 = (i + 1) % 3, i2 = (i + 2) % 3, j1 = (j + 1) % 3, j2 = (j + 2) % 3;
            c.M[j][i] = M[i1][j1] * M[i2][j2] - M[i1][j2] * M[i2][j1];
        }
    return c;
}

Vec3 eval(const ConicParam& E, double x) { return {E[0](x), E[1](x), E[2](x)}; }

Vec3 eval(const ConicParam& E, const john::ProjCoord& x)
{
    Vec3 r{};
    for (int i = 0; i < 3; ++i) r[i] = E[i][0] * x.v * x.v + E[i][1] * x.u * x.v + E[i][2] * x.u * x.u;
    return r;
}

ConicParam derivative(const ConicParam& E) { return {E[0].derivative(), E[1].derivative(), E[2].derivative()}; }

ConicParam rational_parameterization(const Conic& c)
{
    const auto& M = c.M;
    if (std::abs(c.det()) <= 1e-12 * std::pow(c.norm(), 3)) throw degenerate("DegenerateConic", "det M = 0");

    // base point: lowest point on the line s1 = 0 when there is one
    std::optional<Vec3> P0;
    {
        double m00 = M[0][0], m02 = M[0][2], m22 = M[2][2];
        double disc = m02 * m02 - m00 * m22;
        if (disc >= 0) {
            std::vector<Vec3> cand;
            for (const auto& r : proj_quadratic_roots(m00, 2 * m02, m22)) cand.push_back({r.v, 0, r.u});
            // finite points first, then the smallest ordinate
            std::sort(cand.begin(), cand.end(), [](const Vec3& a, const Vec3& b) {
                bool fa = std::abs(a[0]) > 1e-12, fb = std::abs(b[0]) > 1e-12;
                if (fa != fb) return fa;
                if (!fa) return false;
                return a[2] / a[0] < b[2] / b[0];
            });
            if (!cand.empty()) P0 = cand.front();
        }
    }
    if (!P0) {
        // any real point: combine eigenvectors of opposite sign
        Eigen::Matrix3d m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = M[i][j];
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
        const auto& ev = es.eigenvalues();
        const auto& V = es.eigenvectors();
        int ip = -1, in = -1;
        for (int i = 0; i < 3; ++i) {
            if (ev(i) > 0 && ip < 0) ip = i;
            if (ev(i) < 0 && in < 0) in = i;
        }
        if (ip < 0 || in < 0) throw invalid("EmptyRealConic", "the conic has no real points");
        double a = std::sqrt(-ev(in)), b = std::sqrt(ev(ip));
        P0 = Vec3{a * V(0, ip) + b * V(0, in), a * V(1, ip) + b * V(1, in), a * V(2, ip) + b * V(2, in)};
    }

    // project from P0 onto a coordinate line missing it
    const Vec3& p = *P0;
    int skip = 2;
    if (std::abs(p[2]) <= 1e-12 * vnorm(p)) skip = std::abs(p[1]) > 1e-12 * vnorm(p) ? 1 : 0;
    if (skip == 1 && std::abs(p[1]) <= 1e-12 * vnorm(p)) skip = 0;
    Vec3 W0{}, W1{};
    if (skip == 2) {
        W0 = {1, 0, 0};
        W1 = {0, 1, 0};
    } else if (skip == 1) {
        W0 = {1, 0, 0};
        W1 = {0, 0, 1};
    } else {
        W0 = {0, 1, 0};
        W1 = {0, 0, 1};
    }
    double q0 = c(W0), q1 = c(W1);
    if (q0 != 0 && q1 != 0 && std::abs(q0) > 1e-14 * c.norm() && std::abs(q1) > 1e-14 * c.norm()) {
        double s = std::sqrt(std::abs(q0 / q1));
        W1 = {W1[0] * s, W1[1] * s, W1[2] * s};
    }

    // X(W) = Q(W) P0 - 2 B(P0, W) W with W = W0 + x W1
    PolyD QW{c(W0), 2 * c.bilinear(W0, W1), c(W1)};
    PolyD BW{c.bilinear(p, W0), c.bilinear(p, W1)};
    ConicParam E;
    for (int i = 0; i < 3; ++i) {
        PolyD Wi{W0[i], W1[i]};
        E[i] = QW * p[i] - BW * Wi * 2.0;
    }
    return E;
}

john::ProjCoord parameter_of(const ConicParam& E, const Vec3& p)
{
    // components of E(x) x p are quadratics sharing the root
    std::array<std::array<double, 3>, 3> q{};
    for (int d = 0; d < 3; ++d) {
        Vec3 C{E[0][d], E[1][d], E[2][d]};
        Vec3 cp = cross(C, p);
        for (int i = 0; i < 3; ++i) q[i][d] = cp[i];
    }
    std::vector<john::ProjCoord> cand;
    for (int i = 0; i < 3; ++i)
        for (const auto& r : proj_quadratic_roots(q[i][0], q[i][1], q[i][2])) cand.push_back(r);
    if (cand.empty()) throw degenerate("DegenerateConic", "parameterization is constant");
    john::ProjCoord best = cand.front();
    double bd = std::numeric_limits<double>::infinity();
    for (const auto& r : cand) {
        Vec3 e = eval(E, r);
        double n = vnorm(e);
        if (n == 0) continue;
        double d = proj_dist(e, p);
        if (d < bd) {
            bd = d;
            best = r;
        }
    }
    return best;
}

template <class T>
ConicParamT<T> m_vector(const ConicParamT<T>& E)
{
    ConicParamT<T> d{E[0].derivative(), E[1].derivative(), E[2].derivative()};
    return {pcross_comp(E, d, 0), pcross_comp(E, d, 1), pcross_comp(E, d, 2)};
}

template <class T>
Poly<T> mixed_product(const ConicParamT<T>& M)
{
    ConicParamT<T> d1{M[0].derivative(), M[1].derivative(), M[2].derivative()};
    ConicParamT<T> d2{d1[0].derivative(), d1[1].derivative(), d1[2].derivative()};
    Poly<T> acc;
    for (int i = 0; i < 3; ++i) acc += M[i] * pcross_comp(d1, d2, i);
    return acc;
}

ConicParam conic_from_m(const ConicParam& M)
{
    PolyD mp = mixed_product(M);
    double scale = 0;
    for (const auto& m : M) scale = std::max(scale, m.norm_inf());
    double s3 = scale * scale * scale;
    if (mp.norm_inf() <= 1e-12 * s3) throw degenerate("CollinearM", "M(x) spans at most a plane; no smooth conic");
    for (int i = 1; i <= mp.degree(); ++i)
        if (std::abs(mp[i]) > 1e-9 * s3)
            throw invalid("NonconstantMixedProduct", "(M, M', M'') depends on x");
    double m = mp[0];
    if (m < 0) throw invalid("NegativeMixedProduct", "(M, M', M'') < 0; the sign-flipped vector -M has a solution");
    double f = 1 / std::sqrt(m);
    ConicParam d{M[0].derivative(), M[1].derivative(), M[2].derivative()};
    ConicParam E;
    for (int i = 0; i < 3; ++i) E[i] = pcross_comp(M, d, i) * f;
    return E;
}

template <class T>
Mat3T<T> coeff_matrix(const ConicParamT<T>& E)
{
    Mat3T<T> m{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) m[i][k] = E[i][k];
    return m;
}

template <class T>
curve::BiquadraticCurve<T> biquadratic_from_conics(const ConicParamT<T>& E, const ConicParamT<T>& G)
{
    auto M = m_vector(E);
    curve::BiquadraticCurve<T> c;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            T s(0);
            for (int j = 0; j < 3; ++j) s += M[j][i] * G[j][k];
            c.a[i][k] = s;
        }
    T d = det3(c.a);
    double rel;
    if constexpr (is_exact_v<T>) {
        rel = scalar_traits<T>::is_zero(d) ? 0.0 : 1.0;
    } else {
        double n = c.norm();
        rel = n == 0 ? 0 : std::abs(d) / (n * n * n);
    }
    if (rel <= 1e-12) throw degenerate("DegenerateBridge", "coefficient matrix has rank < 3");
    return c;
}

// ---------------------------------------------------------------------------

namespace {

// point on the line far from P, in projective terms
Vec3 second_point(const Vec3& line, const Vec3& P)
{
    Vec3 best{};
    double sep = -1;
    for (int k = 0; k < 3; ++k) {
        Vec3 e{};
        e[k] = 1;
        Vec3 R = cross(line, e);
        if (vnorm(R) == 0) continue;
        double s = proj_dist(R, P);
        if (s > sep) {
            sep = s;
            best = R;
        }
    }
    return unit(best);
}

// discriminant of the tangent at Q meeting B, relative to its scale
double tangent_margin(const Conic& A, const Conic& B, const Vec3& Q, Vec3* R_out = nullptr)
{
    Vec3 R = second_point(A.apply(Q), Q);
    if (R_out) *R_out = R;
    double bq = B(Q), bqr = B.bilinear(Q, R), br = B(R);
    double s = B.norm() * vnorm(Q) * vnorm(R);
    return (bqr * bqr - bq * br) / (s * s);
}

} // namespace

PonceletState start_state(const Conic& A, const Conic& B, const ConicParam& EA, double x, int orientation)
{
    Vec3 Q = unit(eval(EA, x));
    Vec3 D = eval(derivative(EA), x);
    Vec3 R;
    double margin = tangent_margin(A, B, Q, &R);
    if (margin < -1e-14) throw degenerate("NoRealIntersection", "the tangent misses B");
    if (dot(R, D) < 0) R = {-R[0], -R[1], -R[2]};
    double bq = B(Q), bqr = B.bilinear(Q, R), br = B(R);
    double sq = std::sqrt(std::max(bqr * bqr - bq * br, 0.0));
    double q = -(bqr + (bqr >= 0 ? sq : -sq));
    // lambda1 = q / br, lambda2 = bq / q along Q + lambda R
    Vec3 P1 = lin(Q, br, R, q), P2 = lin(Q, q, R, bq);
    double l1 = br != 0 ? q / br : std::numeric_limits<double>::infinity();
    double l2 = q != 0 ? bq / q : std::numeric_limits<double>::infinity();
    bool first = (l1 >= l2) == (orientation > 0);
    Vec3 P = first ? P1 : P2;
    if (vnorm(P) == 0) P = first ? P2 : P1;
    return {Q, unit(P), orientation};
}

std::optional<PonceletState> find_start(const Conic& A, const Conic& B, const ConicParam& EA, int orientation)
{
    // x = tan(theta) sweeps the whole parameter line
    double best = 0, bx = 0;
    const int M = 720;
    for (int j = 0; j < M; ++j) {
        double x = std::tan(std::numbers::pi * ((j + 0.5) / M - 0.5));
        double m = tangent_margin(A, B, unit(eval(EA, x)));
        if (m > best) {
            best = m;
            bx = x;
        }
    }
    if (best <= 1e-10) return std::nullopt;
    return start_state(A, B, EA, bx, orientation);
}

PonceletState geometric_step(const Conic& A, const Conic& B, const PonceletState& s)
{
    Vec3 l = A.apply(s.Q);
    Vec3 P = other_point(B, s.P, l);
    Vec3 pol = A.apply(P);
    Vec3 Q = other_point(A, s.Q, pol);
    return {Q, P, s.orientation};
}

double tangency_defect(const Conic& A, const PonceletState& s)
{
    return std::abs(A.bilinear(s.P, s.Q)) / (A.norm() * vnorm(s.P) * vnorm(s.Q));
}

double state_distance(const PonceletState& s, const PonceletState& t)
{
    return std::max(proj_dist(s.Q, t.Q), proj_dist(s.P, t.P));
}

std::vector<PonceletState> trajectory(const Conic& A, const Conic& B, const PonceletState& start, int steps)
{
    std::vector<PonceletState> out{start};
    for (int i = 0; i < steps; ++i) out.push_back(geometric_step(A, B, out.back()));
    return out;
}

std::optional<int> poncelet_period(const Conic& A, const Conic& B, const PonceletState& start, int maxN, double tol)
{
    auto tr = trajectory(A, B, start, 2 * maxN);
    for (int n = 1; n <= maxN; ++n) {
        if (state_distance(tr[n], start) < tol && state_distance(tr[2 * n], start) < tol) return n;
    }
    return std::nullopt;
}

std::string trajectory_csv(const std::vector<PonceletState>& t)
{
    std::ostringstream os;
    os.precision(17);
    os << "step,Qx,Qy,Px,Py\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& s = t[i];
        os << i << ',' << s.Q[1] / s.Q[0] << ',' << s.Q[2] / s.Q[0] << ',' << s.P[1] / s.P[0] << ','
           << s.P[2] / s.P[0] << '\n';
    }
    return os.str();
}

john::CurvePoint bridge_point(const curve::Curve& c, const ConicParam& EA, const ConicParam& EB, const PonceletState& s)
{
    return john::make_point(c, parameter_of(EA, s.Q), parameter_of(EB, s.P));
}

// ---------------------------------------------------------------------------

template <class T>
Poly<T> cayley_polynomial(const Mat3T<T>& A, const Mat3T<T>& B)
{
    std::array<std::array<Poly<T>, 3>, 3> m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = Poly<T>{T(A[i][j]), T(-B[i][j])};
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

namespace {

template <class T>
void hankel(const Mat3T<T>& A, const Mat3T<T>& B, CayleyResult<T>& res)
{
    Poly<T> F = cayley_polynomial(A, B);
    T f0 = F[0];
    if (scalar_traits<T>::is_zero(f0)) throw degenerate("DegenerateConic", "det A = 0");
    res.c = sqrt_taylor(F * (T(1) / f0), res.N);
    int off = res.N % 2 == 0 ? 3 : 2;
    res.order = res.N % 2 == 0 ? res.N / 2 - 1 : (res.N - 1) / 2;
    std::vector<std::vector<T>> H(res.order, std::vector<T>(res.order));
    for (int i = 0; i < res.order; ++i)
        for (int j = 0; j < res.order; ++j) H[i][j] = res.c[i + j + off];
    res.det = determinant(H);
}

} // namespace

template <class T>
CayleyResult<T> cayley_test(const Mat3T<T>& A, const Mat3T<T>& B, int N, double tol)
{
    if (N < 3) throw invalid("InvalidPeriod", "N >= 3");
    CayleyResult<T> res;
    res.N = N;
    hankel(A, B, res);
    if constexpr (is_exact_v<T>) {
        res.periodic = scalar_traits<T>::is_zero(res.det);
        res.distance = res.periodic ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        // Hankel determinants shrink quickly with the order, so the verdict uses the
        // distance to the zero set along the pencil A + s B instead of the raw size
        double na = 0, nb = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                na = std::max(na, std::abs(A[i][j]));
                nb = std::max(nb, std::abs(B[i][j]));
            }
        const double h = 1e-5;
        double dv[2];
        for (int sgn = 0; sgn < 2; ++sgn) {
            Mat3T<T> As = A;
            double s = (sgn ? -h : h) * na / nb;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) As[i][j] += s * B[i][j];
            CayleyResult<T> r;
            r.N = N;
            hankel(As, B, r);
            dv[sgn] = r.det;
        }
        res.scale = std::abs(dv[0] - dv[1]) / (2 * h);
        res.distance = res.scale > 0 ? std::abs(res.det) / res.scale : (res.det == 0 ? 0.0 : std::numeric_limits<double>::infinity());
        res.periodic = res.distance < tol;
    }
    return res;
}

Mat3Q to_rational(const Mat3& m)
{
    Mat3Q r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = rat(m[i][j]);
    return r;
}

// ---------------------------------------------------------------------------

BicentricResult bicentric_check(double R, double r, double d, int n, double tol)
{
    if (n < 3) throw invalid("InvalidGeometry", "n >= 3");
    if (!(r > 0) || !(d >= 0) || !(R > r + d)) throw invalid("InvalidGeometry", "need R > r + d >= r > 0");
    double a = 1 / (R + d), b = 1 / (R - d), c = 1 / r;
    BicentricResult out;

    double lambda = 1 + 2 * c * c * (a * a - b * b) / (a * a * (b * b - c * c));
    double omega = std::acosh(std::max(lambda, 1.0));
    double k = std::sqrt(std::max(0.0, -std::expm1(-2 * omega)));
    double K = elliptic::ellip_K(k);
    auto j = elliptic::jacobi_real(K / n, k);
    out.sc_lhs = j.sn.real() / j.cn.real();
    out.sc_rhs = (c * std::sqrt(b * b - a * a) + b * std::sqrt(c * c - a * a)) / (a * (b + c));
    auto close = [tol](double x, double y) { return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)}); };
    out.general_verdict = close(out.sc_lhs, out.sc_rhs);

    switch (n) {
    case 3:
        out.lhs = a + b;
        out.rhs = c;
        break;
    case 4:
        out.lhs = a * a + b * b;
        out.rhs = c * c;
        break;
    case 5:
        out.lhs = 4 * (a * a * a + b * b * b - c * c * c);
        out.rhs = std::pow(a + b - c, 3);
        break;
    default:
        out.lhs = out.sc_lhs;
        out.rhs = out.sc_rhs;
    }
    out.closed_form = n <= 5;
    out.verdict = close(out.lhs, out.rhs);
    return out;
}

// ---------------------------------------------------------------------------

Disposition disposition(const Conic& A, const Conic& B, double sep_tol)
{
    Disposition d;
    ConicParam EA = rational_parameterization(A);
    ConicParam DA = rational_parameterization(A.dual());
    d.intersections = count_real_quartic(restrict(B, EA), sep_tol);
    d.tangents = count_real_quartic(restrict(B.dual(), DA), sep_tol);
    if (d.intersections < 0 || d.tangents < 0) return d;
    int I = d.intersections, T = d.tangents;
    if (I == 0 && T == 0) {
        // tangents of A reach B only when A sits inside B
        try {
            (void)start_state(A, B, EA, 0.0);
            d.nested_inner = true;
        } catch (const Error&) {
            d.nested_inner = false;
        }
        d.kind = d.nested_inner ? 1 : 0;
    } else if (I == 4 && T == 4) {
        d.kind = 2;
    } else if (I == 2 && T == 2) {
        d.kind = 3;
    } else if (I == 4 && T == 0) {
        d.kind = 4;
    } else if (I == 0 && T == 4) {
        d.kind = 5;
    }
    return d;
}

Agreement three_way(const Conic& A, const Conic& B, int maxN)
{
    Agreement ag;
    ConicParam EA = rational_parameterization(A), EB = rational_parameterization(B);
    auto start = find_start(A, B, EA);
    if (!start) throw degenerate("NoRealIntersection", "no tangent of A meets B");
    ag.geometric = poncelet_period(A, B, *start, maxN);

    curve::Curve c = biquadratic_from_conics(EA, EB);
    double n = c.norm();
    for (auto& r : c.a)
        for (auto& v : r) v /= n;
    auto o = john::orbit(c, bridge_point(c, EA, EB, *start), 2 * maxN + 2);
    if (o.period && *o.period <= maxN) ag.john = o.period;

    ag.agree = ag.geometric == ag.john;
    for (int N = 3; N <= maxN; ++N) {
        bool v = cayley_test(A.M, B.M, N).periodic;
        ag.cayley.push_back(v);
        bool closes = ag.geometric && N % *ag.geometric == 0;
        if (v != closes) ag.agree = false;
    }
    return ag;
}

namespace {

Conic random_conic(std::mt19937_64& rng, bool hyperbola, double amin, double amax, double cspread)
{
    std::uniform_real_distribution<double> U(0, 1);
    double a = amin + (amax - amin) * U(rng), b = amin + (amax - amin) * U(rng);
    double th = std::numbers::pi * U(rng);
    double cx = cspread * (2 * U(rng) - 1), cy = cspread * (2 * U(rng) - 1);
    double cs = std::cos(th), sn = std::sin(th);
    // u = R^T (x - c)
    Mat3 T{{{1, 0, 0}, {-(cs * cx + sn * cy), cs, sn}, {-(-sn * cx + cs * cy), -sn, cs}}};
    Mat3 D{{{-1, 0, 0}, {0, 1 / (a * a), 0}, {0, 0, (hyperbola ? -1 : 1) / (b * b)}}};
    Conic c;
    c.M = D;
    return c.congruent(T);
}

Conic pencil(const Conic& A, const Conic& B, double t)
{
    Conic c;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c.M[i][j] = A.M[i][j] + t * B.M[i][j];
    return c;
}

std::optional<double> cayley_value(const Conic& A, const Conic& B, int N)
{
    try {
        if (std::abs(A.det()) < 1e-8 * std::pow(A.norm(), 3)) return std::nullopt;
        auto r = cayley_test(A.M, B.M, N);
        return r.det;
    } catch (const Error&) {
        return std::nullopt;
    }
}

} // namespace

std::optional<PairSample> random_pair(std::mt19937_64& rng, int kind, std::optional<int> target, int attempts)
{
    std::uniform_real_distribution<double> U(0, 1);
    for (int it = 0; it < attempts; ++it) {
        bool hypA = kind == 4 ? false : (kind >= 2 && U(rng) < 0.25);
        bool hypB = kind == 4 ? true : (kind >= 2 && U(rng) < 0.25);
        Conic A, B;
        if (kind == 1) {
            B = random_conic(rng, false, 1.2, 2.5, 0.3);
            A = random_conic(rng, false, 0.2, 0.9, 0.3);
        } else {
            A = random_conic(rng, hypA, 0.4, 1.6, 1.0);
            B = random_conic(rng, hypB, 0.4, 1.6, 1.0);
        }
        Disposition d;
        try {
            d = disposition(A, B);
        } catch (const Error&) {
            continue;
        }
        if (d.kind != kind) continue;
        if (!target) {
            try {
                (void)three_way(A, B, 3);
            } catch (const Error&) {
                continue;
            }
            return PairSample{A, B, d, std::nullopt};
        }

        // walk the pencil A + t B outward from t = 0 looking for a sign change
        int N = *target;
        double scale = A.norm() / B.norm();
        auto v0 = cayley_value(A, B, N);
        if (!v0) continue;
        const int steps = 200;
        const double tmax = 2.0;
        for (int dir : {1, -1}) {
            double tp = 0, vp = *v0;
            for (int s = 1; s <= steps; ++s) {
                double t = dir * tmax * s / steps;
                auto v = cayley_value(pencil(A, B, t * scale), B, N);
                if (!v) break;
                if ((*v > 0) != (vp > 0)) {
                    double lo = tp, hi = t, flo = vp;
                    for (int k = 0; k < 200 && std::abs(hi - lo) > 1e-16 * std::max(1.0, std::abs(hi)); ++k) {
                        double mid = 0.5 * (lo + hi);
                        auto fm = cayley_value(pencil(A, B, mid * scale), B, N);
                        if (!fm) break;
                        if ((*fm > 0) == (flo > 0)) {
                            lo = mid;
                            flo = *fm;
                        } else {
                            hi = mid;
                        }
                    }
                    Conic At = pencil(A, B, 0.5 * (lo + hi) * scale);
                    Disposition dt;
                    try {
                        dt = disposition(At, B);
                        (void)three_way(At, B, 3);
                    } catch (const Error&) {
                        break;
                    }
                    if (dt.kind != kind) break;
                    // a sign change across a pole of the Taylor coefficients is not a root
                    bool primitive = cayley_test(At.M, B.M, N).periodic;
                    for (int d = 3; d < N; ++d)
                        if (N % d == 0 && cayley_test(At.M, B.M, d).periodic) primitive = false;
                    if (!primitive) {
                        tp = t;
                        vp = *v;
                        continue;
                    }
                    return PairSample{At, B, dt, N};
                }
                tp = t;
                vp = *v;
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

template curve::BiquadraticCurve<double> biquadratic_from_conics(const ConicParamT<double>&, const ConicParamT<double>&);
template curve::BiquadraticCurve<rat> biquadratic_from_conics(const ConicParamT<rat>&, const ConicParamT<rat>&);
template ConicParamT<double> m_vector(const ConicParamT<double>&);
template ConicParamT<rat> m_vector(const ConicParamT<rat>&);
template Poly<double> mixed_product(const ConicParamT<double>&);
template Poly<rat> mixed_product(const ConicParamT<rat>&);
template Mat3T<double> coeff_matrix(const ConicParamT<double>&);
template Mat3T<rat> coeff_matrix(const ConicParamT<rat>&);
template Poly<double> cayley_polynomial(const Mat3T<double>&, const Mat3T<double>&);
template Poly<rat> cayley_polynomial(const Mat3T<rat>&, const Mat3T<rat>&);
template CayleyResult<double> cayley_test(const Mat3T<double>&, const Mat3T<double>&, int, double);
template CayleyResult<rat> cayley_test(const Mat3T<rat>&, const Mat3T<rat>&, int, double);

} // namespace biquad::poncelet
