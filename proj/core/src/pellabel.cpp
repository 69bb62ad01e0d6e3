#include "biquad/pellabel.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace biquad::pell {

namespace {

PolyQ sq(const PolyQ& p) { return p * p; }

bool is_constant(const PolyQ& p) { return p.degree() <= 0; }

// p/q with |x - p/q| <= tol |x|, by continued fractions
rat snap(double x, double tol)
{
    if (x == 0) return rat(0);
    double target = std::abs(x) * tol;
    mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        double a = std::floor(r);
        mpz_class ai(a);
        mpz_class h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        rat v(h1, k1);
        v.canonicalize();
        if (std::abs(v.get_d() - x) <= target) return v;
        double f = r - a;
        if (f == 0) return v;
        r = 1 / f;
    }
    return rat(x);
}

} // namespace

bool verify(const PellAbelSolution& s)
{
    if (sgn(s.L) == 0) return false;
    PolyQ d = sq(s.P) - s.R * sq(s.Q) - PolyQ::constant(s.L);
    return d.is_zero();
}

PellAbelSolution compose(const PellAbelSolution& s)
{
    PellAbelSolution out = s;
    out.P = sq(s.P) + s.R * sq(s.Q);
    out.Q = s.P * s.Q * rat(2);
    out.L = s.L * s.L;
    return out;
}

PellAbelSolution pell_abel_solve(const PolyQ& R, int max_deg_Q)
{
    if (R.degree() != 4) throw invalid("DegreeMismatch", "Pell-Abel solver takes a quartic");
    PellAbelSolution sol;
    sol.lead = R.lead();
    sol.R = R.monic();
    const PolyQ& Rm = sol.R;

    auto lau = sqrt_laurent_inf(Rm, 0);
    PolyQ S{lau.at(0), lau.at(1), lau.at(2)};
    if ((Rm - sq(S)).is_zero()) throw invalid("PerfectSquareR", "R is the square of a polynomial");

    // complete quotients (a + sqrt R)/b, convergents h/k
    PolyQ a, b = PolyQ::constant(rat(1));
    PolyQ h_prev = PolyQ::constant(rat(1)), h_prev2;
    PolyQ k_prev, k_prev2 = PolyQ::constant(rat(1));
    for (int i = 0;; ++i) {
        PolyQ q = (a + S).divmod(b).first;
        PolyQ h = q * h_prev + h_prev2;
        PolyQ k = q * k_prev + k_prev2;
        if (k.degree() > max_deg_Q)
            throw numerical("BudgetExhausted", "no solution with deg Q <= " + std::to_string(max_deg_Q));
        PolyQ a_next = q * b - a;
        auto [b_next, rem] = (Rm - sq(a_next)).divmod(b);
        if (!rem.is_zero()) throw numerical("ContinuedFractionBroken", "non-exact complete quotient");
        if (is_constant(b_next)) {
            sol.P = h;
            sol.Q = k;
            sol.L = (i % 2 == 0 ? rat(-1) : rat(1)) * b_next[0];
            sol.steps = i + 1;
            if (!verify(sol)) throw numerical("VerificationFailed", "P^2 - R Q^2 is not constant");
            return sol;
        }
        a = a_next;
        b = b_next;
        h_prev2 = h_prev;
        h_prev = h;
        k_prev2 = k_prev;
        k_prev = k;
    }
}

PolyQ rationalize(const PolyD& p, double rel_tol)
{
    std::vector<rat> c;
    for (int i = 0; i <= p.degree(); ++i) c.push_back(snap(p[i], rel_tol));
    return PolyQ(std::move(c));
}

template <class T>
T malyshev_gamma(const Poly<T>& R, int k)
{
    if (R.degree() != 4) throw invalid("DegreeMismatch", "Gamma_k needs a quartic");
    if (k < 1) throw invalid("InvalidIndex", "k >= 1");
    Poly<T> Rn = R.monic();
    auto L = sqrt_laurent_inf(Rn, 2 * k - 1);
    std::vector<std::vector<T>> H(k, std::vector<T>(k));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) H[i][j] = L.at(-(i + j + 1));
    return determinant(H);
}

template <class T>
Poly<T> bridge_cubic_to_quartic(const Poly<T>& F)
{
    if (F.degree() > 3) throw invalid("DegreeMismatch", "F must be at most cubic");
    if (scalar_traits<T>::is_zero(F[0])) throw degenerate("DegenerateQuartic", "F(0) = 0 gives deg R < 4");
    return F.reversed(4);
}

template <class T>
Poly<T> quartic_to_cubic(const Poly<T>& R)
{
    if (R.degree() > 4) throw invalid("DegreeMismatch", "R must be at most quartic");
    if (!scalar_traits<T>::is_zero(R[0])) throw invalid("NonzeroConstant", "R(0) != 0");
    return R.reversed(4);
}

template <class T>
Shifted<T> shift_to_root(const Poly<T>& R)
{
    if constexpr (is_exact_v<T>) {
        if (scalar_traits<T>::is_zero(R[0])) return {R, T(0)};
        for (double r : real_roots(R.template cast<double>())) {
            rat lam = snap(r, 1e-12);
            if (scalar_traits<T>::is_zero(R(lam))) return {R.compose(Poly<T>{lam, rat(1)}), lam};
        }
        throw invalid("NoRealRoot", "R has no rational real root");
    } else {
        if (std::abs(R[0]) <= 1e-14 * R.norm_inf()) return {R, 0.0};
        auto rs = real_roots(R);
        if (rs.empty()) throw invalid("NoRealRoot", "R has no real root");
        double lam = rs.front();
        return {R.compose(PolyD{lam, 1.0}), lam};
    }
}

double abel_integral_check(const PellAbelSolution& s, double t0, double t1)
{
    if (t0 == t1) return 0;
    if (t1 < t0) std::swap(t0, t1);
    // the solution belongs to the monic quartic
    PolyD P = s.P.cast<double>(), Q = s.Q.cast<double>(), R = s.R.cast<double>();
    double L = s.L.get_d();
    auto inside = [&](const PolyD& p) {
        for (double r : real_roots(p))
            if (r >= t0 && r <= t1) return true;
        return false;
    };
    if (R(t0) <= 0 || inside(R)) throw invalid("IntegrandSingular", "R vanishes or is negative on the interval");
    if (!Q.is_zero() && inside(Q)) throw invalid("IntegrandSingular", "Q vanishes on the interval");
    PolyD dP = P.derivative();
    auto f = [&](double t) { return 2 * dP(t) / (Q(t) * std::sqrt(R(t))); };
    double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, t0, t1, 15, 1e-14);
    auto log_ratio = [&](double t) {
        double w = std::sqrt(R(t)) * Q(t), p = P(t);
        double plus = p + w, minus = p - w;
        // the smaller factor is L over the larger
        if (std::abs(plus) >= std::abs(minus)) return 2 * std::log(std::abs(plus)) - std::log(std::abs(L));
        return std::log(std::abs(L)) - 2 * std::log(std::abs(minus));
    };
    return std::abs(integral - (log_ratio(t1) - log_ratio(t0)));
}

BridgeReport poncelet_pell_bridge_test(const poncelet::Mat3Q& A, const poncelet::Mat3Q& B, int maxN)
{
    BridgeReport rep;
    poncelet::Conic dA, dB;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            dA.M[i][j] = A[i][j].get_d();
            dB.M[i][j] = B[i][j].get_d();
        }
    auto EA = poncelet::rational_parameterization(dA);
    auto start = poncelet::find_start(dA, dB, EA);
    if (start) rep.period = poncelet::poncelet_period(dA, dB, *start, maxN);

    rep.F = poncelet::cayley_polynomial(A, B);
    rep.R = shift_to_root(bridge_cubic_to_quartic(rep.F)).R;
    PolyQ Rm = rep.R.monic();
    for (int k = 1; k <= std::max(1, maxN / 2); ++k) rep.gamma.push_back(malyshev_gamma(Rm, k).get_d());

    rep.applicable = rep.period && *rep.period % 2 == 0;
    if (!rep.period) rep.note = "no period within bound";
    else if (!rep.applicable) rep.note = "odd period: the even-period bridge does not apply";
    try {
        rep.solution = pell_abel_solve(rep.R, maxN);
        rep.solved = true;
    } catch (const Error& e) {
        if (e.name() != "BudgetExhausted") throw;
        rep.budget_exhausted = true;
    }
    return rep;
}

BridgeReport poncelet_pell_bridge_test(const poncelet::Conic& A, const poncelet::Conic& B, int maxN)
{
    return poncelet_pell_bridge_test(poncelet::to_rational(A.M), poncelet::to_rational(B.M), maxN);
}

std::vector<ConstructedPair> even_period_suite()
{
    std::vector<ConstructedPair> out;
    auto pair = [&](rat alpha, rat beta, int n) {
        ConstructedPair p;
        for (auto& r : p.A)
            for (auto& v : r) v = 0;
        p.B = p.A;
        p.A[0][0] = -1;
        p.A[1][1] = 1 / alpha;
        p.A[2][2] = 1 / beta;
        p.B[0][0] = -1;
        p.B[1][1] = 1;
        p.B[2][2] = 1;
        p.period = n;
        out.push_back(p);
    };
    for (auto [num, den] : {std::pair{1, 3}, {1, 5}, {1, 4}, {2, 5}, {1, 6}}) {
        rat a(num, den);
        a.canonicalize();
        pair(a, 1 - a, 4);
    }
    // (alpha - beta)^2 + 2 (alpha + beta) = 3, parameterized by u = alpha - beta
    for (auto [num, den] : {std::pair{1, 3}, {1, 5}, {1, 2}, {2, 3}, {1, 7}}) {
        rat u(num, den);
        u.canonicalize();
        rat m = (3 - u * u) / 4;
        pair(m + u / 2, m - u / 2, 6);
    }
    return out;
}

template rat malyshev_gamma(const PolyQ&, int);
template double malyshev_gamma(const PolyD&, int);
template PolyQ bridge_cubic_to_quartic(const PolyQ&);
template PolyD bridge_cubic_to_quartic(const PolyD&);
template PolyQ quartic_to_cubic(const PolyQ&);
template PolyD quartic_to_cubic(const PolyD&);
template Shifted<rat> shift_to_root(const PolyQ&);
template Shifted<double> shift_to_root(const PolyD&);

} // namespace biquad::pell
