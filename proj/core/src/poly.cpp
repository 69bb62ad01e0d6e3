#include "biquad/poly.hpp"

#include <sstream>

#include <Eigen/Dense>

namespace biquad {

std::optional<rat> rational_sqrt(const rat& v)
{
    if (sgn(v) < 0) return std::nullopt;
    mpz_class n = v.get_num(), d = v.get_den();
    if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return std::nullopt;
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
    rat r(rn, rd);
    r.canonicalize();
    return r;
}

PolyQ gcd(PolyQ a, PolyQ b)
{
    while (!b.is_zero()) {
        auto r = a.divmod(b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

namespace {

template <class T>
T principal_sqrt(const T& v)
{
    if constexpr (std::is_same_v<T, rat>) {
        auto r = rational_sqrt(v);
        if (!r) throw invalid("NotPerfectSquare", "exact square root of " + to_string(v) + " is irrational");
        return *r;
    } else if constexpr (std::is_same_v<T, double>) {
        if (v < 0) throw invalid("NegativeRadicand", "real square root of a negative constant term");
        return std::sqrt(v);
    } else {
        return std::sqrt(v);
    }
}

} // namespace

template <class T>
std::vector<T> sqrt_taylor(const Poly<T>& p, int n)
{
    if (scalar_traits<T>::is_zero(p[0])) throw invalid("ZeroAtOrigin", "p(0) = 0");
    std::vector<T> s(n + 1, T(0));
    s[0] = principal_sqrt(p[0]);
    T two_s0 = T(2) * s[0];
    for (int k = 1; k <= n; ++k) {
        T acc = p[k];
        for (int i = 1; i < k; ++i) acc = acc - s[i] * s[k - i];
        s[k] = acc / two_s0;
    }
    return s;
}

template <class T>
LaurentSeries<T> sqrt_laurent_inf(const Poly<T>& R, int n)
{
    if (R.degree() != 4) throw invalid("DegreeMismatch", "sqrt at infinity needs a quartic");
    // s = 1/t: sqrt(R) = t^2 sqrt(r(s)), r(s) = s^4 R(1/s)
    Poly<T> r = R.reversed(4);
    auto d = sqrt_taylor(r, n + 2);
    LaurentSeries<T> out;
    out.min_power = -n;
    out.c.assign(n + 3, T(0));
    for (int i = 0; i <= n + 2; ++i) out.c[(2 - i) - out.min_power] = d[i];
    return out;
}

template <class T>
std::pair<T, T> invariants_g2_g3(const Poly<T>& p)
{
    if (p.degree() > 4 || p.degree() < 0) throw invalid("DegreeMismatch", "invariants need degree 3 or 4");
    T b0 = p[4], b1 = p[3] / T(4), b2 = p[2] / T(6), b3 = p[1] / T(4), b4 = p[0];
    T g2 = b0 * b4 - T(4) * b1 * b3 + T(3) * b2 * b2;
    T g3 = b0 * b2 * b4 + T(2) * b1 * b2 * b3 - b2 * b2 * b2 - b0 * b3 * b3 - b1 * b1 * b4;
    return {g2, g3};
}

template <class T>
T determinant(std::vector<std::vector<T>> m)
{
    const int n = (int)m.size();
    T det(1);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        double best = -1;
        for (int r = col; r < n; ++r) {
            double v = scalar_traits<T>::mag(m[r][col]);
            if (!scalar_traits<T>::is_zero(m[r][col]) && v > best) {
                best = v;
                piv = r;
            }
        }
        if (piv < 0) return T(0);
        if (piv != col) {
            std::swap(m[piv], m[col]);
            det = -det;
        }
        det = det * m[col][col];
        for (int r = col + 1; r < n; ++r) {
            if (scalar_traits<T>::is_zero(m[r][col])) continue;
            T f = m[r][col] / m[col][col];
            for (int c = col; c < n; ++c) m[r][c] = m[r][c] - f * m[col][c];
        }
    }
    return det;
}

template <class T>
T resultant(const Poly<T>& p, const Poly<T>& q)
{
    const int m = p.degree(), n = q.degree();
    if (m < 0 || n < 0) return T(0);
    if (m + n == 0) return T(1);
    const int N = m + n;
    std::vector<std::vector<T>> S(N, std::vector<T>(N, T(0)));
    for (int r = 0; r < n; ++r)
        for (int i = 0; i <= m; ++i) S[r][r + i] = p[m - i];
    for (int r = 0; r < m; ++r)
        for (int i = 0; i <= n; ++i) S[n + r][r + i] = q[n - i];
    return determinant(std::move(S));
}

template <class T>
T poly_discriminant(const Poly<T>& p)
{
    const int n = p.degree();
    if (n < 1) throw invalid("DegreeMismatch", "discriminant needs degree >= 1");
    T r = resultant(p, p.derivative()) / p.lead();
    return ((n * (n - 1) / 2) % 2) ? T(-r) : r;
}

std::vector<cplx> roots(const PolyC& p)
{
    const int n = p.degree();
    if (n < 1) return {};
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -p[i] / p.lead();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
    PolyC dp = p.derivative();
    for (auto& z : out) {
        for (int it = 0; it < 4; ++it) {
            cplx d = dp(z);
            if (std::abs(d) == 0) break;
            cplx step = p(z) / d;
            if (!std::isfinite(std::abs(step))) break;
            cplx zn = z - step;
            if (std::abs(p(zn)) > std::abs(p(z))) break;
            z = zn;
        }
    }
    return out;
}

std::vector<cplx> roots(const PolyD& p) { return roots(p.cast<cplx>()); }

std::vector<double> real_roots(const PolyD& p, double tol)
{
    std::vector<double> out;
    for (const auto& z : roots(p))
        if (std::abs(z.imag()) <= tol * std::max(1.0, std::abs(z))) out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

template <class T>
Poly<T> mobius_weighted_transform(const Poly<T>& p, const Mobius<T>& m, int weight)
{
    if (scalar_traits<T>::is_zero(m.det())) throw invalid("DegenerateMobius", "zero determinant");
    if (p.degree() > weight) throw invalid("DegreeMismatch", "degree exceeds weight");
    Poly<T> num{m.nu, m.mu}, den{m.eta, m.xi};
    Poly<T> acc;
    for (int i = 0; i <= weight; ++i) {
        if (scalar_traits<T>::is_zero(p[i])) continue;
        Poly<T> term = Poly<T>::constant(p[i]);
        for (int j = 0; j < i; ++j) term = term * num;
        for (int j = i; j < weight; ++j) term = term * den;
        acc += term;
    }
    return acc;
}

template <class T>
RationalFn<T>::RationalFn(Poly<T> n, Poly<T> d) : num_(std::move(n)), den_(std::move(d))
{
    if (den_.is_zero()) throw invalid("DivisionByZeroFn", "zero denominator");
    normalize();
}

template <class T>
void RationalFn<T>::normalize()
{
    if constexpr (is_exact_v<T>) {
        if (num_.is_zero()) {
            den_ = Poly<T>::constant(T(1));
            return;
        }
        Poly<T> g = gcd(num_, den_);
        if (g.degree() > 0) {
            num_ = num_.divmod(g).first;
            den_ = den_.divmod(g).first;
        }
        T l = den_.lead();
        num_ = num_ * (T(1) / l);
        den_ = den_.monic();
    }
}

template <class T>
RationalFn<T> RationalFn<T>::derivative() const
{
    return RationalFn(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
}

template <class T>
RationalFn<T> RationalFn<T>::compose(const RationalFn& g) const
{
    // sum num_i a^i b^(d-i) / sum den_i a^i b^(d-i), d = max degree
    const int d = std::max(num_.degree(), den_.degree());
    std::vector<Poly<T>> apow(d + 1), bpow(d + 1);
    apow[0] = bpow[0] = Poly<T>::constant(T(1));
    for (int i = 1; i <= d; ++i) {
        apow[i] = apow[i - 1] * g.num();
        bpow[i] = bpow[i - 1] * g.den();
    }
    Poly<T> N, D;
    for (int i = 0; i <= d; ++i) {
        N += apow[i] * bpow[d - i] * num_[i];
        D += apow[i] * bpow[d - i] * den_[i];
    }
    return RationalFn(N, D);
}

std::string to_string(const rat& v) { return v.get_str(); }

std::string to_string(const PolyQ& p)
{
    std::ostringstream os;
    os << "[";
    for (int i = 0; i <= p.degree(); ++i) os << (i ? "," : "") << p[i].get_str();
    os << "]";
    return os.str();
}

#define BIQUAD_INST(T)                                                                   \
    template std::vector<T> sqrt_taylor<T>(const Poly<T>&, int);                         \
    template LaurentSeries<T> sqrt_laurent_inf<T>(const Poly<T>&, int);                  \
    template std::pair<T, T> invariants_g2_g3<T>(const Poly<T>&);                        \
    template T determinant<T>(std::vector<std::vector<T>>);                              \
    template T resultant<T>(const Poly<T>&, const Poly<T>&);                             \
    template T poly_discriminant<T>(const Poly<T>&);                                     \
    template Poly<T> mobius_weighted_transform<T>(const Poly<T>&, const Mobius<T>&, int); \
    template class RationalFn<T>;

BIQUAD_INST(double)
BIQUAD_INST(cplx)
BIQUAD_INST(rat)

} // namespace biquad
