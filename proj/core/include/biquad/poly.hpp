#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "biquad/errors.hpp"

namespace biquad {

using cplx = std::complex<double>;
using rat = mpq_class;

// ---------------------------------------------------------------------------
// scalar traits: double, complex<double> and mpq_class share one code path

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
    static constexpr bool exact = false;
    static double mag(double v) { return std::abs(v); }
    static double to_double(double v) { return v; }
    static bool is_zero(double v) { return v == 0.0; }
};

template <>
struct scalar_traits<cplx> {
    static constexpr bool exact = false;
    static double mag(const cplx& v) { return std::abs(v); }
    static double to_double(const cplx& v) { return v.real(); }
    static bool is_zero(const cplx& v) { return v == cplx(0.0); }
};

template <>
struct scalar_traits<rat> {
    static constexpr bool exact = true;
    static double mag(const rat& v) { return std::abs(v.get_d()); }
    static double to_double(const rat& v) { return v.get_d(); }
    static bool is_zero(const rat& v) { return sgn(v) == 0; }
};

template <class T>
inline constexpr bool is_exact_v = scalar_traits<T>::exact;

// exact square root of a rational, if it is a perfect square
std::optional<rat> rational_sqrt(const rat& v);

// ---------------------------------------------------------------------------

template <class T>
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<T> c) : c_(std::move(c)) { trim(); }
    Poly(std::initializer_list<T> c) : c_(c) { trim(); }

    static Poly constant(const T& v) { return Poly(std::vector<T>{v}); }
    static Poly monomial(int deg, const T& v = T(1))
    {
        std::vector<T> c(deg + 1, T(0));
        c[deg] = v;
        return Poly(std::move(c));
    }

    // -1 for the zero polynomial
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<T>& coeffs() const { return c_; }
    T operator[](int i) const { return (i >= 0 && i < (int)c_.size()) ? c_[i] : T(0); }
    T lead() const { return c_.empty() ? T(0) : c_.back(); }

    template <class U>
    auto operator()(const U& x) const
    {
        using R = std::conditional_t<std::is_same_v<U, cplx> || std::is_same_v<T, cplx>, cplx,
                                     std::conditional_t<std::is_same_v<T, rat> && std::is_same_v<U, rat>, rat, double>>;
        R acc(0);
        for (int i = degree(); i >= 0; --i) {
            acc = acc * R(x) + conv<R>(c_[i]);
        }
        return acc;
    }

    Poly derivative() const
    {
        if (c_.size() <= 1) return Poly();
        std::vector<T> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * T(static_cast<long>(i));
        return Poly(std::move(d));
    }

    // p(q(x))
    Poly compose(const Poly& q) const
    {
        Poly acc;
        for (int i = degree(); i >= 0; --i) acc = acc * q + Poly::constant(c_[i]);
        return acc;
    }

    // scales the argument: p(s*x)
    Poly scale_arg(const T& s) const
    {
        std::vector<T> c = c_;
        T f(1);
        for (auto& v : c) {
            v = v * f;
            f = f * s;
        }
        return Poly(std::move(c));
    }

    Poly reversed(int n) const
    {
        std::vector<T> c(n + 1, T(0));
        for (int i = 0; i <= std::min(n, degree()); ++i) c[n - i] = c_[i];
        return Poly(std::move(c));
    }

    Poly monic() const
    {
        if (is_zero()) return *this;
        T l = lead();
        std::vector<T> c = c_;
        for (auto& v : c) v = v / l;
        return Poly(std::move(c));
    }

    double norm_inf() const
    {
        double m = 0;
        for (const auto& v : c_) m = std::max(m, scalar_traits<T>::mag(v));
        return m;
    }

    friend Poly operator+(const Poly& a, const Poly& b)
    {
        std::vector<T> c(std::max(a.c_.size(), b.c_.size()), T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] = c[i] + a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] = c[i] + b.c_[i];
        return Poly(std::move(c));
    }
    friend Poly operator-(const Poly& a) { return a * T(-1); }
    friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
    friend Poly operator*(const Poly& a, const Poly& b)
    {
        if (a.is_zero() || b.is_zero()) return Poly();
        std::vector<T> c(a.c_.size() + b.c_.size() - 1, T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] = c[i + j] + a.c_[i] * b.c_[j];
        return Poly(std::move(c));
    }
    friend Poly operator*(const Poly& a, const T& s)
    {
        std::vector<T> c = a.c_;
        for (auto& v : c) v = v * s;
        return Poly(std::move(c));
    }
    friend Poly operator*(const T& s, const Poly& a) { return a * s; }
    Poly& operator+=(const Poly& o) { return *this = *this + o; }
    Poly& operator-=(const Poly& o) { return *this = *this - o; }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }

    friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

    // quotient and remainder; field coefficients assumed
    std::pair<Poly, Poly> divmod(const Poly& d) const
    {
        if (d.is_zero()) throw invalid("DivisionByZeroFn", "polynomial division by zero");
        std::vector<T> r = c_;
        int dd = d.degree();
        if (degree() < dd) return {Poly(), *this};
        std::vector<T> q(degree() - dd + 1, T(0));
        for (int i = degree(); i >= dd; --i) {
            T f = r[i] / d.lead();
            q[i - dd] = f;
            for (int j = 0; j <= dd; ++j) r[i - dd + j] = r[i - dd + j] - f * d.c_[j];
            r[i] = T(0);
        }
        r.resize(dd);
        return {Poly(std::move(q)), Poly(std::move(r))};
    }

    template <class U>
    Poly<U> cast() const
    {
        std::vector<U> c;
        c.reserve(c_.size());
        for (const auto& v : c_) c.push_back(conv<U>(v));
        return Poly<U>(std::move(c));
    }

    template <class R, class S>
    static R conv(const S& v)
    {
        if constexpr (std::is_same_v<S, rat> && !std::is_same_v<R, rat>) {
            return R(v.get_d());
        } else if constexpr (std::is_same_v<S, cplx> && std::is_same_v<R, double>) {
            return v.real();
        } else {
            return R(v);
        }
    }

private:
    void trim()
    {
        if constexpr (is_exact_v<T>) {
            while (!c_.empty() && scalar_traits<T>::is_zero(c_.back())) c_.pop_back();
        } else {
            double m = 0;
            for (const auto& v : c_) m = std::max(m, scalar_traits<T>::mag(v));
            double cut = 1e-13 * m;
            while (!c_.empty() && scalar_traits<T>::mag(c_.back()) <= cut) c_.pop_back();
            if (m == 0) c_.clear();
        }
    }

    std::vector<T> c_;
};

using PolyD = Poly<double>;
using PolyC = Poly<cplx>;
using PolyQ = Poly<rat>;

// monic gcd over an exact field
PolyQ gcd(PolyQ a, PolyQ b);

// ---------------------------------------------------------------------------
// Laurent series: coefficient of t^p stored at c[p - min_power]

template <class T>
struct LaurentSeries {
    int min_power = 0;
    std::vector<T> c;

    T at(int p) const
    {
        int i = p - min_power;
        return (i >= 0 && i < (int)c.size()) ? c[i] : T(0);
    }
    int max_power() const { return min_power + (int)c.size() - 1; }
};

// Taylor coefficients c_0..c_n of sqrt(p) at the origin, c_0 the principal root
template <class T>
std::vector<T> sqrt_taylor(const Poly<T>& p, int n);

// Laurent expansion of sqrt(R) at infinity for deg R = 4.  Returns the series
// in powers t^2, t^1, ..., t^{-n}; C_j (coefficient of t^{-j}) = at(-j).
template <class T>
LaurentSeries<T> sqrt_laurent_inf(const Poly<T>& R, int n);

// classical relative invariants of b0 x^4 + 4 b1 x^3 + 6 b2 x^2 + 4 b3 x + b4
template <class T>
std::pair<T, T> invariants_g2_g3(const Poly<T>& p);

// determinant of a dense square matrix (row major)
template <class T>
T determinant(std::vector<std::vector<T>> m);

template <class T>
T resultant(const Poly<T>& p, const Poly<T>& q);

template <class T>
T poly_discriminant(const Poly<T>& p);

// complex roots by companion eigenvalues, Newton-polished
std::vector<cplx> roots(const PolyC& p);
std::vector<cplx> roots(const PolyD& p);
// real roots (|imag| below tol * scale), sorted ascending
std::vector<double> real_roots(const PolyD& p, double tol = 1e-9);

// ---------------------------------------------------------------------------

template <class T>
struct Mobius {
    T mu, nu, xi, eta; // x -> (mu x + nu) / (xi x + eta)

    T det() const { return mu * eta - nu * xi; }
    template <class U>
    auto operator()(const U& x) const
    {
        return (mu * x + nu) / (xi * x + eta);
    }
    Mobius inverse() const { return {eta, -nu, -xi, mu}; }
    // this o other
    Mobius compose(const Mobius& o) const
    {
        return {mu * o.mu + nu * o.xi, mu * o.nu + nu * o.eta, xi * o.mu + eta * o.xi, xi * o.nu + eta * o.eta};
    }
};

// (xi x + eta)^4 p((mu x + nu)/(xi x + eta)) for deg p <= 4
template <class T>
Poly<T> mobius_weighted_transform(const Poly<T>& p, const Mobius<T>& m, int weight = 4);

// ---------------------------------------------------------------------------

template <class T>
class RationalFn {
public:
    RationalFn() : num_(), den_(Poly<T>::constant(T(1))) {}
    RationalFn(Poly<T> n) : num_(std::move(n)), den_(Poly<T>::constant(T(1))) {}
    RationalFn(Poly<T> n, Poly<T> d);

    const Poly<T>& num() const { return num_; }
    const Poly<T>& den() const { return den_; }

    template <class U>
    auto operator()(const U& x) const
    {
        return num_(x) / den_(x);
    }

    RationalFn derivative() const;
    // this(g(x))
    RationalFn compose(const RationalFn& g) const;

    friend RationalFn operator+(const RationalFn& a, const RationalFn& b)
    {
        return RationalFn(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RationalFn operator-(const RationalFn& a, const RationalFn& b)
    {
        return RationalFn(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RationalFn operator*(const RationalFn& a, const RationalFn& b)
    {
        return RationalFn(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RationalFn operator/(const RationalFn& a, const RationalFn& b)
    {
        if (b.num_.is_zero()) throw invalid("DivisionByZeroFn", "rational function division by zero");
        return RationalFn(a.num_ * b.den_, a.den_ * b.num_);
    }
    friend bool operator==(const RationalFn& a, const RationalFn& b)
    {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

private:
    void normalize();
    Poly<T> num_, den_;
};

using RationalQ = RationalFn<rat>;

// helpers for exact coefficient formatting
std::string to_string(const rat& v);
std::string to_string(const PolyQ& p);

} // namespace biquad
