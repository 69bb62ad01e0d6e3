#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "biquad/elliptic.hpp"
#include "biquad/poly.hpp"

namespace biquad::curve {

// F(x, y) = sum a[i][k] x^i y^k, i is the x-degree
template <class T>
struct BiquadraticCurve {
    std::array<std::array<T, 3>, 3> a{};

    bool is_symmetric() const
    {
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                if (!(a[i][k] == a[k][i])) return false;
        return true;
    }

    template <class U>
    auto operator()(const U& x, const U& y) const
    {
        U acc(0), xp(1);
        for (int i = 0; i < 3; ++i) {
            U yp(1);
            for (int k = 0; k < 3; ++k) {
                acc += U(conv(a[i][k])) * xp * yp;
                yp *= y;
            }
            xp *= x;
        }
        return acc;
    }

    double norm() const
    {
        double m = 0;
        for (const auto& r : a)
            for (const auto& v : r) m = std::max(m, scalar_traits<T>::mag(v));
        return m;
    }

    BiquadraticCurve transposed() const
    {
        BiquadraticCurve t;
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) t.a[i][k] = a[k][i];
        return t;
    }

private:
    static auto conv(const T& v)
    {
        if constexpr (std::is_same_v<T, rat>) return v.get_d();
        else return v;
    }
};

using Curve = BiquadraticCurve<double>;
using CurveQ = BiquadraticCurve<rat>;

// x^2 y^2 + a (x^2 + y^2) + 2 b x y + c
Curve euler_baxter(double a, double b, double c);
// x^2 y^2 + a (x^2 - y^2) + 2 b x y + c
Curve asym_iii(double a, double b, double c = -1.0);

// quadratic in y: A2(x) y^2 + A1(x) y + A0(x); index 0..2 holds A0, A1, A2
template <class T>
std::array<Poly<T>, 3> a_form(const BiquadraticCurve<T>& c);
template <class T>
std::array<Poly<T>, 3> b_form(const BiquadraticCurve<T>& c);

template <class T>
std::pair<Poly<T>, Poly<T>> discriminants(const BiquadraticCurve<T>& c);

template <class T>
std::pair<T, T> curve_invariants(const BiquadraticCurve<T>& c);

// (x0 : x1) projective evaluation helpers
double residual(const Curve& c, double x, double y);

enum class GenusKind { elliptic, singular, reducible };
struct GenusReport {
    GenusKind kind = GenusKind::elliptic;
    double delta = 0;                         // g2^3 - 27 g3^2 of D1
    std::optional<std::pair<cplx, cplx>> point; // a finite singular point when found
};
GenusReport genus_and_singularities(const Curve& c, double tol = 1e-10);

template <class T>
BiquadraticCurve<T> stieltjes_curve(const std::array<T, 5>& b, const T& C);

// --- canonical classification ------------------------------------------------

enum class Family { EB_i, EB_ii, ASYM_iii, degenerate };
std::string family_name(Family f);

struct CanonicalTag {
    Family family = Family::degenerate;
    int subcase = -1; // vertex case 0..5
    double a = 0, b = 0, c = 0;
    double scale = 1; // original coordinate = scale * canonical coordinate
    int x_vertices = 0, y_vertices = 0;
};

// curve must already be in an Euler-Baxter or case-(iii) shape
CanonicalTag classify(const Curve& c, double tol = 1e-10);
double b_tilde(const CanonicalTag& t);

struct Reduction {
    CanonicalTag tag;
    Mobius<double> gamma; // x = gamma(x~), y = gamma(y~)
    double off_form_residual = 0;
};
Reduction reduce_symmetric_to_eb(const Curve& c, double tol = 1e-8);

// substitute x = m(x~), y = m(y~) and clear denominators
Curve apply_mobius(const Curve& c, const Mobius<double>& mx, const Mobius<double>& my);

// --- elliptic parameterization ---------------------------------------------------

enum class ParamFamily { Bax_par, par13, par58, par4, par7, par_asym, par_a1, par_a2 };
std::string param_family_name(ParamFamily f);

struct Parameterization {
    ParamFamily family = ParamFamily::Bax_par;
    elliptic::EllipticModulus modulus;
    cplx eta;
    elliptic::Ratio fx = elliptic::Ratio::sn, fy = elliptic::Ratio::sn;
    double px = 1, py = 1;  // prefactors; py carries the branch sign
    cplx cx, cy;            // centres of even symmetry of fx and fy
    std::vector<cplx> branch_base; // real points: t = base + dir * tau, tau real
    cplx dir = 1.0;
    double line_period = 0; // period of tau along one branch
    cplx w1, w2;            // lattice of t -> (x, y); w1 = dir * line_period
    // canonical coordinates -> original coordinates, one map per axis
    Mobius<double> chart{1, 0, 0, 1}, chart_y{1, 0, 0, 1};
    CanonicalTag tag;

    // point in canonical (pre-chart) coordinates; nullopt at poles
    std::optional<std::pair<cplx, cplx>> canonical_point(cplx t) const;
    // point in original coordinates (may be infinite: returns nullopt)
    std::optional<std::pair<cplx, cplx>> point(cplx t) const;

    // John map acts as t -> t + shift()
    cplx shift() const;
    // shift = alpha w1 + beta w2
    std::pair<double, double> shift_coordinates() const;
    // fraction of a turn per step along a branch, in [0, 1)
    double rotation_ratio() const;
    // the ratio as written in the closed-form criteria for this family
    double stated_ratio() const;
    // max |F(x(t), y(t))| / |a| over samples on every branch
    double max_residual(const Curve& c, int samples = 256) const;
    // largest chordal distance of a branch point from the real plane
    double reality_defect(int samples = 64) const;
};

Parameterization parameterize(const CanonicalTag& tag);
// forward construction: family, modulus and shift give (a, b, c)
CanonicalTag tag_from_shift(ParamFamily fam, double k, cplx eta);

struct Located {
    cplx t;
    int branch = 0;
    double tau = 0; // coordinate along the branch, in [0, line_period)
};
Located locate_parameter(const Parameterization& p, const Curve& c, double x, double y, double on_curve_tol = 1e-7);

} // namespace biquad::curve
