#pragma once

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "biquad/curve.hpp"
#include "biquad/johnmap.hpp"
#include "biquad/poly.hpp"

namespace biquad::poncelet {

template <class T>
using Mat3T = std::array<std::array<T, 3>, 3>;
using Mat3 = Mat3T<double>;
using Mat3Q = Mat3T<rat>;
using Vec3 = std::array<double, 3>;

// projective coordinates (s0, s1, s2), affine point x = s1/s0, y = s2/s0
struct Conic {
    Mat3 M{};

    static Conic circle(double cx, double cy, double r);
    // xi^2/a1 + eta^2/b1 = 1, a1 and b1 are squared semi-axes
    static Conic axes(double a1, double b1);
    // eta = xi^2
    static Conic parabola();

    double operator()(const Vec3& p) const;
    double bilinear(const Vec3& p, const Vec3& q) const;
    Vec3 apply(const Vec3& p) const;
    double det() const;
    double norm() const;
    // S^T M S: the conic seen in coordinates p = S p'
    Conic congruent(const Mat3& S) const;
    Conic dual() const; // adjugate
};

// E_i(x), i = 0..2, deg <= 2
template <class T>
using ConicParamT = std::array<Poly<T>, 3>;
using ConicParam = ConicParamT<double>;
using ConicParamQ = ConicParamT<rat>;

Vec3 eval(const ConicParam& E, double x);
Vec3 eval(const ConicParam& E, const john::ProjCoord& x);
ConicParam derivative(const ConicParam& E);

ConicParam rational_parameterization(const Conic& c);
// parameter of a point on the parameterized conic; infinity when E2 direction matches
john::ProjCoord parameter_of(const ConicParam& E, const Vec3& p);

template <class T>
curve::BiquadraticCurve<T> biquadratic_from_conics(const ConicParamT<T>& E, const ConicParamT<T>& G);

// M = E x E'
template <class T>
ConicParamT<T> m_vector(const ConicParamT<T>& E);
// det(M, M', M'') as a polynomial in x
template <class T>
Poly<T> mixed_product(const ConicParamT<T>& M);
ConicParam conic_from_m(const ConicParam& M);

// coefficient matrix of a parameterization: column k holds the x^k coefficients
template <class T>
Mat3T<T> coeff_matrix(const ConicParamT<T>& E);

// ---------------------------------------------------------------------------
// geometric iteration: tangents to A, vertices on B

struct PonceletState {
    Vec3 Q{}; // on A
    Vec3 P{}; // on B, on the tangent to A at Q
    int orientation = 1;
};

// Q = E_A(x); orientation picks one of the two intersections of the tangent with B
PonceletState start_state(const Conic& A, const Conic& B, const ConicParam& EA, double x, int orientation = 1);
// the start whose tangent meets B farthest from tangency, over the whole parameter line
std::optional<PonceletState> find_start(const Conic& A, const Conic& B, const ConicParam& EA, int orientation = 1);
PonceletState geometric_step(const Conic& A, const Conic& B, const PonceletState& s);
// |P^T M_A Q| normalized; zero on the tangent
double tangency_defect(const Conic& A, const PonceletState& s);
double state_distance(const PonceletState& s, const PonceletState& t);
std::vector<PonceletState> trajectory(const Conic& A, const Conic& B, const PonceletState& start, int steps);
std::optional<int> poncelet_period(const Conic& A, const Conic& B, const PonceletState& start, int maxN,
                                   double tol = 1e-8);
// columns step, Qx, Qy, Px, Py
std::string trajectory_csv(const std::vector<PonceletState>& t);

// the point (x, y) of the bridge curve for a state
john::CurvePoint bridge_point(const curve::Curve& c, const ConicParam& EA, const ConicParam& EB,
                              const PonceletState& s);

// ---------------------------------------------------------------------------
// Cayley criterion

template <class T>
Poly<T> cayley_polynomial(const Mat3T<T>& A, const Mat3T<T>& B);

template <class T>
struct CayleyResult {
    int N = 0;
    int order = 0;       // size of the Hankel matrix
    T det{};             // Hankel determinant
    double scale = 1;    // |d det / ds| along A + s B (float path)
    double distance = 0; // |det| / scale: pencil distance to a closing pair
    bool periodic = false;
    std::vector<T> c;    // Taylor coefficients of sqrt(F(z)/F(0))
};

template <class T>
CayleyResult<T> cayley_test(const Mat3T<T>& A, const Mat3T<T>& B, int N, double tol = 1e-9);

Mat3Q to_rational(const Mat3& m);

// ---------------------------------------------------------------------------

struct BicentricResult {
    double lhs = 0, rhs = 0;        // closed formula for n in {3, 4, 5}, else the general one
    double sc_lhs = 0, sc_rhs = 0;  // general elliptic formula
    bool closed_form = false;
    bool verdict = false;
    bool general_verdict = false;
};

// outer circle radius R, inner r, centers d apart
BicentricResult bicentric_check(double R, double r, double d, int n, double tol = 1e-9);

// ---------------------------------------------------------------------------
// dispositions: counts of real intersections and common tangents

struct Disposition {
    int intersections = 0;
    int tangents = 0;
    int kind = -1; // 0..5, -1 when tangent or otherwise degenerate
    bool nested_inner = false; // A inside B (kind 0 vs 1)
};

Disposition disposition(const Conic& A, const Conic& B, double sep_tol = 1e-6);

struct Agreement {
    std::optional<int> geometric;
    std::optional<int> john;
    std::vector<bool> cayley; // index N - 3 for N = 3..maxN
    bool agree = false;
};

// periods of the geometric and John iterations and the Cayley verdicts for N = 3..maxN.
// Agreement: equal periods and cayley(N) iff the period divides N.
Agreement three_way(const Conic& A, const Conic& B, int maxN);

struct PairSample {
    Conic A, B;
    Disposition disp;
    std::optional<int> target; // tuned to close with this period
};

// random pair in the given disposition (1..5); with target set, A is moved along
// the pencil A + tB until the Cayley determinant for that N vanishes
std::optional<PairSample> random_pair(std::mt19937_64& rng, int kind, std::optional<int> target, int attempts = 2000);

} // namespace biquad::poncelet
