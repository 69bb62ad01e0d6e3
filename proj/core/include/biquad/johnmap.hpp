#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "biquad/curve.hpp"

namespace biquad::john {

using curve::Curve;

// value u/v; infinity when v = 0
struct ProjCoord {
    double u = 0, v = 1;

    static ProjCoord finite(double x);
    static ProjCoord infinity() { return {1, 0}; }
    ProjCoord normalized() const;
    bool is_infinite(double tol = 0) const { return std::abs(v) <= tol * std::abs(u); }
    double value() const { return u / v; }
};

// chordal distance on the real projective line, in [0, 1]
double chordal(const ProjCoord& a, const ProjCoord& b);

struct CurvePoint {
    ProjCoord x, y;
    double residual = 0;
    bool fixed = false; // the last involution met a double root
};

CurvePoint make_point(const Curve& c, double x, double y);
CurvePoint make_point(const Curve& c, ProjCoord x, ProjCoord y);
double hom_residual(const Curve& c, const ProjCoord& x, const ProjCoord& y);
double distance(const CurvePoint& p, const CurvePoint& q);

// I1 keeps x and swaps y with the other root; I2 keeps y
CurvePoint involution_I1(const Curve& c, const CurvePoint& p);
CurvePoint involution_I2(const Curve& c, const CurvePoint& p);
CurvePoint john_T(const Curve& c, const CurvePoint& p);
CurvePoint john_T_inv(const Curve& c, const CurvePoint& p);

struct Orbit {
    std::vector<CurvePoint> points;
    std::optional<int> period;
    std::optional<int> turns;
};

// iterate T until the start recurs (checked again at twice the period) or max_iter
Orbit orbit(const Curve& c, const CurvePoint& start, int max_iter, double tol = 1e-6);

// turns made by T^n along the uniformizing parameter; period must be known
int orbit_turns(const curve::Parameterization& p, const Curve& c, const Orbit& o);

struct Rotation {
    double analytic = 0;  // from the parameterization shift
    double birkhoff = 0;  // average of lifted parameter increments along an orbit
    bool from_angle = false; // birkhoff taken from angular winding (no parameterization)
};
Rotation rotation_number(const curve::Parameterization& p, const Curve& c, const CurvePoint& start, int iterations);
// bounded oval without a parameterization: average angular increment about the orbit centroid
double rotation_number_angle(const Curve& c, const CurvePoint& start, int iterations);

struct RationalVerdict {
    double value = 0;
    long m = 0, n = 0;
    double residual = 0;
    long max_denominator = 64;
    bool rational = false; // residual below tol
    // the shift has half a period along w2 (case iii): T alternates the two real
    // components and the orbit period is n made even
    bool swaps_components = false;
    long period = 0;
    double stated = 0;     // the ratio written in the closed-form criterion for the family
    curve::ParamFamily family = curve::ParamFamily::Bax_par;
};

std::optional<std::pair<long, long>> best_rational(double value, long max_denominator, double tol);
// the convergent with denominator <= max_denominator closest to value
std::pair<long, long> closest_rational(double value, long max_denominator);

RationalVerdict periodicity_criterion(const curve::CanonicalTag& tag, long max_denominator = 64, double tol = 1e-8);

// columns n, x_num, x_den, y_num, y_den, residual
std::string orbit_csv(const Orbit& o);

} // namespace biquad::john
