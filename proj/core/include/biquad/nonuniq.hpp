#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "biquad/curve.hpp"
#include "biquad/johnmap.hpp"
#include "biquad/poly.hpp"

namespace biquad::nonuniq {

// u(x, y) = f(x) + g(y) vanishing on a curve.  f(x) = F(x / x_scale) and
// g(y) = -F(y / y_scale) for the builders here.
struct SeparatedSolution {
    std::function<double(double)> f, g;
    std::optional<RationalQ> exact; // F when it was built symbolically
    double x_scale = 1, y_scale = 1;
    curve::Curve curve;
    int M = 0, N = 0;   // ellipse angle pi M / N, or rotation M / N
    int level = 1;
    int multiplier = 0; // F = T_L or R_L with L = 2 N level
    double residual = 0; // max |f + g| over the curve samples
    int samples = 0;
    std::vector<std::array<double, 3>> probes; // (x, y, u) off the curve

    double operator()(double x, double y) const { return f(x) + g(y); }
};

PolyQ chebyshev_T(int n);

// x = cos t, y = cos(t + eps), eps = pi M / N
curve::Curve ellipse_curve(double eps);
SeparatedSolution ellipse_solution(int M, int N, int n);
// eps must be a rational multiple of pi with denominator <= max_den
SeparatedSolution ellipse_solution_from_angle(double eps, int n, long max_den = 64);

// R_n with R_n(cn(z; k)) = cn(n z; k), k^2 exact.  Throws SymbolicOverflow past n = 6.
RationalQ jacobi_multiplication(int n, const rat& k2);
inline constexpr int max_symbolic_multiplier = 6;
// cn(n z) from c = cn(z) on [-1, 1] through the real inverse
double cn_multiple(int n, double c, double k);

// witness for a periodic par13 curve (cn parameterization); level picks R_{2 level n}
SeparatedSolution build_solution(const curve::CanonicalTag& tag, const john::RationalVerdict& verdict, int level);

// condition number of the sampled Gram matrix of f over the curve's x range
double gram_condition(const std::vector<SeparatedSolution>& sols, int samples = 64);

enum class Verdict { empty_curve, nonunique, no_period, unsupported };
std::string verdict_name(Verdict v);

struct UniquenessReport {
    Verdict verdict = Verdict::unsupported;
    long m = 0, n = 0;
    double residual = 0; // distance of the rotation ratio from m / n
    std::optional<SeparatedSolution> witness;
    std::string note;
};

UniquenessReport uniqueness_verdict(const curve::Curve& c, long max_den = 64);

} // namespace biquad::nonuniq
