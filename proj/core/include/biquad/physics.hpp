#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "biquad/curve.hpp"
#include "biquad/elliptic.hpp"

namespace biquad::physics {

// ---------------------------------------------------------------------------
// static classical XY chain, J = diag(1, j)

struct XYChain {
    double j = 2, W = 0, theta = 0;
    int N = 0;
    int mode = 1;     // 1: |W| < 1/j (cn, sn), 2: 1/j < |W| < 1 (dn, k sn)
    bool staggered = false; // W < 0: every other spin reversed
    double k = 0, q = 0;
    std::vector<std::array<double, 2>> spins; // r_0 .. r_N

    // r_n x J (r_{n-1} + r_{n+1}), n = 1..N-1
    double stationarity_residual() const;
    // x_n x_{n+1} + y_n y_{n+1} / j along the chain
    std::vector<double> integral_values() const;
    double norm_defect() const;
    double closure_defect() const; // |r_0 - r_N|
};

XYChain xy_static(double j, double W, int N, double theta = 0);

struct XYClosure {
    double W = 0, k = 0, q = 0;
};
// W for which the chain closes after N spins with q / 4K = m1 / N
XYClosure xy_closure(double j, int N, int m1);

// u = y / (1 + x); (u_n, u_{n+1}) lies on x^2 y^2 + a (x^2 + y^2) + 2 b x y + 1
double stereographic(const std::array<double, 2>& r);
curve::Curve xy_eb_curve(double j, double W);

// ---------------------------------------------------------------------------
// elliptic Toda waves: z_n = omega t - p n + r

struct TodaParams {
    cplx omega = 1.0, p = 0.5, r = 0.0, lambda = 0.0;
    elliptic::WeierstrassData wdata;
};

struct TodaState {
    cplx b, u, u_sigma; // u_sigma: the sigma-quotient form of u
};

TodaState toda_eval(const TodaParams& tp, int n, double t);
std::vector<TodaState> toda_eval(const TodaParams& tp, int n0, int n1, double t);

struct TodaResiduals {
    double b = 0, u = 0;        // |db/dt - (u_{n+1} - u_n)|, |du/dt - u_n (b_n - b_{n-1})|
    double forms = 0;           // relative gap between the two forms of u
    bool half_period = false;   // 2p on the lattice: u_{n+2} = u_n
};
TodaResiduals toda_verify(const TodaParams& tp, int n0, int n1, double t, double h = 1e-5);

// ---------------------------------------------------------------------------

struct FitResult {
    curve::Curve c;          // unit Frobenius norm, sign fixed by the largest entry
    double residual = 0;     // max over points of |F| relative to its terms
    double symmetry = 0;     // |a_ik - a_ki| relative
    double sigma_ratio = 0;  // smallest over largest singular value (scaled columns)
};
FitResult fit_biquadratic(const std::vector<std::pair<double, double>>& pts);

// (xy + (x + y) w + g2/4)^2 - (x + y + w)(4 x y w - g3)
curve::Curve wp_curve(double g2, double g3, double w);

struct PhasePortrait {
    std::vector<std::pair<double, double>> points; // (u_n, u_{n+1})
    FitResult fit;
    double wp_distance = 0; // fitted vs the pulled-back canonical curve, both normalized
};
// needs real g2, g3, omega, p and r on the line Im z = Im omega3
PhasePortrait toda_phase_portrait(const TodaParams& tp, int samples = 64);

// the curve comparison used above: min over sign of |c1/|c1| -+ c2/|c2||
double curve_distance(const curve::Curve& a, const curve::Curve& b);

} // namespace biquad::physics
