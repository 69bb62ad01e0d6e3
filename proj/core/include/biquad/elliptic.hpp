#pragma once

#include <optional>
#include <string>
#include <utility>

#include "biquad/poly.hpp"

namespace biquad::elliptic {

struct EllipticModulus {
    double k = 0, kp = 1, K = 0, Kp = 0;

    static EllipticModulus from_k(double k);
    // modulus from k^2; accepts 0 <= m < 1
    static EllipticModulus from_m(double m);
};

// complete integral of the first kind, AGM; throws SingularModulus at k^2 = 1
double ellip_K(double k);
// incomplete integral F(phi, k) (Carlson RF, via boost)
double ellip_F(double phi, double k);

struct JacobiTriple {
    cplx sn, cn, dn;
};

// real argument, descending Landen; never singular for real u and 0 <= k <= 1
JacobiTriple jacobi_real(double u, double k);
// complex argument via the real/imaginary split with the complementary modulus.
// nullopt when u lies within pole_tol of a pole (iK' mod lattice).
std::optional<JacobiTriple> jacobi(cplx u, double k, double pole_tol = 1e-8);
// independent route through Jacobi theta functions (cross-check only)
std::optional<JacobiTriple> jacobi_theta(cplx u, double k);

enum class Ratio { sn, cn, dn, sc, ns, cs, ds, nd, nc, sd, cd, dc, nn };
Ratio parse_ratio(const std::string& code);
std::string ratio_name(Ratio r);
// Glaisher ratio pq = p/q; nullopt at poles of the ratio
std::optional<cplx> jacobi_ratio(Ratio code, cplx u, double k);
std::optional<cplx> jacobi_ratio(const std::string& code, cplx u, double k);

// minimal positive theta with sc(theta, k) = v; theta in (0, K(k))
double invert_sc_min_positive(double v, double k);

// ---------------------------------------------------------------------------
// Weierstrass functions.  omega1, omega3 are half-periods with Im(omega3/omega1) > 0.

struct WeierstrassData {
    cplx g2, g3;
    cplx omega1, omega3;

    static WeierstrassData from_invariants(cplx g2, cplx g3);
    static WeierstrassData from_periods(cplx omega1, cplx omega3);
};

std::pair<cplx, cplx> invariants_from_periods(cplx omega1, cplx omega3);
std::pair<cplx, cplx> periods_from_invariants(cplx g2, cplx g3);

// quasi-period constants eta1 = zeta(omega1), eta3 = zeta(omega3)
std::pair<cplx, cplx> quasi_periods(const WeierstrassData& d);

cplx wp(cplx z, const WeierstrassData& d);
cplx wp_prime(cplx z, const WeierstrassData& d);
cplx w_zeta(cplx z, const WeierstrassData& d);
cplx w_sigma(cplx z, const WeierstrassData& d);

// distance from z to the nearest lattice point, measured in units of |omega1|
double lattice_distance(cplx z, const WeierstrassData& d);

} // namespace biquad::elliptic
