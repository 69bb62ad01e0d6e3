#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biquad/poly.hpp"
#include "biquad/poncelet.hpp"

namespace biquad::pell {

// P^2 - R Q^2 = L
struct PellAbelSolution {
    PolyQ P, Q;
    rat L;
    PolyQ R;       // the quartic actually solved (monic)
    rat lead = 1;  // input R = lead * (monic R)
    int steps = 0; // partial quotients consumed
};

bool verify(const PellAbelSolution& s);
// (P^2 + R Q^2, 2 P Q) with constant L^2
PellAbelSolution compose(const PellAbelSolution& s);

// Continued fraction of sqrt(R).  A solution appears at the first complete
// quotient (a + sqrt R)/b with constant b.  Throws BudgetExhausted once deg Q
// would exceed max_deg_Q, PerfectSquareR when R is a square.
PellAbelSolution pell_abel_solve(const PolyQ& R, int max_deg_Q);

// float coefficients snapped to rationals within rel_tol
PolyQ rationalize(const PolyD& p, double rel_tol = 1e-12);

// Hankel determinant of C_1..C_{2k-1}, C_j the coefficient of t^{-j} in sqrt(R),
// R made monic first
template <class T>
T malyshev_gamma(const Poly<T>& R, int k);

// R(t) = t^4 F(1/t) for a cubic F; throws DegenerateQuartic when F(0) = 0
template <class T>
Poly<T> bridge_cubic_to_quartic(const Poly<T>& F);
// F(s) = s^4 R(1/s) for a quartic with R(0) = 0
template <class T>
Poly<T> quartic_to_cubic(const Poly<T>& R);

template <class T>
struct Shifted {
    Poly<T> R;
    T lambda{};
};
// R(t + lambda) with lambda the smallest real root; identity when R(0) = 0.
// In rational mode the root must be rational (NoRealRoot otherwise).
template <class T>
Shifted<T> shift_to_root(const Poly<T>& R);

// |int (2P'/Q)/sqrt(R) dt - [ln|(P + sqrt(R) Q)/(P - sqrt(R) Q)|]| over [t0, t1]
double abel_integral_check(const PellAbelSolution& s, double t0, double t1);

struct BridgeReport {
    std::optional<int> period;
    bool applicable = false; // even period found
    bool solved = false;
    bool budget_exhausted = false;
    std::optional<PellAbelSolution> solution;
    PolyQ F, R;
    std::vector<double> gamma; // Gamma_1..Gamma_k of the monic R
    std::string note;
};

BridgeReport poncelet_pell_bridge_test(const poncelet::Mat3Q& A, const poncelet::Mat3Q& B, int maxN);
BridgeReport poncelet_pell_bridge_test(const poncelet::Conic& A, const poncelet::Conic& B, int maxN);

struct ConstructedPair {
    poncelet::Mat3Q A, B;
    int period = 0;
};
// coaxial ellipse inside the unit circle with squared semi-axes (alpha, beta):
// alpha + beta = 1 closes with period 4, (alpha - beta)^2 + 2 (alpha + beta) = 3 with period 6
std::vector<ConstructedPair> even_period_suite();

} // namespace biquad::pell
