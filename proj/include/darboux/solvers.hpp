#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "darboux/density.hpp"
#include "darboux/hilbert.hpp"
#include "darboux/representation.hpp"

namespace darboux {

// Thrown when a solver cannot produce a solution (inconsistent data, failed
// solvability conditions, ill-conditioned closure). Distinct from
// invalid_argument so callers can map it to a different failure class.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data on the top and bottom edges: U(xi, h) = phi1(xi), U(xi, -h) = phi2(xi).
// Derivative evaluators may be empty; consumers fall back to finite
// differences. The one-sided derivatives at xi = h drive the inversion-case
// dispatch, so they can be pinned explicitly (numerical differentiation of
// tabulated data would be too fragile for a branch decision).
struct BoundaryData {
    std::function<double(double)> phi1, phi2;
    std::function<double(double)> dphi1, dphi2;
    std::function<double(double)> d2phi1, d2phi2;
    std::optional<double> dphi1_at_h, dphi2_at_h;
    // Optional exact factorizations phi_i(s) = (h-s)^(1+p+eps) * reduced_i(s).
    // When present the moment condition is evaluated without the cancellation
    // of dividing out the vanishing factor near s = h.
    std::function<double(double)> phi1_reduced, phi2_reduced;

    static BoundaryData zero();
};

double boundary_dphi_at_h(const BoundaryData& data, int which, double h);

struct NuPair {
    WeightedDensity nu1;
    WeightedDensity nu3;
};

struct ConditionCheck {
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
};

struct FunctionConditions {
    ConditionCheck twice_differentiable;
    ConditionCheck value_at_zero;
    ConditionCheck slope_at_zero;
    ConditionCheck moment;
    bool all_passed() const {
        return twice_differentiable.passed && value_at_zero.passed && slope_at_zero.passed &&
               moment.passed;
    }
};

struct Delta2StarConditions {
    FunctionConditions f1, f2;
    double eps = 0.0;
    bool all_passed() const { return f1.all_passed() && f2.all_passed(); }
};

// Solvability conditions for the occlusion problem: each phi_i must be C^2,
// vanish with its first derivative at 0, decay like (h-s)^(1+p+eps), and have
// vanishing weighted moment int_0^h phi_i(s) (h-s)^(-p-2) ds. The moment is
// computed in the convergent form int reduced_i(s) (h-s)^(eps-1) ds.
Delta2StarConditions check_delta2star_conditions(const BoundaryData& data, const Parameters& par,
                                                 double eps, int n);

struct VolterraReport {
    double phi_at_h = 0.0;
    double max_residual = 0.0;
    double residual_scale = 1.0;
    double closure_condition = 0.0;
};

struct VolterraResult {
    WeightedDensity T;
    std::shared_ptr<const GridFunction> grid;
    VolterraReport report;
};

// First-kind equation  int_xi^h T(s)(s-xi)^p 0F1(1+p; lambda s (s-xi)) ds
// = Phi(xi)  by product integration. Collocating the equation as written is
// exponentially unstable backward (the error recurrence has ratio 1+p > 1),
// so the march runs on its xi-derivative, whose hat-function diagonal
// dominates (ratio ~ p). dPhi may be empty; a finite difference of Phi is
// used then. Throws SolverError when Phi(h) is not 0 within tolerance or the
// closure system is ill-conditioned.
VolterraResult solve_volterra_first_kind(const std::function<double(double)>& Phi,
                                         const Parameters& par, int n,
                                         const std::function<double(double)>& dPhi = {});

// The forward operator of the equation above, for residuals and oracles.
double apply_volterra_operator(const WeightedDensity& T, const Parameters& par, double xi,
                               int q = 24);
// Its xi-derivative (the marched kernel), exact under the integral sign.
double apply_volterra_operator_deriv(const WeightedDensity& T, const Parameters& par, double xi,
                                     int q = 24);

// One-sided derivative limits of the field on the two sides of the interior
// characteristic agree exactly when A[T](xi) + B[N](xi) = 0 for all xi, where
// A and B are the weighted integrals below. characteristic_mismatch returns
// A[T](xi) + B[N](xi); solve_characteristic_transmission marches N forward
// from N(0) = k1*T(0) so that the mismatch vanishes at the grid points.
double characteristic_mismatch(const WeightedDensity& T, const WeightedDensity& N,
                               const Parameters& par, double xi, int q = 12);

struct TransmissionResult {
    WeightedDensity N;
    std::shared_ptr<const GridFunction> grid;
    double max_mismatch = 0.0;
};

TransmissionResult solve_characteristic_transmission(const WeightedDensity& T,
                                                     const Parameters& par,
                                                     const GluingConstants& k, int n, int q = 8);

// Exact algebra between the edge-limit densities and the data densities of
// the dominant singular equations:
//   mu1 = (h-s)^p s^p     [nu1 - nu3]
//   mu2 = (h-s)^p s^(p-1) [nu1 + nu3]
// recover_nu_from_mu inverts these pointwise; all endpoint exponents move
// symbolically. Throws when the bookkeeping would produce a non-integrable
// exponent.
std::pair<WeightedDensity, WeightedDensity> mu_from_nu(const NuPair& nu, const Parameters& par);
NuPair recover_nu_from_mu(const WeightedDensity& mu1, const WeightedDensity& mu2,
                          const Parameters& par);

// Samples the smooth part of d on a uniform m-panel grid and returns a
// grid-backed density with the same exponents. Endpoint samples are taken a
// half panel inside. Turns O(n)-per-evaluation kernel outputs into cheap
// interpolants for quadrature-heavy consumers.
WeightedDensity materialize(const WeightedDensity& d, int m);

// Field over all four triangles from upper/lower density pairs, with the
// derivative-limit densities glued continuously: the intrinsic nu of the four
// triangles is {+nu1, -nu1, -nu3, +nu3}, which makes the global one-sided
// limits agree across both degeneracy lines.
SolutionField assemble_gluing_field(const WeightedDensity& T_up, const WeightedDensity& T_low,
                                    const WeightedDensity& nu1, const WeightedDensity& nu3,
                                    const GluingConstants& k, const Parameters& par, int n);

struct Delta2Inputs {
    WeightedDensity phi1_star;
    WeightedDensity phi2_star;
    WeightedDensity T_upper;
    WeightedDensity T_lower;
    double a0 = 0.0;
};

struct Delta2Result {
    NuPair nu;            // nu1 (= nu2) and nu3 (= nu4) of the gluing
    WeightedDensity mu1;
    WeightedDensity mu2;
    InversionCase used;
    SolutionField field;
};

// Solves the continuous-derivative gluing problem for lambda = 0: mu1 from
// the bounded-at-zero inversion of phi1_star, mu2 from the unbounded
// inversion (consuming a0) unless dphi1(h) + dphi2(h) = 0 with both nonzero,
// which selects the bounded-at-h inversion; then the nu algebra and field
// assembly with signs nu2 = nu1, nu4 = nu3.
Delta2Result solve_delta2(const BoundaryData& data, const Parameters& par, const Delta2Inputs& in,
                          const GluingConstants& k, int n);

struct Delta2StarInputs {
    std::function<double(double)> Phi1, Phi2;    // Volterra right-hand sides per half
    std::function<double(double)> dPhi1, dPhi2;  // optional derivatives
    int transmission_n = 128;
    bool enforce_conditions = true;
};

struct Delta2StarResult {
    WeightedDensity T_upper, T_lower;
    WeightedDensity nu_upper, nu_lower;  // intrinsic densities used in assembly
    VolterraReport volterra_upper, volterra_lower;
    double transmission_mismatch_upper = 0.0;
    double transmission_mismatch_lower = 0.0;
    Delta2StarConditions conditions;
    SolutionField field;
};

// Solves the occlusion-gluing problem: T per half from the first-kind
// equation, nu per half from the characteristic transmission, assembly with
// Frankl signs nu2 = -nu1, nu4 = -nu3.
Delta2StarResult solve_delta2_star(const BoundaryData& data, const Parameters& par,
                                   const Delta2StarInputs& in, const GluingConstants& k,
                                   double eps, int n);

// Manufactured problems: choose densities, push them through the exact
// forward operators to generate consistent boundary data and right-hand
// sides, and keep the chosen field as the reference answer.
struct ManufacturedDelta2Star {
    Parameters par;
    GluingConstants k;
    double eps = 0.0;
    BoundaryData data;
    Delta2StarInputs inputs;
    WeightedDensity T_reference;
    WeightedDensity nu_reference;  // intrinsic, common to all four triangles
    SolutionField reference;
};

// The reference T is the cubic whose induced data satisfies all solvability
// conditions (value, slope, and moment) at once; nu comes from the
// characteristic transmission so the interior matching holds.
ManufacturedDelta2Star manufacture_delta2star(const Parameters& par, const GluingConstants& k,
                                              int transmission_n = 128, int quad_n = 256);

struct ManufacturedDelta2 {
    Parameters par;
    GluingConstants k;
    BoundaryData data;
    Delta2Inputs inputs;
    NuPair nu_reference;  // the gluing pair the pipeline should recover
    SolutionField reference;
};

ManufacturedDelta2 manufacture_delta2(const Parameters& par, const GluingConstants& k,
                                      int transmission_n = 128, int quad_n = 256,
                                      int inversion_n = 256);

} // namespace darboux
