#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "darboux/representation.hpp"
#include "darboux/solvers.hpp"

namespace darboux {

// Pointwise finite-difference residual of the interior equation
//   U_xy - p/(y - sgn(y) x) U_x + p/(sgn(y) y - x) U_y - sgn(y) lambda U = 0
// with second-order central stencils of the given step. The callable overload
// places no constraint on p, so degenerate parameter values can be probed.
double fd_residual(const std::function<double(double, double)>& U, double p, double lambda,
                   double xi, double eta, double step);
double fd_residual(const SolutionField& field, double xi, double eta, double step);

// Scaled one-sided derivative limits toward the two degeneracy lines, one per
// triangle, at foot point xi: the coefficient of the |distance|^(1+2p) branch
// of the local expansion, normalized so the representation's own densities
// come back. Contaminating powers delta^(1-2p) and delta are removed by
// extrapolation over a halving ladder of offsets.
struct NuLimits {
    double nu1 = 0.0;
    double nu2 = 0.0;
    double nu3 = 0.0;
    double nu4 = 0.0;
    // Worst last-stage extrapolation movement across the four limits; large
    // values mean the offsets were not yet in the asymptotic range.
    double uncertainty = 0.0;
};

NuLimits extract_nu_limits(const SolutionField& field, double xi);

// One-sided limits of the transversal derivative combinations on the two
// sides of the interior characteristic y = 0, extrapolated linearly from
// offsets 4*step and 2*step. Matching solutions make both limits agree.
struct CharacteristicGap {
    double above = 0.0;  // lim (U_y - U_x) as y -> 0+
    double below = 0.0;  // lim (U_y + U_x) as y -> 0-
    double gap = 0.0;
};

CharacteristicGap characteristic_gap(const SolutionField& field, double xi, double step);

enum class InteriorLine { Horizontal, DiagonalUpper, DiagonalLower };

// Jump of U across an interior line at foot point x, by signed straddle
// differences extrapolated over a halving offset ladder; the surviving value
// estimates the actual discontinuity.
double gluing_jump(const SolutionField& field, InteriorLine line, double x);

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct VerifyOptions {
    int residual_grid = 16;    // interior residual samples per triangle side
    double fd_step = 0.0;      // residual stencil step; 0 selects h/512
    double pde_tol = 1e-3;
    double boundary_tol = 1e-4;
    double gluing_tol = 1e-4;
    double nu_rel_tol = 5e-2;
    double characteristic_tol = 1e-3;
    // +1 checks nu2 = +nu1 and nu4 = +nu3, -1 the opposite signs, 0 skips.
    int gluing_sign = 0;
    // Boundary data to compare edge traces against; null skips those checks.
    const BoundaryData* data = nullptr;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    const CheckResult* find(std::string_view name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

// Runs the full deterministic check suite on a field: interior residual
// magnitude and order, edge traces against data, continuity across the three
// interior lines, the derivative-limit sign relations, and the matching of
// one-sided limits at the interior characteristic.
VerificationReport full_report(const SolutionField& field, const VerifyOptions& options);

} // namespace darboux
