#pragma once

#include <array>
#include <optional>
#include <stdexcept>

#include "darboux/density.hpp"

namespace darboux {

struct Parameters {
    double p = 0.25;
    double lambda = 0.0;
    double h = 1.0;

    bool operator==(const Parameters&) const = default;

    void validate() const {
        if (!(p > 0.0) || !(p < 0.5))
            throw std::invalid_argument("Parameters: p must lie in (0, 1/2)");
        if (!(h > 0.0)) throw std::invalid_argument("Parameters: h must be positive");
        if (!std::isfinite(lambda)) throw std::invalid_argument("Parameters: lambda must be finite");
    }
};

// Coupling constants in N = k1*T - k2*nu. Defaults are placeholders; the
// matched_* values below make the representation's own derivative limit
// return the nu that went in, and are what end-to-end runs should use.
struct GluingConstants {
    double k1 = 1.0;
    double k2 = 1.0;
    bool is_placeholder() const { return k1 == 1.0 && k2 == 1.0; }
};

// 1/(2 cos(pi p)): coefficient of T in the self-consistent N.
double matched_k1(double p);
// Gamma(1+2p) / (2 Gamma(1+p)^2): coefficient of nu.
double matched_k2(double p);
GluingConstants matched_gluing(double p);

// Density pair driving the representation in one triangle. N is derived,
// never stored: N(s) = k1*T(s) - k2*nu(s) at every evaluation.
struct CauchyDensities {
    WeightedDensity T;
    WeightedDensity nu;
    GluingConstants k;

    WeightedDensity N() const { return weighted_combine(T, nu, k.k1, -k.k2); }

    static CauchyDensities zero(double h) {
        return {WeightedDensity::zero(h), WeightedDensity::zero(h), GluingConstants{}};
    }
};

enum class Triangle { UpperLeft = 0, UpperRight = 1, LowerRight = 2, LowerLeft = 3 };

constexpr std::array<Triangle, 4> kAllTriangles{Triangle::UpperLeft, Triangle::UpperRight,
                                               Triangle::LowerRight, Triangle::LowerLeft};

// Which open triangle (xi, eta) lies in, or nullopt on a singular line
// (eta = +-xi, eta = 0, within 1e-9*h) or outside the open rectangle. The top
// and bottom edges eta = +-h are admitted and classified with the adjacent
// left triangle so boundary traces can be evaluated.
std::optional<Triangle> classify_point(double xi, double eta, double h);

// U(xi, eta) in the upper-left triangle 0 < xi < eta <= h:
//   int_eta^h T(s)(s-xi)^p (s-eta)^p 0F1(1+p; lam(s-xi)(s-eta)) ds
// + int_xi^eta N(s)(eta-s)^p (s-xi)^p 0F1(1+p; -lam(eta-s)(s-xi)) ds
// with n quadrature nodes per integral (panel-split when densities carry
// grid hints).
double eval_solution_upper(double xi, double eta, const CauchyDensities& dens,
                           const Parameters& par, int n);

// Field over all four triangles; evaluation reflects the query point into the
// upper-left form. All reflections keep lambda unchanged: substituting
// eta -> -eta into the lower-half operator flips both coefficient signs and
// the sign in front of lambda*U, which cancel.
class SolutionField {
public:
    SolutionField(std::array<CauchyDensities, 4> per_triangle, Parameters par, int quad_n);

    double value(double xi, double eta) const;
    double value_in(Triangle t, double xi, double eta) const;

    const CauchyDensities& densities(Triangle t) const {
        return dens_[static_cast<std::size_t>(t)];
    }
    const Parameters& parameters() const { return par_; }
    int quad_n() const { return n_; }

private:
    std::array<CauchyDensities, 4> dens_;
    Parameters par_;
    int n_;
};

enum class Edge { Top, Bottom };

// U(xi, +-h) via the closed edge of the adjacent triangle; only the second
// integral of the representation survives there:
//   trace(xi) = int_xi^h N(s)(h-s)^p (s-xi)^p 0F1(1+p; -lam(h-s)(s-xi)) ds.
double boundary_trace(const SolutionField& field, Edge edge, double xi);

// d/dxi of the trace, by analytic differentiation under the integral; the
// (s-xi)^(p-1) factor is handled by its own endpoint-weighted rule.
double boundary_trace_deriv(const SolutionField& field, Edge edge, double xi);

} // namespace darboux
