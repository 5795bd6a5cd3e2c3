#pragma once

#include <functional>
#include <vector>

#include "darboux/density.hpp"

namespace darboux {

// Gauss-Jacobi rule for the weight s^beta (h-s)^alpha on [0, h]:
// integral of s^beta (h-s)^alpha f(s) ds ~ sum w_i f(node_i).
struct JacobiRule {
    int n = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double h = 1.0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Builds (or fetches from a process-wide cache keyed by (n, alpha, beta)) the
// n-point rule, exact for polynomials of degree <= 2n-1 against the weight.
// Requires n >= 1, alpha > -1, beta > -1, h > 0.
JacobiRule jacobi_rule(int n, double alpha, double beta, double h);

// Sum of w_i * smooth_part(node_i); rule exponents must match the density's
// (rule.beta == f.alpha0, rule.alpha == f.alphaH).
double integrate_weighted(const WeightedDensity& f, const JacobiRule& rule);

// Integral over [a, b] of (s-a)^beta_at_a (b-s)^alpha_at_b smooth(s) ds by an
// n-point rule mapped affinely onto the interval.
double integrate_interval(double a, double b, double alpha_at_b, double beta_at_a,
                          int n, const std::function<double(double)>& smooth);

// Same integral split at the given interior breakpoints (sorted, strictly
// inside (a, b)); endpoint weights are attached to the first and last panel
// and evaluated as smooth factors elsewhere. Used when smooth has kinks.
double integrate_panels(double a, double b, double alpha_at_b, double beta_at_a,
                        const std::vector<double>& interior_breaks, int n_per_panel,
                        const std::function<double(double)>& smooth);

// Cauchy principal value of integral_0^h mu(s)/(s-xi) ds. Subtraction happens
// at the smooth-part level: with mu = w*g,
//   p.v. int w g/(s-xi) = sum w_i (g(s_i)-g(xi))/(s_i-xi) + g(xi)*Fw(xi),
// where Fw is the weight transform below. If xi collides with a node the rule
// is rebuilt with n+1, then n+3 points.
double pv_hilbert(const WeightedDensity& mu, double xi, int rule_n);

// Weight transform Fw(xi) = p.v. int_0^h s^a0 (h-s)^aH / (s-xi) ds. Closed
// forms for the exponent pairs (0,0), (±1/2, ±1/2) and the mixed halves; a
// double-exponential fallback otherwise.
double pv_weight_transform(double a0, double aH, double h, double xi);

// Reusable principal-value evaluator with the density samples at the rule
// nodes precomputed; eval(xi) costs O(n). Near-node queries switch the
// colliding term to its derivative limit instead of rebuilding.
class PvKernel {
public:
    PvKernel(const WeightedDensity& mu, int rule_n);
    double eval(double xi) const;
    const JacobiRule& rule() const { return rule_; }

private:
    JacobiRule rule_;
    std::vector<double> gvals_;
    double alpha0_;
    double alphaH_;
    double h_;
    std::function<double(double)> g_;
};

} // namespace darboux
