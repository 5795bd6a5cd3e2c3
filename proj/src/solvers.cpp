#include "darboux/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "darboux/quadrature.hpp"
#include "darboux/specfun.hpp"

namespace darboux {

namespace {

double series_f(double p, double z) { return hyp0f1(1.0 + p, z).value; }
double series_fdz(double p, double z) { return hyp0f1_dz(1.0 + p, z); }

std::vector<double> kinks_of(const WeightedDensity& d, double a, double b) {
    std::vector<double> out;
    const auto& g = d.grid_hint();
    if (g) {
        for (std::size_t i = 1; i < g->panels(); ++i) {
            const double t = g->node(i);
            if (t > a && t < b) out.push_back(t);
        }
    }
    return out;
}

std::vector<double> merge_kinks(std::vector<double> a, std::vector<double> b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

int panel_order(bool gridded, int n) { return gridded ? 12 : n; }

// Kernel of the xi-differentiated first-kind equation. Pulling one power out
// of the weight leaves (s-xi)^(p-1) times this smooth factor.
double volterra_kernel(const Parameters& par, double xi, double s) {
    const double z = par.lambda * s * (s - xi);
    return par.p * series_f(par.p, z) + par.lambda * s * (s - xi) * series_fdz(par.p, z);
}

struct HatCoeffs {
    double c0 = 0.0;
    double c1 = 0.0;
};

// Accumulates the two hat-function moments of smooth against the weight
// (s-a)^beta (b-s)^alpha over [a, b].
void accumulate_hat(HatCoeffs& c, double a, double b, double alpha, double beta, int q,
                    const std::function<double(double)>& smooth) {
    const double L = b - a;
    const JacobiRule r = jacobi_rule(q, alpha, beta, L);
    for (int i = 0; i < r.n; ++i) {
        const double s = a + r.nodes[i];
        const double v = r.weights[i] * smooth(s);
        c.c0 += v * (b - s) / L;
        c.c1 += v * (s - a) / L;
    }
}

// Hat moments of (s-xi)^(p-1) * volterra_kernel over a panel [a, b] with
// xi <= a. On the touching panel the singular power is the rule weight;
// farther panels fold it into the smooth part.
HatCoeffs volterra_panel_diff(const Parameters& par, double xi, double a, double b, int q) {
    HatCoeffs c;
    const double p = par.p;
    if (std::abs(a - xi) <= 1e-13 * par.h) {
        accumulate_hat(c, a, b, 0.0, p - 1.0, q,
                       [&](double s) { return volterra_kernel(par, xi, s); });
    } else {
        accumulate_hat(c, a, b, 0.0, 0.0, q, [&](double s) {
            return std::pow(s - xi, p - 1.0) * volterra_kernel(par, xi, s);
        });
    }
    return c;
}

// Hat moments of (s-xi)^p * 0F1(1+p; lam s (s-xi)) over [xi, b]; the closure
// row that keeps the march consistent with the undifferentiated equation.
HatCoeffs volterra_panel_undiff(const Parameters& par, double xi, double b, int q) {
    HatCoeffs c;
    accumulate_hat(c, xi, b, 0.0, par.p, q, [&](double s) {
        return series_f(par.p, par.lambda * s * (s - xi));
    });
    return c;
}

// A[T](xi): the T part of the one-sided derivative limit at the degeneracy
// edge,  int_xi^h T(s) xi (s-xi)^(p-1) [p s^(p-1) F + lam s^p (s-xi) F'] ds
// with F = 0F1(1+p; lam s (s-xi)). A short geometric refinement toward s = xi
// resolves the s^(p-1) variation when xi is small.
double matching_a_integral(const WeightedDensity& T, const Parameters& par, double xi, int q) {
    const double p = par.p, lam = par.lambda, h = par.h;
    if (xi >= h - 1e-14 * h) return 0.0;
    const double ta0 = T.alpha0();
    auto geo = std::vector<double>{xi + (h - xi) / 64.0, xi + (h - xi) / 16.0,
                                   xi + (h - xi) / 4.0};
    const auto breaks = merge_kinks(kinks_of(T, xi, h), std::move(geo));
    auto smooth = [&](double s) {
        const double z = lam * s * (s - xi);
        double v = p * std::pow(s, p - 1.0 + ta0) * series_f(p, z);
        if (lam != 0.0) v += lam * std::pow(s, p + ta0) * (s - xi) * series_fdz(p, z);
        return T.smooth_at(s) * xi * v;
    };
    return integrate_panels(xi, h, T.alphaH(), p - 1.0, breaks, q, smooth);
}

// Exponent table of the four kernel addends of B[N]: powers of s and of
// (xi-s), whether the series factor is differentiated, and the coefficient.
struct MatchingAddend {
    double e_left;
    double e_right;
    bool deriv;
    double coef;
};

std::array<MatchingAddend, 4> matching_addends(const Parameters& par) {
    const double p = par.p;
    return {{{p - 1.0, p, false, -p},
             {p, p - 1.0, false, -p},
             {p, p + 1.0, true, par.lambda},
             {p + 1.0, p, true, par.lambda}}};
}

// B[N](xi): the N part of the same limit, as the sum of the four addends
// integrated over [0, xi] with their endpoint powers as rule weights.
double matching_b_integral(const WeightedDensity& N, const Parameters& par, double xi, int q) {
    const double p = par.p, lam = par.lambda, h = par.h;
    const auto breaks = kinks_of(N, 0.0, xi);
    const double na0 = N.alpha0(), naH = N.alphaH();
    double total = 0.0;
    for (const auto& ad : matching_addends(par)) {
        if (ad.coef == 0.0) continue;
        auto smooth = [&](double s) {
            const double z = -lam * (xi - s) * s;
            double v = ad.coef * N.smooth_at(s) * (ad.deriv ? series_fdz(p, z) : series_f(p, z));
            if (naH != 0.0) v *= std::pow(h - s, naH);
            return v;
        };
        total += integrate_panels(0.0, xi, ad.e_right, ad.e_left + na0, breaks, q, smooth);
    }
    return total;
}

// Hat moments of the full B kernel over a panel [a, b] of [0, xi] for the
// transmission march. Endpoint powers become rule weights exactly on the
// panels that touch s = 0 or s = xi.
HatCoeffs transmission_panel(const Parameters& par, double xi, double a, double b, int q) {
    HatCoeffs c;
    const double p = par.p, lam = par.lambda;
    const bool at_zero = (a <= 1e-14 * par.h);
    const bool at_xi = (std::abs(b - xi) <= 1e-14 * par.h);
    for (const auto& ad : matching_addends(par)) {
        if (ad.coef == 0.0) continue;
        const double beta = at_zero ? ad.e_left : 0.0;
        const double alpha = at_xi ? ad.e_right : 0.0;
        auto smooth = [&](double s) {
            const double z = -lam * (xi - s) * s;
            double v = ad.coef * (ad.deriv ? series_fdz(p, z) : series_f(p, z));
            if (!at_zero) v *= std::pow(s, ad.e_left);
            if (!at_xi) v *= std::pow(xi - s, ad.e_right);
            return v;
        };
        accumulate_hat(c, a, b, alpha, beta, q, smooth);
    }
    return c;
}

FunctionConditions check_one_function(const std::function<double(double)>& phi,
                                      const std::function<double(double)>& dphi,
                                      const std::function<double(double)>& d2phi,
                                      const std::function<double(double)>& reduced,
                                      const Parameters& par, double eps, int n) {
    const double h = par.h;
    FunctionConditions out;

    double scale = 1.0;
    for (int j = 0; j < 33; ++j) scale = std::max(scale, std::abs(phi(h * (j + 0.5) / 33.0)));

    // Second-derivative consistency at interior samples: against the supplied
    // d2phi when present, else between two finite-difference step sizes.
    {
        const double d = 1e-4 * h;
        auto second = [&](double x, double step) {
            return (phi(x + step) - 2.0 * phi(x) + phi(x - step)) / (step * step);
        };
        double worst = 0.0, mag = 1.0;
        for (int j = 0; j < 9; ++j) {
            const double x = h * (j + 0.5) / 9.0;
            const double fine = second(x, 0.5 * d);
            const double ref = d2phi ? d2phi(x) : second(x, d);
            worst = std::max(worst, std::abs(fine - ref));
            mag = std::max(mag, std::abs(ref));
        }
        out.twice_differentiable = {worst <= 1e-3 * mag, worst, 1e-3 * mag};
    }

    {
        const double v = std::abs(phi(0.0));
        const double tol = 1e-8 * scale;
        out.value_at_zero = {v <= tol, v, tol};
    }

    {
        double v;
        if (dphi) {
            v = dphi(0.0);
        } else {
            const double d = 1e-5 * h;
            v = (-3.0 * phi(0.0) + 4.0 * phi(d) - phi(2.0 * d)) / (2.0 * d);
        }
        const double tol = 1e-8 * scale;
        out.slope_at_zero = {std::abs(v) <= tol, std::abs(v), tol};
    }

    // Weighted moment in the convergent form: with phi = (h-s)^(1+p+eps) r(s),
    // the condition int phi (h-s)^(-p-2) ds = 0 becomes int r (h-s)^(eps-1) ds.
    {
        const JacobiRule rule = jacobi_rule(n, eps - 1.0, 0.0, h);
        auto r = reduced ? reduced : std::function<double(double)>([&](double s) {
            return phi(s) * std::pow(h - s, -1.0 - par.p - eps);
        });
        double moment = 0.0, absint = 0.0;
        for (int i = 0; i < rule.n; ++i) {
            const double v = r(rule.nodes[i]);
            moment += rule.weights[i] * v;
            absint += rule.weights[i] * std::abs(v);
        }
        const double tol = 1e-8 * std::max(1.0, absint);
        out.moment = {std::abs(moment) <= tol, std::abs(moment), tol};
    }
    return out;
}

// Trace of the top (or bottom) edge through its N density at xi = 0 and the
// xi-derivative there; both appear as solvability constraints when selecting
// a reference density.
double edge_trace_at_zero(const WeightedDensity& N, const Parameters& par, int q) {
    const double p = par.p, lam = par.lambda, h = par.h;
    auto smooth = [&](double s) { return N.value(s) * series_f(p, -lam * (h - s) * s); };
    return integrate_panels(0.0, h, p, p, kinks_of(N, 0.0, h), q, smooth);
}

double edge_trace_deriv_at_zero(const WeightedDensity& N, const Parameters& par, int q) {
    const double p = par.p, lam = par.lambda, h = par.h;
    auto smooth = [&](double s) {
        const double z = -lam * (h - s) * s;
        return N.value(s) * (-p * series_f(p, z) + lam * (h - s) * s * series_fdz(p, z));
    };
    return integrate_panels(0.0, h, p, p - 1.0, kinks_of(N, 0.0, h), q, smooth);
}

// Reduced trace r(xi) = trace(xi) / (h-xi)^(1+2p), computed directly from the
// substituted integral so it stays smooth up to xi = h:
//   r(xi) = int_0^1 N(xi + (h-xi)u) (1-u)^p u^p 0F1(1+p; -lam (h-xi)^2 u(1-u)) du.
double reduced_trace(const WeightedDensity& N, const Parameters& par, double xi, int q) {
    const double p = par.p, lam = par.lambda, h = par.h;
    const double L = h - xi;
    std::vector<double> ubreaks;
    if (L > 0.0) {
        for (double s : kinks_of(N, xi, h)) ubreaks.push_back((s - xi) / L);
    }
    auto smooth = [&](double u) {
        return N.value(xi + L * u) * series_f(p, -lam * L * L * u * (1.0 - u));
    };
    return integrate_panels(0.0, 1.0, p, p, ubreaks, q, smooth);
}

// Weighted moment int_0^h r(s) (h-s)^(p-1) ds of the reduced trace; the form
// the occlusion solvability condition takes once the vanishing factor is
// divided out with eps = p.
double reduced_trace_moment(const WeightedDensity& N, const Parameters& par) {
    const JacobiRule rule = jacobi_rule(96, par.p - 1.0, 0.0, par.h);
    double out = 0.0;
    for (int i = 0; i < rule.n; ++i)
        out += rule.weights[i] * reduced_trace(N, par, rule.nodes[i], 8);
    return out;
}

// Smallest-index nonzero solution of the 3x4 homogeneous system, by Gaussian
// elimination with partial pivoting; the free column gets coefficient 1.
std::array<double, 4> nullspace_3x4(std::array<std::array<double, 4>, 3> m) {
    double scale = 0.0;
    for (const auto& row : m)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) scale = 1.0;

    std::array<int, 3> piv_col{-1, -1, -1};
    int r = 0;
    for (int c = 0; c < 4 && r < 3; ++c) {
        int pr = r;
        for (int i = r + 1; i < 3; ++i)
            if (std::abs(m[i][c]) > std::abs(m[pr][c])) pr = i;
        if (std::abs(m[pr][c]) <= 1e-12 * scale) continue;
        std::swap(m[r], m[pr]);
        for (int i = r + 1; i < 3; ++i) {
            const double f = m[i][c] / m[r][c];
            for (int j = c; j < 4; ++j) m[i][j] -= f * m[r][j];
        }
        piv_col[r] = c;
        ++r;
    }

    std::array<bool, 4> pivot{};
    for (int i = 0; i < r; ++i) pivot[piv_col[i]] = true;
    int free_col = 3;
    while (free_col > 0 && pivot[free_col]) --free_col;

    std::array<double, 4> x{};
    x[free_col] = 1.0;
    for (int i = r - 1; i >= 0; --i) {
        const int c = piv_col[i];
        double acc = 0.0;
        for (int j = c + 1; j < 4; ++j) acc += m[i][j] * x[j];
        x[c] = -acc / m[i][c];
    }

    double big = 0.0;
    int big_i = 0;
    for (int i = 0; i < 4; ++i)
        if (std::abs(x[i]) > big) big = std::abs(x[i]), big_i = i;
    for (auto& v : x) v /= (x[big_i] > 0.0 ? big : -big);
    return x;
}

WeightedDensity intrinsic_from_transmission(const WeightedDensity& T, const WeightedDensity& N,
                                            const GluingConstants& k, int m) {
    return materialize(weighted_combine(T, N, k.k1 / k.k2, -1.0 / k.k2), m);
}

} // namespace

SolutionField assemble_gluing_field(const WeightedDensity& T_up, const WeightedDensity& T_low,
                                    const WeightedDensity& nu1, const WeightedDensity& nu3,
                                    const GluingConstants& k, const Parameters& par, int n) {
    std::array<CauchyDensities, 4> dens{CauchyDensities{T_up, nu1, k},
                                        CauchyDensities{T_up, nu1.scaled(-1.0), k},
                                        CauchyDensities{T_low, nu3.scaled(-1.0), k},
                                        CauchyDensities{T_low, nu3, k}};
    return SolutionField(std::move(dens), par, n);
}

BoundaryData BoundaryData::zero() {
    BoundaryData d;
    auto z = [](double) { return 0.0; };
    d.phi1 = d.phi2 = z;
    d.dphi1 = d.dphi2 = z;
    d.d2phi1 = d.d2phi2 = z;
    d.dphi1_at_h = 0.0;
    d.dphi2_at_h = 0.0;
    d.phi1_reduced = d.phi2_reduced = z;
    return d;
}

double boundary_dphi_at_h(const BoundaryData& data, int which, double h) {
    if (which != 1 && which != 2) throw std::invalid_argument("boundary_dphi_at_h: which must be 1 or 2");
    const auto& pinned = (which == 1) ? data.dphi1_at_h : data.dphi2_at_h;
    if (pinned) return *pinned;
    const auto& dphi = (which == 1) ? data.dphi1 : data.dphi2;
    if (dphi) return dphi(h);
    const auto& phi = (which == 1) ? data.phi1 : data.phi2;
    if (!phi) throw std::invalid_argument("boundary_dphi_at_h: no data to differentiate");
    const double d = 1e-5 * h;
    return (3.0 * phi(h) - 4.0 * phi(h - d) + phi(h - 2.0 * d)) / (2.0 * d);
}

Delta2StarConditions check_delta2star_conditions(const BoundaryData& data, const Parameters& par,
                                                 double eps, int n) {
    par.validate();
    if (!(eps > 0.0)) throw std::invalid_argument("check_delta2star_conditions: eps must be positive");
    if (n < 8) throw std::invalid_argument("check_delta2star_conditions: need n >= 8");
    if (!data.phi1 || !data.phi2)
        throw std::invalid_argument("check_delta2star_conditions: phi1 and phi2 must be callable");
    Delta2StarConditions out;
    out.eps = eps;
    out.f1 = check_one_function(data.phi1, data.dphi1, data.d2phi1, data.phi1_reduced, par, eps, n);
    out.f2 = check_one_function(data.phi2, data.dphi2, data.d2phi2, data.phi2_reduced, par, eps, n);
    return out;
}

double apply_volterra_operator(const WeightedDensity& T, const Parameters& par, double xi, int q) {
    const double p = par.p, lam = par.lambda, h = par.h;
    if (xi >= h) return 0.0;
    if (xi < 0.0) throw std::invalid_argument("apply_volterra_operator: xi must lie in [0, h]");
    const bool at_zero = (xi <= 1e-14 * h);
    const double ta0 = T.alpha0();
    auto smooth = [&](double s) {
        double v = T.smooth_at(s) * series_f(p, lam * s * (s - xi));
        if (!at_zero && ta0 != 0.0) v *= std::pow(s, ta0);
        return v;
    };
    const auto breaks = kinks_of(T, xi, h);
    const int order = panel_order(T.grid_hint() != nullptr, q);
    const double beta = at_zero ? p + ta0 : p;
    return integrate_panels(xi, h, T.alphaH(), beta, breaks, order, smooth);
}

double apply_volterra_operator_deriv(const WeightedDensity& T, const Parameters& par, double xi,
                                     int q) {
    const double p = par.p, h = par.h;
    if (xi >= h) return 0.0;
    if (xi < 0.0) throw std::invalid_argument("apply_volterra_operator_deriv: xi must lie in [0, h]");
    const bool at_zero = (xi <= 1e-14 * h);
    const double ta0 = T.alpha0();
    auto smooth = [&](double s) {
        double v = -T.smooth_at(s) * volterra_kernel(par, xi, s);
        if (!at_zero && ta0 != 0.0) v *= std::pow(s, ta0);
        return v;
    };
    const auto breaks = kinks_of(T, xi, h);
    const int order = panel_order(T.grid_hint() != nullptr, q);
    const double beta = (p - 1.0) + (at_zero ? ta0 : 0.0);
    return integrate_panels(xi, h, T.alphaH(), beta, breaks, order, smooth);
}

VolterraResult solve_volterra_first_kind(const std::function<double(double)>& Phi,
                                         const Parameters& par, int n,
                                         const std::function<double(double)>& dPhi) {
    par.validate();
    if (!Phi) throw std::invalid_argument("solve_volterra_first_kind: Phi must be callable");
    if (n < 8) throw std::invalid_argument("solve_volterra_first_kind: need n >= 8");
    const double h = par.h;
    const int q = 8;

    std::vector<double> xs(n + 1), phis(n + 1);
    double scale = 0.0;
    for (int i = 0; i <= n; ++i) {
        xs[i] = h * static_cast<double>(i) / n;
        phis[i] = Phi(xs[i]);
        scale = std::max(scale, std::abs(phis[i]));
    }
    if (std::abs(phis[n]) > 1e-6 * std::max(scale, 1e-12))
        throw SolverError("solve_volterra_first_kind: right-hand side must vanish at xi = h, got " +
                          std::to_string(phis[n]));

    std::function<double(double)> dphi = dPhi;
    if (!dphi) {
        dphi = [Phi, h](double x) {
            const double d = 1e-6 * h;
            if (x < d) return (Phi(x + d) - Phi(x)) / d;
            if (x > h - d) return (Phi(x) - Phi(x - d)) / d;
            return (Phi(x + d) - Phi(x - d)) / (2.0 * d);
        };
    }

    // Closure: the last two unknowns come from collocating both the
    // differentiated and the undifferentiated equation at xi_{n-1}.
    std::vector<double> T(n + 1, 0.0);
    const HatCoeffs d1 = volterra_panel_diff(par, xs[n - 1], xs[n - 1], xs[n], q);
    const HatCoeffs u1 = volterra_panel_undiff(par, xs[n - 1], xs[n], 12);
    const double det = d1.c0 * u1.c1 - d1.c1 * u1.c0;
    double cond = std::numeric_limits<double>::infinity();
    if (det != 0.0) {
        const double t1 = d1.c0 * d1.c0 + d1.c1 * d1.c1 + u1.c0 * u1.c0 + u1.c1 * u1.c1;
        const double t2 = std::sqrt(std::max(0.0, t1 * t1 - 4.0 * det * det));
        const double smax = std::sqrt(0.5 * (t1 + t2));
        const double smin = std::sqrt(std::max(0.0, 0.5 * (t1 - t2)));
        if (smin > 0.0) cond = smax / smin;
    }
    if (!(cond < 1e8))
        throw SolverError("solve_volterra_first_kind: closure system is ill-conditioned");
    const double r0 = -dphi(xs[n - 1]);
    const double r1 = phis[n - 1];
    T[n - 1] = (r0 * u1.c1 - r1 * d1.c1) / det;
    T[n] = (d1.c0 * r1 - u1.c0 * r0) / det;

    // Backward march on the differentiated equation; its touching-panel
    // coefficient dominates the recurrence, so errors contract.
    for (int j = n - 2; j >= 0; --j) {
        const double xi = xs[j];
        double acc = 0.0;
        for (int i = j + 1; i < n; ++i) {
            const HatCoeffs c = volterra_panel_diff(par, xi, xs[i], xs[i + 1], q);
            acc += c.c0 * T[i] + c.c1 * T[i + 1];
        }
        const HatCoeffs c = volterra_panel_diff(par, xi, xs[j], xs[j + 1], q);
        if (!(std::abs(c.c0) > 0.0))
            throw SolverError("solve_volterra_first_kind: vanishing march coefficient");
        T[j] = (-dphi(xi) - acc - c.c1 * T[j + 1]) / c.c0;
    }

    auto grid = std::make_shared<GridFunction>(h, std::move(T));
    WeightedDensity Td = WeightedDensity::from_grid(grid);

    VolterraReport report;
    report.phi_at_h = phis[n];
    report.residual_scale = std::max(scale, 1e-12);
    report.closure_condition = cond;
    for (int t = 0; t < 16; ++t) {
        const double x = h * (t + 0.5) / 16.0;
        report.max_residual =
            std::max(report.max_residual, std::abs(apply_volterra_operator(Td, par, x) - Phi(x)));
    }
    return {std::move(Td), std::move(grid), report};
}

double characteristic_mismatch(const WeightedDensity& T, const WeightedDensity& N,
                               const Parameters& par, double xi, int q) {
    par.validate();
    if (!(xi > 0.0) || !(xi < par.h))
        throw std::invalid_argument("characteristic_mismatch: xi must lie in (0, h)");
    return matching_a_integral(T, par, xi, q) + matching_b_integral(N, par, xi, q);
}

TransmissionResult solve_characteristic_transmission(const WeightedDensity& T,
                                                     const Parameters& par,
                                                     const GluingConstants& k, int n, int q) {
    par.validate();
    if (n < 8) throw std::invalid_argument("solve_characteristic_transmission: need n >= 8");
    if (T.alpha0() < 0.0)
        throw std::invalid_argument(
            "solve_characteristic_transmission: T must be bounded at s = 0");
    const double h = par.h;
    const int qa = std::max(16, q);

    std::vector<double> xs(n + 1), N(n + 1);
    for (int i = 0; i <= n; ++i) xs[i] = h * static_cast<double>(i) / n;
    // Leading-order balance of the two limits at xi -> 0 fixes the closure.
    N[0] = k.k1 * T.value(0.0);

    for (int i = 1; i <= n; ++i) {
        const double xi = xs[i];
        const double rhs = -matching_a_integral(T, par, xi, qa);
        double acc = 0.0, diag = 0.0;
        for (int j = 0; j < i; ++j) {
            const HatCoeffs c = transmission_panel(par, xi, xs[j], xs[j + 1], q);
            acc += c.c0 * N[j];
            if (j + 1 < i)
                acc += c.c1 * N[j + 1];
            else
                diag = c.c1;
        }
        if (!(std::abs(diag) > 0.0))
            throw SolverError("solve_characteristic_transmission: vanishing march coefficient");
        N[i] = (rhs - acc) / diag;
    }

    auto grid = std::make_shared<GridFunction>(h, std::move(N));
    WeightedDensity Nd = WeightedDensity::from_grid(grid);
    double worst = 0.0;
    for (int t = 0; t < 8; ++t) {
        const double x = h * (t + 0.5) / 8.0;
        worst = std::max(worst, std::abs(characteristic_mismatch(T, Nd, par, x)));
    }
    return {std::move(Nd), std::move(grid), worst};
}

std::pair<WeightedDensity, WeightedDensity> mu_from_nu(const NuPair& nu, const Parameters& par) {
    const double p = par.p;
    const WeightedDensity diff = weighted_combine(nu.nu1, nu.nu3, 1.0, -1.0);
    const WeightedDensity sum = weighted_combine(nu.nu1, nu.nu3, 1.0, 1.0);
    return {diff.shifted(p, p), sum.shifted(p - 1.0, p)};
}

NuPair recover_nu_from_mu(const WeightedDensity& mu1, const WeightedDensity& mu2,
                          const Parameters& par) {
    const double p = par.p;
    const WeightedDensity a = mu1.shifted(-p, -p);
    const WeightedDensity b = mu2.shifted(1.0 - p, -p);
    return {weighted_combine(a, b, 0.5, 0.5), weighted_combine(b, a, 0.5, -0.5)};
}

WeightedDensity materialize(const WeightedDensity& d, int m) {
    if (m < 2) throw std::invalid_argument("materialize: need at least 2 panels");
    const double h = d.h();
    std::vector<double> vals(m + 1);
    for (int i = 0; i <= m; ++i) {
        double s = h * static_cast<double>(i) / m;
        if (i == 0) s = 0.5 * h / m;
        if (i == m) s = h * (1.0 - 0.5 / m);
        vals[i] = d.smooth_at(s);
    }
    auto g = std::make_shared<GridFunction>(h, std::move(vals));
    return WeightedDensity::from_grid(std::move(g), d.alpha0(), d.alphaH());
}

Delta2Result solve_delta2(const BoundaryData& data, const Parameters& par, const Delta2Inputs& in,
                          const GluingConstants& k, int n) {
    par.validate();
    if (par.lambda != 0.0)
        throw std::invalid_argument(
            "solve_delta2: the continuous-derivative gluing is only solvable in closed form for "
            "lambda = 0, got lambda = " +
            std::to_string(par.lambda));
    if (n < 8) throw std::invalid_argument("solve_delta2: need n >= 8");

    const double d1 = boundary_dphi_at_h(data, 1, par.h);
    const double d2 = boundary_dphi_at_h(data, 2, par.h);
    const double dscale = std::max({1.0, std::abs(d1), std::abs(d2)});
    const bool special = std::abs(d1 + d2) <= 1e-9 * dscale && std::abs(d1) > 1e-9 * dscale;

    WeightedDensity mu1 = invert_bounded_at_zero(in.phi1_star, n);
    InversionCase used = special ? InversionCase::bounded_at_h() : InversionCase::unbounded(in.a0);
    WeightedDensity mu2 = special ? invert_bounded_at_h(in.phi2_star, n)
                                  : invert_unbounded(in.phi2_star, in.a0, n);

    const NuPair raw = recover_nu_from_mu(mu1, mu2, par);
    NuPair nu{materialize(raw.nu1, n), materialize(raw.nu3, n)};
    SolutionField field = assemble_gluing_field(in.T_upper, in.T_lower, nu.nu1, nu.nu3, k, par, n);
    return {std::move(nu), std::move(mu1), std::move(mu2), used, std::move(field)};
}

Delta2StarResult solve_delta2_star(const BoundaryData& data, const Parameters& par,
                                   const Delta2StarInputs& in, const GluingConstants& k,
                                   double eps, int n) {
    par.validate();
    if (!in.Phi1 || !in.Phi2)
        throw std::invalid_argument("solve_delta2_star: Phi1 and Phi2 must be callable");
    if (n < 8) throw std::invalid_argument("solve_delta2_star: need n >= 8");

    Delta2StarConditions conditions = check_delta2star_conditions(data, par, eps, std::max(n, 64));
    if (in.enforce_conditions && !conditions.all_passed()) {
        std::string which;
        auto blame = [&](const FunctionConditions& f, const char* name) {
            if (!f.twice_differentiable.passed) which += std::string(" ") + name + ":smoothness";
            if (!f.value_at_zero.passed) which += std::string(" ") + name + ":value_at_zero";
            if (!f.slope_at_zero.passed) which += std::string(" ") + name + ":slope_at_zero";
            if (!f.moment.passed) which += std::string(" ") + name + ":moment";
        };
        blame(conditions.f1, "phi1");
        blame(conditions.f2, "phi2");
        throw SolverError("solve_delta2_star: boundary data fails solvability conditions:" + which);
    }

    VolterraResult vu = solve_volterra_first_kind(in.Phi1, par, n, in.dPhi1);
    VolterraResult vl = solve_volterra_first_kind(in.Phi2, par, n, in.dPhi2);
    TransmissionResult tu = solve_characteristic_transmission(vu.T, par, k, in.transmission_n);
    TransmissionResult tl = solve_characteristic_transmission(vl.T, par, k, in.transmission_n);

    WeightedDensity nu_u = intrinsic_from_transmission(vu.T, tu.N, k, n);
    WeightedDensity nu_l = intrinsic_from_transmission(vl.T, tl.N, k, n);

    std::array<CauchyDensities, 4> dens{CauchyDensities{vu.T, nu_u, k},
                                        CauchyDensities{vu.T, nu_u, k},
                                        CauchyDensities{vl.T, nu_l, k},
                                        CauchyDensities{vl.T, nu_l, k}};
    SolutionField field(std::move(dens), par, n);
    return {std::move(vu.T),    std::move(vl.T),    std::move(nu_u),   std::move(nu_l),
            vu.report,          vl.report,          tu.max_mismatch,   tl.max_mismatch,
            conditions,         std::move(field)};
}

ManufacturedDelta2Star manufacture_delta2star(const Parameters& par, const GluingConstants& k,
                                              int transmission_n, int quad_n) {
    par.validate();
    const double p = par.p, h = par.h;
    const double eps = p;

    // Reference T: the monomial combination whose induced edge data satisfies
    // the value, slope, and moment constraints at once. The constraint matrix
    // is 3x4, so a one-dimensional family survives; normalize it.
    std::array<WeightedDensity, 4> basis{
        WeightedDensity::plain(h, [](double) { return 1.0; }),
        WeightedDensity::plain(h, [](double s) { return s; }),
        WeightedDensity::plain(h, [](double s) { return s * s; }),
        WeightedDensity::plain(h, [](double s) { return s * s * s; })};
    std::array<std::array<double, 4>, 3> m{};
    for (int b = 0; b < 4; ++b) {
        const TransmissionResult t = solve_characteristic_transmission(basis[b], par, k, transmission_n);
        m[0][b] = edge_trace_at_zero(t.N, par, 12);
        m[1][b] = edge_trace_deriv_at_zero(t.N, par, 12);
        m[2][b] = reduced_trace_moment(t.N, par);
    }
    const std::array<double, 4> c = nullspace_3x4(m);

    WeightedDensity T_star = WeightedDensity::plain(h, [c](double s) {
        return c[0] + s * (c[1] + s * (c[2] + s * c[3]));
    });
    const TransmissionResult trans = solve_characteristic_transmission(T_star, par, k, transmission_n);
    const WeightedDensity N_star = trans.N;
    WeightedDensity nu_star = intrinsic_from_transmission(T_star, N_star, k, 256);

    std::array<CauchyDensities, 4> dens{CauchyDensities{T_star, nu_star, k},
                                        CauchyDensities{T_star, nu_star, k},
                                        CauchyDensities{T_star, nu_star, k},
                                        CauchyDensities{T_star, nu_star, k}};
    SolutionField reference(std::move(dens), par, quad_n);

    const Parameters parc = par;
    auto reduced = [N_star, parc](double x) { return reduced_trace(N_star, parc, x, 12); };
    auto phi = [reduced, h, p](double x) {
        if (x >= h) return 0.0;
        return std::pow(h - x, 1.0 + 2.0 * p) * reduced(x);
    };
    auto dphi = [N_star, parc](double x) {
        const double hh = parc.h, pp = parc.p, lam = parc.lambda;
        if (x >= hh) return 0.0;
        auto smooth = [&](double s) {
            const double z = -lam * (hh - s) * (s - x);
            return N_star.value(s) *
                   (-pp * series_f(pp, z) + lam * (hh - s) * (s - x) * series_fdz(pp, z));
        };
        return integrate_panels(x, hh, pp, pp - 1.0, kinks_of(N_star, x, hh), 12, smooth);
    };

    BoundaryData data;
    data.phi1 = data.phi2 = phi;
    data.dphi1 = data.dphi2 = dphi;
    data.phi1_reduced = data.phi2_reduced = reduced;
    data.dphi1_at_h = 0.0;
    data.dphi2_at_h = 0.0;

    Delta2StarInputs inputs;
    inputs.Phi1 = inputs.Phi2 = [T_star, parc](double x) {
        return apply_volterra_operator(T_star, parc, x);
    };
    inputs.dPhi1 = inputs.dPhi2 = [T_star, parc](double x) {
        return apply_volterra_operator_deriv(T_star, parc, x);
    };
    inputs.transmission_n = transmission_n;

    return {par,
            k,
            eps,
            std::move(data),
            std::move(inputs),
            std::move(T_star),
            std::move(nu_star),
            std::move(reference)};
}

ManufacturedDelta2 manufacture_delta2(const Parameters& par, const GluingConstants& k,
                                      int transmission_n, int quad_n, int inversion_n) {
    par.validate();
    if (par.lambda != 0.0)
        throw std::invalid_argument("manufacture_delta2: requires lambda = 0");
    const double h = par.h;

    // Distinct upper and lower T so the two edge-limit differences are both
    // nonzero and the two inversion classes are genuinely exercised.
    WeightedDensity T_up = WeightedDensity::plain(h, [h](double s) { return 1.0 + 0.5 * s / h; });
    WeightedDensity T_low = WeightedDensity::plain(h, [h](double s) {
        const double t = s / h;
        return 1.0 + 0.5 * t + 0.25 * t * t;
    });
    const TransmissionResult tu = solve_characteristic_transmission(T_up, par, k, transmission_n);
    const TransmissionResult tl = solve_characteristic_transmission(T_low, par, k, transmission_n);

    // Interior matching fixes the densities next to the gluing line; for the
    // continuous-derivative problem that makes the edge-limit pair the
    // negative of the transmitted intrinsic one.
    WeightedDensity nu1 = materialize(weighted_combine(tu.N, T_up, 1.0 / k.k2, -k.k1 / k.k2), 256);
    WeightedDensity nu3 = materialize(weighted_combine(tl.N, T_low, 1.0 / k.k2, -k.k1 / k.k2), 256);

    const NuPair nu_ref{nu1, nu3};
    const auto [mu1, mu2] = mu_from_nu(nu_ref, par);

    auto K1 = std::make_shared<PvKernel>(mu1, inversion_n);
    auto K2 = std::make_shared<PvKernel>(mu2, inversion_n);
    WeightedDensity phi1_star = WeightedDensity::plain(h, [K1](double x) { return K1->eval(x); });
    // The second data function inherits mu2's s^(p-1) growth at 0; declaring
    // the exponent keeps the downstream inversion sampling a bounded smooth
    // part instead of the raw blowup.
    const double pm1 = par.p - 1.0;
    WeightedDensity phi2_star(pm1, 0.0, h, [K2, pm1](double x) {
        return K2->eval(x) * std::pow(x, -pm1);
    });

    // The unbounded inversion recovers mu2 only modulo the operator kernel;
    // one interior matching point pins the free coefficient.
    const WeightedDensity inv0 = invert_unbounded(phi2_star, 0.0, inversion_n);
    const double x0 = 0.5 * h;
    const double a0 = (inv0.value(x0) - mu2.value(x0)) * std::sqrt(x0 * (h - x0));

    SolutionField reference = assemble_gluing_field(T_up, T_low, nu1, nu3, k, par, quad_n);

    auto fieldp = std::make_shared<SolutionField>(reference);
    BoundaryData data;
    data.phi1 = [fieldp](double x) {
        if (x >= fieldp->parameters().h) return 0.0;
        return boundary_trace(*fieldp, Edge::Top, x);
    };
    data.phi2 = [fieldp](double x) {
        if (x >= fieldp->parameters().h) return 0.0;
        return boundary_trace(*fieldp, Edge::Bottom, x);
    };
    data.dphi1 = [fieldp](double x) { return boundary_trace_deriv(*fieldp, Edge::Top, x); };
    data.dphi2 = [fieldp](double x) { return boundary_trace_deriv(*fieldp, Edge::Bottom, x); };
    data.dphi1_at_h = 0.0;
    data.dphi2_at_h = 0.0;

    Delta2Inputs inputs{std::move(phi1_star), std::move(phi2_star), T_up, T_low, a0};
    return {par, k, std::move(data), std::move(inputs), nu_ref, std::move(reference)};
}

} // namespace darboux
