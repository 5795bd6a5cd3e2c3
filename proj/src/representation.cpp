#include "darboux/representation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "darboux/quadrature.hpp"
#include "darboux/specfun.hpp"

namespace darboux {

double matched_k1(double p) {
    return 1.0 / (2.0 * std::cos(std::numbers::pi * p));
}

double matched_k2(double p) {
    return std::exp(std::lgamma(1.0 + 2.0 * p) - 2.0 * std::lgamma(1.0 + p)) / 2.0;
}

GluingConstants matched_gluing(double p) {
    return {matched_k1(p), matched_k2(p)};
}

std::optional<Triangle> classify_point(double xi, double eta, double h) {
    const double tol = 1e-9 * h;
    if (xi <= tol || xi >= h - tol) return std::nullopt;
    if (eta > h || eta < -h) return std::nullopt;
    if (std::abs(eta) <= tol) return std::nullopt;
    if (std::abs(eta - xi) <= tol || std::abs(eta + xi) <= tol) return std::nullopt;
    if (eta > 0.0) return (eta > xi) ? Triangle::UpperLeft : Triangle::UpperRight;
    return (-eta > xi) ? Triangle::LowerLeft : Triangle::LowerRight;
}

namespace {

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

} // namespace

double eval_solution_upper(double xi, double eta, const CauchyDensities& dens,
                           const Parameters& par, int n) {
    par.validate();
    const double h = par.h, p = par.p, lam = par.lambda;
    const double tol = 1e-9 * h;
    if (!(xi > tol) || !(eta > xi + tol) || eta > h + tol)
        throw std::invalid_argument("eval_solution_upper: point must satisfy 0 < xi < eta <= h");
    if (n < 8) throw std::invalid_argument("eval_solution_upper: need n >= 8");
    const double a1p = 1.0 + p;

    // First integral over [eta, h]: rule weight (s-eta)^p at the lower end
    // and the T density's own exponent at s = h; T's s^alpha0 factor is
    // smooth there since eta > 0.
    double first = 0.0;
    if (eta < h - tol) {
        const auto& T = dens.T;
        const double ta0 = T.alpha0();
        auto smooth1 = [&](double s) {
            double v = T.smooth_at(s) * std::pow(s - xi, p)
                     * hyp0f1(a1p, lam * (s - xi) * (s - eta)).value;
            if (ta0 != 0.0) v *= std::pow(s, ta0);
            return v;
        };
        const auto kinks = kinks_of(T, eta, h);
        const int q = panel_order(T.grid_hint() != nullptr, n);
        first = integrate_panels(eta, h, T.alphaH(), p, kinks, q, smooth1);
    }

    // Second integral over [xi, eta]: rule weights (s-xi)^p and (eta-s)^p;
    // the N density's own endpoint factors are smooth on the closed interval
    // because 0 < xi and eta < h (at eta = h they fold into the rule weight).
    const auto N = dens.N();
    const double na0 = N.alpha0(), naH = N.alphaH();
    const bool at_top = eta >= h - tol;
    auto smooth2 = [&](double s) {
        double v = N.smooth_at(s) * hyp0f1(a1p, -lam * (eta - s) * (s - xi)).value;
        if (na0 != 0.0) v *= std::pow(s, na0);
        if (!at_top && naH != 0.0) v *= std::pow(h - s, naH);
        return v;
    };
    const auto kinks = merge_kinks(kinks_of(dens.T, xi, eta), kinks_of(dens.nu, xi, eta));
    const int q = panel_order(dens.T.grid_hint() || dens.nu.grid_hint(), n);
    const double alpha_top = at_top ? p + naH : p;
    const double second = integrate_panels(xi, eta, alpha_top, p, kinks, q, smooth2);
    return first + second;
}

SolutionField::SolutionField(std::array<CauchyDensities, 4> per_triangle, Parameters par, int quad_n)
    : dens_(std::move(per_triangle)), par_(par), n_(quad_n) {
    par_.validate();
    if (n_ < 8) throw std::invalid_argument("SolutionField: need quad_n >= 8");
}

double SolutionField::value_in(Triangle t, double xi, double eta) const {
    switch (t) {
        case Triangle::UpperLeft:
            return eval_solution_upper(xi, eta, densities(t), par_, n_);
        case Triangle::UpperRight:
            return eval_solution_upper(eta, xi, densities(t), par_, n_);
        case Triangle::LowerRight:
            return eval_solution_upper(-eta, xi, densities(t), par_, n_);
        case Triangle::LowerLeft:
            return eval_solution_upper(xi, -eta, densities(t), par_, n_);
    }
    throw std::logic_error("SolutionField::value_in: bad triangle tag");
}

double SolutionField::value(double xi, double eta) const {
    const auto t = classify_point(xi, eta, par_.h);
    if (!t)
        throw std::invalid_argument("SolutionField::value: point on a singular line or outside D");
    return value_in(*t, xi, eta);
}

namespace {

const CauchyDensities& edge_densities(const SolutionField& field, Edge edge) {
    return field.densities(edge == Edge::Top ? Triangle::UpperLeft : Triangle::LowerLeft);
}

} // namespace

double boundary_trace(const SolutionField& field, Edge edge, double xi) {
    const auto& par = field.parameters();
    const double h = par.h, p = par.p, lam = par.lambda;
    if (!(xi >= 0.0) || !(xi < h))
        throw std::invalid_argument("boundary_trace: xi must lie in [0, h)");
    const auto& dens = edge_densities(field, edge);
    const auto N = dens.N();
    const double na0 = N.alpha0();
    const auto kinks = merge_kinks(kinks_of(dens.T, xi, h), kinks_of(dens.nu, xi, h));
    const int q = panel_order(dens.T.grid_hint() || dens.nu.grid_hint(), field.quad_n());

    const bool at_corner = (xi == 0.0);
    auto smooth = [&](double s) {
        double v = N.smooth_at(s) * hyp0f1(1.0 + p, -lam * (h - s) * (s - xi)).value;
        if (!at_corner && na0 != 0.0) v *= std::pow(s, na0);
        return v;
    };
    const double alpha_top = p + N.alphaH();
    const double beta_bot = at_corner ? p + na0 : p;
    return integrate_panels(xi, h, alpha_top, beta_bot, kinks, q, smooth);
}

double boundary_trace_deriv(const SolutionField& field, Edge edge, double xi) {
    const auto& par = field.parameters();
    const double h = par.h, p = par.p, lam = par.lambda;
    if (!(xi > 0.0) || !(xi < h))
        throw std::invalid_argument("boundary_trace_deriv: xi must lie in (0, h)");
    const auto& dens = edge_densities(field, edge);
    const auto N = dens.N();
    const double na0 = N.alpha0();
    const auto kinks = merge_kinks(kinks_of(dens.T, xi, h), kinks_of(dens.nu, xi, h));
    const int q = panel_order(dens.T.grid_hint() || dens.nu.grid_hint(), field.quad_n());

    // d/dxi of int_xi^h N (h-s)^p (s-xi)^p F(-lam(h-s)(s-xi)) ds: the boundary
    // term vanishes (p > 0); the derivative splits into a (s-xi)^(p-1) part
    // and, for lam != 0, a regular part from the series factor.
    auto smooth_a = [&](double s) {
        double v = -p * N.smooth_at(s) * hyp0f1(1.0 + p, -lam * (h - s) * (s - xi)).value;
        if (na0 != 0.0) v *= std::pow(s, na0);
        return v;
    };
    double out = integrate_panels(xi, h, p + N.alphaH(), p - 1.0, kinks, q, smooth_a);
    if (lam != 0.0) {
        auto smooth_b = [&](double s) {
            double v = lam * N.smooth_at(s) * hyp0f1_dz(1.0 + p, -lam * (h - s) * (s - xi));
            if (na0 != 0.0) v *= std::pow(s, na0);
            return v;
        };
        out += integrate_panels(xi, h, p + 1.0 + N.alphaH(), p, kinks, q, smooth_b);
    }
    return out;
}

} // namespace darboux
