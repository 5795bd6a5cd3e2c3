#include "darboux/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace darboux {

namespace {

// One elimination stage for the exponent gamma on a halving ladder
// v(d), v(d/2), ...; the returned ladder is one entry shorter.
std::vector<double> richardson_stage(const std::vector<double>& v, double gamma) {
    const double f = std::pow(2.0, gamma) - 1.0;
    std::vector<double> out;
    out.reserve(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        out.push_back(v[i + 1] + (v[i + 1] - v[i]) / f);
    return out;
}

struct ResidualTerms {
    double residual = 0.0;
    double scale = 1.0;  // sum of term magnitudes, floored at 1
};

ResidualTerms fd_residual_terms(const std::function<double(double, double)>& U, double p,
                                double lambda, double xi, double eta, double step) {
    const double d = step;
    const double upp = U(xi + d, eta + d), upm = U(xi + d, eta - d);
    const double ump = U(xi - d, eta + d), umm = U(xi - d, eta - d);
    const double uxy = (upp - upm - ump + umm) / (4.0 * d * d);
    const double ux = (U(xi + d, eta) - U(xi - d, eta)) / (2.0 * d);
    const double uy = (U(xi, eta + d) - U(xi, eta - d)) / (2.0 * d);
    const double u0 = U(xi, eta);
    const double s = (eta >= 0.0) ? 1.0 : -1.0;
    const double tx = -p / (eta - s * xi) * ux;
    const double ty = p / (s * eta - xi) * uy;
    const double tl = -s * lambda * u0;
    ResidualTerms out;
    out.residual = uxy + tx + ty + tl;
    out.scale = std::max(1.0, std::abs(uxy) + std::abs(tx) + std::abs(ty) + std::abs(tl));
    return out;
}

double deriv5(const std::function<double(double)>& f, double x, double tau) {
    return (f(x - 2.0 * tau) - 8.0 * f(x - tau) + 8.0 * f(x + tau) - f(x + 2.0 * tau)) /
           (12.0 * tau);
}

double deriv3(const std::function<double(double)>& f, double x, double tau) {
    return (f(x + tau) - f(x - tau)) / (2.0 * tau);
}

// Scaled transversal derivative toward one degeneracy line at offset delta.
// which selects the triangle; the combinations and signs mirror the
// reflection map of the field evaluator.
double scaled_edge_derivative(const SolutionField& field, int which, double xi, double delta) {
    const double p = field.parameters().p;
    const double tau = delta / 8.0;
    double base_eta = 0.0;
    bool diff_combination = true;
    switch (which) {
        case 1: base_eta = xi + delta; diff_combination = true; break;
        case 2: base_eta = xi - delta; diff_combination = true; break;
        case 3: base_eta = delta - xi; diff_combination = false; break;
        case 4: base_eta = -xi - delta; diff_combination = false; break;
    }
    auto ux = deriv5([&](double x) { return field.value(x, base_eta); }, xi, tau);
    auto uy = deriv5([&](double y) { return field.value(xi, y); }, base_eta, tau);
    const double comb = diff_combination ? (ux - uy) : (ux + uy);
    return comb * std::pow(delta, -2.0 * p);
}

struct TriangleFrame {
    Triangle tri;
    // maps (u, v) in the open unit square to a point of the open triangle
    std::function<std::pair<double, double>(double, double)> map;
    // distances to the three bounding lines; all must clear the margin
    std::function<std::array<double, 3>(double, double)> line_distances;
};

std::array<TriangleFrame, 4> triangle_frames(double h) {
    std::array<TriangleFrame, 4> f{};
    f[0].tri = Triangle::UpperLeft;
    f[0].map = [h](double u, double v) {
        const double xi = u * h;
        return std::pair{xi, xi + v * (h - xi)};
    };
    f[0].line_distances = [h](double xi, double eta) {
        return std::array{xi, h - eta, eta - xi};
    };
    f[1].tri = Triangle::UpperRight;
    f[1].map = [h](double u, double v) {
        const double eta = v * h;
        return std::pair{eta + u * (h - eta), eta};
    };
    f[1].line_distances = [h](double xi, double eta) {
        return std::array{eta, h - xi, xi - eta};
    };
    f[2].tri = Triangle::LowerRight;
    f[2].map = [h](double u, double v) {
        const double w = v * h;
        return std::pair{w + u * (h - w), -w};
    };
    f[2].line_distances = [h](double xi, double eta) {
        return std::array{-eta, h - xi, xi + eta};
    };
    f[3].tri = Triangle::LowerLeft;
    f[3].map = [h](double u, double v) {
        const double xi = u * h;
        return std::pair{xi, -(xi + v * (h - xi))};
    };
    f[3].line_distances = [h](double xi, double eta) {
        return std::array{xi, h + eta, -eta - xi};
    };
    return f;
}

} // namespace

double fd_residual(const std::function<double(double, double)>& U, double p, double lambda,
                   double xi, double eta, double step) {
    return fd_residual_terms(U, p, lambda, xi, eta, step).residual;
}

double fd_residual(const SolutionField& field, double xi, double eta, double step) {
    const auto& par = field.parameters();
    auto U = [&](double x, double y) { return field.value(x, y); };
    return fd_residual_terms(U, par.p, par.lambda, xi, eta, step).residual;
}

NuLimits extract_nu_limits(const SolutionField& field, double xi) {
    const auto& par = field.parameters();
    const double h = par.h;
    if (!(xi > 0.05 * h) || !(xi < 0.95 * h))
        throw std::invalid_argument("extract_nu_limits: foot point too close to a corner");
    const std::array<double, 4> offsets{8e-3 * h, 4e-3 * h, 2e-3 * h, 1e-3 * h};

    NuLimits out;
    double worst = 0.0;
    for (int which = 1; which <= 4; ++which) {
        std::vector<double> ladder;
        ladder.reserve(offsets.size());
        for (double d : offsets) ladder.push_back(scaled_edge_derivative(field, which, xi, d));
        ladder = richardson_stage(ladder, 1.0 - 2.0 * par.p);
        ladder = richardson_stage(ladder, 1.0);
        const double value = ladder.back();
        worst = std::max(worst, std::abs(ladder.back() - ladder.front()));
        switch (which) {
            case 1: out.nu1 = value; break;
            case 2: out.nu2 = value; break;
            case 3: out.nu3 = value; break;
            case 4: out.nu4 = value; break;
        }
    }
    out.uncertainty = worst;
    return out;
}

CharacteristicGap characteristic_gap(const SolutionField& field, double xi, double step) {
    const double h = field.parameters().h;
    if (!(xi > 0.05 * h) || !(xi < 0.95 * h))
        throw std::invalid_argument("characteristic_gap: foot point too close to a corner");

    auto one_sided = [&](double offset, int side) {
        const double eta = side > 0 ? offset : -offset;
        const double tau = offset / 4.0;
        const double ux = deriv3([&](double x) { return field.value(x, eta); }, xi, tau);
        const double uy = deriv3([&](double y) { return field.value(xi, y); }, eta, tau);
        return (side > 0) ? uy - ux : uy + ux;
    };

    CharacteristicGap out;
    for (int side : {+1, -1}) {
        const double l4 = one_sided(4.0 * step, side);
        const double l2 = one_sided(2.0 * step, side);
        const double lim = 2.0 * l2 - l4;
        (side > 0 ? out.above : out.below) = lim;
    }
    out.gap = std::abs(out.above - out.below);
    return out;
}

double gluing_jump(const SolutionField& field, InteriorLine line, double x) {
    const auto& par = field.parameters();
    const double h = par.h;
    if (!(x > 0.05 * h) || !(x < 0.95 * h))
        throw std::invalid_argument("gluing_jump: foot point too close to a corner");
    const std::array<double, 3> offsets{2e-3 * h, 1e-3 * h, 5e-4 * h};

    auto straddle = [&](double d) {
        switch (line) {
            case InteriorLine::Horizontal:
                return field.value(x, d) - field.value(x, -d);
            case InteriorLine::DiagonalUpper:
                // transversal parameter w = eta - xi at fixed midpoint
                return field.value(x - 0.5 * d, x + 0.5 * d) -
                       field.value(x + 0.5 * d, x - 0.5 * d);
            case InteriorLine::DiagonalLower:
                // transversal parameter w = xi + eta around (x, -x)
                return field.value(x + 0.5 * d, -x + 0.5 * d) -
                       field.value(x - 0.5 * d, -x - 0.5 * d);
        }
        return 0.0;
    };

    std::vector<double> ladder;
    ladder.reserve(offsets.size());
    for (double d : offsets) ladder.push_back(straddle(d));
    if (line == InteriorLine::Horizontal) {
        ladder = richardson_stage(ladder, 1.0);
        ladder = richardson_stage(ladder, 2.0);
    } else {
        ladder = richardson_stage(ladder, 1.0);
        ladder = richardson_stage(ladder, 1.0 + 2.0 * par.p);
    }
    return ladder.back();
}

VerificationReport full_report(const SolutionField& field, const VerifyOptions& options) {
    const auto& par = field.parameters();
    const double h = par.h;
    const double step = options.fd_step > 0.0 ? options.fd_step : h / 512.0;
    VerificationReport report;
    const auto frames = triangle_frames(h);

    double field_scale = 1.0;

    // Interior residual sweep with a margin keeping full stencils inside the
    // open triangles.
    {
        const int g = std::max(2, options.residual_grid);
        const double margin = 4.0 * step;
        double worst = 0.0, sumsq = 0.0;
        long count = 0;
        for (const auto& frame : frames) {
            for (int i = 0; i < g; ++i) {
                for (int j = 0; j < g; ++j) {
                    const double u = (i + 0.5) / g, v = (j + 0.5) / g;
                    const auto [xi, eta] = frame.map(u, v);
                    const auto dist = frame.line_distances(xi, eta);
                    if (*std::min_element(dist.begin(), dist.end()) < margin) continue;
                    auto U = [&](double x, double y) { return field.value(x, y); };
                    const ResidualTerms t =
                        fd_residual_terms(U, par.p, par.lambda, xi, eta, step);
                    const double r = std::abs(t.residual) / t.scale;
                    worst = std::max(worst, r);
                    sumsq += r * r;
                    ++count;
                    field_scale = std::max(field_scale, std::abs(field.value(xi, eta)));
                }
            }
        }
        const double l2 = count > 0 ? std::sqrt(sumsq / count) : 0.0;
        report.checks.push_back(
            {"pde_residual", worst, options.pde_tol, worst <= options.pde_tol});
        report.checks.push_back(
            {"pde_residual_l2", l2, options.pde_tol, l2 <= options.pde_tol});
    }

    // Convergence order of the residual under step refinement at a few
    // interior probes; points where the fine residual is already at the
    // noise floor are skipped.
    {
        const double coarse = 4.0 * step, fine = step;
        const double margin = 4.0 * coarse;
        const std::array<std::pair<double, double>, 3> uv{
            std::pair{0.3, 0.4}, std::pair{0.55, 0.6}, std::pair{0.75, 0.3}};
        double worst_dev = 0.0;
        for (const auto& frame : frames) {
            for (const auto& [u, v] : uv) {
                const auto [xi, eta] = frame.map(u, v);
                const auto dist = frame.line_distances(xi, eta);
                if (*std::min_element(dist.begin(), dist.end()) < margin) continue;
                auto U = [&](double x, double y) { return field.value(x, y); };
                const double rc =
                    std::abs(fd_residual_terms(U, par.p, par.lambda, xi, eta, coarse).residual);
                const ResidualTerms tf = fd_residual_terms(U, par.p, par.lambda, xi, eta, fine);
                const double rf = std::abs(tf.residual);
                if (rf < 1e-8 * tf.scale) continue;
                const double order = std::log(rc / rf) / std::log(coarse / fine);
                worst_dev = std::max(worst_dev, std::abs(order - 2.0));
            }
        }
        report.checks.push_back(
            {"pde_order", worst_dev, 0.2, worst_dev <= 0.2});
    }

    if (options.data != nullptr) {
        for (int which = 1; which <= 2; ++which) {
            const auto& phi = (which == 1) ? options.data->phi1 : options.data->phi2;
            const Edge edge = (which == 1) ? Edge::Top : Edge::Bottom;
            double worst = 0.0, scale = 1.0;
            if (phi) {
                for (int i = 0; i < 24; ++i) {
                    const double x = h * (i + 0.5) / 24.0;
                    const double want = phi(x);
                    scale = std::max(scale, std::abs(want));
                    worst = std::max(worst, std::abs(boundary_trace(field, edge, x) - want));
                }
            }
            const double measured = worst / scale;
            report.checks.push_back({which == 1 ? "boundary_top" : "boundary_bottom", measured,
                                     options.boundary_tol, measured <= options.boundary_tol});
        }
    }

    {
        const std::array<std::pair<InteriorLine, const char*>, 3> lines{
            std::pair{InteriorLine::Horizontal, "gluing_horizontal"},
            std::pair{InteriorLine::DiagonalUpper, "gluing_diagonal_upper"},
            std::pair{InteriorLine::DiagonalLower, "gluing_diagonal_lower"}};
        for (const auto& [line, name] : lines) {
            double worst = 0.0;
            for (double r : {0.3, 0.5, 0.7})
                worst = std::max(worst, std::abs(gluing_jump(field, line, r * h)));
            const double measured = worst / field_scale;
            report.checks.push_back(
                {name, measured, options.gluing_tol, measured <= options.gluing_tol});
        }
    }

    if (options.gluing_sign != 0) {
        const double sign = options.gluing_sign > 0 ? 1.0 : -1.0;
        double worst = 0.0;
        for (double r : {0.35, 0.55, 0.75}) {
            const NuLimits nu = extract_nu_limits(field, r * h);
            const double s12 = std::max({1e-12, std::abs(nu.nu1), std::abs(nu.nu2)});
            const double s34 = std::max({1e-12, std::abs(nu.nu3), std::abs(nu.nu4)});
            worst = std::max(worst, std::abs(nu.nu2 - sign * nu.nu1) / s12);
            worst = std::max(worst, std::abs(nu.nu4 - sign * nu.nu3) / s34);
        }
        report.checks.push_back(
            {"nu_relation", worst, options.nu_rel_tol, worst <= options.nu_rel_tol});
    }

    {
        double worst = 0.0;
        for (int k = 0; k < 8; ++k) {
            const double x = h * (k + 1.0) / 9.0;
            const CharacteristicGap g = characteristic_gap(field, x, step);
            const double scale = std::max({1.0, std::abs(g.above), std::abs(g.below)});
            worst = std::max(worst, g.gap / scale);
        }
        report.checks.push_back({"characteristic_matching", worst, options.characteristic_tol,
                                 worst <= options.characteristic_tol});
    }

    return report;
}

} // namespace darboux
