#include "darboux/selftest.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <random>

#include "darboux/hilbert.hpp"
#include "darboux/quadrature.hpp"
#include "darboux/solvers.hpp"
#include "darboux/specfun.hpp"

namespace darboux {

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

SelftestCheck worst_case(std::string name, double measured, double threshold) {
    return {std::move(name), measured, threshold, measured <= threshold};
}

} // namespace

SelftestSection selftest_series() {
    Stopwatch watch;
    SelftestSection section;
    section.name = "series";

    double e_cos = 0.0, e_sinc = 0.0, e_cosh = 0.0, e_sinh = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double x = 0.2 + (12.0 - 0.2) * k / 49.0;
        const double z = x * x / 4.0;
        auto rel = [](double got, double want) {
            return std::abs(got - want) / std::max(1.0, std::abs(want));
        };
        e_cos = std::max(e_cos, rel(hyp0f1(0.5, -z).value, std::cos(x)));
        e_sinc = std::max(e_sinc, rel(hyp0f1(1.5, -z).value, std::sin(x) / x));
        e_cosh = std::max(e_cosh, rel(hyp0f1(0.5, z).value, std::cosh(x)));
        e_sinh = std::max(e_sinh, rel(hyp0f1(1.5, z).value, std::sinh(x) / x));
    }
    double e_origin = 0.0;
    for (double a : {0.5, 1.25, 1.5, 3.0})
        e_origin = std::max(e_origin, std::abs(hyp0f1(a, 0.0).value - 1.0));
    section.checks.push_back(worst_case("unit_value_at_origin", e_origin, 0.0));
    section.checks.push_back(worst_case("half_parameter_cosine", e_cos, 1e-11));
    section.checks.push_back(worst_case("three_halves_parameter_sinc", e_sinc, 1e-11));
    section.checks.push_back(worst_case("half_parameter_hyperbolic", e_cosh, 1e-11));
    section.checks.push_back(worst_case("three_halves_parameter_hyperbolic", e_sinh, 1e-11));

    section.seconds = watch.seconds();
    return section;
}

SelftestSection selftest_quadrature() {
    Stopwatch watch;
    SelftestSection section;
    section.name = "quadrature";
    const double p = 0.25;

    struct WeightCase {
        const char* name;
        double alpha, beta, h;
    };
    const std::array<WeightCase, 5> cases{
        WeightCase{"rule_plain", 0.0, 0.0, 1.0},
        WeightCase{"rule_symmetric_fractional", p, p, 1.0},
        WeightCase{"rule_mixed_fractional", p, p - 1.0, 1.0},
        WeightCase{"rule_chebyshev", -0.5, -0.5, 1.0},
        WeightCase{"rule_plain_scaled", 0.0, 0.0, 2.0},
    };
    for (const auto& wc : cases) {
        double worst = 0.0;
        for (int n : {8, 20}) {
            const JacobiRule rule = jacobi_rule(n, wc.alpha, wc.beta, wc.h);
            for (int k = 0; k < 2 * n; ++k) {
                double got = 0.0;
                for (int i = 0; i < rule.n; ++i)
                    got += rule.weights[i] * std::pow(rule.nodes[i], double(k));
                const double exact = std::pow(wc.h, wc.alpha + wc.beta + k + 1.0) *
                                     beta_function(wc.beta + k + 1.0, wc.alpha + 1.0);
                worst = std::max(worst, std::abs(got - exact) / exact);
            }
        }
        section.checks.push_back(worst_case(wc.name, worst, 1e-10));
    }

    const double h = 1.0;
    const auto plain_one = WeightedDensity::constant(h, 1.0);
    const WeightedDensity half_circle(0.5, 0.5, h, [](double) { return 1.0; });
    double e_log = 0.0, e_circle = 0.0;
    for (int j = 0; j < 64; ++j) {
        const double xi = h * (j + 0.5) / 64.0;
        e_log = std::max(e_log,
                         std::abs(pv_hilbert(plain_one, xi, 256) - std::log((h - xi) / xi)));
        const double want = M_PI * (h / 2.0 - xi);
        e_circle = std::max(e_circle, std::abs(pv_hilbert(half_circle, xi, 256) - want));
    }
    section.checks.push_back(worst_case("principal_value_log_form", e_log, 1e-8));
    section.checks.push_back(worst_case("principal_value_linear_form", e_circle, 1e-8));

    section.seconds = watch.seconds();
    return section;
}

SelftestSection selftest_inversion() {
    Stopwatch watch;
    SelftestSection section;
    section.name = "inversion";
    const double h = 1.0;
    const int n = 256;

    const std::array<std::function<double(double)>, 10> smooth_parts{
        [](double) { return 1.0; },
        [](double s) { return s; },
        [](double s) { return s * s; },
        [](double s) { return s * s * s; },
        [](double s) { return s * s * s * s; },
        [](double s) { return 1.0 - 2.0 * s; },
        [](double s) { return 3.0 * s * s - 2.0 * s * s * s; },
        [](double s) { return std::cos(M_PI * s); },
        [](double s) { return std::sin(M_PI * s) + 0.5; },
        [](double s) { return 1.0 / (1.0 + s); },
    };

    auto roundtrip_error = [&](const WeightedDensity& truth, const WeightedDensity& got) {
        double scale = 1.0, err = 0.0;
        for (int i = 0; i <= 16; ++i) {
            const double s = h * (0.05 + 0.9 * i / 16.0);
            scale = std::max(scale, std::abs(truth.value(s)));
        }
        for (int i = 0; i <= 16; ++i) {
            const double s = h * (0.05 + 0.9 * i / 16.0);
            err = std::max(err, std::abs(got.value(s) - truth.value(s)));
        }
        return err / scale;
    };

    double e_zero = 0.0, e_unbounded = 0.0, e_h = 0.0;
    for (const auto& g : smooth_parts) {
        {
            const WeightedDensity truth(0.5, -0.5, h, g);
            const PvKernel forward(truth, n);
            auto phi_star = [&forward](double xi) { return forward.eval(xi); };
            e_zero = std::max(e_zero,
                              roundtrip_error(truth, invert_bounded_at_zero(phi_star, h, n)));
        }
        {
            const WeightedDensity truth(-0.5, -0.5, h, g);
            const PvKernel forward(truth, n);
            auto phi_star = [&forward](double xi) { return forward.eval(xi); };
            const double xi0 = h / 2.0;
            const WeightedDensity raw = invert_unbounded(phi_star, h, 0.0, n);
            const double a0 =
                (raw.value(xi0) - truth.value(xi0)) * std::sqrt(xi0 * (h - xi0));
            e_unbounded = std::max(
                e_unbounded, roundtrip_error(truth, invert_unbounded(phi_star, h, a0, n)));
        }
        {
            const WeightedDensity truth(-0.5, 0.5, h, g);
            const PvKernel forward(truth, n);
            auto phi_star = [&forward](double xi) { return forward.eval(xi); };
            e_h = std::max(e_h, roundtrip_error(truth, invert_bounded_at_h(phi_star, h, n)));
        }
    }
    section.checks.push_back(worst_case("bounded_at_zero_roundtrip", e_zero, 1e-5));
    section.checks.push_back(worst_case("unbounded_roundtrip", e_unbounded, 1e-5));
    section.checks.push_back(worst_case("bounded_at_h_roundtrip", e_h, 1e-5));

    const WeightedDensity kernel_element(-0.5, -0.5, h, [](double) { return 1.0; });
    double e_kernel = 0.0;
    for (int j = 0; j < 64; ++j) {
        const double xi = h * (j + 0.5) / 64.0;
        e_kernel = std::max(e_kernel, std::abs(pv_hilbert(kernel_element, xi, 256)));
    }
    section.checks.push_back(worst_case("kernel_element_annihilated", e_kernel, 1e-8));

    section.seconds = watch.seconds();
    return section;
}

SelftestSection selftest_density_algebra() {
    Stopwatch watch;
    SelftestSection section;
    section.name = "density_algebra";
    const Parameters par{0.25, 0.0, 1.0};

    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, 4> c1{}, c3{};
        for (auto& c : c1) c = coef(rng);
        for (auto& c : c3) c = coef(rng);
        auto cubic = [](std::array<double, 4> c) {
            return [c](double s) { return c[0] + s * (c[1] + s * (c[2] + s * c[3])); };
        };
        const NuPair nu{WeightedDensity::plain(par.h, cubic(c1)),
                        WeightedDensity::plain(par.h, cubic(c3))};
        const auto [mu1, mu2] = mu_from_nu(nu, par);
        const NuPair back = recover_nu_from_mu(mu1, mu2, par);
        for (int i = 0; i <= 20; ++i) {
            const double s = par.h * (0.02 + 0.96 * i / 20.0);
            worst = std::max(worst, std::abs(back.nu1.value(s) - nu.nu1.value(s)));
            worst = std::max(worst, std::abs(back.nu3.value(s) - nu.nu3.value(s)));
        }
    }
    section.checks.push_back(worst_case("nu_mu_roundtrip", worst, 1e-12));

    section.seconds = watch.seconds();
    return section;
}

SelftestSection selftest_volterra() {
    Stopwatch watch;
    SelftestSection section;
    section.name = "volterra";
    const double h = 1.0;

    const std::array<std::function<double(double)>, 3> monomials{
        [](double) { return 1.0; },
        [](double s) { return s; },
        [](double s) { return s * s; },
    };

    double worst_err = 0.0;
    double worst_ratio = 0.0;
    for (double p : {0.1, 0.25, 0.4}) {
        for (double lambda : {0.0, 1.0, -1.0}) {
            const Parameters par{p, lambda, h};
            for (const auto& f : monomials) {
                const auto T_true = WeightedDensity::plain(h, f);
                auto Phi = [&](double xi) { return apply_volterra_operator(T_true, par, xi); };
                auto dPhi = [&](double xi) {
                    return apply_volterra_operator_deriv(T_true, par, xi);
                };
                auto solve_error = [&](int n) {
                    const VolterraResult r = solve_volterra_first_kind(Phi, par, n, dPhi);
                    double err = 0.0;
                    for (int i = 0; i <= 32; ++i) {
                        const double s = h * (0.01 + 0.98 * i / 32.0);
                        err = std::max(err, std::abs(r.T.value(s) - T_true.value(s)));
                    }
                    return err;
                };
                const double e_coarse = solve_error(128);
                const double e_fine = solve_error(256);
                worst_err = std::max(worst_err, e_fine);
                if (e_fine > 1e-9) worst_ratio = std::max(worst_ratio, e_fine / e_coarse);
            }
        }
    }
    section.checks.push_back(worst_case("reconstruction_error", worst_err, 1e-3));
    section.checks.push_back(worst_case("refinement_ratio", worst_ratio, 0.5));

    // Weighted-moment solvability filter: the quadratic profile has moment
    // B(3, eps) = 16/15 at eps = 1/2 and must be rejected; subtracting the
    // cubic scaled by B(3, eps)/B(4, eps) zeroes the moment exactly.
    {
        const Parameters par{0.25, 0.0, h};
        const double eps = 0.5;
        const double expo = 1.0 + par.p + eps;
        auto make_data = [&](std::function<double(double)> reduced) {
            BoundaryData data;
            auto full = [reduced, expo, h](double s) {
                return s >= h ? 0.0 : reduced(s) * std::pow(h - s, expo);
            };
            data.phi1 = full;
            data.phi2 = full;
            data.phi1_reduced = reduced;
            data.phi2_reduced = reduced;
            data.dphi1_at_h = 0.0;
            data.dphi2_at_h = 0.0;
            return data;
        };
        const auto violating = make_data([](double s) { return s * s; });
        const Delta2StarConditions bad =
            check_delta2star_conditions(violating, par, eps, 128);
        const double want = 16.0 / 15.0;
        const double dev = std::abs(std::abs(bad.f1.moment.measured) - want) / want;
        section.checks.push_back(
            {"moment_violation_detected", dev, 1e-6, !bad.f1.moment.passed && dev <= 1e-6});

        const double c = beta_function(3.0, eps) / beta_function(4.0, eps);
        const auto compliant = make_data([c](double s) { return s * s - c * s * s * s; });
        const Delta2StarConditions good =
            check_delta2star_conditions(compliant, par, eps, 128);
        section.checks.push_back({"moment_compliant_accepted",
                                  std::abs(good.f1.moment.measured), good.f1.moment.tolerance,
                                  good.all_passed()});
    }

    section.seconds = watch.seconds();
    return section;
}

std::vector<SelftestSection> run_selftest() {
    return {selftest_series(), selftest_quadrature(), selftest_inversion(),
            selftest_density_algebra(), selftest_volterra()};
}

} // namespace darboux
