#include "darboux/hilbert.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "darboux/quadrature.hpp"

namespace darboux {

namespace {

constexpr double kPiSq = std::numbers::pi * std::numbers::pi;

// Shared core: the inversion formulas differ only in the half-power weight
// moved under the principal-value integral and in the weight put back in
// front. inner = phi_star reweighted by s^d0 (h-s)^dH; the result's smooth
// part is -(1/pi^2) * p.v. int inner/(y-xi) dy, evaluated through a kernel
// with the data samples precomputed once.
WeightedDensity invert_with_shift(const WeightedDensity& phi_star, double d0, double dH,
                                  double out_a0, double out_aH, double extra, int n) {
    if (n < 8) throw std::invalid_argument("hilbert inversion: need n >= 8");
    auto kernel = std::make_shared<PvKernel>(phi_star.shifted(d0, dH), n);
    auto smooth = [kernel, extra](double xi) {
        return -(kernel->eval(xi) / kPiSq + extra);
    };
    return WeightedDensity(out_a0, out_aH, phi_star.h(), smooth);
}

} // namespace

WeightedDensity invert_bounded_at_zero(const WeightedDensity& phi_star, int n) {
    return invert_with_shift(phi_star, -0.5, +0.5, +0.5, -0.5, 0.0, n);
}

WeightedDensity invert_bounded_at_zero(const std::function<double(double)>& phi_star,
                                       double h, int n) {
    return invert_bounded_at_zero(WeightedDensity::plain(h, phi_star), n);
}

WeightedDensity invert_unbounded(const WeightedDensity& phi_star, double a0, int n) {
    return invert_with_shift(phi_star, +0.5, +0.5, -0.5, -0.5, a0, n);
}

WeightedDensity invert_unbounded(const std::function<double(double)>& phi_star,
                                 double h, double a0, int n) {
    return invert_unbounded(WeightedDensity::plain(h, phi_star), a0, n);
}

WeightedDensity invert_bounded_at_h(const WeightedDensity& phi_star, int n) {
    return invert_with_shift(phi_star, +0.5, -0.5, -0.5, +0.5, 0.0, n);
}

WeightedDensity invert_bounded_at_h(const std::function<double(double)>& phi_star,
                                    double h, int n) {
    return invert_bounded_at_h(WeightedDensity::plain(h, phi_star), n);
}

IndexConsistencyReport check_index_consistency(const WeightedDensity& mu,
                                               const std::function<double(double)>& phi_star,
                                               int n_test, int rule_n) {
    if (n_test < 1) throw std::invalid_argument("check_index_consistency: need n_test >= 1");
    PvKernel forward(mu, rule_n);
    IndexConsistencyReport rep;
    rep.n_test = n_test;
    const double h = mu.h();
    for (int k = 0; k < n_test; ++k) {
        const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * n_test);
        const double xi = 0.5 * h * (1.0 - std::cos(theta));
        const double dev = std::abs(forward.eval(xi) - phi_star(xi));
        if (dev > rep.max_abs_deviation) {
            rep.max_abs_deviation = dev;
            rep.worst_point = xi;
        }
    }
    return rep;
}

} // namespace darboux
