#include "darboux/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace darboux {

namespace {

bool is_nonpositive_integer(double a) {
    if (a > 0.0) return false;
    const double r = std::round(a);
    return std::abs(a - r) < 1e-300 || std::abs(a - r) <= 1e-12 * std::max(1.0, std::abs(a));
}

} // namespace

double pochhammer(double a, int n) {
    if (n < 0) throw std::invalid_argument("pochhammer: n must be nonnegative");
    double prod = 1.0;
    for (int k = 0; k < n; ++k) {
        prod *= a + static_cast<double>(k);
        if (!std::isfinite(prod))
            throw std::overflow_error("pochhammer: product exceeds representable range");
    }
    return prod;
}

SeriesResult hyp0f1(double a, double z, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("hyp0f1: tol must be positive");
    if (is_nonpositive_integer(a))
        throw std::invalid_argument("hyp0f1: a = " + std::to_string(a) +
                                    " is a pole (zero or negative integer)");
    if (!std::isfinite(a) || !std::isfinite(z))
        throw std::invalid_argument("hyp0f1: arguments must be finite");

    SeriesResult r;
    if (z == 0.0) {
        r.value = 1.0;
        r.terms_used = 1;
        r.truncation_bound = 0.0;
        return r;
    }

    constexpr int kMaxTerms = 500;
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n < kMaxTerms; ++n) {
        const double denom = (a + static_cast<double>(n)) * (static_cast<double>(n) + 1.0);
        term *= z / denom;
        sum += term;
        r.terms_used = n + 2;

        // Tail bound: once the term-ratio magnitude is below 1/2 and a+n has
        // gone positive, the remaining terms are dominated by a geometric
        // series with the next ratio.
        const double next_denom = (a + static_cast<double>(n) + 1.0) * (static_cast<double>(n) + 2.0);
        if (a + static_cast<double>(n) + 1.0 > 0.0 && next_denom > 0.0) {
            const double ratio = std::abs(z) / next_denom;
            if (ratio < 0.5) {
                const double tail = std::abs(term) * ratio / (1.0 - ratio);
                if (tail <= tol) {
                    r.value = sum;
                    r.truncation_bound = tail;
                    return r;
                }
            }
        }
        if (!std::isfinite(sum))
            throw std::overflow_error("hyp0f1: series overflow, |z| too large");
    }
    throw std::runtime_error("hyp0f1: series did not converge to tol within 500 terms");
}

double hyp0f1_dz(double a, double z, double tol) {
    return hyp0f1(a + 1.0, z, tol).value / a;
}

double log_beta(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("log_beta: arguments must be positive");
    return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
}

double beta_function(double x, double y) {
    return std::exp(log_beta(x, y));
}

} // namespace darboux
