#include "darboux/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

#include "darboux/specfun.hpp"

namespace darboux {

namespace {

// Jacobi polynomial P_n^(alpha,beta)(x) on [-1,1] by the three-term
// recurrence; returns (P_n, P_{n-1}).
std::pair<double, double> jacobi_poly(int n, double alpha, double beta, double x) {
    if (n == 0) return {1.0, 0.0};
    double pm1 = 1.0;
    double p = 0.5 * ((alpha + beta + 2.0) * x + (alpha - beta));
    for (int k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double ab = alpha + beta;
        const double c1 = 2.0 * kk * (kk + ab) * (2.0 * kk + ab - 2.0);
        const double c2 = (2.0 * kk + ab - 1.0) * ((2.0 * kk + ab) * (2.0 * kk + ab - 2.0) * x + alpha * alpha - beta * beta);
        const double c3 = 2.0 * (kk + alpha - 1.0) * (kk + beta - 1.0) * (2.0 * kk + ab);
        const double pnext = (c2 * p - c3 * pm1) / c1;
        pm1 = p;
        p = pnext;
    }
    return {p, pm1};
}

double jacobi_deriv(int n, double alpha, double beta, double x, double pn, double pnm1) {
    const double nn = static_cast<double>(n);
    const double ab = alpha + beta;
    // (2n+a+b)(1-x^2) P_n' = n(a-b-(2n+a+b)x) P_n + 2(n+a)(n+b) P_{n-1}
    return (nn * (alpha - beta - (2.0 * nn + ab) * x) * pn + 2.0 * (nn + alpha) * (nn + beta) * pnm1)
           / ((2.0 * nn + ab) * (1.0 - x * x));
}

struct StandardRule {
    std::vector<double> x; // ascending in (-1, 1)
    std::vector<double> w;
};

StandardRule build_standard(int n, double alpha, double beta) {
    StandardRule out;
    if (n == 1) {
        // single node at the weight's centroid
        const double ab = alpha + beta;
        const double x0 = (beta - alpha) / (ab + 2.0);
        const double w0 = std::pow(2.0, ab + 1.0) * beta_function(beta + 1.0, alpha + 1.0);
        out.x = {x0};
        out.w = {w0};
        return out;
    }

    auto sign_at = [&](double x) { return jacobi_poly(n, alpha, beta, x).first; };

    std::vector<std::pair<double, double>> brackets;
    for (int mult = 8; mult <= 64; mult *= 2) {
        brackets.clear();
        const int m = mult * n;
        double prev_x = std::cos(std::numbers::pi * (1.0 - 0.5 / m));
        double prev_v = sign_at(prev_x);
        for (int j = 1; j < m; ++j) {
            const double theta = std::numbers::pi * (1.0 - (j + 0.5) / m);
            const double x = std::cos(theta);
            const double v = sign_at(x);
            if ((prev_v < 0.0) != (v < 0.0)) brackets.emplace_back(prev_x, x);
            prev_x = x;
            prev_v = v;
        }
        if (static_cast<int>(brackets.size()) == n) break;
    }
    if (static_cast<int>(brackets.size()) != n)
        throw std::runtime_error("jacobi_rule: node bracketing found " +
                                 std::to_string(brackets.size()) + " roots, expected " +
                                 std::to_string(n));

    out.x.resize(n);
    out.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double lo = brackets[i].first;
        double hi = brackets[i].second;
        double flo = sign_at(lo);
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = sign_at(mid);
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 4; ++it) {
            const auto [pn, pnm1] = jacobi_poly(n, alpha, beta, x);
            const double dp = jacobi_deriv(n, alpha, beta, x, pn, pnm1);
            const double step = pn / dp;
            const double xn = x - step;
            if (xn > lo && xn < hi) x = xn; else break;
            if (std::abs(step) < 1e-16) break;
        }
        const auto [pn, pnm1] = jacobi_poly(n, alpha, beta, x);
        const double dp = jacobi_deriv(n, alpha, beta, x, pn, pnm1);
        const double nn = static_cast<double>(n);
        const double ab = alpha + beta;
        const double lg = std::lgamma(nn + alpha) + std::lgamma(nn + beta)
                        - std::lgamma(nn + 1.0) - std::lgamma(nn + ab + 1.0);
        out.x[i] = x;
        out.w[i] = std::exp(lg) * (2.0 * nn + ab) * std::pow(2.0, ab) / (dp * pnm1);
    }

    // Weight-formula validation: positivity and the total weight identity.
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!(out.w[i] > 0.0))
            throw std::runtime_error("jacobi_rule: nonpositive weight, node solve failed");
        total += out.w[i];
    }
    const double expect = std::pow(2.0, alpha + beta + 1.0) * beta_function(beta + 1.0, alpha + 1.0);
    if (std::abs(total - expect) > 1e-12 * expect)
        throw std::runtime_error("jacobi_rule: weight sum off by " +
                                 std::to_string(std::abs(total - expect) / expect));
    return out;
}

struct RuleKey {
    int n;
    std::int64_t a_bits;
    std::int64_t b_bits;
    bool operator<(const RuleKey& o) const {
        return std::tie(n, a_bits, b_bits) < std::tie(o.n, o.a_bits, o.b_bits);
    }
};

std::int64_t bits_of(double x) {
    std::int64_t r;
    static_assert(sizeof(r) == sizeof(x));
    std::memcpy(&r, &x, sizeof(r));
    return r;
}

const StandardRule& cached_standard(int n, double alpha, double beta) {
    static std::mutex mtx;
    static std::map<RuleKey, std::unique_ptr<StandardRule>> cache;
    const RuleKey key{n, bits_of(alpha), bits_of(beta)};
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return *it->second;
    }
    auto rule = std::make_unique<StandardRule>(build_standard(n, alpha, beta));
    std::lock_guard<std::mutex> lock(mtx);
    auto [it, inserted] = cache.try_emplace(key, std::move(rule));
    return *it->second;
}

void check_rule_args(int n, double alpha, double beta, double h) {
    if (n < 1) throw std::invalid_argument("jacobi_rule: n must be >= 1");
    if (!(alpha > -1.0) || !(beta > -1.0))
        throw std::invalid_argument("jacobi_rule: exponents must be > -1");
    if (!(h > 0.0)) throw std::invalid_argument("jacobi_rule: h must be positive");
}

} // namespace

JacobiRule jacobi_rule(int n, double alpha, double beta, double h) {
    check_rule_args(n, alpha, beta, h);
    const StandardRule& std_rule = cached_standard(n, alpha, beta);
    JacobiRule out;
    out.n = n;
    out.alpha = alpha;
    out.beta = beta;
    out.h = h;
    out.nodes.resize(n);
    out.weights.resize(n);
    const double scale = std::pow(0.5 * h, alpha + beta + 1.0);
    for (int i = 0; i < n; ++i) {
        out.nodes[i] = 0.5 * h * (1.0 + std_rule.x[i]);
        out.weights[i] = scale * std_rule.w[i];
    }
    return out;
}

double integrate_weighted(const WeightedDensity& f, const JacobiRule& rule) {
    if (std::abs(rule.beta - f.alpha0()) > 1e-12 || std::abs(rule.alpha - f.alphaH()) > 1e-12)
        throw std::invalid_argument("integrate_weighted: rule exponents do not match density");
    if (std::abs(rule.h - f.h()) > 1e-12 * rule.h)
        throw std::invalid_argument("integrate_weighted: interval mismatch");
    double sum = 0.0;
    for (int i = 0; i < rule.n; ++i) sum += rule.weights[i] * f.smooth_at(rule.nodes[i]);
    return sum;
}

double integrate_interval(double a, double b, double alpha_at_b, double beta_at_a,
                          int n, const std::function<double(double)>& smooth) {
    if (!(b > a)) {
        if (b == a) return 0.0;
        throw std::invalid_argument("integrate_interval: need a <= b");
    }
    const StandardRule& std_rule = cached_standard(n, alpha_at_b, beta_at_a);
    const double half = 0.5 * (b - a);
    const double scale = std::pow(half, alpha_at_b + beta_at_a + 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < std_rule.x.size(); ++i) {
        const double s = a + half * (1.0 + std_rule.x[i]);
        sum += std_rule.w[i] * smooth(s);
    }
    return scale * sum;
}

double integrate_panels(double a, double b, double alpha_at_b, double beta_at_a,
                        const std::vector<double>& interior_breaks, int n_per_panel,
                        const std::function<double(double)>& smooth) {
    if (!(b > a)) {
        if (b == a) return 0.0;
        throw std::invalid_argument("integrate_panels: need a <= b");
    }
    std::vector<double> pts;
    pts.push_back(a);
    for (double t : interior_breaks)
        if (t > a && t < b) pts.push_back(t);
    pts.push_back(b);

    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double lo = pts[k];
        const double hi = pts[k + 1];
        const bool first = (k == 0);
        const bool last = (k + 2 == pts.size());
        const double beta_panel = first ? beta_at_a : 0.0;
        const double alpha_panel = last ? alpha_at_b : 0.0;
        auto f = [&](double s) {
            double v = smooth(s);
            if (!first && beta_at_a != 0.0) v *= std::pow(s - a, beta_at_a);
            if (!last && alpha_at_b != 0.0) v *= std::pow(b - s, alpha_at_b);
            return v;
        };
        total += integrate_interval(lo, hi, alpha_panel, beta_panel, n_per_panel, f);
    }
    return total;
}

namespace {

// Fixed double-exponential rule on [a, b] for integrable endpoint behavior.
double tanh_sinh_integral(double a, double b, const std::function<double(double)>& f) {
    constexpr double t_max = 3.4;
    constexpr int half_points = 120;
    const double dt = t_max / half_points;
    const double c = 0.5 * (a + b);
    const double r = 0.5 * (b - a);
    double sum = 0.0;
    for (int j = -half_points; j <= half_points; ++j) {
        const double t = j * dt;
        const double sh = 0.5 * std::numbers::pi * std::sinh(t);
        const double x = std::tanh(sh);
        const double ch = std::cosh(sh);
        const double w = 0.5 * std::numbers::pi * std::cosh(t) / (ch * ch);
        const double s = c + r * x;
        if (s <= a || s >= b) continue;
        sum += w * f(s);
    }
    return sum * r * dt;
}

bool near(double x, double y) { return std::abs(x - y) < 1e-13; }

} // namespace

double pv_weight_transform(double a0, double aH, double h, double xi) {
    if (!(xi > 0.0) || !(xi < h))
        throw std::invalid_argument("pv_weight_transform: xi must lie in (0, h)");
    const double pi = std::numbers::pi;
    if (near(a0, 0.0) && near(aH, 0.0)) return std::log((h - xi) / xi);
    if (near(a0, -0.5) && near(aH, -0.5)) return 0.0;
    if (near(a0, 0.5) && near(aH, 0.5)) return pi * (0.5 * h - xi);
    if (near(a0, 0.5) && near(aH, -0.5)) return pi;
    if (near(a0, -0.5) && near(aH, 0.5)) return -pi;

    // General exponents: subtract the weight value at xi and integrate the
    // difference quotient with a double-exponential rule on each side.
    auto w = [&](double s) { return std::pow(s, a0) * std::pow(h - s, aH); };
    const double wxi = w(xi);
    const double d1 = a0 / xi - aH / (h - xi);
    const double wp = wxi * d1;
    const double wpp = wxi * (d1 * d1 - a0 / (xi * xi) - aH / ((h - xi) * (h - xi)));
    auto f = [&](double s) {
        if (std::abs(s - xi) < 1e-5 * h) return wp + 0.5 * wpp * (s - xi);
        return (w(s) - wxi) / (s - xi);
    };
    return tanh_sinh_integral(0.0, xi, f) + tanh_sinh_integral(xi, h, f)
         + wxi * std::log((h - xi) / xi);
}

namespace {

double pv_with_rule(const WeightedDensity& mu, double xi, const JacobiRule& rule) {
    const auto& g = mu.smooth_part();
    const double gxi = g(xi);
    double sum = 0.0;
    for (int i = 0; i < rule.n; ++i)
        sum += rule.weights[i] * (g(rule.nodes[i]) - gxi) / (rule.nodes[i] - xi);
    return sum + gxi * pv_weight_transform(mu.alpha0(), mu.alphaH(), mu.h(), xi);
}

double min_node_distance(const JacobiRule& rule, double xi) {
    double d = rule.h;
    for (double s : rule.nodes) d = std::min(d, std::abs(s - xi));
    return d;
}

} // namespace

double pv_hilbert(const WeightedDensity& mu, double xi, int rule_n) {
    const double h = mu.h();
    if (!(xi > 0.0) || !(xi < h))
        throw std::invalid_argument("pv_hilbert: xi must lie in (0, h)");
    JacobiRule rule = jacobi_rule(rule_n, mu.alphaH(), mu.alpha0(), h);
    if (min_node_distance(rule, xi) < 1e-7 * h) {
        rule = jacobi_rule(rule_n + 1, mu.alphaH(), mu.alpha0(), h);
        if (min_node_distance(rule, xi) < 1e-7 * h)
            rule = jacobi_rule(rule_n + 3, mu.alphaH(), mu.alpha0(), h);
    }
    return pv_with_rule(mu, xi, rule);
}

PvKernel::PvKernel(const WeightedDensity& mu, int rule_n)
    : rule_(jacobi_rule(rule_n, mu.alphaH(), mu.alpha0(), mu.h())),
      alpha0_(mu.alpha0()), alphaH_(mu.alphaH()), h_(mu.h()), g_(mu.smooth_part()) {
    gvals_.resize(rule_.nodes.size());
    for (std::size_t i = 0; i < gvals_.size(); ++i) gvals_[i] = g_(rule_.nodes[i]);
}

double PvKernel::eval(double xi) const {
    if (!(xi > 0.0) || !(xi < h_))
        throw std::invalid_argument("PvKernel::eval: xi must lie in (0, h)");
    const double gxi = g_(xi);
    const double collide = 1e-7 * h_;
    double sum = 0.0;
    for (std::size_t i = 0; i < gvals_.size(); ++i) {
        const double ds = rule_.nodes[i] - xi;
        if (std::abs(ds) < collide) {
            // derivative limit of the subtracted term at a node collision
            const double step = 1e-6 * h_;
            const double gp = (g_(rule_.nodes[i] + step) - g_(rule_.nodes[i] - step)) / (2.0 * step);
            sum += rule_.weights[i] * gp;
        } else {
            sum += rule_.weights[i] * (gvals_[i] - gxi) / ds;
        }
    }
    return sum + gxi * pv_weight_transform(alpha0_, alphaH_, h_, xi);
}

} // namespace darboux
