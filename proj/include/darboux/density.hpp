#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace darboux {

// Piecewise-linear samples on a uniform grid over [0, h]. Used for densities
// produced by marching solvers, where the kink locations matter to quadrature.
class GridFunction {
public:
    GridFunction(double h, std::vector<double> values)
        : h_(h), values_(std::move(values)) {
        if (h_ <= 0.0) throw std::invalid_argument("GridFunction: h must be positive");
        if (values_.size() < 2) throw std::invalid_argument("GridFunction: need at least 2 samples");
    }

    double h() const { return h_; }
    std::size_t panels() const { return values_.size() - 1; }
    double node(std::size_t i) const { return h_ * static_cast<double>(i) / static_cast<double>(panels()); }
    const std::vector<double>& values() const { return values_; }

    double operator()(double s) const {
        const double n = static_cast<double>(panels());
        double t = s / h_ * n;
        if (t <= 0.0) return values_.front();
        if (t >= n) return values_.back();
        const auto i = static_cast<std::size_t>(t);
        const double frac = t - static_cast<double>(i);
        return values_[i] * (1.0 - frac) + values_[i + 1] * frac;
    }

private:
    double h_;
    std::vector<double> values_;
};

// A function on (0, h) of the form s^alpha0 * (h-s)^alphaH * smooth_part(s).
// The endpoint exponents are carried symbolically so operators can re-weight
// without evaluating powers near the endpoints. Integrability requires both
// exponents > -1.
class WeightedDensity {
public:
    WeightedDensity(double alpha0, double alphaH, double h,
                    std::function<double(double)> smooth_part)
        : alpha0_(alpha0), alphaH_(alphaH), h_(h), smooth_(std::move(smooth_part)) {
        validate();
    }

    static WeightedDensity plain(double h, std::function<double(double)> f) {
        return WeightedDensity(0.0, 0.0, h, std::move(f));
    }

    static WeightedDensity zero(double h) {
        return WeightedDensity(0.0, 0.0, h, [](double) { return 0.0; });
    }

    static WeightedDensity constant(double h, double c) {
        return WeightedDensity(0.0, 0.0, h, [c](double) { return c; });
    }

    // Wraps grid samples as a plain density and remembers the grid so that
    // quadrature can split integrals at the kinks.
    static WeightedDensity from_grid(std::shared_ptr<const GridFunction> g,
                                     double alpha0 = 0.0, double alphaH = 0.0) {
        WeightedDensity d(alpha0, alphaH, g->h(), [g](double s) { return (*g)(s); });
        d.grid_ = std::move(g);
        return d;
    }

    double alpha0() const { return alpha0_; }
    double alphaH() const { return alphaH_; }
    double h() const { return h_; }
    const std::function<double(double)>& smooth_part() const { return smooth_; }
    const std::shared_ptr<const GridFunction>& grid_hint() const { return grid_; }

    double smooth_at(double s) const { return smooth_(s); }

    // Full value s^alpha0 (h-s)^alphaH smooth(s). Unbounded exponents make this
    // blow up toward the endpoints; callers needing endpoint limits should work
    // with smooth_at and the exponents instead.
    double value(double s) const {
        double w = 1.0;
        if (alpha0_ != 0.0) w *= std::pow(s, alpha0_);
        if (alphaH_ != 0.0) w *= std::pow(h_ - s, alphaH_);
        return w * smooth_(s);
    }

    double operator()(double s) const { return value(s); }

    // Multiplies by s^d0 (h-s)^dH symbolically.
    WeightedDensity shifted(double d0, double dH) const {
        WeightedDensity d(alpha0_ + d0, alphaH_ + dH, h_, smooth_);
        d.grid_ = grid_;
        return d;
    }

    WeightedDensity scaled(double c) const {
        auto f = smooth_;
        WeightedDensity d(alpha0_, alphaH_, h_, [f, c](double s) { return c * f(s); });
        d.grid_ = grid_;
        return d;
    }

    WeightedDensity with_grid_hint(std::shared_ptr<const GridFunction> g) const {
        WeightedDensity d(*this);
        d.grid_ = std::move(g);
        return d;
    }

private:
    void validate() const {
        if (h_ <= 0.0) throw std::invalid_argument("WeightedDensity: h must be positive");
        if (!(alpha0_ > -1.0) || !(alphaH_ > -1.0))
            throw std::invalid_argument("WeightedDensity: endpoint exponents must be > -1 for integrability");
        if (!smooth_) throw std::invalid_argument("WeightedDensity: smooth part must be callable");
    }

    double alpha0_;
    double alphaH_;
    double h_;
    std::function<double(double)> smooth_;
    std::shared_ptr<const GridFunction> grid_;
};

// ca*A + cb*B as a single density. The result carries the weaker (smaller)
// exponent at each endpoint; the surplus powers fold into the smooth part,
// which keeps them nonnegative and finite on [0, h].
inline WeightedDensity weighted_combine(const WeightedDensity& a, const WeightedDensity& b,
                                        double ca, double cb) {
    if (std::abs(a.h() - b.h()) > 1e-12 * a.h())
        throw std::invalid_argument("weighted_combine: interval mismatch");
    const double h = a.h();
    const double a0 = std::min(a.alpha0(), b.alpha0());
    const double aH = std::min(a.alphaH(), b.alphaH());
    const double da0 = a.alpha0() - a0, daH = a.alphaH() - aH;
    const double db0 = b.alpha0() - a0, dbH = b.alphaH() - aH;
    auto fa = a.smooth_part();
    auto fb = b.smooth_part();
    auto smooth = [=](double s) {
        double va = ca * fa(s);
        if (da0 != 0.0) va *= std::pow(s, da0);
        if (daH != 0.0) va *= std::pow(h - s, daH);
        double vb = cb * fb(s);
        if (db0 != 0.0) vb *= std::pow(s, db0);
        if (dbH != 0.0) vb *= std::pow(h - s, dbH);
        return va + vb;
    };
    WeightedDensity out(a0, aH, h, smooth);
    if (a.grid_hint()) return out.with_grid_hint(a.grid_hint());
    if (b.grid_hint()) return out.with_grid_hint(b.grid_hint());
    return out;
}

} // namespace darboux
