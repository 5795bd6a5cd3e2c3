#pragma once

#include <functional>
#include <optional>

#include "darboux/density.hpp"

namespace darboux {

// Endpoint-behavior class of a solution of the dominant Cauchy-kernel
// equation. The free constant accompanies only the class that is unbounded at
// both endpoints, where the operator has a one-dimensional kernel.
struct InversionCase {
    enum class Tag { BoundedAtZero, UnboundedBoth, BoundedAtH };
    Tag tag = Tag::UnboundedBoth;
    std::optional<double> a0;

    static InversionCase bounded_at_zero() { return {Tag::BoundedAtZero, std::nullopt}; }
    static InversionCase unbounded(double a0) { return {Tag::UnboundedBoth, a0}; }
    static InversionCase bounded_at_h() { return {Tag::BoundedAtH, std::nullopt}; }
};

// Solutions mu of  p.v. int_0^h mu(s)/(s-xi) ds = phi_star(xi)  in the three
// endpoint classes. Each returns a WeightedDensity whose smooth part holds a
// precomputed principal-value kernel, so pointwise evaluation costs O(n).
//
// Class bounded at zero: mu vanishes like sqrt(xi) at 0 and grows like
// (h-xi)^(-1/2) at h; result exponents (+1/2, -1/2).
WeightedDensity invert_bounded_at_zero(const WeightedDensity& phi_star, int n);
WeightedDensity invert_bounded_at_zero(const std::function<double(double)>& phi_star,
                                       double h, int n);

// Class unbounded at both endpoints; result exponents (-1/2, -1/2). The a0
// term adds the kernel element -a0/sqrt(xi(h-xi)), which the forward operator
// annihilates; it must be chosen by an external condition.
WeightedDensity invert_unbounded(const WeightedDensity& phi_star, double a0, int n);
WeightedDensity invert_unbounded(const std::function<double(double)>& phi_star,
                                 double h, double a0, int n);

// Class bounded at h; result exponents (-1/2, +1/2). Solvable only for data
// orthogonal to the complementary class; callers should confirm with
// check_index_consistency.
WeightedDensity invert_bounded_at_h(const WeightedDensity& phi_star, int n);
WeightedDensity invert_bounded_at_h(const std::function<double(double)>& phi_star,
                                    double h, int n);

struct IndexConsistencyReport {
    int n_test = 0;
    double max_abs_deviation = 0.0;
    double worst_point = 0.0;
};

// Re-applies the forward Cauchy-kernel operator to mu at n_test
// Chebyshev-distributed interior points and reports the worst deviation from
// phi_star. A large deviation flags an index class inconsistent with the data.
IndexConsistencyReport check_index_consistency(const WeightedDensity& mu,
                                               const std::function<double(double)>& phi_star,
                                               int n_test, int rule_n = 256);

} // namespace darboux
