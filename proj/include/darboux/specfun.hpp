#pragma once

#include <cstdint>

namespace darboux {

struct SeriesResult {
    double value = 0.0;
    int terms_used = 1;
    double truncation_bound = 0.0;
};

// Rising factorial a(a+1)...(a+n-1); 1 for n = 0. Throws on overflow.
double pochhammer(double a, int n);

// Confluent-limit hypergeometric function 0F1(a; z) by direct series with a
// rigorous geometric tail bound. Requires a not in {0, -1, -2, ...} and
// tol > 0. Throws if the series cannot meet tol within the iteration cap.
SeriesResult hyp0f1(double a, double z, double tol = 1e-14);

// d/dz 0F1(a; z) = 0F1(a+1; z) / a.
double hyp0f1_dz(double a, double z, double tol = 1e-14);

// log Beta(x, y) and Beta(x, y) for positive arguments.
double log_beta(double x, double y);
double beta_function(double x, double y);

} // namespace darboux
