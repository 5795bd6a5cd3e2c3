#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "darboux/representation.hpp"
#include "darboux/solvers.hpp"

namespace darboux {

// Thrown on unreadable, unparsable, or schema-violating configuration input.
// Messages name the offending field in dotted-path form.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ProblemKind { Delta2, Delta2Star, CauchyEval, InvertHilbert, Volterra, VerifyOnly };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

// A scalar function of s on [0, h], given either as a named built-in family
// with coefficients or as a sampled table.
//   zero:        identically 0
//   poly:        c0 + c1 s + c2 s^2 + ...
//   poly_decay:  (c0 + c1 s + ...) * (h - s)^(1 + p + eps)
//   table:       natural cubic spline through (nodes, values)
struct FunctionSpec {
    enum class Kind { Zero, Poly, PolyDecay, Table };
    Kind kind = Kind::Zero;
    std::vector<double> coefficients;
    double eps = 0.25;
    std::vector<double> nodes, values;
    // One-sided slope at s = h for tabulated data; required where a solver's
    // case dispatch depends on it (differentiating a spline there would be
    // too fragile to branch on).
    std::optional<double> derivative_at_h;

    bool operator==(const FunctionSpec&) const = default;
    bool is_zero() const { return kind == Kind::Zero; }
};

struct ToleranceSet {
    double pde = 1e-3;
    double boundary = 1e-4;
    double gluing = 1e-4;
    double nu_relation = 5e-2;
    double characteristic = 1e-3;
    bool operator==(const ToleranceSet&) const = default;
};

// Which derivative-limit sign relation the verification should assert.
// Auto picks by problem: continuous for delta2, occlusion for delta2star,
// none otherwise.
enum class GluingMode { Auto, None, Continuous, Occlusion };

struct ProblemConfig {
    ProblemKind problem = ProblemKind::VerifyOnly;
    Parameters parameters{};
    bool manufactured = false;
    double eps = 0.25;  // decay class of the data, used by delta2star
    double a0 = 0.0;    // free constant of the unbounded inversion class
    int grid = 128;
    int quad_n = 32;
    int residual_grid = 8;
    double fd_step = 0.0;  // 0 selects h/512
    int solution_samples = 17;
    bool run_verification = true;
    GluingMode gluing = GluingMode::Auto;
    ToleranceSet tolerances;

    // Operands; which ones are read depends on the problem.
    FunctionSpec phi1, phi2;  // boundary data
    std::optional<double> dphi1_at_h, dphi2_at_h;
    FunctionSpec phi1_star, phi2_star;          // delta2 inversion data
    FunctionSpec T_upper, T_lower;              // injected delta2 / cauchy_eval densities
    FunctionSpec nu_upper, nu_lower;            // cauchy_eval / verify_only densities
    FunctionSpec Phi1, Phi2;                    // delta2star right-hand sides
    FunctionSpec operand;                       // invert_hilbert / volterra input
    std::string inversion_case = "unbounded";   // bounded_at_zero | unbounded | bounded_at_h
    std::string output_dir = "out";

    bool operator==(const ProblemConfig&) const = default;
};

// JSON round trip. Parsing rejects unknown keys and wrong types with dotted
// field paths; serialization is canonical (all fields, fixed order), so
// parse(serialize(c)) == c for every valid config.
ProblemConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ProblemConfig& cfg);
ProblemConfig load_config(const std::string& path);

// Field-by-field semantic validation; empty result means usable. Includes the
// solvable-case restriction: problem delta2 requires lambda = 0.
std::vector<std::string> validate_config(const ProblemConfig& cfg);

// Materializations of a FunctionSpec on [0, h].
std::function<double(double)> build_function(const FunctionSpec& spec, const Parameters& par);
std::function<double(double)> build_function_derivative(const FunctionSpec& spec,
                                                        const Parameters& par);
std::function<double(double)> build_function_second_derivative(const FunctionSpec& spec,
                                                               const Parameters& par);
WeightedDensity build_density(const FunctionSpec& spec, const Parameters& par);

// Boundary data from the config's phi specs: values, analytic derivatives,
// endpoint-slope pins (explicit config pins win over spec-derived ones), and
// the reduced factorization for poly_decay data.
BoundaryData build_boundary_data(const ProblemConfig& cfg);

} // namespace darboux
