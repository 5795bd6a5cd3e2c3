#include "darboux/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace darboux {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config." + path + ": " + what);
}

void check_keys(const Json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                known = true;
                break;
            }
        if (!known) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
}

const Json* find(const Json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double as_number(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int as_integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

bool as_boolean(const Json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

std::string as_string(const Json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> as_number_list(const Json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

FunctionSpec::Kind spec_kind_from_string(const std::string& name, const std::string& path) {
    if (name == "zero") return FunctionSpec::Kind::Zero;
    if (name == "poly") return FunctionSpec::Kind::Poly;
    if (name == "poly_decay") return FunctionSpec::Kind::PolyDecay;
    if (name == "table") return FunctionSpec::Kind::Table;
    fail(path, "unknown kind '" + name + "' (expected zero, poly, poly_decay, or table)");
}

const char* spec_kind_name(FunctionSpec::Kind kind) {
    switch (kind) {
        case FunctionSpec::Kind::Zero: return "zero";
        case FunctionSpec::Kind::Poly: return "poly";
        case FunctionSpec::Kind::PolyDecay: return "poly_decay";
        case FunctionSpec::Kind::Table: return "table";
    }
    return "zero";
}

FunctionSpec parse_spec(const Json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object with a 'kind' field");
    check_keys(j, path, {"kind", "coefficients", "eps", "nodes", "values", "derivative_at_h"});
    FunctionSpec spec;
    const Json* kind = find(j, "kind");
    if (!kind) fail(path + ".kind", "missing");
    spec.kind = spec_kind_from_string(as_string(*kind, path + ".kind"), path + ".kind");
    if (const Json* c = find(j, "coefficients"))
        spec.coefficients = as_number_list(*c, path + ".coefficients");
    if (const Json* e = find(j, "eps")) spec.eps = as_number(*e, path + ".eps");
    if (const Json* n = find(j, "nodes")) spec.nodes = as_number_list(*n, path + ".nodes");
    if (const Json* v = find(j, "values")) spec.values = as_number_list(*v, path + ".values");
    if (const Json* d = find(j, "derivative_at_h"))
        spec.derivative_at_h = as_number(*d, path + ".derivative_at_h");
    return spec;
}

Json serialize_spec(const FunctionSpec& spec) {
    Json j;
    j["kind"] = spec_kind_name(spec.kind);
    j["coefficients"] = spec.coefficients;
    j["eps"] = spec.eps;
    j["nodes"] = spec.nodes;
    j["values"] = spec.values;
    if (spec.derivative_at_h) j["derivative_at_h"] = *spec.derivative_at_h;
    return j;
}

GluingMode gluing_from_string(const std::string& name, const std::string& path) {
    if (name == "auto") return GluingMode::Auto;
    if (name == "none") return GluingMode::None;
    if (name == "continuous") return GluingMode::Continuous;
    if (name == "occlusion") return GluingMode::Occlusion;
    fail(path, "unknown gluing mode '" + name +
                   "' (expected auto, none, continuous, or occlusion)");
}

const char* gluing_name(GluingMode mode) {
    switch (mode) {
        case GluingMode::Auto: return "auto";
        case GluingMode::None: return "none";
        case GluingMode::Continuous: return "continuous";
        case GluingMode::Occlusion: return "occlusion";
    }
    return "auto";
}

// Natural cubic spline through strictly increasing nodes; linear for two
// points. Queries outside the node range are clamped to the end nodes.
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
        const std::size_t n = x_.size();
        if (n < 2) throw ConfigError("table spline needs at least two nodes");
        if (n == 2) return;
        std::vector<double> diag(n, 2.0), rhs(n, 0.0), sub(n, 0.0), sup(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
            sub[i] = hl / (hl + hr);
            sup[i] = hr / (hl + hr);
            rhs[i] = 6.0 / (hl + hr) *
                     ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
        }
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = (rhs[i] - sup[i] * (i + 2 < n ? m_[i + 1] : 0.0)) / diag[i];
            if (i == 1) break;
        }
    }

    double value(double s) const {
        const auto [i, t, hseg] = locate(s);
        const double a = (x_[i + 1] - t) / hseg, b = (t - x_[i]) / hseg;
        return a * y_[i] + b * y_[i + 1] +
               ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * hseg * hseg / 6.0;
    }

    double derivative(double s) const {
        const auto [i, t, hseg] = locate(s);
        const double a = (x_[i + 1] - t) / hseg, b = (t - x_[i]) / hseg;
        return (y_[i + 1] - y_[i]) / hseg +
               hseg / 6.0 * ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]);
    }

    double second_derivative(double s) const {
        const auto [i, t, hseg] = locate(s);
        const double a = (x_[i + 1] - t) / hseg, b = (t - x_[i]) / hseg;
        return a * m_[i] + b * m_[i + 1];
    }

private:
    struct Segment {
        std::size_t i;
        double t;
        double hseg;
    };
    Segment locate(double s) const {
        const double t = std::clamp(s, x_.front(), x_.back());
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t i = (it == x_.begin()) ? 0 : std::size_t(it - x_.begin()) - 1;
        i = std::min(i, x_.size() - 2);
        return {i, t, x_[i + 1] - x_[i]};
    }

    std::vector<double> x_, y_, m_;
};

double horner(const std::vector<double>& c, double s) {
    double v = 0.0;
    for (std::size_t i = c.size(); i > 0; --i) v = v * s + c[i - 1];
    return v;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t i = 1; i < c.size(); ++i) d.push_back(double(i) * c[i]);
    return d;
}

double decay_exponent(const FunctionSpec& spec, const Parameters& par) {
    return 1.0 + par.p + spec.eps;
}

std::shared_ptr<const CubicSpline> make_spline(const FunctionSpec& spec) {
    return std::make_shared<CubicSpline>(spec.nodes, spec.values);
}

void validate_spec(const FunctionSpec& spec, const std::string& path, const Parameters& par,
                   std::vector<std::string>& out) {
    auto finite_all = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    switch (spec.kind) {
        case FunctionSpec::Kind::Zero:
            break;
        case FunctionSpec::Kind::Poly:
            if (!finite_all(spec.coefficients))
                out.push_back(path + ".coefficients: must be finite");
            break;
        case FunctionSpec::Kind::PolyDecay:
            if (!finite_all(spec.coefficients))
                out.push_back(path + ".coefficients: must be finite");
            if (!(spec.eps > 0.0)) out.push_back(path + ".eps: must be positive");
            break;
        case FunctionSpec::Kind::Table: {
            if (spec.nodes.size() != spec.values.size())
                out.push_back(path + ": nodes and values must have equal length");
            if (spec.nodes.size() < 2)
                out.push_back(path + ".nodes: need at least two samples");
            if (!finite_all(spec.nodes) || !finite_all(spec.values))
                out.push_back(path + ": samples must be finite");
            for (std::size_t i = 0; i + 1 < spec.nodes.size(); ++i)
                if (!(spec.nodes[i] < spec.nodes[i + 1])) {
                    out.push_back(path + ".nodes: must be strictly increasing");
                    break;
                }
            if (!spec.nodes.empty() &&
                (spec.nodes.front() < -1e-12 * par.h || spec.nodes.back() > par.h * (1.0 + 1e-12)))
                out.push_back(path + ".nodes: must lie within [0, h]");
            break;
        }
    }
}

} // namespace

std::string to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::Delta2: return "delta2";
        case ProblemKind::Delta2Star: return "delta2star";
        case ProblemKind::CauchyEval: return "cauchy_eval";
        case ProblemKind::InvertHilbert: return "invert_hilbert";
        case ProblemKind::Volterra: return "volterra";
        case ProblemKind::VerifyOnly: return "verify_only";
    }
    return "verify_only";
}

ProblemKind problem_kind_from_string(const std::string& name) {
    if (name == "delta2") return ProblemKind::Delta2;
    if (name == "delta2star") return ProblemKind::Delta2Star;
    if (name == "cauchy_eval") return ProblemKind::CauchyEval;
    if (name == "invert_hilbert") return ProblemKind::InvertHilbert;
    if (name == "volterra") return ProblemKind::Volterra;
    if (name == "verify_only") return ProblemKind::VerifyOnly;
    fail("problem", "unknown problem '" + name +
                        "' (expected delta2, delta2star, cauchy_eval, invert_hilbert, "
                        "volterra, or verify_only)");
}

ProblemConfig config_from_json_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(j, "",
               {"problem", "parameters", "mode", "eps", "a0", "grid", "quad_n",
                "residual_grid", "fd_step", "solution_samples", "verify", "gluing",
                "tolerances", "data", "phi_star", "densities", "volterra_data", "operand",
                "inversion_case", "output_dir"});

    ProblemConfig cfg;
    const Json* problem = find(j, "problem");
    if (!problem) fail("problem", "missing");
    cfg.problem = problem_kind_from_string(as_string(*problem, "problem"));

    if (const Json* par = find(j, "parameters")) {
        if (!par->is_object()) fail("parameters", "expected an object");
        check_keys(*par, "parameters", {"p", "lambda", "h"});
        if (const Json* v = find(*par, "p")) cfg.parameters.p = as_number(*v, "parameters.p");
        if (const Json* v = find(*par, "lambda"))
            cfg.parameters.lambda = as_number(*v, "parameters.lambda");
        if (const Json* v = find(*par, "h")) cfg.parameters.h = as_number(*v, "parameters.h");
    }

    if (const Json* v = find(j, "mode")) {
        const std::string mode = as_string(*v, "mode");
        if (mode == "manufactured")
            cfg.manufactured = true;
        else if (mode == "explicit")
            cfg.manufactured = false;
        else
            fail("mode", "unknown mode '" + mode + "' (expected manufactured or explicit)");
    }
    if (const Json* v = find(j, "eps")) cfg.eps = as_number(*v, "eps");
    if (const Json* v = find(j, "a0")) cfg.a0 = as_number(*v, "a0");
    if (const Json* v = find(j, "grid")) cfg.grid = as_integer(*v, "grid");
    if (const Json* v = find(j, "quad_n")) cfg.quad_n = as_integer(*v, "quad_n");
    if (const Json* v = find(j, "residual_grid"))
        cfg.residual_grid = as_integer(*v, "residual_grid");
    if (const Json* v = find(j, "fd_step")) cfg.fd_step = as_number(*v, "fd_step");
    if (const Json* v = find(j, "solution_samples"))
        cfg.solution_samples = as_integer(*v, "solution_samples");
    if (const Json* v = find(j, "verify")) cfg.run_verification = as_boolean(*v, "verify");
    if (const Json* v = find(j, "gluing"))
        cfg.gluing = gluing_from_string(as_string(*v, "gluing"), "gluing");

    if (const Json* tol = find(j, "tolerances")) {
        if (!tol->is_object()) fail("tolerances", "expected an object");
        check_keys(*tol, "tolerances",
                   {"pde", "boundary", "gluing", "nu_relation", "characteristic"});
        if (const Json* v = find(*tol, "pde"))
            cfg.tolerances.pde = as_number(*v, "tolerances.pde");
        if (const Json* v = find(*tol, "boundary"))
            cfg.tolerances.boundary = as_number(*v, "tolerances.boundary");
        if (const Json* v = find(*tol, "gluing"))
            cfg.tolerances.gluing = as_number(*v, "tolerances.gluing");
        if (const Json* v = find(*tol, "nu_relation"))
            cfg.tolerances.nu_relation = as_number(*v, "tolerances.nu_relation");
        if (const Json* v = find(*tol, "characteristic"))
            cfg.tolerances.characteristic = as_number(*v, "tolerances.characteristic");
    }

    if (const Json* data = find(j, "data")) {
        if (!data->is_object()) fail("data", "expected an object");
        check_keys(*data, "data", {"phi1", "phi2", "dphi1_at_h", "dphi2_at_h"});
        if (const Json* v = find(*data, "phi1")) cfg.phi1 = parse_spec(*v, "data.phi1");
        if (const Json* v = find(*data, "phi2")) cfg.phi2 = parse_spec(*v, "data.phi2");
        if (const Json* v = find(*data, "dphi1_at_h"))
            cfg.dphi1_at_h = as_number(*v, "data.dphi1_at_h");
        if (const Json* v = find(*data, "dphi2_at_h"))
            cfg.dphi2_at_h = as_number(*v, "data.dphi2_at_h");
    }

    if (const Json* ps = find(j, "phi_star")) {
        if (!ps->is_object()) fail("phi_star", "expected an object");
        check_keys(*ps, "phi_star", {"phi1", "phi2"});
        if (const Json* v = find(*ps, "phi1")) cfg.phi1_star = parse_spec(*v, "phi_star.phi1");
        if (const Json* v = find(*ps, "phi2")) cfg.phi2_star = parse_spec(*v, "phi_star.phi2");
    }

    if (const Json* dens = find(j, "densities")) {
        if (!dens->is_object()) fail("densities", "expected an object");
        check_keys(*dens, "densities", {"T_upper", "T_lower", "nu_upper", "nu_lower"});
        if (const Json* v = find(*dens, "T_upper"))
            cfg.T_upper = parse_spec(*v, "densities.T_upper");
        if (const Json* v = find(*dens, "T_lower"))
            cfg.T_lower = parse_spec(*v, "densities.T_lower");
        if (const Json* v = find(*dens, "nu_upper"))
            cfg.nu_upper = parse_spec(*v, "densities.nu_upper");
        if (const Json* v = find(*dens, "nu_lower"))
            cfg.nu_lower = parse_spec(*v, "densities.nu_lower");
    }

    if (const Json* vd = find(j, "volterra_data")) {
        if (!vd->is_object()) fail("volterra_data", "expected an object");
        check_keys(*vd, "volterra_data", {"Phi1", "Phi2"});
        if (const Json* v = find(*vd, "Phi1")) cfg.Phi1 = parse_spec(*v, "volterra_data.Phi1");
        if (const Json* v = find(*vd, "Phi2")) cfg.Phi2 = parse_spec(*v, "volterra_data.Phi2");
    }

    if (const Json* v = find(j, "operand")) cfg.operand = parse_spec(*v, "operand");
    if (const Json* v = find(j, "inversion_case"))
        cfg.inversion_case = as_string(*v, "inversion_case");
    if (const Json* v = find(j, "output_dir")) cfg.output_dir = as_string(*v, "output_dir");

    return cfg;
}

std::string config_to_json_text(const ProblemConfig& cfg) {
    Json j;
    j["problem"] = to_string(cfg.problem);
    j["parameters"] = {{"p", cfg.parameters.p},
                       {"lambda", cfg.parameters.lambda},
                       {"h", cfg.parameters.h}};
    j["mode"] = cfg.manufactured ? "manufactured" : "explicit";
    j["eps"] = cfg.eps;
    j["a0"] = cfg.a0;
    j["grid"] = cfg.grid;
    j["quad_n"] = cfg.quad_n;
    j["residual_grid"] = cfg.residual_grid;
    j["fd_step"] = cfg.fd_step;
    j["solution_samples"] = cfg.solution_samples;
    j["verify"] = cfg.run_verification;
    j["gluing"] = gluing_name(cfg.gluing);
    j["tolerances"] = {{"pde", cfg.tolerances.pde},
                       {"boundary", cfg.tolerances.boundary},
                       {"gluing", cfg.tolerances.gluing},
                       {"nu_relation", cfg.tolerances.nu_relation},
                       {"characteristic", cfg.tolerances.characteristic}};
    Json data;
    data["phi1"] = serialize_spec(cfg.phi1);
    data["phi2"] = serialize_spec(cfg.phi2);
    if (cfg.dphi1_at_h) data["dphi1_at_h"] = *cfg.dphi1_at_h;
    if (cfg.dphi2_at_h) data["dphi2_at_h"] = *cfg.dphi2_at_h;
    j["data"] = std::move(data);
    j["phi_star"] = {{"phi1", serialize_spec(cfg.phi1_star)},
                     {"phi2", serialize_spec(cfg.phi2_star)}};
    j["densities"] = {{"T_upper", serialize_spec(cfg.T_upper)},
                      {"T_lower", serialize_spec(cfg.T_lower)},
                      {"nu_upper", serialize_spec(cfg.nu_upper)},
                      {"nu_lower", serialize_spec(cfg.nu_lower)}};
    j["volterra_data"] = {{"Phi1", serialize_spec(cfg.Phi1)},
                          {"Phi2", serialize_spec(cfg.Phi2)}};
    j["operand"] = serialize_spec(cfg.operand);
    j["inversion_case"] = cfg.inversion_case;
    j["output_dir"] = cfg.output_dir;
    return j.dump(2) + "\n";
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str());
}

std::vector<std::string> validate_config(const ProblemConfig& cfg) {
    std::vector<std::string> out;
    const Parameters& par = cfg.parameters;

    if (!(par.p > 0.0 && par.p < 0.5))
        out.push_back("parameters.p: must lie in the open interval (0, 0.5)");
    if (!(par.h > 0.0)) out.push_back("parameters.h: must be positive");
    if (!std::isfinite(par.lambda)) out.push_back("parameters.lambda: must be finite");
    if (cfg.problem == ProblemKind::Delta2 && par.lambda != 0.0) {
        std::ostringstream msg;
        msg << "parameters.lambda: problem delta2 is solvable only with lambda = 0 (got "
            << par.lambda << ")";
        out.push_back(msg.str());
    }

    if (cfg.grid < 8) out.push_back("grid: must be at least 8");
    if (cfg.quad_n < 8) out.push_back("quad_n: must be at least 8");
    if (cfg.residual_grid < 2) out.push_back("residual_grid: must be at least 2");
    if (cfg.solution_samples < 1) out.push_back("solution_samples: must be at least 1");
    if (!(cfg.fd_step >= 0.0)) out.push_back("fd_step: must be nonnegative");
    if (cfg.problem == ProblemKind::Delta2Star && !(cfg.eps > 0.0))
        out.push_back("eps: must be positive");
    if (!std::isfinite(cfg.a0)) out.push_back("a0: must be finite");
    for (const auto& [value, name] :
         {std::pair{cfg.tolerances.pde, "pde"}, std::pair{cfg.tolerances.boundary, "boundary"},
          std::pair{cfg.tolerances.gluing, "gluing"},
          std::pair{cfg.tolerances.nu_relation, "nu_relation"},
          std::pair{cfg.tolerances.characteristic, "characteristic"}}) {
        if (!(value > 0.0)) out.push_back(std::string("tolerances.") + name + ": must be positive");
    }

    validate_spec(cfg.phi1, "data.phi1", par, out);
    validate_spec(cfg.phi2, "data.phi2", par, out);
    validate_spec(cfg.phi1_star, "phi_star.phi1", par, out);
    validate_spec(cfg.phi2_star, "phi_star.phi2", par, out);
    validate_spec(cfg.T_upper, "densities.T_upper", par, out);
    validate_spec(cfg.T_lower, "densities.T_lower", par, out);
    validate_spec(cfg.nu_upper, "densities.nu_upper", par, out);
    validate_spec(cfg.nu_lower, "densities.nu_lower", par, out);
    validate_spec(cfg.Phi1, "volterra_data.Phi1", par, out);
    validate_spec(cfg.Phi2, "volterra_data.Phi2", par, out);
    validate_spec(cfg.operand, "operand", par, out);

    if (cfg.problem == ProblemKind::Delta2 && !cfg.manufactured) {
        if (cfg.phi1.kind == FunctionSpec::Kind::Table && !cfg.phi1.derivative_at_h &&
            !cfg.dphi1_at_h)
            out.push_back(
                "data.phi1: tabulated delta2 data needs derivative_at_h (or data.dphi1_at_h)");
        if (cfg.phi2.kind == FunctionSpec::Kind::Table && !cfg.phi2.derivative_at_h &&
            !cfg.dphi2_at_h)
            out.push_back(
                "data.phi2: tabulated delta2 data needs derivative_at_h (or data.dphi2_at_h)");
    }

    if (cfg.problem == ProblemKind::InvertHilbert && cfg.inversion_case != "bounded_at_zero" &&
        cfg.inversion_case != "unbounded" && cfg.inversion_case != "bounded_at_h")
        out.push_back(
            "inversion_case: expected bounded_at_zero, unbounded, or bounded_at_h (got '" +
            cfg.inversion_case + "')");

    if (cfg.output_dir.empty()) out.push_back("output_dir: must not be empty");

    return out;
}

std::function<double(double)> build_function(const FunctionSpec& spec, const Parameters& par) {
    const double h = par.h;
    switch (spec.kind) {
        case FunctionSpec::Kind::Zero:
            return [](double) { return 0.0; };
        case FunctionSpec::Kind::Poly: {
            auto c = spec.coefficients;
            return [c](double s) { return horner(c, s); };
        }
        case FunctionSpec::Kind::PolyDecay: {
            auto c = spec.coefficients;
            const double g = decay_exponent(spec, par);
            return [c, g, h](double s) {
                return s >= h ? 0.0 : horner(c, s) * std::pow(h - s, g);
            };
        }
        case FunctionSpec::Kind::Table: {
            auto spline = make_spline(spec);
            return [spline](double s) { return spline->value(s); };
        }
    }
    return [](double) { return 0.0; };
}

std::function<double(double)> build_function_derivative(const FunctionSpec& spec,
                                                        const Parameters& par) {
    const double h = par.h;
    switch (spec.kind) {
        case FunctionSpec::Kind::Zero:
            return [](double) { return 0.0; };
        case FunctionSpec::Kind::Poly: {
            auto d = poly_derivative(spec.coefficients);
            return [d](double s) { return horner(d, s); };
        }
        case FunctionSpec::Kind::PolyDecay: {
            auto c = spec.coefficients;
            auto d = poly_derivative(spec.coefficients);
            const double g = decay_exponent(spec, par);
            return [c, d, g, h](double s) {
                if (s >= h) return 0.0;
                const double w = h - s;
                return horner(d, s) * std::pow(w, g) - g * horner(c, s) * std::pow(w, g - 1.0);
            };
        }
        case FunctionSpec::Kind::Table: {
            auto spline = make_spline(spec);
            return [spline](double s) { return spline->derivative(s); };
        }
    }
    return [](double) { return 0.0; };
}

std::function<double(double)> build_function_second_derivative(const FunctionSpec& spec,
                                                               const Parameters& par) {
    const double h = par.h;
    switch (spec.kind) {
        case FunctionSpec::Kind::Zero:
            return [](double) { return 0.0; };
        case FunctionSpec::Kind::Poly: {
            auto d2 = poly_derivative(poly_derivative(spec.coefficients));
            return [d2](double s) { return horner(d2, s); };
        }
        case FunctionSpec::Kind::PolyDecay: {
            auto c = spec.coefficients;
            auto d = poly_derivative(spec.coefficients);
            auto d2 = poly_derivative(poly_derivative(spec.coefficients));
            const double g = decay_exponent(spec, par);
            return [c, d, d2, g, h](double s) {
                if (s >= h) return 0.0;
                const double w = h - s;
                return horner(d2, s) * std::pow(w, g) -
                       2.0 * g * horner(d, s) * std::pow(w, g - 1.0) +
                       g * (g - 1.0) * horner(c, s) * std::pow(w, g - 2.0);
            };
        }
        case FunctionSpec::Kind::Table: {
            auto spline = make_spline(spec);
            return [spline](double s) { return spline->second_derivative(s); };
        }
    }
    return [](double) { return 0.0; };
}

WeightedDensity build_density(const FunctionSpec& spec, const Parameters& par) {
    const double h = par.h;
    switch (spec.kind) {
        case FunctionSpec::Kind::Zero:
            return WeightedDensity::zero(h);
        case FunctionSpec::Kind::Poly: {
            auto c = spec.coefficients;
            return WeightedDensity::plain(h, [c](double s) { return horner(c, s); });
        }
        case FunctionSpec::Kind::PolyDecay: {
            auto c = spec.coefficients;
            return WeightedDensity(0.0, decay_exponent(spec, par), h,
                                   [c](double s) { return horner(c, s); });
        }
        case FunctionSpec::Kind::Table: {
            auto spline = make_spline(spec);
            return WeightedDensity::plain(h, [spline](double s) { return spline->value(s); });
        }
    }
    return WeightedDensity::zero(h);
}

BoundaryData build_boundary_data(const ProblemConfig& cfg) {
    const Parameters& par = cfg.parameters;
    BoundaryData data;
    data.phi1 = build_function(cfg.phi1, par);
    data.phi2 = build_function(cfg.phi2, par);
    data.dphi1 = build_function_derivative(cfg.phi1, par);
    data.dphi2 = build_function_derivative(cfg.phi2, par);
    data.d2phi1 = build_function_second_derivative(cfg.phi1, par);
    data.d2phi2 = build_function_second_derivative(cfg.phi2, par);

    auto pin = [&](const FunctionSpec& spec,
                   const std::optional<double>& expl) -> std::optional<double> {
        if (expl) return expl;
        switch (spec.kind) {
            case FunctionSpec::Kind::Zero:
                return 0.0;
            case FunctionSpec::Kind::Poly:
                return horner(poly_derivative(spec.coefficients), par.h);
            case FunctionSpec::Kind::PolyDecay:
                return 0.0;  // exponent 1 + p + eps > 1 forces a flat endpoint
            case FunctionSpec::Kind::Table:
                return spec.derivative_at_h;
        }
        return std::nullopt;
    };
    data.dphi1_at_h = pin(cfg.phi1, cfg.dphi1_at_h);
    data.dphi2_at_h = pin(cfg.phi2, cfg.dphi2_at_h);

    // The moment condition divides by (h-s)^(1+p+eps) of the problem's eps;
    // the factored form is only exact when the spec decays with that same
    // exponent.
    auto reduced = [&](const FunctionSpec& spec) -> std::function<double(double)> {
        if (spec.kind != FunctionSpec::Kind::PolyDecay) return {};
        if (std::abs(spec.eps - cfg.eps) > 1e-12) return {};
        auto c = spec.coefficients;
        return [c](double s) { return horner(c, s); };
    };
    data.phi1_reduced = reduced(cfg.phi1);
    data.phi2_reduced = reduced(cfg.phi2);
    return data;
}

} // namespace darboux
