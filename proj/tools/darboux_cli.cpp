#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "darboux/config.hpp"
#include "darboux/hilbert.hpp"
#include "darboux/selftest.hpp"
#include "darboux/solvers.hpp"
#include "darboux/verification.hpp"

namespace {

using darboux::ProblemConfig;
using darboux::ProblemKind;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string case_name(const darboux::InversionCase& c) {
    switch (c.tag) {
        case darboux::InversionCase::Tag::BoundedAtZero: return "bounded_at_zero";
        case darboux::InversionCase::Tag::UnboundedBoth: return "unbounded";
        case darboux::InversionCase::Tag::BoundedAtH: return "bounded_at_h";
    }
    return "unbounded";
}

struct NamedDensity {
    std::string name;
    darboux::WeightedDensity density;
};

struct RunProducts {
    std::optional<darboux::SolutionField> field;
    std::optional<darboux::BoundaryData> data;
    std::vector<NamedDensity> densities;
    std::vector<std::pair<std::string, std::string>> info;  // report key-value lines
    int gluing_sign = 0;
};

void append_volterra_report(RunProducts& out, const std::string& prefix,
                            const darboux::VolterraReport& r) {
    out.info.emplace_back(prefix + ".phi_at_h", num(r.phi_at_h));
    out.info.emplace_back(prefix + ".max_residual", num(r.max_residual));
    out.info.emplace_back(prefix + ".residual_scale", num(r.residual_scale));
    out.info.emplace_back(prefix + ".closure_condition", num(r.closure_condition));
}

void append_conditions(RunProducts& out, const std::string& prefix,
                       const darboux::FunctionConditions& f) {
    auto one = [&](const char* name, const darboux::ConditionCheck& c) {
        out.info.emplace_back(prefix + "." + name + ".measured", num(c.measured));
        out.info.emplace_back(prefix + "." + name + ".tolerance", num(c.tolerance));
        out.info.emplace_back(prefix + "." + name + ".passed", c.passed ? "true" : "false");
    };
    one("twice_differentiable", f.twice_differentiable);
    one("value_at_zero", f.value_at_zero);
    one("slope_at_zero", f.slope_at_zero);
    one("moment", f.moment);
}

RunProducts execute(const ProblemConfig& cfg) {
    const darboux::Parameters& par = cfg.parameters;
    const darboux::GluingConstants k = darboux::matched_gluing(par.p);
    RunProducts out;

    switch (cfg.problem) {
        case ProblemKind::Delta2: {
            darboux::BoundaryData data;
            darboux::Delta2Inputs in;
            if (cfg.manufactured) {
                darboux::ManufacturedDelta2 m = darboux::manufacture_delta2(par, k);
                data = m.data;
                in = m.inputs;
            } else {
                data = darboux::build_boundary_data(cfg);
                in.phi1_star = darboux::build_density(cfg.phi1_star, par);
                in.phi2_star = darboux::build_density(cfg.phi2_star, par);
                in.T_upper = darboux::build_density(cfg.T_upper, par);
                in.T_lower = darboux::build_density(cfg.T_lower, par);
                in.a0 = cfg.a0;
            }
            darboux::Delta2Result r = darboux::solve_delta2(data, par, in, k, cfg.grid);
            out.data = std::move(data);
            out.densities.push_back({"nu1", r.nu.nu1});
            out.densities.push_back({"nu3", r.nu.nu3});
            out.densities.push_back({"mu1", r.mu1});
            out.densities.push_back({"mu2", r.mu2});
            out.densities.push_back({"T_upper", in.T_upper});
            out.densities.push_back({"T_lower", in.T_lower});
            out.info.emplace_back("inversion_case", case_name(r.used));
            out.info.emplace_back("a0", num(in.a0));
            out.field.emplace(std::move(r.field));
            out.gluing_sign = +1;
            break;
        }
        case ProblemKind::Delta2Star: {
            darboux::BoundaryData data;
            darboux::Delta2StarInputs in;
            double eps = cfg.eps;
            if (cfg.manufactured) {
                darboux::ManufacturedDelta2Star m = darboux::manufacture_delta2star(par, k);
                data = m.data;
                in = m.inputs;
                eps = m.eps;
            } else {
                data = darboux::build_boundary_data(cfg);
                in.Phi1 = darboux::build_function(cfg.Phi1, par);
                in.Phi2 = darboux::build_function(cfg.Phi2, par);
            }
            darboux::Delta2StarResult r =
                darboux::solve_delta2_star(data, par, in, k, eps, cfg.grid);
            out.data = std::move(data);
            out.densities.push_back({"T_upper", r.T_upper});
            out.densities.push_back({"T_lower", r.T_lower});
            out.densities.push_back({"nu_upper", r.nu_upper});
            out.densities.push_back({"nu_lower", r.nu_lower});
            out.info.emplace_back("eps", num(eps));
            append_volterra_report(out, "volterra_upper", r.volterra_upper);
            append_volterra_report(out, "volterra_lower", r.volterra_lower);
            out.info.emplace_back("transmission_mismatch_upper",
                                  num(r.transmission_mismatch_upper));
            out.info.emplace_back("transmission_mismatch_lower",
                                  num(r.transmission_mismatch_lower));
            append_conditions(out, "conditions.phi1", r.conditions.f1);
            append_conditions(out, "conditions.phi2", r.conditions.f2);
            out.field.emplace(std::move(r.field));
            out.gluing_sign = -1;
            break;
        }
        case ProblemKind::CauchyEval:
        case ProblemKind::VerifyOnly: {
            const auto T_up = darboux::build_density(cfg.T_upper, par);
            const auto T_low = darboux::build_density(cfg.T_lower, par);
            const auto nu_up = darboux::build_density(cfg.nu_upper, par);
            const auto nu_low = darboux::build_density(cfg.nu_lower, par);
            out.field.emplace(
                darboux::assemble_gluing_field(T_up, T_low, nu_up, nu_low, k, par, cfg.quad_n));
            out.densities.push_back({"T_upper", T_up});
            out.densities.push_back({"T_lower", T_low});
            out.densities.push_back({"nu_upper", nu_up});
            out.densities.push_back({"nu_lower", nu_low});
            if (cfg.problem == ProblemKind::VerifyOnly || !cfg.phi1.is_zero() ||
                !cfg.phi2.is_zero())
                out.data = darboux::build_boundary_data(cfg);
            break;
        }
        case ProblemKind::InvertHilbert: {
            const auto f = darboux::build_function(cfg.operand, par);
            darboux::WeightedDensity mu = darboux::WeightedDensity::zero(par.h);
            if (cfg.inversion_case == "bounded_at_zero")
                mu = darboux::invert_bounded_at_zero(f, par.h, cfg.grid);
            else if (cfg.inversion_case == "bounded_at_h")
                mu = darboux::invert_bounded_at_h(f, par.h, cfg.grid);
            else
                mu = darboux::invert_unbounded(f, par.h, cfg.a0, cfg.grid);
            const auto consistency = darboux::check_index_consistency(mu, f, 33, 256);
            out.densities.push_back({"mu", mu});
            out.info.emplace_back("inversion_case", cfg.inversion_case);
            out.info.emplace_back("index_consistency.max_abs_deviation",
                                  num(consistency.max_abs_deviation));
            out.info.emplace_back("index_consistency.worst_point",
                                  num(consistency.worst_point));
            break;
        }
        case ProblemKind::Volterra: {
            const auto Phi = darboux::build_function(cfg.operand, par);
            darboux::VolterraResult r = darboux::solve_volterra_first_kind(Phi, par, cfg.grid);
            out.densities.push_back({"T", r.T});
            append_volterra_report(out, "volterra", r.report);
            break;
        }
    }
    return out;
}

int resolved_gluing_sign(const ProblemConfig& cfg, const RunProducts& products) {
    switch (cfg.gluing) {
        case darboux::GluingMode::None: return 0;
        case darboux::GluingMode::Continuous: return +1;
        case darboux::GluingMode::Occlusion: return -1;
        case darboux::GluingMode::Auto: return products.gluing_sign;
    }
    return 0;
}

void write_solution_table(const std::filesystem::path& path, const darboux::SolutionField& field,
                          int m) {
    std::ofstream out(path);
    out << "# xi\teta\tU\n";
    const double h = field.parameters().h;
    // Interior parametrization of the four triangles; offsets keep every
    // sample strictly inside its open triangle.
    for (int tri = 0; tri < 4; ++tri) {
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                const double u = (i + 0.5) / m, v = (j + 0.5) / m;
                double xi = 0.0, eta = 0.0;
                switch (tri) {
                    case 0: xi = u * h; eta = xi + v * (h - xi); break;
                    case 1: eta = v * h; xi = eta + u * (h - eta); break;
                    case 2: eta = -v * h; xi = -eta + u * (h + eta); break;
                    case 3: xi = u * h; eta = -(xi + v * (h - xi)); break;
                }
                out << num(xi) << '\t' << num(eta) << '\t' << num(field.value(xi, eta))
                    << '\n';
            }
        }
    }
}

void write_density_table(const std::filesystem::path& path,
                         const std::vector<NamedDensity>& densities, double h) {
    std::ofstream out(path);
    out << "# name\talpha0\talphaH\ts\tvalue\n";
    for (const auto& nd : densities) {
        for (int i = 0; i < 65; ++i) {
            const double s = h * (i + 0.5) / 65.0;
            out << nd.name << '\t' << num(nd.density.alpha0()) << '\t'
                << num(nd.density.alphaH()) << '\t' << num(s) << '\t'
                << num(nd.density.value(s)) << '\n';
        }
    }
}

int run_problem(ProblemConfig cfg, bool force_verify) {
    const auto issues = darboux::validate_config(cfg);
    if (!issues.empty()) {
        for (const auto& issue : issues) std::fprintf(stderr, "config error: %s\n", issue.c_str());
        return 2;
    }
    if (force_verify) cfg.run_verification = true;

    RunProducts products;
    try {
        products = execute(cfg);
    } catch (const darboux::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const darboux::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    std::optional<darboux::VerificationReport> verification;
    if (cfg.run_verification && products.field) {
        darboux::VerifyOptions opt;
        opt.residual_grid = cfg.residual_grid;
        opt.fd_step = cfg.fd_step;
        opt.pde_tol = cfg.tolerances.pde;
        opt.boundary_tol = cfg.tolerances.boundary;
        opt.gluing_tol = cfg.tolerances.gluing;
        opt.nu_rel_tol = cfg.tolerances.nu_relation;
        opt.characteristic_tol = cfg.tolerances.characteristic;
        opt.gluing_sign = resolved_gluing_sign(cfg, products);
        opt.data = products.data ? &*products.data : nullptr;
        verification = darboux::full_report(*products.field, opt);
    }

    const std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        std::fprintf(stderr, "config error: output_dir: cannot create '%s': %s\n",
                     cfg.output_dir.c_str(), ec.message().c_str());
        return 2;
    }

    std::vector<std::string> written;
    if (products.field) {
        write_solution_table(dir / "solution.tsv", *products.field, cfg.solution_samples);
        written.push_back("solution.tsv");
    }
    if (!products.densities.empty()) {
        write_density_table(dir / "densities.tsv", products.densities, cfg.parameters.h);
        written.push_back("densities.tsv");
    }

    {
        std::ofstream rep(dir / "report.txt");
        rep << "problem = " << darboux::to_string(cfg.problem) << '\n';
        for (const auto& [key, value] : products.info) rep << key << " = " << value << '\n';
        if (verification) {
            for (const auto& c : verification->checks) {
                rep << "check." << c.name << ".measured = " << num(c.measured) << '\n';
                rep << "check." << c.name << ".threshold = " << num(c.threshold) << '\n';
                rep << "check." << c.name << ".passed = " << (c.passed ? "true" : "false")
                    << '\n';
            }
            rep << "verification.all_passed = " << (verification->all_passed() ? "true" : "false")
                << '\n';
        }
        written.push_back("report.txt");
    }

    {
        nlohmann::ordered_json manifest;
        manifest["config"] = nlohmann::ordered_json::parse(darboux::config_to_json_text(cfg));
        manifest["outputs"] = written;
        std::ofstream mf(dir / "manifest.json");
        mf << manifest.dump(2) << '\n';
    }

    for (const auto& name : written)
        std::printf("wrote %s\n", (dir / name).string().c_str());
    if (verification) {
        for (const auto& c : verification->checks)
            std::printf("%-24s %-12s measured %.3e threshold %.3e\n", c.name.c_str(),
                        c.passed ? "pass" : "FAIL", c.measured, c.threshold);
        if (!verification->all_passed()) {
            std::printf("verification: FAIL\n");
            return 1;
        }
        std::printf("verification: pass\n");
    }
    return 0;
}

int run_selftest() {
    const auto sections = darboux::run_selftest();
    bool all = true;
    int index = 0;
    for (const auto& s : sections) {
        ++index;
        std::printf("[%d/%zu] %s: %s (%.2f s)\n", index, sections.size(), s.name.c_str(),
                    s.passed() ? "ok" : "FAIL", s.seconds);
        for (const auto& c : s.checks)
            std::printf("    %-32s %-6s measured %.3e threshold %.3e\n", c.name.c_str(),
                        c.passed ? "pass" : "FAIL", c.measured, c.threshold);
        all = all && s.passed();
    }
    std::printf("selftest: %s\n", all ? "all sections passed" : "FAILURES");
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary-value solvers for the generalized Euler-Darboux equation"};
    app.require_subcommand(1);

    std::string config_path;
    int grid_override = 0;
    double fd_step_override = -1.0;
    std::string out_override;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "path to a JSON problem configuration")
            ->required();
        cmd->add_option("--grid", grid_override, "override the grid/inversion size");
        cmd->add_option("--fd-step", fd_step_override, "override the verification FD step");
        cmd->add_option("--out", out_override, "override the output directory");
    };

    CLI::App* solve = app.add_subcommand("solve", "run the configured problem");
    add_common(solve);
    CLI::App* verify =
        app.add_subcommand("verify", "run the configured problem with verification forced on");
    add_common(verify);
    CLI::App* selftest =
        app.add_subcommand("selftest", "run the built-in numerical correctness suite");

    CLI11_PARSE(app, argc, argv);

    if (selftest->parsed()) return run_selftest();

    ProblemConfig cfg;
    try {
        cfg = darboux::load_config(config_path);
    } catch (const darboux::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
    if (grid_override > 0) cfg.grid = grid_override;
    if (fd_step_override >= 0.0) cfg.fd_step = fd_step_override;
    if (!out_override.empty()) cfg.output_dir = out_override;

    return run_problem(std::move(cfg), verify->parsed());
}
