#pragma once

#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddfem/analysis.hpp"
#include "ddfem/dd.hpp"
#include "ddfem/mesh.hpp"
#include "ddfem/svg.hpp"
#include "ddfem/table_io.hpp"

namespace ddfem {

struct RunConfig {
    std::string case_name = "example1";
    double epsilon = 1.0;
    double sigma = 1.0;
    int n = 16;
    std::vector<int> levels = {2, 4, 8, 16, 32, 64};
    std::string diagonal = "bltr";
    std::string out;  // base path; extension added per format
    std::string format = "csv";
    bool plot = false;
    std::string mesh_out;
    FixedPointConfig solver;
    int error_degree = 8;
};

namespace detail {

inline Diagonal parse_diagonal(const std::string& s) {
    if (s == "bltr") return Diagonal::BottomLeftToTopRight;
    if (s == "tlbr") return Diagonal::TopLeftToBottomRight;
    throw std::invalid_argument("diagonal must be 'bltr' or 'tlbr'");
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << content;
    if (!out) throw std::invalid_argument("failed writing output file: " + path);
}

inline std::string run_record_to_markdown(const RunRecord& r) {
    RateTable t;
    StudyRow row;
    row.n = r.n;
    row.h = r.h;
    row.error = r.error;
    row.iterations = r.iterations;
    row.converged = r.converged;
    t.rows.push_back(row);
    return rate_table_to_markdown(t);
}

}  // namespace detail

inline int cmd_run(const RunConfig& cfg, std::ostream& log) {
    const BenchmarkCase& bench = find_case(cfg.case_name);
    const ProblemSpec problem = bench.make(cfg.epsilon, cfg.sigma);
    const Mesh mesh = generate_uniform_mesh(cfg.n, detail::parse_diagonal(cfg.diagonal));
    const DDSolveResult sol = fixed_point_solve(problem, mesh, cfg.solver);

    RunRecord rec;
    rec.n = cfg.n;
    rec.h = std::sqrt(2.0) / cfg.n;
    rec.error = compute_errors(problem, mesh, sol.u, sol.xi, cfg.error_degree);
    rec.iterations = sol.report.iterations;
    rec.converged = sol.report.converged;

    const std::string base = cfg.out.empty() ? "run" : cfg.out;
    if (cfg.format == "markdown")
        detail::write_file(base + ".md", detail::run_record_to_markdown(rec));
    else
        detail::write_file(base + ".csv", run_record_to_csv(rec));
    detail::write_file(base + "_trace.csv", trace_to_csv(sol.report));
    if (cfg.plot) {
        std::ostringstream svg;
        SvgOptions opts;
        opts.title = cfg.case_name + " n=" + std::to_string(cfg.n);
        write_field_svg(mesh, sol.u.nodal, svg, opts);
        detail::write_file(base + ".svg", svg.str());
    }
    if (!cfg.mesh_out.empty()) {
        std::ostringstream txt;
        write_mesh_text(mesh, txt);
        detail::write_file(cfg.mesh_out, txt.str());
    }

    log << cfg.case_name << " eps=" << format_double(cfg.epsilon) << " sigma=" << format_double(cfg.sigma)
        << " n=" << cfg.n << ": l2=" << format_double(rec.error.l2) << " h1=" << format_double(rec.error.h1_semi)
        << " star=" << format_double(rec.error.star) << " iters=" << rec.iterations
        << " converged=" << (rec.converged ? 1 : 0) << "\n";
    return 0;
}

inline int cmd_study(const RunConfig& cfg, std::ostream& log) {
    const BenchmarkCase& bench = find_case(cfg.case_name);
    const RateTable table = run_study(bench, cfg.epsilon, cfg.sigma, cfg.levels, cfg.solver, cfg.error_degree,
                                      detail::parse_diagonal(cfg.diagonal));
    const std::string base = cfg.out.empty() ? "study" : cfg.out;
    if (cfg.format == "markdown")
        detail::write_file(base + ".md", rate_table_to_markdown(table));
    else
        detail::write_file(base + ".csv", rate_table_to_csv(table));
    for (const auto& r : table.rows)
        log << "n=" << r.n << " l2=" << format_double(r.error.l2) << " h1=" << format_double(r.error.h1_semi)
            << " star=" << format_double(r.error.star) << " iters=" << r.iterations
            << " converged=" << (r.converged ? 1 : 0) << "\n";
    return 0;
}

inline int cmd_plot(const RunConfig& cfg, std::ostream& log) {
    const BenchmarkCase& bench = find_case(cfg.case_name);
    const ProblemSpec problem = bench.make(cfg.epsilon, cfg.sigma);
    const Mesh mesh = generate_uniform_mesh(cfg.n, detail::parse_diagonal(cfg.diagonal));
    const DDSolveResult sol = fixed_point_solve(problem, mesh, cfg.solver);
    const std::string path = cfg.out.empty() ? "solution.svg" : cfg.out;
    std::ostringstream svg;
    SvgOptions opts;
    opts.title = cfg.case_name + " n=" + std::to_string(cfg.n);
    write_field_svg(mesh, sol.u.nodal, svg, opts);
    detail::write_file(path, svg.str());
    if (!cfg.mesh_out.empty()) {
        std::ostringstream txt;
        write_mesh_text(mesh, txt);
        detail::write_file(cfg.mesh_out, txt.str());
    }
    log << "wrote " << path << "\n";
    return 0;
}

/// Exit codes: 0 success, 1 usage or configuration error, 2 solver failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& log = std::cout,
                   std::ostream& err = std::cerr) {
    RunConfig cfg;
    CLI::App app{"two-scale finite elements with nonlinear element diffusivity on the unit square"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI file (flags take precedence)");
    app.fallthrough();

    app.add_option("--case", cfg.case_name, "benchmark case (example1, example2)")->capture_default_str();
    app.add_option("--epsilon", cfg.epsilon, "diffusion constant")->capture_default_str();
    app.add_option("--sigma", cfg.sigma, "reaction constant")->capture_default_str();
    app.add_option("--diagonal", cfg.diagonal, "cell split: bltr or tlbr")->capture_default_str();
    app.add_option("--max-iterations", cfg.solver.max_iterations, "fixed point budget")->capture_default_str();
    app.add_option("--tolerance", cfg.solver.tolerance, "fixed point stopping tolerance")->capture_default_str();
    app.add_flag("--global-freezing", cfg.solver.global_freezing, "freeze the update meshwide instead of per element");
    app.add_option("--assembly-degree", cfg.solver.assembly_degree, "quadrature degree for assembly")->capture_default_str();
    app.add_option("--error-degree", cfg.error_degree, "quadrature degree for error integrals")->capture_default_str();
    app.add_option("--out", cfg.out, "output base path (run/study) or file (plot)");
    app.add_option("--format", cfg.format, "table format: csv or markdown")->capture_default_str();
    app.add_option("--mesh-out", cfg.mesh_out, "also export the mesh as plain text");

    CLI::App* run = app.add_subcommand("run", "solve one case on one mesh and report errors");
    run->add_option("--n", cfg.n, "mesh subdivisions per side")->capture_default_str();
    run->add_flag("--plot", cfg.plot, "also write an SVG of the solution");

    CLI::App* study = app.add_subcommand("study", "solve a sequence of meshes and tabulate convergence");
    study->add_option("--levels", cfg.levels, "mesh subdivisions, strictly increasing")
        ->delimiter(',')
        ->capture_default_str();

    CLI::App* plot = app.add_subcommand("plot", "solve one case and write an SVG of the solution");
    plot->add_option("--n", cfg.n, "mesh subdivisions per side")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, log, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cfg.format != "csv" && cfg.format != "markdown")
            throw std::invalid_argument("format must be 'csv' or 'markdown'");
        if (cfg.n < 1) throw std::invalid_argument("--n must be at least 1");
        if (run->parsed()) return cmd_run(cfg, log);
        if (study->parsed()) return cmd_study(cfg, log);
        if (plot->parsed()) return cmd_plot(cfg, log);
        err << "error: no command given\n";
        return 1;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ddfem
