#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddfem/dd.hpp"
#include "ddfem/mesh.hpp"
#include "ddfem/problem.hpp"
#include "ddfem/quadrature.hpp"
#include "ddfem/spaces.hpp"

namespace ddfem {

/// Error measures of a discrete field against the exact solution:
///   energy^2 = eps |e|_1^2 + gamma ||e||_0^2,
///   star^2   = energy^2 + sum_T xi_T ||grad u_hb||_0,T^2.
struct ErrorReport {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double energy = 0.0;
    double star = 0.0;
    double dissipation = 0.0;
};

inline ErrorReport compute_errors(const ProblemSpec& p, const Mesh& mesh, const FieldCoefficients& u,
                                  const DDCoefficients& xi, int quadrature_degree = 8) {
    if (!p.exact) throw std::invalid_argument("compute_errors: problem has no exact solution");
    if (xi.size() != static_cast<std::size_t>(mesh.n_triangles()))
        throw std::invalid_argument("compute_errors: one diffusivity entry per element required");
    const QuadratureRule rule = triangle_rule(quadrature_degree);
    const std::vector<ElementGeometry> geoms = all_geometries(mesh);
    const double gamma = p.gamma(mesh, rule);

    double l2_sq = 0.0, h1_sq = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeometry& geom = geoms[static_cast<std::size_t>(t)];
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Vec2 x = geom.point(rule.points[q]);
            const FieldSample s = evaluate_field(u, mesh, geom, t, rule.points[q]);
            const double dv = p.exact->value(x.x, x.y) - s.value;
            const Vec2 dg = p.exact->gradient(x.x, x.y) - s.gradient;
            const double w = rule.weights[q] * geom.area;
            l2_sq += w * dv * dv;
            h1_sq += w * dg.dot(dg);
        }
    }

    ErrorReport r;
    r.l2 = std::sqrt(l2_sq);
    r.h1_semi = std::sqrt(h1_sq);
    r.dissipation = dissipation_sum(xi_values(xi), u, mesh, geoms, rule);
    r.energy = std::sqrt(p.epsilon * h1_sq + gamma * l2_sq);
    r.star = std::sqrt(p.epsilon * h1_sq + gamma * l2_sq + r.dissipation);
    return r;
}

/// rates[i] = log2(errors[i] / errors[i+1]); inputs must be positive.
inline std::vector<double> convergence_rates(const std::vector<double>& errors) {
    std::vector<double> rates;
    if (errors.size() < 2) return rates;
    rates.reserve(errors.size() - 1);
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !(errors[i + 1] > 0.0))
            throw std::invalid_argument("convergence_rates: errors must be positive");
        rates.push_back(std::log2(errors[i] / errors[i + 1]));
    }
    return rates;
}

struct StudyRow {
    int n = 0;
    double h = 0.0;  // element diameter sqrt(2)/n
    ErrorReport error;
    // NaN in the first row; filled by run_study from consecutive levels.
    double rate_l2 = std::numeric_limits<double>::quiet_NaN();
    double rate_h1 = std::numeric_limits<double>::quiet_NaN();
    double rate_star = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
};

struct RateTable {
    std::vector<StudyRow> rows;
};

/// Named manufactured problem; `make` binds the diffusion and reaction
/// constants.
struct BenchmarkCase {
    std::string name;
    std::string description;
    std::function<ProblemSpec(double epsilon, double sigma)> make;
};

/// Polynomial solution 100 x^2 (1-x)^2 y (1-y) (1-2y) with beta = (3,2).
inline ProblemSpec make_polynomial_case(double epsilon, double sigma) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("benchmark: epsilon must be positive");
    if (sigma < 0.0) throw std::invalid_argument("benchmark: sigma must be nonnegative");
    auto X = [](double x) { return 100.0 * x * x * (1.0 - x) * (1.0 - x); };
    auto dX = [](double x) { return 200.0 * x * (1.0 - x) * (1.0 - 2.0 * x); };
    auto ddX = [](double x) { return 200.0 * ((1.0 - 2.0 * x) * (1.0 - 2.0 * x) - 2.0 * x * (1.0 - x)); };
    auto Y = [](double y) { return y * (1.0 - y) * (1.0 - 2.0 * y); };
    auto dY = [](double y) { return 1.0 - 6.0 * y + 6.0 * y * y; };
    auto ddY = [](double y) { return -6.0 + 12.0 * y; };

    ProblemSpec p;
    p.epsilon = epsilon;
    p.beta = [](double, double) { return Vec2{3.0, 2.0}; };
    p.sigma = [sigma](double, double) { return sigma; };
    p.f = [=](double x, double y) {
        return -epsilon * (ddX(x) * Y(y) + X(x) * ddY(y)) + 3.0 * dX(x) * Y(y) + 2.0 * X(x) * dY(y) +
               sigma * X(x) * Y(y);
    };
    p.gamma_override = sigma;
    p.exact = ExactSolution{
        [=](double x, double y) { return X(x) * Y(y); },
        [=](double x, double y) { return Vec2{dX(x) * Y(y), X(x) * dY(y)}; },
    };
    return p;
}

/// Tensor-product boundary-layer solution E(x) E(y) with beta = (1,1),
///   E(t) = (exp((t-1)/eps) - 1)/(exp(-1/eps) - 1) + t - 1.
/// E solves -eps E'' + E' = 1 with E(0) = E(1) = 0, so the layer terms of
/// the forcing cancel: f = E(x) + E(y) + sigma E(x) E(y).
inline ProblemSpec make_layer_case(double epsilon, double sigma) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("benchmark: epsilon must be positive");
    if (sigma < 0.0) throw std::invalid_argument("benchmark: sigma must be nonnegative");
    const double denom = std::expm1(-1.0 / epsilon);
    auto E = [=](double t) { return std::expm1((t - 1.0) / epsilon) / denom + t - 1.0; };
    auto dE = [=](double t) { return std::exp((t - 1.0) / epsilon) / (epsilon * denom) + 1.0; };

    ProblemSpec p;
    p.epsilon = epsilon;
    p.beta = [](double, double) { return Vec2{1.0, 1.0}; };
    p.sigma = [sigma](double, double) { return sigma; };
    p.f = [=](double x, double y) { return E(x) + E(y) + sigma * E(x) * E(y); };
    p.gamma_override = sigma;
    p.exact = ExactSolution{
        [=](double x, double y) { return E(x) * E(y); },
        [=](double x, double y) { return Vec2{dE(x) * E(y), E(x) * dE(y)}; },
    };
    return p;
}

inline const std::vector<BenchmarkCase>& builtin_cases() {
    static const std::vector<BenchmarkCase> cases = {
        {"example1", "smooth polynomial solution, beta=(3,2)", make_polynomial_case},
        {"example2", "boundary layers at x=1 and y=1, beta=(1,1)", make_layer_case},
    };
    return cases;
}

inline const BenchmarkCase& find_case(const std::string& name) {
    for (const auto& c : builtin_cases())
        if (c.name == name) return c;
    throw std::invalid_argument("unknown benchmark case: " + name);
}

/// Solve the case on each level and tabulate errors and observed rates.
inline RateTable run_study(const BenchmarkCase& bench, double epsilon, double sigma,
                           const std::vector<int>& levels, const FixedPointConfig& cfg = {},
                           int error_degree = 8, Diagonal diag = Diagonal::BottomLeftToTopRight) {
    if (levels.empty()) throw std::invalid_argument("run_study: need at least one level");
    for (std::size_t i = 0; i + 1 < levels.size(); ++i)
        if (levels[i + 1] <= levels[i]) throw std::invalid_argument("run_study: levels must be strictly increasing");
    const ProblemSpec p = bench.make(epsilon, sigma);
    RateTable table;
    for (int n : levels) {
        const Mesh mesh = generate_uniform_mesh(n, diag);
        const DDSolveResult sol = fixed_point_solve(p, mesh, cfg);
        StudyRow row;
        row.n = n;
        row.h = std::sqrt(2.0) / n;
        row.error = compute_errors(p, mesh, sol.u, sol.xi, error_degree);
        row.iterations = sol.report.iterations;
        row.converged = sol.report.converged;
        if (!table.rows.empty()) {
            // Observed order log(e_prev/e)/log(n/n_prev); plain log2 of the
            // error ratio when the level doubles.
            const StudyRow& prev = table.rows.back();
            const double scale = std::log2(static_cast<double>(n) / prev.n);
            row.rate_l2 = std::log2(prev.error.l2 / row.error.l2) / scale;
            row.rate_h1 = std::log2(prev.error.h1_semi / row.error.h1_semi) / scale;
            row.rate_star = std::log2(prev.error.star / row.error.star) / scale;
        }
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace ddfem
