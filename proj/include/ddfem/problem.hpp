#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

#include "ddfem/mesh.hpp"
#include "ddfem/quadrature.hpp"

namespace ddfem {

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<Vec2(double, double)>;

struct ExactSolution {
    ScalarField value;
    VectorField gradient;
};

/// Data of the convection-diffusion-reaction problem
///   -eps Lap(u) + beta.grad(u) + sigma u = f   in the unit square,
///   u = 0 on Dirichlet edges, eps grad(u).n = g on Neumann edges.
/// Requires sigma - div(beta)/2 >= gamma >= 0.
struct ProblemSpec {
    double epsilon = 1.0;
    VectorField beta;
    ScalarField sigma;
    ScalarField f;
    ScalarField neumann;  // unused unless some edge is tagged Neumann

    /// Reaction constant of the energy norm. Set it when known analytically
    /// (constant coefficients); otherwise gamma() falls back to a sampled
    /// infimum of sigma - div(beta)/2.
    std::optional<double> gamma_override;

    std::optional<ExactSolution> exact;

    double gamma(const Mesh& mesh, const QuadratureRule& rule) const;
};

/// Sampled infimum of sigma - div(beta)/2 over all quadrature points,
/// clamped at zero. div(beta) by fourth-order central differences.
inline double sampled_gamma(const ProblemSpec& p, const Mesh& mesh, const QuadratureRule& rule) {
    const double step = 1e-5;
    double inf = std::numeric_limits<double>::infinity();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeometry geom = element_geometry(mesh, t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Vec2 x = geom.point(rule.points[q]);
            auto bx = [&](double s) { return p.beta(s, x.y).x; };
            auto by = [&](double s) { return p.beta(x.x, s).y; };
            auto d4 = [step](auto&& g, double s) {
                return (-g(s + 2 * step) + 8 * g(s + step) - 8 * g(s - step) + g(s - 2 * step)) / (12 * step);
            };
            const double div_beta = d4(bx, x.x) + d4(by, x.y);
            inf = std::min(inf, p.sigma(x.x, x.y) - 0.5 * div_beta);
        }
    }
    return std::max(0.0, inf);
}

inline double ProblemSpec::gamma(const Mesh& mesh, const QuadratureRule& rule) const {
    if (gamma_override) {
        if (*gamma_override < 0.0) throw std::invalid_argument("gamma: override must be nonnegative");
        return *gamma_override;
    }
    return sampled_gamma(*this, mesh, rule);
}

}  // namespace ddfem
