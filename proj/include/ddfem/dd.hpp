#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "ddfem/assembly.hpp"
#include "ddfem/linalg.hpp"
#include "ddfem/mesh.hpp"
#include "ddfem/problem.hpp"
#include "ddfem/quadrature.hpp"
#include "ddfem/spaces.hpp"

namespace ddfem {

/// Per-element output of the diffusivity formula
///   xi_T(w) = h_T ||R(w)||_T / (A_T(w) + tau_T)   when Pe_T > 1, else 0,
/// with R(w) = beta.grad w + sigma w - f (the broken Laplacian of a
/// piecewise linear vanishes),
///   A_T(w) = ||beta||_inf,T |w|_1,T + ||sigma||_inf,T ||w||_0,T,
/// and tau_T = ||f||_0,T when f does not vanish on T, else 1. Always
/// 0 <= xi_T <= h_T.
struct XiParts {
    double xi = 0.0;
    double residual_norm = 0.0;
    double a_t = 0.0;
    double tau = 0.0;
    double peclet = 0.0;
};

using DDCoefficients = std::vector<XiParts>;

inline std::vector<double> xi_values(const DDCoefficients& c) {
    std::vector<double> v(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) v[i] = c[i].xi;
    return v;
}

/// Element Peclet number ||beta||_0,T h_T / (2 eps); the L2 norm carries
/// the area factor, so refining a constant-beta mesh drives Pe_T to zero.
inline double compute_peclet(const ProblemSpec& p, const ElementGeometry& geom, const QuadratureRule& rule) {
    double beta_sq = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2 x = geom.point(rule.points[q]);
        const Vec2 b = p.beta(x.x, x.y);
        beta_sq += rule.weights[q] * geom.area * b.dot(b);
    }
    return std::sqrt(beta_sq) * geom.diameter / (2.0 * p.epsilon);
}

/// Diffusivity of one element for the coarse-scale part of `w` (bubble
/// coefficients are ignored, which realizes the projection onto the
/// piecewise-linear space). `f_norm_global` sets the scale for deciding
/// whether f vanishes on the element.
inline XiParts compute_xi(const ProblemSpec& p, const Mesh& mesh, const ElementGeometry& geom,
                          const QuadratureRule& rule, int t, const FieldCoefficients& w,
                          double f_norm_global = 0.0) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    Vec2 grad{0.0, 0.0};
    for (int i = 0; i < 3; ++i)
        grad = grad + w.nodal[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])] *
                          geom.barycentric_gradient[static_cast<std::size_t>(i)];

    double res_sq = 0.0, w_sq = 0.0, f_sq = 0.0, beta_sq = 0.0;
    double beta_inf = 0.0, sigma_inf = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto& lam = rule.points[q];
        const Vec2 x = geom.point(lam);
        const Vec2 b = p.beta(x.x, x.y);
        const double sg = p.sigma(x.x, x.y);
        const double fx = p.f(x.x, x.y);
        double wv = 0.0;
        for (int i = 0; i < 3; ++i)
            wv += w.nodal[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])] * lam[static_cast<std::size_t>(i)];
        const double r = b.dot(grad) + sg * wv - fx;
        const double wt = rule.weights[q] * geom.area;
        res_sq += wt * r * r;
        w_sq += wt * wv * wv;
        f_sq += wt * fx * fx;
        beta_sq += wt * b.dot(b);
        beta_inf = std::max(beta_inf, b.norm());
        sigma_inf = std::max(sigma_inf, std::abs(sg));
    }

    XiParts parts;
    parts.residual_norm = std::sqrt(res_sq);
    const double w_h1 = grad.norm() * std::sqrt(geom.area);
    parts.a_t = beta_inf * w_h1 + sigma_inf * std::sqrt(w_sq);
    const double f_norm = std::sqrt(f_sq);
    parts.tau = f_norm > 1e-14 * (1.0 + f_norm_global) ? f_norm : 1.0;
    parts.peclet = std::sqrt(beta_sq) * geom.diameter / (2.0 * p.epsilon);
    parts.xi = parts.peclet > 1.0 ? geom.diameter * parts.residual_norm / (parts.a_t + parts.tau) : 0.0;
    return parts;
}

inline double global_f_norm(const ProblemSpec& p, const std::vector<ElementGeometry>& geoms,
                            const QuadratureRule& rule) {
    double s = 0.0;
    for (const auto& geom : geoms) {
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Vec2 x = geom.point(rule.points[q]);
            const double fx = p.f(x.x, x.y);
            s += rule.weights[q] * geom.area * fx * fx;
        }
    }
    return std::sqrt(s);
}

inline DDCoefficients compute_xi_all(const ProblemSpec& p, const Mesh& mesh,
                                     const std::vector<ElementGeometry>& geoms, const QuadratureRule& rule,
                                     const FieldCoefficients& w, double f_norm_global) {
    DDCoefficients c(static_cast<std::size_t>(mesh.n_triangles()));
    for (int t = 0; t < mesh.n_triangles(); ++t)
        c[static_cast<std::size_t>(t)] = compute_xi(p, mesh, geoms[static_cast<std::size_t>(t)], rule, t, w, f_norm_global);
    return c;
}

/// Damping weight of the diffusivity update. Freezes (returns 0) once the
/// element residual norm has stabilized to within 20 percent between two
/// consecutive iterates; the first update is always a half step.
inline double damping_factor(int k, double res_prev, double res_curr) {
    if (k >= 1 && std::abs(res_prev - res_curr) <= 0.2 * res_prev) return 0.0;
    return 0.5;
}

/// Upwind parameter h_T / (2 ||beta||_inf,T) (coth Pe_T - 1/Pe_T); zero on
/// elements where beta vanishes.
inline double supg_tau(const ProblemSpec& p, const ElementGeometry& geom, const QuadratureRule& rule) {
    double beta_inf = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2 x = geom.point(rule.points[q]);
        beta_inf = std::max(beta_inf, p.beta(x.x, x.y).norm());
    }
    if (beta_inf == 0.0) return 0.0;
    const double pe = compute_peclet(p, geom, rule);
    if (pe == 0.0) return 0.0;
    const double zeta = pe < 1e-4 ? pe / 3.0 - pe * pe * pe / 45.0 : 1.0 / std::tanh(pe) - 1.0 / pe;
    return geom.diameter / (2.0 * beta_inf) * zeta;
}

/// Streamline-diffusion solve on the piecewise-linear space alone; seeds
/// the fixed point. Returns a field with zero bubble block.
inline FieldCoefficients supg_initialize(const ProblemSpec& p, const Mesh& mesh, const DofMap& dofs,
                                         const QuadratureRule& rule) {
    const std::vector<ElementGeometry> geoms = all_geometries(mesh);
    TripletBuffer buf;
    std::vector<double> rhs(static_cast<std::size_t>(dofs.n_nodal), 0.0);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeometry& geom = geoms[static_cast<std::size_t>(t)];
        const double tau = supg_tau(p, geom, rule);
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        double local[3][3] = {};
        double load[3] = {};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& lam = rule.points[q];
            const Vec2 x = geom.point(lam);
            const Vec2 beta = p.beta(x.x, x.y);
            const double sigma = p.sigma(x.x, x.y);
            const double fx = p.f(x.x, x.y);
            const double w = rule.weights[q] * geom.area;
            for (int i = 0; i < 3; ++i) {
                const auto iu = static_cast<std::size_t>(i);
                const Vec2 gi = geom.barycentric_gradient[iu];
                const double stream_i = beta.dot(gi);
                load[i] += w * fx * (lam[iu] + tau * stream_i);
                for (int j = 0; j < 3; ++j) {
                    const auto ju = static_cast<std::size_t>(j);
                    const Vec2 gj = geom.barycentric_gradient[ju];
                    local[i][j] += w * (p.epsilon * gj.dot(gi) + beta.dot(gj) * lam[iu] + sigma * lam[ju] * lam[iu] +
                                        tau * (beta.dot(gj) + sigma * lam[ju]) * stream_i);
                }
            }
        }
        for (int i = 0; i < 3; ++i) {
            const int di = dofs.nodal_dof[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])];
            if (di < 0) continue;
            rhs[static_cast<std::size_t>(di)] += load[i];
            for (int j = 0; j < 3; ++j) {
                const int dj = dofs.nodal_dof[static_cast<std::size_t>(tri[static_cast<std::size_t>(j)])];
                if (dj >= 0) buf.add(di, dj, local[i][j]);
            }
        }
    }
    // Neumann data enters the plain load exactly as in the full assembly.
    bool have_neumann = false;
    for (const auto& e : mesh.boundary_edges) have_neumann = have_neumann || e.tag == BoundaryTag::Neumann;
    if (have_neumann) {
        if (!p.neumann) throw std::invalid_argument("supg_initialize: Neumann edge present but no flux data");
        std::vector<double> gn, gw;
        gauss_legendre_01(3, gn, gw);
        for (const auto& e : mesh.boundary_edges) {
            if (e.tag != BoundaryTag::Neumann) continue;
            const Vec2 a = mesh.vertices[static_cast<std::size_t>(e.v0)];
            const Vec2 b = mesh.vertices[static_cast<std::size_t>(e.v1)];
            const double len = (b - a).norm();
            const int d0 = dofs.nodal_dof[static_cast<std::size_t>(e.v0)];
            const int d1 = dofs.nodal_dof[static_cast<std::size_t>(e.v1)];
            for (int q = 0; q < 3; ++q) {
                const double s = gn[static_cast<std::size_t>(q)];
                const Vec2 x = a * (1.0 - s) + b * s;
                const double g = p.neumann(x.x, x.y) * gw[static_cast<std::size_t>(q)] * len;
                if (d0 >= 0) rhs[static_cast<std::size_t>(d0)] += g * (1.0 - s);
                if (d1 >= 0) rhs[static_cast<std::size_t>(d1)] += g * s;
            }
        }
    }

    FieldCoefficients f = FieldCoefficients::zeros(mesh);
    if (dofs.n_nodal > 0) {
        const std::vector<double> x = solve(compress(buf, dofs.n_nodal), rhs);
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            const int d = dofs.nodal_dof[static_cast<std::size_t>(v)];
            if (d >= 0) f.nodal[static_cast<std::size_t>(v)] = x[static_cast<std::size_t>(d)];
        }
    }
    return f;
}

struct FixedPointConfig {
    int max_iterations = 30;
    double tolerance = 1e-6;
    bool global_freezing = false;  // one damping weight for the whole mesh
    int assembly_degree = 6;
};

struct IterationRecord {
    int k = 0;
    double max_increment = 0.0;
    double dissipation = 0.0;
    int frozen_elements = 0;
};

struct SolveReport {
    int iterations = 0;
    bool converged = false;
    double final_increment = std::numeric_limits<double>::quiet_NaN();
    double max_solver_residual = 0.0;
    std::vector<IterationRecord> history;
};

struct DDSolveResult {
    FieldCoefficients u;
    /// Diagnostics evaluated at the final iterate; `xi` holds the damped
    /// coefficients used in the last solve.
    DDCoefficients xi;
    SolveReport report;
};

/// sum_T xi_T ||grad u||_0,T^2 with u the full two-scale field.
inline double dissipation_sum(const std::vector<double>& xi, const FieldCoefficients& u, const Mesh& mesh,
                              const std::vector<ElementGeometry>& geoms, const QuadratureRule& rule) {
    double s = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double x = xi[static_cast<std::size_t>(t)];
        if (x == 0.0) continue;
        const ElementGeometry& geom = geoms[static_cast<std::size_t>(t)];
        double g_sq = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Vec2 g = evaluate_field(u, mesh, geom, t, rule.points[q]).gradient;
            g_sq += rule.weights[q] * geom.area * g.dot(g);
        }
        s += x * g_sq;
    }
    return s;
}

/// Damped fixed point for the nonlinear scheme: start from the upwind
/// initializer with zero diffusivity, then alternate a damped diffusivity
/// update with a linear two-scale solve until the relative max-norm
/// increment of the vertex values drops below the tolerance or the
/// iteration budget runs out.
inline DDSolveResult fixed_point_solve(const ProblemSpec& p, const Mesh& mesh, const FixedPointConfig& cfg = {}) {
    if (cfg.max_iterations < 1) throw std::invalid_argument("fixed_point_solve: iteration budget must be positive");
    if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("fixed_point_solve: tolerance must be positive");
    const QuadratureRule rule = triangle_rule(cfg.assembly_degree);
    const DofMap dofs = dof_map_with_dirichlet(mesh);
    const std::vector<ElementGeometry> geoms = all_geometries(mesh);
    const double f_norm = global_f_norm(p, geoms, rule);
    const BilinearParts base = assemble_B_parts(p, mesh, geoms, dofs, rule);

    DDSolveResult out;
    out.u = supg_initialize(p, mesh, dofs, rule);
    DDCoefficients parts = compute_xi_all(p, mesh, geoms, rule, out.u, f_norm);
    std::vector<double> res_prev;
    std::vector<double> xi(static_cast<std::size_t>(mesh.n_triangles()), 0.0);

    for (int k = 0; k < cfg.max_iterations; ++k) {
        int frozen = 0;
        if (cfg.global_freezing) {
            double rp = 0.0, rc = 0.0;
            for (std::size_t t = 0; t < parts.size(); ++t) {
                if (k >= 1) rp += res_prev[t] * res_prev[t];
                rc += parts[t].residual_norm * parts[t].residual_norm;
            }
            const double w = damping_factor(k, std::sqrt(rp), std::sqrt(rc));
            if (w == 0.0) frozen = mesh.n_triangles();
            for (std::size_t t = 0; t < parts.size(); ++t) xi[t] = w * parts[t].xi + (1.0 - w) * xi[t];
        } else {
            for (std::size_t t = 0; t < parts.size(); ++t) {
                const double w = damping_factor(k, k >= 1 ? res_prev[t] : 0.0, parts[t].residual_norm);
                if (w == 0.0) ++frozen;
                xi[t] = w * parts[t].xi + (1.0 - w) * xi[t];
            }
        }

        TripletBuffer system = dd_triplets(xi, mesh, geoms, dofs, rule);
        system.append(base.triplets);
        double residual = 0.0;
        const std::vector<double> x = solve(compress(system, dofs.total), base.rhs, &residual);
        out.report.max_solver_residual = std::max(out.report.max_solver_residual, residual);
        const FieldCoefficients next = field_from_solution(mesh, dofs, x);

        double num = 0.0, den = 0.0;
        for (std::size_t v = 0; v < next.nodal.size(); ++v) {
            num = std::max(num, std::abs(next.nodal[v] - out.u.nodal[v]));
            den = std::max(den, std::abs(out.u.nodal[v]));
        }
        const double increment = den > 0.0 ? num / den : num;

        res_prev.resize(parts.size());
        for (std::size_t t = 0; t < parts.size(); ++t) res_prev[t] = parts[t].residual_norm;
        out.u = next;
        parts = compute_xi_all(p, mesh, geoms, rule, out.u, f_norm);

        out.report.history.push_back({k + 1, increment, dissipation_sum(xi, out.u, mesh, geoms, rule), frozen});
        out.report.iterations = k + 1;
        out.report.final_increment = increment;
        if (increment < cfg.tolerance) {
            out.report.converged = true;
            break;
        }
    }

    out.xi = std::move(parts);
    for (std::size_t t = 0; t < out.xi.size(); ++t) out.xi[t].xi = xi[t];
    return out;
}

}  // namespace ddfem
