#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ddfem/linalg.hpp"
#include "ddfem/mesh.hpp"
#include "ddfem/problem.hpp"
#include "ddfem/quadrature.hpp"
#include "ddfem/spaces.hpp"

namespace ddfem {

struct AssembledSystem {
    CompressedSparseMatrix matrix;
    std::vector<double> rhs;
};

/// Uncompressed assembly of the stabilized-free bilinear form
///   B(u,v) = eps (grad u, grad v) + (beta.grad u, v) + (sigma u, v)
/// over the 4-function local basis (three vertex functions plus the
/// bubble), and of the load (f,v) plus Neumann edge terms. Rows and columns
/// of constrained dofs are dropped, which is exact for homogeneous
/// Dirichlet data; use apply_dirichlet for a nonzero lift.
struct BilinearParts {
    TripletBuffer triplets;
    std::vector<double> rhs;
};

inline std::vector<ElementGeometry> all_geometries(const Mesh& mesh) {
    std::vector<ElementGeometry> g;
    g.reserve(static_cast<std::size_t>(mesh.n_triangles()));
    for (int t = 0; t < mesh.n_triangles(); ++t) g.push_back(element_geometry(mesh, t));
    return g;
}

inline void local_dofs(const Mesh& mesh, const DofMap& dofs, int t, std::array<int, 4>& dof) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) dof[static_cast<std::size_t>(i)] = dofs.nodal_dof[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])];
    dof[3] = dofs.bubble_dof[static_cast<std::size_t>(t)];
}

inline BilinearParts assemble_B_parts(const ProblemSpec& p, const Mesh& mesh,
                                      const std::vector<ElementGeometry>& geoms, const DofMap& dofs,
                                      const QuadratureRule& rule) {
    BilinearParts parts;
    parts.rhs.assign(static_cast<std::size_t>(dofs.total), 0.0);
    parts.triplets.entries.reserve(16u * static_cast<std::size_t>(mesh.n_triangles()));
    std::array<int, 4> dof{};
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeometry& geom = geoms[static_cast<std::size_t>(t)];
        double local[4][4] = {};
        double load[4] = {};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const LocalBasis basis = local_basis(geom, rule.points[q]);
            const Vec2 x = geom.point(rule.points[q]);
            const Vec2 beta = p.beta(x.x, x.y);
            const double sigma = p.sigma(x.x, x.y);
            const double fx = p.f(x.x, x.y);
            const double w = rule.weights[q] * geom.area;
            for (int i = 0; i < 4; ++i) {
                const auto iu = static_cast<std::size_t>(i);
                load[i] += w * fx * basis.value[iu];
                for (int j = 0; j < 4; ++j) {
                    const auto ju = static_cast<std::size_t>(j);
                    local[i][j] += w * (p.epsilon * basis.gradient[ju].dot(basis.gradient[iu]) +
                                        beta.dot(basis.gradient[ju]) * basis.value[iu] +
                                        sigma * basis.value[ju] * basis.value[iu]);
                }
            }
        }
        local_dofs(mesh, dofs, t, dof);
        for (int i = 0; i < 4; ++i) {
            if (dof[static_cast<std::size_t>(i)] < 0) continue;
            parts.rhs[static_cast<std::size_t>(dof[static_cast<std::size_t>(i)])] += load[i];
            for (int j = 0; j < 4; ++j)
                if (dof[static_cast<std::size_t>(j)] >= 0)
                    parts.triplets.add(dof[static_cast<std::size_t>(i)], dof[static_cast<std::size_t>(j)], local[i][j]);
        }
    }

    // Neumann edges: eps grad(u).n = g contributes (g, v) on the edge. Only
    // the two endpoint vertex functions are nonzero there.
    bool have_neumann = false;
    for (const auto& e : mesh.boundary_edges) have_neumann = have_neumann || e.tag == BoundaryTag::Neumann;
    if (have_neumann) {
        if (!p.neumann) throw std::invalid_argument("assemble_B: Neumann edge present but no flux data");
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
                if (d0 >= 0) parts.rhs[static_cast<std::size_t>(d0)] += g * (1.0 - s);
                if (d1 >= 0) parts.rhs[static_cast<std::size_t>(d1)] += g * s;
            }
        }
    }
    return parts;
}

inline AssembledSystem assemble_B(const ProblemSpec& p, const Mesh& mesh, const DofMap& dofs,
                                  const QuadratureRule& rule) {
    BilinearParts parts = assemble_B_parts(p, mesh, all_geometries(mesh), dofs, rule);
    return {compress(parts.triplets, dofs.total), std::move(parts.rhs)};
}

/// Triplets of the element-diffusion term sum_T xi_T (grad u, grad v)_T.
inline TripletBuffer dd_triplets(const std::vector<double>& xi, const Mesh& mesh,
                                 const std::vector<ElementGeometry>& geoms, const DofMap& dofs,
                                 const QuadratureRule& rule) {
    if (static_cast<int>(xi.size()) != mesh.n_triangles())
        throw std::invalid_argument("dd_triplets: one coefficient per element required");
    TripletBuffer buf;
    std::array<int, 4> dof{};
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double x = xi[static_cast<std::size_t>(t)];
        if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("dd_triplets: coefficients must be finite and nonnegative");
        if (x == 0.0) continue;
        const ElementGeometry& geom = geoms[static_cast<std::size_t>(t)];
        double local[4][4] = {};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const LocalBasis basis = local_basis(geom, rule.points[q]);
            const double w = rule.weights[q] * geom.area * x;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    local[i][j] += w * basis.gradient[static_cast<std::size_t>(j)].dot(basis.gradient[static_cast<std::size_t>(i)]);
        }
        local_dofs(mesh, dofs, t, dof);
        for (int i = 0; i < 4; ++i) {
            if (dof[static_cast<std::size_t>(i)] < 0) continue;
            for (int j = 0; j < 4; ++j)
                if (dof[static_cast<std::size_t>(j)] >= 0)
                    buf.add(dof[static_cast<std::size_t>(i)], dof[static_cast<std::size_t>(j)], local[i][j]);
        }
    }
    return buf;
}

inline CompressedSparseMatrix assemble_dd_matrix(const std::vector<double>& xi, const Mesh& mesh,
                                                 const DofMap& dofs, const QuadratureRule& rule) {
    return compress(dd_triplets(xi, mesh, all_geometries(mesh), dofs, rule), dofs.total);
}

/// Eliminate Dirichlet dofs from a system assembled with every vertex free.
/// `boundary_values` gives the prescribed value at each vertex (one entry
/// per vertex; only constrained ones are read). Returns the reduced system
/// on the dof_map_with_dirichlet numbering with the lifted right-hand side
///   rhs_free - A_free,constrained * values.
inline AssembledSystem apply_dirichlet(const AssembledSystem& full, const Mesh& mesh,
                                       const std::vector<double>& boundary_values) {
    if (static_cast<int>(boundary_values.size()) != mesh.n_vertices())
        throw std::invalid_argument("apply_dirichlet: need one boundary value per vertex");
    const DofMap free = dof_map_all_free(mesh);
    if (full.matrix.n != free.total || static_cast<int>(full.rhs.size()) != free.total)
        throw std::invalid_argument("apply_dirichlet: system was not assembled on the all-free dof map");
    const DofMap reduced = dof_map_with_dirichlet(mesh);

    std::vector<double> lift(static_cast<std::size_t>(free.total), 0.0);
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (reduced.constrained(v)) lift[static_cast<std::size_t>(v)] = boundary_values[static_cast<std::size_t>(v)];
    const std::vector<double> correction = full.matrix.multiply(lift);

    // full dof -> reduced dof (or -1)
    std::vector<int> remap(static_cast<std::size_t>(free.total), -1);
    for (int v = 0; v < mesh.n_vertices(); ++v) remap[static_cast<std::size_t>(v)] = reduced.nodal_dof[static_cast<std::size_t>(v)];
    for (int t = 0; t < mesh.n_triangles(); ++t)
        remap[static_cast<std::size_t>(free.bubble_dof[static_cast<std::size_t>(t)])] = reduced.bubble_dof[static_cast<std::size_t>(t)];

    TripletBuffer buf;
    std::vector<double> rhs(static_cast<std::size_t>(reduced.total), 0.0);
    for (int r = 0; r < full.matrix.n; ++r) {
        const int rr = remap[static_cast<std::size_t>(r)];
        if (rr < 0) continue;
        rhs[static_cast<std::size_t>(rr)] = full.rhs[static_cast<std::size_t>(r)] - correction[static_cast<std::size_t>(r)];
        for (int k = full.matrix.row_ptr[static_cast<std::size_t>(r)]; k < full.matrix.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
            const int cc = remap[static_cast<std::size_t>(full.matrix.col_idx[static_cast<std::size_t>(k)])];
            if (cc >= 0) buf.add(rr, cc, full.matrix.values[static_cast<std::size_t>(k)]);
        }
    }
    return {compress(buf, reduced.total), std::move(rhs)};
}

/// Expand a reduced solution vector into field coefficients, filling
/// constrained vertices from `boundary_values` (zeros when omitted).
inline FieldCoefficients field_from_solution(const Mesh& mesh, const DofMap& dofs, const std::vector<double>& x,
                                             const std::vector<double>* boundary_values = nullptr) {
    if (static_cast<int>(x.size()) != dofs.total) throw std::invalid_argument("field_from_solution: dimension mismatch");
    FieldCoefficients f = FieldCoefficients::zeros(mesh);
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        const int d = dofs.nodal_dof[static_cast<std::size_t>(v)];
        if (d >= 0)
            f.nodal[static_cast<std::size_t>(v)] = x[static_cast<std::size_t>(d)];
        else if (boundary_values)
            f.nodal[static_cast<std::size_t>(v)] = (*boundary_values)[static_cast<std::size_t>(v)];
    }
    for (int t = 0; t < mesh.n_triangles(); ++t)
        f.bubble[static_cast<std::size_t>(t)] = x[static_cast<std::size_t>(dofs.bubble_dof[static_cast<std::size_t>(t)])];
    return f;
}

}  // namespace ddfem
