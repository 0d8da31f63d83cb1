#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ddfem/mesh.hpp"

namespace ddfem {

/// Numbering for the two-scale space: one dof per unconstrained vertex
/// (piecewise linears) followed by one dof per element (cubic bubbles).
/// Constrained vertices map to -1.
struct DofMap {
    std::vector<int> nodal_dof;   // vertex -> dof index or -1
    std::vector<int> bubble_dof;  // element -> dof index
    int n_nodal = 0;
    int total = 0;

    bool constrained(int vertex) const { return nodal_dof[static_cast<std::size_t>(vertex)] < 0; }
};

/// All vertices free; used for assembling the full system before boundary
/// elimination.
inline DofMap dof_map_all_free(const Mesh& mesh) {
    DofMap d;
    d.nodal_dof.resize(static_cast<std::size_t>(mesh.n_vertices()));
    for (int v = 0; v < mesh.n_vertices(); ++v) d.nodal_dof[static_cast<std::size_t>(v)] = v;
    d.n_nodal = mesh.n_vertices();
    d.bubble_dof.resize(static_cast<std::size_t>(mesh.n_triangles()));
    for (int t = 0; t < mesh.n_triangles(); ++t) d.bubble_dof[static_cast<std::size_t>(t)] = d.n_nodal + t;
    d.total = d.n_nodal + mesh.n_triangles();
    return d;
}

/// Vertices touching a Dirichlet-tagged boundary edge are constrained; all
/// other vertices and every bubble stay free.
inline DofMap dof_map_with_dirichlet(const Mesh& mesh) {
    std::vector<char> on_dirichlet(static_cast<std::size_t>(mesh.n_vertices()), 0);
    for (const auto& e : mesh.boundary_edges) {
        if (e.tag == BoundaryTag::Dirichlet) {
            on_dirichlet[static_cast<std::size_t>(e.v0)] = 1;
            on_dirichlet[static_cast<std::size_t>(e.v1)] = 1;
        }
    }
    DofMap d;
    d.nodal_dof.assign(static_cast<std::size_t>(mesh.n_vertices()), -1);
    int next = 0;
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (!on_dirichlet[static_cast<std::size_t>(v)]) d.nodal_dof[static_cast<std::size_t>(v)] = next++;
    d.n_nodal = next;
    d.bubble_dof.resize(static_cast<std::size_t>(mesh.n_triangles()));
    for (int t = 0; t < mesh.n_triangles(); ++t) d.bubble_dof[static_cast<std::size_t>(t)] = next + t;
    d.total = next + mesh.n_triangles();
    return d;
}

/// Coefficients of a two-scale field. `nodal` holds one value per vertex
/// (constrained vertices carry their boundary value), `bubble` one value
/// per element. The splitting is unique: the coarse part interpolates the
/// vertex values, bubbles vanish at vertices.
struct FieldCoefficients {
    std::vector<double> nodal;
    std::vector<double> bubble;

    static FieldCoefficients zeros(const Mesh& mesh) {
        FieldCoefficients f;
        f.nodal.assign(static_cast<std::size_t>(mesh.n_vertices()), 0.0);
        f.bubble.assign(static_cast<std::size_t>(mesh.n_triangles()), 0.0);
        return f;
    }

    /// Coarse-scale projection: same nodal values, bubbles dropped.
    FieldCoefficients coarse() const {
        FieldCoefficients f;
        f.nodal = nodal;
        f.bubble.assign(bubble.size(), 0.0);
        return f;
    }
};

/// Cubic bubble on the reference element, normalized to 1 at the barycenter.
inline double bubble_value(const std::array<double, 3>& lambda) {
    return 27.0 * lambda[0] * lambda[1] * lambda[2];
}

inline Vec2 bubble_gradient(const ElementGeometry& geom, const std::array<double, 3>& lambda) {
    const auto& g = geom.barycentric_gradient;
    return 27.0 * (lambda[1] * lambda[2] * g[0] + lambda[0] * lambda[2] * g[1] + lambda[0] * lambda[1] * g[2]);
}

/// Values and gradients of the local basis [lambda_1, lambda_2, lambda_3, psi_T].
struct LocalBasis {
    std::array<double, 4> value;
    std::array<Vec2, 4> gradient;
};

inline LocalBasis local_basis(const ElementGeometry& geom, const std::array<double, 3>& lambda) {
    LocalBasis b;
    for (int i = 0; i < 3; ++i) {
        b.value[static_cast<std::size_t>(i)] = lambda[static_cast<std::size_t>(i)];
        b.gradient[static_cast<std::size_t>(i)] = geom.barycentric_gradient[static_cast<std::size_t>(i)];
    }
    b.value[3] = bubble_value(lambda);
    b.gradient[3] = bubble_gradient(geom, lambda);
    return b;
}

/// Vertex interpolant of a scalar function; bubbles set to zero.
inline FieldCoefficients interpolate_nodal(const Mesh& mesh, const std::function<double(double, double)>& u) {
    FieldCoefficients f = FieldCoefficients::zeros(mesh);
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        const Vec2& p = mesh.vertices[static_cast<std::size_t>(v)];
        f.nodal[static_cast<std::size_t>(v)] = u(p.x, p.y);
    }
    return f;
}

struct FieldSample {
    double value = 0.0;
    Vec2 gradient;
};

/// Evaluate a two-scale field inside element t at a barycentric point.
inline FieldSample evaluate_field(const FieldCoefficients& f, const Mesh& mesh, const ElementGeometry& geom,
                                  int t, const std::array<double, 3>& lambda) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    FieldSample s;
    for (int i = 0; i < 3; ++i) {
        const double c = f.nodal[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])];
        s.value += c * lambda[static_cast<std::size_t>(i)];
        s.gradient = s.gradient + c * geom.barycentric_gradient[static_cast<std::size_t>(i)];
    }
    const double cb = f.bubble[static_cast<std::size_t>(t)];
    if (cb != 0.0) {
        s.value += cb * bubble_value(lambda);
        s.gradient = s.gradient + cb * bubble_gradient(geom, lambda);
    }
    return s;
}

}  // namespace ddfem
