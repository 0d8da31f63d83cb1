#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace ddfem {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

enum class BoundaryTag { Dirichlet, Neumann };

struct BoundaryEdge {
    int v0 = -1;
    int v1 = -1;
    BoundaryTag tag = BoundaryTag::Dirichlet;
};

/// Which way the diagonal of each grid cell runs.
enum class Diagonal { BottomLeftToTopRight, TopLeftToBottomRight };

/// Conforming triangulation of the unit square. Plain data; treat as
/// immutable once handed to a dof map or assembler.
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW vertex indices
    std::vector<BoundaryEdge> boundary_edges;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
};

/// Per-element geometry: area, diameter, and the constant gradients of the
/// three barycentric coordinates.
struct ElementGeometry {
    std::array<Vec2, 3> vertex;
    double area = 0.0;
    double diameter = 0.0;
    std::array<Vec2, 3> barycentric_gradient;

    Vec2 point(const std::array<double, 3>& lambda) const {
        return vertex[0] * lambda[0] + vertex[1] * lambda[1] + vertex[2] * lambda[2];
    }
};

inline ElementGeometry element_geometry(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles.at(static_cast<std::size_t>(t));
    ElementGeometry g;
    for (int i = 0; i < 3; ++i) g.vertex[static_cast<std::size_t>(i)] = mesh.vertices[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])];
    const Vec2 a = g.vertex[0], b = g.vertex[1], c = g.vertex[2];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if (det <= 0.0) throw std::invalid_argument("element_geometry: degenerate or clockwise triangle");
    g.area = 0.5 * det;
    g.diameter = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    g.barycentric_gradient[0] = {(b.y - c.y) / det, (c.x - b.x) / det};
    g.barycentric_gradient[1] = {(c.y - a.y) / det, (a.x - c.x) / det};
    g.barycentric_gradient[2] = {(a.y - b.y) / det, (b.x - a.x) / det};
    return g;
}

/// Uniform n x n grid of the unit square, each cell split into two
/// triangles. (n+1)^2 vertices, 2n^2 triangles, 4n boundary edges, all
/// tagged Dirichlet. Vertex (i,j) sits at (i/n, j/n) with index j*(n+1)+i.
inline Mesh generate_uniform_mesh(int n, Diagonal diag = Diagonal::BottomLeftToTopRight) {
    if (n < 1) throw std::invalid_argument("generate_uniform_mesh: n must be >= 1");
    Mesh mesh;
    const int m = n + 1;
    mesh.vertices.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
    const double h = 1.0 / n;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
            mesh.vertices.push_back({i * h, j * h});

    auto vid = [m](int i, int j) { return j * m + i; };
    mesh.triangles.reserve(2u * static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            if (diag == Diagonal::BottomLeftToTopRight) {
                mesh.triangles.push_back({v00, v10, v11});
                mesh.triangles.push_back({v00, v11, v01});
            } else {
                mesh.triangles.push_back({v00, v10, v01});
                mesh.triangles.push_back({v10, v11, v01});
            }
        }
    }

    mesh.boundary_edges.reserve(4u * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), BoundaryTag::Dirichlet});
    for (int j = 0; j < n; ++j) mesh.boundary_edges.push_back({vid(n, j), vid(n, j + 1), BoundaryTag::Dirichlet});
    for (int i = 0; i < n; ++i) mesh.boundary_edges.push_back({vid(i + 1, n), vid(i, n), BoundaryTag::Dirichlet});
    for (int j = 0; j < n; ++j) mesh.boundary_edges.push_back({vid(0, j + 1), vid(0, j), BoundaryTag::Dirichlet});
    return mesh;
}

/// Retag boundary edges whose midpoint satisfies the predicate.
template <typename Pred>
void retag_boundary(Mesh& mesh, BoundaryTag tag, Pred&& on_edge_midpoint) {
    for (auto& e : mesh.boundary_edges) {
        const Vec2 mid = (mesh.vertices[static_cast<std::size_t>(e.v0)] + mesh.vertices[static_cast<std::size_t>(e.v1)]) * 0.5;
        if (on_edge_midpoint(mid)) e.tag = tag;
    }
}

/// Plain-text export: vertex count, "x y" lines, triangle count, "i j k"
/// lines (0-based).
inline void write_mesh_text(const Mesh& mesh, std::ostream& out) {
    out << mesh.n_vertices() << "\n";
    for (const auto& v : mesh.vertices) out << v.x << " " << v.y << "\n";
    out << mesh.n_triangles() << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
}

}  // namespace ddfem
