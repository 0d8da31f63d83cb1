#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ddfem/mesh.hpp"
#include "ddfem/quadrature.hpp"
#include "ddfem/spaces.hpp"
#include "oracles.hpp"

using namespace ddfem;

namespace {

Mesh one_triangle(const oracle::Tri& t) {
    Mesh mesh;
    mesh.vertices = {{t.x[0], t.y[0]}, {t.x[1], t.y[1]}, {t.x[2], t.y[2]}};
    mesh.triangles = {{0, 1, 2}};
    return mesh;
}

double quad_integral(const ElementGeometry& g, const QuadratureRule& rule,
                     const std::function<double(const std::array<double, 3>&)>& f) {
    double s = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) s += rule.weights[q] * g.area * f(rule.points[q]);
    return s;
}

}  // namespace

TEST_CASE("bubble vanishes on the element boundary and peaks at the center") {
    CHECK(bubble_value({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}) == Catch::Approx(1.0).margin(1e-15));
    CHECK(bubble_value({1.0, 0.0, 0.0}) == 0.0);
    CHECK(bubble_value({0.5, 0.5, 0.0}) == 0.0);
    CHECK(bubble_value({0.0, 0.25, 0.75}) == 0.0);
    // interior maximum: nearby points are below 1
    CHECK(bubble_value({0.40, 0.30, 0.30}) < 1.0);
    CHECK(bubble_value({0.30, 0.40, 0.30}) < 1.0);
}

TEST_CASE("bubble moments") {
    // closed forms: int psi = 0.45 A, int psi l_i = 0.15 A, int psi^2 = 81 A / 280
    const Mesh mesh = generate_uniform_mesh(2);
    const ElementGeometry g = element_geometry(mesh, 3);
    const QuadratureRule rule = triangle_rule(6);
    const double A = g.area;

    const double m0 = quad_integral(g, rule, [](const auto& l) { return bubble_value(l); });
    CHECK(m0 == Catch::Approx(0.45 * A).epsilon(1e-13));
    for (int i = 0; i < 3; ++i) {
        const double mi = quad_integral(g, rule, [i](const auto& l) {
            return bubble_value(l) * l[static_cast<std::size_t>(i)];
        });
        CHECK(mi == Catch::Approx(0.15 * A).epsilon(1e-13));
    }
    const double m2 = quad_integral(g, rule, [](const auto& l) {
        const double b = bubble_value(l);
        return b * b;
    });
    CHECK(m2 == Catch::Approx(81.0 * A / 280.0).epsilon(1e-13));
}

TEST_CASE("bubble gradient is orthogonal to linear gradients") {
    oracle::Rng rng(411u);
    const QuadratureRule rule = triangle_rule(4);
    for (int rep = 0; rep < 20; ++rep) {
        const oracle::Tri t = oracle::random_triangle(rng);
        const Mesh mesh = one_triangle(t);
        const ElementGeometry g = element_geometry(mesh, 0);
        for (int i = 0; i < 3; ++i) {
            const Vec2 gl = g.barycentric_gradient[static_cast<std::size_t>(i)];
            const double ip = quad_integral(g, rule, [&](const auto& l) {
                return bubble_gradient(g, l).dot(gl);
            });
            // scale by the size of the factors actually integrated
            const double scale = g.area * gl.norm() / g.diameter;
            CHECK(std::abs(ip) <= 1e-13 * std::max(1.0, scale));
        }
    }
}

TEST_CASE("bubble stiffness on right isoceles elements is 8.1") {
    // int |grad psi|^2 is invariant under similarity transforms
    for (int n : {1, 4}) {
        const Mesh mesh = generate_uniform_mesh(n);
        const ElementGeometry g = element_geometry(mesh, 0);
        const double s = quad_integral(g, triangle_rule(4), [&](const auto& l) {
            const Vec2 gb = bubble_gradient(g, l);
            return gb.dot(gb);
        });
        CHECK(s == Catch::Approx(8.1).epsilon(1e-13));
    }
}

TEST_CASE("two-scale energy splits by orthogonality") {
    // |w + a psi|_1^2 = |w|_1^2 + a^2 |psi|_1^2 on every element
    oracle::Rng rng(73u);
    const QuadratureRule rule = triangle_rule(4);
    for (int rep = 0; rep < 10; ++rep) {
        const oracle::Tri t = oracle::random_triangle(rng);
        const Mesh mesh = one_triangle(t);
        const ElementGeometry g = element_geometry(mesh, 0);
        FieldCoefficients f = FieldCoefficients::zeros(mesh);
        for (auto& v : f.nodal) v = rng.uniform(-2.0, 2.0);
        f.bubble[0] = rng.uniform(-2.0, 2.0);

        const double full = quad_integral(g, rule, [&](const auto& l) {
            const Vec2 gr = evaluate_field(f, mesh, g, 0, l).gradient;
            return gr.dot(gr);
        });
        const FieldCoefficients fc = f.coarse();
        const double coarse = quad_integral(g, rule, [&](const auto& l) {
            const Vec2 gr = evaluate_field(fc, mesh, g, 0, l).gradient;
            return gr.dot(gr);
        });
        const double bub = quad_integral(g, rule, [&](const auto& l) {
            const Vec2 gb = bubble_gradient(g, l);
            return gb.dot(gb);
        });
        CHECK(full == Catch::Approx(coarse + f.bubble[0] * f.bubble[0] * bub).epsilon(1e-12));
    }
}

TEST_CASE("field evaluation matches an independent polynomial route") {
    oracle::Rng rng(2026u);
    for (int rep = 0; rep < 10; ++rep) {
        const oracle::Tri t = oracle::random_triangle(rng);
        const Mesh mesh = one_triangle(t);
        const ElementGeometry g = element_geometry(mesh, 0);
        FieldCoefficients f = FieldCoefficients::zeros(mesh);
        std::array<double, 3> w;
        for (int i = 0; i < 3; ++i) {
            w[static_cast<std::size_t>(i)] = rng.uniform(-1.0, 1.0);
            f.nodal[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)];
        }
        f.bubble[0] = rng.uniform(-1.0, 1.0);
        const oracle::BaryPoly poly = oracle::local_field(w, f.bubble[0]);
        const oracle::BaryVec grad = oracle::gradient(poly, t);

        const double l1 = rng.uniform(0.05, 0.5), l2 = rng.uniform(0.05, 0.4);
        const std::array<double, 3> lambda = {1.0 - l1 - l2, l1, l2};
        const FieldSample s = evaluate_field(f, mesh, g, 0, lambda);
        CHECK(s.value == Catch::Approx(poly.eval(lambda[0], lambda[1], lambda[2])).margin(1e-12));
        CHECK(s.gradient.x == Catch::Approx(grad.x.eval(lambda[0], lambda[1], lambda[2])).margin(1e-11));
        CHECK(s.gradient.y == Catch::Approx(grad.y.eval(lambda[0], lambda[1], lambda[2])).margin(1e-11));
    }
}

TEST_CASE("pure bubble fields are flat at the barycenter") {
    const Mesh mesh = generate_uniform_mesh(2);
    const ElementGeometry g = element_geometry(mesh, 5);
    FieldCoefficients f = FieldCoefficients::zeros(mesh);
    f.bubble[5] = 3.25;
    const FieldSample s = evaluate_field(f, mesh, g, 5, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    CHECK(s.value == Catch::Approx(3.25).epsilon(1e-14));
    CHECK(std::abs(s.gradient.x) < 1e-12);
    CHECK(std::abs(s.gradient.y) < 1e-12);
}

TEST_CASE("dof maps") {
    const Mesh mesh = generate_uniform_mesh(4);

    SECTION("all vertices free") {
        const DofMap dofs = dof_map_all_free(mesh);
        CHECK(dofs.n_nodal == 25);
        CHECK(dofs.total == 25 + 32);
        for (int v = 0; v < mesh.n_vertices(); ++v) CHECK_FALSE(dofs.constrained(v));
        for (int t = 0; t < mesh.n_triangles(); ++t)
            CHECK(dofs.bubble_dof[static_cast<std::size_t>(t)] == dofs.n_nodal + t);
    }

    SECTION("homogeneous boundary") {
        const DofMap dofs = dof_map_with_dirichlet(mesh);
        CHECK(dofs.n_nodal == 9);  // interior 3x3 grid
        CHECK(dofs.total == 9 + 32);
        int constrained = 0;
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            const Vec2& p = mesh.vertices[static_cast<std::size_t>(v)];
            const bool on_boundary = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
            CHECK(dofs.constrained(v) == on_boundary);
            if (dofs.constrained(v)) ++constrained;
        }
        CHECK(constrained == 16);
        // dof indices are a bijection onto 0..n_nodal-1
        std::vector<char> seen(static_cast<std::size_t>(dofs.n_nodal), 0);
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            const int d = dofs.nodal_dof[static_cast<std::size_t>(v)];
            if (d < 0) continue;
            REQUIRE(d < dofs.n_nodal);
            CHECK(seen[static_cast<std::size_t>(d)] == 0);
            seen[static_cast<std::size_t>(d)] = 1;
        }
    }
}

TEST_CASE("vertex interpolation reproduces linear functions") {
    const Mesh mesh = generate_uniform_mesh(3);
    const FieldCoefficients f = interpolate_nodal(mesh, [](double x, double y) { return 2.0 * x - 0.7 * y + 0.3; });
    for (double b : f.bubble) CHECK(b == 0.0);
    oracle::Rng rng(9u);
    for (int rep = 0; rep < 25; ++rep) {
        const int t = rng.uniform_int(0, mesh.n_triangles() - 1);
        const ElementGeometry g = element_geometry(mesh, t);
        const double l1 = rng.uniform(0.0, 1.0), l2 = rng.uniform(0.0, 1.0 - l1);
        const std::array<double, 3> lambda = {1.0 - l1 - l2, l1, l2};
        const Vec2 p = g.point(lambda);
        const FieldSample s = evaluate_field(f, mesh, g, t, lambda);
        CHECK(s.value == Catch::Approx(2.0 * p.x - 0.7 * p.y + 0.3).margin(1e-13));
        CHECK(s.gradient.x == Catch::Approx(2.0).margin(1e-12));
        CHECK(s.gradient.y == Catch::Approx(-0.7).margin(1e-12));
    }
}

TEST_CASE("vertex interpolation converges at second order") {
    auto u = [](double x, double y) {
        return 100.0 * x * x * (1.0 - x) * (1.0 - x) * y * (1.0 - y) * (1.0 - 2.0 * y);
    };
    const QuadratureRule rule = triangle_rule(8);
    std::vector<double> errors;
    for (int n : {8, 16, 32}) {
        const Mesh mesh = generate_uniform_mesh(n);
        const FieldCoefficients f = interpolate_nodal(mesh, u);
        double e2 = 0.0;
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const ElementGeometry g = element_geometry(mesh, t);
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const Vec2 p = g.point(rule.points[q]);
                const double d = u(p.x, p.y) - evaluate_field(f, mesh, g, t, rule.points[q]).value;
                e2 += rule.weights[q] * g.area * d * d;
            }
        }
        errors.push_back(std::sqrt(e2));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const double rate = std::log2(errors[i] / errors[i + 1]);
        CHECK(rate > 1.9);
        CHECK(rate < 2.1);
    }
}
