#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ddfem {

/// Quadrature rule on the reference triangle, stored in barycentric
/// coordinates. Reference weights sum to one, so
///   integral over T of f  ~=  |T| * sum_i w_i f(p_i).
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int exactness_degree = 0;
};

/// Gauss-Legendre nodes/weights on [0,1], weights summing to 1.
/// Nodes found by Newton iteration on the Legendre recurrence.
inline void gauss_legendre_01(int npts, std::vector<double>& nodes, std::vector<double>& weights) {
    if (npts < 1) throw std::invalid_argument("gauss_legendre_01: need at least one point");
    nodes.assign(static_cast<std::size_t>(npts), 0.0);
    weights.assign(static_cast<std::size_t>(npts), 0.0);
    const int n = npts;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-based initial guess on [-1,1].
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p1 = x;  // recurrence below handles n >= 2
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = (n == 1) ? x : p1;
            const double pm = (n == 1) ? 1.0 : p0;
            dp = n * (x * pn - pm) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
        nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
        weights[static_cast<std::size_t>(i)] = 0.5 * w;
        weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
    }
}

/// Conical-product rule on the triangle: tensor Gauss on the square mapped
/// by (u,v) -> (u, v(1-u)), Jacobian (1-u) folded into the weights. All
/// weights positive. Exact for total degree min_degree (1..10 supported;
/// higher degrees work too, capped only by sanity).
inline QuadratureRule triangle_rule(int min_degree) {
    if (min_degree < 1 || min_degree > 20) throw std::invalid_argument("triangle_rule: degree out of range");
    // x = u has polynomial degree a+b+1 after the Jacobian, y = v(1-u) keeps
    // degree b in v, so the u-direction needs one more degree than requested.
    const int mu = (min_degree + 3) / 2;  // 2*mu-1 >= min_degree+1
    const int mv = (min_degree + 2) / 2;  // 2*mv-1 >= min_degree
    std::vector<double> un, uw, vn, vw;
    gauss_legendre_01(mu, un, uw);
    gauss_legendre_01(mv, vn, vw);
    QuadratureRule rule;
    rule.exactness_degree = min_degree;
    rule.points.reserve(static_cast<std::size_t>(mu) * static_cast<std::size_t>(mv));
    rule.weights.reserve(rule.points.capacity());
    for (int i = 0; i < mu; ++i) {
        for (int j = 0; j < mv; ++j) {
            const double u = un[static_cast<std::size_t>(i)];
            const double x = u;
            const double y = vn[static_cast<std::size_t>(j)] * (1.0 - u);
            rule.points.push_back({1.0 - x - y, x, y});
            rule.weights.push_back(2.0 * uw[static_cast<std::size_t>(i)] * vw[static_cast<std::size_t>(j)] * (1.0 - u));
        }
    }
    // Renormalize: reference weights must sum to exactly 1 up to roundoff.
    double s = 0.0;
    for (double w : rule.weights) s += w;
    for (double& w : rule.weights) w /= s;
    return rule;
}

}  // namespace ddfem
