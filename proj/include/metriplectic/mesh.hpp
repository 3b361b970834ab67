/* Copyright 2026 The metriplectic-landau Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "metriplectic/errors.hpp"

namespace metriplectic {

using Vec2 = Eigen::Vector2d;

/// Axis-aligned rectangular cell given by its lower-left and upper-right corners.
struct Cell {
    Vec2 lower;
    Vec2 upper;

    double area() const { return (upper.x() - lower.x()) * (upper.y() - lower.y()); }
};

/// Uniform structured mesh of the truncated velocity box [-v_max, v_max]^2.
///
/// Cells are stored row-major in (ix, iy) with ix fastest, so cell (ix, iy)
/// lives at index iy * n_cells + ix. The mesh is immutable once built.
struct VelocityMesh {
    static constexpr int dimension = 2;

    double v_max = 0.0;
    int n_cells = 0;
    std::vector<Cell> cells;

    double cell_width() const { return 2.0 * v_max / n_cells; }
    double domain_area() const { return 4.0 * v_max * v_max; }
    std::size_t cell_index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(n_cells) +
               static_cast<std::size_t>(ix);
    }
};

/// One quadrature point in physical coordinates.
struct QuadraturePoint {
    Vec2 coord;
    double weight;
    std::size_t cell;
};

/// Tensor-product Gauss-Legendre rule on every cell of a mesh.
///
/// Points are ordered cell-major; inside a cell the first axis runs fastest.
struct QuadratureRule {
    int order = 0;
    std::size_t points_per_cell = 0;
    std::vector<QuadraturePoint> points;

    std::size_t size() const { return points.size(); }
};

namespace detail {

/// Legendre polynomial P_n(x) and its derivative by the three-term recurrence.
inline void legendre(int n, double x, double& p, double& dp) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double p = 0.0;
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            legendre(n, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        legendre(n, x, p, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        nodes[lo] = -x;
        nodes[hi] = x;
        weights[lo] = w;
        weights[hi] = w;
    }
    if (n % 2 == 1) {
        nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    }
}

} // namespace detail

inline VelocityMesh build_mesh(double v_max, int n_cells) {
    if (!(v_max > 0.0) || !std::isfinite(v_max)) {
        throw ConfigError("mesh: v_max must be positive and finite");
    }
    if (n_cells < 1) {
        throw ConfigError("mesh: n_cells must be at least 1");
    }
    VelocityMesh mesh;
    mesh.v_max = v_max;
    mesh.n_cells = n_cells;
    mesh.cells.reserve(static_cast<std::size_t>(n_cells) * static_cast<std::size_t>(n_cells));
    // Corners are computed from integer indices so neighbouring cells share
    // bit-identical edges.
    auto edge = [&](int k) { return -v_max + 2.0 * v_max * k / n_cells; };
    for (int iy = 0; iy < n_cells; ++iy) {
        for (int ix = 0; ix < n_cells; ++ix) {
            mesh.cells.push_back(Cell{Vec2(edge(ix), edge(iy)), Vec2(edge(ix + 1), edge(iy + 1))});
        }
    }
    return mesh;
}

inline QuadratureRule build_quadrature(const VelocityMesh& mesh, int order) {
    if (order < 1) {
        throw ConfigError("quadrature: order must be at least 1");
    }
    std::vector<double> nodes;
    std::vector<double> weights;
    detail::gauss_legendre(order, nodes, weights);

    QuadratureRule rule;
    rule.order = order;
    rule.points_per_cell = static_cast<std::size_t>(order) * static_cast<std::size_t>(order);
    rule.points.reserve(mesh.cells.size() * rule.points_per_cell);
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        const Cell& cell = mesh.cells[c];
        const Vec2 mid = 0.5 * (cell.lower + cell.upper);
        const Vec2 half = 0.5 * (cell.upper - cell.lower);
        for (int j = 0; j < order; ++j) {
            for (int i = 0; i < order; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                const auto uj = static_cast<std::size_t>(j);
                rule.points.push_back(QuadraturePoint{
                    Vec2(mid.x() + half.x() * nodes[ui], mid.y() + half.y() * nodes[uj]),
                    weights[ui] * weights[uj] * half.x() * half.y(), c});
            }
        }
    }
    return rule;
}

} // namespace metriplectic
