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
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "metriplectic/config.hpp"
#include "metriplectic/fem.hpp"
#include "metriplectic/mesh.hpp"
#include "metriplectic/problem.hpp"
#include "metriplectic/thermo.hpp"

namespace testing_support {

using metriplectic::Index;
using metriplectic::Vec2;
using metriplectic::Vector;

/// Seeded source of random test inputs.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }

    Vec2 point(double r) { return Vec2(uniform(-r, r), uniform(-r, r)); }

    Vector vector(Index n, double a, double b) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) {
            v(i) = uniform(a, b);
        }
        return v;
    }

    /// Positive nodal values with a smooth bump plus noise, so every
    /// quadrature value of a degree-1 field stays positive.
    Vector positive_state(const metriplectic::FunctionSpace& space) {
        const Vec2 c = point(0.3 * space.mesh.v_max);
        const double t = uniform(0.5, 2.0) * space.mesh.v_max * space.mesh.v_max / 8.0;
        Vector v(space.n_dof);
        for (Index i = 0; i < space.n_dof; ++i) {
            const double r2 = (space.dof_coords[static_cast<std::size_t>(i)] - c).squaredNorm();
            v(i) = std::exp(-r2 / (2.0 * t)) * uniform(0.5, 1.5) + uniform(0.01, 0.1);
        }
        return v;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline std::vector<metriplectic::GaussianComponent> bi_maxwellian() {
    return {{1.0, Vec2(2.0, 0.0), 0.8}, {1.0, Vec2(-2.0, 0.0), 0.8}};
}

inline metriplectic::CollisionProblem small_problem(int degree = 2, int n_cells = 4, double v_max = 5.0,
                                                    metriplectic::ThermoModel model = {}) {
    metriplectic::DiscretizationParams p;
    p.v_max = v_max;
    p.n_cells = n_cells;
    p.degree = degree;
    p.energy_tracking = degree == 2;
    return metriplectic::make_problem(p, model);
}

/// Global shape functions evaluated from scratch: the cell containing x, the
/// local Lagrange nodes of that cell and a coordinate lookup of the global dof.
struct ShapeValue {
    Index dof;
    double value;
    Vec2 grad;
};

class OracleBasis {
public:
    explicit OracleBasis(const metriplectic::FunctionSpace& space) : space_(space) {
        for (Index i = 0; i < space.n_dof; ++i) {
            const Vec2& x = space.dof_coords[static_cast<std::size_t>(i)];
            index_[key(x)] = i;
        }
    }

    /// Shape functions of cell `cell` at x (x may lie on the cell boundary).
    std::vector<ShapeValue> at(const Vec2& x, std::size_t cell) const {
        const auto& c = space_.mesh.cells[cell];
        const int p = space_.degree;
        std::vector<double> nx(static_cast<std::size_t>(p + 1));
        std::vector<double> ny(static_cast<std::size_t>(p + 1));
        for (int k = 0; k <= p; ++k) {
            nx[static_cast<std::size_t>(k)] = c.lower.x() + (c.upper.x() - c.lower.x()) * k / p;
            ny[static_cast<std::size_t>(k)] = c.lower.y() + (c.upper.y() - c.lower.y()) * k / p;
        }
        std::vector<ShapeValue> out;
        for (int b = 0; b <= p; ++b) {
            for (int a = 0; a <= p; ++a) {
                const auto [lx, dlx] = lagrange(nx, a, x.x());
                const auto [ly, dly] = lagrange(ny, b, x.y());
                const Vec2 node(nx[static_cast<std::size_t>(a)], ny[static_cast<std::size_t>(b)]);
                out.push_back({index_.at(key(node)), lx * ly, Vec2(dlx * ly, lx * dly)});
            }
        }
        return out;
    }

private:
    static std::pair<long long, long long> key(const Vec2& x) {
        return {std::llround(x.x() * 1e9), std::llround(x.y() * 1e9)};
    }

    /// Value and derivative of the a-th Lagrange polynomial on the given nodes.
    static std::pair<double, double> lagrange(const std::vector<double>& nodes, int a, double x) {
        double value = 1.0;
        double deriv = 0.0;
        const double xa = nodes[static_cast<std::size_t>(a)];
        for (std::size_t b = 0; b < nodes.size(); ++b) {
            if (static_cast<int>(b) == a) {
                continue;
            }
            const double factor = (x - nodes[b]) / (xa - nodes[b]);
            deriv = deriv * factor + value / (xa - nodes[b]);
            value *= factor;
        }
        return {value, deriv};
    }

    const metriplectic::FunctionSpace& space_;
    std::map<std::pair<long long, long long>, Index> index_;
};

/// The Landau matrix straight from its double-sum definition,
///   L_ij = -1/2 sum_{p,q} w_p w_q (dphi_i(p) - dphi_i(q)) . M_p U(p,q) M_q (dphi_j(p) - dphi_j(q)),
/// with U written as the textbook projection (I - u u^T / |u|^2) / |u|.
inline Eigen::MatrixXd brute_force_landau(const metriplectic::FunctionSpace& space, const Vector& coeffs,
                                          const metriplectic::ThermoModel& model, double eps_u) {
    const OracleBasis basis(space);
    const Index nq = space.n_quad();
    std::vector<std::vector<ShapeValue>> shapes(static_cast<std::size_t>(nq));
    std::vector<double> m(static_cast<std::size_t>(nq));
    for (Index q = 0; q < nq; ++q) {
        const auto& pt = space.quad.points[static_cast<std::size_t>(q)];
        shapes[static_cast<std::size_t>(q)] = basis.at(pt.coord, pt.cell);
        double f = 0.0;
        for (const auto& s : shapes[static_cast<std::size_t>(q)]) {
            f += coeffs(s.dof) * s.value;
        }
        m[static_cast<std::size_t>(q)] = metriplectic::mobility(model, f);
    }
    const Index n = space.n_dof;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    std::map<Index, Vec2> diff;
    for (Index p = 0; p < nq; ++p) {
        const auto& pp = space.quad.points[static_cast<std::size_t>(p)];
        for (Index q = 0; q < nq; ++q) {
            const auto& pq = space.quad.points[static_cast<std::size_t>(q)];
            const Vec2 u = pp.coord - pq.coord;
            const double r = u.norm();
            if (r < eps_u) {
                continue;
            }
            const Eigen::Matrix2d proj = (Eigen::Matrix2d::Identity() - u * u.transpose() / (r * r)) / r;
            const double c =
                -0.5 * pp.weight * pq.weight * m[static_cast<std::size_t>(p)] * m[static_cast<std::size_t>(q)];
            diff.clear();
            for (const auto& s : shapes[static_cast<std::size_t>(p)]) {
                diff.try_emplace(s.dof, Vec2::Zero()).first->second += s.grad;
            }
            for (const auto& s : shapes[static_cast<std::size_t>(q)]) {
                diff.try_emplace(s.dof, Vec2::Zero()).first->second -= s.grad;
            }
            for (const auto& [i, gi] : diff) {
                const Vec2 t = c * (proj * gi);
                for (const auto& [j, gj] : diff) {
                    l(i, j) += t.dot(gj);
                }
            }
        }
    }
    return l;
}

} // namespace testing_support
