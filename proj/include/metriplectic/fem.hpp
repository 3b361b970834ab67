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

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "metriplectic/errors.hpp"
#include "metriplectic/mesh.hpp"

namespace metriplectic {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double>;
using RowSparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Coefficient vector of a discrete distribution together with its time stamp.
struct DistributionState {
    Vector coeffs;
    double time = 0.0;
};

/// Tensor-product Lagrange space of degree 1 or 2 on a structured velocity mesh,
/// tabulated on a quadrature rule.
///
/// Global nodes form a (degree * n_cells + 1)^2 lattice numbered with the first
/// axis fastest. Local dofs of a cell are numbered the same way. Basis values
/// and gradients are stored per quadrature point for the local dofs of the cell
/// that owns the point; `values`, `grad_x` and `grad_y` hold the same tables as
/// sparse (n_quad x n_dof) operators.
struct FunctionSpace {
    VelocityMesh mesh;
    QuadratureRule quad;
    int degree = 0;
    Index n_dof = 0;
    Index local_size = 0;
    std::vector<Vec2> dof_coords;
    std::vector<Index> connectivity;

    Eigen::MatrixXd phi;
    Eigen::MatrixXd dphi_x;
    Eigen::MatrixXd dphi_y;

    RowSparseMatrix values;
    RowSparseMatrix grad_x;
    RowSparseMatrix grad_y;

    Index n_quad() const { return static_cast<Index>(quad.size()); }

    std::span<const Index> cell_dofs(std::size_t cell) const {
        return {connectivity.data() + cell * static_cast<std::size_t>(local_size),
                static_cast<std::size_t>(local_size)};
    }

    const RowSparseMatrix& gradient(int axis) const { return axis == 0 ? grad_x : grad_y; }
};

/// Symmetric positive definite mass matrix with a cached sparse Cholesky factor.
struct MassMatrix {
    SparseMatrix entries;
    std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> factorization;

    Index size() const { return entries.rows(); }

    Vector apply(const Vector& x) const {
        if (x.size() != entries.cols()) {
            throw DimensionError("mass matrix: vector length does not match n_dof");
        }
        return entries * x;
    }

    Vector solve(const Vector& g) const {
        if (!factorization) {
            throw StateError("mass matrix: factorization unavailable");
        }
        if (g.size() != entries.rows()) {
            throw DimensionError("mass matrix: vector length does not match n_dof");
        }
        return factorization->solve(g);
    }

    /// sqrt(x^T M x).
    double norm(const Vector& x) const { return std::sqrt(x.dot(apply(x))); }
};

/// Nodal coefficients of the monomials 1, v_1, v_2 and |v|^2.
///
/// `eps_hat` is only available when |v|^2 lies in the space (degree 2).
struct MonomialCoefficients {
    Vector ones;
    std::array<Vector, 2> v_hat;
    std::optional<Vector> eps_hat;
};

/// Values and velocity gradients of f_h at every quadrature point.
struct QuadField {
    Vector value;
    Vector grad_x;
    Vector grad_y;
};

namespace detail {

inline double lagrange_1d(int degree, int a, double xi) {
    double r = 1.0;
    const double xa = static_cast<double>(a) / degree;
    for (int b = 0; b <= degree; ++b) {
        if (b != a) {
            const double xb = static_cast<double>(b) / degree;
            r *= (xi - xb) / (xa - xb);
        }
    }
    return r;
}

inline double lagrange_1d_derivative(int degree, int a, double xi) {
    const double xa = static_cast<double>(a) / degree;
    double sum = 0.0;
    for (int c = 0; c <= degree; ++c) {
        if (c == a) {
            continue;
        }
        const double xc = static_cast<double>(c) / degree;
        double term = 1.0 / (xa - xc);
        for (int b = 0; b <= degree; ++b) {
            if (b != a && b != c) {
                const double xb = static_cast<double>(b) / degree;
                term *= (xi - xb) / (xa - xb);
            }
        }
        sum += term;
    }
    return sum;
}

inline RowSparseMatrix quad_operator(const FunctionSpace& space, const Eigen::MatrixXd& table) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(table.size()));
    for (Index q = 0; q < space.n_quad(); ++q) {
        const auto dofs = space.cell_dofs(space.quad.points[static_cast<std::size_t>(q)].cell);
        for (Index a = 0; a < space.local_size; ++a) {
            triplets.emplace_back(q, dofs[static_cast<std::size_t>(a)], table(q, a));
        }
    }
    RowSparseMatrix op(space.n_quad(), space.n_dof);
    op.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

} // namespace detail

inline FunctionSpace build_space(const VelocityMesh& mesh, int degree, const QuadratureRule& quad) {
    if (degree != 1 && degree != 2) {
        throw ConfigError("fem: degree must be 1 or 2");
    }
    if (quad.points.empty() ||
        quad.points.back().cell + 1 != mesh.cells.size()) {
        throw DimensionError("fem: quadrature rule does not belong to this mesh");
    }
    FunctionSpace space;
    space.mesh = mesh;
    space.quad = quad;
    space.degree = degree;

    const int n = mesh.n_cells;
    const int nodes_1d = degree * n + 1;
    space.n_dof = static_cast<Index>(nodes_1d) * nodes_1d;
    space.local_size = static_cast<Index>(degree + 1) * (degree + 1);

    space.dof_coords.resize(static_cast<std::size_t>(space.n_dof));
    auto coord = [&](int k) { return -mesh.v_max + 2.0 * mesh.v_max * k / (degree * n); };
    for (int j = 0; j < nodes_1d; ++j) {
        for (int i = 0; i < nodes_1d; ++i) {
            space.dof_coords[static_cast<std::size_t>(j * nodes_1d + i)] = Vec2(coord(i), coord(j));
        }
    }

    space.connectivity.reserve(mesh.cells.size() * static_cast<std::size_t>(space.local_size));
    for (int cy = 0; cy < n; ++cy) {
        for (int cx = 0; cx < n; ++cx) {
            for (int b = 0; b <= degree; ++b) {
                for (int a = 0; a <= degree; ++a) {
                    space.connectivity.push_back(
                        static_cast<Index>(degree * cy + b) * nodes_1d + (degree * cx + a));
                }
            }
        }
    }

    const Index nq = space.n_quad();
    space.phi.resize(nq, space.local_size);
    space.dphi_x.resize(nq, space.local_size);
    space.dphi_y.resize(nq, space.local_size);
    for (Index q = 0; q < nq; ++q) {
        const QuadraturePoint& pt = quad.points[static_cast<std::size_t>(q)];
        const Cell& cell = mesh.cells[pt.cell];
        const double hx = cell.upper.x() - cell.lower.x();
        const double hy = cell.upper.y() - cell.lower.y();
        const double xi = (pt.coord.x() - cell.lower.x()) / hx;
        const double eta = (pt.coord.y() - cell.lower.y()) / hy;
        for (int b = 0; b <= degree; ++b) {
            for (int a = 0; a <= degree; ++a) {
                const Index k = b * (degree + 1) + a;
                const double lx = detail::lagrange_1d(degree, a, xi);
                const double ly = detail::lagrange_1d(degree, b, eta);
                space.phi(q, k) = lx * ly;
                space.dphi_x(q, k) = detail::lagrange_1d_derivative(degree, a, xi) / hx * ly;
                space.dphi_y(q, k) = lx * detail::lagrange_1d_derivative(degree, b, eta) / hy;
            }
        }
    }
    space.values = detail::quad_operator(space, space.phi);
    space.grad_x = detail::quad_operator(space, space.dphi_x);
    space.grad_y = detail::quad_operator(space, space.dphi_y);
    return space;
}

/// Assembles M_jk = sum_q w_q phi_j(q) phi_k(q) cell by cell and factorizes it.
///
/// Local blocks are filled on the upper triangle and mirrored, and the global
/// scatter visits cells in a fixed order, so M is bit-exactly symmetric and
/// repeated assembly is bit-identical.
inline MassMatrix assemble_mass_matrix(const FunctionSpace& space) {
    const Index nloc = space.local_size;
    const std::size_t ppc = space.quad.points_per_cell;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(space.mesh.cells.size() * static_cast<std::size_t>(nloc * nloc));
    Eigen::MatrixXd local(nloc, nloc);
    for (std::size_t c = 0; c < space.mesh.cells.size(); ++c) {
        local.setZero();
        for (std::size_t p = 0; p < ppc; ++p) {
            const auto q = static_cast<Index>(c * ppc + p);
            const double w = space.quad.points[static_cast<std::size_t>(q)].weight;
            for (Index a = 0; a < nloc; ++a) {
                for (Index b = a; b < nloc; ++b) {
                    local(a, b) += w * space.phi(q, a) * space.phi(q, b);
                }
            }
        }
        const auto dofs = space.cell_dofs(c);
        for (Index a = 0; a < nloc; ++a) {
            for (Index b = 0; b < nloc; ++b) {
                const double v = a <= b ? local(a, b) : local(b, a);
                triplets.emplace_back(dofs[static_cast<std::size_t>(a)],
                                      dofs[static_cast<std::size_t>(b)], v);
            }
        }
    }
    MassMatrix mass;
    mass.entries.resize(space.n_dof, space.n_dof);
    mass.entries.setFromTriplets(triplets.begin(), triplets.end());
    auto llt = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(mass.entries);
    if (llt->info() != Eigen::Success) {
        throw AssemblyError("fem: mass matrix factorization failed (broken connectivity?)");
    }
    mass.factorization = std::move(llt);
    return mass;
}

/// Nodal interpolation of 1, v and |v|^2.
///
/// |v|^2 is only representable for degree 2; asking for it on a degree-1 space
/// is a capability error.
inline MonomialCoefficients interpolate_monomials(const FunctionSpace& space,
                                                  bool energy_tracking = true) {
    if (energy_tracking && space.degree < 2) {
        throw CapabilityError("fem: energy tracking needs degree 2 (|v|^2 is not in a degree-1 space)");
    }
    MonomialCoefficients m;
    m.ones = Vector::Ones(space.n_dof);
    m.v_hat[0].resize(space.n_dof);
    m.v_hat[1].resize(space.n_dof);
    Vector eps(space.n_dof);
    for (Index i = 0; i < space.n_dof; ++i) {
        const Vec2& x = space.dof_coords[static_cast<std::size_t>(i)];
        m.v_hat[0](i) = x.x();
        m.v_hat[1](i) = x.y();
        eps(i) = x.squaredNorm();
    }
    if (space.degree >= 2) {
        m.eps_hat = std::move(eps);
    }
    return m;
}

inline QuadField eval_at_quad(const FunctionSpace& space, const Vector& coeffs) {
    if (coeffs.size() != space.n_dof) {
        throw DimensionError("fem: coefficient vector length does not match n_dof");
    }
    return QuadField{space.values * coeffs, space.grad_x * coeffs, space.grad_y * coeffs};
}

inline QuadField eval_at_quad(const FunctionSpace& space, const DistributionState& state) {
    return eval_at_quad(space, state.coeffs);
}

/// Coefficients of the functional derivative in the primal basis, M^{-1} g.
inline Vector lift_gradient(const MassMatrix& mass, const Vector& g) { return mass.solve(g); }

/// Projection sum_q w_q phi_i(q) h(q) of a quadrature field onto the basis.
inline Vector project_to_dual(const FunctionSpace& space, const Vector& field_at_quad) {
    if (field_at_quad.size() != space.n_quad()) {
        throw DimensionError("fem: quadrature field has the wrong length");
    }
    Vector weighted(space.n_quad());
    for (Index q = 0; q < space.n_quad(); ++q) {
        weighted(q) = space.quad.points[static_cast<std::size_t>(q)].weight * field_at_quad(q);
    }
    return space.values.transpose() * weighted;
}

inline Vector quad_weights(const FunctionSpace& space) {
    Vector w(space.n_quad());
    for (Index q = 0; q < space.n_quad(); ++q) {
        w(q) = space.quad.points[static_cast<std::size_t>(q)].weight;
    }
    return w;
}

} // namespace metriplectic
