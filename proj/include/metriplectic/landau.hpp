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
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "metriplectic/errors.hpp"
#include "metriplectic/fem.hpp"
#include "metriplectic/thermo.hpp"

namespace metriplectic {

struct LandauTensorParams {
    /// Relative velocities shorter than this are treated as coincident (U = 0).
    double epsilon_u = 1e-12;

    static LandauTensorParams for_mesh(const VelocityMesh& mesh) { return {1e-12 * mesh.v_max}; }

    void validate(double v_max) const {
        if (!(epsilon_u > 0.0) || epsilon_u > 1e-10 * v_max) {
            throw ConfigError("landau: epsilon_u must lie in (0, 1e-10 * v_max]");
        }
    }
};

/// U(a, b) = (|u|^2 I - u u^T) / |u|^3 with u = a - b, zero below epsilon_u.
///
/// In two dimensions |u|^2 I - u u^T has entries (u_y^2, -u_x u_y, u_x^2), which
/// keeps U u = 0 and det U = 0 free of cancellation.
inline Eigen::Matrix2d landau_tensor(const Vec2& a, const Vec2& b, const LandauTensorParams& params) {
    const double ux = a.x() - b.x();
    const double uy = a.y() - b.y();
    const double r2 = ux * ux + uy * uy;
    const double r = std::sqrt(r2);
    Eigen::Matrix2d u = Eigen::Matrix2d::Zero();
    if (!(r >= params.epsilon_u)) {
        return u;
    }
    const double inv = 1.0 / (r2 * r);
    u(0, 0) = uy * uy * inv;
    u(1, 1) = ux * ux * inv;
    u(0, 1) = u(1, 0) = -(ux * uy) * inv;
    return u;
}

/// Landau tensor evaluated at every pair of quadrature points of a space.
///
/// Each component is a symmetric (n_quad x n_quad) matrix; the diagonal is zero.
struct PairKernel {
    Eigen::MatrixXd uxx;
    Eigen::MatrixXd uxy;
    Eigen::MatrixXd uyy;
    LandauTensorParams params;

    Index size() const { return uxx.rows(); }
};

inline PairKernel build_pair_kernel(const FunctionSpace& space, const LandauTensorParams& params) {
    params.validate(space.mesh.v_max);
    const Index nq = space.n_quad();
    PairKernel k;
    k.params = params;
    k.uxx.resize(nq, nq);
    k.uxy.resize(nq, nq);
    k.uyy.resize(nq, nq);
    for (Index j = 0; j < nq; ++j) {
        const Vec2& b = space.quad.points[static_cast<std::size_t>(j)].coord;
        for (Index i = 0; i < nq; ++i) {
            const Eigen::Matrix2d u =
                landau_tensor(space.quad.points[static_cast<std::size_t>(i)].coord, b, params);
            k.uxx(i, j) = u(0, 0);
            k.uxy(i, j) = u(0, 1);
            k.uyy(i, j) = u(1, 1);
        }
    }
    return k;
}

inline PairKernel build_pair_kernel(const FunctionSpace& space) {
    return build_pair_kernel(space, LandauTensorParams::for_mesh(space.mesh));
}

/// Dense symmetric Landau matrix L(f) together with the state it was built from.
struct LandauMatrix {
    Eigen::MatrixXd entries;
    Vector f_snapshot;
};

namespace detail {

inline Vector mobility_at_quad(const FunctionSpace& space, const Vector& coeffs, const ThermoModel& model) {
    Vector m = eval_at_quad(space, coeffs).value;
    for (Index q = 0; q < m.size(); ++q) {
        const double f = m(q);
        if (model.kind == ThermoKind::FermiDirac && !model.clamp_mobility &&
            (f < -model.f_floor || f > 2.0 - model.f_ceiling)) {
            throw ModelDomainError("landau: Fermi-Dirac mobility evaluated outside [0, 1]");
        }
        m(q) = mobility(model, f);
    }
    return m;
}

} // namespace detail

/// Assembles
///   L_ij = -1/2 sum_{q',q''} w' w'' (dphi_i(q') - dphi_i(q'')) . M' U(q',q'') M'' (dphi_j(q') - dphi_j(q'')).
///
/// The double sum is expanded using the pair symmetry of U into a cell-local
/// part -sum_q' w' M' dphi_i . Dbar(q') dphi_j with Dbar(q') = sum_q'' w'' M'' U,
/// and a coupling part sum_{q',q''} (w' M' dphi_i(q')) . U (w'' M'' dphi_j(q'')).
/// Storage is symmetrized at the end.
inline LandauMatrix assemble_landau_dense(const FunctionSpace& space, const PairKernel& kernel,
                                          const Vector& coeffs, const ThermoModel& model) {
    if (kernel.size() != space.n_quad()) {
        throw DimensionError("landau: pair kernel does not match the space");
    }
    const Vector wq = quad_weights(space);
    const Vector wm = wq.cwiseProduct(detail::mobility_at_quad(space, coeffs, model));

    const Vector dxx = kernel.uxx * wm;
    const Vector dxy = kernel.uxy * wm;
    const Vector dyy = kernel.uyy * wm;

    const Index n = space.n_dof;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);

    for (Index q = 0; q < space.n_quad(); ++q) {
        const auto dofs = space.cell_dofs(space.quad.points[static_cast<std::size_t>(q)].cell);
        const double c = wm(q);
        for (Index a = 0; a < space.local_size; ++a) {
            const double gax = space.dphi_x(q, a);
            const double gay = space.dphi_y(q, a);
            const double tx = dxx(q) * gax + dxy(q) * gay;
            const double ty = dxy(q) * gax + dyy(q) * gay;
            for (Index b = 0; b < space.local_size; ++b) {
                l(dofs[static_cast<std::size_t>(a)], dofs[static_cast<std::size_t>(b)]) -=
                    c * (tx * space.dphi_x(q, b) + ty * space.dphi_y(q, b));
            }
        }
    }

    const RowSparseMatrix yx = wm.asDiagonal() * space.grad_x;
    const RowSparseMatrix yy = wm.asDiagonal() * space.grad_y;
    const Eigen::MatrixXd zx = kernel.uxx * yx + kernel.uxy * yy;
    const Eigen::MatrixXd zy = kernel.uxy * yx + kernel.uyy * yy;
    l.noalias() += yx.transpose() * zx;
    l.noalias() += yy.transpose() * zy;

    LandauMatrix out;
    out.entries = 0.5 * (l + l.transpose());
    out.f_snapshot = coeffs;
    return out;
}

/// Jacobian of f -> L(f) w for fixed w, through the mobility weights.
///
/// With m = M(f_h), D(p) = sum_q w_q m_q U(p,q), K(p) = sum_q w_q m_q U(p,q) g(q)
/// and g the velocity gradient of w_h, the derivative splits into a cell-local part
///   sum_p w_p M'(f_p) dphi_i(p) . (K(p) - D(p) g(p)) phi_j(p)
/// and a pair part
///   sum_{q,p} w_q m_q dphi_i(q) . U(q,p) (g(p) - g(q)) w_p M'(f_p) phi_j(p).
inline Eigen::MatrixXd landau_mobility_jacobian(const FunctionSpace& space, const PairKernel& kernel,
                                                const Vector& coeffs, const Vector& w, const ThermoModel& model) {
    if (kernel.size() != space.n_quad() || w.size() != space.n_dof) {
        throw DimensionError("landau: operands do not match the space");
    }
    const Vector fq = eval_at_quad(space, coeffs).value;
    const Vector wq = quad_weights(space);
    const Vector wm = wq.cwiseProduct(detail::mobility_at_quad(space, coeffs, model));
    Vector wdm(space.n_quad());
    for (Index q = 0; q < space.n_quad(); ++q) {
        wdm(q) = wq(q) * mobility_derivative(model, fq(q));
    }
    const Vector gx = space.grad_x * w;
    const Vector gy = space.grad_y * w;

    Eigen::MatrixX3d src(space.n_quad(), 3);
    src.col(0) = wm;
    src.col(1) = wm.cwiseProduct(gx);
    src.col(2) = wm.cwiseProduct(gy);
    const Eigen::MatrixX3d axx = kernel.uxx * src;
    const Eigen::MatrixX3d axy = kernel.uxy * src;
    const Eigen::MatrixX3d ayy = kernel.uyy * src;

    const Index n = space.n_dof;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (Index q = 0; q < space.n_quad(); ++q) {
        const auto dofs = space.cell_dofs(space.quad.points[static_cast<std::size_t>(q)].cell);
        const double vx = axx(q, 1) + axy(q, 2) - (axx(q, 0) * gx(q) + axy(q, 0) * gy(q));
        const double vy = axy(q, 1) + ayy(q, 2) - (axy(q, 0) * gx(q) + ayy(q, 0) * gy(q));
        for (Index a = 0; a < space.local_size; ++a) {
            const double row = wdm(q) * (space.dphi_x(q, a) * vx + space.dphi_y(q, a) * vy);
            for (Index b = 0; b < space.local_size; ++b) {
                jac(dofs[static_cast<std::size_t>(a)], dofs[static_cast<std::size_t>(b)]) += row * space.phi(q, b);
            }
        }
    }

    // Pair part: sum_{a,b} Y_a^T (U_ab diag(g_b) - diag(g_b) U_ab) Z.
    const RowSparseMatrix yx = wm.asDiagonal() * space.grad_x;
    const RowSparseMatrix yy = wm.asDiagonal() * space.grad_y;
    const RowSparseMatrix z = wdm.asDiagonal() * space.values;
    const Eigen::MatrixXd gxz = gx.asDiagonal() * z;
    const Eigen::MatrixXd gyz = gy.asDiagonal() * z;
    const Eigen::MatrixXd uxx_z = kernel.uxx * z;
    const Eigen::MatrixXd uxy_z = kernel.uxy * z;
    const Eigen::MatrixXd uyy_z = kernel.uyy * z;
    const Eigen::MatrixXd px = kernel.uxx * gxz + kernel.uxy * gyz - gx.asDiagonal() * uxx_z - gy.asDiagonal() * uxy_z;
    const Eigen::MatrixXd py = kernel.uxy * gxz + kernel.uyy * gyz - gx.asDiagonal() * uxy_z - gy.asDiagonal() * uyy_z;
    jac.noalias() += yx.transpose() * px;
    jac.noalias() += yy.transpose() * py;
    return jac;
}

/// G g = M^{-1} L M^{-1} g.
inline Vector bracket_apply(const MassMatrix& mass, const LandauMatrix& landau, const Vector& g) {
    if (g.size() != landau.entries.rows() || mass.size() != landau.entries.rows()) {
        throw DimensionError("landau: bracket operands do not conform");
    }
    return mass.solve(landau.entries * mass.solve(g));
}

/// Sparse form of the collision right-hand side for mobility M(f) = f.
///
/// With w = M^{-1} dF and g(q) = sum_k dphi_k(q) w_k,
///   D(q') = sum_q'' w'' U(q',q'') f_h(q''),   K(q') = sum_q'' w'' U(q',q'') f_h(q'') g(q''),
///   C_ij  = sum_q' w' dphi_i(q') . (K(q') - D(q') g(q')) phi_j(q'),
/// so that C f = L(f) w.
struct SparseCollisionOperator {
    Vector d_xx;
    Vector d_xy;
    Vector d_yy;
    Vector k_x;
    Vector k_y;
    SparseMatrix c;
    Vector w_snapshot;

    Eigen::Matrix2d d_at(Index q) const {
        Eigen::Matrix2d d;
        d << d_xx(q), d_xy(q), d_xy(q), d_yy(q);
        return d;
    }
    Vec2 k_at(Index q) const { return Vec2(k_x(q), k_y(q)); }
};

inline SparseCollisionOperator assemble_sparse_operator(const FunctionSpace& space, const PairKernel& kernel,
                                                        const Vector& f_half, const Vector& w,
                                                        const ThermoModel& model) {
    if (!model.linear_mobility()) {
        throw CapabilityError("landau: the sparse collision operator needs the linear mobility M(f) = f");
    }
    if (kernel.size() != space.n_quad()) {
        throw DimensionError("landau: pair kernel does not match the space");
    }
    if (w.size() != space.n_dof) {
        throw DimensionError("landau: combination vector length does not match n_dof");
    }
    const QuadField fh = eval_at_quad(space, f_half);
    const Vector gx = space.grad_x * w;
    const Vector gy = space.grad_y * w;
    const Vector wq = quad_weights(space);

    Eigen::MatrixX3d src(space.n_quad(), 3);
    src.col(0) = wq.cwiseProduct(fh.value);
    src.col(1) = src.col(0).cwiseProduct(gx);
    src.col(2) = src.col(0).cwiseProduct(gy);
    const Eigen::MatrixX3d axx = kernel.uxx * src;
    const Eigen::MatrixX3d axy = kernel.uxy * src;
    const Eigen::MatrixX3d ayy = kernel.uyy * src;

    SparseCollisionOperator op;
    op.d_xx = axx.col(0);
    op.d_xy = axy.col(0);
    op.d_yy = ayy.col(0);
    op.k_x = axx.col(1) + axy.col(2);
    op.k_y = axy.col(1) + ayy.col(2);
    op.w_snapshot = w;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(space.n_quad() * space.local_size * space.local_size));
    for (Index q = 0; q < space.n_quad(); ++q) {
        const auto& pt = space.quad.points[static_cast<std::size_t>(q)];
        const auto dofs = space.cell_dofs(pt.cell);
        const double vx = op.k_x(q) - (op.d_xx(q) * gx(q) + op.d_xy(q) * gy(q));
        const double vy = op.k_y(q) - (op.d_xy(q) * gx(q) + op.d_yy(q) * gy(q));
        for (Index a = 0; a < space.local_size; ++a) {
            const double row = pt.weight * (space.dphi_x(q, a) * vx + space.dphi_y(q, a) * vy);
            for (Index b = 0; b < space.local_size; ++b) {
                triplets.emplace_back(dofs[static_cast<std::size_t>(a)], dofs[static_cast<std::size_t>(b)],
                                      row * space.phi(q, b));
            }
        }
    }
    op.c.resize(space.n_dof, space.n_dof);
    op.c.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

inline Vector sparse_apply(const SparseCollisionOperator& op, const Vector& f_half) {
    if (f_half.size() != op.c.cols()) {
        throw DimensionError("landau: state length does not match the collision operator");
    }
    return op.c * f_half;
}

} // namespace metriplectic
