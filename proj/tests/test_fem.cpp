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
#include <cmath>

#include <gtest/gtest.h>

#include "metriplectic/errors.hpp"
#include "metriplectic/fem.hpp"
#include "metriplectic/mesh.hpp"

#include "support.hpp"

namespace mp = metriplectic;

namespace {

mp::FunctionSpace space_for(double v_max, int n, int degree, int order = 3) {
    const auto mesh = mp::build_mesh(v_max, n);
    return mp::build_space(mesh, degree, mp::build_quadrature(mesh, order));
}

} // namespace

TEST(FunctionSpace, DofCounts) {
    EXPECT_EQ(space_for(5.0, 8, 2).n_dof, 289);
    EXPECT_EQ(space_for(5.0, 8, 1).n_dof, 81);
    EXPECT_EQ(space_for(5.0, 8, 2).local_size, 9);
    EXPECT_EQ(space_for(5.0, 8, 1).local_size, 4);
    EXPECT_THROW(space_for(5.0, 2, 3), mp::ConfigError);
}

TEST(FunctionSpace, PartitionOfUnity) {
    for (int degree : {1, 2}) {
        const auto s = space_for(2.0, 3, degree);
        const mp::Vector ones = mp::Vector::Ones(s.n_dof);
        EXPECT_LT(((s.values * ones).array() - 1.0).abs().maxCoeff(), 1e-14);
        EXPECT_LT((s.grad_x * ones).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_LT((s.grad_y * ones).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(FunctionSpace, TablesMatchIndependentBasis) {
    for (int degree : {1, 2}) {
        const auto s = space_for(3.0, 3, degree);
        const testing_support::OracleBasis oracle(s);
        for (mp::Index q = 0; q < s.n_quad(); ++q) {
            const auto& pt = s.quad.points[static_cast<std::size_t>(q)];
            for (const auto& sv : oracle.at(pt.coord, pt.cell)) {
                EXPECT_NEAR(s.values.coeff(q, sv.dof), sv.value, 1e-14);
                EXPECT_NEAR(s.grad_x.coeff(q, sv.dof), sv.grad.x(), 1e-13);
                EXPECT_NEAR(s.grad_y.coeff(q, sv.dof), sv.grad.y(), 1e-13);
            }
        }
    }
}

TEST(MassMatrix, BilinearUnitSquareEntries) {
    // One Q1 cell of unit area: M = [4 2 2 1; 2 4 1 2; ...] / 36.
    const auto s = space_for(0.5, 1, 1, 2);
    const auto m = mp::assemble_mass_matrix(s);
    const Eigen::MatrixXd d(m.entries);
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(d(i, i), 1.0 / 9.0, 1e-15);
    }
    // Dofs 0..3 are (lower-left, lower-right, upper-left, upper-right).
    EXPECT_NEAR(d(0, 1), 1.0 / 18.0, 1e-15);
    EXPECT_NEAR(d(0, 2), 1.0 / 18.0, 1e-15);
    EXPECT_NEAR(d(0, 3), 1.0 / 36.0, 1e-15);
    EXPECT_NEAR(d(1, 2), 1.0 / 36.0, 1e-15);
}

TEST(MassMatrix, SymmetricPositiveDefiniteAndMoments) {
    const auto s = space_for(1.0, 4, 2);
    const auto m = mp::assemble_mass_matrix(s);
    const Eigen::MatrixXd d(m.entries);
    EXPECT_EQ((d - d.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);

    const auto monos = mp::interpolate_monomials(s);
    const mp::Vector m1 = m.apply(monos.ones);
    EXPECT_NEAR(monos.ones.dot(m1), 4.0, 1e-13);
    EXPECT_NEAR(monos.eps_hat->dot(m1), 8.0 / 3.0, 1e-13);
    EXPECT_NEAR(monos.v_hat[0].dot(m1), 0.0, 1e-14);
    EXPECT_NEAR(monos.v_hat[0].dot(m.apply(monos.v_hat[0])), 4.0 / 3.0, 1e-13);
}

TEST(MassMatrix, SolveInvertsApply) {
    const auto s = space_for(2.0, 3, 2);
    const auto m = mp::assemble_mass_matrix(s);
    testing_support::Gen gen(3);
    const mp::Vector x = gen.vector(s.n_dof, -1.0, 1.0);
    EXPECT_LT((m.solve(m.apply(x)) - x).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(m.norm(x), std::sqrt(x.dot(m.apply(x))), 1e-14);
    EXPECT_THROW(m.solve(mp::Vector::Zero(3)), mp::DimensionError);
    EXPECT_THROW(m.apply(mp::Vector::Zero(3)), mp::DimensionError);
    mp::MassMatrix empty;
    empty.entries = m.entries;
    EXPECT_THROW(empty.solve(x), mp::StateError);
}

TEST(MassMatrix, AssemblyIsDeterministic) {
    const auto s = space_for(2.0, 3, 2);
    const Eigen::MatrixXd a(mp::assemble_mass_matrix(s).entries);
    const Eigen::MatrixXd b(mp::assemble_mass_matrix(s).entries);
    EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Monomials, InterpolationIsExactAtQuadrature) {
    const auto s = space_for(2.0, 3, 2);
    const auto monos = mp::interpolate_monomials(s);
    const mp::Vector vx = s.values * monos.v_hat[0];
    const mp::Vector vy = s.values * monos.v_hat[1];
    const mp::Vector e = s.values * *monos.eps_hat;
    for (mp::Index q = 0; q < s.n_quad(); ++q) {
        const auto& x = s.quad.points[static_cast<std::size_t>(q)].coord;
        EXPECT_NEAR(vx(q), x.x(), 1e-14);
        EXPECT_NEAR(vy(q), x.y(), 1e-14);
        EXPECT_NEAR(e(q), x.squaredNorm(), 1e-13);
    }
}

TEST(Monomials, DegreeOneEnergyNeedsOptOut) {
    const auto s = space_for(2.0, 3, 1);
    EXPECT_THROW(mp::interpolate_monomials(s, true), mp::CapabilityError);
    const auto monos = mp::interpolate_monomials(s, false);
    EXPECT_FALSE(monos.eps_hat.has_value());
}

TEST(EvalAtQuad, QuadraticFieldExactAndDimensionChecked) {
    const auto s = space_for(2.0, 2, 2);
    mp::Vector c(s.n_dof);
    for (mp::Index i = 0; i < s.n_dof; ++i) {
        const auto& x = s.dof_coords[static_cast<std::size_t>(i)];
        c(i) = 1.0 + x.x() - 2.0 * x.y() + x.x() * x.y() + 0.5 * x.x() * x.x();
    }
    const auto f = mp::eval_at_quad(s, c);
    for (mp::Index q = 0; q < s.n_quad(); ++q) {
        const auto& x = s.quad.points[static_cast<std::size_t>(q)].coord;
        EXPECT_NEAR(f.value(q), 1.0 + x.x() - 2.0 * x.y() + x.x() * x.y() + 0.5 * x.x() * x.x(), 1e-13);
        EXPECT_NEAR(f.grad_x(q), 1.0 + x.y() + x.x(), 1e-13);
        EXPECT_NEAR(f.grad_y(q), -2.0 + x.x(), 1e-13);
    }
    EXPECT_THROW(mp::eval_at_quad(s, mp::Vector::Zero(2)), mp::DimensionError);
}

TEST(ProjectToDual, MatchesMassMatrixOnFieldsInTheSpace) {
    const auto s = space_for(2.0, 3, 2);
    const auto m = mp::assemble_mass_matrix(s);
    testing_support::Gen gen(5);
    const mp::Vector c = gen.vector(s.n_dof, -1.0, 1.0);
    const mp::Vector dual = mp::project_to_dual(s, s.values * c);
    EXPECT_LT((dual - m.apply(c)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((mp::lift_gradient(m, dual) - c).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(mp::quad_weights(s).sum(), 16.0, 1e-13);
}
