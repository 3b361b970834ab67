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
#include <numbers>

#include <gtest/gtest.h>

#include "metriplectic/config.hpp"
#include "metriplectic/errors.hpp"
#include "metriplectic/problem.hpp"
#include "metriplectic/thermo.hpp"

#include "support.hpp"

namespace mp = metriplectic;
using testing_support::Gen;

namespace {

mp::ThermoModel fermi_dirac() {
    mp::ThermoModel m;
    m.kind = mp::ThermoKind::FermiDirac;
    return m;
}

/// Central difference of a scalar functional along coordinate j.
template <class F>
double central(const F& fn, mp::Vector u, mp::Index j, double h) {
    u(j) += h;
    const double fp = fn(u);
    u(j) -= 2.0 * h;
    return (fp - fn(u)) / (2.0 * h);
}

} // namespace

TEST(EntropyDensity, KnownValues) {
    const mp::ThermoModel mb;
    EXPECT_NEAR(mp::entropy_density(mb, std::exp(-1.0)).s, std::exp(-1.0), 1e-16);
    EXPECT_NEAR(mp::entropy_density(mb, std::exp(-1.0)).s_f, 0.0, 1e-16);
    EXPECT_NEAR(mp::entropy_density(mb, 1.0).s, 0.0, 0.0);
    EXPECT_NEAR(mp::entropy_density(fermi_dirac(), 0.5).s, std::numbers::ln2, 1e-16);
    EXPECT_NEAR(mp::entropy_density(fermi_dirac(), 0.5).s_f, 0.0, 1e-16);
    EXPECT_DOUBLE_EQ(mp::mobility(mb, 0.3), 0.3);
    EXPECT_DOUBLE_EQ(mp::mobility(mb, -0.3), -0.3);
    EXPECT_DOUBLE_EQ(mp::mobility(fermi_dirac(), 0.3), 0.21);
    mp::ThermoModel clamped;
    clamped.clamp_mobility = true;
    EXPECT_EQ(mp::mobility(clamped, -0.3), 0.0);
    EXPECT_EQ(mp::mobility_derivative(clamped, -0.3), 0.0);
    EXPECT_EQ(mp::mobility_derivative(clamped, 0.3), 1.0);
}

TEST(EntropyDensity, RegularizationIsC1) {
    for (const auto& model : {mp::ThermoModel{}, fermi_dirac()}) {
        const double a = model.f_floor;
        const auto lo = mp::entropy_density(model, a * (1.0 - 1e-9));
        const auto at = mp::entropy_density(model, a);
        EXPECT_NEAR(lo.s, at.s, 1e-20);
        EXPECT_DOUBLE_EQ(lo.s_f, at.s_f);
        EXPECT_EQ(mp::entropy_second_derivative(model, -1.0), 0.0);
        // Linear continuation below the floor.
        const auto neg = mp::entropy_density(model, -0.5);
        EXPECT_NEAR(neg.s, at.s + at.s_f * (-0.5 - a), 1e-12);
        EXPECT_DOUBLE_EQ(neg.s_f, at.s_f);
    }
    const auto fd = fermi_dirac();
    const auto top = mp::entropy_density(fd, fd.f_ceiling);
    const auto above = mp::entropy_density(fd, 1.5);
    EXPECT_DOUBLE_EQ(above.s_f, top.s_f);
    EXPECT_NEAR(above.s, top.s + top.s_f * (1.5 - fd.f_ceiling), 1e-12);
}

TEST(EntropyDensityProperty, DerivativesMatchFiniteDifferences) {
    Gen gen(41);
    for (const auto& model : {mp::ThermoModel{}, fermi_dirac()}) {
        for (int trial = 0; trial < 200; ++trial) {
            const double f = model.kind == mp::ThermoKind::FermiDirac ? gen.uniform(0.01, 0.99)
                                                                      : gen.uniform(0.01, 5.0);
            const double h = 1e-6 * f;
            const double ds = (mp::entropy_density(model, f + h).s - mp::entropy_density(model, f - h).s) / (2 * h);
            const double dds = (mp::entropy_density(model, f + h).s_f - mp::entropy_density(model, f - h).s_f) / (2 * h);
            EXPECT_NEAR(mp::entropy_density(model, f).s_f, ds, 1e-6 * (1.0 + std::abs(ds)));
            EXPECT_NEAR(mp::entropy_second_derivative(model, f), dds, 1e-5 * (1.0 + std::abs(dds)));
        }
    }
}

TEST(EntropyIncrementProperty, MatchesDifferenceOfValues) {
    Gen gen(43);
    mp::ThermoModel coarse;
    coarse.f_floor = 1e-3;
    auto fd = fermi_dirac();
    fd.f_floor = 1e-3;
    fd.f_ceiling = 1.0 - 1e-3;
    for (const auto& model : {coarse, fd}) {
        for (int trial = 0; trial < 500; ++trial) {
            const double a = gen.uniform(-0.5, 1.5);
            const double b = gen.uniform(-0.5, 1.5);
            const double exact = mp::entropy_density(model, b).s - mp::entropy_density(model, a).s;
            EXPECT_NEAR(mp::entropy_increment(model, a, b), exact, 1e-14) << a << " " << b;
        }
        // Close values: the increment keeps its relative accuracy.
        const double a = 0.3;
        const double b = 0.3 + 1e-12;
        const double slope = mp::entropy_density(model, 0.3).s_f;
        EXPECT_NEAR(mp::entropy_increment(model, a, b) / (b - a), slope, 1e-10);
    }
}

TEST(ThermoModel, Validation) {
    mp::ThermoModel m;
    m.f_floor = 0.0;
    EXPECT_THROW(m.validate(), mp::ConfigError);
    m.f_floor = 1.0;
    EXPECT_THROW(m.validate(), mp::ConfigError);
    auto fd = fermi_dirac();
    fd.f_ceiling = fd.f_floor;
    EXPECT_THROW(fd.validate(), mp::ConfigError);
    EXPECT_NO_THROW(fermi_dirac().validate());
}

TEST(Invariants, ConstantStateOnUnitBox) {
    mp::DiscretizationParams params;
    params.v_max = 1.0;
    params.n_cells = 4;
    const auto p = mp::make_problem(params);
    const auto inv = p.invariants({mp::Vector::Ones(p.n_dof()), 0.0});
    EXPECT_NEAR(inv.mass, 4.0, 1e-13);
    EXPECT_NEAR(inv.momentum.x(), 0.0, 1e-14);
    EXPECT_NEAR(inv.momentum.y(), 0.0, 1e-14);
    EXPECT_NEAR(inv.energy, 4.0 / 3.0, 1e-13);
    EXPECT_NEAR(inv.entropy, 0.0, 1e-14);
    EXPECT_NEAR(inv.free_energy, 4.0 / 3.0, 1e-13);
}

TEST(Invariants, DegreeOneUsesQuadratureEnergyMoment) {
    mp::DiscretizationParams params;
    params.v_max = 1.0;
    params.n_cells = 4;
    params.degree = 1;
    params.energy_tracking = false;
    const auto p = mp::make_problem(params);
    const auto inv = p.invariants({mp::Vector::Ones(p.n_dof()), 0.0});
    EXPECT_NEAR(inv.energy, 4.0 / 3.0, 1e-13);
}

TEST(Gradients, EntropyAndFreeEnergyMatchCentralDifferences) {
    const auto p = testing_support::small_problem(2, 3);
    Gen gen(47);
    const mp::Vector f = gen.positive_state(p.space);
    const mp::FreeEnergy fe = p.free_energy();
    const mp::Vector gs = mp::entropy_gradient(p.space, f, p.model);
    const mp::Vector gf = fe.gradient(f);
    auto s = [&](const mp::Vector& u) { return mp::entropy_value(p.space, u, p.model); };
    auto fv = [&](const mp::Vector& u) { return fe.value(u); };
    for (mp::Index j = 0; j < p.n_dof(); ++j) {
        const double h = 1e-5 * std::max(1e-2, std::abs(f(j)));
        EXPECT_NEAR(gs(j), central(s, f, j, h), 1e-6 * std::max(1e-8, std::abs(gs(j)))) << j;
        EXPECT_NEAR(gf(j), central(fv, f, j, h), 1e-6 * std::max(1e-8, std::abs(gf(j)))) << j;
    }
    EXPECT_THROW(mp::entropy_gradient(p.space, mp::Vector::Zero(2), p.model), mp::DimensionError);
}

TEST(Gradients, HessianMatchesGradientDifferences) {
    const auto p = testing_support::small_problem(2, 2);
    Gen gen(53);
    const mp::Vector f = gen.positive_state(p.space);
    const Eigen::MatrixXd h = mp::entropy_hessian(p.space, f, p.model);
    EXPECT_LE((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-14 * h.cwiseAbs().maxCoeff());
    for (mp::Index j = 0; j < p.n_dof(); ++j) {
        const double step = 1e-6 * std::abs(f(j));
        mp::Vector fp = f;
        mp::Vector fm = f;
        fp(j) += step;
        fm(j) -= step;
        const mp::Vector col =
            (mp::entropy_gradient(p.space, fp, p.model) - mp::entropy_gradient(p.space, fm, p.model)) / (2 * step);
        EXPECT_LE((col - h.col(j)).cwiseAbs().maxCoeff(), 1e-5 * h.cwiseAbs().maxCoeff()) << j;
    }
}

TEST(Gradients, FloorIrrelevantFarAboveIt) {
    const auto p = testing_support::small_problem(2, 2);
    Gen gen(59);
    const mp::Vector f = gen.positive_state(p.space);
    mp::ThermoModel other;
    other.f_floor = 1e-9;
    EXPECT_EQ((mp::entropy_gradient(p.space, f, p.model) - mp::entropy_gradient(p.space, f, other))
                  .cwiseAbs()
                  .maxCoeff(),
              0.0);
}

TEST(FreeEnergyIncrement, AgreesWithValueDifference) {
    const auto p = testing_support::small_problem(2, 3);
    Gen gen(61);
    const mp::FreeEnergy fe = p.free_energy();
    for (int trial = 0; trial < 10; ++trial) {
        const mp::Vector a = gen.vector(p.n_dof(), -0.1, 1.0);
        const mp::Vector b = gen.vector(p.n_dof(), -0.1, 1.0);
        EXPECT_NEAR(fe.increment(a, b), fe.value(b) - fe.value(a), 1e-12 * std::abs(fe.value(a)));
    }
}

TEST(Equilibrium, CenteredMaxwellianHasZeroDrift) {
    const auto p = testing_support::small_problem(2, 4);
    const auto f = mp::build_initial_condition(p.space, {{1.0, mp::Vec2::Zero(), 2.5}});
    const auto targets = p.invariants(f);
    const auto sol =
        mp::solve_equilibrium(p.space, p.mass, p.monos, p.model, targets, mp::maxwellian_guess(p.space, p.mass, targets), {});
    EXPECT_LE(sol.residual_norm, 1e-10);
    EXPECT_NEAR(sol.lambda_momentum.x(), 0.0, 1e-10);
    EXPECT_NEAR(sol.lambda_momentum.y(), 0.0, 1e-10);
    EXPECT_LT(sol.lambda_energy, 0.0);
}

TEST(EquilibriumProperty, MomentsReproduceTargets) {
    const auto p = testing_support::small_problem(2, 4);
    Gen gen(67);
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = mp::build_initial_condition(
            p.space, {{gen.uniform(0.5, 2.0), gen.point(1.0), gen.uniform(2.0, 3.0)},
                      {gen.uniform(0.5, 2.0), gen.point(1.5), gen.uniform(2.0, 3.0)}});
        const auto targets = p.invariants(f);
        const auto sol = mp::solve_equilibrium(p.space, p.mass, p.monos, p.model, targets,
                                               mp::maxwellian_guess(p.space, p.mass, targets), {});
        const auto got = p.invariants(sol.f_eq);
        EXPECT_NEAR(got.mass, targets.mass, 1e-10 * targets.mass) << trial;
        EXPECT_NEAR(got.momentum.x(), targets.momentum.x(), 1e-10 * targets.mass * p.space.mesh.v_max) << trial;
        EXPECT_NEAR(got.momentum.y(), targets.momentum.y(), 1e-10 * targets.mass * p.space.mesh.v_max) << trial;
        EXPECT_NEAR(got.energy, targets.energy, 1e-10 * targets.energy) << trial;
        // Stationarity: grad S is a combination of the Casimir gradients.
        EXPECT_LE(sol.residual_norm, 1e-10) << trial;
    }
}

TEST(Equilibrium, OverEnergeticTargetsFail) {
    const auto p = testing_support::small_problem(2, 4);
    const auto f = mp::build_initial_condition(p.space, {{1.0, mp::Vec2::Zero(), 2.0}});
    auto targets = p.invariants(f);
    // The uniform distribution on [-5, 5]^2 has energy 25/3 per unit mass.
    targets.energy = 10.0 * targets.mass;
    EXPECT_THROW(mp::solve_equilibrium(p.space, p.mass, p.monos, p.model, targets,
                                       mp::maxwellian_guess(p.space, p.mass, targets), {}),
                 mp::SolverError);
}
