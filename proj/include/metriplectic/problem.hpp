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

#include <optional>

#include "metriplectic/fem.hpp"
#include "metriplectic/landau.hpp"
#include "metriplectic/mesh.hpp"
#include "metriplectic/thermo.hpp"

namespace metriplectic {

struct DiscretizationParams {
    double v_max = 5.0;
    int n_cells = 8;
    int degree = 2;
    int quad_order = 3;
    bool energy_tracking = true;
    std::optional<double> epsilon_u;
};

/// Everything a stepper needs: the space with its quadrature tables, the
/// factorized mass matrix, monomial coefficients, the pair kernel and the
/// thermodynamic model. Immutable after construction.
struct CollisionProblem {
    FunctionSpace space;
    MassMatrix mass;
    MonomialCoefficients monos;
    PairKernel kernel;
    ThermoModel model;

    Index n_dof() const { return space.n_dof; }

    InvariantsRecord invariants(const DistributionState& state) const {
        return compute_invariants(space, mass, monos, state, model);
    }

    FreeEnergy free_energy() const { return FreeEnergy(space, mass, monos, model); }
};

inline CollisionProblem make_problem(const DiscretizationParams& params, const ThermoModel& model = {}) {
    model.validate();
    const VelocityMesh mesh = build_mesh(params.v_max, params.n_cells);
    const QuadratureRule quad = build_quadrature(mesh, params.quad_order);
    CollisionProblem p;
    p.space = build_space(mesh, params.degree, quad);
    p.mass = assemble_mass_matrix(p.space);
    p.monos = interpolate_monomials(p.space, params.energy_tracking);
    const LandauTensorParams lp =
        params.epsilon_u ? LandauTensorParams{*params.epsilon_u} : LandauTensorParams::for_mesh(mesh);
    p.kernel = build_pair_kernel(p.space, lp);
    p.model = model;
    return p;
}

} // namespace metriplectic
