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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metriplectic/errors.hpp"
#include "metriplectic/fem.hpp"

namespace metriplectic {

enum class ThermoKind { MaxwellBoltzmann, FermiDirac };

/// Entropy density s(f) and mobility M(f) in normalized units (m = T = g = 1).
///
/// The entropy is continued linearly (C^1) below `f_floor` and, for
/// Fermi-Dirac, above `f_ceiling`. Values, first and second derivatives all
/// come from that single regularized definition.
struct ThermoModel {
    static constexpr double particle_mass = 1.0;
    static constexpr double temperature = 1.0;

    ThermoKind kind = ThermoKind::MaxwellBoltzmann;
    double f_floor = 1e-14;
    double f_ceiling = 1.0 - 1e-14;
    bool clamp_mobility = false;

    void validate() const {
        if (!(f_floor > 0.0 && f_floor < 1.0)) {
            throw ConfigError("thermo.f_floor must lie in (0, 1)");
        }
        if (kind == ThermoKind::FermiDirac && !(f_ceiling > f_floor && f_ceiling < 1.0)) {
            throw ConfigError("thermo.f_ceiling must lie in (f_floor, 1)");
        }
    }

    /// True when M(f) = f exactly, which the sparse collision path relies on.
    bool linear_mobility() const { return kind == ThermoKind::MaxwellBoltzmann && !clamp_mobility; }
};

struct EntropyDensity {
    double s;
    double s_f;
};

namespace detail {

struct EntropyJet {
    double s;
    double s_f;
    double s_ff;
};

inline EntropyJet entropy_unregularized(ThermoKind kind, double f) {
    const double t = ThermoModel::temperature;
    if (kind == ThermoKind::MaxwellBoltzmann) {
        const double lf = std::log(f);
        return {-t * f * lf, -t * (lf + 1.0), -t / f};
    }
    const double lf = std::log(f);
    const double lg = std::log1p(-f);
    return {-t * (f * lf + (1.0 - f) * lg), -t * (lf - lg), -t * (1.0 / f + 1.0 / (1.0 - f))};
}

inline EntropyJet entropy_jet(const ThermoModel& model, double f) {
    if (f < model.f_floor) {
        const EntropyJet e = entropy_unregularized(model.kind, model.f_floor);
        return {e.s + e.s_f * (f - model.f_floor), e.s_f, 0.0};
    }
    if (model.kind == ThermoKind::FermiDirac && f > model.f_ceiling) {
        const EntropyJet e = entropy_unregularized(model.kind, model.f_ceiling);
        return {e.s + e.s_f * (f - model.f_ceiling), e.s_f, 0.0};
    }
    return entropy_unregularized(model.kind, f);
}

/// (a + d) ln(a + d) - a ln a for 0 < a, a + d without cancellation when d is small.
inline double xlogx_increment(double a, double d) {
    return d * std::log(a) + (a + d) * std::log1p(d / a);
}

/// s(b) - s(a) with a <= b inside one smooth piece of the regularized entropy.
inline double entropy_piece_increment(const ThermoModel& model, double a, double b) {
    const double t = ThermoModel::temperature;
    if (b <= model.f_floor) {
        return entropy_unregularized(model.kind, model.f_floor).s_f * (b - a);
    }
    if (model.kind == ThermoKind::FermiDirac && a >= model.f_ceiling) {
        return entropy_unregularized(model.kind, model.f_ceiling).s_f * (b - a);
    }
    if (model.kind == ThermoKind::MaxwellBoltzmann) {
        return -t * xlogx_increment(a, b - a);
    }
    // The complement moves by exactly a - b; 1 - b would round the step.
    return -t * (xlogx_increment(a, b - a) + xlogx_increment(1.0 - a, a - b));
}

} // namespace detail

/// s(b) - s(a), summed piecewise so that it is accurate to rounding relative to |b - a|.
inline double entropy_increment(const ThermoModel& model, double a, double b) {
    if (a == b) {
        return 0.0;
    }
    if (b < a) {
        return -entropy_increment(model, b, a);
    }
    std::vector<double> cuts{a};
    if (a < model.f_floor && model.f_floor < b) {
        cuts.push_back(model.f_floor);
    }
    if (model.kind == ThermoKind::FermiDirac && a < model.f_ceiling && model.f_ceiling < b) {
        cuts.push_back(model.f_ceiling);
    }
    cuts.push_back(b);
    double inc = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        inc += detail::entropy_piece_increment(model, cuts[k], cuts[k + 1]);
    }
    return inc;
}

inline EntropyDensity entropy_density(const ThermoModel& model, double f) {
    const auto e = detail::entropy_jet(model, f);
    return {e.s, e.s_f};
}

inline double entropy_second_derivative(const ThermoModel& model, double f) {
    return detail::entropy_jet(model, f).s_ff;
}

inline double mobility(const ThermoModel& model, double f) {
    const double m = model.kind == ThermoKind::MaxwellBoltzmann ? f : f * (1.0 - f);
    return model.clamp_mobility ? std::max(m, 0.0) : m;
}

/// dM/df, zero where the clamp is active.
inline double mobility_derivative(const ThermoModel& model, double f) {
    const bool mb = model.kind == ThermoKind::MaxwellBoltzmann;
    if (model.clamp_mobility && (mb ? f : f * (1.0 - f)) < 0.0) {
        return 0.0;
    }
    return mb ? 1.0 : 1.0 - 2.0 * f;
}

/// Mass, momentum, kinetic energy, entropy and free energy of a discrete state.
struct InvariantsRecord {
    double mass = 0.0;
    Vec2 momentum = Vec2::Zero();
    double energy = 0.0;
    double entropy = 0.0;
    double free_energy = 0.0;
    double time = 0.0;
};

/// Gradient of the kinetic energy, (m/2) M eps_hat, or the quadrature moment
/// (m/2) int |v|^2 phi_i when |v|^2 is not representable.
inline Vector energy_gradient(const FunctionSpace& space, const MassMatrix& mass,
                              const MonomialCoefficients& monos) {
    const double half_m = 0.5 * ThermoModel::particle_mass;
    if (monos.eps_hat) {
        return half_m * mass.apply(*monos.eps_hat);
    }
    Vector v2(space.n_quad());
    for (Index q = 0; q < space.n_quad(); ++q) {
        v2(q) = space.quad.points[static_cast<std::size_t>(q)].coord.squaredNorm();
    }
    return half_m * project_to_dual(space, v2);
}

inline double entropy_value(const FunctionSpace& space, const Vector& coeffs, const ThermoModel& model) {
    const Vector fq = eval_at_quad(space, coeffs).value;
    double s = 0.0;
    for (Index q = 0; q < space.n_quad(); ++q) {
        s += space.quad.points[static_cast<std::size_t>(q)].weight * entropy_density(model, fq(q)).s;
    }
    return s;
}

/// (grad S)_i = sum_q w_q phi_i(q) s_f(f_h(q)).
inline Vector entropy_gradient(const FunctionSpace& space, const Vector& coeffs, const ThermoModel& model) {
    if (coeffs.size() != space.n_dof) {
        throw DimensionError("thermo: coefficient vector length does not match n_dof");
    }
    Vector sf = space.values * coeffs;
    for (Index q = 0; q < sf.size(); ++q) {
        sf(q) = entropy_density(model, sf(q)).s_f;
    }
    return project_to_dual(space, sf);
}

/// Hessian sum_q w_q phi_i(q) phi_j(q) s_ff(f_h(q)) as a dense matrix.
inline Eigen::MatrixXd entropy_hessian(const FunctionSpace& space, const Vector& coeffs,
                                       const ThermoModel& model) {
    const Vector fq = eval_at_quad(space, coeffs).value;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(space.n_dof, space.n_dof);
    for (Index q = 0; q < space.n_quad(); ++q) {
        const auto& pt = space.quad.points[static_cast<std::size_t>(q)];
        const double c = pt.weight * entropy_second_derivative(model, fq(q));
        const auto dofs = space.cell_dofs(pt.cell);
        for (Index a = 0; a < space.local_size; ++a) {
            for (Index b = 0; b < space.local_size; ++b) {
                h(dofs[static_cast<std::size_t>(a)], dofs[static_cast<std::size_t>(b)]) +=
                    c * space.phi(q, a) * space.phi(q, b);
            }
        }
    }
    return h;
}

inline InvariantsRecord compute_invariants(const FunctionSpace& space, const MassMatrix& mass,
                                           const MonomialCoefficients& monos,
                                           const DistributionState& state, const ThermoModel& model) {
    const Vector mf = mass.apply(state.coeffs);
    InvariantsRecord r;
    r.time = state.time;
    r.mass = monos.ones.dot(mf);
    r.momentum = Vec2(monos.v_hat[0].dot(mf), monos.v_hat[1].dot(mf));
    r.energy = monos.eps_hat ? 0.5 * ThermoModel::particle_mass * monos.eps_hat->dot(mf)
                             : energy_gradient(space, mass, monos).dot(state.coeffs);
    r.entropy = entropy_value(space, state.coeffs, model);
    r.free_energy = r.energy - r.entropy;
    return r;
}

inline Vector free_energy_gradient(const FunctionSpace& space, const MassMatrix& mass,
                                   const MonomialCoefficients& monos, const Vector& coeffs,
                                   const ThermoModel& model) {
    return energy_gradient(space, mass, monos) - entropy_gradient(space, coeffs, model);
}

/// Free energy F = E - S as a differentiable functional of the coefficients.
///
/// The energy part uses a precomputed gradient vector, so it is exactly linear.
class FreeEnergy {
public:
    FreeEnergy(const FunctionSpace& space, const MassMatrix& mass, const MonomialCoefficients& monos,
               const ThermoModel& model)
        : space_(&space), model_(&model), energy_grad_(energy_gradient(space, mass, monos)) {}

    double value(const Vector& u) const {
        return energy_grad_.dot(u) - entropy_value(*space_, u, *model_);
    }

    Vector gradient(const Vector& u) const { return energy_grad_ - entropy_gradient(*space_, u, *model_); }

    Eigen::MatrixXd hessian(const Vector& u) const { return -entropy_hessian(*space_, u, *model_); }

    /// F(u1) - F(u0) accumulated pointwise, accurate relative to |u1 - u0|.
    double increment(const Vector& u0, const Vector& u1) const {
        const Vector du = u1 - u0;
        const Vector a = space_->values * u0;
        const Vector b = space_->values * u1;
        double ds = 0.0;
        for (Index q = 0; q < a.size(); ++q) {
            ds += space_->quad.points[static_cast<std::size_t>(q)].weight * entropy_increment(*model_, a(q), b(q));
        }
        return energy_grad_.dot(du) - ds;
    }

    const Vector& energy_gradient_vector() const { return energy_grad_; }

private:
    const FunctionSpace* space_;
    const ThermoModel* model_;
    Vector energy_grad_;
};

struct EquilibriumSolution {
    DistributionState f_eq;
    double lambda_mass = 0.0;
    Vec2 lambda_momentum = Vec2::Zero();
    double lambda_energy = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
};

struct EquilibriumOptions {
    double tolerance = 1e-11;
    int max_iterations = 60;
};

/// M-projection of the isotropic Maxwellian with the given density, drift and
/// temperature, evaluated on the untruncated velocity space.
inline DistributionState projected_maxwellian(const FunctionSpace& space, const MassMatrix& mass,
                                              double density, const Vec2& drift, double temperature) {
    if (!(temperature > 0.0)) {
        throw ConfigError("maxwellian: temperature must be positive");
    }
    const double m = ThermoModel::particle_mass;
    Vector fq(space.n_quad());
    for (Index q = 0; q < space.n_quad(); ++q) {
        const Vec2 d = space.quad.points[static_cast<std::size_t>(q)].coord - drift;
        fq(q) = density * m / (2.0 * std::numbers::pi * temperature) *
                std::exp(-m * d.squaredNorm() / (2.0 * temperature));
    }
    return DistributionState{mass.solve(project_to_dual(space, fq)), 0.0};
}

/// Maxwellian guess whose untruncated moments match the targets.
inline DistributionState maxwellian_guess(const FunctionSpace& space, const MassMatrix& mass,
                                          const InvariantsRecord& targets) {
    if (!(targets.mass > 0.0)) {
        throw SolverError("equilibrium: target mass must be positive", 0.0, 0);
    }
    const double m = ThermoModel::particle_mass;
    const Vec2 drift = targets.momentum / targets.mass;
    // E = (m/2) n (|u|^2 + 2T/m) in two dimensions.
    const double temperature = (targets.energy / targets.mass - 0.5 * m * drift.squaredNorm());
    if (!(temperature > 0.0)) {
        throw SolverError("equilibrium: targets imply a nonpositive temperature", 0.0, 0);
    }
    return projected_maxwellian(space, mass, targets.mass, drift, temperature);
}

namespace detail {

struct EquilibriumResidual {
    Vector stationarity;
    Eigen::Vector4d constraints;
    double norm;
};

inline EquilibriumResidual equilibrium_residual(const FunctionSpace& space, const ThermoModel& model,
                                                const Eigen::MatrixXd& c, const Eigen::Vector4d& targets,
                                                double scale, const Vector& f, const Eigen::Vector4d& lambda) {
    EquilibriumResidual r;
    r.stationarity = entropy_gradient(space, f, model) + c * lambda;
    r.constraints = c.transpose() * f - targets;
    r.norm = std::max(r.stationarity.lpNorm<Eigen::Infinity>(),
                      r.constraints.lpNorm<Eigen::Infinity>() / scale);
    return r;
}

} // namespace detail

/// Solves grad S(f) + lambda_M M 1 + lambda_P . M v_hat + lambda_E (m/2) M eps_hat = 0
/// together with the mass, momentum and energy constraints by damped Newton
/// iteration on (f, lambda).
///
/// The residual norm is max(|stationarity|_inf, |constraint mismatch|_inf / mass).
/// Throws SolverError when the iteration stalls, or when the converged state
/// has a nonnegative energy multiplier (no positive-temperature equilibrium
/// with these moments exists on the box).
inline EquilibriumSolution solve_equilibrium(const FunctionSpace& space, const MassMatrix& mass,
                                             const MonomialCoefficients& monos, const ThermoModel& model,
                                             const InvariantsRecord& targets, const DistributionState& init,
                                             const EquilibriumOptions& options = {}) {
    model.validate();
    if (init.coeffs.size() != space.n_dof) {
        throw DimensionError("equilibrium: initial guess has the wrong length");
    }
    if (!(targets.mass > 0.0) || !(targets.energy > 0.0)) {
        throw SolverError("equilibrium: targets need positive mass and energy", 0.0, 0);
    }
    const Index n = space.n_dof;
    Eigen::MatrixXd c(n, 4);
    c.col(0) = mass.apply(monos.ones);
    c.col(1) = mass.apply(monos.v_hat[0]);
    c.col(2) = mass.apply(monos.v_hat[1]);
    c.col(3) = energy_gradient(space, mass, monos);
    const Eigen::Vector4d t(targets.mass, targets.momentum.x(), targets.momentum.y(), targets.energy);
    const double scale = std::abs(targets.mass);

    Vector f = init.coeffs;
    // Multipliers from the least-squares fit of the stationarity condition.
    Eigen::Vector4d lambda =
        -(c.transpose() * c).ldlt().solve(c.transpose() * entropy_gradient(space, f, model));
    auto res = detail::equilibrium_residual(space, model, c, t, scale, f, lambda);

    int it = 0;
    for (; it < options.max_iterations && res.norm > options.tolerance; ++it) {
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 4, n + 4);
        kkt.topLeftCorner(n, n) = entropy_hessian(space, f, model);
        kkt.topRightCorner(n, 4) = c;
        kkt.bottomLeftCorner(4, n) = c.transpose();
        Vector rhs(n + 4);
        rhs << -res.stationarity, -res.constraints;
        const Vector step = kkt.partialPivLu().solve(rhs);
        if (!step.allFinite()) {
            throw SolverError("equilibrium: singular Newton system", res.norm, it);
        }
        double alpha = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving, alpha *= 0.5) {
            const Vector f_try = f + alpha * step.head(n);
            const Eigen::Vector4d l_try = lambda + alpha * step.tail<4>();
            auto r_try = detail::equilibrium_residual(space, model, c, t, scale, f_try, l_try);
            if (std::isfinite(r_try.norm) && r_try.norm < res.norm) {
                f = f_try;
                lambda = l_try;
                res = std::move(r_try);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }
    }
    if (!(res.norm <= options.tolerance)) {
        throw SolverError("equilibrium: Newton iteration did not converge (residual " +
                              std::to_string(res.norm) + ")",
                          res.norm, it);
    }
    if (!(lambda(3) < 0.0)) {
        throw SolverError("equilibrium: targets are not realizable by a positive-temperature "
                          "equilibrium on this velocity box",
                          res.norm, it);
    }
    EquilibriumSolution sol;
    sol.f_eq = DistributionState{f, init.time};
    sol.lambda_mass = lambda(0);
    sol.lambda_momentum = Vec2(lambda(1), lambda(2));
    sol.lambda_energy = lambda(3);
    sol.residual_norm = res.norm;
    sol.iterations = it;
    return sol;
}

} // namespace metriplectic
