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
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "metriplectic/discrete_gradient.hpp"
#include "metriplectic/errors.hpp"
#include "metriplectic/krylov.hpp"
#include "metriplectic/landau.hpp"
#include "metriplectic/problem.hpp"
#include "metriplectic/thermo.hpp"

namespace metriplectic {

enum class NonlinearSolver { Picard, NewtonKrylov };
enum class AssemblyPath { Dense, Sparse };

struct KrylovSettings {
    int restart = 30;
    double inner_tol = 1e-4;
    int max_inner_iters = 400;
    int max_newton_iters = 40;
    /// Finite-difference step for directional derivatives, relative to 1 + |f|.
    double fd_step = 1e-7;
    /// Use finite-difference Jacobian-vector products (true) or the assembled Jacobian (false).
    bool matrix_free = true;
};

struct StepConfig {
    double dt = 0.1;
    NonlinearSolver solver = NonlinearSolver::Picard;
    double picard_tol = 1e-12;
    int picard_max_iters = 200;
    KrylovSettings krylov;
    AssemblyPath path = AssemblyPath::Sparse;
    /// Switch to Newton-Krylov when the Picard iteration diverges or stalls.
    bool newton_krylov_fallback = true;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ConfigError("integrator.dt must be positive");
        }
        if (!(picard_tol > 0.0 && picard_tol < 1.0)) {
            throw ConfigError("integrator.picard_tol must lie in (0, 1)");
        }
        if (picard_max_iters < 1) {
            throw ConfigError("integrator.picard_max_iters must be at least 1");
        }
        if (!(krylov.inner_tol > 0.0 && krylov.inner_tol < 1.0)) {
            throw ConfigError("integrator.krylov_tol must lie in (0, 1)");
        }
        if (krylov.restart < 1 || krylov.max_inner_iters < 1 || krylov.max_newton_iters < 1) {
            throw ConfigError("integrator: Krylov iteration limits must be positive");
        }
        if (!(krylov.fd_step > 0.0)) {
            throw ConfigError("integrator.fd_step must be positive");
        }
    }
};

struct StepReport {
    DistributionState f_next;
    int iterations = 0;
    int krylov_iterations = 0;
    double residual_norm = 0.0;
    NonlinearSolver solver_used = NonlinearSolver::Picard;
    InvariantsRecord invariants_before;
    InvariantsRecord invariants_after;
    double entropy_increment = 0.0;
};

/// Raised when a time step does not converge; carries the last iterate.
class StepperError : public SolverError {
public:
    StepperError(const std::string& what, double residual, int iterations, Vector last_iterate)
        : SolverError(what, residual, iterations), last_iterate_(std::move(last_iterate)) {}

    const Vector& last_iterate() const noexcept { return last_iterate_; }

private:
    Vector last_iterate_;
};

/// The discrete-gradient step equation M (f - f_n) = dt * rhs(f) for one step.
///
/// rhs(f) = L(f_half) M^{-1} dF(f_n, f) on the dense path and
/// C(f_n, f) f_half on the sparse path, with f_half = (f_n + f) / 2.
class StepEquation {
public:
    StepEquation(const CollisionProblem& problem, const Vector& f_n, const StepConfig& cfg,
                 const DiscreteGradientKind& dg)
        : problem_(&problem),
          f_n_(f_n),
          cfg_(&cfg),
          dg_(dg),
          energy_(problem.free_energy()),
          m_fn_(problem.mass.apply(f_n)) {
        const double s = m_fn_.norm();
        residual_scale_ = s > 0.0 ? s : 1.0;
    }

    Vector rhs(const Vector& f) const {
        const Vector f_half = 0.5 * (f_n_ + f);
        const Vector dgrad = discrete_gradient(dg_, energy_, f_n_, f);
        const Vector w = problem_->mass.solve(dgrad);
        if (cfg_->path == AssemblyPath::Dense) {
            return assemble_landau_dense(problem_->space, problem_->kernel, f_half, problem_->model).entries * w;
        }
        return sparse_apply(
            assemble_sparse_operator(problem_->space, problem_->kernel, f_half, w, problem_->model), f_half);
    }

    /// M (f - f_n) - dt * rhs.
    Vector residual(const Vector& f, const Vector& rhs_f) const {
        return problem_->mass.apply(f) - m_fn_ - cfg_->dt * rhs_f;
    }

    double relative(const Vector& residual) const { return residual.norm() / residual_scale_; }

    /// f_n + dt M^{-1} rhs. Every image of this map conserves the Casimirs.
    Vector picard_image(const Vector& rhs_f) const { return f_n_ + cfg_->dt * problem_->mass.solve(rhs_f); }

    /// Step Jacobian M - dt * d rhs/df, assembled densely:
    /// d rhs/df = (1/2) dL(f_half)w/df_half + L(f_half) M^{-1} d(dF)/df.
    Eigen::MatrixXd jacobian(const Vector& f) const {
        const Vector f_half = 0.5 * (f_n_ + f);
        const Vector w = problem_->mass.solve(discrete_gradient(dg_, energy_, f_n_, f));
        const Eigen::MatrixXd l =
            assemble_landau_dense(problem_->space, problem_->kernel, f_half, problem_->model).entries;
        const Eigen::MatrixXd x =
            problem_->mass.factorization->solve(discrete_gradient_jacobian(dg_, energy_, f_n_, f));
        Eigen::MatrixXd j = Eigen::MatrixXd(problem_->mass.entries);
        j.noalias() -= cfg_->dt * (l * x);
        j.noalias() -= (0.5 * cfg_->dt) *
                       landau_mobility_jacobian(problem_->space, problem_->kernel, f_half, w, problem_->model);
        return j;
    }

    const Vector& f_n() const { return f_n_; }

private:
    const CollisionProblem* problem_;
    Vector f_n_;
    const StepConfig* cfg_;
    DiscreteGradientKind dg_;
    FreeEnergy energy_;
    Vector m_fn_;
    double residual_scale_ = 1.0;
};

namespace detail {

struct SolveOutcome {
    Vector f;
    double residual = 0.0;
    int iterations = 0;
    int krylov_iterations = 0;
    bool converged = false;
};

inline SolveOutcome picard_solve(const StepEquation& eq, const StepConfig& cfg) {
    SolveOutcome best;
    Vector f = eq.f_n();
    double previous = std::numeric_limits<double>::infinity();
    double first = 0.0;
    int growth = 0;
    for (int it = 0; it < cfg.picard_max_iters; ++it) {
        const Vector r = eq.rhs(f);
        const double rel = eq.relative(eq.residual(f, r));
        if (it == 0) {
            first = rel;
        }
        if (!std::isfinite(rel)) {
            break;
        }
        if (it == 0 || rel < best.residual) {
            best.f = f;
            best.residual = rel;
        }
        best.iterations = it + 1;
        if (rel <= cfg.picard_tol) {
            best.f = f;
            best.residual = rel;
            best.converged = true;
            return best;
        }
        growth = rel >= previous ? growth + 1 : 0;
        if (growth >= 3 || rel > 1e3 * first) {
            break;
        }
        previous = rel;
        f = eq.picard_image(r);
    }
    return best;
}

inline SolveOutcome newton_krylov_solve(const StepEquation& eq, const StepConfig& cfg, const Vector& start,
                                        const MassMatrix& mass) {
    const KrylovSettings& ks = cfg.krylov;
    const double newton_target = 0.05 * cfg.picard_tol;
    SolveOutcome out;
    out.f = start;
    Vector r = eq.rhs(out.f);
    Vector res = eq.residual(out.f, r);
    double rel = eq.relative(res);
    out.residual = rel;

    // Finish with one exactly conservative map application.
    auto polish = [&]() {
        const Vector f_out = eq.picard_image(r);
        const Vector r_out = eq.rhs(f_out);
        const Vector res_out = eq.residual(f_out, r_out);
        const double rel_out = eq.relative(res_out);
        out.f = f_out;
        out.residual = rel_out;
        r = r_out;
        res = res_out;
        rel = rel_out;
        out.converged = rel_out <= cfg.picard_tol;
        return out.converged;
    };

    for (int it = 0; it < ks.max_newton_iters; ++it) {
        out.iterations = it + 1;
        if (rel <= newton_target && polish()) {
            return out;
        }
        const Vector f = out.f;
        const Vector r_f = r;
        const Eigen::PartialPivLU<Eigen::MatrixXd> precond(eq.jacobian(f));
        const double eps_base = ks.fd_step * (1.0 + f.norm());
        // Right-preconditioned: solve J P^{-1} y = -R, then delta = P^{-1} y.
        auto operator_apply = [&](const Vector& y) -> Vector {
            const Vector z = precond.solve(y);
            const double zn = z.norm();
            if (zn == 0.0) {
                return Vector::Zero(y.size());
            }
            const double eps = eps_base / zn;
            return mass.apply(z) - cfg.dt * (eq.rhs(f + eps * z) - r_f) / eps;
        };
        // At f = f_n the discrete-gradient correction is pure rounding under a
        // finite-difference perturbation, so the first update uses P directly.
        Vector delta;
        if (!ks.matrix_free || (f - eq.f_n()).norm() <= 1e-8 * (1.0 + f.norm())) {
            delta = precond.solve(Vector(-res));
        } else {
            const GmresResult lin =
                gmres(operator_apply, Vector(-res), ks.restart, ks.inner_tol, ks.max_inner_iters);
            out.krylov_iterations += lin.iterations;
            delta = precond.solve(lin.x);
        }

        double alpha = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 8; ++halving, alpha *= 0.5) {
            const Vector f_try = f + alpha * delta;
            const Vector r_try = eq.rhs(f_try);
            const Vector res_try = eq.residual(f_try, r_try);
            const double rel_try = eq.relative(res_try);
            if (std::isfinite(rel_try) && rel_try < rel) {
                out.f = f_try;
                r = r_try;
                res = res_try;
                rel = rel_try;
                out.residual = rel;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Stagnation at rounding level.
            if (rel <= cfg.picard_tol) {
                polish();
            }
            return out;
        }
    }
    if (rel <= cfg.picard_tol) {
        polish();
    }
    return out;
}

} // namespace detail

inline StepReport advance(const CollisionProblem& problem, const DistributionState& f_n, const StepConfig& cfg,
                          const DiscreteGradientKind& dg) {
    cfg.validate();
    dg.validate();
    if (f_n.coeffs.size() != problem.n_dof()) {
        throw DimensionError("integrator: state length does not match n_dof");
    }
    const StepEquation eq(problem, f_n.coeffs, cfg, dg);

    detail::SolveOutcome outcome;
    NonlinearSolver used = cfg.solver;
    int picard_iterations = 0;
    if (cfg.solver == NonlinearSolver::Picard) {
        outcome = detail::picard_solve(eq, cfg);
        picard_iterations = outcome.iterations;
        if (!outcome.converged && cfg.newton_krylov_fallback) {
            const Vector start = outcome.f.size() == f_n.coeffs.size() ? outcome.f : f_n.coeffs;
            outcome = detail::newton_krylov_solve(eq, cfg, start, problem.mass);
            used = NonlinearSolver::NewtonKrylov;
        }
    } else {
        outcome = detail::newton_krylov_solve(eq, cfg, f_n.coeffs, problem.mass);
    }
    const int iterations = used == NonlinearSolver::NewtonKrylov && cfg.solver == NonlinearSolver::Picard
                               ? picard_iterations + outcome.iterations
                               : outcome.iterations;
    if (!outcome.converged) {
        throw StepperError("integrator: nonlinear step did not converge (relative residual " +
                               std::to_string(outcome.residual) + ")",
                           outcome.residual, iterations, outcome.f.size() ? outcome.f : f_n.coeffs);
    }

    StepReport report;
    report.f_next = DistributionState{std::move(outcome.f), f_n.time + cfg.dt};
    report.iterations = iterations;
    report.krylov_iterations = outcome.krylov_iterations;
    report.residual_norm = outcome.residual;
    report.solver_used = used;
    report.invariants_before = problem.invariants(f_n);
    report.invariants_after = problem.invariants(report.f_next);
    report.entropy_increment = report.invariants_after.entropy - report.invariants_before.entropy;
    return report;
}

/// One step with the dense Landau matrix.
inline StepReport step_dense(const CollisionProblem& problem, const DistributionState& f_n, StepConfig cfg,
                             const DiscreteGradientKind& dg) {
    cfg.path = AssemblyPath::Dense;
    return advance(problem, f_n, cfg, dg);
}

/// One step with the sparse collision operator; needs M(f) = f.
inline StepReport step_sparse(const CollisionProblem& problem, const DistributionState& f_n, StepConfig cfg,
                              const DiscreteGradientKind& dg) {
    if (!problem.model.linear_mobility()) {
        throw CapabilityError("integrator: the sparse path needs the linear mobility M(f) = f");
    }
    cfg.path = AssemblyPath::Sparse;
    return advance(problem, f_n, cfg, dg);
}

struct SimulationResult {
    InvariantsRecord initial;
    std::vector<StepReport> steps;
    std::optional<std::string> failure;

    bool completed() const { return !failure.has_value(); }
};

/// Advances `n_steps` steps, calling `on_step` after each converged step.
/// Stops at the first stepper failure and returns the steps done so far.
inline SimulationResult run_simulation(const CollisionProblem& problem, const DistributionState& f0,
                                       const StepConfig& cfg, const DiscreteGradientKind& dg, int n_steps,
                                       const std::function<void(int, const StepReport&)>& on_step = {}) {
    if (n_steps < 1) {
        throw ConfigError("integrator.n_steps must be at least 1");
    }
    cfg.validate();
    dg.validate();
    if (cfg.path == AssemblyPath::Sparse && !problem.model.linear_mobility()) {
        throw CapabilityError("integrator: the sparse path needs the linear mobility M(f) = f");
    }
    SimulationResult result;
    result.initial = problem.invariants(f0);
    DistributionState state = f0;
    for (int step = 1; step <= n_steps; ++step) {
        try {
            StepReport report = advance(problem, state, cfg, dg);
            state = report.f_next;
            result.steps.push_back(std::move(report));
            if (on_step) {
                on_step(step, result.steps.back());
            }
        } catch (const StepperError& e) {
            result.failure = "step " + std::to_string(step) + ": " + e.what();
            break;
        }
    }
    return result;
}

} // namespace metriplectic
