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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "metriplectic/config.hpp"
#include "metriplectic/discrete_gradient.hpp"
#include "metriplectic/errors.hpp"
#include "metriplectic/integrator.hpp"
#include "metriplectic/landau.hpp"
#include "metriplectic/problem.hpp"
#include "metriplectic/thermo.hpp"

namespace metriplectic {

enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitConfig = 2,
    kExitSolver = 3,
    kExitIo = 4,
};

namespace detail {

/// 17 significant digits, locale independent.
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    return out;
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error("cannot create " + dir.string() + ": " + ec.message());
    }
}

inline void write_snapshot(const std::filesystem::path& path, const FunctionSpace& space, const Vector& f) {
    std::ofstream out = open_output(path);
    out << "v1,v2,f\n";
    for (Index i = 0; i < space.n_dof; ++i) {
        const Vec2& x = space.dof_coords[static_cast<std::size_t>(i)];
        out << fmt(x.x()) << ',' << fmt(x.y()) << ',' << fmt(f(i)) << '\n';
    }
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

inline void write_diagnostics_row(std::ostream& out, int step, const InvariantsRecord& inv, double ds, int iterations,
                                  double residual) {
    out << step << ',' << fmt(inv.time) << ',' << fmt(inv.mass) << ',' << fmt(inv.momentum.x()) << ','
        << fmt(inv.momentum.y()) << ',' << fmt(inv.energy) << ',' << fmt(inv.entropy) << ','
        << fmt(inv.free_energy) << ',' << fmt(ds) << ',' << iterations << ',' << fmt(residual) << '\n';
}

inline std::string snapshot_name(int step) { return "snapshot_" + std::to_string(step) + ".csv"; }

} // namespace detail

inline constexpr const char* kDiagnosticsHeader =
    "step,time,mass,momentum_x,momentum_y,energy,entropy,free_energy,entropy_increment,solver_iterations,"
    "residual_norm";

inline CollisionProblem make_problem(const RunConfig& cfg) { return make_problem(cfg.mesh, cfg.thermo); }

/// Time-steps the configured initial condition. Writes diagnostics.csv (one
/// row per step, row 0 is the initial state) and snapshot_<step>.csv every
/// snapshot_stride steps plus the last completed step.
inline int run_command(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
    cfg.validate();
    const CollisionProblem problem = make_problem(cfg);
    if (cfg.integrator.path == AssemblyPath::Sparse && !problem.model.linear_mobility()) {
        throw CapabilityError("integrator: the sparse path needs the linear mobility M(f) = f");
    }
    const DistributionState f0 = build_initial_condition(problem.space, cfg.initial_condition);

    detail::ensure_directory(out_dir);
    std::ofstream diag = detail::open_output(out_dir / "diagnostics.csv");
    diag << kDiagnosticsHeader << '\n';
    detail::write_diagnostics_row(diag, 0, problem.invariants(f0), 0.0, 0, 0.0);
    diag.flush();
    detail::write_snapshot(out_dir / detail::snapshot_name(0), problem.space, f0.coeffs);

    const int stride = cfg.output.snapshot_stride;
    const SimulationResult result = run_simulation(
        problem, f0, cfg.integrator, cfg.dg, cfg.n_steps, [&](int step, const StepReport& rep) {
            detail::write_diagnostics_row(diag, step, rep.invariants_after, rep.entropy_increment, rep.iterations,
                                          rep.residual_norm);
            diag.flush();
            if ((stride > 0 && step % stride == 0) || step == cfg.n_steps) {
                detail::write_snapshot(out_dir / detail::snapshot_name(step), problem.space, rep.f_next.coeffs);
            }
        });
    if (!diag) {
        throw Error("write failed: " + (out_dir / "diagnostics.csv").string());
    }
    if (!result.completed()) {
        const int last = static_cast<int>(result.steps.size());
        if (last > 0 && !(stride > 0 && last % stride == 0)) {
            detail::write_snapshot(out_dir / detail::snapshot_name(last), problem.space,
                                   result.steps.back().f_next.coeffs);
        }
        log << "run: stopped at " << *result.failure << '\n';
        return kExitSolver;
    }
    log << "run: " << cfg.n_steps << " steps written to " << out_dir.string() << '\n';
    return kExitOk;
}

/// Solves for the Maxwellian with the initial condition's mass, momentum and
/// energy. Writes snapshot_equilibrium.csv and equilibrium.csv.
inline int equilibrium_command(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
    cfg.validate();
    const CollisionProblem problem = make_problem(cfg);
    const DistributionState f0 = build_initial_condition(problem.space, cfg.initial_condition);
    const InvariantsRecord targets = problem.invariants(f0);

    EquilibriumSolution sol;
    try {
        sol = solve_equilibrium(problem.space, problem.mass, problem.monos, problem.model, targets,
                                maxwellian_guess(problem.space, problem.mass, targets), {});
    } catch (const SolverError& e) {
        log << "equilibrium: failed after " << e.iterations() << " iterations, residual "
            << detail::fmt(e.residual()) << ": " << e.what() << '\n';
        return kExitSolver;
    }

    detail::ensure_directory(out_dir);
    detail::write_snapshot(out_dir / "snapshot_equilibrium.csv", problem.space, sol.f_eq.coeffs);
    std::ofstream out = detail::open_output(out_dir / "equilibrium.csv");
    out << "lambda_mass,lambda_momentum_x,lambda_momentum_y,lambda_energy,residual_norm,iterations\n";
    out << detail::fmt(sol.lambda_mass) << ',' << detail::fmt(sol.lambda_momentum.x()) << ','
        << detail::fmt(sol.lambda_momentum.y()) << ',' << detail::fmt(sol.lambda_energy) << ','
        << detail::fmt(sol.residual_norm) << ',' << sol.iterations << '\n';
    if (!out) {
        throw Error("write failed: " + (out_dir / "equilibrium.csv").string());
    }
    log << "equilibrium: lambda_mass " << detail::fmt(sol.lambda_mass) << ", lambda_momentum ("
        << detail::fmt(sol.lambda_momentum.x()) << ", " << detail::fmt(sol.lambda_momentum.y())
        << "), lambda_energy " << detail::fmt(sol.lambda_energy) << ", residual " << detail::fmt(sol.residual_norm)
        << '\n';
    return kExitOk;
}

enum class CheckStatus { Pass, Fail, Conditional, Skipped };

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    double value = 0.0;
    double bound = 0.0;
    std::string note;
};

inline const char* to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass:
        return "PASS";
    case CheckStatus::Fail:
        return "FAIL";
    case CheckStatus::Conditional:
        return "CONDITIONAL";
    case CheckStatus::Skipped:
        return "SKIP";
    }
    return "?";
}

/// Structural properties of the discretization at the configured resolution,
/// evaluated at the initial condition and a seeded perturbation of it.
inline std::vector<CheckResult> run_checks(const RunConfig& cfg) {
    cfg.validate();
    std::vector<CheckResult> out;
    auto add = [&](std::string name, double value, double bound, std::string note = {}) {
        out.push_back({std::move(name), value <= bound ? CheckStatus::Pass : CheckStatus::Fail, value, bound,
                       std::move(note)});
    };

    const CollisionProblem p = make_problem(cfg);
    const Vector f0 = build_initial_condition(p.space, cfg.initial_condition).coeffs;
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vector f1 = f0;
    const double amp = 1e-2 * f0.cwiseAbs().maxCoeff();
    for (Index i = 0; i < f1.size(); ++i) {
        f1(i) += amp * unit(rng);
    }

    const Eigen::MatrixXd l = assemble_landau_dense(p.space, p.kernel, f0, p.model).entries;
    const double lmax = l.cwiseAbs().maxCoeff();
    add("symmetry", (l - l.transpose()).cwiseAbs().maxCoeff(), 1e-12 * lmax);
    add("annihilation_mass", (p.monos.ones.transpose() * l).cwiseAbs().maxCoeff(), 1e-12 * lmax);
    for (int k = 0; k < 2; ++k) {
        add(std::string("annihilation_momentum_") + (k == 0 ? "x" : "y"),
            (p.monos.v_hat[static_cast<std::size_t>(k)].transpose() * l).cwiseAbs().maxCoeff(), 1e-12 * lmax);
    }
    if (p.monos.eps_hat) {
        add("annihilation_energy", (p.monos.eps_hat->transpose() * l).cwiseAbs().maxCoeff(), 1e-12 * lmax);
    } else {
        out.push_back({"annihilation_energy", CheckStatus::Skipped, 0.0, 0.0, "energy tracking off"});
    }

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (l + l.transpose()), Eigen::EigenvaluesOnly);
    const double spectral = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double top = eig.eigenvalues().maxCoeff();
    add("negative_semidefinite", top, 1e-10 * spectral);
    const Vector fq = eval_at_quad(p.space, f0).value;
    if (out.back().status == CheckStatus::Fail && !p.model.clamp_mobility) {
        const double min_m = fq.unaryExpr([&](double v) { return mobility(p.model, v); }).minCoeff();
        if (min_m < 0.0) {
            out.back().status = CheckStatus::Conditional;
            out.back().note = "mobility is negative at some quadrature points; enable thermo.clamp_mobility";
        }
    }

    const FreeEnergy fe = p.free_energy();
    const double fscale = std::abs(fe.value(f0));
    for (const auto method : {DiscreteGradientMethod::GonzalezMidpoint, DiscreteGradientMethod::Average}) {
        DiscreteGradientKind kind = cfg.dg;
        kind.kind = method;
        const Vector dg = discrete_gradient(kind, fe, f0, f1);
        add(std::string("discrete_gradient_") + (method == DiscreteGradientMethod::Average ? "average" : "gonzalez"),
            std::abs((f1 - f0).dot(dg) - (fe.value(f1) - fe.value(f0))), 1e-12 * fscale);
    }

    if (p.model.linear_mobility()) {
        DiscreteGradientKind kind = cfg.dg;
        const Vector w = p.mass.solve(discrete_gradient(kind, fe, f0, f1));
        const Vector fh = 0.5 * (f0 + f1);
        const Vector dense = assemble_landau_dense(p.space, p.kernel, fh, p.model).entries * w;
        const Vector sparse = sparse_apply(assemble_sparse_operator(p.space, p.kernel, fh, w, p.model), fh);
        add("dense_sparse_equivalence", (dense - sparse).norm() / dense.norm(), 1e-11);
    } else {
        out.push_back({"dense_sparse_equivalence", CheckStatus::Skipped, 0.0, 0.0, "mobility is not M(f) = f"});
    }
    return out;
}

inline int check_command(const RunConfig& cfg, std::ostream& log) {
    std::vector<CheckResult> results;
    try {
        results = run_checks(cfg);
    } catch (const CapabilityError& e) {
        log << "FAIL capability: " << e.what() << '\n';
        return kExitCheckFailed;
    }
    bool failed = false;
    for (const auto& r : results) {
        log << to_string(r.status) << ' ' << r.name;
        if (r.status != CheckStatus::Skipped) {
            log << " value " << detail::fmt(r.value) << " bound " << detail::fmt(r.bound);
        }
        if (!r.note.empty()) {
            log << " (" << r.note << ')';
        }
        log << '\n';
        failed = failed || r.status == CheckStatus::Fail;
    }
    return failed ? kExitCheckFailed : kExitOk;
}

} // namespace metriplectic
