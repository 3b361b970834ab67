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
#include <concepts>
#include <vector>

#include <Eigen/Core>

#include "metriplectic/errors.hpp"
#include "metriplectic/mesh.hpp"

namespace metriplectic {

template <class F>
concept DifferentiableFunctional = requires(const F& fn, const Eigen::VectorXd& u) {
    { fn.value(u) } -> std::convertible_to<double>;
    { fn.gradient(u) } -> std::convertible_to<Eigen::VectorXd>;
};

namespace detail {

/// F(u1) - F(u0), through fn.increment when the functional provides one.
template <DifferentiableFunctional F>
double functional_increment(const F& fn, const Eigen::VectorXd& u0, const Eigen::VectorXd& u1) {
    if constexpr (requires { { fn.increment(u0, u1) } -> std::convertible_to<double>; }) {
        return fn.increment(u0, u1);
    } else {
        return fn.value(u1) - fn.value(u0);
    }
}

} // namespace detail

enum class DiscreteGradientMethod { GonzalezMidpoint, Average };

struct DiscreteGradientKind {
    DiscreteGradientMethod kind = DiscreteGradientMethod::GonzalezMidpoint;
    /// Steps with |u1 - u0| <= dg_threshold * max(|u0|, |u1|) are treated as degenerate.
    double dg_threshold = 1e-14;
    /// Gauss points on [0, 1] for the averaged gradient.
    int xi_quadrature_order = 8;

    void validate() const {
        if (!(dg_threshold > 0.0)) {
            throw ConfigError("integrator.dg_threshold must be positive");
        }
        if (xi_quadrature_order < 1) {
            throw ConfigError("integrator.xi_order must be at least 1");
        }
    }
};

/// Two-point gradient with (u1 - u0) . dF = F(u1) - F(u0) and dF(u, u) = grad F(u).
///
/// GonzalezMidpoint corrects grad F at the midpoint along the step direction.
/// Average integrates grad F along the segment by Gauss quadrature and then
/// applies the same secant correction, which vanishes when the quadrature is
/// exact. In the degenerate case both return grad F at the midpoint.
template <DifferentiableFunctional F>
Eigen::VectorXd discrete_gradient(const DiscreteGradientKind& kind, const F& fn, const Eigen::VectorXd& u0,
                                  const Eigen::VectorXd& u1) {
    if (u0.size() != u1.size()) {
        throw DimensionError("discrete gradient: state lengths differ");
    }
    const Eigen::VectorXd du = u1 - u0;
    const Eigen::VectorXd mid = 0.5 * (u0 + u1);
    const double du2 = du.squaredNorm();
    const double scale = std::max(u0.norm(), u1.norm());
    if (!(std::sqrt(du2) > kind.dg_threshold * scale) || du2 == 0.0) {
        return fn.gradient(mid);
    }

    Eigen::VectorXd g;
    if (kind.kind == DiscreteGradientMethod::GonzalezMidpoint) {
        g = fn.gradient(mid);
    } else {
        std::vector<double> nodes;
        std::vector<double> weights;
        detail::gauss_legendre(kind.xi_quadrature_order, nodes, weights);
        g = Eigen::VectorXd::Zero(u0.size());
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const double xi = 0.5 * (nodes[k] + 1.0);
            g += (0.5 * weights[k]) * fn.gradient(((1.0 - xi) * u0 + xi * u1).eval());
        }
    }
    const double defect = detail::functional_increment(fn, u0, u1) - du.dot(g);
    return g + (defect / du2) * du;
}

template <class F>
concept TwiceDifferentiableFunctional = DifferentiableFunctional<F> && requires(const F& fn, const Eigen::VectorXd& u) {
    { fn.hessian(u) } -> std::convertible_to<Eigen::MatrixXd>;
};

/// Derivative of discrete_gradient(kind, fn, u0, u1) with respect to u1.
template <TwiceDifferentiableFunctional F>
Eigen::MatrixXd discrete_gradient_jacobian(const DiscreteGradientKind& kind, const F& fn, const Eigen::VectorXd& u0,
                                           const Eigen::VectorXd& u1) {
    if (u0.size() != u1.size()) {
        throw DimensionError("discrete gradient: state lengths differ");
    }
    const Eigen::VectorXd du = u1 - u0;
    const Eigen::VectorXd mid = 0.5 * (u0 + u1);
    const double du2 = du.squaredNorm();
    const double scale = std::max(u0.norm(), u1.norm());
    if (!(std::sqrt(du2) > kind.dg_threshold * scale) || du2 == 0.0) {
        return 0.5 * fn.hessian(mid);
    }

    Eigen::VectorXd g;
    Eigen::MatrixXd dg;
    if (kind.kind == DiscreteGradientMethod::GonzalezMidpoint) {
        g = fn.gradient(mid);
        dg = 0.5 * fn.hessian(mid);
    } else {
        std::vector<double> nodes;
        std::vector<double> weights;
        detail::gauss_legendre(kind.xi_quadrature_order, nodes, weights);
        g = Eigen::VectorXd::Zero(u0.size());
        dg = Eigen::MatrixXd::Zero(u0.size(), u0.size());
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const double xi = 0.5 * (nodes[k] + 1.0);
            const Eigen::VectorXd u = (1.0 - xi) * u0 + xi * u1;
            g += (0.5 * weights[k]) * fn.gradient(u);
            dg += (0.5 * weights[k] * xi) * fn.hessian(u);
        }
    }
    // dF = g + c du with c = (F(u1) - F(u0) - du.g) / |du|^2.
    const double c = (detail::functional_increment(fn, u0, u1) - du.dot(g)) / du2;
    const Eigen::VectorXd dc = (fn.gradient(u1) - g - dg.transpose() * du) / du2 - (2.0 * c / du2) * du;
    Eigen::MatrixXd jac = dg;
    jac.diagonal().array() += c;
    jac.noalias() += du * dc.transpose();
    return jac;
}

} // namespace metriplectic
