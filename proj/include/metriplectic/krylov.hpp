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

namespace metriplectic {

struct GmresResult {
    Eigen::VectorXd x;
    double relative_residual = 0.0;
    int iterations = 0;
};

/// Restarted GMRES(m) with modified Gram-Schmidt and Givens rotations, x0 = 0.
///
/// `apply` maps a vector to the operator times that vector. Iteration stops
/// once |b - A x| <= tol |b| or after `max_iters` operator applications.
template <class Apply>
GmresResult gmres(const Apply& apply, const Eigen::VectorXd& b, int restart, double tol, int max_iters) {
    const Eigen::Index n = b.size();
    GmresResult out;
    out.x = Eigen::VectorXd::Zero(n);
    const double b_norm = b.norm();
    if (b_norm == 0.0) {
        return out;
    }
    const int m = std::max(1, restart);
    Eigen::VectorXd r = b;
    double beta = b_norm;

    while (out.iterations < max_iters) {
        Eigen::MatrixXd v(n, m + 1);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
        Eigen::VectorXd cs = Eigen::VectorXd::Zero(m);
        Eigen::VectorXd sn = Eigen::VectorXd::Zero(m);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
        v.col(0) = r / beta;
        g(0) = beta;

        int k = 0;
        for (; k < m && out.iterations < max_iters; ++k) {
            ++out.iterations;
            Eigen::VectorXd w = apply(Eigen::VectorXd(v.col(k)));
            for (int i = 0; i <= k; ++i) {
                h(i, k) = w.dot(v.col(i));
                w -= h(i, k) * v.col(i);
            }
            h(k + 1, k) = w.norm();
            if (h(k + 1, k) > 0.0) {
                v.col(k + 1) = w / h(k + 1, k);
            }
            for (int i = 0; i < k; ++i) {
                const double t = cs(i) * h(i, k) + sn(i) * h(i + 1, k);
                h(i + 1, k) = -sn(i) * h(i, k) + cs(i) * h(i + 1, k);
                h(i, k) = t;
            }
            const double denom = std::hypot(h(k, k), h(k + 1, k));
            cs(k) = denom == 0.0 ? 1.0 : h(k, k) / denom;
            sn(k) = denom == 0.0 ? 0.0 : h(k + 1, k) / denom;
            h(k, k) = denom;
            h(k + 1, k) = 0.0;
            g(k + 1) = -sn(k) * g(k);
            g(k) = cs(k) * g(k);
            if (std::abs(g(k + 1)) <= tol * b_norm || denom == 0.0) {
                ++k;
                break;
            }
        }
        const Eigen::VectorXd y =
            h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        out.x += v.leftCols(k) * y;
        r = b - apply(out.x);
        beta = r.norm();
        out.relative_residual = beta / b_norm;
        if (out.relative_residual <= tol) {
            break;
        }
    }
    return out;
}

} // namespace metriplectic
