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

#include <stdexcept>
#include <string>

namespace metriplectic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter or configuration value is out of its admissible range.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Vector or matrix sizes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// The requested operation is not supported by the chosen discretization or model.
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Assembly produced an unusable operator (e.g. a singular mass matrix).
class AssemblyError : public Error {
public:
    using Error::Error;
};

/// A thermodynamic model was evaluated outside its domain.
class ModelDomainError : public Error {
public:
    using Error::Error;
};

/// An object was used before it was fully initialized.
class StateError : public Error {
public:
    using Error::Error;
};

/// A nonlinear or linear solver failed to converge.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

} // namespace metriplectic
