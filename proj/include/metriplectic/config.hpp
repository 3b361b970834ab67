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
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "metriplectic/discrete_gradient.hpp"
#include "metriplectic/errors.hpp"
#include "metriplectic/fem.hpp"
#include "metriplectic/integrator.hpp"
#include "metriplectic/problem.hpp"
#include "metriplectic/thermo.hpp"

namespace metriplectic {

struct GaussianComponent {
    double weight = 1.0;
    Vec2 center = Vec2::Zero();
    double temperature = 1.0;
};

struct OutputSettings {
    std::string directory = "output";
    int snapshot_stride = 10;
};

struct RunConfig {
    DiscretizationParams mesh;
    ThermoModel thermo;
    StepConfig integrator;
    DiscreteGradientKind dg;
    int n_steps = 200;
    std::vector<GaussianComponent> initial_condition;
    OutputSettings output;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

inline void validate_components(const std::vector<GaussianComponent>& components) {
    if (components.empty()) {
        throw ConfigError("initial_condition: at least one Gaussian component is required");
    }
    for (std::size_t c = 0; c < components.size(); ++c) {
        const auto& g = components[c];
        const std::string where = "initial_condition[" + std::to_string(c) + "]";
        if (!(g.weight >= 0.0) || !std::isfinite(g.weight)) {
            throw ConfigError(where + ".weight must be nonnegative");
        }
        if (!(g.temperature > 0.0) || !std::isfinite(g.temperature)) {
            throw ConfigError(where + ".temperature must be positive");
        }
        if (!g.center.allFinite()) {
            throw ConfigError(where + ".center must be finite");
        }
    }
}

inline void RunConfig::validate() const {
    if (!(mesh.v_max > 0.0) || !std::isfinite(mesh.v_max)) {
        throw ConfigError("mesh.v_max must be positive");
    }
    if (mesh.n_cells < 1) {
        throw ConfigError("mesh.n_cells must be at least 1");
    }
    if (mesh.degree != 1 && mesh.degree != 2) {
        throw ConfigError("mesh.degree must be 1 or 2");
    }
    if (mesh.quad_order < 1) {
        throw ConfigError("mesh.quad_order must be at least 1");
    }
    if (mesh.epsilon_u && !(*mesh.epsilon_u > 0.0 && *mesh.epsilon_u <= 1e-10 * mesh.v_max)) {
        throw ConfigError("mesh.epsilon_u must lie in (0, 1e-10 * v_max]");
    }
    thermo.validate();
    integrator.validate();
    dg.validate();
    if (n_steps < 1) {
        throw ConfigError("integrator.n_steps must be at least 1");
    }
    if (output.snapshot_stride < 0) {
        throw ConfigError("output.snapshot_stride must be nonnegative");
    }
    validate_components(initial_condition);
}

/// Nodal interpolation of sum_c weight_c exp(-|v - center_c|^2 / (2 T_c)) / (2 pi T_c).
inline DistributionState build_initial_condition(const FunctionSpace& space,
                                                 const std::vector<GaussianComponent>& components) {
    validate_components(components);
    Vector f = Vector::Zero(space.n_dof);
    for (const auto& g : components) {
        if (g.weight == 0.0) {
            continue;
        }
        const double norm = g.weight / (2.0 * std::numbers::pi * g.temperature);
        for (Index i = 0; i < space.n_dof; ++i) {
            const double r2 = (space.dof_coords[static_cast<std::size_t>(i)] - g.center).squaredNorm();
            f(i) += norm * std::exp(-r2 / (2.0 * g.temperature));
        }
    }
    return DistributionState{f, 0.0};
}

namespace detail {

struct ConfigValue {
    std::string text;
    int line = 0;
};

using ConfigSection = std::vector<std::pair<std::string, ConfigValue>>;

struct ConfigDocument {
    std::map<std::string, ConfigSection> tables;
    std::vector<ConfigSection> components;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') {
            quoted = !quoted;
        } else if (s[i] == '#' && !quoted) {
            return s.substr(0, i);
        }
    }
    return s;
}

[[noreturn]] inline void parse_fail(const std::string& source, int line, const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
}

inline ConfigDocument parse_document(std::istream& in, const std::string& source) {
    ConfigDocument doc;
    ConfigSection* current = nullptr;
    std::string section;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(strip_comment(raw));
        if (s.empty()) {
            continue;
        }
        if (s.rfind("[[", 0) == 0) {
            if (s.size() < 4 || s.substr(s.size() - 2) != "]]") {
                parse_fail(source, line, "malformed array-of-tables header");
            }
            section = trim(s.substr(2, s.size() - 4));
            if (section != "initial_condition") {
                parse_fail(source, line, "unknown array of tables [[" + section + "]]");
            }
            doc.components.emplace_back();
            current = &doc.components.back();
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']') {
                parse_fail(source, line, "malformed table header");
            }
            section = trim(s.substr(1, s.size() - 2));
            if (section != "mesh" && section != "thermo" && section != "integrator" && section != "output") {
                parse_fail(source, line, "unknown table [" + section + "]");
            }
            if (doc.tables.count(section) != 0) {
                parse_fail(source, line, "table [" + section + "] defined twice");
            }
            current = &doc.tables[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            parse_fail(source, line, "expected key = value");
        }
        if (current == nullptr) {
            parse_fail(source, line, "key outside of any table");
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty() || value.empty()) {
            parse_fail(source, line, "expected key = value");
        }
        for (const auto& [k, v] : *current) {
            if (k == key) {
                parse_fail(source, line, "duplicate key '" + key + "'");
            }
        }
        current->emplace_back(key, ConfigValue{value, line});
    }
    return doc;
}

/// Typed reads from one section; every key must be consumed exactly once.
class SectionReader {
public:
    SectionReader(const ConfigSection& section, std::string name, std::string source)
        : section_(section), name_(std::move(name)), source_(std::move(source)), used_(section.size(), false) {}

    void read(const std::string& key, double& out) {
        if (const auto* v = find(key)) {
            std::size_t pos = 0;
            try {
                out = std::stod(v->text, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != v->text.size()) {
                fail(*v, key, "expected a number");
            }
        }
    }

    void read(const std::string& key, int& out) {
        if (const auto* v = find(key)) {
            std::size_t pos = 0;
            try {
                out = std::stoi(v->text, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != v->text.size()) {
                fail(*v, key, "expected an integer");
            }
        }
    }

    void read(const std::string& key, bool& out) {
        if (const auto* v = find(key)) {
            if (v->text == "true") {
                out = true;
            } else if (v->text == "false") {
                out = false;
            } else {
                fail(*v, key, "expected true or false");
            }
        }
    }

    void read(const std::string& key, std::string& out) {
        if (const auto* v = find(key)) {
            const auto& t = v->text;
            if (t.size() < 2 || t.front() != '"' || t.back() != '"') {
                fail(*v, key, "expected a quoted string");
            }
            out = t.substr(1, t.size() - 2);
        }
    }

    void read(const std::string& key, std::optional<double>& out) {
        if (find_index(key) >= 0) {
            double x = 0.0;
            read(key, x);
            out = x;
        }
    }

    void read(const std::string& key, Vec2& out) {
        if (const auto* v = find(key)) {
            const auto& t = v->text;
            if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
                fail(*v, key, "expected [x, y]");
            }
            std::stringstream ss(t.substr(1, t.size() - 2));
            std::string item;
            std::vector<double> xs;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                std::size_t pos = 0;
                try {
                    xs.push_back(std::stod(item, &pos));
                } catch (const std::exception&) {
                    pos = 0;
                }
                if (item.empty() || pos != item.size()) {
                    fail(*v, key, "expected [x, y]");
                }
            }
            if (xs.size() != 2) {
                fail(*v, key, "expected [x, y]");
            }
            out = Vec2(xs[0], xs[1]);
        }
    }

    template <class Enum>
    void read_choice(const std::string& key, Enum& out, const std::vector<std::pair<std::string, Enum>>& choices) {
        if (find_index(key) < 0) {
            return;
        }
        std::string s;
        read(key, s);
        for (const auto& [name, value] : choices) {
            if (name == s) {
                out = value;
                return;
            }
        }
        std::string allowed;
        for (const auto& c : choices) {
            allowed += (allowed.empty() ? "" : ", ") + c.first;
        }
        fail(section_[static_cast<std::size_t>(find_index(key))].second, key, "expected one of " + allowed);
    }

    bool has(const std::string& key) const { return find_index(key) >= 0; }

    /// Rejects keys no read() asked for.
    void finish() const {
        for (std::size_t i = 0; i < section_.size(); ++i) {
            if (!used_[i]) {
                parse_fail(source_, section_[i].second.line, "unknown key '" + section_[i].first + "' in " + name_);
            }
        }
    }

private:
    int find_index(const std::string& key) const {
        for (std::size_t i = 0; i < section_.size(); ++i) {
            if (section_[i].first == key) {
                return static_cast<int>(i);
            }
        }
        return -1;
    }

    const ConfigValue* find(const std::string& key) {
        const int i = find_index(key);
        if (i < 0) {
            return nullptr;
        }
        used_[static_cast<std::size_t>(i)] = true;
        return &section_[static_cast<std::size_t>(i)].second;
    }

    [[noreturn]] void fail(const ConfigValue& v, const std::string& key, const std::string& msg) const {
        parse_fail(source_, v.line, name_ + "." + key + ": " + msg);
    }

    const ConfigSection& section_;
    std::string name_;
    std::string source_;
    std::vector<bool> used_;
};

} // namespace detail

/// Parses a TOML-style configuration. Tables: [mesh], [thermo], [integrator],
/// [output] and one [[initial_condition]] per Gaussian component.
inline RunConfig parse_config(std::istream& in, const std::string& source = "<config>") {
    const detail::ConfigDocument doc = detail::parse_document(in, source);
    RunConfig cfg;
    const detail::ConfigSection empty;
    auto table = [&](const std::string& name) -> const detail::ConfigSection& {
        const auto it = doc.tables.find(name);
        return it == doc.tables.end() ? empty : it->second;
    };

    {
        detail::SectionReader r(table("mesh"), "mesh", source);
        r.read("v_max", cfg.mesh.v_max);
        r.read("n_cells", cfg.mesh.n_cells);
        r.read("degree", cfg.mesh.degree);
        r.read("quad_order", cfg.mesh.quad_order);
        r.read("energy_tracking", cfg.mesh.energy_tracking);
        r.read("epsilon_u", cfg.mesh.epsilon_u);
        r.finish();
    }
    {
        detail::SectionReader r(table("thermo"), "thermo", source);
        r.read_choice<ThermoKind>("model", cfg.thermo.kind,
                                  {{"maxwell_boltzmann", ThermoKind::MaxwellBoltzmann},
                                   {"fermi_dirac", ThermoKind::FermiDirac}});
        r.read("f_floor", cfg.thermo.f_floor);
        r.read("f_ceiling", cfg.thermo.f_ceiling);
        r.read("clamp_mobility", cfg.thermo.clamp_mobility);
        r.finish();
    }
    {
        detail::SectionReader r(table("integrator"), "integrator", source);
        auto& ic = cfg.integrator;
        r.read("dt", ic.dt);
        r.read("n_steps", cfg.n_steps);
        r.read_choice<DiscreteGradientMethod>("dg", cfg.dg.kind,
                                              {{"gonzalez", DiscreteGradientMethod::GonzalezMidpoint},
                                               {"average", DiscreteGradientMethod::Average}});
        r.read("dg_threshold", cfg.dg.dg_threshold);
        r.read("xi_order", cfg.dg.xi_quadrature_order);
        r.read_choice<NonlinearSolver>("solver", ic.solver,
                                       {{"picard", NonlinearSolver::Picard},
                                        {"newton_krylov", NonlinearSolver::NewtonKrylov}});
        r.read_choice<AssemblyPath>("path", ic.path, {{"sparse", AssemblyPath::Sparse}, {"dense", AssemblyPath::Dense}});
        r.read("picard_tol", ic.picard_tol);
        r.read("picard_max_iters", ic.picard_max_iters);
        r.read("newton_krylov_fallback", ic.newton_krylov_fallback);
        r.read("krylov_tol", ic.krylov.inner_tol);
        r.read("krylov_restart", ic.krylov.restart);
        r.read("krylov_max_iters", ic.krylov.max_inner_iters);
        r.read("newton_max_iters", ic.krylov.max_newton_iters);
        r.read("fd_step", ic.krylov.fd_step);
        r.read("matrix_free", ic.krylov.matrix_free);
        r.finish();
    }
    {
        detail::SectionReader r(table("output"), "output", source);
        r.read("directory", cfg.output.directory);
        r.read("snapshot_stride", cfg.output.snapshot_stride);
        r.finish();
    }
    for (std::size_t c = 0; c < doc.components.size(); ++c) {
        detail::SectionReader r(doc.components[c], "initial_condition[" + std::to_string(c) + "]", source);
        GaussianComponent g;
        r.read("weight", g.weight);
        r.read("center", g.center);
        r.read("temperature", g.temperature);
        r.finish();
        cfg.initial_condition.push_back(g);
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot read " + path);
    }
    return parse_config(in, path);
}

} // namespace metriplectic
