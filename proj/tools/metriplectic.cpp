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
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "metriplectic/commands.hpp"
#include "metriplectic/config.hpp"
#include "metriplectic/errors.hpp"

namespace {

int dispatch(const std::string& command, const std::string& config_path, const std::string& output_dir) {
    using namespace metriplectic;
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    const std::filesystem::path out = output_dir.empty() ? cfg.output.directory : output_dir;
    try {
        if (command == "run") {
            return run_command(cfg, out, std::cout);
        }
        if (command == "equilibrium") {
            return equilibrium_command(cfg, out, std::cout);
        }
        return check_command(cfg, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const CapabilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conservative, entropy-monotone Landau collision solver in 2-D velocity space"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::string chosen;
    for (const auto& [name, help] : {std::pair<std::string, std::string>{"run", "time-step the initial condition"},
                                     {"equilibrium", "solve for the Maxwellian matching the initial invariants"},
                                     {"check", "verify structural properties at the configured resolution"}}) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
        if (name != "check") {
            sub->add_option("--output-dir", output_dir, "overrides output.directory");
        }
        sub->callback([&chosen, n = name] { chosen = n; });
    }
    CLI11_PARSE(app, argc, argv);
    return dispatch(chosen, config_path, output_dir);
}
