#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/error.hpp"
#include "smallgain/lyapunov.hpp"
#include "smallgain/network.hpp"
#include "smallgain/simulate.hpp"

namespace sgcli {

using namespace smallgain;

/// Raised for anything wrong with the config file; `where` is a JSON pointer.
struct ConfigError : Error {
    ConfigError(const std::string& where, const std::string& message)
        : Error(ErrorKind::ConfigError, where.empty() ? message : where + ": " + message) {}
};

struct SimulationConfig {
    Vec x0;
    InputSignal input = InputSignal::zero(0);
    double T = 20.0;
    double dt = 1e-2;
};

struct ModelConfig {
    std::string family;  // "linear" | "cohen_grossberg"
    std::optional<LinearParams> linear;
    std::optional<CgParams> cg;
};

struct NetworkConfig {
    std::size_t n = 0;
    /// Explicit gain matrix; when absent the network is derived from the model.
    std::optional<GainNetwork> net;
    std::optional<GainExpr> alpha;
    std::optional<double> separation;
    std::optional<ExternalMode> mode;
    std::optional<ModelConfig> model;
    std::optional<SimulationConfig> simulation;
};

NetworkConfig load_config(const std::filesystem::path& file);

std::optional<ExternalMode> parse_mode(const std::string& s);

/// The gain network: explicit, or from the model family. Model errors
/// (NotHurwitz, BadParameters) propagate.
GainNetwork network_of(const NetworkConfig& cfg);

/// Subsystem Lyapunov functions: x^T P_i x for linear models, |x_i|
/// otherwise.
std::vector<SubsystemSpec> subsystems_of(const NetworkConfig& cfg);

SystemModel model_of(const NetworkConfig& cfg);

}  // namespace sgcli
