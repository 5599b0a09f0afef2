#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scle/correlation.hpp"
#include "scle/dynamics.hpp"
#include "scle/models.hpp"
#include "scle/noise.hpp"

namespace scle {

struct ModelConfig {
    /// pure_dephasing | spin_boson | quantum_dot | custom
    std::string name;
    double omega0 = 1.0;
    double delta = 0.0;
    RabiSpec rabi;
    std::optional<Pump> pump;
    /// pi-pulse train period (pure dephasing only).
    std::optional<double> pulse_period;
    std::optional<InitialState> initial;
    std::optional<Matrix> rho0;

    // custom models
    std::vector<Matrix> basis;
    Matrix hamiltonian;
    Matrix coupling;
    std::vector<std::pair<std::string, Matrix>> custom_observables;
};

struct RunConfig {
    ModelConfig model;
    SpectralDensity spec;
    double min_omega_max_ratio = SpectralDensity::kMinOmegaMaxRatio;
    std::optional<double> beta_input;
    std::optional<double> temperature_kelvin;
    /// Resolved inverse temperature (kInfiniteBeta for T = 0).
    double beta = kInfiniteBeta;
    Units units = Units::NormalizedOmega0;
    TimeGrid grid;
    double t_end = 0.0;
    std::uint64_t trajectories = 1000;
    std::uint64_t master_seed = 1;
    std::vector<std::string> observables;
    std::string output_path = "scle_out";
    std::uint64_t checkpoint_every = 0;
    std::size_t block_size = 256;
    NoiseOptions noise;
};

/// Strict parse: unknown keys and type mismatches throw ParseError carrying a
/// JSON pointer; semantic inconsistencies (grid remainder, both or neither of
/// beta / temperature_kelvin, kelvin without inverse_ps units) throw
/// ValidationError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Resolved configuration with every default explicit, as JSON text.
std::string resolved_config_json(const RunConfig& cfg, int indent = 2);

/// Hash of the resolved configuration, excluding output location and
/// checkpoint cadence. Used to refuse resuming a different run.
std::uint64_t config_fingerprint(const RunConfig& cfg);

OperatorBasisModel build_model(const RunConfig& cfg);
KernelTable build_kernels(const RunConfig& cfg);

/// Default observables for a model when the config lists none.
std::vector<std::string> default_observables(const ModelConfig& model);

}  // namespace scle
