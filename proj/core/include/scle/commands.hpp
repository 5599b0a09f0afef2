#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "scle/config.hpp"
#include "scle/ensemble.hpp"

namespace scle {

/// Exit codes of the command front-ends.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

struct RunOverrides {
    std::optional<std::size_t> workers;
    std::optional<std::uint64_t> seed;
    bool resume = false;
    /// Stop after this many trajectories, leaving only the checkpoint.
    std::optional<std::uint64_t> stop_after;
};

/// Columns t, then Re_<name>, Im_<name>, stderr_<name> per observable, all
/// printed with 17 significant digits.
void write_results_csv(std::ostream& out, const EnsembleResult& result);
std::string results_csv(const EnsembleResult& result);

/// Writes <output_path>.csv and <output_path>.json; the checkpoint lives at
/// <output_path>.ckpt when checkpoint_every > 0 or stop_after is given.
int cmd_run(RunConfig cfg, const RunOverrides& overrides, std::ostream& log);

/// Writes <output_path>_correlations.csv (t, Re_alpha, Im_alpha, Re_alphaT,
/// Im_alphaT, Re_alphaTilde, Im_alphaTilde) and prints the omega_max
/// sensitivity of Re alpha_T(0).
int cmd_correlations(const RunConfig& cfg, std::ostream& log);

/// Writes <output_path>_noise_check.csv; returns kExitCheckFailed if any
/// kernel fails the 5 sigma test.
int cmd_noise_check(const RunConfig& cfg, std::uint64_t samples, std::size_t probes,
                    std::ostream& log, double z_threshold = 5.0);

}  // namespace scle
