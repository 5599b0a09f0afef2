#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scle/dynamics.hpp"
#include "scle/noise.hpp"

namespace scle {

enum class ObservableKind { System, CouplingEnergy, BathDisplacement };

std::string to_string(ObservableKind kind);

/// System:            sum_l b_l Y_l(t)
/// CouplingEnergy:    (sum_l b_l Y_l(t)) zeta_t, b = coefficients of S
/// BathDisplacement:  (sum_l b_l Y_l(t)) zeta_t, b = coefficients of I
struct ObservableRequest {
    std::string name;
    ObservableKind kind = ObservableKind::System;
    Vector coeffs;
};

/// Request for a named model observable, or for "coupling_energy" /
/// "bath_displacement". Throws ModelError for unknown names.
ObservableRequest make_request(const OperatorBasisModel& model, const std::string& name);

/// Streaming mean and second central moments (real and imaginary parts kept
/// separately) of every observable at every full step.
class EnsembleAccumulator {
public:
    EnsembleAccumulator() = default;
    EnsembleAccumulator(std::size_t n_observables, std::size_t n_points, std::uint64_t master_seed);

    /// `values` holds n_observables * n_points samples, observable-major.
    void add(const Complex* values);
    void add_rejected() { ++rejected_; }

    /// Chan et al. pairwise combination of `other` into this accumulator.
    void merge(const EnsembleAccumulator& other);

    std::size_t n_observables() const noexcept { return n_obs_; }
    std::size_t n_points() const noexcept { return n_points_; }
    std::uint64_t count() const noexcept { return count_; }
    std::uint64_t rejected() const noexcept { return rejected_; }
    std::uint64_t master_seed() const noexcept { return seed_; }

    const std::vector<Complex>& mean() const noexcept { return mean_; }
    const std::vector<double>& m2_re() const noexcept { return m2_re_; }
    const std::vector<double>& m2_im() const noexcept { return m2_im_; }

    /// Raw state access for checkpoint restore.
    void restore(std::uint64_t count, std::uint64_t rejected, std::vector<Complex> mean,
                 std::vector<double> m2_re, std::vector<double> m2_im);

    bool operator==(const EnsembleAccumulator&) const = default;

private:
    std::size_t n_obs_ = 0;
    std::size_t n_points_ = 0;
    std::uint64_t seed_ = 0;
    std::uint64_t count_ = 0;
    std::uint64_t rejected_ = 0;
    std::vector<Complex> mean_;
    std::vector<double> m2_re_;
    std::vector<double> m2_im_;
};

/// Throws UsageError on shape mismatch.
EnsembleAccumulator merge_accumulators(const EnsembleAccumulator& a, const EnsembleAccumulator& b);

struct EnsembleResult {
    TimeGrid grid;
    std::vector<std::string> names;
    std::vector<ObservableKind> kinds;
    std::vector<ComplexSeries> mean;
    /// sqrt(var / n) of the real and imaginary parts.
    std::vector<RealSeries> stderr_re;
    std::vector<RealSeries> stderr_im;
    /// sqrt((var_re + var_im) / n).
    std::vector<RealSeries> stderr;
    std::uint64_t master_seed = 0;
    std::uint64_t trajectories = 0;
    std::uint64_t rejected = 0;
    std::string model_name;
    /// False when the run stopped early (stop_after) and only a checkpoint
    /// was written.
    bool complete = true;

    std::size_t index_of(const std::string& name) const;
};

EnsembleResult make_result(const EnsembleAccumulator& acc, const TimeGrid& grid,
                           const std::vector<ObservableRequest>& requests);

struct RunOptions {
    std::uint64_t n_traj = 1;
    std::uint64_t master_seed = 0;
    /// 0 = hardware concurrency.
    std::size_t workers = 1;
    /// Trajectories per merge block. Part of the result's identity: the
    /// fixed block structure makes means independent of `workers`.
    std::size_t block_size = 256;
    /// Rejected-fraction limit above which the run fails.
    double max_rejected_fraction = 1e-3;
    /// Checkpoint file; empty disables checkpointing.
    std::filesystem::path checkpoint_path;
    /// Write a checkpoint every this many trajectories (rounded up to blocks).
    std::uint64_t checkpoint_every = 0;
    /// Resume from checkpoint_path if it exists.
    bool resume = false;
    /// Stop (after checkpointing) once this many trajectories are folded.
    std::optional<std::uint64_t> stop_after;
    /// Identifies the configuration in checkpoints; resume refuses a mismatch.
    std::uint64_t config_fingerprint = 0;
};

/// Trajectory i uses noise stream (master_seed, i). Trajectories are grouped
/// into blocks of `block_size` accumulated in index order and folded in block
/// order, so results are bitwise identical for any worker count.
/// Throws RunError if the rejected fraction exceeds the limit.
EnsembleResult run_ensemble(const OperatorBasisModel& model, const NoisePlan& plan,
                            const std::vector<ObservableRequest>& requests,
                            const RunOptions& options);

/// E(t) = int_0^t (a(s) - b(s))^2 ds by the trapezoidal rule on the full steps.
RealSeries accumulated_error(const RealSeries& oracle, const RealSeries& stochastic,
                             const TimeGrid& grid);
/// Real parts of complex series.
RealSeries accumulated_error(const ComplexSeries& oracle, const ComplexSeries& stochastic,
                             const TimeGrid& grid);

// ---------------------------------------------------------------------------
// Checkpoints
//
// Layout (little-endian):
//   char[8]  magic "SCLECKPT"
//   u32      schema version (1)
//   u32      reserved (0)
//   u64      config fingerprint
//   u64      master seed
//   u64      block size
//   u64      next trajectory index
//   u64      folded trajectory count
//   u64      rejected count
//   u64      n_observables
//   u64      n_points
//   f64[2*N] mean (re, im pairs), N = n_observables * n_points
//   f64[N]   M2 of real parts
//   f64[N]   M2 of imaginary parts
//   u64      FNV-1a hash of every preceding byte

struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;
    std::uint64_t config_fingerprint = 0;
    std::uint64_t block_size = 0;
    std::uint64_t next_index = 0;
    EnsembleAccumulator accumulator;
};

/// Written to a temporary file and renamed into place.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws RunError on a missing, truncated, corrupted or wrong-version file.
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace scle
