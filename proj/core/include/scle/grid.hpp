#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace scle {

using Complex = std::complex<double>;
using ComplexSeries = std::vector<Complex>;
using RealSeries = std::vector<double>;

/// Uniform time grid with `n_steps` full steps of size `dt` starting at
/// `t_start`. Every full step has a midpoint, so the half-step subgrid
/// t_k = t_start + k*dt/2, k = 0..2*n_steps, is what kernels and noises
/// are sampled on.
struct TimeGrid {
    double dt = 0.0;
    std::size_t n_steps = 0;
    double t_start = 0.0;

    TimeGrid() = default;
    TimeGrid(double dt_, std::size_t n_steps_, double t_start_ = 0.0);

    double half_dt() const noexcept { return 0.5 * dt; }
    std::size_t n_half() const noexcept { return 2 * n_steps + 1; }
    std::size_t n_full() const noexcept { return n_steps + 1; }
    double t_end() const noexcept { return t_start + dt * static_cast<double>(n_steps); }

    /// Time of half-step sample k.
    double half_time(std::size_t k) const noexcept {
        return t_start + half_dt() * static_cast<double>(k);
    }
    /// Time of full-step sample k.
    double full_time(std::size_t k) const noexcept {
        return t_start + dt * static_cast<double>(k);
    }
    /// Lag of half-step sample k relative to t_start.
    double half_lag(std::size_t k) const noexcept { return half_dt() * static_cast<double>(k); }

    bool operator==(const TimeGrid&) const = default;
};

}  // namespace scle
