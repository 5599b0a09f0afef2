#pragma once

#include <cstddef>
#include <limits>
#include <string>

#include "scle/grid.hpp"

namespace scle {

enum class SpectralKind { OhmicDebye, SuperOhmicGauss };

std::string to_string(SpectralKind kind);
SpectralKind spectral_kind_from_string(const std::string& name);

/// Continuum bath spectrum J(w).
///
/// OhmicDebye:      J(w) = coupling * cutoff^2 * w / (pi * (cutoff^2 + w^2))
/// SuperOhmicGauss: J(w) = coupling * w^3 * exp(-(w / cutoff)^2)
///
/// All kernel integrals run over [0, omega_max].
struct SpectralDensity {
    SpectralKind kind = SpectralKind::OhmicDebye;
    double coupling = 0.0;
    double cutoff = 1.0;
    double omega_max = 50.0;

    static constexpr double kDefaultOmegaMaxRatio = 50.0;
    static constexpr double kMinOmegaMaxRatio = 10.0;

    /// Spectrum with omega_max = 50 * cutoff.
    static SpectralDensity ohmic_debye(double coupling, double cutoff);
    static SpectralDensity super_ohmic_gauss(double coupling, double cutoff);

    /// Throws DomainError on negative coupling, non-positive cutoff, or
    /// omega_max below `min_ratio * cutoff`.
    void validate(double min_ratio = kMinOmegaMaxRatio) const;

    /// dJ/dw at w = 0 (finite for both kinds).
    double slope_at_zero() const noexcept;

    bool operator==(const SpectralDensity&) const = default;
};

/// Sentinel for zero temperature.
inline constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

double eval_spectral_density(const SpectralDensity& spec, double omega);

/// J(w) * coth(beta w / 2), with the w -> 0 limit 2 J'(0) / beta inserted
/// analytically. Equals J(w) when beta is infinite.
double thermal_weight(const SpectralDensity& spec, double beta, double omega);

struct QuadratureOptions {
    /// Gauss-Legendre nodes per panel.
    std::size_t order = 16;
    /// Starting panel count; doubled until converged.
    std::size_t initial_panels = 32;
    std::size_t max_panels = std::size_t{1} << 16;
    /// Convergence threshold on the largest change under panel doubling,
    /// relative to max |alpha_T|.
    double tolerance = 1e-8;
};

/// Zero-temperature, finite-temperature and shifted correlation functions
/// tabulated on the half-step lags tau_k = k * dt / 2, k = 0..2*n_steps.
///
/// Invariants: Im alpha == Im alpha_T pointwise; alpha_tilde = alpha_T - alpha / 2.
struct KernelTable {
    TimeGrid grid;
    SpectralDensity spec;
    double beta = kInfiniteBeta;
    ComplexSeries alpha;
    ComplexSeries alpha_T;
    ComplexSeries alpha_tilde;
    /// Panel count the tabulation converged at.
    std::size_t panels = 0;
    /// Largest change observed at the final doubling, relative to max |alpha_T|.
    double convergence_delta = 0.0;

    std::size_t size() const noexcept { return alpha.size(); }
};

/// alpha(t) = int_0^omega_max J(w) exp(-i w t) dw on every half-step lag.
ComplexSeries tabulate_alpha(const SpectralDensity& spec, const TimeGrid& grid,
                             const QuadratureOptions& opts = {});

/// alpha_T(t) = int_0^omega_max [J(w) coth(beta w/2) cos(w t) - i J(w) sin(w t)] dw.
ComplexSeries tabulate_alpha_T(const SpectralDensity& spec, double beta, const TimeGrid& grid,
                               const QuadratureOptions& opts = {});

/// Pointwise alpha_T - alpha / 2. Throws UsageError when lengths differ.
ComplexSeries tabulate_alpha_tilde(const ComplexSeries& alpha, const ComplexSeries& alpha_T);

/// All three kernels in one quadrature pass.
KernelTable make_kernel_table(const SpectralDensity& spec, double beta, const TimeGrid& grid,
                              const QuadratureOptions& opts = {});

/// Re alpha_T(0) for omega_max = multiple * cutoff, one entry per multiple.
/// Surfaces the logarithmic omega_max sensitivity of the Ohmic kernel.
struct CutoffConvergenceRow {
    double omega_max;
    double re_alpha_T0;
};
std::vector<CutoffConvergenceRow> omega_max_convergence(SpectralDensity spec, double beta,
                                                        const std::vector<double>& multiples,
                                                        const QuadratureOptions& opts = {});

}  // namespace scle
