#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "scle/correlation.hpp"
#include "scle/grid.hpp"
#include "scle/rng.hpp"

namespace scle {

/// How the real stationary component chi of xi is synthesized.
enum class NoiseConstruction {
    /// chi = G * w: real white noise filtered by the symmetric spectral root.
    SpectralRoot,
    /// chi = Re FFT(sqrt(lambda / L) Z) with complex Gaussian Z (circulant embedding).
    CirculantEmbedding,
};

std::string to_string(NoiseConstruction c);
NoiseConstruction noise_construction_from_string(const std::string& name);

struct NoiseOptions {
    NoiseConstruction construction = NoiseConstruction::SpectralRoot;
    /// Amplitude of the white eta path relative to unit intensity. Only the
    /// conjugate moment M{eta eta*} depends on it; every contracted
    /// pseudo-correlation is invariant. 1 gives M{eta_t eta*_s} = delta(t-s).
    double eta_scale = 1.0;
    /// Amplitude mu of the white residual route eps that carries the part
    /// of the zeta-xi kernel chi cannot (frequencies above omega_max).
    /// 0 disables the route; the uncarried weight is then discarded and
    /// reported.
    double residual_scale = 1.0;
    /// FFT length is the smallest power of two >= pad_factor * (2 n_steps + 1).
    std::size_t pad_factor = 2;
    /// Negative chi spectrum values above -clip_tolerance * max are clipped.
    double clip_tolerance = 1e-8;
    /// Relative floor on the chi gain below which R = C / G is zeroed
    /// (only used when residual_scale == 0).
    double gain_floor = 1e-12;
};

namespace detail {
class FftEngine;
}

/// Immutable synthesis plan, shared across trajectory workers.
///
/// Realized on-grid pseudo-correlations (half-step indices m, s):
///   M{eta_m eta_s}  = 0
///   M{xi_m eta_s}   = kernel_K[m - s]            (0 for m < s)
///   M{xi_m xi_s}    = 2 Re alpha_T(|m - s| dt/2) (periodized over pad_length)
///   M{zeta_m xi_s}  = kernel_C[m - s]            (0 for m < s)
///   M{zeta_m eta_s} = kernel_Q[m - s]            (0 for m < s)
/// with the causal kernels weighted by 1/2 at zero lag.
struct NoisePlan {
    TimeGrid grid;
    NoiseOptions options;
    std::size_t pad_length = 0;

    RealSeries kernel_K;  // 2 theta Im alpha_T
    RealSeries kernel_Q;  // 2 sqrt(2) theta Im alpha_tilde
    RealSeries kernel_C;  // 2 sqrt(2) theta Re alpha_tilde

    /// Nonnegative DFT eigenvalues of the circulant chi autocovariance.
    RealSeries chi_spectrum;
    /// Spectral root G = sqrt(chi_spectrum).
    RealSeries chi_filter;
    /// zeta's response to the chi source: R = C G / (G^2 + mu^2).
    ComplexSeries zeta_filter;
    /// zeta's response to the residual source: F = C mu / (G^2 + mu^2).
    ComplexSeries residual_filter;
    /// DFT(kernel_K dt/2) / eta_scale and DFT(kernel_Q dt/2) / eta_scale.
    ComplexSeries xi_eta_filter;
    ComplexSeries zeta_eta_filter;

    struct Diagnostics {
        /// Most negative raw chi eigenvalue relative to the largest.
        double min_spectrum_ratio = 0.0;
        std::size_t clipped_bins = 0;
        /// Fraction of sum |C_hat|^2 routed through the residual source.
        double residual_weight = 0.0;
        /// Fraction of sum |C_hat|^2 dropped (residual route disabled).
        double discarded_weight = 0.0;
        /// max_j |IDFT(chi_spectrum)_j - 2 Re alpha_T(j dt/2)| / (2 Re alpha_T(0)).
        double chi_kernel_mismatch = 0.0;
    } diagnostics;

    std::shared_ptr<const detail::FftEngine> fft;
};

/// One realization of (xi, eta, zeta) on the half-step grid.
struct NoiseBundle {
    ComplexSeries xi;
    ComplexSeries eta;
    ComplexSeries zeta;
    struct SeedTag {
        std::uint64_t master_seed = 0;
        std::uint64_t index = 0;
        bool operator==(const SeedTag&) const = default;
    } seed_tag;

    bool all_finite() const noexcept;
};

/// Throws NumericalError if the chi spectrum is negative beyond tolerance,
/// UsageError on an empty table or omega_max at or above the half-step Nyquist
/// frequency.
NoisePlan build_noise_plan(const KernelTable& kernels, const NoiseOptions& options = {});

/// Reusable per-worker scratch space; sampling is allocation-free after the
/// first call.
class NoiseSampler {
public:
    explicit NoiseSampler(const NoisePlan& plan);
    ~NoiseSampler();
    NoiseSampler(const NoiseSampler&) = delete;
    NoiseSampler& operator=(const NoiseSampler&) = delete;
    NoiseSampler(NoiseSampler&&) noexcept;
    NoiseSampler& operator=(NoiseSampler&&) = delete;

    /// Bundle for stream (master_seed, index). Bitwise deterministic.
    /// With `with_zeta` false, zeta is left empty; xi and eta are unchanged.
    void sample(std::uint64_t master_seed, std::uint64_t index, NoiseBundle& out,
                bool with_zeta = true);

private:
    struct Buffers;
    const NoisePlan* plan_;
    std::unique_ptr<Buffers> buf_;
};

NoiseBundle sample_bundle(const NoisePlan& plan, std::uint64_t master_seed, std::uint64_t index);

// ---------------------------------------------------------------------------
// Empirical validation

enum class NoisePair { EtaEta, XiEta, XiXi, ZetaXi, ZetaEta };

inline constexpr std::array<NoisePair, 5> kAllNoisePairs = {
    NoisePair::EtaEta, NoisePair::XiEta, NoisePair::XiXi, NoisePair::ZetaXi, NoisePair::ZetaEta};

std::string to_string(NoisePair p);

/// Contracted pseudo-correlation M{a_t b_s} the construction must reproduce,
/// computed from the kernel table (not from the plan's filters).
Complex noise_target(const KernelTable& kernels, NoisePair pair, std::size_t t_index,
                     std::size_t s_index);

struct CorrelationRow {
    std::size_t t_index = 0;
    std::size_t s_index = 0;
    Complex estimate;
    double stderr_re = 0.0;
    double stderr_im = 0.0;
};

/// Streaming estimator of M^{a_t b_s} on a (t, s) probe grid.
class CorrelationEstimator {
public:
    static constexpr std::size_t kMinSamples = 1000;

    CorrelationEstimator(std::vector<std::size_t> t_indices, std::vector<std::size_t> s_indices,
                         std::vector<NoisePair> pairs);

    /// `probes` indices evenly spread over [0, n_half - 1] on both axes.
    static CorrelationEstimator on_uniform_probe(const TimeGrid& grid, std::size_t probes,
                                                 std::vector<NoisePair> pairs);

    void add(const NoiseBundle& bundle);
    std::size_t count() const noexcept { return count_; }

    /// Throws UsageError below kMinSamples bundles or for an untracked pair.
    std::vector<CorrelationRow> result(NoisePair pair) const;

    const std::vector<std::size_t>& t_indices() const noexcept { return t_; }
    const std::vector<std::size_t>& s_indices() const noexcept { return s_; }

private:
    std::vector<std::size_t> t_;
    std::vector<std::size_t> s_;
    std::vector<NoisePair> pairs_;
    // Per pair, per probe: sum re, sum im, sum re^2, sum im^2.
    std::vector<std::vector<std::array<double, 4>>> sums_;
    std::size_t count_ = 0;
};

/// Batch form over an explicit set of bundles.
std::vector<CorrelationRow> empirical_correlation(const std::vector<NoiseBundle>& bundles,
                                                  NoisePair pair,
                                                  const std::vector<std::size_t>& t_indices,
                                                  const std::vector<std::size_t>& s_indices);

/// z-score of a row against its target: the larger of the real and imaginary
/// deviations in units of their standard errors. A component whose standard
/// error is zero counts only if it deviates by more than 1e-12.
double correlation_z_score(const CorrelationRow& row, Complex target);

}  // namespace scle
