#include "scle/noise.hpp"

#include <fftw3.h>

#include <boost/align/aligned_allocator.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "scle/error.hpp"

namespace scle {

namespace detail {

/// FFT work arrays: 64-byte aligned so one set of SIMD plans serves every buffer.
using AlignedSeries = std::vector<Complex, boost::alignment::aligned_allocator<Complex, 64>>;

/// Out-of-place complex FFTs of one length. Plans are built with
/// FFTW_ESTIMATE so the chosen algorithm (and therefore the rounding) does not
/// depend on timing. Every buffer passed in must be 64-byte aligned.
class FftEngine {
public:
    explicit FftEngine(std::size_t n) : n_(n) {
        std::lock_guard lock(planner_mutex());
        AlignedSeries a(n), b(n);
        const int len = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE;
        forward_ = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
        backward_ =
            fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
        if (!forward_ || !backward_) {
            throw NumericalError("noise", "FFTW failed to create a plan");
        }
    }
    ~FftEngine() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }
    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

    std::size_t size() const noexcept { return n_; }

    /// out[m] = sum_k in[k] exp(-2 pi i m k / n)
    void forward(const Complex* in, Complex* out) const {
        fftw_execute_dft(forward_, as_fftw(const_cast<Complex*>(in)), as_fftw(out));
    }
    /// out[k] = sum_m in[m] exp(+2 pi i m k / n)   (unnormalized)
    void backward(const Complex* in, Complex* out) const {
        fftw_execute_dft(backward_, as_fftw(const_cast<Complex*>(in)), as_fftw(out));
    }

private:
    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }
    static fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

    std::size_t n_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

}  // namespace detail

std::string to_string(NoiseConstruction c) {
    switch (c) {
        case NoiseConstruction::SpectralRoot: return "spectral_root";
        case NoiseConstruction::CirculantEmbedding: return "circulant_embedding";
    }
    return "unknown";
}

NoiseConstruction noise_construction_from_string(const std::string& name) {
    if (name == "spectral_root") return NoiseConstruction::SpectralRoot;
    if (name == "circulant_embedding") return NoiseConstruction::CirculantEmbedding;
    throw UsageError("noise", "unknown noise construction '" + name + "'");
}

std::string to_string(NoisePair p) {
    switch (p) {
        case NoisePair::EtaEta: return "eta_eta";
        case NoisePair::XiEta: return "xi_eta";
        case NoisePair::XiXi: return "xi_xi";
        case NoisePair::ZetaXi: return "zeta_xi";
        case NoisePair::ZetaEta: return "zeta_eta";
    }
    return "unknown";
}

bool NoiseBundle::all_finite() const noexcept {
    auto finite = [](const ComplexSeries& s) {
        return std::all_of(s.begin(), s.end(), [](Complex z) {
            return std::isfinite(z.real()) && std::isfinite(z.imag());
        });
    };
    return finite(xi) && finite(eta) && finite(zeta);
}

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

using detail::AlignedSeries;

ComplexSeries dft(const detail::FftEngine& fft, const AlignedSeries& x) {
    AlignedSeries out(x.size());
    fft.forward(x.data(), out.data());
    return {out.begin(), out.end()};
}

}  // namespace

NoisePlan build_noise_plan(const KernelTable& kernels, const NoiseOptions& options) {
    const std::size_t n_half = kernels.grid.n_half();
    if (kernels.alpha.size() != n_half || kernels.alpha_T.size() != n_half ||
        kernels.alpha_tilde.size() != n_half) {
        throw UsageError("noise", "kernel table is incomplete for its grid");
    }
    if (!(options.eta_scale > 0.0) || !std::isfinite(options.eta_scale)) {
        throw UsageError("noise", "eta_scale must be finite and > 0");
    }
    if (!(options.residual_scale >= 0.0) || !std::isfinite(options.residual_scale)) {
        throw UsageError("noise", "residual_scale must be finite and >= 0");
    }
    if (options.pad_factor < 2) {
        throw UsageError("noise", "pad_factor must be >= 2 for linear convolution on the grid");
    }
    const double delta = kernels.grid.half_dt();
    const double nyquist = std::numbers::pi / delta;
    if (kernels.spec.omega_max >= nyquist) {
        std::ostringstream os;
        os << "omega_max = " << kernels.spec.omega_max
           << " must be below the half-step Nyquist frequency pi/(dt/2) = " << nyquist;
        throw UsageError("noise", os.str());
    }

    NoisePlan plan;
    plan.grid = kernels.grid;
    plan.options = options;
    const std::size_t L = next_pow2(options.pad_factor * n_half);
    plan.pad_length = L;
    auto fft = std::make_shared<detail::FftEngine>(L);
    plan.fft = fft;

    const double sqrt2 = std::numbers::sqrt2;
    plan.kernel_K.assign(n_half, 0.0);
    plan.kernel_Q.assign(n_half, 0.0);
    plan.kernel_C.assign(n_half, 0.0);
    for (std::size_t j = 0; j < n_half; ++j) {
        const double theta = j == 0 ? 0.5 : 1.0;
        plan.kernel_K[j] = theta * 2.0 * kernels.alpha_T[j].imag();
        plan.kernel_Q[j] = theta * 2.0 * sqrt2 * kernels.alpha_tilde[j].imag();
        plan.kernel_C[j] = theta * 2.0 * sqrt2 * kernels.alpha_tilde[j].real();
    }

    // chi spectrum from the spectral density: the DFT of the sampled,
    // L-periodized autocovariance 2 Re alpha_T is 2 pi W(|w_m|) / delta
    // when omega_max is below Nyquist (Poisson summation).
    RealSeries raw(L, 0.0);
    for (std::size_t m = 0; m < L; ++m) {
        const double mm = m <= L / 2 ? static_cast<double>(m)
                                     : static_cast<double>(m) - static_cast<double>(L);
        const double w = std::abs(2.0 * std::numbers::pi * mm / (static_cast<double>(L) * delta));
        if (w <= kernels.spec.omega_max) {
            raw[m] = 2.0 * std::numbers::pi * thermal_weight(kernels.spec, kernels.beta, w) / delta;
        }
    }
    const double max_raw = *std::max_element(raw.begin(), raw.end());
    const double min_raw = *std::min_element(raw.begin(), raw.end());
    plan.diagnostics.min_spectrum_ratio = max_raw > 0.0 ? min_raw / max_raw : 0.0;
    plan.chi_spectrum.assign(L, 0.0);
    for (std::size_t m = 0; m < L; ++m) {
        if (raw[m] < 0.0) {
            if (raw[m] < -options.clip_tolerance * max_raw) {
                std::ostringstream os;
                os << "chi power spectrum negative beyond tolerance: bin " << m << " value "
                   << raw[m] << " (max " << max_raw << ")";
                throw NumericalError("noise", os.str());
            }
            ++plan.diagnostics.clipped_bins;
        } else {
            plan.chi_spectrum[m] = raw[m];
        }
    }
    plan.chi_filter.resize(L);
    for (std::size_t m = 0; m < L; ++m) plan.chi_filter[m] = std::sqrt(plan.chi_spectrum[m]);

    {
        AlignedSeries lam(plan.chi_spectrum.begin(), plan.chi_spectrum.end());
        AlignedSeries c(L);
        fft->backward(lam.data(), c.data());
        const double ref = 2.0 * kernels.alpha_T[0].real();
        double worst = 0.0;
        for (std::size_t j = 0; j < n_half; ++j) {
            const double realized = c[j].real() / static_cast<double>(L);
            worst = std::max(worst, std::abs(realized - 2.0 * kernels.alpha_T[j].real()));
        }
        plan.diagnostics.chi_kernel_mismatch = ref > 0.0 ? worst / ref : worst;
    }

    auto padded = [&](const RealSeries& k, double scale) {
        AlignedSeries x(L, Complex{});
        for (std::size_t j = 0; j < k.size(); ++j) x[j] = k[j] * scale;
        return x;
    };
    plan.xi_eta_filter = dft(*fft, padded(plan.kernel_K, delta / options.eta_scale));
    plan.zeta_eta_filter = dft(*fft, padded(plan.kernel_Q, delta / options.eta_scale));
    const ComplexSeries c_hat = dft(*fft, padded(plan.kernel_C, 1.0));

    const double mu = options.residual_scale;
    const double g_max = *std::max_element(plan.chi_filter.begin(), plan.chi_filter.end());
    plan.zeta_filter.assign(L, Complex{});
    plan.residual_filter.assign(L, Complex{});
    double total = 0.0, residual = 0.0, discarded = 0.0;
    for (std::size_t m = 0; m < L; ++m) {
        const double g = plan.chi_filter[m];
        const double c2 = std::norm(c_hat[m]);
        total += c2;
        if (mu > 0.0) {
            const double denom = g * g + mu * mu;
            plan.zeta_filter[m] = c_hat[m] * (g / denom);
            plan.residual_filter[m] = c_hat[m] * (mu / denom);
            residual += c2 * (mu * mu / denom) * (mu * mu / denom);
        } else if (g > options.gain_floor * g_max && g > 0.0) {
            plan.zeta_filter[m] = c_hat[m] / g;
        } else {
            discarded += c2;
        }
    }
    if (total > 0.0) {
        plan.diagnostics.residual_weight = residual / total;
        plan.diagnostics.discarded_weight = discarded / total;
    } else {
        // Nothing to correlate against: keep xi free of the residual source.
        plan.options.residual_scale = 0.0;
    }
    return plan;
}

// ---------------------------------------------------------------------------

struct NoiseSampler::Buffers {
    ComplexSeries eta0;      // unit-intensity eta, n_half
    AlignedSeries eps;       // residual source (first n_half entries), L
    AlignedSeries work_a;    // padded conj(eta0) -> spectrum
    AlignedSeries work_b;    // chi source spectrum
    AlignedSeries work_c;    // chi source / eps spectrum
    AlignedSeries spec_xi;
    AlignedSeries spec_zeta;
    AlignedSeries out_xi;
    AlignedSeries out_zeta;
    AlignedSeries chi_x;     // circulant: F(G Z / sqrt L)
    AlignedSeries chi_z;     // circulant: F(conj(R) Z / sqrt L)
};

NoiseSampler::NoiseSampler(const NoisePlan& plan) : plan_(&plan), buf_(std::make_unique<Buffers>()) {
    const std::size_t L = plan.pad_length;
    const std::size_t n = plan.grid.n_half();
    buf_->eta0.resize(n);
    buf_->eps.assign(L, Complex{});
    for (auto* v : {&buf_->work_a, &buf_->work_b, &buf_->work_c, &buf_->spec_xi, &buf_->spec_zeta,
                    &buf_->out_xi, &buf_->out_zeta, &buf_->chi_x, &buf_->chi_z}) {
        v->resize(L);
    }
}

NoiseSampler::~NoiseSampler() = default;
NoiseSampler::NoiseSampler(NoiseSampler&&) noexcept = default;

void NoiseSampler::sample(std::uint64_t master_seed, std::uint64_t index, NoiseBundle& out,
                          bool with_zeta) {
    const NoisePlan& plan = *plan_;
    const detail::FftEngine& fft = *plan.fft;
    Buffers& b = *buf_;
    const std::size_t L = plan.pad_length;
    const std::size_t n = plan.grid.n_half();
    const double delta = plan.grid.half_dt();
    const double lambda = plan.options.eta_scale;
    const double mu = plan.options.residual_scale;
    const double inv_L = 1.0 / static_cast<double>(L);

    NormalStream rng(master_seed, index);

    // (i) unit-intensity complex white eta0 with variance 1/delta per sample.
    const double eta_norm = 1.0 / std::sqrt(2.0 * delta);
    for (std::size_t k = 0; k < n; ++k) {
        const double re = rng.next();
        const double im = rng.next();
        b.eta0[k] = Complex{re, im} * eta_norm;
    }
    std::fill(b.work_a.begin(), b.work_a.end(), Complex{});
    for (std::size_t k = 0; k < n; ++k) b.work_a[k] = std::conj(b.eta0[k]);
    fft.forward(b.work_a.data(), b.work_b.data());
    std::swap(b.work_a, b.work_b);  // work_a: DFT(conj eta0)

    const bool circulant = plan.options.construction == NoiseConstruction::CirculantEmbedding;
    if (!circulant) {
        // (ii) real white source for chi.
        for (std::size_t k = 0; k < L; ++k) b.work_c[k] = Complex{rng.next(), 0.0};
        fft.forward(b.work_c.data(), b.work_b.data());
    } else {
        const double s = std::sqrt(inv_L);
        for (std::size_t k = 0; k < L; ++k) {
            const double re = rng.next();
            const double im = rng.next();
            const Complex z{re, im};
            b.spec_xi[k] = z * (plan.chi_filter[k] * s);
            b.spec_zeta[k] = z * std::conj(plan.zeta_filter[k]) * s;
        }
        fft.forward(b.spec_xi.data(), b.chi_x.data());
        if (with_zeta) fft.forward(b.spec_zeta.data(), b.chi_z.data());
    }

    // Residual source, shared by xi (directly) and zeta (filtered).
    if (mu > 0.0) {
        // Only the first n_half samples pair with xi; the rest stay zero,
        // which leaves every cross-correlation unchanged.
        const double s = 1.0 / std::numbers::sqrt2;
        for (std::size_t k = 0; k < n; ++k) {
            const double re = rng.next();
            const double im = rng.next();
            b.eps[k] = Complex{re, im} * s;
        }
        if (with_zeta) fft.forward(b.eps.data(), b.work_c.data());
    }

    for (std::size_t m = 0; m < L; ++m) {
        Complex x = plan.xi_eta_filter[m] * b.work_a[m];
        if (!circulant) x += plan.chi_filter[m] * b.work_b[m];
        b.spec_xi[m] = x;
    }
    fft.backward(b.spec_xi.data(), b.out_xi.data());
    if (with_zeta) {
        for (std::size_t m = 0; m < L; ++m) {
            Complex z = plan.zeta_eta_filter[m] * b.work_a[m];
            if (!circulant) z += plan.zeta_filter[m] * b.work_b[m];
            if (mu > 0.0) z += plan.residual_filter[m] * b.work_c[m];
            b.spec_zeta[m] = z;
        }
        fft.backward(b.spec_zeta.data(), b.out_zeta.data());
    }

    out.xi.resize(n);
    out.eta.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        Complex x = b.out_xi[k] * inv_L;
        if (circulant) x += b.chi_x[k].real();
        if (mu > 0.0) x += mu * std::conj(b.eps[k]);
        out.xi[k] = x;
        out.eta[k] = lambda * b.eta0[k];
    }
    if (with_zeta) {
        out.zeta.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            Complex z = b.out_zeta[k] * inv_L;
            if (circulant) z += b.chi_z[k].real();
            out.zeta[k] = z;
        }
    } else {
        out.zeta.clear();
    }
    out.seed_tag = {master_seed, index};
}

NoiseBundle sample_bundle(const NoisePlan& plan, std::uint64_t master_seed, std::uint64_t index) {
    NoiseSampler sampler(plan);
    NoiseBundle out;
    sampler.sample(master_seed, index, out);
    return out;
}

// ---------------------------------------------------------------------------

Complex noise_target(const KernelTable& kernels, NoisePair pair, std::size_t t_index,
                     std::size_t s_index) {
    const double sqrt2 = std::numbers::sqrt2;
    const bool ahead = t_index > s_index;
    const bool same = t_index == s_index;
    const std::size_t lag = ahead ? t_index - s_index : s_index - t_index;
    const double theta = ahead ? 1.0 : (same ? 0.5 : 0.0);
    switch (pair) {
        case NoisePair::EtaEta: return {};
        case NoisePair::XiEta: return {theta * 2.0 * kernels.alpha_T[lag].imag(), 0.0};
        case NoisePair::XiXi: return {2.0 * kernels.alpha_T[lag].real(), 0.0};
        case NoisePair::ZetaXi: return {theta * 2.0 * sqrt2 * kernels.alpha_tilde[lag].real(), 0.0};
        case NoisePair::ZetaEta: return {theta * 2.0 * sqrt2 * kernels.alpha_tilde[lag].imag(), 0.0};
    }
    return {};
}

CorrelationEstimator::CorrelationEstimator(std::vector<std::size_t> t_indices,
                                           std::vector<std::size_t> s_indices,
                                           std::vector<NoisePair> pairs)
    : t_(std::move(t_indices)), s_(std::move(s_indices)), pairs_(std::move(pairs)) {
    if (t_.empty() || s_.empty() || pairs_.empty()) {
        throw UsageError("noise", "correlation estimator needs probes and pairs");
    }
    sums_.assign(pairs_.size(), std::vector<std::array<double, 4>>(t_.size() * s_.size(),
                                                                   std::array<double, 4>{}));
}

CorrelationEstimator CorrelationEstimator::on_uniform_probe(const TimeGrid& grid,
                                                            std::size_t probes,
                                                            std::vector<NoisePair> pairs) {
    const std::size_t n = grid.n_half();
    if (probes < 2) throw UsageError("noise", "probe grid needs at least 2 points per axis");
    probes = std::min(probes, n);
    std::vector<std::size_t> idx(probes);
    for (std::size_t i = 0; i < probes; ++i) {
        idx[i] = static_cast<std::size_t>(
            std::llround(static_cast<double>(i) * static_cast<double>(n - 1) /
                         static_cast<double>(probes - 1)));
    }
    return CorrelationEstimator(idx, idx, std::move(pairs));
}

void CorrelationEstimator::add(const NoiseBundle& bundle) {
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
        const ComplexSeries* a = nullptr;
        const ComplexSeries* bsr = nullptr;
        switch (pairs_[p]) {
            case NoisePair::EtaEta: a = &bundle.eta; bsr = &bundle.eta; break;
            case NoisePair::XiEta: a = &bundle.xi; bsr = &bundle.eta; break;
            case NoisePair::XiXi: a = &bundle.xi; bsr = &bundle.xi; break;
            case NoisePair::ZetaXi: a = &bundle.zeta; bsr = &bundle.xi; break;
            case NoisePair::ZetaEta: a = &bundle.zeta; bsr = &bundle.eta; break;
        }
        auto& acc = sums_[p];
        std::size_t cell = 0;
        for (std::size_t ti : t_) {
            const Complex at = (*a)[ti];
            for (std::size_t si : s_) {
                const Complex v = at * (*bsr)[si];
                auto& s = acc[cell++];
                s[0] += v.real();
                s[1] += v.imag();
                s[2] += v.real() * v.real();
                s[3] += v.imag() * v.imag();
            }
        }
    }
    ++count_;
}

std::vector<CorrelationRow> CorrelationEstimator::result(NoisePair pair) const {
    if (count_ < kMinSamples) {
        std::ostringstream os;
        os << "empirical correlation needs >= " << kMinSamples << " bundles, got " << count_;
        throw UsageError("noise", os.str());
    }
    const auto it = std::find(pairs_.begin(), pairs_.end(), pair);
    if (it == pairs_.end()) throw UsageError("noise", "pair " + to_string(pair) + " not tracked");
    const auto& acc = sums_[static_cast<std::size_t>(it - pairs_.begin())];
    const double n = static_cast<double>(count_);
    std::vector<CorrelationRow> rows;
    rows.reserve(acc.size());
    std::size_t cell = 0;
    for (std::size_t ti : t_) {
        for (std::size_t si : s_) {
            const auto& s = acc[cell++];
            const double mre = s[0] / n;
            const double mim = s[1] / n;
            const double vre = std::max(0.0, (s[2] - n * mre * mre) / (n - 1.0));
            const double vim = std::max(0.0, (s[3] - n * mim * mim) / (n - 1.0));
            rows.push_back({ti, si, {mre, mim}, std::sqrt(vre / n), std::sqrt(vim / n)});
        }
    }
    return rows;
}

std::vector<CorrelationRow> empirical_correlation(const std::vector<NoiseBundle>& bundles,
                                                  NoisePair pair,
                                                  const std::vector<std::size_t>& t_indices,
                                                  const std::vector<std::size_t>& s_indices) {
    CorrelationEstimator est(t_indices, s_indices, {pair});
    for (const auto& b : bundles) est.add(b);
    return est.result(pair);
}

double correlation_z_score(const CorrelationRow& row, Complex target) {
    auto component = [](double est, double tgt, double se) {
        const double dev = std::abs(est - tgt);
        if (se > 0.0) return dev / se;
        return dev > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    return std::max(component(row.estimate.real(), target.real(), row.stderr_re),
                    component(row.estimate.imag(), target.imag(), row.stderr_im));
}

}  // namespace scle
