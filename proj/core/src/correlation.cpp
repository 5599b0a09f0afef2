#include "scle/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "scle/error.hpp"

namespace scle {

TimeGrid::TimeGrid(double dt_, std::size_t n_steps_, double t_start_)
    : dt(dt_), n_steps(n_steps_), t_start(t_start_) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw UsageError("correlation", "time grid requires dt > 0");
    }
    if (n_steps == 0) {
        throw UsageError("correlation", "time grid requires n_steps > 0");
    }
}

std::string to_string(SpectralKind kind) {
    switch (kind) {
        case SpectralKind::OhmicDebye: return "ohmic_debye";
        case SpectralKind::SuperOhmicGauss: return "super_ohmic_gauss";
    }
    return "unknown";
}

SpectralKind spectral_kind_from_string(const std::string& name) {
    if (name == "ohmic_debye") return SpectralKind::OhmicDebye;
    if (name == "super_ohmic_gauss") return SpectralKind::SuperOhmicGauss;
    throw DomainError("correlation", "unknown spectral density kind '" + name + "'");
}

SpectralDensity SpectralDensity::ohmic_debye(double coupling, double cutoff) {
    return {SpectralKind::OhmicDebye, coupling, cutoff, kDefaultOmegaMaxRatio * cutoff};
}

SpectralDensity SpectralDensity::super_ohmic_gauss(double coupling, double cutoff) {
    return {SpectralKind::SuperOhmicGauss, coupling, cutoff, kDefaultOmegaMaxRatio * cutoff};
}

void SpectralDensity::validate(double min_ratio) const {
    if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
        throw DomainError("correlation", "spectral coupling must be finite and >= 0");
    }
    if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
        throw DomainError("correlation", "spectral cutoff must be finite and > 0");
    }
    if (!(omega_max > 0.0) || !std::isfinite(omega_max)) {
        throw DomainError("correlation", "omega_max must be finite and > 0");
    }
    if (omega_max < min_ratio * cutoff) {
        std::ostringstream os;
        os << "omega_max = " << omega_max << " is below " << min_ratio
           << " x cutoff = " << min_ratio * cutoff;
        throw DomainError("correlation", os.str());
    }
}

double SpectralDensity::slope_at_zero() const noexcept {
    switch (kind) {
        case SpectralKind::OhmicDebye: return coupling / std::numbers::pi;
        case SpectralKind::SuperOhmicGauss: return 0.0;
    }
    return 0.0;
}

double eval_spectral_density(const SpectralDensity& spec, double omega) {
    if (!(omega >= 0.0)) {
        throw DomainError("correlation", "spectral density evaluated at negative frequency");
    }
    const double wc = spec.cutoff;
    switch (spec.kind) {
        case SpectralKind::OhmicDebye:
            return spec.coupling * wc * wc * omega / (std::numbers::pi * (wc * wc + omega * omega));
        case SpectralKind::SuperOhmicGauss: {
            const double x = omega / wc;
            return spec.coupling * omega * omega * omega * std::exp(-x * x);
        }
    }
    return 0.0;
}

double thermal_weight(const SpectralDensity& spec, double beta, double omega) {
    if (std::isinf(beta)) return eval_spectral_density(spec, omega);
    const double x = 0.5 * beta * omega;
    if (omega == 0.0) return 2.0 * spec.slope_at_zero() / beta;
    if (x < 1e-6) {
        // coth x = 1/x + x/3 + O(x^3)
        return eval_spectral_density(spec, omega) * (1.0 / x + x / 3.0);
    }
    return eval_spectral_density(spec, omega) / std::tanh(x);
}

namespace {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

GaussRule gauss_legendre(std::size_t n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 -
                                   (static_cast<double>(k) - 1.0) * p0) /
                                  static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

struct Quadrature {
    std::vector<double> omega;
    std::vector<double> weight;
};

/// Panel breakpoints: a thermal region [0, b] resolved at the scale 1/beta,
/// then uniform panels out to omega_max. `scale` doubles every panel.
std::vector<double> panel_edges(const SpectralDensity& spec, double beta, double lag_max,
                                std::size_t base_panels, std::size_t scale) {
    const double wmax = spec.omega_max;
    // Each panel should span at most ~4 radians of exp(-i w t) at the largest lag.
    auto oscill = [&](double span) {
        return static_cast<std::size_t>(std::ceil(span * lag_max / 4.0));
    };

    std::vector<double> edges{0.0};
    double start = 0.0;
    if (std::isfinite(beta)) {
        const double b = std::min(wmax, 40.0 / beta);
        if (b < wmax) {
            const double width = std::numbers::pi / beta;
            const std::size_t floor = static_cast<std::size_t>(
                std::ceil(static_cast<double>(base_panels) * b / wmax));
            const std::size_t thermal = std::max(
                {std::size_t{4}, floor, oscill(b), static_cast<std::size_t>(std::ceil(b / width))});
            for (std::size_t i = 1; i <= thermal * scale; ++i) {
                edges.push_back(b * static_cast<double>(i) / static_cast<double>(thermal * scale));
            }
            start = b;
        }
    }
    const double span = wmax - start;
    const std::size_t uniform =
        std::max<std::size_t>(oscill(span), std::ceil(static_cast<double>(base_panels) * span / wmax));
    const std::size_t count = std::max<std::size_t>(1, uniform) * scale;
    for (std::size_t i = 1; i <= count; ++i) {
        edges.push_back(start + span * static_cast<double>(i) / static_cast<double>(count));
    }
    edges.back() = wmax;
    return edges;
}

Quadrature build_quadrature(const std::vector<double>& edges, const GaussRule& rule) {
    Quadrature q;
    const std::size_t n = rule.nodes.size();
    q.omega.reserve((edges.size() - 1) * n);
    q.weight.reserve((edges.size() - 1) * n);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p];
        const double b = edges[p + 1];
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t i = 0; i < n; ++i) {
            q.omega.push_back(mid + half * rule.nodes[i]);
            q.weight.push_back(half * rule.weights[i]);
        }
    }
    return q;
}

struct RawKernels {
    ComplexSeries alpha;
    ComplexSeries alpha_T;
};

/// Kernels at lags k * step, k = 0..count-1, for one fixed quadrature.
RawKernels integrate(const SpectralDensity& spec, double beta, const Quadrature& q,
                     double step, std::size_t count) {
    std::vector<double> re_a(count, 0.0);
    std::vector<double> re_t(count, 0.0);
    std::vector<double> im(count, 0.0);
    constexpr std::size_t kReseed = 32;
    for (std::size_t j = 0; j < q.omega.size(); ++j) {
        const double w = q.omega[j];
        const double jw = q.weight[j] * eval_spectral_density(spec, w);
        const double tw = q.weight[j] * thermal_weight(spec, beta, w);
        const Complex rot = std::polar(1.0, w * step);
        Complex phase{1.0, 0.0};
        for (std::size_t k = 0; k < count; ++k) {
            if (k % kReseed == 0) {
                const double arg = w * step * static_cast<double>(k);
                phase = {std::cos(arg), std::sin(arg)};
            }
            re_a[k] += jw * phase.real();
            re_t[k] += tw * phase.real();
            im[k] -= jw * phase.imag();
            phase *= rot;
        }
    }
    RawKernels out;
    out.alpha.resize(count);
    out.alpha_T.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        out.alpha[k] = {re_a[k], im[k]};
        out.alpha_T[k] = {re_t[k], im[k]};
    }
    return out;
}

struct Converged {
    RawKernels kernels;
    std::size_t panels = 0;
    double delta = 0.0;
};

Converged integrate_converged(const SpectralDensity& spec, double beta, double step,
                              std::size_t count, const QuadratureOptions& opts) {
    if (!(beta > 0.0)) {
        throw DomainError("correlation", "inverse temperature beta must be > 0 (or infinite)");
    }
    spec.validate(0.0);
    const GaussRule rule = gauss_legendre(opts.order);
    const double lag_max = step * static_cast<double>(count > 0 ? count - 1 : 0);

    std::size_t scale = 1;
    auto edges = panel_edges(spec, beta, lag_max, opts.initial_panels, scale);
    RawKernels prev = integrate(spec, beta, build_quadrature(edges, rule), step, count);
    double delta = std::numeric_limits<double>::infinity();
    while (true) {
        scale *= 2;
        edges = panel_edges(spec, beta, lag_max, opts.initial_panels, scale);
        const std::size_t panels = edges.size() - 1;
        RawKernels next = integrate(spec, beta, build_quadrature(edges, rule), step, count);
        double scale_ref = 0.0;
        double change = 0.0;
        std::size_t worst = 0;
        for (std::size_t k = 0; k < count; ++k) {
            scale_ref = std::max(scale_ref, std::abs(next.alpha_T[k]));
            scale_ref = std::max(scale_ref, std::abs(next.alpha[k]));
            const double d = std::max(std::abs(next.alpha[k] - prev.alpha[k]),
                                      std::abs(next.alpha_T[k] - prev.alpha_T[k]));
            if (d > change) {
                change = d;
                worst = k;
            }
        }
        delta = scale_ref > 0.0 ? change / scale_ref : change;
        if (delta < opts.tolerance) {
            return {std::move(next), panels, delta};
        }
        if (panels * 2 > opts.max_panels) {
            std::ostringstream os;
            os << "kernel quadrature did not converge: relative change " << delta
               << " at lag index " << worst << " (t = " << step * static_cast<double>(worst)
               << ") with " << panels << " panels; tolerance " << opts.tolerance;
            throw NumericalError("correlation", os.str());
        }
        prev = std::move(next);
    }
}

}  // namespace

ComplexSeries tabulate_alpha(const SpectralDensity& spec, const TimeGrid& grid,
                             const QuadratureOptions& opts) {
    return integrate_converged(spec, kInfiniteBeta, grid.half_dt(), grid.n_half(), opts)
        .kernels.alpha;
}

ComplexSeries tabulate_alpha_T(const SpectralDensity& spec, double beta, const TimeGrid& grid,
                               const QuadratureOptions& opts) {
    return integrate_converged(spec, beta, grid.half_dt(), grid.n_half(), opts).kernels.alpha_T;
}

ComplexSeries tabulate_alpha_tilde(const ComplexSeries& alpha, const ComplexSeries& alpha_T) {
    if (alpha.size() != alpha_T.size()) {
        throw UsageError("correlation", "alpha and alpha_T are tabulated on different grids");
    }
    ComplexSeries out(alpha.size());
    for (std::size_t k = 0; k < alpha.size(); ++k) out[k] = alpha_T[k] - 0.5 * alpha[k];
    return out;
}

KernelTable make_kernel_table(const SpectralDensity& spec, double beta, const TimeGrid& grid,
                              const QuadratureOptions& opts) {
    auto conv = integrate_converged(spec, beta, grid.half_dt(), grid.n_half(), opts);
    KernelTable table;
    table.grid = grid;
    table.spec = spec;
    table.beta = beta;
    table.alpha = std::move(conv.kernels.alpha);
    table.alpha_T = std::move(conv.kernels.alpha_T);
    table.alpha_tilde = tabulate_alpha_tilde(table.alpha, table.alpha_T);
    table.panels = conv.panels;
    table.convergence_delta = conv.delta;
    return table;
}

std::vector<CutoffConvergenceRow> omega_max_convergence(SpectralDensity spec, double beta,
                                                        const std::vector<double>& multiples,
                                                        const QuadratureOptions& opts) {
    std::vector<CutoffConvergenceRow> rows;
    rows.reserve(multiples.size());
    for (double m : multiples) {
        spec.omega_max = m * spec.cutoff;
        auto conv = integrate_converged(spec, beta, 1.0, 1, opts);
        rows.push_back({spec.omega_max, conv.kernels.alpha_T[0].real()});
    }
    return rows;
}

}  // namespace scle
