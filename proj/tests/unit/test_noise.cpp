#include "doctest.h"

#include <cmath>
#include <numbers>

#include "scle/error.hpp"
#include "scle/noise.hpp"

using namespace scle;

namespace {

KernelTable small_table(double coupling = 1.0, double beta = 1.0) {
    return make_kernel_table(SpectralDensity::ohmic_debye(coupling, 0.5), beta, TimeGrid(0.1, 40));
}

// Worst z-score of every pair over a probe grid.
double worst_z(const KernelTable& k, const NoisePlan& plan, std::size_t samples, std::uint64_t seed,
               NoisePair pair) {
    auto est = CorrelationEstimator::on_uniform_probe(k.grid, 27, {pair});
    NoiseSampler sampler(plan);
    NoiseBundle b;
    for (std::size_t i = 0; i < samples; ++i) {
        sampler.sample(seed, i, b);
        est.add(b);
    }
    double worst = 0.0;
    for (const auto& row : est.result(pair)) {
        worst = std::max(worst, correlation_z_score(row, noise_target(k, pair, row.t_index, row.s_index)));
    }
    return worst;
}

}  // namespace

TEST_SUITE("noise") {

TEST_CASE("targets follow the kernel table") {
    const auto k = small_table();
    const double s2 = std::numbers::sqrt2;
    CHECK(noise_target(k, NoisePair::EtaEta, 5, 3) == Complex{});
    CHECK(noise_target(k, NoisePair::XiXi, 3, 9).real() == 2.0 * k.alpha_T[6].real());
    CHECK(noise_target(k, NoisePair::XiXi, 9, 3).real() == 2.0 * k.alpha_T[6].real());
    CHECK(noise_target(k, NoisePair::XiEta, 9, 3).real() == 2.0 * k.alpha_T[6].imag());
    CHECK(noise_target(k, NoisePair::XiEta, 3, 9) == Complex{});
    CHECK(noise_target(k, NoisePair::ZetaXi, 4, 4).real() == doctest::Approx(s2 * k.alpha_tilde[0].real()));
    CHECK(noise_target(k, NoisePair::ZetaEta, 7, 2).real() == doctest::Approx(2.0 * s2 * k.alpha_tilde[5].imag()));
    CHECK(noise_target(k, NoisePair::ZetaEta, 2, 7) == Complex{});
}

TEST_CASE("plan kernels are causal and match the table") {
    const auto k = small_table();
    const auto plan = build_noise_plan(k);
    REQUIRE(plan.kernel_K.size() == k.size());
    const double s2 = std::numbers::sqrt2;
    CHECK(plan.kernel_K[0] == doctest::Approx(k.alpha_T[0].imag()));
    CHECK(plan.kernel_C[0] == doctest::Approx(s2 * k.alpha_tilde[0].real()));
    for (std::size_t j = 1; j < k.size(); ++j) {
        CHECK(plan.kernel_K[j] == doctest::Approx(2.0 * k.alpha_T[j].imag()));
        CHECK(plan.kernel_Q[j] == doctest::Approx(2.0 * s2 * k.alpha_tilde[j].imag()));
        CHECK(plan.kernel_C[j] == doctest::Approx(2.0 * s2 * k.alpha_tilde[j].real()));
    }
    CHECK(plan.pad_length >= 2 * k.size());
    CHECK((plan.pad_length & (plan.pad_length - 1)) == 0);
    for (double g : plan.chi_spectrum) CHECK(g >= 0.0);
    CHECK(plan.diagnostics.clipped_bins == 0);
    // chi has the L-periodic covariance; images at L dt/2 - tau leak in on short windows
    CHECK(plan.diagnostics.chi_kernel_mismatch < 2e-2);
    NoiseOptions wide;
    wide.pad_factor = 16;
    const auto padded = build_noise_plan(k, wide);
    const auto production = build_noise_plan(
        make_kernel_table(SpectralDensity::ohmic_debye(1.0, 0.5), 1.0, TimeGrid(0.02, 1000)));
    CHECK(padded.diagnostics.chi_kernel_mismatch < 1e-4);
    CHECK(production.diagnostics.chi_kernel_mismatch < 1e-3);
    CHECK(plan.diagnostics.residual_weight >= 0.0);
    CHECK(plan.diagnostics.residual_weight < 0.2);
    CHECK(plan.diagnostics.discarded_weight == 0.0);
}

TEST_CASE("omega_max above the half-step Nyquist frequency is rejected") {
    auto spec = SpectralDensity::ohmic_debye(1.0, 0.5);
    const auto k = make_kernel_table(spec, 1.0, TimeGrid(0.3, 10));  // pi / 0.15 < 25
    CHECK_THROWS_AS(build_noise_plan(k), UsageError);
    NoiseOptions bad;
    bad.eta_scale = 0.0;
    CHECK_THROWS_AS(build_noise_plan(small_table(), bad), UsageError);
    bad = {};
    bad.residual_scale = -1.0;
    CHECK_THROWS_AS(build_noise_plan(small_table(), bad), UsageError);
}

TEST_CASE("zero coupling leaves only the white eta path") {
    const auto k = small_table(0.0);
    for (auto c : {NoiseConstruction::SpectralRoot, NoiseConstruction::CirculantEmbedding}) {
        NoiseOptions o;
        o.construction = c;
        const auto plan = build_noise_plan(k, o);
        const auto b = sample_bundle(plan, 3, 11);
        REQUIRE(b.xi.size() == k.size());
        double eta_norm = 0.0;
        for (std::size_t j = 0; j < b.xi.size(); ++j) {
            CHECK(b.xi[j] == Complex{});
            CHECK(b.zeta[j] == Complex{});
            eta_norm += std::norm(b.eta[j]);
        }
        CHECK(eta_norm > 0.0);
    }
}

TEST_CASE("sampling is deterministic per stream") {
    const auto plan = build_noise_plan(small_table());
    const auto a = sample_bundle(plan, 17, 4);
    const auto b = sample_bundle(plan, 17, 4);
    const auto c = sample_bundle(plan, 17, 5);
    CHECK(a.xi == b.xi);
    CHECK(a.eta == b.eta);
    CHECK(a.zeta == b.zeta);
    CHECK(a.xi != c.xi);
    CHECK(a.seed_tag == NoiseBundle::SeedTag{17, 4});
    CHECK(a.all_finite());

    NoiseSampler s(plan);
    NoiseBundle reused;
    s.sample(17, 5, reused);
    s.sample(17, 4, reused);
    CHECK(reused.xi == a.xi);
    CHECK(reused.zeta == a.zeta);

    NoiseBundle bare;
    s.sample(17, 4, bare, false);
    CHECK(bare.xi == a.xi);
    CHECK(bare.eta == a.eta);
    CHECK(bare.zeta.empty());
}

TEST_CASE("eta scale only rescales the white path") {
    const auto k = small_table();
    NoiseOptions o;
    o.eta_scale = 2.5;
    const auto p1 = build_noise_plan(k);
    const auto p2 = build_noise_plan(k, o);
    const auto a = sample_bundle(p1, 1, 1);
    const auto b = sample_bundle(p2, 1, 1);
    for (std::size_t j = 0; j < a.eta.size(); ++j) {
        CHECK(std::abs(b.eta[j] - 2.5 * a.eta[j]) < 1e-12 * (1.0 + std::abs(b.eta[j])));
    }
}

TEST_CASE("spectral-root construction reproduces every contracted kernel") {
    const auto k = small_table();
    const auto plan = build_noise_plan(k);
    for (NoisePair p : kAllNoisePairs) {
        CAPTURE(to_string(p));
        CHECK(worst_z(k, plan, 20000, 101, p) < 5.0);
    }
}

TEST_CASE("circulant construction reproduces every contracted kernel") {
    const auto k = small_table();
    NoiseOptions o;
    o.construction = NoiseConstruction::CirculantEmbedding;
    const auto plan = build_noise_plan(k, o);
    for (NoisePair p : kAllNoisePairs) {
        CAPTURE(to_string(p));
        CHECK(worst_z(k, plan, 20000, 202, p) < 5.0);
    }
}

TEST_CASE("kernels survive non-default eta and residual scales") {
    const auto k = small_table(1.0, 0.5);
    NoiseOptions o;
    o.eta_scale = 0.3;
    o.residual_scale = 4.0;
    const auto plan = build_noise_plan(k, o);
    for (NoisePair p : kAllNoisePairs) {
        CAPTURE(to_string(p));
        CHECK(worst_z(k, plan, 20000, 303, p) < 5.0);
    }
}

TEST_CASE("a wrong target is detected") {
    // Guards the statistical test itself: a 10% kernel error must show up.
    const auto k = small_table();
    const auto plan = build_noise_plan(k);
    auto est = CorrelationEstimator({0, 10, 40}, {0, 10, 40}, {NoisePair::XiXi});
    NoiseSampler sampler(plan);
    NoiseBundle b;
    for (std::size_t i = 0; i < 20000; ++i) {
        sampler.sample(9, i, b, false);
        est.add(b);
    }
    double worst = 0.0;
    for (const auto& row : est.result(NoisePair::XiXi)) {
        worst = std::max(worst, correlation_z_score(row, 1.1 * noise_target(k, NoisePair::XiXi,
                                                                           row.t_index, row.s_index)));
    }
    CHECK(worst > 5.0);
}

TEST_CASE("estimator bookkeeping") {
    std::vector<NoiseBundle> bundles(1000);
    for (std::size_t i = 0; i < bundles.size(); ++i) {
        const double v = static_cast<double>(i % 4);
        bundles[i].xi = {Complex{v, 0.0}, Complex{1.0, v}};
        bundles[i].eta = {Complex{2.0, 0.0}, Complex{0.0, 1.0}};
        bundles[i].zeta = bundles[i].xi;
    }
    const auto rows = empirical_correlation(bundles, NoisePair::XiEta, {1}, {0});
    REQUIRE(rows.size() == 1);
    // mean of (1 + i v) * 2 over v = 0..3
    CHECK(rows[0].estimate.real() == doctest::Approx(2.0));
    CHECK(rows[0].estimate.imag() == doctest::Approx(3.0));
    CHECK(rows[0].stderr_re == doctest::Approx(0.0));
    CHECK(rows[0].stderr_im > 0.0);

    CorrelationEstimator few({0}, {0}, {NoisePair::XiXi});
    few.add(bundles[0]);
    CHECK_THROWS_AS(few.result(NoisePair::XiXi), UsageError);
    CHECK_THROWS_AS(few.result(NoisePair::ZetaEta), UsageError);

    CorrelationRow row{0, 0, {1.0, 0.0}, 0.1, 0.0};
    CHECK(correlation_z_score(row, {0.5, 0.0}) == doctest::Approx(5.0));
    CHECK(correlation_z_score(row, {1.0, 1e-13}) == doctest::Approx(0.0));
    CHECK(correlation_z_score(row, {1.0, 1e-6}) > 5.0);
}

}
