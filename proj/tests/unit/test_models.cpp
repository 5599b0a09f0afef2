#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "scle/error.hpp"
#include "scle/models.hpp"

using namespace scle;

namespace {

// int_0^wmax f(w) dw in pieces short against cos(w t).
template <class F>
double piecewise(F f, double wmax, double t) {
    const int n = static_cast<int>(std::ceil(wmax * (1.0 + t) / std::numbers::pi));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            f, wmax * i / n, wmax * (i + 1) / n, 10, 1e-14);
    }
    return sum;
}

// (1 - cos(w t)) / w^p without cancellation near w = 0.
double one_minus_cos_over(double w, double t, int p) {
    const double x = w * t;
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s / std::pow(w, p);
}

// exp(-4 int_0^t ds int_0^s du Re alpha_T(s - u)) as one frequency integral.
double envelope_oracle(const SpectralDensity& spec, double beta, double t) {
    const double v = piecewise(
        [&](double w) {
            if (w == 0.0) return thermal_weight(spec, beta, 0.0) * 0.5 * t * t;
            return thermal_weight(spec, beta, w) * one_minus_cos_over(w, t, 2);
        },
        spec.omega_max, t);
    return std::exp(-4.0 * v);
}

// 2 int_0^t Im alpha(s) ds = -2 int J(w) (1 - cos w t) / w dw.
double coupling_oracle(const SpectralDensity& spec, double t) {
    return -2.0 * piecewise(
                      [&](double w) {
                          if (w == 0.0) return 0.0;
                          return eval_spectral_density(spec, w) * one_minus_cos_over(w, t, 1);
                      },
                      spec.omega_max, t);
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("kelvin conversion") {
    CHECK(kBoltzmannOverHbar == doctest::Approx(0.13092).epsilon(1e-4));
    CHECK(kelvin_to_beta(50.0) == doctest::Approx(0.15276).epsilon(1e-4));
    CHECK(kelvin_to_beta(4.2) == doctest::Approx(1.8186).epsilon(1e-4));
    CHECK(1.0 / kelvin_to_beta(50.0) == doctest::Approx(6.546).epsilon(1e-3));
    for (double T : {0.01, 4.2, 50.0, 300.0, 1e5}) {
        CHECK(std::abs(beta_to_kelvin(kelvin_to_beta(T)) - T) / T < 1e-12);
    }
    CHECK(kelvin_to_beta(1e12) < 1e-10);
    CHECK_THROWS_AS(kelvin_to_beta(0.0), DomainError);
    CHECK_THROWS_AS(kelvin_to_beta(-3.0), DomainError);
    CHECK_THROWS_AS(kelvin_to_beta(50.0, Units::NormalizedOmega0), DomainError);
    CHECK(units_from_string(to_string(Units::InversePicoseconds)) == Units::InversePicoseconds);
}

TEST_CASE("pure dephasing catalog entry") {
    const auto m = make_pure_dephasing(1.0);
    CHECK_NOTHROW(m.validate());
    CHECK((m.init_vector - Vector{{1.0, 1.0, 0.0, 0.0}}).norm() < 1e-15);
    CHECK((m.coupling_coeffs - Vector{{0.0, 0.0, 0.0, 1.0}}).norm() < 1e-15);
    CHECK(m.pulses.empty());
    CHECK(m.drive.empty());
    CHECK_THROWS_AS(m.observable("pop"), ModelError);
    CHECK_THROWS_AS(make_pure_dephasing(0.0), DomainError);

    const auto c = make_pure_dephasing(1.0, {InitialState::PlusX, std::nullopt, PulseTrain{2.0, 20.0}});
    REQUIRE(c.pulses.size() == 10);
    for (std::size_t n = 0; n < c.pulses.size(); ++n) {
        CHECK(c.pulses[n].time == doctest::Approx(2.0 * static_cast<double>(n + 1)));
    }
}

TEST_CASE("spin-boson catalog entry") {
    const auto m = make_spin_boson(1.0);
    CHECK_NOTHROW(m.validate());
    CHECK((m.init_vector - Vector{{1.0, 0.0, 0.0, 1.0}}).norm() < 1e-15);
    CHECK((m.coupling_coeffs - Vector{{0.0, 1.0, 0.0, 0.0}}).norm() < 1e-15);

    const auto pumped = make_spin_boson(1.0, {Pump{0.5, 0.0}, std::nullopt, std::nullopt});
    REQUIRE(pumped.drive.size() == 1);
    CHECK((pumped.init_vector - Vector{{1.0, 0.0, 0.0, -1.0}}).norm() < 1e-15);
    CHECK(pumped.drive[0].coefficient(std::numbers::pi / 2.0) == doctest::Approx(0.5));

    const auto off = make_spin_boson(1.0, {Pump{0.0, 0.3}, InitialState::Excited, std::nullopt});
    CHECK(off.drive.empty());
    CHECK((off.H_mat - m.H_mat).norm() == 0.0);
    CHECK((off.Sc_mat - m.Sc_mat).norm() == 0.0);
    CHECK((off.init_vector - m.init_vector).norm() == 0.0);
}

TEST_CASE("quantum dot catalog entry") {
    const RabiSpec pulse{RabiSpec::Kind::Gaussian, 1.28, 20.2};
    CHECK(pulse.pulse_area() / std::numbers::pi == doctest::Approx(14.6).epsilon(1e-3));
    CHECK(pulse.at(0.0) == 1.28);
    CHECK(pulse.at(20.2) == doctest::Approx(1.28 / std::numbers::e));

    const auto m = make_quantum_dot(0.0, {RabiSpec::Kind::Constant, std::numbers::pi / 2.0, 0.0});
    CHECK_NOTHROW(m.validate());
    CHECK((m.init_vector - Vector{{1.0, 0.0, 0.0, -1.0}}).norm() < 1e-15);
    CHECK((m.coupling_coeffs - Vector{{0.0, 0.0, 0.0, 0.5}}).norm() < 1e-15);
    CHECK((m.observable("pop").coeffs - Vector{{0.5, 0.0, 0.0, 0.5}}).norm() < 1e-15);

    const auto idle = make_quantum_dot(0.0, {RabiSpec::Kind::Constant, 0.0, 0.0});
    CHECK(idle.H_mat.norm() == 0.0);
    // S ~ sigma_z commutes with I and sigma_z
    CHECK(idle.Sc_mat.row(3).norm() == 0.0);
    CHECK(idle.Sc_mat.row(0).norm() == 0.0);
    CHECK_THROWS_AS(make_quantum_dot(0.0, {RabiSpec::Kind::Gaussian, 1.0, 0.0}), DomainError);
}

TEST_CASE("oracle without coupling is free precession") {
    const auto spec = SpectralDensity::ohmic_debye(0.0, 0.5);
    const TimeGrid g(0.02, 500);
    const auto k = make_kernel_table(spec, 1.0, g);
    const auto o = pure_dephasing_oracle(1.0, k, g);
    for (std::size_t i = 0; i < g.n_full(); ++i) {
        CHECK(o.envelope[i] == 1.0);
        CHECK(o.sx[i] == doctest::Approx(std::cos(g.full_time(i))));
        CHECK(o.coupling_energy[i] == 0.0);
    }
}

TEST_CASE("oracle envelope matches a frequency-domain integral") {
    const auto spec = SpectralDensity::ohmic_debye(1.0, 0.5);
    const TimeGrid g(0.02, 1000);
    const auto k = make_kernel_table(spec, 1.0, g);
    const auto o = pure_dephasing_oracle(1.0, k, g, 1.0);
    for (std::size_t i : {25u, 100u, 250u, 500u}) {
        const double t = g.full_time(i);
        CAPTURE(t);
        CHECK(o.envelope[i] == doctest::Approx(envelope_oracle(spec, 1.0, t)).epsilon(1e-5));
        // trapezoid error ~ h^2 |Im alpha'(0)| / 12, set by omega_max
        CHECK(std::abs(o.coupling_energy[i] - coupling_oracle(spec, t)) < 1e-4);
        // phase factors out of the modulus
        CHECK(o.sx[i] * o.sx[i] + o.sy[i] * o.sy[i] ==
              doctest::Approx(o.envelope[i] * o.envelope[i]).epsilon(1e-12));
    }
    // a fine-grid evaluation of the same double integral
    const TimeGrid fine(0.002, 2500);
    const auto kf = make_kernel_table(spec, 1.0, fine);
    const auto of = pure_dephasing_oracle(1.0, kf, fine);
    CHECK(o.envelope[250] == doctest::Approx(of.envelope[2500]).epsilon(1e-5));
}

TEST_CASE("oracle coupling energy tends to the Debye closed form") {
    // the cutoff at omega_max shifts the late value by about 2 G wc^2 / (pi omega_max)
    auto spec = SpectralDensity::ohmic_debye(1.0, 0.5);
    spec.omega_max = 200.0;
    const TimeGrid g(0.005, 2000);
    const auto k = make_kernel_table(spec, 1.0, g);
    const auto o = pure_dephasing_oracle(1.0, k, g);
    const double bias = 0.5 / (std::numbers::pi * spec.omega_max);
    for (std::size_t i : {200u, 500u, 1000u, 2000u}) {
        const double t = g.full_time(i);
        CAPTURE(t);
        CHECK(std::abs(o.coupling_energy[i] + 0.5 * (1.0 - std::exp(-0.5 * t))) < 2.0 * bias);
    }
}

TEST_CASE("oracle rejects a table that does not cover the grid") {
    const auto k = make_kernel_table(SpectralDensity::ohmic_debye(1.0, 0.5), 1.0, TimeGrid(0.02, 10));
    CHECK_THROWS_AS(pure_dephasing_oracle(1.0, k, TimeGrid(0.02, 20)), UsageError);
}

}
