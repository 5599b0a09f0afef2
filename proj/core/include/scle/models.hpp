#pragma once

#include <optional>
#include <string>

#include "scle/correlation.hpp"
#include "scle/dynamics.hpp"

namespace scle {

enum class Units {
    /// Frequencies in units of omega0, times in units of 1/omega0.
    NormalizedOmega0,
    /// Frequencies in ps^-1, times in ps.
    InversePicoseconds,
};

std::string to_string(Units u);
Units units_from_string(const std::string& name);

/// k_B / hbar in ps^-1 K^-1.
inline constexpr double kBoltzmannOverHbar = 1.380649e-23 / 1.054571817e-34 * 1e-12;

/// beta = hbar / (k_B T) in ps. Throws DomainError for T <= 0 or units other
/// than InversePicoseconds.
double kelvin_to_beta(double temperature_kelvin, Units units = Units::InversePicoseconds);
double beta_to_kelvin(double beta, Units units = Units::InversePicoseconds);

enum class InitialState { PlusX, Excited, Ground, Custom };

std::string to_string(InitialState s);
InitialState initial_state_from_string(const std::string& name);

/// 2x2 density matrix of a catalog initial state (Custom is rejected).
Matrix density_matrix(InitialState s);

/// Ideal pi-pulses about y every `period`, at t = n * period for n >= 1 up to
/// `t_end`.
struct PulseTrain {
    double period = 2.0;
    double t_end = 0.0;
};

struct PureDephasingOptions {
    InitialState initial = InitialState::PlusX;
    std::optional<Matrix> rho0;
    std::optional<PulseTrain> pulses;
};

/// H = omega0/2 sigma_z, S = sigma_z. Observables sx, sy, sz, I.
OperatorBasisModel make_pure_dephasing(double omega0, const PureDephasingOptions& opts = {});

struct Pump {
    /// Peak Rabi frequency Omega; the drive is (Omega/2) sin((omega0 + detuning) t) sigma_x.
    double rabi = 0.5;
    double detuning = 0.0;
};

struct SpinBosonOptions {
    std::optional<Pump> pump;
    /// Defaults to Excited without a pump and Ground with one.
    std::optional<InitialState> initial;
    std::optional<Matrix> rho0;
};

/// H = omega0/2 sigma_z, S = sigma_x.
OperatorBasisModel make_spin_boson(double omega0, const SpinBosonOptions& opts = {});

struct RabiSpec {
    enum class Kind { Constant, Gaussian };
    Kind kind = Kind::Constant;
    /// Constant Rabi frequency, or the Gaussian peak Omega0.
    double rabi = 0.0;
    /// Gaussian width: Omega(t) = Omega0 exp(-(t / tau)^2), peak at t = 0.
    double tau = 0.0;

    double at(double t) const;
    /// sqrt(pi) Omega0 tau for a Gaussian.
    double pulse_area() const;
};

struct QuantumDotOptions {
    InitialState initial = InitialState::Ground;
    std::optional<Matrix> rho0;
};

/// Rotating frame: H = delta/2 sigma_z + Omega(t)/2 sigma_x, S = sigma_z/2.
/// Observables sx, sy, sz, I and the excited-state population pop = (1 + sz)/2.
OperatorBasisModel make_quantum_dot(double delta, const RabiSpec& rabi,
                                    const QuantumDotOptions& opts = {});

/// Exact pure-dephasing expectation values on the full steps of `grid`.
struct PureDephasingOracle {
    RealSeries envelope;        // exp(-4 int_0^t ds int_0^s du Re alpha_T(s - u))
    RealSeries sx;              // cos(omega0 t) envelope <sx(0)>
    RealSeries sy;              // sin(omega0 t) envelope <sx(0)>
    RealSeries coupling_energy; // 2 int_0^t Im alpha(s) ds
};

/// Double integrals by the trapezoidal rule on the half-step kernel grid.
PureDephasingOracle pure_dephasing_oracle(double omega0, const KernelTable& kernels,
                                          const TimeGrid& grid, double sx0 = 1.0);

}  // namespace scle
