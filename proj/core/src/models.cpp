#include "scle/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "scle/error.hpp"

namespace scle {

std::string to_string(Units u) {
    switch (u) {
        case Units::NormalizedOmega0: return "normalized";
        case Units::InversePicoseconds: return "inverse_ps";
    }
    return "unknown";
}

Units units_from_string(const std::string& name) {
    if (name == "normalized") return Units::NormalizedOmega0;
    if (name == "inverse_ps") return Units::InversePicoseconds;
    throw UsageError("models", "unknown units '" + name + "'");
}

double kelvin_to_beta(double temperature_kelvin, Units units) {
    if (units != Units::InversePicoseconds) {
        throw DomainError("models", "temperatures in kelvin need inverse_ps units");
    }
    if (!(temperature_kelvin > 0.0)) {
        throw DomainError("models", "temperature must be > 0 K");
    }
    return 1.0 / (kBoltzmannOverHbar * temperature_kelvin);
}

double beta_to_kelvin(double beta, Units units) {
    if (units != Units::InversePicoseconds) {
        throw DomainError("models", "temperatures in kelvin need inverse_ps units");
    }
    if (!(beta > 0.0)) throw DomainError("models", "beta must be > 0");
    return 1.0 / (kBoltzmannOverHbar * beta);
}

std::string to_string(InitialState s) {
    switch (s) {
        case InitialState::PlusX: return "plus_x";
        case InitialState::Excited: return "excited";
        case InitialState::Ground: return "ground";
        case InitialState::Custom: return "custom";
    }
    return "unknown";
}

InitialState initial_state_from_string(const std::string& name) {
    if (name == "plus_x") return InitialState::PlusX;
    if (name == "excited") return InitialState::Excited;
    if (name == "ground") return InitialState::Ground;
    if (name == "custom") return InitialState::Custom;
    throw UsageError("models", "unknown initial state '" + name + "'");
}

Matrix density_matrix(InitialState s) {
    Matrix rho = Matrix::Zero(2, 2);
    switch (s) {
        case InitialState::PlusX: rho.setConstant(0.5); break;
        case InitialState::Excited: rho(0, 0) = 1.0; break;
        case InitialState::Ground: rho(1, 1) = 1.0; break;
        case InitialState::Custom:
            throw ModelError("models", "custom initial state needs an explicit density matrix");
    }
    return rho;
}

namespace {

struct PauliModelParts {
    Matrix H;
    Matrix S;
    Matrix rho0;
};

OperatorBasisModel pauli_model(const std::string& name, const PauliModelParts& parts) {
    const auto basis = pauli_basis();
    const auto sc = structure_constants(parts.H, parts.S, basis);
    OperatorBasisModel m;
    m.name = name;
    m.basis_dim = 4;
    m.H_mat = sc.H_mat;
    m.Sc_mat = sc.Sc_mat;
    m.Sa_mat = sc.Sa_mat;
    m.init_vector = init_vector(basis, parts.rho0);
    m.coupling_coeffs = expand_in_basis(parts.S, basis, "coupling operator");
    m.identity_coeffs = Vector::Unit(4, 0);
    m.observable_maps = {{"I", Vector::Unit(4, 0)},
                         {"sx", Vector::Unit(4, 1)},
                         {"sy", Vector::Unit(4, 2)},
                         {"sz", Vector::Unit(4, 3)}};
    return m;
}

Matrix pick_rho(std::optional<Matrix> rho0, InitialState s) {
    if (rho0) return *rho0;
    return density_matrix(s);
}

}  // namespace

OperatorBasisModel make_pure_dephasing(double omega0, const PureDephasingOptions& opts) {
    if (!(omega0 > 0.0)) throw DomainError("models", "omega0 must be > 0");
    const auto p = pauli_matrices();
    OperatorBasisModel m =
        pauli_model("pure_dephasing", {Matrix(0.5 * omega0 * p[3]), Matrix(p[3]),
                                       pick_rho(opts.rho0, opts.initial)});
    if (opts.pulses) {
        const double period = opts.pulses->period;
        if (!(period > 0.0)) throw DomainError("models", "pulse period must be > 0");
        const Matrix U = Complex{0.0, -1.0} * Matrix(p[2]);  // exp(-i pi/2 sigma_y)
        const Matrix map = adjoint_map(U, pauli_basis());
        for (int n = 1;; ++n) {
            const double t = n * period;
            if (t > opts.pulses->t_end * (1.0 + 1e-12)) break;
            m.pulses.push_back({t, map});
        }
    }
    return m;
}

OperatorBasisModel make_spin_boson(double omega0, const SpinBosonOptions& opts) {
    if (!(omega0 > 0.0)) throw DomainError("models", "omega0 must be > 0");
    const auto p = pauli_matrices();
    const InitialState init =
        opts.initial.value_or(opts.pump ? InitialState::Ground : InitialState::Excited);
    OperatorBasisModel m = pauli_model(
        "spin_boson", {Matrix(0.5 * omega0 * p[3]), Matrix(p[1]), pick_rho(opts.rho0, init)});
    if (opts.pump && opts.pump->rabi != 0.0) {
        const double rabi = opts.pump->rabi;
        const double w = omega0 + opts.pump->detuning;
        m.drive.push_back({"pump", commutator_matrix(Matrix(0.5 * p[1]), pauli_basis()),
                           [rabi, w](double t) { return rabi * std::sin(w * t); }});
    }
    return m;
}

double RabiSpec::at(double t) const {
    if (kind == Kind::Constant) return rabi;
    return rabi * std::exp(-(t / tau) * (t / tau));
}

double RabiSpec::pulse_area() const {
    if (kind == Kind::Gaussian) return std::sqrt(std::numbers::pi) * rabi * tau;
    return std::numeric_limits<double>::infinity();
}

OperatorBasisModel make_quantum_dot(double delta, const RabiSpec& rabi,
                                    const QuantumDotOptions& opts) {
    if (rabi.kind == RabiSpec::Kind::Gaussian && !(rabi.tau > 0.0)) {
        throw DomainError("models", "Gaussian pulse width tau must be > 0");
    }
    const auto p = pauli_matrices();
    Matrix H = 0.5 * delta * p[3];
    if (rabi.kind == RabiSpec::Kind::Constant) H += 0.5 * rabi.rabi * p[1];
    OperatorBasisModel m =
        pauli_model("quantum_dot", {H, Matrix(0.5 * p[3]), pick_rho(opts.rho0, opts.initial)});
    if (rabi.kind == RabiSpec::Kind::Gaussian) {
        m.drive.push_back({"rabi", commutator_matrix(Matrix(0.5 * p[1]), pauli_basis()),
                           [rabi](double t) { return rabi.at(t); }});
    }
    Vector pop = Vector::Zero(4);
    pop(0) = 0.5;
    pop(3) = 0.5;
    m.observable_maps.push_back({"pop", pop});
    return m;
}

PureDephasingOracle pure_dephasing_oracle(double omega0, const KernelTable& kernels,
                                          const TimeGrid& grid, double sx0) {
    if (kernels.alpha_T.size() < grid.n_half() || kernels.grid.dt != grid.dt) {
        throw UsageError("models", "kernel table does not cover the oracle grid");
    }
    const std::size_t nh = grid.n_half();
    const double h = grid.half_dt();
    RealSeries inner(nh, 0.0), outer(nh, 0.0), im_int(nh, 0.0);
    for (std::size_t k = 1; k < nh; ++k) {
        inner[k] = inner[k - 1] + 0.5 * h * (kernels.alpha_T[k - 1].real() + kernels.alpha_T[k].real());
        outer[k] = outer[k - 1] + 0.5 * h * (inner[k - 1] + inner[k]);
        im_int[k] = im_int[k - 1] + 0.5 * h * (kernels.alpha[k - 1].imag() + kernels.alpha[k].imag());
    }
    PureDephasingOracle o;
    const std::size_t nf = grid.n_full();
    o.envelope.resize(nf);
    o.sx.resize(nf);
    o.sy.resize(nf);
    o.coupling_energy.resize(nf);
    for (std::size_t k = 0; k < nf; ++k) {
        const double t = grid.dt * static_cast<double>(k);
        const double env = std::exp(-4.0 * outer[2 * k]);
        o.envelope[k] = env;
        o.sx[k] = std::cos(omega0 * t) * env * sx0;
        o.sy[k] = std::sin(omega0 * t) * env * sx0;
        o.coupling_energy[k] = 2.0 * im_int[2 * k];
    }
    return o;
}

}  // namespace scle
