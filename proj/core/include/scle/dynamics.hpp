#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "scle/grid.hpp"
#include "scle/noise.hpp"

namespace scle {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// (I, sigma_x, sigma_y, sigma_z); |e> = (1, 0) is the +1 eigenstate of sigma_z.
std::array<Eigen::Matrix2cd, 4> pauli_matrices();
std::vector<Matrix> pauli_basis();

/// Time-dependent Hamiltonian term f(t) V. `matrix` holds the commutator
/// structure constants of V, so the term contributes i f(t) matrix to the
/// generator.
struct DriveTerm {
    std::string name;
    Matrix matrix;
    std::function<double(double)> coefficient;
};

/// Impulsive unitary applied after the step ending at `time` (snapped to the
/// nearest full step).
struct PulseEvent {
    double time = 0.0;
    Matrix map;
};

/// Named coefficient vector b with <B> = sum_l b_l <Y_l>.
struct ObservableMap {
    std::string name;
    Vector coeffs;
};

/// Linear stochastic model over a closed operator basis:
///   dY/dt = (i H + i C(t) + i xi/sqrt2 Sc + eta/sqrt2 Sa) Y
struct OperatorBasisModel {
    std::string name;
    std::size_t basis_dim = 0;
    Matrix H_mat;
    Matrix Sc_mat;
    Matrix Sa_mat;
    std::vector<DriveTerm> drive;
    std::vector<PulseEvent> pulses;
    Vector init_vector;
    std::vector<ObservableMap> observable_maps;
    /// Basis coefficients of the coupling operator S and of the identity.
    Vector coupling_coeffs;
    Vector identity_coeffs;

    /// Throws ModelError on inconsistent dimensions.
    void validate() const;
    /// Throws ModelError naming the missing observable.
    const ObservableMap& observable(const std::string& name) const;
};

struct StructureConstants {
    Matrix H_mat;
    Matrix Sc_mat;
    Matrix Sa_mat;
};

/// Coefficients c with A = sum_l c_l basis[l]. Throws ModelError if the
/// Frobenius residual exceeds `tolerance`; `what` names the operand.
Vector expand_in_basis(const Matrix& A, const std::vector<Matrix>& basis,
                       const std::string& what, double tolerance = 1e-12);

/// [H, Y_l] = sum_m H_lm Y_m, [S, Y_l] = sum_m Sc_lm Y_m, {S, Y_l} = sum_m Sa_lm Y_m.
StructureConstants structure_constants(const Matrix& H_sys, const Matrix& S,
                                       const std::vector<Matrix>& basis);

/// Commutator matrix of a single operator: [V, Y_l] = sum_m M_lm Y_m.
Matrix commutator_matrix(const Matrix& V, const std::vector<Matrix>& basis);

/// Action of rho -> U rho U^dagger on the expectation vector:
/// U^dagger Y_l U = sum_m M_lm Y_m.
Matrix adjoint_map(const Matrix& U, const std::vector<Matrix>& basis);

/// Tr{Y_l rho0}. Throws ModelError unless rho0 is Hermitian, of unit trace,
/// and positive semidefinite (tolerance 1e-10).
Vector init_vector(const std::vector<Matrix>& basis, const Matrix& rho0);

/// Expectation path at full steps, row-major: Y(k, l) = data[k * dim + l].
struct Trajectory {
    TimeGrid grid;
    std::size_t dim = 0;
    std::vector<Complex> data;
    bool valid = true;
    /// Full step at which a non-finite value first appeared.
    std::size_t failed_step = 0;

    Complex at(std::size_t step, std::size_t l) const { return data[step * dim + l]; }
    Eigen::Map<const Vector> state(std::size_t step) const {
        return {data.data() + step * dim, static_cast<Eigen::Index>(dim)};
    }
    /// zeta at full step `step` of the bundle the trajectory was driven by.
    static Complex zeta_at(const NoiseBundle& bundle, std::size_t step) { return bundle.zeta[2 * step]; }
};

/// Classical RK4 with the noises read at the half-step samples 2k, 2k+1,
/// 2k+1, 2k+2. Pulses are applied after the step ending at their snapped time;
/// a pulse at t_start acts on the initial vector. Pulses outside the grid are
/// ignored. Non-finite values mark the trajectory invalid and stop integration.
Trajectory integrate_trajectory(const OperatorBasisModel& model, const NoiseBundle& bundle,
                                const TimeGrid& grid);

/// Same, reusing `out`'s storage.
void integrate_trajectory(const OperatorBasisModel& model, const NoiseBundle& bundle,
                          const TimeGrid& grid, Trajectory& out);

/// As above with an explicit initial vector (used for linearity checks).
void integrate_trajectory(const OperatorBasisModel& model, const NoiseBundle& bundle,
                          const TimeGrid& grid, const Vector& y0, Trajectory& out);

Vector apply_pulse(const Vector& y, const PulseEvent& pulse);

}  // namespace scle
