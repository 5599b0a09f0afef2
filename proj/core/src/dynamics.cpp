#include "scle/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "scle/error.hpp"

namespace scle {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::Map<const Vector> vec_view(const Matrix& m) {
    return {m.data(), m.size()};
}

Matrix basis_columns(const std::vector<Matrix>& basis) {
    if (basis.empty()) throw ModelError("dynamics", "operator basis is empty");
    const Eigen::Index d = basis.front().rows();
    Matrix B(d * d, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t l = 0; l < basis.size(); ++l) {
        if (basis[l].rows() != d || basis[l].cols() != d) {
            throw ModelError("dynamics", "basis element " + std::to_string(l) +
                                             " is not a square matrix of the common size");
        }
        B.col(static_cast<Eigen::Index>(l)) = vec_view(basis[l]);
    }
    return B;
}

void check_square(const Matrix& m, Eigen::Index d, const char* what) {
    if (m.rows() != d || m.cols() != d) {
        std::ostringstream os;
        os << what << " is " << m.rows() << "x" << m.cols() << ", expected " << d << "x" << d;
        throw ModelError("dynamics", os.str());
    }
}

/// Projects each image f(Y_l) onto the basis; row l of the result holds the
/// coefficients.
template <typename F>
Matrix project_images(const std::vector<Matrix>& basis, F&& image, const char* label) {
    const Matrix B = basis_columns(basis);
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(B);
    if (cod.rank() != B.cols()) {
        throw ModelError("dynamics", "basis elements are linearly dependent");
    }
    const auto n = static_cast<Eigen::Index>(basis.size());
    Matrix out(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
        const Matrix img = image(basis[static_cast<std::size_t>(l)]);
        const Vector target = vec_view(img);
        const Vector c = cod.solve(target);
        const double residual = (B * c - target).norm();
        if (residual > 1e-12 * std::max(1.0, target.norm())) {
            std::ostringstream os;
            os << "basis not closed: " << label << " of basis element " << l
               << " leaves residual " << residual;
            throw ModelError("dynamics", os.str());
        }
        out.row(l) = c.transpose();
    }
    return out;
}

}  // namespace

std::array<Eigen::Matrix2cd, 4> pauli_matrices() {
    Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << 0, -kI, kI, 0;
    sz << 1, 0, 0, -1;
    return {id, sx, sy, sz};
}

std::vector<Matrix> pauli_basis() {
    const auto p = pauli_matrices();
    return {p[0], p[1], p[2], p[3]};
}

void OperatorBasisModel::validate() const {
    const auto n = static_cast<Eigen::Index>(basis_dim);
    if (n == 0) throw ModelError("dynamics", "model '" + name + "' has an empty basis");
    check_square(H_mat, n, "H_mat");
    check_square(Sc_mat, n, "Sc_mat");
    check_square(Sa_mat, n, "Sa_mat");
    for (const auto& d : drive) {
        check_square(d.matrix, n, ("drive term '" + d.name + "'").c_str());
        if (!d.coefficient) throw ModelError("dynamics", "drive term '" + d.name + "' has no coefficient");
    }
    for (const auto& p : pulses) check_square(p.map, n, "pulse map");
    if (init_vector.size() != n) throw ModelError("dynamics", "init_vector has the wrong length");
    if (coupling_coeffs.size() != n || identity_coeffs.size() != n) {
        throw ModelError("dynamics", "coupling/identity coefficients have the wrong length");
    }
    for (const auto& o : observable_maps) {
        if (o.coeffs.size() != n) {
            throw ModelError("dynamics", "observable '" + o.name + "' has the wrong length");
        }
    }
}

const ObservableMap& OperatorBasisModel::observable(const std::string& obs) const {
    for (const auto& o : observable_maps) {
        if (o.name == obs) return o;
    }
    throw ModelError("dynamics", "model '" + name + "' has no observable '" + obs + "'");
}

Vector expand_in_basis(const Matrix& A, const std::vector<Matrix>& basis, const std::string& what,
                       double tolerance) {
    const Matrix B = basis_columns(basis);
    check_square(A, basis.front().rows(), what.c_str());
    const Vector target = vec_view(A);
    const Vector c = B.completeOrthogonalDecomposition().solve(target);
    const double residual = (B * c - target).norm();
    if (residual > tolerance * std::max(1.0, target.norm())) {
        std::ostringstream os;
        os << what << " is not in the span of the basis (residual " << residual << ")";
        throw ModelError("dynamics", os.str());
    }
    return c;
}

StructureConstants structure_constants(const Matrix& H_sys, const Matrix& S,
                                       const std::vector<Matrix>& basis) {
    if (basis.empty()) throw ModelError("dynamics", "operator basis is empty");
    const Eigen::Index d = basis.front().rows();
    check_square(H_sys, d, "system Hamiltonian");
    check_square(S, d, "coupling operator");
    StructureConstants sc;
    sc.H_mat = project_images(basis, [&](const Matrix& Y) -> Matrix { return H_sys * Y - Y * H_sys; },
                              "[H, Y]");
    sc.Sc_mat = project_images(basis, [&](const Matrix& Y) -> Matrix { return S * Y - Y * S; },
                               "[S, Y]");
    sc.Sa_mat = project_images(basis, [&](const Matrix& Y) -> Matrix { return S * Y + Y * S; },
                               "{S, Y}");
    return sc;
}

Matrix commutator_matrix(const Matrix& V, const std::vector<Matrix>& basis) {
    if (basis.empty()) throw ModelError("dynamics", "operator basis is empty");
    check_square(V, basis.front().rows(), "drive operator");
    return project_images(basis, [&](const Matrix& Y) -> Matrix { return V * Y - Y * V; },
                          "[V, Y]");
}

Matrix adjoint_map(const Matrix& U, const std::vector<Matrix>& basis) {
    if (basis.empty()) throw ModelError("dynamics", "operator basis is empty");
    check_square(U, basis.front().rows(), "pulse unitary");
    const Matrix Ud = U.adjoint();
    if ((Ud * U - Matrix::Identity(U.rows(), U.cols())).norm() > 1e-10) {
        throw ModelError("dynamics", "pulse operator is not unitary");
    }
    return project_images(basis, [&](const Matrix& Y) -> Matrix { return Ud * Y * U; },
                          "U^dagger Y U");
}

Vector init_vector(const std::vector<Matrix>& basis, const Matrix& rho0) {
    if (basis.empty()) throw ModelError("dynamics", "operator basis is empty");
    check_square(rho0, basis.front().rows(), "density matrix");
    constexpr double tol = 1e-10;
    if ((rho0 - rho0.adjoint()).norm() > tol) {
        throw ModelError("dynamics", "density matrix is not Hermitian");
    }
    const Complex tr = rho0.trace();
    if (std::abs(tr - 1.0) > tol) {
        std::ostringstream os;
        os << "density matrix trace is " << tr.real() << ", expected 1";
        throw ModelError("dynamics", os.str());
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(rho0);
    const double min_ev = eig.eigenvalues().minCoeff();
    if (min_ev < -tol) {
        std::ostringstream os;
        os << "density matrix has negative eigenvalue " << min_ev;
        throw ModelError("dynamics", os.str());
    }
    Vector y(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t l = 0; l < basis.size(); ++l) {
        y(static_cast<Eigen::Index>(l)) = (basis[l] * rho0).trace();
    }
    return y;
}

Vector apply_pulse(const Vector& y, const PulseEvent& pulse) {
    if (pulse.map.cols() != y.size()) throw UsageError("dynamics", "pulse map dimension mismatch");
    return pulse.map * y;
}

namespace {

/// Generator A(t) = i H + i sum_d f_d(t) D_d + xi i Sc/sqrt2 + eta Sa/sqrt2
/// stored on the union sparsity pattern of its parts.
struct SparseGenerator {
    std::vector<int> row;
    std::vector<int> col;
    std::vector<Complex> base;
    std::vector<Complex> sc;
    std::vector<Complex> sa;
    std::vector<std::vector<Complex>> drive;  // per drive term

    SparseGenerator(const OperatorBasisModel& model) {
        const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
        const auto n = static_cast<Eigen::Index>(model.basis_dim);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < n; ++c) {
                bool used = model.H_mat(r, c) != Complex{} || model.Sc_mat(r, c) != Complex{} ||
                            model.Sa_mat(r, c) != Complex{};
                for (const auto& d : model.drive) used = used || d.matrix(r, c) != Complex{};
                if (!used) continue;
                row.push_back(static_cast<int>(r));
                col.push_back(static_cast<int>(c));
                base.push_back(kI * model.H_mat(r, c));
                sc.push_back(kI * inv_sqrt2 * model.Sc_mat(r, c));
                sa.push_back(inv_sqrt2 * model.Sa_mat(r, c));
            }
        }
        for (const auto& d : model.drive) {
            std::vector<Complex> v(row.size());
            for (std::size_t e = 0; e < row.size(); ++e) v[e] = kI * d.matrix(row[e], col[e]);
            drive.push_back(std::move(v));
        }
    }

    std::size_t nnz() const noexcept { return row.size(); }
};

void integrate_impl(const OperatorBasisModel& model, const NoiseBundle& bundle,
                    const TimeGrid& grid, const Vector& y0, Trajectory& out) {
    const SparseGenerator gen(model);
    const std::size_t nnz = gen.nnz();
    const std::size_t dim = model.basis_dim;

    // Pulses snapped to full steps, in time order.
    std::vector<std::pair<std::size_t, const Matrix*>> pulses;
    for (const auto& p : model.pulses) {
        const double pos = (p.time - grid.t_start) / grid.dt;
        const double k = std::round(pos);
        if (k < 0.0 || k > static_cast<double>(grid.n_steps)) continue;
        pulses.emplace_back(static_cast<std::size_t>(k), &p.map);
    }
    std::stable_sort(pulses.begin(), pulses.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t next_pulse = 0;

    std::vector<Complex> scratch(3 * nnz + 6 * dim);
    Complex* a0 = scratch.data();
    Complex* ah = a0 + nnz;
    Complex* a1 = ah + nnz;
    Complex* y = a1 + nnz;
    Complex* tmp = y + dim;
    Complex* k1 = tmp + dim;
    Complex* k2 = k1 + dim;
    Complex* k3 = k2 + dim;
    Complex* k4 = k3 + dim;

    auto generator = [&](std::size_t h, Complex* a) {
        const Complex xi = bundle.xi[h];
        const Complex eta = bundle.eta[h];
        for (std::size_t e = 0; e < nnz; ++e) a[e] = gen.base[e] + xi * gen.sc[e] + eta * gen.sa[e];
        if (!gen.drive.empty()) {
            const double t = grid.half_time(h);
            for (std::size_t d = 0; d < gen.drive.size(); ++d) {
                const double f = model.drive[d].coefficient(t);
                for (std::size_t e = 0; e < nnz; ++e) a[e] += f * gen.drive[d][e];
            }
        }
    };
    auto apply = [&](const Complex* a, const Complex* v, Complex* res) {
        std::fill(res, res + dim, Complex{});
        for (std::size_t e = 0; e < nnz; ++e) res[gen.row[e]] += a[e] * v[gen.col[e]];
    };
    auto pulse = [&](const Matrix& map) {
        Eigen::Map<Vector> yv(y, static_cast<Eigen::Index>(dim));
        const Vector r = map * yv;
        yv = r;
    };

    const std::size_t n_full = grid.n_full();
    out.grid = grid;
    out.dim = dim;
    out.data.resize(n_full * dim);
    out.valid = true;
    out.failed_step = 0;

    for (std::size_t l = 0; l < dim; ++l) y[l] = y0[static_cast<Eigen::Index>(l)];
    while (next_pulse < pulses.size() && pulses[next_pulse].first == 0) {
        pulse(*pulses[next_pulse++].second);
    }
    std::copy(y, y + dim, out.data.begin());

    const double h = grid.dt;
    const double h2 = 0.5 * h;
    const double h6 = h / 6.0;
    generator(0, a0);
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        generator(2 * k + 1, ah);
        generator(2 * k + 2, a1);
        apply(a0, y, k1);
        for (std::size_t l = 0; l < dim; ++l) tmp[l] = y[l] + h2 * k1[l];
        apply(ah, tmp, k2);
        for (std::size_t l = 0; l < dim; ++l) tmp[l] = y[l] + h2 * k2[l];
        apply(ah, tmp, k3);
        for (std::size_t l = 0; l < dim; ++l) tmp[l] = y[l] + h * k3[l];
        apply(a1, tmp, k4);
        bool finite = true;
        for (std::size_t l = 0; l < dim; ++l) {
            y[l] += h6 * (k1[l] + 2.0 * (k2[l] + k3[l]) + k4[l]);
            finite = finite && std::isfinite(y[l].real()) && std::isfinite(y[l].imag());
        }
        while (next_pulse < pulses.size() && pulses[next_pulse].first == k + 1) {
            pulse(*pulses[next_pulse++].second);
        }
        if (!finite) {
            out.valid = false;
            out.failed_step = k + 1;
            return;
        }
        std::copy(y, y + dim, out.data.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim));
        std::swap(a0, a1);
    }
}

}  // namespace

void integrate_trajectory(const OperatorBasisModel& model, const NoiseBundle& bundle,
                          const TimeGrid& grid, const Vector& y0, Trajectory& out) {
    if (bundle.xi.size() != grid.n_half() || bundle.eta.size() != grid.n_half()) {
        throw UsageError("dynamics", "noise bundle does not match the time grid");
    }
    if (y0.size() != static_cast<Eigen::Index>(model.basis_dim)) {
        throw UsageError("dynamics", "initial vector has the wrong length");
    }
    integrate_impl(model, bundle, grid, y0, out);
}

void integrate_trajectory(const OperatorBasisModel& model, const NoiseBundle& bundle,
                          const TimeGrid& grid, Trajectory& out) {
    integrate_trajectory(model, bundle, grid, model.init_vector, out);
}

Trajectory integrate_trajectory(const OperatorBasisModel& model, const NoiseBundle& bundle,
                                const TimeGrid& grid) {
    Trajectory out;
    integrate_trajectory(model, bundle, grid, out);
    return out;
}

}  // namespace scle
