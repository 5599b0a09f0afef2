#include "scle/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "scle/error.hpp"

namespace scle {

std::string to_string(ObservableKind kind) {
    switch (kind) {
        case ObservableKind::System: return "system";
        case ObservableKind::CouplingEnergy: return "coupling_energy";
        case ObservableKind::BathDisplacement: return "bath_displacement";
    }
    return "unknown";
}

ObservableRequest make_request(const OperatorBasisModel& model, const std::string& name) {
    if (name == "coupling_energy") {
        return {name, ObservableKind::CouplingEnergy, model.coupling_coeffs};
    }
    if (name == "bath_displacement") {
        return {name, ObservableKind::BathDisplacement, model.identity_coeffs};
    }
    return {name, ObservableKind::System, model.observable(name).coeffs};
}

// ---------------------------------------------------------------------------

EnsembleAccumulator::EnsembleAccumulator(std::size_t n_observables, std::size_t n_points,
                                         std::uint64_t master_seed)
    : n_obs_(n_observables),
      n_points_(n_points),
      seed_(master_seed),
      mean_(n_observables * n_points),
      m2_re_(n_observables * n_points, 0.0),
      m2_im_(n_observables * n_points, 0.0) {}

void EnsembleAccumulator::add(const Complex* values) {
    ++count_;
    const double inv_n = 1.0 / static_cast<double>(count_);
    const std::size_t size = mean_.size();
    for (std::size_t j = 0; j < size; ++j) {
        const Complex x = values[j];
        const Complex d = x - mean_[j];
        mean_[j] += d * inv_n;
        m2_re_[j] += d.real() * (x.real() - mean_[j].real());
        m2_im_[j] += d.imag() * (x.imag() - mean_[j].imag());
    }
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
    if (other.n_obs_ == 0 && other.n_points_ == 0 && other.count_ == 0 && other.rejected_ == 0) return;
    if (n_obs_ == 0 && n_points_ == 0 && count_ == 0 && rejected_ == 0) {
        const auto seed = seed_;
        *this = other;
        seed_ = seed == 0 ? other.seed_ : seed;
        return;
    }
    if (other.n_obs_ != n_obs_ || other.n_points_ != n_points_) {
        throw UsageError("ensemble", "cannot merge accumulators of different shapes");
    }
    rejected_ += other.rejected_;
    if (other.count_ == 0) return;
    if (count_ == 0) {
        mean_ = other.mean_;
        m2_re_ = other.m2_re_;
        m2_im_ = other.m2_im_;
        count_ = other.count_;
        return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    const double w = na * nb / n;
    for (std::size_t j = 0; j < mean_.size(); ++j) {
        const Complex d = other.mean_[j] - mean_[j];
        mean_[j] += d * (nb / n);
        m2_re_[j] += other.m2_re_[j] + d.real() * d.real() * w;
        m2_im_[j] += other.m2_im_[j] + d.imag() * d.imag() * w;
    }
    count_ += other.count_;
}

void EnsembleAccumulator::restore(std::uint64_t count, std::uint64_t rejected,
                                  std::vector<Complex> mean, std::vector<double> m2_re,
                                  std::vector<double> m2_im) {
    const std::size_t size = n_obs_ * n_points_;
    if (mean.size() != size || m2_re.size() != size || m2_im.size() != size) {
        throw UsageError("ensemble", "accumulator restore with mismatched shape");
    }
    count_ = count;
    rejected_ = rejected;
    mean_ = std::move(mean);
    m2_re_ = std::move(m2_re);
    m2_im_ = std::move(m2_im);
}

EnsembleAccumulator merge_accumulators(const EnsembleAccumulator& a, const EnsembleAccumulator& b) {
    EnsembleAccumulator out = a;
    out.merge(b);
    return out;
}

// ---------------------------------------------------------------------------

std::size_t EnsembleResult::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw UsageError("ensemble", "result has no observable '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

EnsembleResult make_result(const EnsembleAccumulator& acc, const TimeGrid& grid,
                           const std::vector<ObservableRequest>& requests) {
    if (acc.n_observables() != requests.size() || acc.n_points() != grid.n_full()) {
        throw UsageError("ensemble", "accumulator shape does not match the requests and grid");
    }
    EnsembleResult r;
    r.grid = grid;
    r.master_seed = acc.master_seed();
    r.trajectories = acc.count();
    r.rejected = acc.rejected();
    const std::size_t np = acc.n_points();
    const double n = static_cast<double>(acc.count());
    const double denom = acc.count() > 1 ? (n - 1.0) * n : 0.0;
    for (std::size_t o = 0; o < requests.size(); ++o) {
        r.names.push_back(requests[o].name);
        r.kinds.push_back(requests[o].kind);
        ComplexSeries mean(np);
        RealSeries se_re(np, 0.0), se_im(np, 0.0), se(np, 0.0);
        for (std::size_t k = 0; k < np; ++k) {
            const std::size_t j = o * np + k;
            mean[k] = acc.mean()[j];
            if (denom > 0.0) {
                se_re[k] = std::sqrt(acc.m2_re()[j] / denom);
                se_im[k] = std::sqrt(acc.m2_im()[j] / denom);
                se[k] = std::sqrt((acc.m2_re()[j] + acc.m2_im()[j]) / denom);
            }
        }
        r.mean.push_back(std::move(mean));
        r.stderr_re.push_back(std::move(se_re));
        r.stderr_im.push_back(std::move(se_im));
        r.stderr.push_back(std::move(se));
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

struct Worker {
    NoiseSampler sampler;
    NoiseBundle bundle;
    Trajectory traj;
    std::vector<Complex> values;

    Worker(const NoisePlan& plan, std::size_t n_values) : sampler(plan), values(n_values) {}
};

bool values_finite(const std::vector<Complex>& v) {
    return std::all_of(v.begin(), v.end(), [](Complex z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

void run_block(const OperatorBasisModel& model, const NoisePlan& plan,
               const std::vector<ObservableRequest>& requests, bool with_zeta,
               std::uint64_t master_seed, std::uint64_t first, std::uint64_t last, Worker& w,
               EnsembleAccumulator& acc) {
    const TimeGrid& grid = plan.grid;
    const std::size_t np = grid.n_full();
    const std::size_t dim = model.basis_dim;
    for (std::uint64_t i = first; i < last; ++i) {
        w.sampler.sample(master_seed, i, w.bundle, with_zeta);
        integrate_trajectory(model, w.bundle, grid, w.traj);
        if (!w.traj.valid) {
            acc.add_rejected();
            continue;
        }
        for (std::size_t o = 0; o < requests.size(); ++o) {
            const Vector& b = requests[o].coeffs;
            const bool bath = requests[o].kind != ObservableKind::System;
            Complex* out = w.values.data() + o * np;
            for (std::size_t k = 0; k < np; ++k) {
                const Complex* y = w.traj.data.data() + k * dim;
                Complex v{};
                for (std::size_t l = 0; l < dim; ++l) v += b[static_cast<Eigen::Index>(l)] * y[l];
                if (bath) v *= w.bundle.zeta[2 * k];
                out[k] = v;
            }
        }
        if (!values_finite(w.values)) {
            acc.add_rejected();
            continue;
        }
        acc.add(w.values.data());
    }
}

}  // namespace

EnsembleResult run_ensemble(const OperatorBasisModel& model, const NoisePlan& plan,
                            const std::vector<ObservableRequest>& requests,
                            const RunOptions& options) {
    model.validate();
    if (options.n_traj < 1) throw UsageError("ensemble", "n_traj must be >= 1");
    if (options.block_size < 1) throw UsageError("ensemble", "block_size must be >= 1");
    if (requests.empty()) throw UsageError("ensemble", "no observables requested");
    for (const auto& r : requests) {
        if (r.coeffs.size() != static_cast<Eigen::Index>(model.basis_dim)) {
            throw UsageError("ensemble", "observable '" + r.name + "' has the wrong length");
        }
    }
    const bool with_zeta = std::any_of(requests.begin(), requests.end(), [](const auto& r) {
        return r.kind != ObservableKind::System;
    });
    const TimeGrid& grid = plan.grid;
    const std::size_t np = grid.n_full();
    const std::uint64_t B = options.block_size;

    EnsembleAccumulator global(requests.size(), np, options.master_seed);
    std::uint64_t next = 0;
    if (options.resume && !options.checkpoint_path.empty() &&
        std::filesystem::exists(options.checkpoint_path)) {
        Checkpoint ck = read_checkpoint(options.checkpoint_path);
        if (ck.config_fingerprint != options.config_fingerprint) {
            throw RunError("ensemble", "checkpoint " + options.checkpoint_path.string() +
                                           " was written for a different configuration");
        }
        if (ck.block_size != B || ck.accumulator.master_seed() != options.master_seed ||
            ck.accumulator.n_observables() != requests.size() || ck.accumulator.n_points() != np) {
            throw RunError("ensemble", "checkpoint " + options.checkpoint_path.string() +
                                           " does not match the run (seed, block size or shape)");
        }
        if (ck.next_index > options.n_traj || (ck.next_index % B != 0 && ck.next_index != options.n_traj)) {
            throw RunError("ensemble", "checkpoint trajectory index is inconsistent with the run");
        }
        global = std::move(ck.accumulator);
        next = ck.next_index;
    }

    auto checkpoint = [&] {
        if (options.checkpoint_path.empty()) return;
        write_checkpoint(options.checkpoint_path,
                         Checkpoint{options.config_fingerprint, B, next, global});
    };

    std::size_t workers = options.workers;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    const std::uint64_t total_blocks = (options.n_traj + B - 1) / B;
    std::uint64_t block = next / B;
    const std::size_t wave = workers * 2;

    std::vector<Worker> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(plan, requests.size() * np);

    std::uint64_t since_checkpoint = 0;
    bool stopped = false;
    while (block < total_blocks && !stopped) {
        const std::uint64_t wave_end = std::min<std::uint64_t>(total_blocks, block + wave);
        const std::size_t n_blocks = static_cast<std::size_t>(wave_end - block);
        std::vector<EnsembleAccumulator> accs(n_blocks,
                                              EnsembleAccumulator(requests.size(), np, options.master_seed));
        auto work = [&](std::size_t tid) {
            for (std::size_t j = tid; j < n_blocks; j += workers) {
                const std::uint64_t b = block + j;
                run_block(model, plan, requests, with_zeta, options.master_seed, b * B,
                          std::min(options.n_traj, (b + 1) * B), pool[tid], accs[j]);
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::exception_ptr> errors(workers);
            {
                std::vector<std::jthread> threads;
                for (std::size_t t = 0; t < workers; ++t) {
                    threads.emplace_back([&, t] {
                        try {
                            work(t);
                        } catch (...) {
                            errors[t] = std::current_exception();
                        }
                    });
                }
            }
            for (auto& e : errors) {
                if (e) std::rethrow_exception(e);
            }
        }
        for (std::size_t j = 0; j < n_blocks; ++j) {
            global.merge(accs[j]);
            ++block;
            const std::uint64_t new_next = std::min(options.n_traj, block * B);
            since_checkpoint += new_next - next;
            next = new_next;
            if (options.checkpoint_every > 0 && since_checkpoint >= options.checkpoint_every) {
                checkpoint();
                since_checkpoint = 0;
            }
            if (options.stop_after && next >= *options.stop_after && next < options.n_traj) {
                checkpoint();
                stopped = true;
                break;
            }
        }
    }

    EnsembleResult result = make_result(global, grid, requests);
    result.model_name = model.name;
    result.complete = !stopped;
    if (stopped) return result;
    if (options.checkpoint_every > 0) checkpoint();

    const double limit = options.max_rejected_fraction * static_cast<double>(options.n_traj);
    if (static_cast<double>(global.rejected()) > limit) {
        std::ostringstream os;
        os << global.rejected() << " of " << options.n_traj
           << " trajectories were rejected as non-finite (limit "
           << options.max_rejected_fraction * 100.0 << "%)";
        throw RunError("ensemble", os.str());
    }
    if (global.count() == 0) throw RunError("ensemble", "no valid trajectories");
    return result;
}

// ---------------------------------------------------------------------------

RealSeries accumulated_error(const RealSeries& oracle, const RealSeries& stochastic,
                             const TimeGrid& grid) {
    if (oracle.size() != grid.n_full() || stochastic.size() != grid.n_full()) {
        throw UsageError("ensemble", "accumulated_error: series do not match the grid");
    }
    RealSeries e(grid.n_full(), 0.0);
    double prev = oracle[0] - stochastic[0];
    prev *= prev;
    for (std::size_t k = 1; k < e.size(); ++k) {
        double d = oracle[k] - stochastic[k];
        d *= d;
        e[k] = e[k - 1] + 0.5 * grid.dt * (prev + d);
        prev = d;
    }
    return e;
}

RealSeries accumulated_error(const ComplexSeries& oracle, const ComplexSeries& stochastic,
                             const TimeGrid& grid) {
    RealSeries a(oracle.size()), b(stochastic.size());
    std::transform(oracle.begin(), oracle.end(), a.begin(), [](Complex z) { return z.real(); });
    std::transform(stochastic.begin(), stochastic.end(), b.begin(), [](Complex z) { return z.real(); });
    return accumulated_error(a, b, grid);
}

}  // namespace scle
