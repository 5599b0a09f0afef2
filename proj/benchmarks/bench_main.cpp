#include <benchmark/benchmark.h>

#include "scle/correlation.hpp"
#include "scle/dynamics.hpp"
#include "scle/ensemble.hpp"
#include "scle/models.hpp"
#include "scle/noise.hpp"
#include "scle/rng.hpp"

namespace {

const scle::TimeGrid& grid() {
    static const scle::TimeGrid g(0.02, 1000);
    return g;
}

const scle::KernelTable& kernels() {
    static const scle::KernelTable k =
        scle::make_kernel_table(scle::SpectralDensity::ohmic_debye(1.0, 0.5), 1.0, grid());
    return k;
}

const scle::NoisePlan& plan(scle::NoiseConstruction c) {
    static const scle::NoisePlan root = scle::build_noise_plan(kernels(), {});
    static const scle::NoisePlan circ = [] {
        scle::NoiseOptions o;
        o.construction = scle::NoiseConstruction::CirculantEmbedding;
        return scle::build_noise_plan(kernels(), o);
    }();
    return c == scle::NoiseConstruction::SpectralRoot ? root : circ;
}

void BM_NormalStream(benchmark::State& state) {
    scle::NormalStream rng(1, 2);
    double acc = 0.0;
    for (auto _ : state) acc += rng.next();
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_NormalStream);

void BM_KernelTable(benchmark::State& state) {
    for (auto _ : state) {
        auto k = scle::make_kernel_table(scle::SpectralDensity::ohmic_debye(1.0, 0.5), 1.0, grid());
        benchmark::DoNotOptimize(k.alpha_T.data());
    }
}
BENCHMARK(BM_KernelTable)->Unit(benchmark::kMillisecond);

void BM_SampleBundle(benchmark::State& state) {
    const auto c = static_cast<scle::NoiseConstruction>(state.range(0));
    const bool with_zeta = state.range(1) != 0;
    scle::NoiseSampler sampler(plan(c));
    scle::NoiseBundle bundle;
    std::uint64_t i = 0;
    for (auto _ : state) {
        sampler.sample(3, i++, bundle, with_zeta);
        benchmark::DoNotOptimize(bundle.xi.data());
    }
}
BENCHMARK(BM_SampleBundle)
    ->Args({0, 1})
    ->Args({0, 0})
    ->Args({1, 1})
    ->Unit(benchmark::kMicrosecond);

void BM_IntegrateTrajectory(benchmark::State& state) {
    const auto model = scle::make_pure_dephasing(1.0);
    const auto bundle = scle::sample_bundle(plan(scle::NoiseConstruction::SpectralRoot), 3, 0);
    scle::Trajectory traj;
    for (auto _ : state) {
        scle::integrate_trajectory(model, bundle, grid(), traj);
        benchmark::DoNotOptimize(traj.data.data());
    }
}
BENCHMARK(BM_IntegrateTrajectory)->Unit(benchmark::kMicrosecond);

void BM_IntegrateDriven(benchmark::State& state) {
    const auto model = scle::make_spin_boson(1.0, {.pump = scle::Pump{0.5, 0.0}});
    const auto bundle = scle::sample_bundle(plan(scle::NoiseConstruction::SpectralRoot), 3, 0);
    scle::Trajectory traj;
    for (auto _ : state) {
        scle::integrate_trajectory(model, bundle, grid(), traj);
        benchmark::DoNotOptimize(traj.data.data());
    }
}
BENCHMARK(BM_IntegrateDriven)->Unit(benchmark::kMicrosecond);

void BM_Ensemble(benchmark::State& state) {
    const auto model = scle::make_pure_dephasing(1.0);
    const std::vector<scle::ObservableRequest> req = {scle::make_request(model, "sx"),
                                                      scle::make_request(model, "coupling_energy")};
    scle::RunOptions opt;
    opt.n_traj = 256;
    opt.workers = 1;
    for (auto _ : state) {
        auto r = scle::run_ensemble(model, plan(scle::NoiseConstruction::SpectralRoot), req, opt);
        benchmark::DoNotOptimize(r.mean.data());
    }
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_Ensemble)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
