#include "scle/commands.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "scle/error.hpp"

namespace scle {

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cli", "cannot write " + path);
    return out;
}

nlohmann::json diagnostics_json(const NoisePlan& plan, const KernelTable& k) {
    const auto& d = plan.diagnostics;
    return {{"pad_length", plan.pad_length},
            {"min_spectrum_ratio", d.min_spectrum_ratio},
            {"clipped_bins", d.clipped_bins},
            {"residual_weight", d.residual_weight},
            {"discarded_weight", d.discarded_weight},
            {"chi_kernel_mismatch", d.chi_kernel_mismatch},
            {"quadrature_panels", k.panels},
            {"quadrature_convergence_delta", k.convergence_delta}};
}

}  // namespace

void write_results_csv(std::ostream& out, const EnsembleResult& r) {
    out << "t";
    for (const auto& name : r.names) out << ",Re_" << name << ",Im_" << name << ",stderr_" << name;
    out << '\n';
    for (std::size_t k = 0; k < r.grid.n_full(); ++k) {
        out << fmt(r.grid.full_time(k));
        for (std::size_t o = 0; o < r.names.size(); ++o) {
            out << ',' << fmt(r.mean[o][k].real()) << ',' << fmt(r.mean[o][k].imag()) << ','
                << fmt(r.stderr[o][k]);
        }
        out << '\n';
    }
}

std::string results_csv(const EnsembleResult& result) {
    std::ostringstream os;
    write_results_csv(os, result);
    return os.str();
}

int cmd_run(RunConfig cfg, const RunOverrides& ov, std::ostream& log) {
    if (ov.seed) cfg.master_seed = *ov.seed;
    const OperatorBasisModel model = build_model(cfg);
    std::vector<ObservableRequest> requests;
    for (const auto& name : cfg.observables) requests.push_back(make_request(model, name));
    const KernelTable kernels = build_kernels(cfg);
    const NoisePlan plan = build_noise_plan(kernels, cfg.noise);

    RunOptions opt;
    opt.n_traj = cfg.trajectories;
    opt.master_seed = cfg.master_seed;
    opt.workers = ov.workers.value_or(0);
    opt.block_size = cfg.block_size;
    opt.checkpoint_every = cfg.checkpoint_every;
    opt.resume = ov.resume;
    opt.stop_after = ov.stop_after;
    opt.config_fingerprint = config_fingerprint(cfg);
    if (cfg.checkpoint_every > 0 || ov.stop_after || ov.resume) {
        opt.checkpoint_path = cfg.output_path + ".ckpt";
    }

    const EnsembleResult result = run_ensemble(model, plan, requests, opt);
    if (!result.complete) {
        log << "stopped after " << result.trajectories + result.rejected << " trajectories; checkpoint "
            << opt.checkpoint_path.string() << '\n';
        return kExitOk;
    }

    {
        auto out = open_out(cfg.output_path + ".csv");
        write_results_csv(out, result);
    }
    nlohmann::json meta;
    meta["config"] = nlohmann::json::parse(resolved_config_json(cfg));
    meta["result"] = {{"model", result.model_name},
                      {"master_seed", result.master_seed},
                      {"trajectories", cfg.trajectories},
                      {"accepted", result.trajectories},
                      {"rejected", result.rejected},
                      {"observables", cfg.observables},
                      {"csv", cfg.output_path + ".csv"}};
    meta["kernels"] = {{"beta", std::isinf(cfg.beta) ? nlohmann::json("inf") : nlohmann::json(cfg.beta)}};
    meta["noise"] = diagnostics_json(plan, kernels);
    meta["config_fingerprint"] = opt.config_fingerprint;
    {
        auto out = open_out(cfg.output_path + ".json");
        out << meta.dump(2) << '\n';
    }
    log << "wrote " << cfg.output_path << ".csv (" << result.trajectories << " trajectories, "
        << result.rejected << " rejected)\n";
    return kExitOk;
}

int cmd_correlations(const RunConfig& cfg, std::ostream& log) {
    const KernelTable k = build_kernels(cfg);
    {
        auto out = open_out(cfg.output_path + "_correlations.csv");
        out << "t,Re_alpha,Im_alpha,Re_alphaT,Im_alphaT,Re_alphaTilde,Im_alphaTilde\n";
        for (std::size_t j = 0; j < k.size(); ++j) {
            out << fmt(k.grid.half_lag(j)) << ',' << fmt(k.alpha[j].real()) << ','
                << fmt(k.alpha[j].imag()) << ',' << fmt(k.alpha_T[j].real()) << ','
                << fmt(k.alpha_T[j].imag()) << ',' << fmt(k.alpha_tilde[j].real()) << ','
                << fmt(k.alpha_tilde[j].imag()) << '\n';
        }
    }
    log << "wrote " << cfg.output_path << "_correlations.csv (" << k.size() << " lags, "
        << k.panels << " panels)\n";
    log << "omega_max sensitivity of Re alpha_T(0):\n";
    log << "  omega_max/cutoff  omega_max  Re_alphaT(0)\n";
    const std::vector<double> multiples = {10, 20, 50, 100, 200};
    for (const auto& row : omega_max_convergence(cfg.spec, cfg.beta, multiples)) {
        char line[128];
        std::snprintf(line, sizeof line, "  %16.0f  %9.4g  %.10g\n", row.omega_max / cfg.spec.cutoff,
                      row.omega_max, row.re_alpha_T0);
        log << line;
    }
    return kExitOk;
}

int cmd_noise_check(const RunConfig& cfg, std::uint64_t samples, std::size_t probes,
                    std::ostream& log, double z_threshold) {
    if (samples < CorrelationEstimator::kMinSamples) {
        throw UsageError("cli", "noise-check needs --samples >= " +
                                    std::to_string(CorrelationEstimator::kMinSamples));
    }
    const KernelTable kernels = build_kernels(cfg);
    const NoisePlan plan = build_noise_plan(kernels, cfg.noise);
    const std::vector<NoisePair> pairs(kAllNoisePairs.begin(), kAllNoisePairs.end());
    auto est = CorrelationEstimator::on_uniform_probe(cfg.grid, probes, pairs);
    NoiseSampler sampler(plan);
    NoiseBundle bundle;
    for (std::uint64_t i = 0; i < samples; ++i) {
        sampler.sample(cfg.master_seed, i, bundle);
        est.add(bundle);
    }

    auto out = open_out(cfg.output_path + "_noise_check.csv");
    out << "kernel,t,s,tau,target_re,target_im,estimate_re,estimate_im,stderr_re,stderr_im,z\n";
    bool all_pass = true;
    for (NoisePair p : pairs) {
        double worst = 0.0;
        std::size_t failures = 0;
        for (const auto& row : est.result(p)) {
            const Complex target = noise_target(kernels, p, row.t_index, row.s_index);
            const double z = correlation_z_score(row, target);
            worst = std::max(worst, z);
            if (!(z <= z_threshold)) ++failures;
            const double t = cfg.grid.half_lag(row.t_index);
            const double s = cfg.grid.half_lag(row.s_index);
            out << to_string(p) << ',' << fmt(t) << ',' << fmt(s) << ',' << fmt(t - s) << ','
                << fmt(target.real()) << ',' << fmt(target.imag()) << ',' << fmt(row.estimate.real())
                << ',' << fmt(row.estimate.imag()) << ',' << fmt(row.stderr_re) << ','
                << fmt(row.stderr_im) << ',' << fmt(z) << '\n';
        }
        const bool pass = failures == 0;
        all_pass = all_pass && pass;
        char line[160];
        std::snprintf(line, sizeof line, "%-9s %s  max z = %.3f  points above %.1f sigma: %zu\n",
                      to_string(p).c_str(), pass ? "PASS" : "FAIL", worst, z_threshold, failures);
        log << line;
    }
    log << (all_pass ? "noise-check passed" : "noise-check FAILED") << " (" << samples
        << " samples, " << est.t_indices().size() << "x" << est.s_indices().size() << " probes)\n";
    return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace scle
