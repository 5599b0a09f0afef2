#include "scle/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "scle/ensemble.hpp"
#include "scle/error.hpp"

namespace scle {

using nlohmann::json;

namespace {

std::string child(const std::string& ptr, const std::string& key) {
    std::string escaped;
    for (char c : key) {
        if (c == '~') escaped += "~0";
        else if (c == '/') escaped += "~1";
        else escaped += c;
    }
    return ptr + "/" + escaped;
}

std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

void require_object(const json& j, const std::string& ptr) {
    if (!j.is_object()) throw ParseError(ptr.empty() ? "/" : ptr, "expected an object");
}

void check_keys(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed) {
    require_object(j, ptr);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.count(key)) throw ParseError(child(ptr, key), "unknown key");
    }
}

const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& require(const json& j, const std::string& ptr, const char* key) {
    const json* v = find(j, key);
    if (!v) throw ParseError(child(ptr, key), "required key is missing");
    return *v;
}

double as_number(const json& v, const std::string& ptr) {
    if (!v.is_number()) throw ParseError(ptr, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(ptr, "expected a finite number");
    return x;
}

std::uint64_t as_count(const json& v, const std::string& ptr) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ParseError(ptr, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& ptr) {
    if (!v.is_string()) throw ParseError(ptr, "expected a string");
    return v.get<std::string>();
}

double number_or(const json& j, const std::string& ptr, const char* key, double fallback) {
    const json* v = find(j, key);
    return v ? as_number(*v, child(ptr, key)) : fallback;
}

Complex as_complex(const json& v, const std::string& ptr) {
    if (v.is_number()) return {as_number(v, ptr), 0.0};
    if (v.is_array() && v.size() == 2) {
        return {as_number(v[0], child(ptr, 0)), as_number(v[1], child(ptr, 1))};
    }
    throw ParseError(ptr, "expected a number or a [re, im] pair");
}

Matrix as_matrix(const json& v, const std::string& ptr) {
    if (!v.is_array() || v.empty()) throw ParseError(ptr, "expected a non-empty array of rows");
    const std::size_t rows = v.size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = v[r];
        const std::string rp = child(ptr, r);
        if (!row.is_array() || row.size() != rows) {
            throw ParseError(rp, "expected a row of " + std::to_string(rows) + " entries");
        }
        for (std::size_t c = 0; c < rows; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = as_complex(row[c], child(rp, c));
        }
    }
    return m;
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

template <typename F>
auto wrap_enum(const std::string& ptr, F&& f) {
    try {
        return f();
    } catch (const UsageError& e) {
        throw ParseError(ptr, e.what());
    }
}

void parse_model(const json& j, const std::string& ptr, RunConfig& cfg) {
    require_object(j, ptr);
    ModelConfig& m = cfg.model;
    m.name = as_string(require(j, ptr, "name"), child(ptr, "name"));
    auto parse_initial = [&] {
        if (const json* v = find(j, "initial_state")) {
            const std::string p = child(ptr, "initial_state");
            m.initial = wrap_enum(p, [&] { return initial_state_from_string(as_string(*v, p)); });
        }
        if (const json* v = find(j, "rho0")) m.rho0 = as_matrix(*v, child(ptr, "rho0"));
        if (m.initial == InitialState::Custom && !m.rho0) {
            throw ValidationError("cli", "initial_state 'custom' needs rho0");
        }
        if (m.rho0 && m.initial && *m.initial != InitialState::Custom) {
            throw ValidationError("cli", "rho0 is only allowed with initial_state 'custom'");
        }
        if (m.rho0) m.initial = InitialState::Custom;
    };

    if (m.name == "pure_dephasing") {
        check_keys(j, ptr, {"name", "omega0", "initial_state", "rho0", "pulse_period"});
        m.omega0 = number_or(j, ptr, "omega0", 1.0);
        if (const json* v = find(j, "pulse_period")) {
            m.pulse_period = as_number(*v, child(ptr, "pulse_period"));
        }
        parse_initial();
    } else if (m.name == "spin_boson") {
        check_keys(j, ptr, {"name", "omega0", "initial_state", "rho0", "pump"});
        m.omega0 = number_or(j, ptr, "omega0", 1.0);
        if (const json* v = find(j, "pump")) {
            const std::string p = child(ptr, "pump");
            check_keys(*v, p, {"rabi", "detuning"});
            m.pump = Pump{number_or(*v, p, "rabi", 0.5), number_or(*v, p, "detuning", 0.0)};
        }
        parse_initial();
    } else if (m.name == "quantum_dot") {
        check_keys(j, ptr, {"name", "delta", "rabi", "initial_state", "rho0"});
        m.delta = number_or(j, ptr, "delta", 0.0);
        const std::string p = child(ptr, "rabi");
        const json& r = require(j, ptr, "rabi");
        require_object(r, p);
        const std::string kind = as_string(require(r, p, "kind"), child(p, "kind"));
        if (kind == "constant") {
            check_keys(r, p, {"kind", "omega"});
            m.rabi = {RabiSpec::Kind::Constant, as_number(require(r, p, "omega"), child(p, "omega")), 0.0};
        } else if (kind == "gaussian") {
            check_keys(r, p, {"kind", "peak", "tau"});
            m.rabi = {RabiSpec::Kind::Gaussian, as_number(require(r, p, "peak"), child(p, "peak")),
                      as_number(require(r, p, "tau"), child(p, "tau"))};
        } else {
            throw ParseError(child(p, "kind"), "expected 'constant' or 'gaussian'");
        }
        parse_initial();
    } else if (m.name == "custom") {
        check_keys(j, ptr, {"name", "hamiltonian", "coupling", "basis", "rho0", "observables"});
        m.hamiltonian = as_matrix(require(j, ptr, "hamiltonian"), child(ptr, "hamiltonian"));
        m.coupling = as_matrix(require(j, ptr, "coupling"), child(ptr, "coupling"));
        m.rho0 = as_matrix(require(j, ptr, "rho0"), child(ptr, "rho0"));
        m.initial = InitialState::Custom;
        const std::string bp = child(ptr, "basis");
        const json& b = require(j, ptr, "basis");
        if (!b.is_array() || b.empty()) throw ParseError(bp, "expected a non-empty array of matrices");
        for (std::size_t i = 0; i < b.size(); ++i) m.basis.push_back(as_matrix(b[i], child(bp, i)));
        const std::string op = child(ptr, "observables");
        const json& o = require(j, ptr, "observables");
        require_object(o, op);
        for (const auto& [name, mat] : o.items()) {
            m.custom_observables.emplace_back(name, as_matrix(mat, child(op, name)));
        }
    } else {
        throw ParseError(child(ptr, "name"),
                         "unknown model '" + m.name +
                             "' (expected pure_dephasing, spin_boson, quantum_dot or custom)");
    }
}

void parse_bath(const json& j, const std::string& ptr, RunConfig& cfg) {
    check_keys(j, ptr, {"kind", "coupling", "cutoff", "omega_max", "min_omega_max_ratio", "beta",
                        "temperature_kelvin"});
    const std::string kp = child(ptr, "kind");
    const auto kind = wrap_enum(kp, [&] { return spectral_kind_from_string(as_string(require(j, ptr, "kind"), kp)); });
    const double coupling = as_number(require(j, ptr, "coupling"), child(ptr, "coupling"));
    const double cutoff = as_number(require(j, ptr, "cutoff"), child(ptr, "cutoff"));
    cfg.spec = SpectralDensity{kind, coupling, cutoff,
                               number_or(j, ptr, "omega_max",
                                         SpectralDensity::kDefaultOmegaMaxRatio * cutoff)};
    cfg.min_omega_max_ratio =
        number_or(j, ptr, "min_omega_max_ratio", SpectralDensity::kMinOmegaMaxRatio);
    if (const json* v = find(j, "beta")) {
        const std::string p = child(ptr, "beta");
        if (v->is_string() && v->get<std::string>() == "inf") {
            cfg.beta_input = kInfiniteBeta;
        } else {
            cfg.beta_input = as_number(*v, p);
        }
    }
    if (const json* v = find(j, "temperature_kelvin")) {
        cfg.temperature_kelvin = as_number(*v, child(ptr, "temperature_kelvin"));
    }
}

void parse_grid(const json& j, const std::string& ptr, RunConfig& cfg,
                std::optional<double>& t_start) {
    check_keys(j, ptr, {"dt", "t_end", "t_start"});
    cfg.grid.dt = as_number(require(j, ptr, "dt"), child(ptr, "dt"));
    cfg.t_end = as_number(require(j, ptr, "t_end"), child(ptr, "t_end"));
    if (const json* v = find(j, "t_start")) t_start = as_number(*v, child(ptr, "t_start"));
}

void parse_noise(const json& j, const std::string& ptr, RunConfig& cfg) {
    check_keys(j, ptr, {"construction", "eta_scale", "residual_scale", "pad_factor"});
    NoiseOptions& n = cfg.noise;
    if (const json* v = find(j, "construction")) {
        const std::string p = child(ptr, "construction");
        n.construction = wrap_enum(p, [&] { return noise_construction_from_string(as_string(*v, p)); });
    }
    n.eta_scale = number_or(j, ptr, "eta_scale", n.eta_scale);
    n.residual_scale = number_or(j, ptr, "residual_scale", n.residual_scale);
    if (const json* v = find(j, "pad_factor")) n.pad_factor = as_count(*v, child(ptr, "pad_factor"));
}

}  // namespace

std::vector<std::string> default_observables(const ModelConfig& model) {
    if (model.name == "pure_dephasing") return {"sx", "sy"};
    if (model.name == "spin_boson") return {"sz", "coupling_energy"};
    if (model.name == "quantum_dot") return {"pop", "bath_displacement"};
    std::vector<std::string> names;
    for (const auto& [name, m] : model.custom_observables) names.push_back(name);
    return names;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("invalid JSON: ") + e.what());
    }
    check_keys(j, "", {"model", "bath", "units", "grid", "trajectories", "master_seed", "observables",
                       "output_path", "checkpoint_every", "block_size", "noise"});
    RunConfig cfg;
    parse_model(require(j, "", "model"), "/model", cfg);
    parse_bath(require(j, "", "bath"), "/bath", cfg);
    std::optional<double> t_start;
    parse_grid(require(j, "", "grid"), "/grid", cfg, t_start);

    cfg.units = cfg.model.name == "quantum_dot" ? Units::InversePicoseconds : Units::NormalizedOmega0;
    if (const json* v = find(j, "units")) {
        cfg.units = wrap_enum("/units", [&] { return units_from_string(as_string(*v, "/units")); });
    }
    if (const json* v = find(j, "trajectories")) cfg.trajectories = as_count(*v, "/trajectories");
    if (const json* v = find(j, "master_seed")) cfg.master_seed = as_count(*v, "/master_seed");
    if (const json* v = find(j, "output_path")) cfg.output_path = as_string(*v, "/output_path");
    if (const json* v = find(j, "checkpoint_every")) cfg.checkpoint_every = as_count(*v, "/checkpoint_every");
    if (const json* v = find(j, "block_size")) cfg.block_size = as_count(*v, "/block_size");
    if (const json* v = find(j, "noise")) parse_noise(*v, "/noise", cfg);
    if (const json* v = find(j, "observables")) {
        if (!v->is_array()) throw ParseError("/observables", "expected an array of names");
        for (std::size_t i = 0; i < v->size(); ++i) {
            cfg.observables.push_back(as_string((*v)[i], child("/observables", i)));
        }
    } else {
        cfg.observables = default_observables(cfg.model);
    }

    // Semantic checks.
    if (cfg.beta_input.has_value() == cfg.temperature_kelvin.has_value()) {
        throw ValidationError("cli", "bath needs exactly one of beta and temperature_kelvin");
    }
    if (cfg.temperature_kelvin) {
        if (cfg.units != Units::InversePicoseconds) {
            throw ValidationError("cli", "temperature_kelvin requires units 'inverse_ps'");
        }
        cfg.beta = kelvin_to_beta(*cfg.temperature_kelvin, cfg.units);
    } else {
        cfg.beta = *cfg.beta_input;
        if (!(cfg.beta > 0.0)) throw ValidationError("cli", "beta must be > 0");
    }
    cfg.spec.validate(cfg.min_omega_max_ratio);

    if (!t_start) {
        t_start = 0.0;
        if (cfg.model.name == "quantum_dot" && cfg.model.rabi.kind == RabiSpec::Kind::Gaussian) {
            t_start = -3.0 * cfg.model.rabi.tau;
        }
    }
    const double span = cfg.t_end - *t_start;
    if (!(cfg.grid.dt > 0.0)) throw ValidationError("cli", "grid.dt must be > 0");
    if (!(span > 0.0)) throw ValidationError("cli", "grid.t_end must exceed grid.t_start");
    const double steps = std::round(span / cfg.grid.dt);
    if (steps < 1.0 || std::abs(steps * cfg.grid.dt - span) > 1e-9 * std::max(1.0, std::abs(span))) {
        std::ostringstream os;
        os << "grid span " << span << " is not a whole number of steps of dt = " << cfg.grid.dt;
        throw ValidationError("cli", os.str());
    }
    cfg.grid = TimeGrid(cfg.grid.dt, static_cast<std::size_t>(steps), *t_start);
    if (cfg.trajectories < 1) throw ValidationError("cli", "trajectories must be >= 1");
    if (cfg.block_size < 1) throw ValidationError("cli", "block_size must be >= 1");
    if (cfg.observables.empty()) throw ValidationError("cli", "no observables requested");
    if (cfg.model.pulse_period && !(*cfg.model.pulse_period > 0.0)) {
        throw ValidationError("cli", "pulse_period must be > 0");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cli", "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

json resolved_json(const RunConfig& cfg) {
    const ModelConfig& m = cfg.model;
    json model = {{"name", m.name}};
    if (m.name == "pure_dephasing" || m.name == "spin_boson") model["omega0"] = m.omega0;
    if (m.name == "pure_dephasing" && m.pulse_period) model["pulse_period"] = *m.pulse_period;
    if (m.name == "spin_boson" && m.pump) {
        model["pump"] = {{"rabi", m.pump->rabi}, {"detuning", m.pump->detuning}};
    }
    if (m.name == "quantum_dot") {
        model["delta"] = m.delta;
        if (m.rabi.kind == RabiSpec::Kind::Constant) {
            model["rabi"] = {{"kind", "constant"}, {"omega", m.rabi.rabi}};
        } else {
            model["rabi"] = {{"kind", "gaussian"}, {"peak", m.rabi.rabi}, {"tau", m.rabi.tau}};
        }
    }
    if (m.name == "custom") {
        model["hamiltonian"] = matrix_json(m.hamiltonian);
        model["coupling"] = matrix_json(m.coupling);
        json basis = json::array();
        for (const auto& b : m.basis) basis.push_back(matrix_json(b));
        model["basis"] = basis;
        json obs = json::object();
        for (const auto& [name, mat] : m.custom_observables) obs[name] = matrix_json(mat);
        model["observables"] = obs;
    } else {
        InitialState init = InitialState::PlusX;
        if (m.initial) init = *m.initial;
        else if (m.name == "spin_boson") init = m.pump ? InitialState::Ground : InitialState::Excited;
        else if (m.name == "quantum_dot") init = InitialState::Ground;
        model["initial_state"] = to_string(init);
    }
    if (m.rho0) model["rho0"] = matrix_json(*m.rho0);

    json bath = {{"kind", to_string(cfg.spec.kind)},
                 {"coupling", cfg.spec.coupling},
                 {"cutoff", cfg.spec.cutoff},
                 {"omega_max", cfg.spec.omega_max},
                 {"min_omega_max_ratio", cfg.min_omega_max_ratio}};
    if (cfg.temperature_kelvin) bath["temperature_kelvin"] = *cfg.temperature_kelvin;
    else if (std::isinf(cfg.beta)) bath["beta"] = "inf";
    else bath["beta"] = cfg.beta;

    json out = {
        {"model", model},
        {"bath", bath},
        {"units", to_string(cfg.units)},
        {"grid",
         {{"dt", cfg.grid.dt}, {"t_start", cfg.grid.t_start}, {"t_end", cfg.t_end}}},
        {"trajectories", cfg.trajectories},
        {"master_seed", cfg.master_seed},
        {"observables", cfg.observables},
        {"output_path", cfg.output_path},
        {"checkpoint_every", cfg.checkpoint_every},
        {"block_size", cfg.block_size},
        {"noise",
         {{"construction", to_string(cfg.noise.construction)},
          {"eta_scale", cfg.noise.eta_scale},
          {"residual_scale", cfg.noise.residual_scale},
          {"pad_factor", cfg.noise.pad_factor}}},
    };
    return out;
}

}  // namespace

std::string resolved_config_json(const RunConfig& cfg, int indent) {
    return resolved_json(cfg).dump(indent);
}

std::uint64_t config_fingerprint(const RunConfig& cfg) {
    json j = resolved_json(cfg);
    j.erase("output_path");
    j.erase("checkpoint_every");
    const std::string s = j.dump();
    return fnv1a(s.data(), s.size());
}

OperatorBasisModel build_model(const RunConfig& cfg) {
    const ModelConfig& m = cfg.model;
    OperatorBasisModel model;
    if (m.name == "pure_dephasing") {
        PureDephasingOptions o;
        if (m.initial) o.initial = *m.initial;
        o.rho0 = m.rho0;
        if (m.pulse_period) o.pulses = PulseTrain{*m.pulse_period, cfg.grid.t_end()};
        model = make_pure_dephasing(m.omega0, o);
    } else if (m.name == "spin_boson") {
        SpinBosonOptions o;
        o.pump = m.pump;
        o.initial = m.initial;
        o.rho0 = m.rho0;
        model = make_spin_boson(m.omega0, o);
    } else if (m.name == "quantum_dot") {
        QuantumDotOptions o;
        if (m.initial) o.initial = *m.initial;
        o.rho0 = m.rho0;
        model = make_quantum_dot(m.delta, m.rabi, o);
    } else if (m.name == "custom") {
        const auto sc = structure_constants(m.hamiltonian, m.coupling, m.basis);
        model.name = "custom";
        model.basis_dim = m.basis.size();
        model.H_mat = sc.H_mat;
        model.Sc_mat = sc.Sc_mat;
        model.Sa_mat = sc.Sa_mat;
        model.init_vector = init_vector(m.basis, *m.rho0);
        model.coupling_coeffs = expand_in_basis(m.coupling, m.basis, "coupling operator");
        const Matrix id = Matrix::Identity(m.hamiltonian.rows(), m.hamiltonian.cols());
        model.identity_coeffs = expand_in_basis(id, m.basis, "identity");
        for (const auto& [name, mat] : m.custom_observables) {
            model.observable_maps.push_back({name, expand_in_basis(mat, m.basis, "observable '" + name + "'")});
        }
    } else {
        throw ValidationError("cli", "unknown model '" + m.name + "'");
    }
    model.validate();
    return model;
}

KernelTable build_kernels(const RunConfig& cfg) {
    return make_kernel_table(cfg.spec, cfg.beta, cfg.grid);
}

}  // namespace scle
