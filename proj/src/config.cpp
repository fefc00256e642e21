#include "fourwave/config.hpp"

#include <json.hpp>

#include <set>

#include "fourwave/units.hpp"

namespace fourwave {

using nlohmann::json;

std::string method_name(Method m) {
    switch (m) {
        case Method::closed: return "closed";
        case Method::qme: return "qme";
        case Method::both: return "both";
    }
    return "closed";
}

Method method_from_name(const std::string& name) {
    if (name == "closed") return Method::closed;
    if (name == "qme") return Method::qme;
    if (name == "both") return Method::both;
    throw validation_error("method must be one of closed|qme|both, got '" + name + "'");
}

namespace {

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw validation_error(path + ": expected an object");
    std::string unknown;
    for (const auto& item : obj.items())
        if (!allowed.count(item.key())) unknown += (unknown.empty() ? "" : ", ") + item.key();
    if (!unknown.empty())
        throw validation_error(path + ": unknown keys: " + unknown);
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw validation_error(path + ": expected a number");
    return v.get<double>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& path) {
    if (!v.is_array()) throw validation_error(path + ": expected an array of numbers");
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
    return out;
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty())
        throw validation_error(path + ": expected a non-empty array of rows");
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    Eigen::MatrixXd out(v.size(), cols);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string row_path = path + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != cols)
            throw validation_error(row_path + ": ragged or non-array row");
        for (std::size_t j = 0; j < cols; ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                as_number(v[i][j], row_path + "[" + std::to_string(j) + "]");
    }
    return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(row);
    }
    return out;
}

} // namespace

JobConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw validation_error(std::string("config: invalid JSON: ") + e.what());
    }
    require_keys(root, "config",
                 {"system", "bath", "pulses", "grids", "method", "qme", "disorder", "output",
                  "oracle"});
    if (!root.contains("system") || !root.contains("bath") || !root.contains("grids"))
        throw validation_error("config: system, bath, and grids blocks are required");

    JobConfig cfg;
    json echo;

    // ---- system ----
    {
        const json& sys = root["system"];
        require_keys(sys, "system",
                     {"site_energies_invcm", "couplings_invcm", "dipoles",
                      "reference_energy_invcm", "ground_energy_invcm"});
        if (!sys.contains("site_energies_invcm"))
            throw validation_error("system.site_energies_invcm is required");
        const Eigen::VectorXd absolute =
            as_vector(sys["site_energies_invcm"], "system.site_energies_invcm");
        const Eigen::Index n = absolute.size();

        const double reference = sys.contains("reference_energy_invcm")
                                     ? as_number(sys["reference_energy_invcm"],
                                                 "system.reference_energy_invcm")
                                     : absolute.mean();
        const double ground = sys.contains("ground_energy_invcm")
                                  ? as_number(sys["ground_energy_invcm"],
                                              "system.ground_energy_invcm")
                                  : 0.0;

        Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(n, n);
        if (sys.contains("couplings_invcm")) {
            couplings = as_matrix(sys["couplings_invcm"], "system.couplings_invcm");
            if (couplings.rows() != n || couplings.cols() != n)
                throw validation_error("system.couplings_invcm: must be n_sites x n_sites");
        }
        Eigen::MatrixXd dip = Eigen::MatrixXd::Zero(n, 3);
        if (sys.contains("dipoles")) {
            dip = as_matrix(sys["dipoles"], "system.dipoles");
            if (dip.rows() != n || dip.cols() != 3)
                throw validation_error("system.dipoles: must be n_sites rows of 3 components");
        } else {
            dip.col(0).setOnes();
        }

        cfg.system.site_energies =
            (absolute.array() - reference).matrix() * units::wavenumber_to_angular(1.0);
        cfg.system.couplings = couplings * units::wavenumber_to_angular(1.0);
        cfg.system.dipoles = dip.transpose();
        cfg.system.reference_energy = units::wavenumber_to_angular(reference);
        cfg.system.ground_energy = units::wavenumber_to_angular(ground);
        cfg.system.validate();

        echo["system"] = {{"site_energies_invcm", vector_to_json(absolute)},
                          {"couplings_invcm", matrix_to_json(couplings)},
                          {"dipoles", matrix_to_json(dip)},
                          {"reference_energy_invcm", reference},
                          {"ground_energy_invcm", ground}};
    }

    // ---- bath ----
    {
        const json& bath = root["bath"];
        require_keys(bath, "bath",
                     {"temperature_K", "beta_invcm", "mode_freqs_invcm", "diagonal_couplings",
                      "spectral_density", "channels"});
        if (bath.contains("temperature_K") == bath.contains("beta_invcm"))
            throw validation_error("bath: give exactly one of temperature_K or beta_invcm");
        double beta_internal = 0.0;
        json bath_echo;
        if (bath.contains("temperature_K")) {
            const double t_kelvin = as_number(bath["temperature_K"], "bath.temperature_K");
            if (t_kelvin <= 0.0) throw validation_error("bath.temperature_K: must be positive");
            beta_internal = units::beta_from_temperature(t_kelvin);
            bath_echo["temperature_K"] = t_kelvin;
        } else {
            const double beta_invcm = as_number(bath["beta_invcm"], "bath.beta_invcm");
            if (beta_invcm <= 0.0) throw validation_error("bath.beta_invcm: must be positive");
            beta_internal = beta_invcm / units::wavenumber_to_angular(1.0);
            bath_echo["beta_invcm"] = beta_invcm;
        }
        cfg.bath.beta = beta_internal;

        const bool has_modes = bath.contains("mode_freqs_invcm");
        const bool has_density = bath.contains("spectral_density");
        if (has_modes == has_density)
            throw validation_error(
                "bath: give exactly one of mode_freqs_invcm or spectral_density");
        if (has_modes) {
            const Eigen::VectorXd freqs =
                as_vector(bath["mode_freqs_invcm"], "bath.mode_freqs_invcm");
            cfg.bath.mode_freqs = freqs * units::wavenumber_to_angular(1.0);
            bath_echo["mode_freqs_invcm"] = vector_to_json(freqs);
            if (bath.contains("diagonal_couplings")) {
                cfg.bath.diagonal_couplings =
                    as_matrix(bath["diagonal_couplings"], "bath.diagonal_couplings");
                if (cfg.bath.diagonal_couplings.cols() != cfg.bath.mode_freqs.size())
                    throw validation_error(
                        "bath.diagonal_couplings: column count must match mode count");
                if (cfg.bath.diagonal_couplings.rows() != cfg.system.n_sites())
                    throw validation_error(
                        "bath.diagonal_couplings: row count must match the exciton count");
                bath_echo["diagonal_couplings"] = matrix_to_json(cfg.bath.diagonal_couplings);
            }
        } else {
            const json& sd = bath["spectral_density"];
            require_keys(sd, "bath.spectral_density",
                         {"model", "reorganization_invcm", "cutoff_invcm", "n_modes"});
            for (const char* key : {"model", "reorganization_invcm", "cutoff_invcm", "n_modes"})
                if (!sd.contains(key))
                    throw validation_error(std::string("bath.spectral_density.") + key +
                                           " is required");
            if (!sd["model"].is_string())
                throw validation_error("bath.spectral_density.model: expected a string");
            const std::string model = sd["model"].get<std::string>();
            const double lambda =
                as_number(sd["reorganization_invcm"], "bath.spectral_density.reorganization_invcm");
            const double cutoff =
                as_number(sd["cutoff_invcm"], "bath.spectral_density.cutoff_invcm");
            if (!sd["n_modes"].is_number_integer())
                throw validation_error("bath.spectral_density.n_modes: expected an integer");
            const int n_modes = sd["n_modes"].get<int>();
            const BathSpec discretized = discretize_spectral_density(
                spectral_density_from_name(model), units::wavenumber_to_angular(lambda),
                units::wavenumber_to_angular(cutoff), n_modes);
            cfg.bath.mode_freqs = discretized.mode_freqs;
            // identical coupling row per exciton
            cfg.bath.diagonal_couplings = discretized.diagonal_couplings.row(0).replicate(
                cfg.system.n_sites(), 1);
            bath_echo["spectral_density"] = {{"model", model},
                                             {"reorganization_invcm", lambda},
                                             {"cutoff_invcm", cutoff},
                                             {"n_modes", n_modes}};
        }
        cfg.bath.validate();

        if (bath.contains("channels")) {
            const json& chans = bath["channels"];
            if (!chans.is_array()) throw validation_error("bath.channels: expected an array");
            for (std::size_t a = 0; a < chans.size(); ++a) {
                const std::string path = "bath.channels[" + std::to_string(a) + "]";
                require_keys(chans[a], path,
                             {"system_op_re", "system_op_im", "mode_weights", "basis"});
                if (!chans[a].contains("system_op_re") || !chans[a].contains("mode_weights"))
                    throw validation_error(path + ": system_op_re and mode_weights are required");
                ConfiguredChannel ch;
                const Eigen::MatrixXd re =
                    as_matrix(chans[a]["system_op_re"], path + ".system_op_re");
                Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
                if (chans[a].contains("system_op_im")) {
                    im = as_matrix(chans[a]["system_op_im"], path + ".system_op_im");
                    if (im.rows() != re.rows() || im.cols() != re.cols())
                        throw validation_error(path + ": real and imaginary shapes differ");
                }
                if (re.rows() != cfg.system.n_sites() || re.cols() != cfg.system.n_sites())
                    throw validation_error(path + ": system operator must be n x n");
                ch.system_op = re.cast<complexd>() + complexd(0.0, 1.0) * im.cast<complexd>();
                ch.mode_weights = as_vector(chans[a]["mode_weights"], path + ".mode_weights");
                if (ch.mode_weights.size() != cfg.bath.mode_freqs.size())
                    throw validation_error(path + ".mode_weights: must match mode count");
                if (chans[a].contains("basis")) {
                    if (!chans[a]["basis"].is_string())
                        throw validation_error(path + ".basis: expected a string");
                    const std::string basis = chans[a]["basis"].get<std::string>();
                    if (basis == "site") ch.site_basis = true;
                    else if (basis == "exciton") ch.site_basis = false;
                    else throw validation_error(path + ".basis: must be site or exciton");
                }
                json ch_echo = {{"system_op_re", matrix_to_json(re)},
                                {"system_op_im", matrix_to_json(im)},
                                {"mode_weights", vector_to_json(ch.mode_weights)},
                                {"basis", ch.site_basis ? "site" : "exciton"}};
                bath_echo["channels"].push_back(ch_echo);
                cfg.channels.push_back(std::move(ch));
            }
        }
        echo["bath"] = bath_echo;
    }

    // ---- pulses ----
    {
        json pulse_echo;
        json pulses = root.contains("pulses") ? root["pulses"] : json::object();
        require_keys(pulses, "pulses",
                     {"carriers_invcm", "envelopes", "centers_fs", "polarizations"});

        Eigen::VectorXd carriers(3);
        const double eg_invcm = units::angular_to_wavenumber(cfg.system.reference_energy -
                                                             cfg.system.ground_energy);
        carriers.setConstant(eg_invcm);
        if (pulses.contains("carriers_invcm")) {
            carriers = as_vector(pulses["carriers_invcm"], "pulses.carriers_invcm");
            if (carriers.size() != 3)
                throw validation_error("pulses.carriers_invcm: need three carriers");
        }
        cfg.pulses.omega1 = units::wavenumber_to_angular(carriers[0]);
        cfg.pulses.omega2 = units::wavenumber_to_angular(carriers[1]);
        cfg.pulses.omega3 = units::wavenumber_to_angular(carriers[2]);
        pulse_echo["carriers_invcm"] = vector_to_json(carriers);

        json env_echo = json::array();
        PulseEnvelope* envs[3] = {&cfg.pulses.env1, &cfg.pulses.env2, &cfg.pulses.env3};
        if (pulses.contains("envelopes")) {
            const json& env = pulses["envelopes"];
            if (!env.is_array() || env.size() != 3)
                throw validation_error("pulses.envelopes: need three envelope objects");
            for (int i = 0; i < 3; ++i) {
                const std::string path = "pulses.envelopes[" + std::to_string(i) + "]";
                require_keys(env[i], path, {"kind", "fwhm_fs"});
                if (!env[i].contains("kind") || !env[i]["kind"].is_string())
                    throw validation_error(path + ".kind: expected a string");
                const std::string kind = env[i]["kind"].get<std::string>();
                if (kind == "impulsive") {
                    envs[i]->kind = PulseEnvelope::Kind::impulsive;
                    env_echo.push_back({{"kind", "impulsive"}});
                } else if (kind == "gaussian") {
                    envs[i]->kind = PulseEnvelope::Kind::gaussian;
                    if (!env[i].contains("fwhm_fs"))
                        throw validation_error(path + ".fwhm_fs is required for gaussian");
                    envs[i]->fwhm = as_number(env[i]["fwhm_fs"], path + ".fwhm_fs");
                    env_echo.push_back({{"kind", "gaussian"}, {"fwhm_fs", envs[i]->fwhm}});
                } else {
                    throw validation_error(path + ".kind: must be impulsive or gaussian");
                }
            }
        } else {
            for (int i = 0; i < 3; ++i) env_echo.push_back({{"kind", "impulsive"}});
        }
        pulse_echo["envelopes"] = env_echo;

        Eigen::VectorXd centers = Eigen::VectorXd::Zero(3);
        if (pulses.contains("centers_fs")) {
            centers = as_vector(pulses["centers_fs"], "pulses.centers_fs");
            if (centers.size() != 3)
                throw validation_error("pulses.centers_fs: need three centers");
        }
        cfg.pulses.t1 = centers[0];
        cfg.pulses.t2 = centers[1];
        cfg.pulses.t3 = centers[2];
        pulse_echo["centers_fs"] = vector_to_json(centers);
        cfg.pulses.validate();

        Eigen::MatrixXd pol(4, 3);
        pol.setZero();
        pol.col(0).setOnes();
        if (pulses.contains("polarizations")) {
            pol = as_matrix(pulses["polarizations"], "pulses.polarizations");
            if (pol.rows() != 4 || pol.cols() != 3)
                throw validation_error(
                    "pulses.polarizations: need four rows (pulses 1-3 and detection)");
        }
        for (int i = 0; i < 4; ++i) {
            cfg.polarizations[i] = pol.row(i).transpose();
            if (std::abs(cfg.polarizations[i].norm() - 1.0) > 1e-12)
                throw validation_error("pulses.polarizations[" + std::to_string(i) +
                                       "]: must have unit norm");
        }
        pulse_echo["polarizations"] = matrix_to_json(pol);
        echo["pulses"] = pulse_echo;
    }

    // ---- grids ----
    {
        const json& grids = root["grids"];
        require_keys(grids, "grids", {"dt_fs", "n_tau", "n_tau_prime", "tp_list_fs"});
        for (const char* key : {"dt_fs", "n_tau", "n_tau_prime"})
            if (!grids.contains(key))
                throw validation_error(std::string("grids.") + key + " is required");
        cfg.grid.dt = as_number(grids["dt_fs"], "grids.dt_fs");
        if (!grids["n_tau"].is_number_integer() || !grids["n_tau_prime"].is_number_integer())
            throw validation_error("grids.n_tau and grids.n_tau_prime must be integers");
        cfg.grid.n_tau = grids["n_tau"].get<int>();
        cfg.grid.n_tau_prime = grids["n_tau_prime"].get<int>();

        Eigen::VectorXd tp_list(4);
        tp_list << 0.0, 50.0, 100.0, 200.0;
        if (grids.contains("tp_list_fs"))
            tp_list = as_vector(grids["tp_list_fs"], "grids.tp_list_fs");
        cfg.grid.tp_steps.clear();
        for (Eigen::Index i = 0; i < tp_list.size(); ++i) {
            const double steps = tp_list[i] / cfg.grid.dt;
            const int rounded = static_cast<int>(std::lround(steps));
            cfg.grid.tp_steps.push_back(rounded);
        }
        cfg.grid.validate();
        json tp_echo = json::array();
        for (int s : cfg.grid.tp_steps) tp_echo.push_back(s * cfg.grid.dt);
        echo["grids"] = {{"dt_fs", cfg.grid.dt},
                         {"n_tau", cfg.grid.n_tau},
                         {"n_tau_prime", cfg.grid.n_tau_prime},
                         {"tp_list_fs", tp_echo}};
    }

    // ---- method / qme / disorder / output / oracle ----
    if (root.contains("method")) {
        if (!root["method"].is_string())
            throw validation_error("method: expected a string");
        cfg.method = method_from_name(root["method"].get<std::string>());
    }
    echo["method"] = method_name(cfg.method);

    if (root.contains("qme")) {
        require_keys(root["qme"], "qme", {"substeps"});
        if (root["qme"].contains("substeps")) {
            if (!root["qme"]["substeps"].is_number_integer())
                throw validation_error("qme.substeps: expected an integer");
            cfg.qme_substeps = root["qme"]["substeps"].get<int>();
            if (cfg.qme_substeps < 1)
                throw validation_error("qme.substeps: must be at least 1");
        }
    }
    echo["qme"] = {{"substeps", cfg.qme_substeps}};

    {
        cfg.disorder.sigma = Eigen::VectorXd::Zero(cfg.system.n_sites());
        cfg.disorder.samples = 1;
        cfg.disorder.seed = 0;
        if (root.contains("disorder")) {
            const json& dis = root["disorder"];
            require_keys(dis, "disorder", {"sigma_invcm", "samples", "seed"});
            if (dis.contains("sigma_invcm")) {
                Eigen::VectorXd sigma;
                if (dis["sigma_invcm"].is_number()) {
                    sigma = Eigen::VectorXd::Constant(
                        cfg.system.n_sites(),
                        as_number(dis["sigma_invcm"], "disorder.sigma_invcm"));
                } else {
                    sigma = as_vector(dis["sigma_invcm"], "disorder.sigma_invcm");
                    if (sigma.size() != cfg.system.n_sites())
                        throw validation_error("disorder.sigma_invcm: must match site count");
                }
                cfg.disorder.sigma = sigma * units::wavenumber_to_angular(1.0);
            }
            if (dis.contains("samples")) {
                if (!dis["samples"].is_number_integer())
                    throw validation_error("disorder.samples: expected an integer");
                cfg.disorder.samples = dis["samples"].get<int>();
            }
            if (dis.contains("seed")) {
                if (!dis["seed"].is_number_unsigned() && !dis["seed"].is_number_integer())
                    throw validation_error("disorder.seed: expected an integer");
                cfg.disorder.seed = dis["seed"].get<std::uint64_t>();
            }
        }
        cfg.disorder.validate();
        echo["disorder"] = {
            {"sigma_invcm",
             vector_to_json(cfg.disorder.sigma / units::wavenumber_to_angular(1.0))},
            {"samples", cfg.disorder.samples},
            {"seed", cfg.disorder.seed}};
    }

    {
        if (root.contains("output")) {
            const json& out = root["output"];
            require_keys(out, "output", {"directory", "formats", "memory_cap_mb"});
            if (out.contains("directory")) {
                if (!out["directory"].is_string())
                    throw validation_error("output.directory: expected a string");
                cfg.output_directory = out["directory"].get<std::string>();
            }
            if (out.contains("formats")) {
                if (!out["formats"].is_array())
                    throw validation_error("output.formats: expected an array");
                cfg.write_csv = false;
                cfg.write_binary = false;
                for (const auto& f : out["formats"]) {
                    if (!f.is_string())
                        throw validation_error("output.formats: entries must be strings");
                    const std::string name = f.get<std::string>();
                    if (name == "csv") cfg.write_csv = true;
                    else if (name == "binary") cfg.write_binary = true;
                    else throw validation_error("output.formats: unknown format '" + name + "'");
                }
                if (!cfg.write_csv && !cfg.write_binary)
                    throw validation_error("output.formats: need at least one format");
            }
            if (out.contains("memory_cap_mb")) {
                const double mb = as_number(out["memory_cap_mb"], "output.memory_cap_mb");
                if (mb <= 0.0) throw validation_error("output.memory_cap_mb: must be positive");
                cfg.memory_cap_bytes = static_cast<std::size_t>(mb * 1024.0 * 1024.0);
            }
        }
        json formats = json::array();
        if (cfg.write_csv) formats.push_back("csv");
        if (cfg.write_binary) formats.push_back("binary");
        echo["output"] = {{"directory", cfg.output_directory},
                          {"formats", formats},
                          {"memory_cap_mb",
                           static_cast<double>(cfg.memory_cap_bytes) / (1024.0 * 1024.0)}};
    }

    {
        if (root.contains("oracle")) {
            const json& orc = root["oracle"];
            require_keys(orc, "oracle", {"fock_cutoff", "dim_cap"});
            if (orc.contains("fock_cutoff")) {
                if (!orc["fock_cutoff"].is_number_integer())
                    throw validation_error("oracle.fock_cutoff: expected an integer");
                cfg.oracle.fock_cutoff = orc["fock_cutoff"].get<int>();
            }
            if (orc.contains("dim_cap")) {
                if (!orc["dim_cap"].is_number_integer())
                    throw validation_error("oracle.dim_cap: expected an integer");
                cfg.oracle.dim_cap = orc["dim_cap"].get<Eigen::Index>();
            }
        }
        echo["oracle"] = {{"fock_cutoff", cfg.oracle.fock_cutoff},
                          {"dim_cap", cfg.oracle.dim_cap}};
    }

    if (cfg.method != Method::qme && cfg.bath.diagonal_couplings.size() == 0)
        throw validation_error(
            "bath.diagonal_couplings: required for the closed-form method");

    cfg.echo = echo.dump(2);
    return cfg;
}

std::string serialize_config(const JobConfig& config) { return config.echo; }

bool operator==(const JobConfig& a, const JobConfig& b) { return a.echo == b.echo; }

} // namespace fourwave
