#include "fourwave/runner.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "fourwave/closed_form.hpp"
#include "fourwave/qme.hpp"
#include "fourwave/signal.hpp"
#include "fourwave/units.hpp"

namespace fourwave {

using nlohmann::json;

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string grid_csv(const ResponseGrid& grid) {
    std::string out = "tau,Tp,tau_prime,re,im\n";
    for (int i_tau = 0; i_tau < grid.grid.n_tau; ++i_tau)
        for (std::size_t i_tp = 0; i_tp < grid.grid.tp_steps.size(); ++i_tp)
            for (int ip = 0; ip < grid.grid.n_tau_prime; ++ip) {
                const complexd v = grid.at(i_tau, i_tp, ip);
                out += format_double(i_tau * grid.grid.dt) + ',' +
                       format_double(grid.grid.tp_steps[i_tp] * grid.grid.dt) + ',' +
                       format_double(ip * grid.grid.dt) + ',' + format_double(v.real()) +
                       ',' + format_double(v.imag()) + '\n';
            }
    return out;
}

std::string spectrum_csv(const Spectrum2D& spec) {
    std::string out = "w_tau_prime,w_tau,re,im\n";
    for (Eigen::Index j = 0; j < spec.omega_tau_prime.size(); ++j)
        for (Eigen::Index i = 0; i < spec.omega_tau.size(); ++i) {
            const complexd v = spec.values(i, j);
            out += format_double(spec.omega_tau_prime[j]) + ',' +
                   format_double(spec.omega_tau[i]) + ',' + format_double(v.real()) + ',' +
                   format_double(v.imag()) + '\n';
        }
    return out;
}

std::string variance_csv(const Spectrum2D& spec, const Eigen::MatrixXd& var) {
    std::string out = "w_tau_prime,w_tau,var\n";
    for (Eigen::Index j = 0; j < spec.omega_tau_prime.size(); ++j)
        for (Eigen::Index i = 0; i < spec.omega_tau.size(); ++i)
            out += format_double(spec.omega_tau_prime[j]) + ',' +
                   format_double(spec.omega_tau[i]) + ',' + format_double(var(i, j)) + '\n';
    return out;
}

void append_raw(std::string& out, const void* data, std::size_t n) {
    out.append(static_cast<const char*>(data), n);
}

// 64-byte header: magic "FWMX", u32 version, 3 x u64 dims, f64 dt, zero pad
std::string binary_blob(const std::vector<complexd>& values, std::uint64_t d0,
                        std::uint64_t d1, std::uint64_t d2, double dt) {
    std::string out;
    out.reserve(64 + values.size() * 16);
    out += "FWMX";
    const std::uint32_t version = 1;
    append_raw(out, &version, 4);
    for (std::uint64_t d : {d0, d1, d2}) append_raw(out, &d, 8);
    append_raw(out, &dt, 8);
    out.resize(64, '\0');
    for (const complexd& v : values) {
        const double re = v.real(), im = v.imag();
        append_raw(out, &re, 8);
        append_raw(out, &im, 8);
    }
    return out;
}

struct StageTimer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    json* log;
    explicit StageTimer(json* stage_log) : log(stage_log) {}
    void mark(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        const double ms =
            std::chrono::duration_cast<std::chrono::microseconds>(now - start).count() / 1000.0;
        (*log)[stage] = ms;
        std::cerr << "[fourwave] " << stage << ": " << ms << " ms\n";
        start = now;
    }
};

std::vector<CouplingChannel> resolve_channels(const JobConfig& cfg,
                                              const ExcitonBasis& basis) {
    std::vector<CouplingChannel> channels;
    if (!cfg.channels.empty()) {
        const Eigen::MatrixXcd u = basis.transform.cast<complexd>();
        for (const auto& ch : cfg.channels) {
            CouplingChannel out;
            out.system_op = ch.site_basis
                                ? Eigen::MatrixXcd(u.adjoint() * ch.system_op * u)
                                : ch.system_op;
            out.mode_weights = ch.mode_weights;
            channels.push_back(std::move(out));
        }
        return channels;
    }
    BathSpec bath = cfg.bath;
    return diagonal_to_channels(bath);
}

struct ChiSet {
    std::vector<ResponseGrid> grids;  // channels 1..4
};

ChiSet compute_chi(const JobConfig& cfg, Method method, const SiteSystem& system,
                   int threads) {
    const ExcitonBasis basis = diagonalize(system);
    const DipoleProjection proj =
        project_dipoles(basis, cfg.polarizations[0], cfg.polarizations[1],
                        cfg.polarizations[2], cfg.polarizations[3]);
    ChiSet out;
    if (method == Method::closed) {
        BathSpec bath = cfg.bath;
        for (int k = 1; k <= 4; ++k)
            out.grids.push_back(evaluate_closed_grid(k, cfg.grid, basis.eigenvalues, bath,
                                                     proj, cfg.memory_cap_bytes, threads));
    } else {
        const auto channels = resolve_channels(cfg, basis);
        const KernelContext ctx =
            make_context(channels, basis.eigenvalues, cfg.bath.mode_freqs, cfg.bath.beta,
                         cfg.grid, cfg.qme_substeps);
        QmeOptions opts;
        opts.substeps = cfg.qme_substeps;
        opts.n_threads = threads;
        for (int k = 1; k <= 4; ++k)
            out.grids.push_back(chi_qme(k, cfg.grid, ctx, proj, opts));
    }
    return out;
}

std::vector<Spectrum2D> spectra_from_chi(const JobConfig& cfg, const ChiSet& chi) {
    const double e_eg = cfg.system.reference_energy - cfg.system.ground_energy;
    const SignalGrids signals =
        impulsive_signal(chi.grids[0], chi.grids[1], chi.grids[2], chi.grids[3], e_eg,
                         cfg.pulses.omega1, cfg.pulses.omega2);
    FourierOptions fopts;
    fopts.excitation_offset = cfg.pulses.omega1;
    std::vector<Spectrum2D> out;
    for (std::size_t i_tp = 0; i_tp < cfg.grid.tp_steps.size(); ++i_tp) {
        out.push_back(fourier_2d(signals.rephasing, cfg.grid, i_tp,
                                 SpectrumChannel::rephasing, fopts));
        out.push_back(fourier_2d(signals.nonrephasing, cfg.grid, i_tp,
                                 SpectrumChannel::nonrephasing, fopts));
    }
    return out;
}

} // namespace

RunResult run_job(const JobConfig& config, const RunOverrides& overrides) {
    JobConfig cfg = config;
    if (overrides.method) cfg.method = *overrides.method;
    if (overrides.output_directory) cfg.output_directory = *overrides.output_directory;
    if (overrides.seed) cfg.disorder.seed = *overrides.seed;

    int threads = overrides.threads;
    if (threads <= 0) {
        if (const char* env = std::getenv("FOURWAVE_THREADS")) threads = std::atoi(env);
    }
    threads = resolve_thread_count(threads);

    const std::filesystem::path out_dir(cfg.output_directory);
    json manifest;
    manifest["version"] = 1;
    manifest["method"] = method_name(cfg.method);
    manifest["seed"] = cfg.disorder.seed;
    manifest["artifacts"] = json::array();

    // planned artifact names
    std::vector<std::string> planned;
    const bool run_closed = cfg.method != Method::qme;
    const bool run_qme = cfg.method != Method::closed;
    for (int k = 1; k <= 4; ++k) {
        if (run_closed) planned.push_back("chi" + std::to_string(k) + "_closed");
        if (run_qme) planned.push_back("chi" + std::to_string(k) + "_qme");
    }
    const bool averaged = cfg.disorder.samples > 1;
    for (std::size_t i_tp = 0; i_tp < cfg.grid.tp_steps.size(); ++i_tp)
        for (const char* ch : {"rephasing", "nonrephasing"}) {
            planned.push_back("spectrum_" + std::string(ch) + "_tp" + std::to_string(i_tp));
            if (averaged)
                planned.push_back("spectrum_" + std::string(ch) + "_tp" +
                                  std::to_string(i_tp) + "_variance");
        }

    if (overrides.dry_run) {
        manifest["planned"] = true;
        for (const auto& name : planned) {
            json entry;
            entry["path"] = name + (cfg.write_csv ? ".csv" : ".bin");
            manifest["artifacts"].push_back(entry);
        }
        manifest["metadata"] = "metadata.json";
        RunResult result;
        result.manifest_path = (out_dir / "manifest.json").string();
        result.manifest_json = manifest.dump(2) + "\n";
        return result;
    }

    json stage_log;
    StageTimer timer(&stage_log);

    // ---- compute ----
    std::optional<ChiSet> closed_chi, qme_chi;
    if (run_closed) {
        closed_chi = compute_chi(cfg, Method::closed, cfg.system, threads);
        timer.mark("chi_closed");
    }
    if (run_qme) {
        qme_chi = compute_chi(cfg, Method::qme, cfg.system, threads);
        timer.mark("chi_qme");
    }

    json deviation;
    if (run_closed && run_qme) {
        for (int k = 0; k < 4; ++k) {
            double max_abs = 0.0, max_rel = 0.0, max_mag = 0.0;
            for (std::size_t i = 0; i < closed_chi->grids[k].values.size(); ++i) {
                const double diff =
                    std::abs(closed_chi->grids[k].values[i] - qme_chi->grids[k].values[i]);
                max_abs = std::max(max_abs, diff);
                max_mag = std::max(max_mag, std::abs(closed_chi->grids[k].values[i]));
            }
            max_rel = max_mag > 0.0 ? max_abs / max_mag : 0.0;
            deviation["chi" + std::to_string(k + 1)] = {{"max_abs", max_abs},
                                                        {"max_rel", max_rel}};
        }
        manifest["deviation_closed_vs_qme"] = deviation;
    }

    // ---- spectra (disorder-averaged when requested) ----
    const Method spectra_method = run_closed ? Method::closed : Method::qme;
    const ChiSet& nominal_chi = run_closed ? *closed_chi : *qme_chi;
    std::vector<Spectrum2D> spectra;
    std::vector<Eigen::MatrixXd> variance;
    if (averaged) {
        DisorderResult result = disorder_average(
            cfg.disorder,
            [&](const Eigen::VectorXd& offsets) {
                SiteSystem sys = cfg.system;
                sys.site_energies += offsets;
                return spectra_from_chi(cfg, compute_chi(cfg, spectra_method, sys, 1));
            },
            threads);
        spectra = std::move(result.mean);
        variance = std::move(result.variance);
    } else {
        spectra = spectra_from_chi(cfg, nominal_chi);
    }
    timer.mark("spectra");

    // ---- write ----
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw resource_error("run_job: cannot create output directory '" +
                             out_dir.string() + "': " + ec.message());

    auto write_artifact = [&](const std::string& name, const std::string& bytes) {
        const std::filesystem::path path = out_dir / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw resource_error("run_job: cannot write " + path.string());
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        f.close();
        json entry;
        entry["path"] = name;
        entry["bytes"] = bytes.size();
        entry["fnv1a64"] = fnv1a64_hex(bytes);
        manifest["artifacts"].push_back(entry);
    };

    auto write_grid = [&](const std::string& stem, const ResponseGrid& grid) {
        if (cfg.write_csv) write_artifact(stem + ".csv", grid_csv(grid));
        if (cfg.write_binary)
            write_artifact(stem + ".bin",
                           binary_blob(grid.values,
                                       static_cast<std::uint64_t>(grid.grid.n_tau),
                                       grid.grid.tp_steps.size(),
                                       static_cast<std::uint64_t>(grid.grid.n_tau_prime),
                                       grid.grid.dt));
    };

    for (int k = 0; k < 4; ++k) {
        if (run_closed) write_grid("chi" + std::to_string(k + 1) + "_closed",
                                   closed_chi->grids[static_cast<std::size_t>(k)]);
        if (run_qme)
            write_grid("chi" + std::to_string(k + 1) + "_qme",
                       qme_chi->grids[static_cast<std::size_t>(k)]);
    }

    for (std::size_t i_tp = 0; i_tp < cfg.grid.tp_steps.size(); ++i_tp) {
        const char* names[2] = {"rephasing", "nonrephasing"};
        for (int c = 0; c < 2; ++c) {
            const std::size_t slot = i_tp * 2 + static_cast<std::size_t>(c);
            const std::string stem =
                "spectrum_" + std::string(names[c]) + "_tp" + std::to_string(i_tp);
            if (cfg.write_csv) write_artifact(stem + ".csv", spectrum_csv(spectra[slot]));
            if (cfg.write_binary) {
                std::vector<complexd> flat(spectra[slot].values.size());
                for (Eigen::Index i = 0; i < spectra[slot].values.rows(); ++i)
                    for (Eigen::Index j = 0; j < spectra[slot].values.cols(); ++j)
                        flat[static_cast<std::size_t>(i * spectra[slot].values.cols() + j)] =
                            spectra[slot].values(i, j);
                write_artifact(
                    stem + ".bin",
                    binary_blob(flat,
                                static_cast<std::uint64_t>(spectra[slot].values.rows()),
                                static_cast<std::uint64_t>(spectra[slot].values.cols()), 1,
                                cfg.grid.dt));
            }
            if (averaged && cfg.write_csv)
                write_artifact(stem + "_variance.csv",
                               variance_csv(spectra[slot], variance[slot]));
        }
    }
    timer.mark("write");

    // metadata is listed but not checksummed: it carries timing
    {
        json metadata;
        metadata["config"] = json::parse(cfg.echo);
        metadata["version"] = "fourwave 1.0";
        metadata["seed"] = cfg.disorder.seed;
        metadata["timing_ms"] = stage_log;
        std::ofstream f(out_dir / "metadata.json");
        f << metadata.dump(2) << "\n";
    }
    manifest["metadata"] = "metadata.json";

    RunResult result;
    result.manifest_path = (out_dir / "manifest.json").string();
    result.manifest_json = manifest.dump(2) + "\n";
    std::ofstream mf(result.manifest_path, std::ios::binary);
    mf << result.manifest_json;
    return result;
}

} // namespace fourwave
