// fourwave — third-order response functions and 2D electronic spectra of
// exciton systems: closed-form and multistep-QME routes, plus a brute-force
// Fock-space oracle for point checks.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "fourwave/config.hpp"
#include "fourwave/oracle.hpp"
#include "fourwave/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw fourwave::validation_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_command(const std::string& config_path, const std::string& method,
                const std::string& out_dir, long long seed, int threads, bool dry_run) {
    fourwave::JobConfig cfg = fourwave::parse_config(read_file(config_path));
    fourwave::RunOverrides overrides;
    if (!method.empty()) overrides.method = fourwave::method_from_name(method);
    if (!out_dir.empty()) overrides.output_directory = out_dir;
    if (seed >= 0) overrides.seed = static_cast<std::uint64_t>(seed);
    overrides.threads = threads;
    overrides.dry_run = dry_run;
    const fourwave::RunResult result = fourwave::run_job(cfg, overrides);
    if (dry_run) {
        std::cout << result.manifest_json;
    } else {
        std::cout << result.manifest_path << "\n";
    }
    return 0;
}

int oracle_command(const std::string& config_path, int channel, const std::string& point) {
    fourwave::JobConfig cfg = fourwave::parse_config(read_file(config_path));
    double tau = 0.0, tp = 0.0, tpr = 0.0;
    if (std::sscanf(point.c_str(), "%lf,%lf,%lf", &tau, &tp, &tpr) != 3)
        throw fourwave::validation_error("--point must be tau,Tp,tau_prime in fs");

    const fourwave::ExcitonBasis basis = fourwave::diagonalize(cfg.system);
    const fourwave::DipoleProjection proj =
        fourwave::project_dipoles(basis, cfg.polarizations[0], cfg.polarizations[1],
                                  cfg.polarizations[2], cfg.polarizations[3]);
    std::vector<fourwave::CouplingChannel> channels;
    if (!cfg.channels.empty()) {
        const Eigen::MatrixXcd u = basis.transform.cast<fourwave::complexd>();
        for (const auto& ch : cfg.channels) {
            fourwave::CouplingChannel out;
            out.system_op = ch.site_basis ? Eigen::MatrixXcd(u.adjoint() * ch.system_op * u)
                                          : ch.system_op;
            out.mode_weights = ch.mode_weights;
            channels.push_back(std::move(out));
        }
    } else {
        channels = fourwave::diagonal_to_channels(cfg.bath);
    }
    const fourwave::complexd chi =
        fourwave::fock_oracle(basis.eigenvalues, channels, cfg.bath.mode_freqs,
                              cfg.bath.beta, proj, channel, tau, tp, tpr, cfg.oracle);
    std::cout << "chi" << channel << "(" << tau << ", " << tp << ", " << tpr
              << ") = " << chi.real() << (chi.imag() < 0 ? " - " : " + ")
              << std::abs(chi.imag()) << "i\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"four-wave-mixing response functions and 2D electronic spectra"};
    app.require_subcommand(1);

    std::string config_path, method, out_dir, point;
    long long seed = -1;
    int threads = 0, channel = 1;
    bool dry_run = false;

    CLI::App* run = app.add_subcommand("run", "execute a configured job");
    run->add_option("--config", config_path, "path to the JSON configuration")->required();
    run->add_option("--method", method, "closed|qme|both (overrides the config)");
    run->add_option("--out", out_dir, "output directory (overrides the config)");
    run->add_option("--seed", seed, "disorder seed (overrides the config)");
    run->add_option("--threads", threads, "worker threads (FOURWAVE_THREADS as fallback)");
    run->add_flag("--dry-run", dry_run, "print the planned manifest without computing");

    CLI::App* oracle = app.add_subcommand("oracle", "brute-force Fock-space point check");
    oracle->add_option("--config", config_path, "path to the JSON configuration")->required();
    oracle->add_option("--channel", channel, "response channel 1..4")->required();
    oracle->add_option("--point", point, "tau,Tp,tau_prime in fs")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(config_path, method, out_dir, seed, threads, dry_run);
        return oracle_command(config_path, channel, point);
    } catch (const fourwave::validation_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fourwave::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const fourwave::resource_error& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
