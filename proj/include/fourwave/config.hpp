// config.hpp — job configuration: parsing, validation, defaults, echo

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fourwave/bath.hpp"
#include "fourwave/exciton.hpp"
#include "fourwave/oracle.hpp"
#include "fourwave/response_grid.hpp"
#include "fourwave/signal.hpp"

namespace fourwave {

enum class Method { closed, qme, both };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Channel given in the configuration; site-basis operators are rotated into
// the exciton basis after each diagonalization.
struct ConfiguredChannel {
    Eigen::MatrixXcd system_op;
    Eigen::VectorXd mode_weights;
    bool site_basis = false;
};

struct JobConfig {
    SiteSystem system;  // internal units; site_energies relative to reference_energy
    BathSpec bath;
    std::vector<ConfiguredChannel> channels;  // optional general coupling
    PulseSetup pulses;
    Eigen::Vector3d polarizations[4];
    GridSpec grid;
    Method method = Method::closed;
    int qme_substeps = 1;
    DisorderModel disorder;
    std::string output_directory = "out";
    bool write_csv = true;
    bool write_binary = false;
    std::size_t memory_cap_bytes = std::size_t(2048) * 1024 * 1024;
    OracleSpec oracle;

    // resolved configuration in input units, with defaults filled
    std::string echo;
};

// Parse a UTF-8 JSON object tree; unknown keys are an error listing them,
// physical inconsistencies report the offending path.
JobConfig parse_config(const std::string& text);

// Canonical text form of the resolved configuration; reparses to an equal value.
std::string serialize_config(const JobConfig& config);

bool operator==(const JobConfig& a, const JobConfig& b);

} // namespace fourwave
