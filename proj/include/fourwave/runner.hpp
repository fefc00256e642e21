// runner.hpp — job orchestration, result serialization, manifest

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fourwave/config.hpp"

namespace fourwave {

struct RunOverrides {
    std::optional<Method> method;
    std::optional<std::string> output_directory;
    std::optional<std::uint64_t> seed;
    int threads = 0;  // <= 0: FOURWAVE_THREADS env, then hardware
    bool dry_run = false;
};

struct RunResult {
    std::string manifest_path;
    std::string manifest_json;
};

// Execute the configured pipeline and write response grids, spectra,
// metadata, and a checksummed manifest into the output directory.
RunResult run_job(const JobConfig& config, const RunOverrides& overrides = {});

// FNV-1a 64-bit checksum as a hex string
std::string fnv1a64_hex(const std::string& bytes);

} // namespace fourwave
