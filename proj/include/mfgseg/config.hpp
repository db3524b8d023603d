#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfgseg/continuation.hpp"
#include "mfgseg/interactions.hpp"
#include "mfgseg/nash.hpp"

namespace mfgseg {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NashSection {
    double nu = 0.0;
    double damping = 0.5;
    double tol = 1e-11;
    int max_iters = 500;
    std::optional<Kick> kick;
};

struct VariationalSection {
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    std::vector<double> betas;  // single value or strictly increasing list
};

struct BranchSection {
    std::vector<int> ks;
    double target_nu_min = 1e-3;
    StepPolicy step;
};

struct DiagnoseSection {
    std::string input;
};

struct OutputSection {
    std::string directory = ".";
    bool csv = true;
    bool json = true;
};

/// One strict-keys JSON document: unknown keys anywhere are rejected, and all
/// referenced values pass module-level validation before any compute starts.
struct RunConfig {
    int grid_m = 0;
    std::optional<InteractionSpec> g1, g2;
    std::optional<NashSection> nash;
    std::optional<VariationalSection> variational;
    std::optional<BranchSection> branch;
    std::optional<DiagnoseSection> diagnose;
    OutputSection output;

    InteractionPair pair() const;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig parse_run_config_file(const std::string& path);

}  // namespace mfgseg
