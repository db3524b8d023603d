#pragma once

#include <string>
#include <vector>

#include "mfgseg/asymptotics.hpp"
#include "mfgseg/continuation.hpp"
#include "mfgseg/interactions.hpp"
#include "mfgseg/nash.hpp"
#include "mfgseg/variational.hpp"

namespace mfgseg {

struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// CSV numbers are written with 17 significant digits so re-validation from
/// disk loses nothing.
std::string format_full(double value);

void write_solution_json(const std::string& path, const Grid& grid, const SolutionState& state,
                         const InteractionPair& pair);
/// Columns: x, v1, v2, m1, m2, u1, u2.
void write_solution_csv(const std::string& path, const Grid& grid, const SolutionState& state);

struct SolutionArtifact {
    int grid_m = 0;
    SolutionState state;
    InteractionSpec g1, g2;
};

SolutionArtifact read_solution_json(const std::string& path);

/// Columns: index, beta, nu, lambda1, lambda2, seg_integral, sup_v1, sup_v2,
/// x_m, m, xi1, xi2, lambda1_over_nu, lambda2_over_nu, m4_over_nu, label,
/// newton_iters. Interface columns are nan off the first branch.
void write_branch_csv(const std::string& path, const Grid& grid, const Branch& branch, const InteractionPair& pair);

void write_branch_summary_json(const std::string& path, const Grid& grid, const Branch& branch,
                               const InteractionPair& pair, const std::vector<std::string>& checkpoint_files,
                               const std::string& created);

struct BranchSummaryArtifact {
    int grid_m = 0;
    int k = 1;
    double origin_beta = 0.0;
    InteractionSpec g1, g2;
    std::vector<std::string> checkpoint_files;
};

BranchSummaryArtifact read_branch_summary_json(const std::string& path);

/// Columns: beta, c_beta, nontrivial, seg_integral (original variables).
void write_variational_csv(const std::string& path, const Grid& grid, double gamma1, double gamma2,
                           const std::vector<double>& betas, const std::vector<MinimizerResult>& results);

void write_variational_reference_json(const std::string& path, const Grid& grid, const GammaLimitReference& ref,
                                      const std::string& created);

std::string iso_timestamp_now();

}  // namespace mfgseg
