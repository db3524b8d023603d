#include "mfgseg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "mfgseg/artifacts.hpp"
#include "mfgseg/hopf_cole.hpp"

namespace mfgseg {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("output.directory: cannot create '" + dir + "'");
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// Stored points thinned to roughly log-spaced nu checkpoints (ratio 10^{1/4}).
std::vector<size_t> checkpoint_indices(const Branch& branch) {
    std::vector<size_t> picks;
    if (branch.points.empty()) return picks;
    const double nu_first = branch.points.front().state.nu;
    const double nu_last = branch.points.back().state.nu;
    const double ratio = std::pow(10.0, 0.25);
    std::vector<double> targets;
    for (double nu = nu_first; nu > nu_last; nu /= ratio) targets.push_back(nu);
    targets.push_back(nu_last);
    for (double target : targets) {
        size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < branch.points.size(); ++i) {
            const double d = std::fabs(std::log(branch.points[i].state.nu / target));
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        if (picks.empty() || picks.back() != best) picks.push_back(best);
    }
    return picks;
}

struct CheckTable {
    bool all_pass = true;
    void row(const std::string& name, bool pass, const std::string& detail = "") {
        std::cout << (pass ? "PASS" : "FAIL") << "  " << name;
        if (!detail.empty()) std::cout << "  (" << detail << ")";
        std::cout << "\n";
        if (!pass) all_pass = false;
    }
};

void diagnose_solution_state(CheckTable& table, const Grid& grid, const SolutionState& state,
                             const InteractionPair& pair, const std::string& tag) {
    const double h = grid.spacing();

    ScalarField sq(state.v1.size());
    for (size_t j = 0; j < sq.size(); ++j) sq[j] = state.v1[j] * state.v1[j];
    const double mass1 = integrate(grid, sq);
    for (size_t j = 0; j < sq.size(); ++j) sq[j] = state.v2[j] * state.v2[j];
    const double mass2 = integrate(grid, sq);
    table.row(tag + "mass", std::fabs(mass1 - 1.0) <= 1e-8 && std::fabs(mass2 - 1.0) <= 1e-8,
              "int v1^2 = " + format_full(mass1) + ", int v2^2 = " + format_full(mass2));

    bool positive = true;
    for (size_t j = 0; j < state.v1.size(); ++j)
        if (!(state.v1[j] > 0.0) || !(state.v2[j] > 0.0)) positive = false;
    table.row(tag + "positivity", positive);

    const double residual = pde_residual_sup(grid, state, pair);
    const double residual_tol = std::max(1e-7, 10.0 * state.residual_sup + 1e-12);
    table.row(tag + "pde_residual", residual <= residual_tol,
              "sup = " + format_full(residual) + ", tol = " + format_full(residual_tol));

    const IdentityReport identities = identity_residuals(grid, state, pair);
    const double id1_tol = std::max(1e-8, 10.0 * state.residual_sup);
    table.row(tag + "identity_id1", identities.id1[0] <= id1_tol && identities.id1[1] <= id1_tol,
              format_full(std::max(identities.id1[0], identities.id1[1])));
    const double id2_scale = 1.0 + std::fabs(state.lambda1) + std::fabs(state.lambda2);
    const double id2_tol = std::max(64.0 * h * h * id2_scale, 10.0 * state.residual_sup);
    table.row(tag + "identity_id2", identities.id2[0] <= id2_tol && identities.id2[1] <= id2_tol,
              format_full(std::max(identities.id2[0], identities.id2[1])));
    table.row(tag + "multiplier_bounds", identities.bound[0] && identities.bound[1]);

    const MorphologyReport morph = count_critical_points(grid, state, pair);
    if (morph.degenerate) {
        table.row(tag + "morphology", true, "degenerate morphology (trivial or flat state)");
    } else {
        table.row(tag + "morphology", true, "label " + std::to_string(morph.label));
        table.row(tag + "bracketing", identities.bracket_strict[0] && identities.bracket_strict[1]);
    }

    if (morph.degenerate || morph.label == 0) {
        // The a priori estimates only apply on (or at the root of) the
        // monotone first branch.
        const auto violations = apriori_bounds_check(grid, state, pair);
        std::string detail;
        if (!violations.empty())
            detail = violations.front().which + " at x = " + format_full(violations.front().location);
        table.row(tag + "apriori_bounds", violations.empty(), detail);
    }

    try {
        const JointEnergyReport energy = joint_energy(grid, state, pair);
        // The truncation constant grows like 1/sqrt(nu) as the interface
        // sharpens while the energy itself shrinks like nu.
        const double t_scale = sup_norm(energy.values) + state.nu;
        const double t_tol = 100.0 * h * h * (1.0 + 1.0 / std::sqrt(state.nu)) * t_scale;
        table.row(tag + "joint_energy_constancy", energy.max_deviation <= t_tol,
                  "deviation = " + format_full(energy.max_deviation));
    } catch (const NotMonotoneError&) {
    }

    const MFGResiduals mfg = mfg_residuals(grid, to_mfg(grid, state), pair);
    // The HJB truncation error scales like h^2/nu: the value-function
    // derivatives grow as the interface sharpens.
    const double mfg_scale = (1.0 + 1.0 / state.nu) * (1.0 + std::fabs(state.lambda1) + std::fabs(state.lambda2));
    const double mfg_tol = std::max(200.0 * h * h * mfg_scale, 1e3 * state.residual_sup + 1e-10);
    table.row(tag + "mfg_residuals",
              std::max({mfg.hjb[0], mfg.hjb[1], mfg.fp[0], mfg.fp[1]}) <= mfg_tol,
              "hjb = " + format_full(std::max(mfg.hjb[0], mfg.hjb[1])) +
                  ", fp = " + format_full(std::max(mfg.fp[0], mfg.fp[1])));
}

}  // namespace

int cmd_solve(const RunConfig& config) {
    if (!config.nash) {
        std::cerr << "solve: config needs a nash section\n";
        return kExitConfig;
    }
    const Grid grid(config.grid_m);
    const InteractionPair pair = config.pair();
    BestResponseConfig br;
    br.damping = config.nash->damping;
    br.tol = config.nash->tol;
    br.max_iters = config.nash->max_iters;
    br.perturbation = config.nash->kick;

    const NashResult result = solve_nash(grid, config.nash->nu, pair, br);
    if (result.status != NashStatus::Converged) {
        std::cerr << "solve: best-response iteration did not converge after " << config.nash->max_iters
                  << " iterations (last change " << format_full(result.last_change)
                  << "); lower nash.damping or trace the branch with cmd_branch instead\n";
        return kExitNotConverged;
    }

    ensure_dir(config.output.directory);
    if (config.output.json)
        write_solution_json(join(config.output.directory, "solution.json"), grid, result.state, pair);
    if (config.output.csv) write_solution_csv(join(config.output.directory, "solution.csv"), grid, result.state);

    std::cout << "lambda1 = " << format_full(result.state.lambda1)
              << "\nlambda2 = " << format_full(result.state.lambda2)
              << "\nsegregation = " << format_full(segregation_metric(grid, result.state)) << "\niterations = "
              << result.state.iterations << "\n";
    return kExitOk;
}

int cmd_branch(const RunConfig& config, int jobs) {
    if (!config.branch) {
        std::cerr << "branch: config needs a branch section\n";
        return kExitConfig;
    }
    const Grid grid(config.grid_m);
    const InteractionPair pair = config.pair();
    const BranchSection& section = *config.branch;

    std::vector<Branch> branches(section.ks.size());
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(section.ks.size())));
    if (workers <= 1) {
        for (size_t i = 0; i < section.ks.size(); ++i)
            branches[i] = trace_branch(grid, pair, section.ks[i], section.target_nu_min, section.step);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < section.ks.size(); i = next.fetch_add(1))
                    branches[i] = trace_branch(grid, pair, section.ks[i], section.target_nu_min, section.step);
            });
        for (auto& t : pool) t.join();
    }

    ensure_dir(config.output.directory);
    int exit_code = kExitOk;
    const std::string created = iso_timestamp_now();
    for (size_t i = 0; i < section.ks.size(); ++i) {
        const Branch& branch = branches[i];
        const std::string suffix = section.ks.size() > 1 ? "_k" + std::to_string(branch.k) : "";

        std::vector<std::string> checkpoint_files;
        if (config.output.json && !branch.points.empty()) {
            const std::string subdir = join(config.output.directory, "checkpoints" + suffix);
            ensure_dir(subdir);
            int index = 0;
            for (size_t pick : checkpoint_indices(branch)) {
                char name[64];
                std::snprintf(name, sizeof(name), "point_%03d.json", index++);
                const std::string file = join(subdir, name);
                write_solution_json(file, grid, branch.points[pick].state, pair);
                checkpoint_files.push_back((fs::path("checkpoints" + suffix) / name).string());
            }
        }
        if (config.output.csv)
            write_branch_csv(join(config.output.directory, "branch" + suffix + ".csv"), grid, branch, pair);
        if (config.output.json)
            write_branch_summary_json(join(config.output.directory, "branch_summary" + suffix + ".json"), grid,
                                      branch, pair, checkpoint_files, created);

        std::cout << "k = " << branch.k << ": " << branch.points.size() << " points, origin beta = "
                  << format_full(branch.origin_beta) << ", stop: " << branch.stop_reason << "\n";
        if (branch.status == BranchStatus::BranchIntegrityFailure) {
            std::cerr << "branch: integrity failure on k = " << branch.k << ": " << branch.stop_reason << "\n";
            exit_code = kExitBranchIntegrity;
        } else if (branch.status == BranchStatus::SwitchFailed || branch.points.empty()) {
            std::cerr << "branch: could not start branch k = " << branch.k << ": " << branch.stop_reason << "\n";
            exit_code = std::max(exit_code, kExitNotConverged);
        }
    }
    return exit_code;
}

int cmd_variational(const RunConfig& config) {
    if (!config.variational) {
        std::cerr << "variational: config needs a variational section\n";
        return kExitConfig;
    }
    const Grid grid(config.grid_m);
    const VariationalSection& section = *config.variational;

    std::vector<MinimizerResult> results;
    results.reserve(section.betas.size());
    std::optional<std::pair<ScalarField, ScalarField>> warm;
    for (double beta : section.betas) {
        VariationalProblem prob{section.gamma1, section.gamma2, beta, grid};
        MinimizerResult best = minimize(prob);
        if (warm) {
            MinimizerResult warmed = minimize(prob, {*warm});
            if (warmed.c_beta < best.c_beta) best = std::move(warmed);
        }
        warm = std::make_pair(best.vt1, best.vt2);
        results.push_back(std::move(best));
    }

    ensure_dir(config.output.directory);
    if (config.output.csv)
        write_variational_csv(join(config.output.directory, "variational.csv"), grid, section.gamma1,
                              section.gamma2, section.betas, results);
    if (config.output.json)
        write_variational_reference_json(join(config.output.directory, "variational_reference.json"), grid,
                                         gamma_limit_reference(section.gamma1, section.gamma2, grid),
                                         iso_timestamp_now());

    for (size_t i = 0; i < results.size(); ++i)
        std::cout << "beta = " << format_full(section.betas[i]) << "  c_beta = " << format_full(results[i].c_beta)
                  << "  nontrivial = " << (results[i].nontrivial ? "yes" : "no") << "\n";
    return kExitOk;
}

int cmd_diagnose(const RunConfig& config) {
    if (!config.diagnose) {
        std::cerr << "diagnose: config needs a diagnose section\n";
        return kExitConfig;
    }
    CheckTable table;
    try {
        const std::string& input = config.diagnose->input;
        std::ifstream probe(input);
        if (!probe) throw ArtifactError("artifact: cannot read '" + input + "'");
        std::string text((std::istreambuf_iterator<char>(probe)), std::istreambuf_iterator<char>());
        const bool is_branch = text.find("\"branch_summary\"") != std::string::npos;

        if (is_branch) {
            const BranchSummaryArtifact summary = read_branch_summary_json(input);
            const Grid grid(summary.grid_m);
            const InteractionPair pair(summary.g1, summary.g2);
            const double beta_expected = bifurcation_points(pair, summary.k, grid).back().beta;
            table.row("origin_beta", std::fabs(summary.origin_beta - beta_expected) <=
                                         1e-10 * std::max(1.0, beta_expected));
            const fs::path base = fs::path(input).parent_path();
            int index = 0;
            for (const std::string& rel : summary.checkpoint_files) {
                const SolutionArtifact artifact = read_solution_json((base / rel).string());
                if (artifact.grid_m != summary.grid_m) throw ArtifactError("artifact: checkpoint grid mismatch");
                const std::string tag = "point" + std::to_string(index++) + ".";
                diagnose_solution_state(table, grid, artifact.state, pair, tag);
                const MorphologyReport morph = count_critical_points(grid, artifact.state, pair);
                table.row(tag + "label", morph.label == summary.k - 1,
                          "label " + std::to_string(morph.label) + ", branch k = " + std::to_string(summary.k));
            }
        } else {
            const SolutionArtifact artifact = read_solution_json(input);
            const Grid grid(artifact.grid_m);
            const InteractionPair pair(artifact.g1, artifact.g2);
            diagnose_solution_state(table, grid, artifact.state, pair, "");
        }
    } catch (const std::exception& e) {
        std::cerr << "diagnose: " << e.what() << "\n";
        return kExitConfig;
    }
    return table.all_pass ? kExitOk : kExitConfig;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Two-population ergodic MFG solver: Nash equilibria, bifurcation branches, segregation diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string format;
    int jobs = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
        sub->add_option("--jobs", jobs, "parallel workers for independent solves")->check(CLI::PositiveNumber);
        sub->add_option("--format", format, "csv|json|both (overrides output.formats)");
    };
    CLI::App* solve = app.add_subcommand("solve", "best-response Nash solve at fixed nu");
    CLI::App* branch = app.add_subcommand("branch", "pseudo-arclength continuation of C_k");
    CLI::App* variational = app.add_subcommand("variational", "linear-case direct minimization sweep");
    CLI::App* diagnose = app.add_subcommand("diagnose", "re-validate a stored artifact");
    for (CLI::App* sub : {solve, branch, variational, diagnose}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunConfig config = parse_run_config_file(config_path);
        if (!out_dir.empty()) config.output.directory = out_dir;
        if (!format.empty()) {
            if (format == "csv") {
                config.output.csv = true;
                config.output.json = false;
            } else if (format == "json") {
                config.output.csv = false;
                config.output.json = true;
            } else if (format == "both") {
                config.output.csv = true;
                config.output.json = true;
            } else {
                throw ConfigError("--format: expected csv, json, or both");
            }
        }
        if (solve->parsed()) {
            if (config.grid_m == 0 || !config.g1) throw ConfigError("solve: grid and interactions sections required");
            return cmd_solve(config);
        }
        if (branch->parsed()) {
            if (config.grid_m == 0 || !config.g1) throw ConfigError("branch: grid and interactions sections required");
            return cmd_branch(config, jobs);
        }
        if (variational->parsed()) {
            if (config.grid_m == 0) throw ConfigError("variational: grid section required");
            return cmd_variational(config);
        }
        return cmd_diagnose(config);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace mfgseg
