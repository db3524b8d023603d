#include "mfgseg/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "json.hpp"

namespace mfgseg {

namespace {

using nlohmann::json;

json interaction_to_json(const InteractionSpec& spec) {
    json out;
    out["kind"] = spec.kind_name();
    out["gamma"] = spec.gamma();
    if (spec.kind() == InteractionKind::RationalPerturbed) {
        out["a"] = spec.a();
        out["b"] = spec.b();
    }
    return out;
}

InteractionSpec interaction_from_json(const json& obj) {
    if (!obj.is_object() || !obj.contains("kind")) throw ArtifactError("artifact: malformed interaction block");
    const std::string kind = obj["kind"].get<std::string>();
    if (kind == "linear") return InteractionSpec::linear(obj.at("gamma").get<double>());
    if (kind == "rational_perturbed")
        return InteractionSpec::rational_perturbed(obj.at("gamma").get<double>(), obj.at("a").get<double>(),
                                                   obj.at("b").get<double>());
    throw ArtifactError("artifact: unknown interaction kind '" + kind + "'");
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("artifact: cannot read '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ArtifactError("artifact: invalid JSON in '" + path + "': " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArtifactError("artifact: cannot write '" + path + "'");
    out << text;
}

}  // namespace

std::string format_full(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string iso_timestamp_now() {
    std::time_t now = std::time(nullptr);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buffer;
}

void write_solution_json(const std::string& path, const Grid& grid, const SolutionState& state,
                         const InteractionPair& pair) {
    json doc;
    doc["type"] = "solution";
    doc["grid"] = {{"M", grid.size()}};
    doc["interactions"] = {{"g1", interaction_to_json(pair.g1)}, {"g2", interaction_to_json(pair.g2)}};
    doc["nu"] = state.nu;
    doc["lambda1"] = state.lambda1;
    doc["lambda2"] = state.lambda2;
    doc["residual_sup"] = state.residual_sup;
    doc["iterations"] = state.iterations;
    doc["nodes"] = grid.nodes();
    doc["v1"] = state.v1;
    doc["v2"] = state.v2;

    const IdentityReport identities = identity_residuals(grid, state, pair);
    json diag;
    diag["segregation"] = segregation_metric(grid, state);
    diag["id1_1"] = identities.id1[0];
    diag["id1_2"] = identities.id1[1];
    diag["id2_1"] = identities.id2[0];
    diag["id2_2"] = identities.id2[1];
    doc["diagnostics"] = diag;
    doc["metadata"] = {{"created", iso_timestamp_now()}};

    write_text(path, doc.dump(1) + "\n");
}

void write_solution_csv(const std::string& path, const Grid& grid, const SolutionState& state) {
    std::string text = "x,v1,v2,m1,m2,u1,u2\n";
    const double nu_tilde = std::sqrt(0.5 * state.nu);
    for (int j = 0; j < grid.size(); ++j) {
        const size_t u = static_cast<size_t>(j);
        const double v1 = state.v1[u], v2 = state.v2[u];
        text += format_full(grid.node(j)) + "," + format_full(v1) + "," + format_full(v2) + "," +
                format_full(v1 * v1) + "," + format_full(v2 * v2) + "," +
                format_full(-2.0 * nu_tilde * std::log(v1)) + "," + format_full(-2.0 * nu_tilde * std::log(v2)) +
                "\n";
    }
    write_text(path, text);
}

SolutionArtifact read_solution_json(const std::string& path) {
    const json doc = load_json(path);
    if (!doc.is_object() || doc.value("type", "") != "solution")
        throw ArtifactError("artifact: '" + path + "' is not a solution artifact");
    try {
        SolutionArtifact artifact{0,
                                  SolutionState{},
                                  interaction_from_json(doc.at("interactions").at("g1")),
                                  interaction_from_json(doc.at("interactions").at("g2"))};
        artifact.grid_m = doc.at("grid").at("M").get<int>();
        artifact.state.nu = doc.at("nu").get<double>();
        artifact.state.lambda1 = doc.at("lambda1").get<double>();
        artifact.state.lambda2 = doc.at("lambda2").get<double>();
        artifact.state.residual_sup = doc.at("residual_sup").get<double>();
        artifact.state.iterations = doc.value("iterations", 0);
        artifact.state.v1 = doc.at("v1").get<std::vector<double>>();
        artifact.state.v2 = doc.at("v2").get<std::vector<double>>();
        if (static_cast<int>(artifact.state.v1.size()) != artifact.grid_m ||
            static_cast<int>(artifact.state.v2.size()) != artifact.grid_m)
            throw ArtifactError("artifact: field lengths disagree with grid.M");
        return artifact;
    } catch (const json::exception& e) {
        throw ArtifactError("artifact: '" + path + "' is missing fields: " + e.what());
    }
}

void write_branch_csv(const std::string& path, const Grid& grid, const Branch& branch, const InteractionPair& pair) {
    std::string text =
        "index,beta,nu,lambda1,lambda2,seg_integral,sup_v1,sup_v2,x_m,m,xi1,xi2,"
        "lambda1_over_nu,lambda2_over_nu,m4_over_nu,label,newton_iters\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (size_t i = 0; i < branch.points.size(); ++i) {
        const BranchPoint& point = branch.points[i];
        const SolutionState& s = point.state;
        double x_m = nan, m = nan, xi1 = nan, xi2 = nan, m4nu = nan;
        try {
            const InterfaceReport iface = interface_report(grid, s, pair);
            x_m = iface.x_m;
            m = iface.m;
            xi1 = iface.xi1;
            xi2 = iface.xi2;
            m4nu = iface.m4_over_nu;
        } catch (const NotMonotoneError&) {
        }
        const MorphologyReport morph = count_critical_points(grid, s, pair);
        text += std::to_string(i) + "," + format_full(1.0 / s.nu) + "," + format_full(s.nu) + "," +
                format_full(s.lambda1) + "," + format_full(s.lambda2) + "," +
                format_full(segregation_metric(grid, s)) + "," + format_full(sup_norm(s.v1)) + "," +
                format_full(sup_norm(s.v2)) + "," + format_full(x_m) + "," + format_full(m) + "," +
                format_full(xi1) + "," + format_full(xi2) + "," + format_full(s.lambda1 / s.nu) + "," +
                format_full(s.lambda2 / s.nu) + "," + format_full(m4nu) + "," + std::to_string(morph.label) + "," +
                std::to_string(point.newton_iters) + "\n";
    }
    write_text(path, text);
}

namespace {

const char* status_name(BranchStatus status) {
    switch (status) {
        case BranchStatus::ReachedTargetNu: return "reached_target_nu";
        case BranchStatus::ReachedBetaCap: return "reached_beta_cap";
        case BranchStatus::GridResolutionLimit: return "grid_resolution_limit";
        case BranchStatus::BranchIntegrityFailure: return "branch_integrity_failure";
        case BranchStatus::StepUnderflow: return "step_underflow";
        case BranchStatus::SwitchFailed: return "switch_failed";
    }
    return "unknown";
}

}  // namespace

void write_branch_summary_json(const std::string& path, const Grid& grid, const Branch& branch,
                               const InteractionPair& pair, const std::vector<std::string>& checkpoint_files,
                               const std::string& created) {
    json doc;
    doc["type"] = "branch_summary";
    doc["k"] = branch.k;
    doc["origin_beta"] = branch.origin_beta;
    doc["status"] = status_name(branch.status);
    doc["stop_reason"] = branch.stop_reason;
    doc["grid"] = {{"M", grid.size()}};
    doc["interactions"] = {{"g1", interaction_to_json(pair.g1)}, {"g2", interaction_to_json(pair.g2)}};

    json bifs = json::array();
    for (const BifurcationValue& bif : bifurcation_points(pair, branch.k, grid))
        bifs.push_back({{"k", bif.k}, {"beta", bif.beta}, {"nu", bif.nu}});
    doc["bifurcation_points"] = bifs;

    const ExpansionCoefficients coef = expansion_coefficients(pair, branch.k, grid);
    doc["expansion"] = {{"A", coef.a}, {"B", coef.b}, {"C", coef.c}};

    if (branch.k == 1 && !branch.points.empty()) {
        const ScalingLawReport scaling = scaling_law_report(grid, branch, pair);
        const ScalingRow& last = scaling.rows.back();
        doc["scaling"] = {{"drift_lambda1", scaling.drift_lambda1},
                          {"drift_lambda2", scaling.drift_lambda2},
                          {"drift_m4", scaling.drift_m4},
                          {"ell1", scaling.ell1_extrapolated},
                          {"ell2", scaling.ell2_extrapolated},
                          {"x_m_final", last.x_m},
                          {"xi1_final", last.xi1},
                          {"xi2_final", last.xi2},
                          {"seg_final", last.seg}};
    } else {
        doc["scaling"] = nullptr;
    }

    doc["points"] = branch.points.size();
    doc["checkpoints"] = checkpoint_files;
    doc["metadata"] = {{"created", created}};
    write_text(path, doc.dump(1) + "\n");
}

BranchSummaryArtifact read_branch_summary_json(const std::string& path) {
    const json doc = load_json(path);
    if (!doc.is_object() || doc.value("type", "") != "branch_summary")
        throw ArtifactError("artifact: '" + path + "' is not a branch summary");
    try {
        BranchSummaryArtifact artifact{0, 1, 0.0, interaction_from_json(doc.at("interactions").at("g1")),
                                       interaction_from_json(doc.at("interactions").at("g2")),
                                       {}};
        artifact.grid_m = doc.at("grid").at("M").get<int>();
        artifact.k = doc.at("k").get<int>();
        artifact.origin_beta = doc.at("origin_beta").get<double>();
        artifact.checkpoint_files = doc.at("checkpoints").get<std::vector<std::string>>();
        return artifact;
    } catch (const json::exception& e) {
        throw ArtifactError("artifact: '" + path + "' is missing fields: " + e.what());
    }
}

void write_variational_csv(const std::string& path, const Grid& grid, double gamma1, double gamma2,
                           const std::vector<double>& betas, const std::vector<MinimizerResult>& results) {
    std::string text = "beta,c_beta,nontrivial,seg_integral\n";
    for (size_t i = 0; i < betas.size(); ++i) {
        // Segregation metric in the original variables: int v1 v2 =
        // int vt1 vt2 / sqrt(gamma1 gamma2).
        long double overlap = 0.0L;
        for (size_t j = 0; j < results[i].vt1.size(); ++j)
            overlap += static_cast<long double>(results[i].vt1[j]) * results[i].vt2[j];
        const double seg = static_cast<double>(overlap) * grid.spacing() / std::sqrt(gamma1 * gamma2);
        text += format_full(betas[i]) + "," + format_full(results[i].c_beta) + "," +
                (results[i].nontrivial ? "1" : "0") + "," + format_full(seg) + "\n";
    }
    write_text(path, text);
}

void write_variational_reference_json(const std::string& path, const Grid& grid, const GammaLimitReference& ref,
                                      const std::string& created) {
    json doc;
    doc["type"] = "variational_reference";
    doc["c_inf"] = ref.c_inf;
    doc["x0"] = ref.x0;
    doc["grid"] = {{"M", grid.size()}};
    doc["nodes"] = grid.nodes();
    doc["vt1"] = ref.vt1;
    doc["vt2"] = ref.vt2;
    doc["metadata"] = {{"created", created}};
    write_text(path, doc.dump(1) + "\n");
}

}  // namespace mfgseg
