#include "mfgseg/hopf_cole.hpp"

#include <cmath>

namespace mfgseg {

MFGState to_mfg(const Grid& grid, const SolutionState& state) {
    if (static_cast<int>(state.v1.size()) != grid.size() || static_cast<int>(state.v2.size()) != grid.size())
        throw std::invalid_argument("to_mfg: state does not match grid");
    MFGState mfg;
    mfg.nu_tilde = std::sqrt(0.5 * state.nu);
    mfg.lambda1 = state.lambda1;
    mfg.lambda2 = state.lambda2;
    mfg.m1.resize(state.v1.size());
    mfg.m2.resize(state.v2.size());
    mfg.u1.resize(state.v1.size());
    mfg.u2.resize(state.v2.size());
    for (size_t j = 0; j < state.v1.size(); ++j) {
        if (!(state.v1[j] > 0.0) || !(state.v2[j] > 0.0))
            throw std::invalid_argument("to_mfg: fields must be strictly positive");
        mfg.m1[j] = state.v1[j] * state.v1[j];
        mfg.m2[j] = state.v2[j] * state.v2[j];
        mfg.u1[j] = -2.0 * mfg.nu_tilde * std::log(state.v1[j]);
        mfg.u2[j] = -2.0 * mfg.nu_tilde * std::log(state.v2[j]);
    }
    return mfg;
}

SolutionState from_mfg(const Grid& grid, const MFGState& mfg) {
    if (static_cast<int>(mfg.m1.size()) != grid.size()) throw std::invalid_argument("from_mfg: state does not match grid");
    SolutionState state;
    state.nu = 2.0 * mfg.nu_tilde * mfg.nu_tilde;
    state.lambda1 = mfg.lambda1;
    state.lambda2 = mfg.lambda2;
    state.v1.resize(mfg.m1.size());
    state.v2.resize(mfg.m2.size());
    for (size_t j = 0; j < mfg.m1.size(); ++j) {
        if (!(mfg.m1[j] > 0.0) || !(mfg.m2[j] > 0.0))
            throw std::invalid_argument("from_mfg: densities must be strictly positive");
        state.v1[j] = std::sqrt(mfg.m1[j]);
        state.v2[j] = std::sqrt(mfg.m2[j]);
    }
    return state;
}

MFGResiduals mfg_residuals(const Grid& grid, const MFGState& mfg, const InteractionPair& pair,
                           EdgeDensity edge_density) {
    const NeumannLaplacian lap(grid);
    const double h = grid.spacing();
    const int m = grid.size();
    MFGResiduals out;

    for (int i = 0; i < 2; ++i) {
        const ScalarField& u = (i == 0) ? mfg.u1 : mfg.u2;
        const ScalarField& dens = (i == 0) ? mfg.m1 : mfg.m2;
        const ScalarField& dens_other = (i == 0) ? mfg.m2 : mfg.m1;
        const InteractionSpec& g = (i == 0) ? pair.g1 : pair.g2;
        const double lambda = (i == 0) ? mfg.lambda1 : mfg.lambda2;

        const ScalarField lu = lap.apply(u);
        const ScalarField du_node = node_derivative(grid, u);
        double hjb = 0.0;
        for (int j = 0; j < m; ++j) {
            const size_t q = static_cast<size_t>(j);
            const double r = mfg.nu_tilde * lu[q] + 0.5 * du_node[q] * du_node[q] + lambda - g.eval(0, dens_other[q]);
            hjb = std::max(hjb, std::fabs(r));
        }
        out.hjb[i] = hjb;

        const auto dm = edge_derivative(grid, dens);
        const auto du = edge_derivative(grid, u);
        std::vector<double> flux(static_cast<size_t>(m - 1));
        for (int e = 0; e + 1 < m; ++e) {
            const size_t q = static_cast<size_t>(e);
            const double m_edge = edge_density == EdgeDensity::Geometric
                                      ? std::sqrt(dens[q] * dens[q + 1])
                                      : 0.5 * (dens[q] + dens[q + 1]);
            flux[q] = mfg.nu_tilde * dm[q] + du[q] * m_edge;
        }
        double fp = 0.0;
        for (int j = 0; j < m; ++j) {
            const double right = (j + 1 < m) ? flux[static_cast<size_t>(j)] : 0.0;
            const double left = (j > 0) ? flux[static_cast<size_t>(j - 1)] : 0.0;
            fp = std::max(fp, std::fabs(-(right - left) / h));
        }
        out.fp[i] = fp;
    }
    return out;
}

}  // namespace mfgseg
