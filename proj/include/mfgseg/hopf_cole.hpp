#pragma once

#include "mfgseg/nash.hpp"

namespace mfgseg {

/// The original MFG unknowns: densities m_i = v_i^2, value functions
/// u_i = -2 nu_tilde ln(v_i), with nu = 2 nu_tilde^2. The multipliers carry
/// over unchanged.
struct MFGState {
    double nu_tilde = 0.0;
    ScalarField m1, m2;
    ScalarField u1, u2;
    double lambda1 = 0.0, lambda2 = 0.0;
};

MFGState to_mfg(const Grid& grid, const SolutionState& state);

/// Exact inverse of to_mfg (v_i = sqrt(m_i)).
SolutionState from_mfg(const Grid& grid, const MFGState& mfg);

enum class EdgeDensity { Geometric, Arithmetic };

struct MFGResiduals {
    double hjb[2] = {0.0, 0.0};
    double fp[2] = {0.0, 0.0};
};

/// Discrete residuals of the MFG system. HJB uses the Neumann laplacian on
/// u_i and edge-averaged gradients; the Fokker-Planck residual is assembled
/// in conservative form with edge fluxes nu_tilde (dm) + (du) m_edge, where
/// m_edge is the geometric (default) or arithmetic mean of the adjacent
/// cells. Both vanish identically at the trivial state and are O(h^2)
/// discretization artifacts at Hopf-Cole images of smooth positive fields.
MFGResiduals mfg_residuals(const Grid& grid, const MFGState& mfg, const InteractionPair& pair,
                           EdgeDensity edge_density = EdgeDensity::Geometric);

}  // namespace mfgseg
