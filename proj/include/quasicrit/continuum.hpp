#pragma once

#include <string>
#include <vector>

#include "quasicrit/multifractal.hpp"

namespace qc {

// Energies in E_R = hbar^2 k1^2 / 2m, lengths in a = pi / k1.
struct ContinuumSpec {
    double V1 = 8.0;
    double V2 = 0.0;
    double Omega = 0.0;
    double beta = 0.0;  // 0 selects F_{n-1}/F_n when L_cells = F_n, else the golden ratio
    long L_cells = 89;
    double dx = 0.05;

    long points_per_cell() const;
    long grid_points() const { return L_cells * points_per_cell(); }
    double effective_beta() const;
};

std::vector<std::string> validate(const ContinuumSpec& spec);  // returns warnings

// Cell-centred grid x_i = (i + 1/2) dx with hard walls at x = 0 and x = L_cells.
// Up block [0, N) carries V_p, down block [N, 2N) carries V_p + V_in, off-diagonal Omega/2.
Matrix build_continuum_hamiltonian(const ContinuumSpec& spec);

// Lowest `count` states (default 4 L_cells) of the full operator.
EigenSystem solve_continuum(const ContinuumSpec& spec, long count = 0);

struct SBand {
    std::vector<Eigen::Index> indices;
    double bottom = 0, top = 0;
    double gap = 0;           // to the next state above the band
    double max_spacing = 0;   // largest level spacing inside the band
    bool gap_found = false;
};

SBand s_band_states(const EigenSystem& es, const ContinuumSpec& spec);

// Per-component cells of width a; base ln(2 L_cells). Works on unit-norm grid vectors.
std::vector<double> cell_weights(ConstVecRef state, const ContinuumSpec& spec);
double continuum_tau2(ConstVecRef state, const ContinuumSpec& spec);

}  // namespace qc
