#pragma once

#include <functional>
#include <string>
#include <vector>

#include "quasicrit/multifractal.hpp"

namespace qc {

Matrix overlap_matrix(const EigenSystem& es0, const EigenSystem& es);

struct OverlapEntry {
    Eigen::Index j = 0;
    double E = 0;
    double max_overlap = 0;
    Eigen::Index argmax = 0;  // first decoupled state of the best block
    bool degenerate = false;  // best block has more than one state
};

// Degenerate decoupled states (gap < tol) are treated as one block; the
// overlap with a block is the squared projection onto the whole block.
std::vector<OverlapEntry> overlap_profile(const EigenSystem& es0, const EigenSystem& es, double degeneracy_tol = 1e-9);

double window_mean_overlap(const std::vector<OverlapEntry>& profile, const EnergyWindow& w);

using ModelFamily = std::function<CoupledModelSpec(int n)>;

// One series per window: <Max|C_j|^2>_E against n.
std::vector<ScalingSeries> fidelity_scaling(const ModelFamily& family, const std::vector<int>& ns,
                                            const std::vector<EnergyWindow>& windows, int threads = 1);

// t_v^2 W / Delta^2
double perturbation_bound(double t_v, double Delta, double W);

// Energy bands of a sorted spectrum: runs of levels with spacing below gap.
std::vector<std::pair<double, double>> spectral_bands(const Vector& energies, double gap);
// Intersection of the band sets of two decoupled spectra.
EnergyWindow overlap_window(const Vector& E1, const Vector& E2, double gap, std::string label = "overlap");

void write_overlap_csv(const std::string& path, const std::vector<OverlapEntry>& profile,
                       const std::vector<std::string>& provenance);

}  // namespace qc
