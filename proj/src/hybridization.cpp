#include "quasicrit/hybridization.hpp"

#include <algorithm>
#include <cmath>

#include "quasicrit/csv.hpp"
#include "quasicrit/errors.hpp"
#include "quasicrit/parallel.hpp"

namespace qc {

Matrix overlap_matrix(const EigenSystem& es0, const EigenSystem& es) {
    if (es0.dimension() != es.dimension()) throw ParameterError("overlap needs eigensystems of equal dimension");
    return es0.states.transpose() * es.states;
}

std::vector<OverlapEntry> overlap_profile(const EigenSystem& es0, const EigenSystem& es, double degeneracy_tol) {
    const Matrix C = overlap_matrix(es0, es);
    const Matrix C2 = C.cwiseAbs2();

    std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;  // [begin, end)
    for (Eigen::Index a = 0; a < es0.size();) {
        Eigen::Index b = a + 1;
        while (b < es0.size() && es0.energies(b) - es0.energies(b - 1) < degeneracy_tol) ++b;
        blocks.emplace_back(a, b);
        a = b;
    }

    std::vector<OverlapEntry> out(std::size_t(es.size()));
    for (Eigen::Index j = 0; j < es.size(); ++j) {
        OverlapEntry& e = out[std::size_t(j)];
        e.j = j;
        e.E = es.energies(j);
        e.max_overlap = -1;
        for (auto [a, b] : blocks) {
            double w = C2.col(j).segment(a, b - a).sum();
            if (w > e.max_overlap) {
                e.max_overlap = w;
                e.argmax = a;
                e.degenerate = b - a > 1;
            }
        }
        e.max_overlap = std::clamp(e.max_overlap, 0.0, 1.0);
    }
    return out;
}

double window_mean_overlap(const std::vector<OverlapEntry>& profile, const EnergyWindow& w) {
    double s = 0;
    std::size_t k = 0;
    for (const auto& e : profile)
        if (w.contains(e.E)) {
            s += e.max_overlap;
            ++k;
        }
    if (k == 0) throw EmptyWindowError("no states in energy window" + (w.label.empty() ? std::string{} : " '" + w.label + "'"));
    return s / double(k);
}

std::vector<ScalingSeries> fidelity_scaling(const ModelFamily& family, const std::vector<int>& ns,
                                            const std::vector<EnergyWindow>& windows, int threads) {
    if (ns.size() < 3) throw ParameterError("fidelity scaling needs at least 3 sizes");
    std::vector<std::vector<double>> values(ns.size());
    std::vector<double> Ls(ns.size());
    parallel_for(ns.size(), threads, [&](std::size_t i) {
        auto spec = family(ns[i]);
        auto es0 = diagonalize_decoupled(spec);
        auto es = diagonalize(spec);
        auto prof = overlap_profile(es0, es);
        Ls[i] = double(spec.dimension());
        for (const auto& w : windows) values[i].push_back(window_mean_overlap(prof, w));
    });
    std::vector<ScalingSeries> out;
    for (std::size_t k = 0; k < windows.size(); ++k) {
        ScalingSeries s;
        s.quantity = "max_overlap" + (windows[k].label.empty() ? std::string{} : "[" + windows[k].label + "]");
        s.abscissa = Abscissa::InverseN;
        for (std::size_t i = 0; i < ns.size(); ++i) s.samples.push_back({ns[i], Ls[i], values[i][k]});
        out.push_back(std::move(s));
    }
    return out;
}

double perturbation_bound(double t_v, double Delta, double W) {
    if (Delta == 0.0) throw NumericalError("resonance: zero gap, perturbative bound does not apply (overlapped spectra)");
    if (Delta < 0) throw ParameterError("gap must be positive");
    if (W < 1) throw ParameterError("localization width must be at least 1");
    return t_v * t_v * W / (Delta * Delta);
}

std::vector<std::pair<double, double>> spectral_bands(const Vector& energies, double gap) {
    std::vector<std::pair<double, double>> bands;
    if (energies.size() == 0) return bands;
    double lo = energies(0), hi = energies(0);
    for (Eigen::Index i = 1; i < energies.size(); ++i) {
        if (energies(i) - hi > gap) {
            bands.emplace_back(lo, hi);
            lo = energies(i);
        }
        hi = energies(i);
    }
    bands.emplace_back(lo, hi);
    return bands;
}

EnergyWindow overlap_window(const Vector& E1, const Vector& E2, double gap, std::string label) {
    auto b1 = spectral_bands(E1, gap);
    auto b2 = spectral_bands(E2, gap);
    EnergyWindow w{std::move(label), {}};
    for (auto [l1, h1] : b1)
        for (auto [l2, h2] : b2) {
            double lo = std::max(l1, l2), hi = std::min(h1, h2);
            if (lo < hi) w.intervals.emplace_back(lo, hi);
        }
    std::sort(w.intervals.begin(), w.intervals.end());
    return w;
}

void write_overlap_csv(const std::string& path, const std::vector<OverlapEntry>& profile,
                       const std::vector<std::string>& provenance) {
    CsvWriter w(path);
    for (const auto& p : provenance) w.comment(p);
    w.header({"j", "E_j", "max_overlap", "argmax_state", "block_degenerate_flag"});
    for (const auto& e : profile)
        w.row({std::to_string(e.j + 1), fmt_num(e.E), fmt_num(e.max_overlap), std::to_string(e.argmax + 1),
               e.degenerate ? "1" : "0"});
}

}  // namespace qc
