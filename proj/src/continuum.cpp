#include "quasicrit/continuum.hpp"

#include <cmath>
#include <numbers>

#include "quasicrit/errors.hpp"

namespace qc {

long ContinuumSpec::points_per_cell() const {
    double inv = 1.0 / dx;
    long k = std::lround(inv);
    if (k < 1 || std::abs(inv - double(k)) > 1e-9 * inv) throw ParameterError("continuum dx must divide 1 exactly");
    return k;
}

double ContinuumSpec::effective_beta() const {
    if (beta != 0.0) return beta;
    long a = 1, b = 1;
    while (b < L_cells) {
        long c = a + b;
        a = b;
        b = c;
    }
    if (b == L_cells) return double(a) / double(b);
    return (std::sqrt(5.0) - 1.0) / 2.0;
}

std::vector<std::string> validate(const ContinuumSpec& spec) {
    if (spec.L_cells < 1) throw ParameterError("continuum L_cells must be positive");
    if (!(spec.dx > 0)) throw ParameterError("continuum dx must be positive");
    spec.points_per_cell();
    std::vector<std::string> warn;
    if (spec.dx > 0.1) warn.push_back("coarse grid: dx=" + std::to_string(spec.dx) + " a exceeds 0.1 a");
    return warn;
}

namespace {

struct Entries {
    long N = 0;
    double k = 0;      // kinetic hopping 1/(pi^2 dx^2)
    double half_omega = 0;
    std::vector<double> up, down;  // diagonals
};

Entries entries(const ContinuumSpec& spec) {
    validate(spec);
    const double pi = std::numbers::pi;
    Entries e;
    e.N = spec.grid_points();
    e.k = 1.0 / (pi * pi * spec.dx * spec.dx);
    e.half_omega = 0.5 * spec.Omega;
    const double beta = spec.effective_beta();
    e.up.resize(std::size_t(e.N));
    e.down.resize(std::size_t(e.N));
    for (long i = 0; i < e.N; ++i) {
        const double x = (double(i) + 0.5) * spec.dx;
        const double c = std::cos(pi * x);
        const double vp = spec.V1 * c * c;
        const double vin = 0.5 * spec.V2 * std::cos(2.0 * pi * beta * x);
        // mirror ghost outside each wall puts the node of psi exactly on the wall
        const double kin = (i == 0 || i == e.N - 1) ? (e.N == 1 ? 4.0 : 3.0) * e.k : 2.0 * e.k;
        e.up[std::size_t(i)] = kin + vp;
        e.down[std::size_t(i)] = kin + vp + vin;
    }
    return e;
}

}  // namespace

Matrix build_continuum_hamiltonian(const ContinuumSpec& spec) {
    const auto e = entries(spec);
    const long N = e.N;
    Matrix H = Matrix::Zero(2 * N, 2 * N);
    for (long i = 0; i < N; ++i) {
        H(i, i) = e.up[std::size_t(i)];
        H(N + i, N + i) = e.down[std::size_t(i)];
        H(i, N + i) = H(N + i, i) = e.half_omega;
        if (i + 1 < N) {
            H(i, i + 1) = H(i + 1, i) = -e.k;
            H(N + i, N + i + 1) = H(N + i + 1, N + i) = -e.k;
        }
    }
    return H;
}

EigenSystem solve_continuum(const ContinuumSpec& spec, long count) {
    if (count <= 0) count = 4 * spec.L_cells;
    // banded dsbevx was tried: it forms the full Q and runs about twice as slow here
    return diagonalize_lowest(build_continuum_hamiltonian(spec), count);
}

SBand s_band_states(const EigenSystem& es, const ContinuumSpec& spec) {
    const Eigen::Index nb = 2 * spec.L_cells;
    if (es.size() < nb) throw ParameterError("need at least 2 L_cells computed states for the s-band");
    SBand s;
    for (Eigen::Index j = 0; j < nb; ++j) s.indices.push_back(j);
    s.bottom = es.energies(0);
    s.top = es.energies(nb - 1);
    for (Eigen::Index j = 1; j < nb; ++j) s.max_spacing = std::max(s.max_spacing, es.energies(j) - es.energies(j - 1));
    if (es.size() > nb) {
        s.gap = es.energies(nb) - s.top;
        s.gap_found = s.gap > 5.0 * s.max_spacing;
    }
    return s;
}

std::vector<double> cell_weights(ConstVecRef state, const ContinuumSpec& spec) {
    const long N = spec.grid_points();
    const long ppc = spec.points_per_cell();
    if (state.size() != 2 * N) throw ContractError("state does not live on the continuum grid");
    std::vector<double> w(std::size_t(2 * spec.L_cells), 0.0);
    for (long i = 0; i < 2 * N; ++i) {
        long comp = i / N, cell = (i % N) / ppc;
        w[std::size_t(comp * spec.L_cells + cell)] += state(i) * state(i);
    }
    return w;
}

double continuum_tau2(ConstVecRef state, const ContinuumSpec& spec) {
    auto w = cell_weights(state, spec);
    double tot = 0, p2 = 0;
    for (double x : w) {
        tot += x;
        p2 += x * x;
    }
    if (std::abs(tot - 1.0) > 1e-8) throw ContractError("continuum state is not normalized");
    return -std::log(p2) / std::log(double(w.size()));
}

}  // namespace qc
