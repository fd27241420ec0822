#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "quasicrit/spectral.hpp"

namespace qc {

using Complex = std::complex<double>;

// Free chain (hopping 1) resolvent on the infinite line. |E| > 2: decaying real
// branch with G(0) > 0 for E > 2. |E| < 2: retarded limit E + i0.
Complex green_analytic(double E, long d);

// (1/L) sum_k e^{ik(m-n)} / (E + i eta - 2 cos k), k = 2 pi k'/L. eta < 0 picks the
// default: 1e-3 inside the band, 0 outside.
Complex green_numeric(double E, long m, long n, long L, double eta = -1);

struct SelfEnergy {
    std::vector<double> values;  // 1/(E - V_m), +inf where E == V_m exactly
    std::vector<long> resonant_sites;  // |E - V_m| < eps
    std::vector<long> singular_sites;  // E == V_m
    double max_abs = 0;                // over finite values
};

SelfEnergy self_energy_diag(double E, const ChainSpec& chain, double eps = 0.01);

// Pure on-site chain with uniform draws on [-V/2, V/2]; the seed is mandatory.
ChainSpec random_onsite_chain(int n, double V, std::uint64_t seed, double J = 0.0);

// || (H1 + Hc (E - H2)^-1 Hc^T - E) v || / ||v||, v the chain-1 block of state j.
double projected_residual(const CoupledModelSpec& spec, const EigenSystem& es, Eigen::Index j);

struct GreenRow {
    double E;
    long d;
    Complex G;
    std::string tag;
    double eta;
};
void write_green_csv(const std::string& path, const std::vector<GreenRow>& rows, const std::vector<std::string>& provenance);

}  // namespace qc
