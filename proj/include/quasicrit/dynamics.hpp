#pragma once

#include <string>
#include <vector>

#include "quasicrit/spectral.hpp"

namespace qc {

enum class ChainSel { Loc, Ext };  // Loc = chain1 block, Ext = chain2 block

struct PacketSpec {
    double m0 = -1;     // negative selects floor(L_chain / 2)
    double sigma = 5.0;
    ChainSel target = ChainSel::Loc;
};

// Signed ring displacement of m from m0 mapped into (-L/2, L/2].
double ring_displacement(double m, double m0, std::int64_t L);

CVector gaussian_packet(const PacketSpec& spec, const CoupledModelSpec& model);
double packet_center(const PacketSpec& spec, std::int64_t L_chain);

// Standard deviation of P(m) = sum over chains of |psi_{m,mu}|^2, coordinates unwrapped around m0.
// psi holds `chains` consecutive blocks of L_chain sites.
double width(const CVector& psi, std::int64_t L_chain, double m0, int chains = 2);

struct SpreadOptions {
    double t_max = 500.0;
    double t_min = 1.0;
    int points = 60;
    double fit_lo = -1;  // negative: t_max / 30
    double fit_hi = -1;  // negative: t_max / 3
};

struct SpreadTrace {
    std::vector<double> t;
    std::vector<double> W;
    double W0 = 0;
    double kappa = 0;
    double prefactor = 0;  // W ~ prefactor * t^kappa
    double residual = 0;
    double fit_lo = 0, fit_hi = 0;
    std::size_t fit_points = 0;
    bool reflection = false;
    double max_W = 0;
    double norm_drift = 0;
    double energy_drift = 0;
};

// Log-log least squares on the points with t in [lo, hi].
struct LogFit {
    double slope = 0, intercept = 0, residual = 0;
    std::size_t points = 0;
};
LogFit loglog_fit(const std::vector<double>& t, const std::vector<double>& W, double lo, double hi);

SpreadTrace spread_exponent(const CoupledModelSpec& model, const PacketSpec& packet, const SpreadOptions& opt);
SpreadTrace spread_exponent(const CoupledModelSpec& model, const EigenSystem& es, const PacketSpec& packet,
                            const SpreadOptions& opt);

void write_trace_csv(const std::string& path, const SpreadTrace& tr, const std::vector<std::string>& provenance);
void write_trace_sidecar(const std::string& path, const SpreadTrace& tr, const std::vector<std::string>& provenance);

}  // namespace qc
