#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct FibonacciApproximant {
    int n = 0;              // 0 marks a plain ring that is not a Fibonacci size
    std::int64_t F_n = 0;   // sites per chain
    std::int64_t F_prev = 0;
    double beta = 0.0;      // F_prev / F_n
};

FibonacciApproximant fibonacci_approximant(int n);
// Ring of arbitrary length; beta only matters for quasiperiodic potentials.
FibonacciApproximant plain_ring(std::int64_t L, double beta = 0.0);

namespace pot {
struct None {};
struct AAH { double V = 0; double phi = 0; };
struct GAAH { double V = 0; double a = 0; double phi = 0; };
struct Mosaic { double V = 0; double phi = 0; };
// lambda * cos(pi * beta * m^nu), 0 < nu < 1
struct SlowVarying { double lambda = 0; double nu = 0.5; };
struct Sampled { std::vector<double> values; };
}  // namespace pot

using PotentialKind = std::variant<pot::None, pot::AAH, pot::GAAH, pot::Mosaic, pot::SlowVarying, pot::Sampled>;

namespace hop {
struct Nearest { double J = 1.0; int sign = 1; };
// J0 exp(-p d) between all pairs, d the ring distance
struct ExponentialLongRange { double J0 = 1.0; double p = 1.0; };
}  // namespace hop

using HoppingKind = std::variant<hop::Nearest, hop::ExponentialLongRange>;

struct ChainSpec {
    HoppingKind hopping = hop::Nearest{};
    PotentialKind potential = pot::None{};
    int potential_sign = 1;
    double mu = 0.0;
    FibonacciApproximant approximant;

    std::int64_t length() const { return approximant.F_n; }
};

namespace couple {
struct Rung { double t_v = 0; };
struct RungPlusCross { double t_v = 0; };
struct AntisymmetricCross { double t_v = 0; };
}  // namespace couple

using CouplingKind = std::variant<couple::Rung, couple::RungPlusCross, couple::AntisymmetricCross>;

double coupling_strength(const CouplingKind& c);
CouplingKind with_strength(const CouplingKind& c, double t_v);

// chain1 occupies indices [0, L), chain2 occupies [L, 2L).
struct CoupledModelSpec {
    ChainSpec chain1;
    ChainSpec chain2;
    CouplingKind coupling = couple::Rung{};

    std::int64_t chain_length() const { return chain1.length(); }
    std::int64_t dimension() const { return 2 * chain1.length(); }
};

void validate(const ChainSpec& spec);
void validate(const CoupledModelSpec& spec);

double potential_value(const ChainSpec& spec, std::int64_t m);
std::vector<double> onsite_sequence(const ChainSpec& spec);

Matrix build_single_chain(const ChainSpec& spec);
Matrix build_hamiltonian(const CoupledModelSpec& spec);

// (J, V) -> (V, J) for a nearest-neighbour AAH chain at phi = 0.
ChainSpec dual_partner(const ChainSpec& spec);

// Canonical text form; stable across runs, used for hashing and cache keys.
std::string describe(const ChainSpec& spec);
std::string describe(const CoupledModelSpec& spec);
std::uint64_t spec_hash(const CoupledModelSpec& spec);
std::uint64_t spec_hash(const ChainSpec& spec);

// Convenience constructors for the models used throughout.
ChainSpec aah_chain(int n, double J, double V, double phi = 0.0);
ChainSpec free_chain(int n, double J = 1.0);
CoupledModelSpec minimal_model(int n, double V, double t_v);
CoupledModelSpec dual_coupled_model(int n, double J, double V, double t_v);
CoupledModelSpec soc_model(int n, double V, double lambda, double t_so);

// Mobility edges of the bounded GAAH chain (hopping J): both published forms.
double gaah_edge_sign_form(double J, double V, double a);  // a E = 2 sign(|J| - |V|)
double gaah_edge_linear_form(double V, double a);          // a E = 2 - 2V, J = 1
bool gaah_extended_linear_form(double E, double V, double a);
double mosaic_edge(double V);                              // |E_c| = 1/(2V), J = 1
bool mosaic_extended(double E, double V);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace qc
