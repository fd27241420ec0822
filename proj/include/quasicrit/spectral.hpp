#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "quasicrit/models.hpp"

namespace qc {

using CVector = Eigen::VectorXcd;

struct ModelTag {
    std::uint64_t hash = 0;
    int n = 0;
};

// Columns of `states` are eigenvectors, matching `energies` (ascending).
struct EigenSystem {
    Vector energies;
    Matrix states;
    ModelTag tag;

    Eigen::Index dimension() const { return states.rows(); }
    Eigen::Index size() const { return energies.size(); }
};

// Solves a fixed 256x256 problem once and checks the residual. Some OpenBLAS
// builds pick a faulty AVX-512 kernel; diagonalize() refuses to run on those.
bool lapack_healthy();

// Full dense solve (Householder tridiagonalization + divide and conquer).
EigenSystem diagonalize(const Matrix& H, ModelTag tag = {});
// Lowest `count` eigenpairs of the full operator (MRRR on the tridiagonal form).
EigenSystem diagonalize_lowest(const Matrix& H, Eigen::Index count, ModelTag tag = {});

EigenSystem diagonalize(const CoupledModelSpec& spec);
EigenSystem diagonalize(const ChainSpec& spec);
// t_v = 0 solve done block by block; same basis layout as build_hamiltonian.
EigenSystem diagonalize_decoupled(const CoupledModelSpec& spec);

// First component with |v_i| > 1e-8 made positive, column by column.
void fix_signs(Matrix& states);

std::vector<Eigen::Index> states_in_window(const EigenSystem& es, double Emin, double Emax);

double gram_deviation(const EigenSystem& es);

class Propagator {
public:
    Propagator(const EigenSystem& es, const CVector& psi0);
    CVector at(double t) const;
    // Sum_j |<psi_j|psi0>|^2
    double completeness() const { return coeff_.squaredNorm(); }
    double energy() const;

private:
    const EigenSystem& es_;
    CVector coeff_;
};

CVector spectral_propagate(const EigenSystem& es, const CVector& psi0, double t);

// Binary cache: magic, version, dim, count, spec hash, energies, row-major states,
// all little-endian 64-bit.
void save_eigensystem(const EigenSystem& es, const std::string& path);
EigenSystem load_eigensystem(const std::string& path);

}  // namespace qc
