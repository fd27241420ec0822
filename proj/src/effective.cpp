#include "quasicrit/effective.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "quasicrit/csv.hpp"
#include "quasicrit/errors.hpp"

namespace qc {

Complex green_analytic(double E, long d) {
    if (std::abs(std::abs(E) - 2.0) < 1e-14) throw ParameterError("G(E) has a branch point at |E| = 2");
    if (d < 0) d = -d;
    if (std::abs(E) > 2.0) {
        const double s = std::copysign(std::sqrt(E * E - 4.0), E);
        const double z = (E - s) / 2.0;  // |z| < 1
        return std::pow(z, double(d)) / s;
    }
    const double s = std::sqrt(4.0 - E * E);
    const Complex z(E / 2.0, -s / 2.0);
    return Complex(0.0, -1.0 / s) * std::pow(z, double(d));
}

Complex green_numeric(double E, long m, long n, long L, double eta) {
    if (L < 1) throw ParameterError("ring length must be positive");
    if (eta < 0) eta = std::abs(E) < 2.0 ? 1e-3 : 0.0;
    const double pi = std::numbers::pi;
    Complex sum = 0;
    for (long k = 0; k < L; ++k) {
        const double q = 2.0 * pi * double(k) / double(L);
        const double Ek = 2.0 * std::cos(q);
        if (eta == 0.0 && std::abs(E - Ek) < 1e-9)
            throw NumericalError("resolvent pole: E=" + fmt_num(E) + " coincides with plane wave k=" + std::to_string(k) +
                                 " (E_k=" + fmt_num(Ek) + ")");
        sum += std::polar(1.0, q * double(m - n)) / Complex(E - Ek, eta);
    }
    return sum / double(L);
}

SelfEnergy self_energy_diag(double E, const ChainSpec& chain, double eps) {
    validate(chain);
    SelfEnergy out;
    const auto V = onsite_sequence(chain);
    out.values.resize(V.size());
    for (std::size_t m = 0; m < V.size(); ++m) {
        const double den = E - V[m];
        if (den == 0.0) {
            out.values[m] = std::numeric_limits<double>::infinity();
            out.singular_sites.push_back(long(m));
        } else {
            out.values[m] = 1.0 / den;
            out.max_abs = std::max(out.max_abs, std::abs(out.values[m]));
        }
        if (std::abs(den) < eps) out.resonant_sites.push_back(long(m));
    }
    return out;
}

ChainSpec random_onsite_chain(int n, double V, std::uint64_t seed, double J) {
    ChainSpec c;
    c.hopping = hop::Nearest{J, 1};
    c.approximant = fibonacci_approximant(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-V / 2.0, V / 2.0);
    pot::Sampled s;
    s.values.resize(std::size_t(c.length()));
    for (auto& v : s.values) v = dist(rng);
    c.potential = std::move(s);
    return c;
}

double projected_residual(const CoupledModelSpec& spec, const EigenSystem& es, Eigen::Index j) {
    const Matrix H = build_hamiltonian(spec);
    const auto L = Eigen::Index(spec.chain_length());
    const double E = es.energies(j);
    const Matrix H1 = H.topLeftCorner(L, L);
    const Matrix H2 = H.bottomRightCorner(L, L);
    const Matrix Hc = H.topRightCorner(L, L);
    const Matrix G = (E * Matrix::Identity(L, L) - H2).inverse();
    const Vector v = es.states.col(j).head(L);
    if (v.norm() < 1e-12) throw NumericalError("state has no weight on chain 1");
    const Vector r = (H1 + Hc * G * Hc.transpose()) * v - E * v;
    return r.norm() / v.norm();
}

void write_green_csv(const std::string& path, const std::vector<GreenRow>& rows, const std::vector<std::string>& provenance) {
    CsvWriter w(path);
    for (const auto& p : provenance) w.comment(p);
    w.header({"E", "d", "re_G", "im_G", "kind", "eta"});
    for (const auto& r : rows)
        w.row({fmt_num(r.E), std::to_string(r.d), fmt_num(r.G.real()), fmt_num(r.G.imag()), r.tag, fmt_num(r.eta)});
}

}  // namespace qc
