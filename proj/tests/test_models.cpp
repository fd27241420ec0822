#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "quasicrit/errors.hpp"
#include "quasicrit/spectral.hpp"

using namespace qc;

namespace {

// Independent assembly straight from the site formulas, dense loops, no helpers.
Matrix brute_minimal(int L, int Fprev, double V, double tv) {
    const double pi = std::numbers::pi;
    Matrix H = Matrix::Zero(2 * L, 2 * L);
    for (int m = 0; m < L; ++m) {
        int r = (m + 1) % L;
        H(m, r) += 1.0;
        H(r, m) += 1.0;
        H(L + m, L + r) += 1.0;
        H(L + r, L + m) += 1.0;
        H(m, m) = 2.0 * V * std::cos(2.0 * pi * double(Fprev) / double(L) * m);
        H(m, L + m) += tv;
        H(L + m, m) += tv;
    }
    return H;
}

}  // namespace

TEST_CASE("fibonacci approximants") {
    auto a = fibonacci_approximant(15);
    CHECK(a.F_n == 610);
    CHECK(a.F_prev == 377);
    CHECK(a.beta == doctest::Approx(377.0 / 610.0).epsilon(1e-15));
    auto b = fibonacci_approximant(18);
    CHECK(b.F_n == 2584);
    CHECK(b.F_prev == 1597);
    auto c = fibonacci_approximant(3);
    CHECK(c.F_n == 2);
    CHECK(c.beta == 0.5);
    CHECK(fibonacci_approximant(20).F_n == 6765);
    CHECK(2 * fibonacci_approximant(20).F_n == 13530);
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int n = 3; n <= 30; ++n) {
        auto f = fibonacci_approximant(n);
        CHECK(std::abs(f.beta - golden) < 1.0 / double(f.F_n * f.F_n));
        CHECK(std::gcd(f.F_n, f.F_prev) == 1);
    }
    CHECK_THROWS_AS(fibonacci_approximant(2), ParameterError);
}

TEST_CASE("potential values") {
    ChainSpec c = free_chain(10);
    c.potential = pot::AAH{1.0, 0.0};
    CHECK(potential_value(c, 0) == doctest::Approx(2.0));
    c.potential = pot::Mosaic{1.0, 0.0};
    CHECK(potential_value(c, 1) == 0.0);
    c.potential = pot::GAAH{1.0, 0.5, 0.0};
    CHECK(potential_value(c, 0) == doctest::Approx(4.0));
    c.potential = pot::GAAH{1.0, 1.0, 0.0};
    CHECK_THROWS_AS(validate(c), ParameterError);
    c.potential = pot::GAAH{1.0, -1.2, 0.0};
    CHECK_THROWS_AS(build_single_chain(c), ParameterError);
}

// Sites are numbered from 0, so the odd sites carry the zeros: floor(L/2) of them.
TEST_CASE("mosaic sparsity: every odd site is zero") {
    for (int n : {6, 7, 11, 12}) {
        ChainSpec c = free_chain(n);
        c.potential = pot::Mosaic{1.1, 0.3};
        auto v = onsite_sequence(c);
        long zeros = std::count(v.begin(), v.end(), 0.0);
        CHECK(zeros == c.length() / 2);
        for (std::size_t m = 1; m < v.size(); m += 2) CHECK(v[m] == 0.0);
    }
}

TEST_CASE("minimal model matches brute-force assembly at n=6") {
    auto spec = minimal_model(6, 2.0, 0.1);
    REQUIRE(spec.chain_length() == 8);
    Matrix H = build_hamiltonian(spec);
    Matrix B = brute_minimal(8, 5, 2.0, 0.1);
    REQUIRE(H.rows() == 16);
    CHECK((H - B).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("symmetry is exact and t_v=0 decouples the blocks") {
    std::vector<CoupledModelSpec> specs = {minimal_model(9, 1.3, 0.0), soc_model(9, 2.3, 1.0 / 3.0, 0.0),
                                           dual_coupled_model(9, 2.0, 2.0, 0.0)};
    auto s = minimal_model(9, 1.3, 0.2);
    s.coupling = couple::RungPlusCross{0.0};
    specs.push_back(s);
    for (const auto& sp : specs) {
        Matrix H = build_hamiltonian(sp);
        CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
        auto L = sp.chain_length();
        CHECK(H.topRightCorner(L, L).cwiseAbs().maxCoeff() == 0.0);
    }
    for (auto c : {CouplingKind{couple::Rung{0.3}}, CouplingKind{couple::RungPlusCross{0.3}},
                   CouplingKind{couple::AntisymmetricCross{0.3}}}) {
        auto sp = minimal_model(8, 2.0, 0.3);
        sp.coupling = c;
        Matrix H = build_hamiltonian(sp);
        CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(H.topRightCorner(21, 21).cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("free chains: plane-wave spectra") {
    CoupledModelSpec two{free_chain(3), free_chain(3), couple::Rung{0.0}};
    two.chain1.approximant = two.chain2.approximant = plain_ring(4);
    auto e = diagonalize(build_hamiltonian(two)).energies;
    std::vector<double> want = {-2, -2, 0, 0, 0, 0, 2, 2};
    for (int i = 0; i < 8; ++i) CHECK(e(i) == doctest::Approx(want[std::size_t(i)]).epsilon(1e-12));

    const double tv = 0.3;
    CoupledModelSpec rung{free_chain(8), free_chain(8), couple::Rung{tv}};
    auto er = diagonalize(build_hamiltonian(rung)).energies;
    std::vector<double> ref;
    for (int k = 0; k < 21; ++k)
        for (double s : {-1.0, 1.0}) ref.push_back(2.0 * std::cos(2.0 * std::numbers::pi * k / 21.0) + s * tv);
    std::sort(ref.begin(), ref.end());
    for (int i = 0; i < 42; ++i) CHECK(std::abs(er(i) - ref[std::size_t(i)]) < 1e-12);

    ChainSpec five = free_chain(3);
    five.approximant = plain_ring(5);
    auto e5 = diagonalize(five).energies;
    std::vector<double> r5;
    for (int k = 0; k < 5; ++k) r5.push_back(2.0 * std::cos(2.0 * std::numbers::pi * k / 5.0));
    std::sort(r5.begin(), r5.end());
    for (int i = 0; i < 5; ++i) CHECK(std::abs(e5(i) - r5[std::size_t(i)]) < 1e-12);
}

TEST_CASE("aubry duality at n=10 and n=12") {
    auto c = aah_chain(10, 1.0, 2.0);
    auto d = dual_partner(c);
    auto* dh = std::get_if<hop::Nearest>(&d.hopping);
    auto* dp = std::get_if<pot::AAH>(&d.potential);
    REQUIRE(dh);
    REQUIRE(dp);
    CHECK(dh->J == 2.0);
    CHECK(dp->V == 1.0);
    auto self = dual_partner(aah_chain(10, 1.0, 1.0));
    CHECK(describe(self) == describe(aah_chain(10, 1.0, 1.0)));
    for (int n : {10, 12}) {
        auto e1 = diagonalize(aah_chain(n, 1.0, 2.0)).energies;
        auto e2 = diagonalize(dual_partner(aah_chain(n, 1.0, 2.0))).energies;
        CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK_THROWS_AS(dual_partner(aah_chain(10, 1.0, 2.0, 0.4)), ParameterError);
}

TEST_CASE("long-range hopping uses ring distance") {
    ChainSpec c;
    c.approximant = fibonacci_approximant(8);  // 21 sites
    c.hopping = hop::ExponentialLongRange{1.0, 4.0};
    Matrix H = build_single_chain(c);
    CHECK(H(0, 2) == doctest::Approx(std::exp(-8.0)).epsilon(1e-12));
    CHECK(H(0, 2) == doctest::Approx(3.35e-4).epsilon(2e-3));
    CHECK(H(0, 20) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
    CHECK(H(3, 17) == doctest::Approx(std::exp(-4.0 * 7)).epsilon(1e-12));
}

TEST_CASE("mobility edge predicates") {
    CHECK(gaah_edge_linear_form(1.5, 0.5) == doctest::Approx(-2.0));
    CHECK(gaah_edge_sign_form(1.0, 1.5, 0.5) == doctest::Approx(-4.0));
    // a E < 2 - 2V is the extended side
    CHECK(gaah_extended_linear_form(-2.1, 1.5, 0.5));
    CHECK_FALSE(gaah_extended_linear_form(-1.9, 1.5, 0.5));
    CHECK(mosaic_edge(1.1) == doctest::Approx(1.0 / 2.2));
    CHECK(mosaic_extended(0.3, 1.1));
    CHECK_FALSE(mosaic_extended(0.6, 1.1));
}

TEST_CASE("spec hash is stable and parameter sensitive") {
    auto a = minimal_model(12, 2.0, 0.1), b = minimal_model(12, 2.0, 0.1), c = minimal_model(12, 2.0, 0.1000001);
    CHECK(spec_hash(a) == spec_hash(b));
    CHECK(spec_hash(a) != spec_hash(c));
    CHECK(fnv1a64("") == 14695981039346656037ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("mismatched approximants are rejected") {
    CoupledModelSpec s{aah_chain(10, 1, 2), free_chain(11), couple::Rung{0.1}};
    CHECK_THROWS_AS(build_hamiltonian(s), ParameterError);
    ChainSpec bad = free_chain(6);
    bad.potential = pot::Sampled{{1.0, 2.0}};
    CHECK_THROWS_AS(validate(bad), ParameterError);
}
