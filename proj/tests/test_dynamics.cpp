#include <doctest.h>

#include <cmath>

#include "quasicrit/dynamics.hpp"
#include "quasicrit/errors.hpp"

using namespace qc;

TEST_CASE("ring displacement lands in (-L/2, L/2]") {
    CHECK(ring_displacement(9, 1, 10) == -2.0);
    CHECK(ring_displacement(6, 1, 10) == 5.0);
    CHECK(ring_displacement(0, 5, 10) == 5.0);
    CHECK(ring_displacement(3, 3, 10) == 0.0);
    CHECK(ring_displacement(0, 4, 9) == -4.0);
}

TEST_CASE("gaussian packets") {
    auto model = minimal_model(15, 2.0, 0.1);  // 610 sites per chain
    PacketSpec sharp;
    sharp.sigma = 1e-6;
    auto p = gaussian_packet(sharp, model);
    CHECK(std::abs(p(305) - 1.0) < 1e-15);
    CHECK(p.norm() == doctest::Approx(1.0));
    CHECK(p.cwiseAbs2().sum() - std::norm(p(305)) < 1e-15);

    PacketSpec wide;
    auto g = gaussian_packet(wide, model);
    CHECK(std::abs(g.norm() - 1.0) < 1e-12);
    double inside = 0;
    for (int m = 305 - 20; m <= 305 + 20; ++m) inside += std::norm(g(m));
    CHECK(inside > 0.9999);

    PacketSpec ext = wide;
    ext.target = ChainSel::Ext;
    auto e = gaussian_packet(ext, model);
    CHECK(g.head(610).norm() == doctest::Approx(1.0));
    CHECK(g.tail(610).norm() == 0.0);
    CHECK(e.head(610).norm() == 0.0);
    CHECK(std::abs(g.dot(e)) == 0.0);

    PacketSpec bad;
    bad.sigma = -1.0;
    CHECK_THROWS_AS(gaussian_packet(bad, model), ParameterError);
    bad.sigma = 5.0;
    bad.m0 = 700;
    CHECK_THROWS_AS(gaussian_packet(bad, model), ParameterError);
}

TEST_CASE("width examples") {
    CVector one = CVector::Zero(20);
    one(4) = 1.0;
    CHECK(width(one, 10, 4) == 0.0);
    CVector two = CVector::Zero(20);
    two(0) = two(2) = std::sqrt(0.5);
    CHECK(width(two, 10, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CVector split = CVector::Zero(20);
    split(0) = split(12) = std::sqrt(0.5);  // same site on both chains plus one step
    CHECK(width(split, 10, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(width(two * 2.0, 10, 1), ContractError);
    CHECK_THROWS_AS(width(two, 7, 1), ContractError);
}

// amplitude exp(-d^2/(2 sigma^2)) gives a probability of width sigma/sqrt(2)
TEST_CASE("initial width against the direct discretized sum") {
    auto model = minimal_model(14, 2.0, 0.1);
    PacketSpec p;
    auto psi = gaussian_packet(p, model);
    double z = 0, s2 = 0;
    for (int d = -100; d <= 100; ++d) {
        double w = std::exp(-double(d * d) / 25.0);
        z += w;
        s2 += w * d * d;
    }
    const double direct = std::sqrt(s2 / z);
    const double W0 = width(psi, model.chain_length(), packet_center(p, model.chain_length()));
    CHECK(std::abs(W0 / direct - 1.0) < 0.02);
    CHECK(W0 == doctest::Approx(5.0 / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("log-log slope is invariant under W -> cW") {
    std::vector<double> t, W, cW;
    for (int i = 0; i < 40; ++i) {
        double ti = std::pow(10.0, 0.05 * i);
        t.push_back(ti);
        W.push_back(1.7 * std::pow(ti, 0.43) * (1.0 + 0.05 * std::sin(3.0 * i)));
        cW.push_back(13.0 * W.back());
    }
    auto a = loglog_fit(t, W, 2.0, 50.0);
    auto b = loglog_fit(t, cW, 2.0, 50.0);
    CHECK(std::abs(a.slope - b.slope) < 1e-12);
    CHECK(std::abs(a.residual - b.residual) < 1e-12);
    CHECK(b.intercept - a.intercept == doctest::Approx(std::log(13.0)));
    CHECK_THROWS_AS(loglog_fit(t, W, 0.5, 50.0), ParameterError);
    CHECK_THROWS_AS(loglog_fit(t, W, 2.0, 2.05), ParameterError);
}

TEST_CASE("free chain spreads ballistically: kappa = 1 over [10, 100] at n=16") {
    auto model = minimal_model(16, 0.0, 0.0);
    PacketSpec p;
    p.sigma = 1e-6;
    SpreadOptions o;
    o.t_max = 100.0;
    o.fit_lo = 10.0;
    o.fit_hi = 100.0;
    auto tr = spread_exponent(model, p, o);
    CHECK(std::abs(tr.kappa - 1.0) < 0.03);
    CHECK(tr.max_W < 0.4 * double(model.chain_length()));
    CHECK_FALSE(tr.reflection);
    CHECK(tr.norm_drift < 1e-8);
    CHECK(tr.energy_drift < 1e-8);
    CHECK(tr.W0 == 0.0);
    for (double w : tr.W) CHECK(w >= 0.0);
}

TEST_CASE("deep localized chain does not spread") {
    CoupledModelSpec model{aah_chain(14, 1.0, 4.0), free_chain(14), couple::Rung{0.0}};
    auto tr = spread_exponent(model, PacketSpec{}, SpreadOptions{});
    CHECK(tr.kappa < 0.05);
    CHECK(tr.norm_drift < 1e-8);
    CHECK(tr.energy_drift < 1e-8);
    CHECK(tr.t.size() == 60);
    CHECK(tr.t.front() == 1.0);
    CHECK(tr.t.back() == 500.0);
    CHECK(tr.fit_lo == doctest::Approx(500.0 / 30.0));
    CHECK(tr.fit_hi == doctest::Approx(500.0 / 3.0));
}
