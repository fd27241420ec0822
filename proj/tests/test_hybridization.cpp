#include <doctest.h>

#include <cmath>

#include "quasicrit/errors.hpp"
#include "quasicrit/hybridization.hpp"

using namespace qc;

TEST_CASE("decoupled model against itself") {
    auto spec = minimal_model(12, 2.0, 0.0);
    auto es0 = diagonalize_decoupled(spec);
    auto es = diagonalize(spec);
    for (const auto& e : overlap_profile(es0, es)) CHECK(e.max_overlap == doctest::Approx(1.0).epsilon(1e-10));
    auto free = minimal_model(12, 0.0, 0.0);  // free chain: +-k pairs are degenerate
    auto prof = overlap_profile(diagonalize_decoupled(free), diagonalize(free));
    bool any_block = false;
    for (const auto& e : prof) {
        CHECK(e.max_overlap == doctest::Approx(1.0).epsilon(1e-10));
        any_block = any_block || e.degenerate;
    }
    CHECK(any_block);
}

TEST_CASE("two-level mixing: Max|C|^2 = cos^2 theta") {
    for (double eps : {0.01, 0.1, 0.4, 2.0}) {
        const double Delta = 1.0;
        Matrix H0(2, 2), H(2, 2);
        H0 << 0, 0, 0, Delta;
        H << 0, eps, eps, Delta;
        auto prof = overlap_profile(diagonalize(H0), diagonalize(H));
        const double theta = 0.5 * std::atan2(2.0 * eps, Delta);
        const double c2 = std::cos(theta) * std::cos(theta);
        for (const auto& e : prof) CHECK(e.max_overlap == doctest::Approx(c2).epsilon(1e-12));
    }
}

TEST_CASE("overlap matrix is orthogonal with unit column sums") {
    auto spec = minimal_model(12, 2.0, 0.1);
    Matrix C = overlap_matrix(diagonalize_decoupled(spec), diagonalize(spec));
    CHECK((C.transpose() * C - Matrix::Identity(C.rows(), C.cols())).cwiseAbs().maxCoeff() < 1e-8);
    Vector sums = C.cwiseAbs2().colwise().sum();
    CHECK((sums.array() - 1.0).abs().maxCoeff() < 1e-10);
    for (const auto& e : overlap_profile(diagonalize_decoupled(spec), diagonalize(spec))) {
        CHECK(e.max_overlap >= 0.0);
        CHECK(e.max_overlap <= 1.0);
    }
    CHECK_THROWS_AS(overlap_matrix(diagonalize(minimal_model(8, 2, 0.1)), diagonalize(spec)), ParameterError);
}

TEST_CASE("stronger coupling does not raise the overlap in the overlapped window") {
    const auto window = abs_window(0.0, 0.67, "C");
    double prev = 2.0;
    for (double tv : {0.01, 0.05, 0.1}) {
        auto spec = minimal_model(14, 2.0, tv);
        double m = window_mean_overlap(overlap_profile(diagonalize_decoupled(spec), diagonalize(spec)), window);
        CHECK(m <= prev);
        prev = m;
    }
}

TEST_CASE("fidelity series at t_v=0 is all ones") {
    auto family = [](int n) { return minimal_model(n, 2.0, 0.0); };
    auto s = fidelity_scaling(family, {8, 9, 10}, {abs_window(0.0, 0.67, "C"), abs_window(2.0, 10.0, "A")});
    REQUIRE(s.size() == 2);
    for (const auto& series : s) {
        CHECK(series.samples.size() == 3);
        for (const auto& p : series.samples) CHECK(p.value == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK_THROWS_AS(fidelity_scaling(family, {8, 9}, {abs_window(0.0, 0.67)}), ParameterError);
    CHECK_THROWS_AS(fidelity_scaling(family, {8, 9, 10}, {interval_window(50, 60)}), EmptyWindowError);
}

TEST_CASE("perturbation bound") {
    CHECK(perturbation_bound(0.0, 1.0, 10.0) == 0.0);
    CHECK(perturbation_bound(0.1, 1.0, 10.0) == doctest::Approx(0.1));
    CHECK_THROWS_AS(perturbation_bound(0.1, 0.0, 10.0), NumericalError);
    CHECK_THROWS_AS(perturbation_bound(0.1, 1.0, 0.5), ParameterError);
}

TEST_CASE("overlap deficit of the localized band stays under the perturbative bound") {
    const double tv = 0.1;
    const auto win = abs_window(2.0, 100.0, "A");
    for (int n = 12; n <= 16; ++n) {
        auto spec = minimal_model(n, 2.0, tv);
        auto loc = diagonalize(spec.chain1);
        auto ext = diagonalize(spec.chain2);
        double dmin = 1e300, west = 0;
        for (Eigen::Index j = 0; j < loc.size(); ++j) {
            if (!win.contains(loc.energies(j))) continue;
            for (Eigen::Index k = 0; k < ext.size(); ++k)
                dmin = std::min(dmin, std::abs(loc.energies(j) - ext.energies(k)));
            west = std::max(west, 1.0 / loc.states.col(j).cwiseAbs2().maxCoeff());
        }
        double deficit = 1.0 - window_mean_overlap(overlap_profile(diagonalize_decoupled(spec), diagonalize(spec)), win);
        CHECK(deficit >= 0.0);
        CHECK(deficit < 5.0 * perturbation_bound(tv, dmin, west));
    }
}

TEST_CASE("band detection and overlap windows") {
    Vector a(6), b(5);
    a << -3.0, -2.9, -2.8, 1.0, 1.1, 1.2;
    b << -2.85, -2.5, 0.0, 1.05, 1.5;
    auto bands = spectral_bands(a, 0.15);
    REQUIRE(bands.size() == 2);
    CHECK(bands[0] == std::make_pair(-3.0, -2.8));
    CHECK(bands[1] == std::make_pair(1.0, 1.2));
    auto w = overlap_window(a, b, 0.55, "ov");
    CHECK(w.label == "ov");
    REQUIRE(w.intervals.size() == 2);
    CHECK(w.intervals[0].first == -2.85);
    CHECK(w.intervals[0].second == -2.8);
    CHECK(w.intervals[1].first == 1.05);
    CHECK(w.intervals[1].second == 1.2);
}
