#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "kcq/coherent.hpp"
#include "kcq/math_util.hpp"

using namespace kcq;
using namespace kcq::coherent;

namespace {

// Independent oracle: integrate the canonical phase density directly on a
// fine theta grid from the Fock expansion.
double phase_error_quadrature(double S, int n_max, int points = 40001) {
    std::vector<double> c(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n)
        c[static_cast<std::size_t>(n)] =
            std::exp(-0.5 * S + 0.5 * n * std::log(S) - 0.5 * std::lgamma(n + 1.0));
    double lo = kPi / 2, hi = kPi;
    double h = (hi - lo) / (points - 1);
    double acc = 0.0;
    for (int i = 0; i < points; ++i) {
        double th = lo + i * h;
        std::complex<double> F{0.0, 0.0};
        for (int n = 0; n <= n_max; ++n)
            F += c[static_cast<std::size_t>(n)] *
                 std::exp(std::complex<double>(0.0, -th * n));
        double val = std::norm(F) / (2 * kPi);
        acc += (i == 0 || i == points - 1) ? 0.5 * val : val;
    }
    return 2.0 * acc * h;
}

}  // namespace

TEST_CASE("optimal binary error: exact and asymptote") {
    CHECK(optimal_binary_error(0.0) == doctest::Approx(0.5));
    // frozen: S = 1 exact vs quarter-exponential asymptote, within 0.5%
    CHECK(optimal_binary_error(1.0) == doctest::Approx(0.004600070369588705).epsilon(1e-12));
    CHECK(optimal_binary_error_asymptote(1.0) ==
          doctest::Approx(0.004578909722183545).epsilon(1e-12));
    CHECK(optimal_binary_error(1.0) / optimal_binary_error_asymptote(1.0) ==
          doctest::Approx(1.0).epsilon(0.005));
    // S = 10 sits at the e^{-40}/4 scale; the stable form must not collapse.
    CHECK(optimal_binary_error(10.0) == doctest::Approx(1.062e-18).epsilon(1e-3));
}

TEST_CASE("heterodyne error: analytic and Monte Carlo") {
    CHECK(heterodyne_binary_error(0.0) == doctest::Approx(0.5));
    CHECK(heterodyne_binary_error(2.0) == doctest::Approx(0.02275013194817922).epsilon(1e-12));
    CHECK(heterodyne_binary_error(10.0) == doctest::Approx(3.872108215522048e-06).epsilon(1e-9));

    auto mc = heterodyne_binary_error_mc(2.0, 1000000, 99);
    CHECK(std::abs(mc.value - 0.02275013194817922) < 3 * mc.sigma);

    // Exponent drifts to 1: -ln Q(sqrt(2S))/S decreasing toward 1.
    double e5 = -std::log(heterodyne_binary_error(5.0)) / 5.0;
    double e40 = -std::log(heterodyne_binary_error(40.0)) / 40.0;
    CHECK(e5 > e40);
    CHECK(e40 == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("canonical phase measurement error") {
    CHECK(phase_measurement_error(0.0, 60) == doctest::Approx(0.5));

    // Fourier-series evaluation against the direct quadrature oracle.
    for (double S : {0.5, 2.0, 4.0}) {
        int n_max = static_cast<int>(10 * S) + 50;
        CHECK(phase_measurement_error(S, n_max) ==
              doctest::Approx(phase_error_quadrature(S, n_max)).epsilon(1e-8));
    }
    // frozen values from the quadrature oracle
    CHECK(phase_measurement_error(2.0, 0) == doctest::Approx(1.268050e-02).epsilon(1e-5));
    CHECK(phase_measurement_error(4.0, 0) == doctest::Approx(8.659388e-04).epsilon(1e-5));
    CHECK(phase_measurement_error(10.0, 0) == doctest::Approx(6.594806e-07).epsilon(1e-5));

    // Inadequate truncation is refused.
    CHECK_THROWS_AS(phase_measurement_error(10.0, 20), std::invalid_argument);
}

TEST_CASE("phase distribution normalization after truncation") {
    // Parseval: the full-circle mass equals the captured Fock weight.
    for (double S : {1.0, 5.0, 10.0}) {
        int n_max = static_cast<int>(10 * S) + 50;
        double mass = 0.0;
        for (int n = 0; n <= n_max; ++n) {
            double c = std::exp(-0.5 * S + 0.5 * n * std::log(S) - 0.5 * std::lgamma(n + 1.0));
            mass += c * c;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("no simulated receiver beats the optimal bound") {
    for (double S : {0.5, 2.0}) {
        auto mc = heterodyne_binary_error_mc(S, 200000, 123);
        CHECK(mc.value + 3 * mc.sigma >= optimal_binary_error(S));
        CHECK(phase_measurement_error(S, 0) >= optimal_binary_error(S));
    }
}

TEST_CASE("phase spread at high energy") {
    // frozen: RMS at S = 25 is 0.101053, i.e. close to 1/(2 alpha0) and of
    // the order 1/alpha0.
    double rms = phase_rms_spread(25.0, 0);
    CHECK(rms == doctest::Approx(0.10105333108744445).epsilon(1e-6));
    double alpha0 = 5.0;
    CHECK(rms * alpha0 > 0.4);
    CHECK(rms * alpha0 < 0.65);
}

TEST_CASE("receiver ordering and the advantage table") {
    for (double S = 0.1; S <= 15.0; S += 0.7) {
        auto row = advantage_table(S);
        CHECK(row.optimal <= row.phase + 1e-12);
        CHECK(row.phase <= row.heterodyne + 1e-12);
    }
    auto z = advantage_table(0.0);
    CHECK(z.optimal == doctest::Approx(0.5));
    CHECK(z.phase == doctest::Approx(0.5));
    CHECK(z.heterodyne == doctest::Approx(0.5));

    // Monotone nonincreasing in S.
    double prev_o = 1, prev_p = 1, prev_h = 1;
    for (double S = 0.1; S <= 15.0; S += 0.5) {
        auto row = advantage_table(S);
        CHECK(row.optimal <= prev_o + 1e-15);
        CHECK(row.phase <= prev_p + 1e-12);
        CHECK(row.heterodyne <= prev_h + 1e-15);
        prev_o = row.optimal;
        prev_p = row.phase;
        prev_h = row.heterodyne;
    }

    // At the energy where the optimal receiver reaches the 1e-12 scale, the
    // error counts per 1e9 bits land at the (~0, ~1e3, ~1e6) orders for
    // (optimal, phase-law, heterodyne-law).
    double anchor = 3.0 * std::log(10.0);
    CHECK(optimal_binary_error_asymptote(anchor) * 1e9 < 1.0);
    CHECK(phase_measurement_error_asymptote(anchor) * 1e9 ==
          doctest::Approx(500.0).epsilon(1e-6));
    CHECK(heterodyne_binary_error_asymptote(anchor) * 1e9 ==
          doctest::Approx(5e5).epsilon(1e-6));
}

TEST_CASE("six dB exponent gap") {
    auto pts = six_db_gap_check({1.0, 3.0, 10.0});
    // frozen: (4S + ln4)/(S + ln2) at S = 10
    CHECK(pts[2].exponent_ratio_asymptotic == doctest::Approx(3.870356749260857).epsilon(1e-12));
    CHECK(pts[2].exponent_ratio_asymptotic > 3.8);
    CHECK(pts[2].exponent_ratio_asymptotic < 4.2);
    // pre-asymptotic point recorded, no window claim
    CHECK(pts[0].exponent_ratio_asymptotic > 0.0);

    // MC heterodyne exponent at S = 3 consistent with the analytic value.
    auto mc = heterodyne_binary_error_mc(3.0, 2000000, 5);
    double analytic = heterodyne_binary_error(3.0);
    CHECK(std::abs(mc.value - analytic) < 3 * mc.sigma);
}

TEST_CASE("ring posterior estimate behaves sensibly") {
    // Large ring, weak energy: the posterior maximum is near uniform 1/M.
    auto weak = ring_posterior_p1_estimate(16, 0.01, 20000, 3);
    CHECK(weak.value == doctest::Approx(1.0 / 16).epsilon(0.05));
    // Strong energy, tiny ring: near certainty.
    auto strong = ring_posterior_p1_estimate(2, 9.0, 20000, 3);
    CHECK(strong.value > 0.99);
    // In between it is a genuine estimate with an error bar.
    auto mid = ring_posterior_p1_estimate(8, 1.0, 50000, 3);
    CHECK(mid.value > 1.0 / 8);
    CHECK(mid.value < 1.0);
    CHECK(mid.sigma > 0.0);
}

TEST_CASE("two-mode realization keeps the energy split") {
    PhaseRingConstellation ring{8, 2.0, true};
    for (int l = 0; l < 8; ++l) {
        auto [a, b] = ring.amplitude(l);
        CHECK(a * a + b * b == doctest::Approx(4.0).epsilon(1e-12));
    }
}
