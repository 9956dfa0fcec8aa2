#include "kcq/coherent.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>
#include <stdexcept>

#include "kcq/math_util.hpp"
#include "kcq/rng.hpp"

namespace kcq::coherent {

namespace {

void check_energy(double S) {
    if (!(S >= 0.0)) throw std::domain_error("energy must be nonnegative");
}

// Log Fock coefficients of |alpha|, alpha = sqrt(S): c_n = e^{-S/2} S^{n/2} / sqrt(n!).
std::vector<double> fock_coefficients(double S, int n_max) {
    std::vector<double> c(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        double ln = -0.5 * S + 0.5 * static_cast<double>(n) * std::log(S > 0 ? S : 1.0) -
                    0.5 * std::lgamma(static_cast<double>(n) + 1.0);
        c[static_cast<std::size_t>(n)] = S > 0 ? std::exp(ln) : (n == 0 ? 1.0 : 0.0);
    }
    return c;
}

void check_truncation(double S, int n_max) {
    if (n_max < 1) throw std::invalid_argument("Fock cutoff must be positive");
    // P(Poisson(S) > n_max) = gamma_p(n_max + 1, S); keep it below 1e-12.
    double tail = S > 0 ? boost::math::gamma_p(static_cast<double>(n_max + 1), S) : 0.0;
    if (tail > 1e-12) throw std::invalid_argument("Fock truncation leaves tail mass above 1e-12");
}

int default_cutoff(double S) { return static_cast<int>(10.0 * S) + 50; }

// Autocorrelations A_k = sum_n c_n c_{n+k} of the Fock coefficients; the
// canonical phase density is (1 + 2 sum_k A_k cos(k theta)) / (2 pi).
std::vector<double> phase_autocorr(const std::vector<double>& c) {
    std::size_t n = c.size();
    std::vector<double> A(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) s += c[i] * c[i + k];
        A[k] = s;
    }
    return A;
}

}  // namespace

std::pair<double, double> PhaseRingConstellation::amplitude(int l) const {
    if (M < 2 || M % 2 != 0) throw std::invalid_argument("M must be even and >= 2");
    double th = 2.0 * kPi * static_cast<double>(l) / static_cast<double>(M);
    // Single mode: (Re, Im) of alpha0 e^{i theta}. Two modes: the real
    // amplitudes (alpha0 cos, alpha0 sin). Numerically the same pair, and
    // the energies add to S either way.
    return {alpha0 * std::cos(th), alpha0 * std::sin(th)};
}

double optimal_binary_error(double S) {
    check_energy(S);
    // (1 - sqrt(1 - x))/2 written as x/(2(1 + sqrt(1-x))) so the small-x
    // branch keeps full precision.
    double x = std::exp(-4.0 * S);
    return 0.5 * x / (1.0 + std::sqrt(1.0 - x));
}

double optimal_binary_error_asymptote(double S) {
    check_energy(S);
    return 0.25 * std::exp(-4.0 * S);
}

double heterodyne_binary_error(double S) {
    check_energy(S);
    return normal_tail(std::sqrt(2.0 * S));
}

double heterodyne_binary_error_asymptote(double S) {
    check_energy(S);
    return 0.5 * std::exp(-S);
}

McEstimate heterodyne_binary_error_mc(double S, std::size_t trials, std::uint64_t seed) {
    check_energy(S);
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    double a = std::sqrt(S);
    std::size_t errors = 0;
    constexpr std::size_t kShard = 1 << 16;
    std::size_t shards = (trials + kShard - 1) / kShard;
    for (std::size_t s = 0; s < shards; ++s) {
        auto rng = shard_rng(seed, s);
        std::normal_distribution<double> noise(0.0, std::sqrt(0.5));
        std::size_t lo = s * kShard, hi = std::min(trials, lo + kShard);
        for (std::size_t i = lo; i < hi; ++i) {
            double re = a + noise(rng);
            noise(rng);  // imaginary quadrature, irrelevant to the sign rule
            errors += (re < 0.0);
        }
    }
    McEstimate e;
    e.trials = trials;
    e.value = static_cast<double>(errors) / static_cast<double>(trials);
    e.sigma = std::sqrt(std::max(e.value * (1.0 - e.value), 1e-300) / static_cast<double>(trials));
    return e;
}

double phase_measurement_error(double S, int n_max) {
    check_energy(S);
    if (n_max <= 0) n_max = default_cutoff(S);
    check_truncation(S, n_max);
    if (S == 0.0) return 0.5;  // vacuum: uniform phase
    auto c = fock_coefficients(S, n_max);
    auto A = phase_autocorr(c);
    // Mass at |theta| > pi/2: 1/2 - (2/pi) sum_{k odd} (-1)^((k-1)/2) A_k / k.
    double sum = 0.0;
    for (std::size_t k = 1; k < A.size(); k += 2) {
        double sign = ((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
        sum += sign * A[k] / static_cast<double>(k);
    }
    double err = 0.5 - (2.0 / kPi) * sum;
    return std::max(0.0, err);
}

double phase_measurement_error_asymptote(double S) {
    check_energy(S);
    return 0.5 * std::exp(-2.0 * S);
}

double phase_rms_spread(double S, int n_max) {
    check_energy(S);
    if (n_max <= 0) n_max = default_cutoff(S);
    check_truncation(S, n_max);
    if (S == 0.0) return kPi / std::sqrt(3.0);
    auto c = fock_coefficients(S, n_max);
    auto A = phase_autocorr(c);
    // Second moment: pi^2/3 + 4 sum_k (-1)^k A_k / k^2.
    double var = kPi * kPi / 3.0;
    for (std::size_t k = 1; k < A.size(); ++k) {
        double sign = k % 2 == 0 ? 1.0 : -1.0;
        var += 4.0 * sign * A[k] / (static_cast<double>(k) * static_cast<double>(k));
    }
    return std::sqrt(std::max(0.0, var));
}

AdvantageRow advantage_table(double S, int n_max) {
    AdvantageRow row;
    row.S = S;
    row.optimal = optimal_binary_error(S);
    row.phase = phase_measurement_error(S, n_max);
    row.heterodyne = heterodyne_binary_error(S);
    row.optimal_per_1e9 = row.optimal * 1e9;
    row.phase_per_1e9 = row.phase * 1e9;
    row.heterodyne_per_1e9 = row.heterodyne * 1e9;
    return row;
}

std::vector<GapPoint> six_db_gap_check(const std::vector<double>& S_grid) {
    std::vector<GapPoint> out;
    out.reserve(S_grid.size());
    for (double S : S_grid) {
        GapPoint g;
        g.S = S;
        g.exponent_ratio_asymptotic =
            -std::log(optimal_binary_error_asymptote(S)) / -std::log(heterodyne_binary_error_asymptote(S));
        g.exponent_ratio_exact =
            -std::log(optimal_binary_error(S)) / -std::log(heterodyne_binary_error(S));
        out.push_back(g);
    }
    return out;
}

McEstimate ring_posterior_p1_estimate(int M, double S, std::size_t trials, std::uint64_t seed) {
    if (M < 2 || M % 2 != 0) throw std::invalid_argument("M must be even and >= 2");
    check_energy(S);
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    PhaseRingConstellation ring{M, std::sqrt(S), false};

    double sum = 0.0, sumsq = 0.0;
    constexpr std::size_t kShard = 1 << 14;
    std::size_t shards = (trials + kShard - 1) / kShard;
    std::size_t done = 0;
    for (std::size_t s = 0; s < shards; ++s) {
        auto rng = shard_rng(seed, s);
        std::normal_distribution<double> noise(0.0, std::sqrt(0.5));
        std::uniform_int_distribution<int> pick(0, M - 1);
        std::size_t lo = s * kShard, hi = std::min(trials, lo + kShard);
        for (std::size_t t = lo; t < hi; ++t) {
            auto [ax, ay] = ring.amplitude(pick(rng));
            double yx = ax + noise(rng), yy = ay + noise(rng);
            // Posterior over the ring under the unit-total-variance Gaussian.
            double best = -1.0, norm = 0.0;
            double lmax = -1e300;
            std::vector<double> ll(static_cast<std::size_t>(M));
            for (int l = 0; l < M; ++l) {
                auto [bx, by] = ring.amplitude(l);
                double d2 = (yx - bx) * (yx - bx) + (yy - by) * (yy - by);
                ll[static_cast<std::size_t>(l)] = -d2;
                lmax = std::max(lmax, -d2);
            }
            for (int l = 0; l < M; ++l) {
                double w = std::exp(ll[static_cast<std::size_t>(l)] - lmax);
                norm += w;
                best = std::max(best, w);
            }
            double p1 = best / norm;
            sum += p1;
            sumsq += p1 * p1;
            ++done;
        }
    }
    McEstimate e;
    e.trials = done;
    e.value = sum / static_cast<double>(done);
    double var = sumsq / static_cast<double>(done) - e.value * e.value;
    e.sigma = std::sqrt(std::max(var, 0.0) / static_cast<double>(done));
    return e;
}

}  // namespace kcq::coherent
