#include "kcq/cppm.hpp"

#include <algorithm>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "kcq/keystream.hpp"
#include "kcq/math_util.hpp"
#include "kcq/rng.hpp"

namespace kcq::cppm {

namespace {

constexpr int kMaxModes = 1024;

void check_modes(int N) {
    if (N < 2 || N > kMaxModes || !is_power_of_two(static_cast<std::uint64_t>(N)))
        throw std::invalid_argument("N must be a power of two in [2, 1024]");
}

// ln I0(x), stable for large arguments.
double log_bessel_i0(double x) {
    x = std::abs(x);
    if (x < 20.0) return std::log(boost::math::cyl_bessel_i(0.0, x));
    // I0(x) ~ e^x / sqrt(2 pi x) (1 + 1/(8x) + 9/(128 x^2))
    return x - 0.5 * std::log(2.0 * kPi * x) + std::log1p(1.0 / (8.0 * x) + 9.0 / (128.0 * x * x));
}

// Fold arbitrary key bits into a nonzero 63-bit LFSR seed.
BitString fold_key(const BitString& key) {
    BitString seed(63, 0);
    for (std::size_t i = 0; i < key.size(); ++i) seed[i % 63] ^= key[i];
    if (all_zero(seed)) seed[0] = 1;
    return seed;
}

struct Givens {
    int i;
    double c, s, phr, phi;  // cos, sin, Re/Im of the phase factor
};

}  // namespace

Unitary build_scrambler(const BitString& key, int N) {
    check_modes(N);
    if (key.empty()) throw std::invalid_argument("empty scrambler key");
    keystream::Lfsr expand(fold_key(key), keystream::default_poly(63));

    std::size_t n = static_cast<std::size_t>(N);
    Unitary U(n * n, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) U[i * n + i] = {1.0, 0.0};

    auto angle16 = [&](double span) {
        return span * static_cast<double>(expand.next_uint(16)) / 65536.0;
    };
    auto rotate = [&](std::size_t a, std::size_t b) {
        double theta = angle16(kPi / 2.0);
        double phase = angle16(2.0 * kPi);
        double c = std::cos(theta), s = std::sin(theta);
        std::complex<double> e{std::cos(phase), std::sin(phase)};
        for (std::size_t col = 0; col < n; ++col) {
            std::complex<double> ua = U[a * n + col];
            std::complex<double> ub = U[b * n + col];
            U[a * n + col] = c * ua + s * e * ub;
            U[b * n + col] = -s * std::conj(e) * ua + c * ub;
        }
    };

    // Beam-splitter network analog: a butterfly of log2(N) keyed Givens
    // layers (every output couples to every input) after which each mode
    // picks up a keyed phase.
    for (std::size_t stride = 1; stride < n; stride <<= 1)
        for (std::size_t base = 0; base < n; base += 2 * stride)
            for (std::size_t k = 0; k < stride; ++k) rotate(base + k, base + k + stride);
    for (std::size_t i = 0; i < n; ++i) {
        double phase = angle16(2.0 * kPi);
        std::complex<double> e{std::cos(phase), std::sin(phase)};
        for (std::size_t col = 0; col < n; ++col) U[i * n + col] *= e;
    }
    return U;
}

CppmConstellation::CppmConstellation(int N, double S, const BitString& key)
    : N_(N), S_(S), U_(build_scrambler(key, N)) {
    if (!(S >= 0.0)) throw std::domain_error("energy must be nonnegative");
    n_ = int_log2(static_cast<std::uint64_t>(N));
}

std::vector<std::complex<double>> CppmConstellation::scrambled_signal(int message) const {
    if (message < 0 || message >= N_) throw std::invalid_argument("message out of range");
    std::size_t n = static_cast<std::size_t>(N_);
    std::vector<std::complex<double>> v(n);
    double a = std::sqrt(S_);
    for (std::size_t r = 0; r < n; ++r) v[r] = a * U_[r * n + static_cast<std::size_t>(message)];
    return v;
}

double CppmConstellation::unitarity_defect() const {
    std::size_t n = static_cast<std::size_t>(N_);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            std::complex<double> dot{0.0, 0.0};
            for (std::size_t r = 0; r < n; ++r) dot += std::conj(U_[r * n + i]) * U_[r * n + j];
            if (i == j) dot -= 1.0;
            worst = std::max(worst, std::abs(dot));
        }
    }
    return worst;
}

double direct_detection_error(int N, double S) {
    check_modes(N);
    if (!(S >= 0.0)) throw std::domain_error("energy must be nonnegative");
    return (1.0 - 1.0 / static_cast<double>(N)) * std::exp(-S);
}

McEstimate bob_direct_detect_mc(int N, double S, std::size_t trials, std::uint64_t seed) {
    check_modes(N);
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    std::size_t errors = 0;
    constexpr std::size_t kShard = 1 << 16;
    std::size_t shards = (trials + kShard - 1) / kShard;
    for (std::size_t s = 0; s < shards; ++s) {
        auto rng = shard_rng(seed, s);
        std::poisson_distribution<int> counts(S);
        std::uniform_int_distribution<int> guess(0, N - 1);
        std::uniform_int_distribution<int> msg(0, N - 1);
        std::size_t lo = s * kShard, hi = std::min(trials, lo + kShard);
        for (std::size_t t = lo; t < hi; ++t) {
            int i = msg(rng);
            // After unscrambling, only mode i can click.
            int clicks = S > 0.0 ? counts(rng) : 0;
            int decision = clicks > 0 ? i : guess(rng);
            errors += (decision != i);
        }
    }
    McEstimate e;
    e.trials = trials;
    e.value = static_cast<double>(errors) / static_cast<double>(trials);
    e.sigma = std::sqrt(std::max(e.value * (1.0 - e.value), 1e-300) / static_cast<double>(trials));
    return e;
}

EveShot EveHeterodyneAttack::attack(int message, std::mt19937_64& rng, bool key_granted_after) const {
    const auto& c = *c_;
    std::size_t n = static_cast<std::size_t>(c.N());
    std::normal_distribution<double> noise(0.0, std::sqrt(0.5));

    auto signal = c.scrambled_signal(message);
    std::vector<std::complex<double>> y(n);
    for (std::size_t m = 0; m < n; ++m)
        y[m] = signal[m] + std::complex<double>(noise(rng), noise(rng));

    std::vector<double> env(n);
    if (key_granted_after) {
        // z = U^dagger y; envelopes of the unscrambled record.
        const auto& U = c.scrambler();
        for (std::size_t m = 0; m < n; ++m) {
            std::complex<double> z{0.0, 0.0};
            for (std::size_t r = 0; r < n; ++r) z += std::conj(U[r * n + m]) * y[r];
            env[m] = std::abs(z);
        }
    } else {
        for (std::size_t m = 0; m < n; ++m) env[m] = std::abs(y[m]);
    }

    EveShot shot;
    shot.decision = static_cast<int>(
        std::distance(env.begin(), std::max_element(env.begin(), env.end())));
    // Posterior under the random-global-phase model: p(m|y) ~ I0(2 sqrt(S) |z_m|).
    double a = 2.0 * std::sqrt(c.S());
    std::vector<double> ll(n);
    double lmax = -1e300;
    for (std::size_t m = 0; m < n; ++m) {
        ll[m] = log_bessel_i0(a * env[m]);
        lmax = std::max(lmax, ll[m]);
    }
    double norm = 0.0;
    shot.posterior.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
        shot.posterior[m] = std::exp(ll[m] - lmax);
        norm += shot.posterior[m];
    }
    for (auto& p : shot.posterior) p /= norm;
    return shot;
}

McEstimate eve_heterodyne_error_mc(int N, double S, std::size_t trials, std::uint64_t seed,
                                   bool use_scrambler, const BitString& key) {
    check_modes(N);
    if (trials == 0) throw std::invalid_argument("need at least one trial");

    std::size_t errors = 0;
    if (use_scrambler) {
        CppmConstellation c(N, S, key.empty() ? bits_from_uint(0x5eedULL, 16) : key);
        EveHeterodyneAttack eve(c);
        constexpr std::size_t kShard = 1 << 10;
        std::size_t shards = (trials + kShard - 1) / kShard;
        for (std::size_t s = 0; s < shards; ++s) {
            auto rng = shard_rng(seed, s);
            std::uniform_int_distribution<int> msg(0, N - 1);
            std::size_t lo = s * kShard, hi = std::min(trials, lo + kShard);
            for (std::size_t t = lo; t < hi; ++t) {
                int i = msg(rng);
                errors += (eve.attack(i, rng).decision != i);
            }
        }
    } else {
        // The unscrambled record z = sqrt(S) e_i + noise has the same law as
        // the full path; skip the O(N^2) transform.
        double a = std::sqrt(S);
        constexpr std::size_t kShard = 1 << 12;
        std::size_t shards = (trials + kShard - 1) / kShard;
        for (std::size_t s = 0; s < shards; ++s) {
            auto rng = shard_rng(seed, s);
            std::normal_distribution<double> noise(0.0, std::sqrt(0.5));
            std::uniform_int_distribution<int> msg(0, N - 1);
            std::size_t lo = s * kShard, hi = std::min(trials, lo + kShard);
            for (std::size_t t = lo; t < hi; ++t) {
                int i = msg(rng);
                double best = -1.0;
                int arg = 0;
                for (int m = 0; m < N; ++m) {
                    double re = noise(rng), im = noise(rng);
                    if (m == i) re += a;
                    double e2 = re * re + im * im;
                    if (e2 > best) {
                        best = e2;
                        arg = m;
                    }
                }
                errors += (arg != i);
            }
        }
    }
    McEstimate e;
    e.trials = trials;
    e.value = static_cast<double>(errors) / static_cast<double>(trials);
    e.sigma = std::sqrt(std::max(e.value * (1.0 - e.value), 1e-300) / static_cast<double>(trials));
    return e;
}

double eve_heterodyne_error_analytic(int N, double S) {
    check_modes(N);
    if (N <= 32) {
        // Alternating-sign expansion of E[(1 - e^{-V})^{N-1}] for the
        // noncentral envelope V.
        double pc = 0.0;
        double logc = 0.0;  // log C(N-1, k) built incrementally
        for (int k = 0; k < N; ++k) {
            if (k > 0) logc += std::log(static_cast<double>(N - k)) - std::log(static_cast<double>(k));
            double term = std::exp(logc - S * static_cast<double>(k) / (k + 1.0)) / (k + 1.0);
            pc += (k % 2 == 0) ? term : -term;
        }
        return 1.0 - pc;
    }
    // Quadrature over the envelope energy v with density e^{-(v+S)} I0(2 sqrt(Sv)).
    double hi = std::max(std::log(static_cast<double>(N)) + 40.0,
                         (std::sqrt(S) + 10.0) * (std::sqrt(S) + 10.0));
    const int steps = 20000;
    double h = hi / steps;
    double pc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double v = i * h;
        double lpdf = -(v + S) + (v > 0 && S > 0 ? log_bessel_i0(2.0 * std::sqrt(S * v)) : 0.0);
        double lsur = static_cast<double>(N - 1) * (v > 0 ? std::log1p(-std::exp(-v)) : -1e300);
        double f = std::exp(lpdf + lsur);
        double w = (i == 0 || i == steps) ? 0.5 : 1.0;
        pc += w * f;
    }
    pc *= h;
    return 1.0 - pc;
}

double heterodyne_error_lower_bound(int n, double S, double y) {
    if (n < 1 || n > 40) throw std::invalid_argument("n must lie in [1, 40]");
    if (!(S >= 0.0)) throw std::domain_error("energy must be nonnegative");
    double ln_phi = std::log(normal_cdf(y));
    double count = std::exp2(static_cast<double>(n)) - 1.0;
    double first = -std::expm1(count * ln_phi);
    return first * normal_cdf(y - std::sqrt(2.0 * S));
}

BoundMaximum heterodyne_error_lower_bound_max(int n, double S) {
    BoundMaximum best;
    double yhi = std::sqrt(2.0 * static_cast<double>(n)) + 4.0;
    for (double y = -3.0; y <= yhi; y += 1e-3) {
        double v = heterodyne_error_lower_bound(n, S, y);
        if (v > best.value) {
            best.value = v;
            best.y = y;
        }
    }
    return best;
}

FlatProfileReport flat_profile_test(int N, double S, std::size_t trials, std::uint64_t seed) {
    check_modes(N);
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    double a = std::sqrt(S);
    double bessel_scale = 2.0 * a;

    std::vector<std::size_t> wrong_counts(static_cast<std::size_t>(N), 0);
    std::vector<double> avg_posterior(static_cast<std::size_t>(N), 0.0);
    std::size_t errors = 0;

    constexpr std::size_t kShard = 1 << 12;
    std::size_t shards = (trials + kShard - 1) / kShard;
    std::vector<double> env(static_cast<std::size_t>(N)), ll(static_cast<std::size_t>(N));
    for (std::size_t s = 0; s < shards; ++s) {
        auto rng = shard_rng(seed, s);
        std::normal_distribution<double> noise(0.0, std::sqrt(0.5));
        std::uniform_int_distribution<int> msg(0, N - 1);
        std::size_t lo = s * kShard, hi = std::min(trials, lo + kShard);
        for (std::size_t t = lo; t < hi; ++t) {
            int i = msg(rng);
            double best = -1.0;
            int arg = 0;
            for (int m = 0; m < N; ++m) {
                double re = noise(rng), im = noise(rng);
                if (m == i) re += a;
                env[static_cast<std::size_t>(m)] = std::sqrt(re * re + im * im);
                if (env[static_cast<std::size_t>(m)] > best) {
                    best = env[static_cast<std::size_t>(m)];
                    arg = m;
                }
            }
            if (arg != i) {
                ++errors;
                wrong_counts[static_cast<std::size_t>((arg - i + N) % N)] += 1;
            }
            double lmax = -1e300;
            for (int m = 0; m < N; ++m) {
                ll[static_cast<std::size_t>(m)] = log_bessel_i0(bessel_scale * env[static_cast<std::size_t>(m)]);
                lmax = std::max(lmax, ll[static_cast<std::size_t>(m)]);
            }
            double norm = 0.0;
            for (int m = 0; m < N; ++m) {
                ll[static_cast<std::size_t>(m)] = std::exp(ll[static_cast<std::size_t>(m)] - lmax);
                norm += ll[static_cast<std::size_t>(m)];
            }
            for (int m = 0; m < N; ++m)
                avg_posterior[static_cast<std::size_t>((m - i + N) % N)] +=
                    ll[static_cast<std::size_t>(m)] / norm;
        }
    }

    double expected = static_cast<double>(errors) / static_cast<double>(N - 1);
    if (expected < 5.0)
        throw std::invalid_argument("not enough error events for the uniformity test");

    FlatProfileReport rep;
    rep.trials = trials;
    rep.error_events = errors;
    double chi2 = 0.0;
    for (int m = 1; m < N; ++m) {
        double d = static_cast<double>(wrong_counts[static_cast<std::size_t>(m)]) - expected;
        chi2 += d * d / expected;
    }
    rep.chi_square = chi2;
    // One wrong message leaves zero degrees of freedom: trivially uniform.
    rep.p_value = N == 2 ? 1.0 : boost::math::gamma_q(0.5 * static_cast<double>(N - 2), 0.5 * chi2);

    for (auto& v : avg_posterior) v /= static_cast<double>(trials);
    rep.posterior_p1 = avg_posterior[0];
    double mean = 0.0, mx = 0.0;
    for (int m = 1; m < N; ++m) mean += avg_posterior[static_cast<std::size_t>(m)];
    mean /= static_cast<double>(N - 1);
    for (int m = 1; m < N; ++m)
        mx = std::max(mx, std::abs(avg_posterior[static_cast<std::size_t>(m)] - mean) / mean);
    rep.posterior_wrong_mean = mean;
    rep.posterior_wrong_max_rel_dev = mx;
    return rep;
}

KeygenRateReport keygen_rate(int N, double S, std::size_t trials, std::uint64_t seed) {
    check_modes(N);
    KeygenRateReport r;
    r.N = N;
    r.bits_per_use = static_cast<double>(int_log2(static_cast<std::uint64_t>(N)));
    r.bob_error = bob_direct_detect_mc(N, S, trials, seed).value;
    r.eve_error = eve_heterodyne_error_mc(N, S, trials, mix64(seed)).value;
    return r;
}

}  // namespace kcq::cppm
