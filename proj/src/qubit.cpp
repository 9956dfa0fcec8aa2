#include "kcq/qubit.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "kcq/math_util.hpp"
#include "kcq/rng.hpp"

namespace kcq::qubit {

namespace {

void check_set(const QubitSignalSet& set) {
    if (set.M < 2 || set.M % 2 != 0) throw std::invalid_argument("M must be even and >= 2");
}

// Running-key stream shared by the simulation paths.
class RunningKey {
  public:
    RunningKey(const KeyMaterial& key) {
        if (key.expander == KeyMaterial::Expander::kLfsr) {
            std::uint64_t poly = key.poly_mask
                                     ? key.poly_mask
                                     : keystream::default_poly(static_cast<int>(key.seed.size()));
            lfsr_.emplace(key.seed, poly);
        } else {
            fixed_ = keystream::repeat_expand(key.seed, key.repeat_total).stream;
        }
    }

    std::uint8_t next() {
        if (lfsr_) return lfsr_->next_bit();
        if (pos_ >= fixed_.size()) throw std::runtime_error("running key exhausted");
        return fixed_[pos_++];
    }

    int next_index(int bits) {
        int v = 0;
        for (int i = 0; i < bits; ++i) v |= static_cast<int>(next()) << i;
        return v;
    }

  private:
    std::optional<keystream::Lfsr> lfsr_;
    BitString fixed_;
    std::size_t pos_ = 0;
};

constexpr std::size_t kShardSize = 1 << 14;

}  // namespace

double QubitSignalSet::state_angle(int basis, int bit) const {
    check_set(*this);
    if (basis < 0 || basis >= M || (bit != 0 && bit != 1)) throw std::invalid_argument("bad basis/bit");
    int parity = (basis + bit) & 1;
    double a = kPi * static_cast<double>(basis) / static_cast<double>(M) +
               kPi * static_cast<double>(parity);
    // The mirrored convention is the reflection of the circle; at M = 2 it
    // reproduces the other textbook bit assignment of the four-state set.
    if (mirrored) a = 2.0 * kPi - a;
    return std::fmod(a, 2.0 * kPi);
}

double QubitSignalSet::state_hilbert_angle(int basis, int bit) const {
    return 0.5 * state_angle(basis, bit);
}

BitAxis mean_bit_axis(const QubitSignalSet& set) {
    check_set(set);
    std::complex<double> sum{0.0, 0.0};
    for (int j = 0; j < set.M; ++j) {
        double a = set.state_angle(j, 0);
        sum += std::complex<double>(std::cos(a), std::sin(a));
    }
    sum /= static_cast<double>(set.M);
    return BitAxis{std::abs(sum), std::arg(sum)};
}

double eve_collective_error(const QubitSignalSet& set, double theta) {
    BitAxis axis = mean_bit_axis(set);
    return 0.5 * (1.0 - axis.r * std::abs(std::cos(2.0 * theta - axis.psi)));
}

double eve_collective_error(int M, double theta) {
    return eve_collective_error(QubitSignalSet{M, false}, theta);
}

double eve_keyed_ml_error(const QubitSignalSet& set, double theta) {
    check_set(set);
    // Per basis the two hypotheses are antipodal; the ML error given the
    // basis is (1 - |cos(basis angle - measurement angle)|)/2, independent
    // of the bit assignment.
    double sum = 0.0;
    for (int j = 0; j < set.M; ++j) {
        double basis_angle = kPi * static_cast<double>(j) / static_cast<double>(set.M);
        sum += std::abs(std::cos(basis_angle - 2.0 * theta));
    }
    return 0.5 - sum / (2.0 * static_cast<double>(set.M));
}

double eve_keyed_ml_error(int M, double theta) {
    return eve_keyed_ml_error(QubitSignalSet{M, false}, theta);
}

EveOptimum optimize_eve_basis(int M) {
    QubitSignalSet set{M, false};
    check_set(set);
    auto f = [&](double theta) { return eve_collective_error(set, theta); };

    const int grid = 512;
    double best_theta = 0.0, best = 1.0;
    for (int i = 0; i < grid; ++i) {
        double t = (kPi / 2.0) * static_cast<double>(i) / grid;
        double e = f(t);
        if (e < best) {
            best = e;
            best_theta = t;
        }
    }
    // Golden-section refinement around the best grid cell.
    double a = best_theta - kPi / grid, b = best_theta + kPi / grid;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int it = 0; it < 200; ++it) {
        if (f(c) < f(d))
            b = d;
        else
            a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    EveOptimum opt;
    opt.theta = std::fmod(0.5 * (a + b) + kPi / 2.0, kPi / 2.0);
    opt.error = f(opt.theta);

    // The mirrored assignment is the reflection of the circle, so its
    // optimum sits at the reflected angle with identical error.
    double mt = std::fmod(kPi / 2.0 - opt.theta, kPi / 2.0);
    opt.mirrored_theta = mt < 0 ? mt + kPi / 2.0 : mt;
    return opt;
}

double basis_average_identity_violation(const QubitSignalSet& set) {
    check_set(set);
    double worst = 0.0;
    for (int j = 0; j < set.M; ++j) {
        // rho = (|psi0><psi0| + |psi1><psi1|)/2 in the real great-circle
        // plane; Bloch components must vanish.
        double a0 = set.state_angle(j, 0), a1 = set.state_angle(j, 1);
        double bx = 0.5 * (std::cos(a0) + std::cos(a1));
        double bz = 0.5 * (std::sin(a0) + std::sin(a1));
        worst = std::max(worst, std::max(std::abs(bx), std::abs(bz)));
    }
    return worst;
}

double eve_out_of_plane_error(const QubitSignalSet& set, double theta, double out_angle) {
    // Tilting the measurement axis out of the plane scales the in-plane
    // projection by cos(out_angle); the error can only move toward 1/2.
    BitAxis axis = mean_bit_axis(set);
    double c = axis.r * std::abs(std::cos(2.0 * theta - axis.psi)) * std::abs(std::cos(out_angle));
    return 0.5 * (1.0 - c);
}

QubitTrialReport simulate_protocol(std::size_t n, int M, const KeyMaterial& key,
                                   double channel_error,
                                   const std::optional<EveMeasurement>& eve,
                                   std::uint64_t seed) {
    QubitSignalSet set{M, false};
    check_set(set);
    if (!(channel_error >= 0.0 && channel_error < 0.5))
        throw std::invalid_argument("channel error must lie in [0, 0.5)");
    if (!is_power_of_two(static_cast<std::uint64_t>(M)))
        throw std::invalid_argument("simulation requires M to be a power of two");
    int bits_per_qubit = int_log2(static_cast<std::uint64_t>(M));

    // The running key is consumed sequentially up front so that shard layout
    // cannot change which basis a qubit gets.
    RunningKey rk(key);
    std::vector<std::uint8_t> basis_index(n);
    for (std::size_t i = 0; i < n; ++i)
        basis_index[i] = static_cast<std::uint8_t>(rk.next_index(bits_per_qubit));

    BitAxis axis = mean_bit_axis(set);

    QubitTrialReport rep;
    rep.qubits = n;
    rep.M = M;
    rep.channel_error = channel_error;
    rep.seed = seed;
    rep.eve_present = eve.has_value();
    if (eve) {
        rep.eve_theta = eve->theta;
        rep.eve_error_analytic = eve_collective_error(set, eve->theta);
        rep.eve_keyed_error_analytic = eve_keyed_ml_error(set, eve->theta);
    }

    std::size_t bob_errors = 0, eve_errors = 0, eve_keyed_errors = 0;
    std::size_t shards = (n + kShardSize - 1) / kShardSize;
    for (std::size_t s = 0; s < shards; ++s) {
        auto rng = shard_rng(seed, s);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::size_t lo = s * kShardSize, hi = std::min(n, lo + kShardSize);
        for (std::size_t i = lo; i < hi; ++i) {
            int j = basis_index[i];
            int alice_bit = static_cast<int>(rng() & 1u);

            // Bob's keyed measurement recovers the bit exactly; the channel
            // is a BSC on top.
            int bob_bit = alice_bit;
            if (channel_error > 0.0 && unit(rng) < channel_error) bob_bit ^= 1;
            bob_errors += (bob_bit != alice_bit);

            if (eve) {
                double phi = set.state_hilbert_angle(j, alice_bit);
                double c = std::cos(eve->theta - phi);
                int outcome = (unit(rng) < c * c) ? 0 : 1;  // 0: projector at theta
                // Key-free rule: align the outcome with the mean bit axis.
                double axis_c = std::cos(2.0 * eve->theta - axis.psi);
                int guess = (outcome == 0) == (axis_c > 0.0) ? 0 : 1;
                eve_errors += (guess != alice_bit);
                // Key granted after the measurement: ML between the two
                // states of basis j.
                double p0 = std::cos(eve->theta - set.state_hilbert_angle(j, 0));
                double p1 = std::cos(eve->theta - set.state_hilbert_angle(j, 1));
                double l0 = outcome == 0 ? p0 * p0 : 1.0 - p0 * p0;
                double l1 = outcome == 0 ? p1 * p1 : 1.0 - p1 * p1;
                int keyed_guess = l0 >= l1 ? 0 : 1;
                eve_keyed_errors += (keyed_guess != alice_bit);
            }
        }
    }

    rep.bob_error_rate = static_cast<double>(bob_errors) / static_cast<double>(n);
    if (eve) {
        rep.eve_error_rate = static_cast<double>(eve_errors) / static_cast<double>(n);
        rep.eve_keyed_error_rate = static_cast<double>(eve_keyed_errors) / static_cast<double>(n);
    }
    return rep;
}

RepeatedKeyAttack repeated_key_opaque_attack(std::size_t n, std::size_t m, std::size_t j) {
    if (m == 0 || n % m != 0) throw std::invalid_argument("m must divide n");
    if (j < 1 || j > m) throw std::invalid_argument("j must lie in [1, m]");
    RepeatedKeyAttack a;
    a.success_probability = std::exp2(-static_cast<double>(j));
    a.fraction_exposed = static_cast<double>(j) / static_cast<double>(m);
    return a;
}

RepeatedKeyAttackMc repeated_key_attack_mc(std::size_t n, std::size_t m, std::size_t j,
                                           std::size_t trials, std::uint64_t seed) {
    if (m == 0 || n % m != 0) throw std::invalid_argument("m must divide n");
    if (j < 1 || j > m) throw std::invalid_argument("j must lie in [1, m]");
    QubitSignalSet set{2, false};
    std::size_t block = n / m;

    RepeatedKeyAttackMc out;
    out.trials = trials;
    std::size_t successes = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        auto rng = shard_rng(seed, t);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        bool all_hit = true;
        std::size_t hit_block_errors = 0;
        // Eve targets the first j blocks; each block reuses one key bit.
        for (std::size_t b = 0; b < j; ++b) {
            int true_basis = static_cast<int>(rng() & 1u);
            int guess_basis = static_cast<int>(rng() & 1u);
            bool hit = guess_basis == true_basis;
            all_hit = all_hit && hit;
            for (std::size_t i = 0; i < block; ++i) {
                int alice_bit = static_cast<int>(rng() & 1u);
                double phi = set.state_hilbert_angle(true_basis, alice_bit);
                // Eve measures in her guessed basis and resends the outcome
                // state; Bob measures in the true basis.
                double c = std::cos(set.state_hilbert_angle(guess_basis, 0) - phi);
                int eve_outcome_bit = (unit(rng) < c * c) ? 0 : 1;
                double resent = set.state_hilbert_angle(guess_basis, eve_outcome_bit);
                double cb = std::cos(set.state_hilbert_angle(true_basis, 0) - resent);
                int bob_bit = (unit(rng) < cb * cb) ? 0 : 1;
                if (hit && bob_bit != alice_bit) ++hit_block_errors;
            }
        }
        successes += all_hit;
        out.user_errors_on_hit_blocks += hit_block_errors;
    }
    out.empirical_success = static_cast<double>(successes) / static_cast<double>(trials);
    return out;
}

CodeRateWindow code_rate_window(double channel_error) {
    if (!(channel_error >= 0.0 && channel_error < 0.5))
        throw std::invalid_argument("channel error must lie in [0, 0.5)");
    CodeRateWindow w;
    w.r_low = 1.0 - binary_entropy(0.15);
    w.r_high = 1.0 - binary_entropy(channel_error);
    w.empty = !(channel_error < 0.15);
    return w;
}

}  // namespace kcq::qubit
