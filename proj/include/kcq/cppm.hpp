#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "kcq/bits.hpp"

namespace kcq::cppm {

using Unitary = std::vector<std::complex<double>>;  // row-major N x N

// N-mode coherent pulse-position constellation: message i puts a coherent
// pulse of energy S in mode i; a keyed unitary (beam-splitter network
// analog) scrambles the modes. The transmitter's global optical phase is
// uniformly random per use, so an attacker's matched filter works on
// envelopes.
class CppmConstellation {
  public:
    // N must be a power of two, N <= 1024. The scrambler is derived
    // deterministically from the key bits through the keystream expander.
    CppmConstellation(int N, double S, const BitString& key);

    int N() const { return N_; }
    int n_bits() const { return n_; }
    double S() const { return S_; }
    const Unitary& scrambler() const { return U_; }

    // Scrambled amplitude vector of message i (column i of U times sqrt(S)).
    std::vector<std::complex<double>> scrambled_signal(int message) const;

    // Worst deviation of U^dagger U from the identity.
    double unitarity_defect() const;

  private:
    int N_ = 0;
    int n_ = 0;
    double S_ = 0.0;
    Unitary U_;
};

// Keyed unitary alone (exposed for tests).
Unitary build_scrambler(const BitString& key, int N);

// Bob unscrambles and direct-detects: the signal mode counts Poisson(S),
// every other mode is dark. Block error (1 - 1/N) e^{-S}.
double direct_detection_error(int N, double S);

struct McEstimate {
    double value = 0.0;
    double sigma = 0.0;
    std::size_t trials = 0;
};

McEstimate bob_direct_detect_mc(int N, double S, std::size_t trials, std::uint64_t seed);

// One heterodyne attack: Eve heterodynes every mode (unit total variance
// per mode), is granted the key afterwards, unscrambles her record and
// picks the largest matched-filter envelope. Returns the decision and her
// posterior over messages given the outcome.
struct EveShot {
    int decision = 0;
    std::vector<double> posterior;
};

class EveHeterodyneAttack {
  public:
    explicit EveHeterodyneAttack(const CppmConstellation& c) : c_(&c) {}

    EveShot attack(int message, std::mt19937_64& rng, bool key_granted_after = true) const;

  private:
    const CppmConstellation* c_;
};

// Block error of the heterodyne attack. `use_scrambler` runs the full
// scramble/heterodyne/unscramble path; otherwise the algebraically
// identical unscrambled-noise shortcut is used (the unitary maps the iid
// noise to iid noise).
McEstimate eve_heterodyne_error_mc(int N, double S, std::size_t trials, std::uint64_t seed,
                                   bool use_scrambler = false, const BitString& key = {});

// Closed-form block error of the envelope receiver on N orthogonal coherent
// pulses: 1 - sum_k C(N-1,k)(-1)^k e^{-Sk/(k+1)}/(k+1) for moderate N,
// quadrature beyond that.
double eve_heterodyne_error_analytic(int N, double S);

// Orthogonal-signal lower bound on any coherent-detection heterodyne
// receiver: (1 - Phi(y)^(2^n - 1)) Phi(y - sqrt(2S)) for any y.
double heterodyne_error_lower_bound(int n, double S, double y);

// Grid maximum of the bound over y (grid includes y beyond sqrt(2n)).
struct BoundMaximum {
    double y = 0.0;
    double value = 0.0;
};
BoundMaximum heterodyne_error_lower_bound_max(int n, double S);

// Chi-square uniformity test of Eve's wrong decisions over the N-1 wrong
// messages, plus the flatness of her averaged posterior off the true
// message.
struct FlatProfileReport {
    std::size_t trials = 0;
    std::size_t error_events = 0;
    double chi_square = 0.0;
    double p_value = 0.0;
    double posterior_p1 = 0.0;              // averaged posterior on the truth
    double posterior_wrong_mean = 0.0;      // mean posterior mass per wrong message
    double posterior_wrong_max_rel_dev = 0.0;
};

FlatProfileReport flat_profile_test(int N, double S, std::size_t trials, std::uint64_t seed);

// Key generation rate log2 N, with measured error rates of both receivers.
struct KeygenRateReport {
    int N = 0;
    double bits_per_use = 0.0;
    double bob_error = 0.0;
    double eve_error = 0.0;
};

KeygenRateReport keygen_rate(int N, double S, std::size_t trials, std::uint64_t seed);

}  // namespace kcq::cppm
