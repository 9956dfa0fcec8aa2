#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kcq/bits.hpp"
#include "kcq/keystream.hpp"

namespace kcq::qubit {

// M-basis constellation on one Bloch great circle: 2M pure states at Bloch
// angles pi*j/M, j = 0..2M-1; basis j in [0, M) is the antipodal pair
// {pi*j/M, pi*j/M + pi}. Bit values alternate around the circle (basis j
// carries bit b on the state at pi*j/M + pi*((j+b) mod 2)); the mirrored
// convention flips the alternation parity. M = 2 reproduces the four-state
// conjugate-basis set.
struct QubitSignalSet {
    int M = 2;
    bool mirrored = false;

    // Bloch angle of the state carrying bit b in basis j.
    double state_angle(int basis, int bit) const;
    // Hilbert-space angle (half the Bloch angle) of the same state.
    double state_hilbert_angle(int basis, int bit) const;
};

// Eve's projective measurement, oriented on the same great circle and given
// by the Hilbert-space angle of one basis vector, theta in [0, pi).
struct EveMeasurement {
    double theta = 0.0;
};

// Direction and length of the bit-0 mean Bloch vector; the whole fixed-
// measurement analysis reduces to it.
struct BitAxis {
    double r = 0.0;    // magnitude, 1/(M cos(pi/2M)) for the alternating set
    double psi = 0.0;  // Bloch angle
};

BitAxis mean_bit_axis(const QubitSignalSet& set);

// Average bit error of an attacker who measures every qubit at theta and
// decides each bit with the best key-free rule (uniform basis and bit).
// Equals (1 - r|cos(2 theta - psi)|)/2 and tends to 1/2 as M grows.
double eve_collective_error(const QubitSignalSet& set, double theta);
double eve_collective_error(int M, double theta);

// Refinement where the running key is granted after the measurement and the
// bit decision is maximum-likelihood per basis. Never worse than the
// key-free rule; at M = 2 both optima coincide at the Breidbart value.
double eve_keyed_ml_error(const QubitSignalSet& set, double theta);
double eve_keyed_ml_error(int M, double theta);

struct EveOptimum {
    double theta = 0.0;           // optimal Hilbert angle in [0, pi/2)
    double error = 0.0;           // error at the optimum
    double mirrored_theta = 0.0;  // optimum of the mirrored bit assignment
};

// Grid search plus golden-section refinement over theta. The mirrored
// assignment attains the same error at mirrored_theta; at M = 2 that is the
// original optimum rotated by pi/4.
EveOptimum optimize_eve_basis(int M);

// Largest violation of rho_basis = I/2 over all bases (exact 2x2 check of
// ciphertext-only key secrecy).
double basis_average_identity_violation(const QubitSignalSet& set);

// Error of a measurement tilted out of the signal great circle by
// `out_angle`; sanity check that leaving the plane never helps.
double eve_out_of_plane_error(const QubitSignalSet& set, double theta, double out_angle);

// Running-key source for the protocol: either an LFSR on a seed key or the
// blockwise repeat expander.
struct KeyMaterial {
    BitString seed;
    enum class Expander { kLfsr, kRepeat } expander = Expander::kLfsr;
    std::uint64_t poly_mask = 0;   // LFSR connection polynomial (0 = default)
    std::size_t repeat_total = 0;  // total stream length for the repeat form
};

struct QubitTrialReport {
    std::size_t qubits = 0;
    int M = 2;
    double channel_error = 0.0;
    std::uint64_t seed = 0;
    double bob_error_rate = 0.0;
    bool eve_present = false;
    double eve_theta = 0.0;
    double eve_error_rate = 0.0;        // key-free decision rule
    double eve_keyed_error_rate = 0.0;  // key granted after measurement
    double eve_error_analytic = 0.0;
    double eve_keyed_error_analytic = 0.0;
};

// Full protocol Monte Carlo: Alice modulates n random bits with bases drawn
// from the running key (log2 M bits per qubit), Bob measures in the keyed
// basis through a BSC(p_c), Eve (optional) measures a pre-channel copy at a
// fixed angle. Sharded RNG streams make the result a function of (seed,
// shard layout) only.
QubitTrialReport simulate_protocol(std::size_t n, int M, const KeyMaterial& key,
                                   double channel_error,
                                   const std::optional<EveMeasurement>& eve, std::uint64_t seed);

struct RepeatedKeyAttack {
    double success_probability = 0.0;  // 2^-j
    double fraction_exposed = 0.0;     // j/m
};

RepeatedKeyAttack repeated_key_opaque_attack(std::size_t n, std::size_t m, std::size_t j);

struct RepeatedKeyAttackMc {
    double empirical_success = 0.0;
    std::size_t trials = 0;
    std::size_t user_errors_on_hit_blocks = 0;  // stays 0: hits are invisible
};

// Intercept/resend on j blocks of the repeat expander at M = 2.
RepeatedKeyAttackMc repeated_key_attack_mc(std::size_t n, std::size_t m, std::size_t j,
                                           std::size_t trials, std::uint64_t seed);

struct CodeRateWindow {
    double r_low = 0.0;   // 1 - h2(0.15)
    double r_high = 0.0;  // 1 - h2(p_c)
    bool empty = false;
};

// Code-rate window for forward error correction: rates above Eve's capacity
// and below Bob's. Empty once the channel error reaches the 0.15 threshold.
CodeRateWindow code_rate_window(double channel_error);

}  // namespace kcq::qubit
