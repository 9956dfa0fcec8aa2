#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace kcq::coherent {

// Phase-ring constellation: M coherent states of energy S = alpha0^2 at
// angles 2*pi*l/M, single-mode or two-mode (cos/sin split) realization.
// Opposite states form an antipodal keying pair; there are M/2 bases.
struct PhaseRingConstellation {
    int M = 2;
    double alpha0 = 1.0;
    bool two_mode = false;

    double energy() const { return alpha0 * alpha0; }
    // Complex amplitude of state l (single-mode) or its two-mode pair.
    std::pair<double, double> amplitude(int l) const;
};

// Exact optimal (Helstrom) error for equiprobable antipodal coherent states
// of energy S: (1 - sqrt(1 - e^{-4S}))/2, ~ e^{-4S}/4 for large S.
double optimal_binary_error(double S);
double optimal_binary_error_asymptote(double S);

// Heterodyne receiver. Outcome y = alpha + w with w circularly symmetric
// complex Gaussian of unit total variance (1/2 per quadrature); the sign
// decision on Re y gives Q(sqrt(2S)) ~ e^{-S}.
double heterodyne_binary_error(double S);
double heterodyne_binary_error_asymptote(double S);

struct McEstimate {
    double value = 0.0;
    double sigma = 0.0;  // binomial standard error
    std::size_t trials = 0;
};

McEstimate heterodyne_binary_error_mc(double S, std::size_t trials, std::uint64_t seed);

// Canonical phase measurement of a coherent state, computed from the Fock
// expansion truncated at n_max (tail mass must stay below 1e-12; the rule of
// thumb n_max >= 10 S + 50 is enforced by the caller via the throw).
// Bit error = phase mass beyond +-pi/2, ~ e^{-2S}/2.
double phase_measurement_error(double S, int n_max);
double phase_measurement_error_asymptote(double S);

// RMS of the canonical phase distribution (about the mean phase 0).
double phase_rms_spread(double S, int n_max);

// Receiver triple at one energy plus expected error counts per 10^9 bits.
struct AdvantageRow {
    double S = 0.0;
    double optimal = 0.0;    // exact Helstrom
    double phase = 0.0;      // canonical phase measurement
    double heterodyne = 0.0; // Q(sqrt(2S))
    double optimal_per_1e9 = 0.0;
    double phase_per_1e9 = 0.0;
    double heterodyne_per_1e9 = 0.0;
};

AdvantageRow advantage_table(double S, int n_max = 0);

// Error-exponent ratio between the optimal receiver and heterodyne, from
// the asymptotic forms; approaches 4 (6 dB).
struct GapPoint {
    double S = 0.0;
    double exponent_ratio_asymptotic = 0.0;  // (4S + ln 4)/(S + ln 2)
    double exponent_ratio_exact = 0.0;       // -ln exact / -ln exact
};

std::vector<GapPoint> six_db_gap_check(const std::vector<double>& S_grid);

// Monte-Carlo estimate of an attacker's best single-shot guess of the ring
// state from one heterodyne outcome without the key (mean of the posterior
// maximum). No closed-form guarantee backs this number; it is an estimate
// only.
McEstimate ring_posterior_p1_estimate(int M, double S, std::size_t trials, std::uint64_t seed);

}  // namespace kcq::coherent
