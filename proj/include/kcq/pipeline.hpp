#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kcq/bits.hpp"

namespace kcq::pipeline {

// BSC mutual informations and the usable code-rate window between them.
struct AdvantageWindow {
    double info_bob = 0.0;  // 1 - h2(p_B)
    double info_eve = 0.0;  // 1 - h2(p_E)
    bool empty = true;      // nonempty iff p_B < p_E
};

AdvantageWindow advantage_check(double p_bob, double p_eve);

// --- Error reconciliation ---------------------------------------------

// Accounting model: the users are assumed to run a code 10% above the
// Shannon limit, leaking ceil(1.1 n h2(p_c)) bits of side information; the
// shared string is Alice's.
struct ReconcileResult {
    BitString shared;
    std::size_t leaked_bits = 0;
    std::size_t mismatches_before = 0;
    bool success = false;
};

ReconcileResult reconcile_ideal(const BitString& raw_a, const BitString& raw_b, double p_c);

// Blockwise single-error-correcting reconciliation (7-bit blocks, 3 syndrome
// bits each). Fails when any block holds two or more errors.
ReconcileResult reconcile_hamming7(const BitString& raw_a, const BitString& raw_b);

// Brute-force syndrome decoder for arbitrary parity checks on n <= 16 bits;
// rows are bit masks over positions. Returns the corrected word closest to
// `received` whose syndrome matches `target_syndrome`.
BitString syndrome_decode(const std::vector<std::uint32_t>& parity_rows, int n,
                          const BitString& received, std::uint32_t target_syndrome);
std::uint32_t syndrome_of(const std::vector<std::uint32_t>& parity_rows, const BitString& word);

// --- Privacy distillation ----------------------------------------------

// Toeplitz hashing to m bits. The matrix diagonals are expanded from a
// 63-bit key through the keystream module, so the secret cost is the seed,
// not the full n+m-1 diagonal bits.
struct DistillResult {
    BitString key;                 // m bits
    std::size_t hash_key_bits = 0; // secret bits charged to the ledger
};

DistillResult distill(const BitString& shared, std::size_t m, const BitString& hash_seed);

// The Toeplitz map itself (exposed for the push-forward tests).
BitString toeplitz_hash(const BitString& input, std::size_t m, const BitString& diagonals);

// --- Key verification ----------------------------------------------------

struct VerifyResult {
    bool accept = false;
    std::size_t tag_bits = 0;
    std::size_t tag_key_bits = 0;  // secret bits charged to the ledger
    double collision_probability = 0.0;  // 2^-t for unequal keys
};

// Tag comparison through a keyed universal hash of t bits; unequal keys
// collide with probability at most 2^-t. Mismatched or empty inputs reject.
VerifyResult verify_keys(const BitString& key_a, const BitString& key_b, std::size_t tag_bits,
                         const BitString& tag_seed);

// --- Key-guessing floor ---------------------------------------------------

struct GuessingBudget {
    double p1 = 0.0;       // 2^-|K| (0 when it underflows)
    double log2_p1 = 0.0;  // exactly -|K|
};

GuessingBudget guessing_attack_budget(std::size_t key_bits);

// Security floor for a run: the larger of the empirical estimate and the
// key-guessing floor, tracked in log2.
double security_floor_log2(double empirical_log2_p1, std::size_t key_bits);

// --- Breach table ----------------------------------------------------------

struct BreachRow {
    double bits = 0.0;         // subset size f*n
    double fraction = 0.0;     // f
    double probability = 0.0;  // min(1, p1/f)
    double log2_probability = 0.0;
};

struct BreachReport {
    double n = 0.0;
    double info_rate = 0.0;  // I_E / n
    double whole_key_log2_p1 = 0.0;
    bool adequately_small = false;  // lambda ~ 1 regime
    std::vector<BreachRow> rows;
};

// Worst-case subset-breach table for a given leak level: either the
// information rate I_E/n directly (taken as the whole-key p1 level) or the
// exponent lambda with I_E <= 2^{-lambda n}.
BreachReport breach_report_from_info_rate(double n, double info_rate);
BreachReport breach_report_from_lambda(double n, double lambda);

// --- End-to-end run --------------------------------------------------------

struct PipelineConfig {
    std::string backend = "qubit";  // qubit | cppm
    std::uint64_t seed = 1;
    // qubit backend
    std::size_t n_qubits = 4096;
    int M = 2;
    double channel_error = 0.02;
    // cppm backend
    int N_modes = 64;
    double S = 6.0;
    std::size_t uses = 2048;
    // distillation target; 0 picks the rate-window default
    std::size_t target_bits = 0;
    std::size_t tag_bits = 64;
};

struct ProtocolRun {
    std::string backend;
    std::uint64_t seed = 0;
    std::size_t uses = 0;
    double bob_error = 0.0;
    double eve_error = 0.0;
    double info_bob = 0.0;
    double info_eve = 0.0;
    bool window_empty = false;
    std::size_t reconcile_leak = 0;
    std::size_t distilled_bits = 0;
    bool verified = false;
    bool aborted = false;
    std::size_t seed_key_bits = 0;
    std::size_t hash_key_bits = 0;
    std::size_t tag_key_bits = 0;
    double net_bits = 0.0;  // distilled - consumed (negative = no fresh key)
    double net_rate = 0.0;
    double security_floor_log2_p1 = 0.0;
};

ProtocolRun run_pipeline(const PipelineConfig& cfg);

// Canonical JSON serialization ({run_id, backend, params, metrics, seed,
// version}); byte-identical for identical configs.
std::string report_json(const ProtocolRun& run, const PipelineConfig& cfg);

}  // namespace kcq::pipeline
