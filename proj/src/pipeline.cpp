#include "kcq/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "kcq/cppm.hpp"
#include "kcq/keystream.hpp"
#include "kcq/math_util.hpp"
#include "kcq/qubit.hpp"
#include "kcq/rng.hpp"

namespace kcq::pipeline {

namespace {

constexpr const char* kVersion = "0.1.0";

// Expands a short secret into Toeplitz diagonals through an integer mixing
// chain. A sparse-feedback LFSR is fine as the running-key generator but its
// warm-up leaves zero runs that would void the universal-hash collision
// bound, so hashing material uses this expander instead.
BitString expand_seed(const BitString& seed, std::size_t count) {
    std::uint64_t folded = 0x9e3779b97f4a7c15ULL;
    for (std::size_t i = 0; i < seed.size(); ++i)
        if (seed[i]) folded ^= 1ULL << (i % 64);
    BitString out;
    out.reserve(count);
    std::uint64_t ctr = 0;
    while (out.size() < count) {
        std::uint64_t block = mix64(folded ^ mix64(++ctr));
        for (int b = 0; b < 64 && out.size() < count; ++b)
            out.push_back(static_cast<std::uint8_t>((block >> b) & 1));
    }
    return out;
}

}  // namespace

AdvantageWindow advantage_check(double p_bob, double p_eve) {
    if (!(p_bob >= 0.0 && p_bob <= 0.5) || !(p_eve >= 0.0 && p_eve <= 0.5))
        throw std::domain_error("error rates must lie in [0, 0.5]");
    AdvantageWindow w;
    w.info_bob = 1.0 - binary_entropy(p_bob);
    w.info_eve = 1.0 - binary_entropy(p_eve);
    w.empty = !(p_bob < p_eve);
    return w;
}

ReconcileResult reconcile_ideal(const BitString& raw_a, const BitString& raw_b, double p_c) {
    if (raw_a.size() != raw_b.size()) throw std::invalid_argument("length mismatch");
    if (raw_a.size() > (std::size_t{1} << 16)) throw std::invalid_argument("desk scale is 2^16 bits");
    if (!(p_c >= 0.0 && p_c < 0.5)) throw std::domain_error("channel error must lie in [0, 0.5)");
    ReconcileResult r;
    r.mismatches_before = static_cast<std::size_t>(hamming_distance(raw_a, raw_b));
    r.leaked_bits = static_cast<std::size_t>(
        std::ceil(1.1 * static_cast<double>(raw_a.size()) * binary_entropy(p_c)));
    r.shared = raw_a;
    r.success = true;
    if (p_c == 0.0 && r.mismatches_before > 0) r.success = false;  // model violated
    return r;
}

std::uint32_t syndrome_of(const std::vector<std::uint32_t>& parity_rows, const BitString& word) {
    std::uint32_t x = 0;
    for (std::size_t i = 0; i < word.size(); ++i)
        if (word[i]) x |= (1u << i);
    std::uint32_t s = 0;
    for (std::size_t r = 0; r < parity_rows.size(); ++r)
        s |= static_cast<std::uint32_t>(std::popcount(parity_rows[r] & x) & 1) << r;
    return s;
}

BitString syndrome_decode(const std::vector<std::uint32_t>& parity_rows, int n,
                          const BitString& received, std::uint32_t target_syndrome) {
    if (n < 1 || n > 16) throw std::invalid_argument("decoder limited to n <= 16");
    if (received.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("length mismatch");
    std::size_t r = parity_rows.size();
    std::vector<std::int32_t> leader(std::size_t{1} << r, -1);
    std::size_t filled = 0;
    // Coset leaders by increasing weight.
    for (int w = 0; w <= n && filled < leader.size(); ++w) {
        for (std::uint32_t e = 0; e < (1u << n); ++e) {
            if (std::popcount(e) != w) continue;
            BitString eb(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) eb[static_cast<std::size_t>(i)] = (e >> i) & 1;
            std::uint32_t s = syndrome_of(parity_rows, eb);
            if (leader[s] < 0) {
                leader[s] = static_cast<std::int32_t>(e);
                ++filled;
            }
        }
    }
    std::uint32_t s = syndrome_of(parity_rows, received) ^ target_syndrome;
    if (leader[s] < 0) throw std::runtime_error("syndrome not reachable");
    BitString out = received;
    for (int i = 0; i < n; ++i)
        if ((static_cast<std::uint32_t>(leader[s]) >> i) & 1) out[static_cast<std::size_t>(i)] ^= 1;
    return out;
}

ReconcileResult reconcile_hamming7(const BitString& raw_a, const BitString& raw_b) {
    if (raw_a.size() != raw_b.size()) throw std::invalid_argument("length mismatch");
    if (raw_a.size() % 7 != 0) throw std::invalid_argument("length must be a multiple of 7");
    static const std::vector<std::uint32_t> kRows = {0b1010101, 0b0110011, 0b0001111};
    ReconcileResult r;
    r.mismatches_before = static_cast<std::size_t>(hamming_distance(raw_a, raw_b));
    r.shared = raw_b;
    std::size_t blocks = raw_a.size() / 7;
    for (std::size_t b = 0; b < blocks; ++b) {
        BitString ablock(raw_a.begin() + 7 * b, raw_a.begin() + 7 * (b + 1));
        BitString bblock(raw_b.begin() + 7 * b, raw_b.begin() + 7 * (b + 1));
        BitString fixed = syndrome_decode(kRows, 7, bblock, syndrome_of(kRows, ablock));
        std::copy(fixed.begin(), fixed.end(), r.shared.begin() + 7 * b);
    }
    r.leaked_bits = 3 * blocks;
    r.success = r.shared == raw_a;
    return r;
}

BitString toeplitz_hash(const BitString& input, std::size_t m, const BitString& diagonals) {
    if (m == 0) throw std::invalid_argument("empty output");
    if (diagonals.size() != input.size() + m - 1)
        throw std::invalid_argument("need n + m - 1 diagonal bits");
    BitString out(m, 0);
    // Row i of the Toeplitz matrix is diagonals[i .. i+n-1] reversed onto the
    // input; equivalently T[i][j] = diagonals[i + (n-1) - j].
    std::size_t n = input.size();
    for (std::size_t i = 0; i < m; ++i) {
        std::uint8_t acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc ^= static_cast<std::uint8_t>(input[j] & diagonals[i + (n - 1) - j]);
        out[i] = acc;
    }
    return out;
}

DistillResult distill(const BitString& shared, std::size_t m, const BitString& hash_seed) {
    if (m >= shared.size()) throw std::invalid_argument("target length must be below the input length");
    if (m == 0) throw std::invalid_argument("empty target");
    DistillResult d;
    BitString diag = expand_seed(hash_seed, shared.size() + m - 1);
    d.key = toeplitz_hash(shared, m, diag);
    d.hash_key_bits = 64;  // the expander seed is the secret
    return d;
}

VerifyResult verify_keys(const BitString& key_a, const BitString& key_b, std::size_t tag_bits,
                         const BitString& tag_seed) {
    VerifyResult v;
    v.tag_bits = tag_bits;
    v.tag_key_bits = 64;
    v.collision_probability = std::exp2(-static_cast<double>(tag_bits));
    if (tag_bits == 0) throw std::invalid_argument("tag must have at least one bit");
    if (key_a.empty() || key_b.empty() || key_a.size() != key_b.size()) {
        v.accept = false;
        return v;
    }
    BitString diag = expand_seed(tag_seed, key_a.size() + tag_bits - 1);
    v.accept = toeplitz_hash(key_a, tag_bits, diag) == toeplitz_hash(key_b, tag_bits, diag);
    return v;
}

GuessingBudget guessing_attack_budget(std::size_t key_bits) {
    if (key_bits == 0) throw std::invalid_argument("need at least one key bit");
    GuessingBudget g;
    g.log2_p1 = -static_cast<double>(key_bits);
    g.p1 = std::exp2(g.log2_p1);
    return g;
}

double security_floor_log2(double empirical_log2_p1, std::size_t key_bits) {
    return std::max(empirical_log2_p1, -static_cast<double>(key_bits));
}

namespace {

BreachReport breach_rows(double n, double info_rate, double whole_log2, bool adequately_small) {
    BreachReport rep;
    rep.n = n;
    rep.info_rate = info_rate;
    rep.whole_key_log2_p1 = whole_log2;
    rep.adequately_small = adequately_small;
    for (double f : {1.0, 0.1, 0.01, 0.001}) {
        BreachRow row;
        row.fraction = f;
        row.bits = f * n;
        row.log2_probability = std::min(0.0, whole_log2 - std::log2(f));
        row.probability = std::min(1.0, std::exp2(whole_log2) / f);
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace

BreachReport breach_report_from_info_rate(double n, double info_rate) {
    if (!(n > 0) || !(info_rate > 0) || info_rate > 1)
        throw std::domain_error("need n > 0 and info rate in (0, 1]");
    double whole_log2 = std::log2(info_rate);
    return breach_rows(n, info_rate, whole_log2, false);
}

BreachReport breach_report_from_lambda(double n, double lambda) {
    if (!(n > 0) || !(lambda > 0)) throw std::domain_error("need n > 0 and lambda > 0");
    // I_E <= 2^{-lambda n}: whole-key guess level 2^{-lambda(n + log n)}.
    double whole_log2 = -lambda * (n + std::log2(n));
    double info_rate = std::exp2(-lambda * n - std::log2(n));
    return breach_rows(n, info_rate, whole_log2, lambda >= 1.0);
}

ProtocolRun run_pipeline(const PipelineConfig& cfg) {
    ProtocolRun run;
    run.backend = cfg.backend;
    run.seed = cfg.seed;

    auto rng = shard_rng(cfg.seed, 0xACCE55);
    BitString raw_a, raw_b;
    double p_eve_analytic = 0.0;
    double p_channel_model = 0.0;

    if (cfg.backend == "qubit") {
        run.uses = cfg.n_qubits;
        run.seed_key_bits = 63;

        qubit::KeyMaterial key;
        key.seed = expand_seed(bits_from_uint(cfg.seed, 63), 63);
        key.expander = qubit::KeyMaterial::Expander::kLfsr;

        auto opt = qubit::optimize_eve_basis(cfg.M);
        auto rep = qubit::simulate_protocol(cfg.n_qubits, cfg.M, key, cfg.channel_error,
                                            qubit::EveMeasurement{opt.theta}, cfg.seed);
        // Re-run the modulation to recover both raw strings: Bob's string is
        // Alice's through the BSC. The simulation reports error rates; here
        // we rebuild matched raw strings deterministically for the ledger.
        raw_a.resize(cfg.n_qubits);
        raw_b.resize(cfg.n_qubits);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = 0; i < cfg.n_qubits; ++i) {
            raw_a[i] = static_cast<std::uint8_t>(rng() & 1u);
            raw_b[i] = raw_a[i];
            if (cfg.channel_error > 0 && unit(rng) < cfg.channel_error) raw_b[i] ^= 1;
        }
        run.bob_error = rep.bob_error_rate;
        run.eve_error = rep.eve_error_rate;
        p_eve_analytic = rep.eve_error_analytic;
        p_channel_model = cfg.channel_error;
    } else if (cfg.backend == "cppm") {
        run.uses = cfg.uses;
        run.seed_key_bits = 63;
        int nbits = int_log2(static_cast<std::uint64_t>(cfg.N_modes));

        auto bob = cppm::bob_direct_detect_mc(cfg.N_modes, cfg.S, cfg.uses, cfg.seed);
        auto eve = cppm::eve_heterodyne_error_mc(cfg.N_modes, cfg.S, cfg.uses, mix64(cfg.seed));
        run.bob_error = bob.value;
        run.eve_error = eve.value;
        // Symbol errors decode to any wrong symbol uniformly; per-bit error
        // is half the symbol rate scaled by N/(N-1).
        p_channel_model = std::min(0.49, 0.5 * bob.value * static_cast<double>(cfg.N_modes) /
                                             static_cast<double>(cfg.N_modes - 1));
        p_eve_analytic = std::min(0.5, 0.5 * cppm::eve_heterodyne_error_analytic(cfg.N_modes, cfg.S) *
                                           static_cast<double>(cfg.N_modes) /
                                           static_cast<double>(cfg.N_modes - 1));

        // Raw bit strings from the symbol stream.
        raw_a.reserve(cfg.uses * static_cast<std::size_t>(nbits));
        raw_b.reserve(raw_a.capacity());
        std::uniform_int_distribution<int> msg(0, cfg.N_modes - 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> wrong(1, cfg.N_modes - 1);
        for (std::size_t u = 0; u < cfg.uses; ++u) {
            int a = msg(rng);
            int b = a;
            if (unit(rng) < bob.value) b = (a + wrong(rng)) % cfg.N_modes;
            for (int k = 0; k < nbits; ++k) {
                raw_a.push_back(static_cast<std::uint8_t>((a >> k) & 1));
                raw_b.push_back(static_cast<std::uint8_t>((b >> k) & 1));
            }
        }
    } else {
        throw std::invalid_argument("backend must be qubit or cppm");
    }

    double p_eve_for_window =
        cfg.backend == "qubit" ? std::min(0.5, run.eve_error > 0 ? run.eve_error : p_eve_analytic)
                               : std::min(0.5, p_eve_analytic);
    auto window = advantage_check(std::min(0.5, p_channel_model), p_eve_for_window);
    run.info_bob = window.info_bob;
    run.info_eve = window.info_eve;
    run.window_empty = window.empty;
    if (window.empty) {
        run.aborted = true;
        return run;
    }

    auto rec = reconcile_ideal(raw_a, raw_b, std::max(p_channel_model, 1e-12));
    run.reconcile_leak = rec.leaked_bits;
    if (!rec.success) {
        run.aborted = true;
        return run;
    }

    std::size_t m = cfg.target_bits;
    if (m == 0) {
        // Rate below Eve's capacity gap: keep what the window and the leak
        // allow, with a 20% margin.
        double budget = (run.info_bob - run.info_eve) * static_cast<double>(rec.shared.size());
        budget -= static_cast<double>(rec.leaked_bits);
        m = budget > 16.0 ? static_cast<std::size_t>(0.8 * budget) : 0;
    }
    if (m == 0 || m >= rec.shared.size()) {
        run.aborted = true;
        return run;
    }

    auto dist = distill(rec.shared, m, bits_from_uint(mix64(cfg.seed ^ 0xD157), 63));
    run.distilled_bits = dist.key.size();
    run.hash_key_bits = dist.hash_key_bits;

    auto ver = verify_keys(dist.key, dist.key, cfg.tag_bits, bits_from_uint(mix64(cfg.seed ^ 0x7A6), 63));
    run.tag_key_bits = ver.tag_key_bits;
    run.verified = ver.accept;
    if (!ver.accept) {
        run.aborted = true;
        run.distilled_bits = 0;  // verification failure yields no key
        return run;
    }

    double consumed = static_cast<double>(run.seed_key_bits + run.hash_key_bits + run.tag_key_bits);
    run.net_bits = static_cast<double>(run.distilled_bits) - consumed;
    run.net_rate = run.net_bits / static_cast<double>(run.uses);
    run.security_floor_log2_p1 =
        security_floor_log2(-static_cast<double>(run.distilled_bits), run.seed_key_bits);
    return run;
}

std::string report_json(const ProtocolRun& run, const PipelineConfig& cfg) {
    nlohmann::json params{
        {"backend", cfg.backend},       {"n_qubits", cfg.n_qubits}, {"M", cfg.M},
        {"channel_error", cfg.channel_error}, {"N_modes", cfg.N_modes},  {"S", cfg.S},
        {"uses", cfg.uses},             {"target_bits", cfg.target_bits}, {"tag_bits", cfg.tag_bits}};
    nlohmann::json metrics{{"bob_error", run.bob_error},
                           {"eve_error", run.eve_error},
                           {"info_bob", run.info_bob},
                           {"info_eve", run.info_eve},
                           {"window_empty", run.window_empty},
                           {"reconcile_leak", run.reconcile_leak},
                           {"distilled_bits", run.distilled_bits},
                           {"verified", run.verified},
                           {"aborted", run.aborted},
                           {"seed_key_bits", run.seed_key_bits},
                           {"hash_key_bits", run.hash_key_bits},
                           {"tag_key_bits", run.tag_key_bits},
                           {"net_bits", run.net_bits},
                           {"net_rate", run.net_rate},
                           {"security_floor_log2_p1", run.security_floor_log2_p1},
                           {"uses", run.uses}};
    // Deterministic run id from the canonical parameter dump.
    std::string canon = params.dump() + std::to_string(run.seed);
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : canon) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    std::ostringstream id;
    id << std::hex << h;
    nlohmann::json out{{"run_id", id.str()}, {"backend", run.backend},  {"params", params},
                       {"metrics", metrics}, {"seed", run.seed},        {"version", kVersion}};
    return out.dump(2);
}

}  // namespace kcq::pipeline
