// Command-line front end: one subcommand per module surface.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "kcq/coherent.hpp"
#include "kcq/cpd.hpp"
#include "kcq/cppm.hpp"
#include "kcq/keystream.hpp"
#include "kcq/math_util.hpp"
#include "kcq/pipeline.hpp"
#include "kcq/qubit.hpp"
#include "kcq/rng.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAbort = 2;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + out_path);
    f << text;
}

std::string csv_join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    return line;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

json wrap_report(const std::string& subcommand, std::uint64_t seed, const json& params,
                 const json& metrics) {
    std::string canon = subcommand + params.dump() + std::to_string(seed);
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : canon) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    std::ostringstream id;
    id << std::hex << h;
    return json{{"run_id", id.str()}, {"backend", subcommand}, {"params", params},
                {"metrics", metrics}, {"seed", seed},          {"version", "0.1.0"}};
}

int run_measures(const std::string& kind, int n, int m, double x, const std::string& load_path,
                 const std::string& out, const std::string& format) {
    kcq::measures::Cpd cpd = [&] {
        if (!load_path.empty()) {
            std::ifstream f(load_path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot open CPD file: " + load_path);
            return kcq::measures::Cpd::read_binary(f);
        }
        if (kind == "uniform") return kcq::measures::Cpd::uniform_dense(n);
        if (kind == "spike") return kcq::measures::Cpd::spike_uniform(n, x);
        if (kind == "bernoulli") return kcq::measures::Cpd::product_bernoulli(n, x);
        if (kind == "subset") return kcq::measures::Cpd::subset_model(n, m, x);
        throw CLI::ValidationError("--kind must be uniform|spike|bernoulli|subset");
    }();
    auto r = kcq::measures::measure_all(cpd);
    json metrics{{"p1", r.p1},
                 {"shannon_entropy_bits", r.shannon_entropy_bits},
                 {"mutual_info_bits", r.mutual_info_bits},
                 {"variational_distance", r.variational_distance},
                 {"trial_complexity", r.trial_complexity},
                 {"epsilon_uniform", r.epsilon_uniform}};
    if (format == "csv") {
        std::string text = "p1,shannon_entropy_bits,mutual_info_bits,variational_distance,"
                           "trial_complexity,epsilon_uniform\n";
        text += csv_join({fmt(r.p1), fmt(r.shannon_entropy_bits), fmt(r.mutual_info_bits),
                          fmt(r.variational_distance), fmt(r.trial_complexity),
                          fmt(r.epsilon_uniform)}) +
                "\n";
        emit(text, out);
    } else {
        json params{{"kind", kind}, {"n", cpd.n()}, {"m", m}, {"x", x}};
        emit(wrap_report("measures", 0, params, metrics).dump(2), out);
    }
    return kExitOk;
}

int run_qubit(std::size_t n, int M, double pc, double theta, bool optimize,
              const std::string& poly_hex, std::uint64_t seed, const std::string& out,
              const std::string& format) {
    auto opt = kcq::qubit::optimize_eve_basis(M);
    double eve_theta = optimize ? opt.theta : theta;
    kcq::qubit::KeyMaterial key;
    key.seed = kcq::bits_from_uint(kcq::mix64(seed | 1), 63);
    if (kcq::all_zero(key.seed)) key.seed[0] = 1;
    if (!poly_hex.empty()) {
        // Hex connection polynomial, LSB = x^0; the degree fixes |K|.
        key.poly_mask = kcq::keystream::parse_poly_mask(poly_hex);
        int degree = 63;
        while (degree > 0 && !((key.poly_mask >> degree) & 1)) --degree;
        key.seed.resize(static_cast<std::size_t>(degree));
        if (kcq::all_zero(key.seed)) key.seed[0] = 1;
    }
    auto rep = kcq::qubit::simulate_protocol(n, M, key, pc,
                                             kcq::qubit::EveMeasurement{eve_theta}, seed);
    auto window = kcq::qubit::code_rate_window(pc);
    json params{{"n", n}, {"M", M}, {"p_c", pc}, {"theta", eve_theta}, {"optimized", optimize}};
    json metrics{{"bob_error_rate", rep.bob_error_rate},
                 {"eve_error_rate", rep.eve_error_rate},
                 {"eve_keyed_error_rate", rep.eve_keyed_error_rate},
                 {"eve_error_analytic", rep.eve_error_analytic},
                 {"eve_keyed_error_analytic", rep.eve_keyed_error_analytic},
                 {"optimal_theta", opt.theta},
                 {"optimal_error", opt.error},
                 {"mirrored_theta", opt.mirrored_theta},
                 {"code_rate_low", window.r_low},
                 {"code_rate_high", window.r_high},
                 {"code_rate_window_empty", window.empty}};
    if (format == "csv") {
        std::string text =
            "n,M,p_c,theta,bob_error_rate,eve_error_rate,eve_error_analytic,code_rate_low,"
            "code_rate_high\n";
        text += csv_join({std::to_string(n), std::to_string(M), fmt(pc), fmt(eve_theta),
                          fmt(rep.bob_error_rate), fmt(rep.eve_error_rate),
                          fmt(rep.eve_error_analytic), fmt(window.r_low), fmt(window.r_high)}) +
                "\n";
        emit(text, out);
    } else {
        emit(wrap_report("qubit", seed, params, metrics).dump(2), out);
    }
    return kExitOk;
}

int run_binary(std::vector<double> S_values, std::size_t trials, int cutoff, int ring_M,
               std::uint64_t seed, const std::string& out, const std::string& format) {
    if (S_values.empty()) S_values = {0.5, 1, 2, 4, 6, 8, 10, 12};
    json rows = json::array();
    std::string csv = "S,optimal,phase,heterodyne,het_mc,het_mc_sigma\n";
    for (double S : S_values) {
        auto row = kcq::coherent::advantage_table(S, cutoff);
        auto mc = kcq::coherent::heterodyne_binary_error_mc(S, trials, seed);
        json j{{"S", S},
               {"optimal", row.optimal},
               {"phase", row.phase},
               {"heterodyne", row.heterodyne},
               {"optimal_per_1e9", row.optimal_per_1e9},
               {"phase_per_1e9", row.phase_per_1e9},
               {"heterodyne_per_1e9", row.heterodyne_per_1e9},
               {"het_mc", mc.value},
               {"het_mc_sigma", mc.sigma}};
        if (ring_M > 0) {
            // Keyless attacker estimate over the full ring; a Monte-Carlo
            // number with an error bar, not a proven bound.
            auto p1 = kcq::coherent::ring_posterior_p1_estimate(ring_M, S, trials, seed);
            j["ring_p1_estimate"] = p1.value;
            j["ring_p1_sigma"] = p1.sigma;
        }
        rows.push_back(j);
        csv += csv_join({fmt(S), fmt(row.optimal), fmt(row.phase), fmt(row.heterodyne),
                         fmt(mc.value), fmt(mc.sigma)}) +
               "\n";
    }
    if (format == "csv") {
        emit(csv, out);
    } else {
        json params{{"trials", trials}, {"cutoff", cutoff}};
        emit(wrap_report("binary", seed, params, json{{"rows", rows}}).dump(2), out);
    }
    return kExitOk;
}

int run_cppm(int N, double S, std::size_t trials, std::uint64_t seed, const std::string& out,
             const std::string& format) {
    auto bob = kcq::cppm::bob_direct_detect_mc(N, S, trials, seed);
    auto eve = kcq::cppm::eve_heterodyne_error_mc(N, S, trials, kcq::mix64(seed));
    double analytic = kcq::cppm::direct_detection_error(N, S);
    int n = kcq::int_log2(static_cast<std::uint64_t>(N));
    auto bound = kcq::cppm::heterodyne_error_lower_bound_max(n, S);
    double chi2_p = 0.0;
    bool chi_ok = false;
    try {
        auto flat = kcq::cppm::flat_profile_test(N, S, trials, kcq::mix64(seed ^ 0xF1A7));
        chi2_p = flat.p_value;
        chi_ok = true;
    } catch (const std::invalid_argument&) {
        // not enough error events at these parameters; leave the column empty
    }
    json params{{"N", N}, {"S", S}, {"trials", trials}};
    json metrics{{"bob_err", bob.value},
                 {"bob_err_sigma", bob.sigma},
                 {"eve_err", eve.value},
                 {"eve_err_sigma", eve.sigma},
                 {"bob_err_analytic", analytic},
                 {"het_err_bound", bound.value},
                 {"het_err_bound_y", bound.y},
                 {"keygen_bits_per_use", static_cast<double>(n)},
                 {"chi2_p", chi_ok ? json(chi2_p) : json(nullptr)}};
    if (format == "csv") {
        std::string text = "N,S,bob_err,eve_err,bob_err_analytic,het_err_bound,chi2_p\n";
        text += csv_join({std::to_string(N), fmt(S), fmt(bob.value), fmt(eve.value),
                          fmt(analytic), fmt(bound.value), chi_ok ? fmt(chi2_p) : ""}) +
                "\n";
        emit(text, out);
    } else {
        emit(wrap_report("cppm", seed, params, metrics).dump(2), out);
    }
    return kExitOk;
}

int run_pipeline_cmd(const kcq::pipeline::PipelineConfig& cfg, const std::string& out,
                     const std::string& format) {
    auto run = kcq::pipeline::run_pipeline(cfg);
    if (format == "csv") {
        std::string text =
            "backend,uses,bob_error,eve_error,info_bob,info_eve,reconcile_leak,distilled_bits,"
            "verified,aborted,net_bits,net_rate\n";
        text += csv_join({run.backend, std::to_string(run.uses), fmt(run.bob_error),
                          fmt(run.eve_error), fmt(run.info_bob), fmt(run.info_eve),
                          std::to_string(run.reconcile_leak), std::to_string(run.distilled_bits),
                          run.verified ? "1" : "0", run.aborted ? "1" : "0", fmt(run.net_bits),
                          fmt(run.net_rate)}) +
                "\n";
        emit(text, out);
    } else {
        emit(kcq::pipeline::report_json(run, cfg), out);
    }
    return run.aborted ? kExitAbort : kExitOk;
}

int run_report(double n, double info_rate, double lambda, const std::string& out,
               const std::string& format) {
    kcq::pipeline::BreachReport rep =
        lambda > 0 ? kcq::pipeline::breach_report_from_lambda(n, lambda)
                   : kcq::pipeline::breach_report_from_info_rate(n, info_rate);
    json rows = json::array();
    std::string csv = "bits,fraction,probability,log2_probability\n";
    for (const auto& row : rep.rows) {
        rows.push_back(json{{"bits", row.bits},
                            {"fraction", row.fraction},
                            {"probability", row.probability},
                            {"log2_probability", row.log2_probability}});
        csv += csv_join({fmt(row.bits), fmt(row.fraction), fmt(row.probability),
                         fmt(row.log2_probability)}) +
               "\n";
    }
    if (format == "csv") {
        emit(csv, out);
    } else {
        json params{{"n", n}, {"info_rate", rep.info_rate}, {"lambda", lambda}};
        json metrics{{"whole_key_log2_p1", rep.whole_key_log2_p1},
                     {"adequately_small", rep.adequately_small},
                     {"rows", rows}};
        emit(wrap_report("report", 0, params, metrics).dump(2), out);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KCQ key generation simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::uint64_t seed = 1;
    std::size_t trials = 100000;
    std::string out, format = "json";
    app.add_option("--seed", seed, "RNG seed")->capture_default_str();
    app.add_option("--trials", trials, "Monte-Carlo trials")->capture_default_str();
    app.add_option("--out", out, "output path (stdout when empty)");
    app.add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    auto* measures = app.add_subcommand("measures", "CPD security measures");
    std::string kind = "uniform", load_path;
    int mn = 8, mm = 4;
    double mx = 0.5;
    measures->add_option("--kind", kind, "uniform|spike|bernoulli|subset")->capture_default_str();
    measures->add_option("--n", mn, "bit length")->capture_default_str();
    measures->add_option("--m", mm, "subset length")->capture_default_str();
    measures->add_option("--x", mx, "p1 / p0 / subset mass")->capture_default_str();
    measures->add_option("--load", load_path, "read a dense CPD file instead");

    auto* qubit = app.add_subcommand("qubit", "qubit protocol simulation");
    std::size_t qn = 100000;
    int qM = 2;
    double qpc = 0.0, qtheta = 0.0;
    bool qopt = false;
    std::string qpoly;
    qubit->add_option("--n", qn, "qubits")->capture_default_str();
    qubit->add_option("--M", qM, "bases")->capture_default_str();
    qubit->add_option("--pc", qpc, "channel error")->capture_default_str();
    auto* topt = qubit->add_option("--theta", qtheta, "attacker angle (radians)");
    qubit->add_flag("--optimize", qopt, "optimize the attacker angle");
    qubit->add_option("--poly", qpoly, "LFSR connection polynomial, hex, LSB = x^0");
    topt->excludes("--optimize");

    auto* binary = app.add_subcommand("binary", "binary coherent-state receivers");
    std::vector<double> bS;
    int bcutoff = 0, bring = 0;
    binary->add_option("--S", bS, "photon numbers (repeatable)");
    binary->add_option("--cutoff", bcutoff, "Fock cutoff (0 = auto)")->capture_default_str();
    binary->add_option("--M", bring, "ring size for the keyless p1 estimate (0 = off)")
        ->capture_default_str();

    auto* cppm = app.add_subcommand("cppm", "pulse-position keyed modulation");
    int cN = 16;
    double cS = 2.0;
    cppm->add_option("--N", cN, "modes (power of two)")->capture_default_str();
    cppm->add_option("--S", cS, "photon number")->capture_default_str();

    auto* pipeline = app.add_subcommand("pipeline", "end-to-end key generation");
    kcq::pipeline::PipelineConfig cfg;
    pipeline->add_option("--backend", cfg.backend, "qubit or cppm")->capture_default_str();
    pipeline->add_option("--n", cfg.n_qubits, "qubits (qubit backend)")->capture_default_str();
    pipeline->add_option("--M", cfg.M, "bases (qubit backend)")->capture_default_str();
    pipeline->add_option("--pc", cfg.channel_error, "channel error")->capture_default_str();
    pipeline->add_option("--N", cfg.N_modes, "modes (cppm backend)")->capture_default_str();
    pipeline->add_option("--S", cfg.S, "photon number (cppm backend)")->capture_default_str();
    pipeline->add_option("--uses", cfg.uses, "channel uses (cppm backend)")->capture_default_str();
    pipeline->add_option("--target-bits", cfg.target_bits, "distilled length (0 = auto)")
        ->capture_default_str();
    pipeline->add_option("--tag-bits", cfg.tag_bits, "verification tag bits")->capture_default_str();

    auto* report = app.add_subcommand("report", "worst-case breach table");
    double rn = 1e6, rinfo = 1e-3, rlambda = 0.0;
    report->add_option("--n", rn, "key length")->capture_default_str();
    report->add_option("--info-rate", rinfo, "attacker information per bit")->capture_default_str();
    report->add_option("--lambda", rlambda, "exponent lambda (overrides --info-rate)")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (measures->parsed()) return run_measures(kind, mn, mm, mx, load_path, out, format);
        if (qubit->parsed())
            return run_qubit(qn, qM, qpc, qtheta, qopt, qpoly, seed, out, format);
        if (binary->parsed()) return run_binary(bS, trials, bcutoff, bring, seed, out, format);
        if (cppm->parsed()) return run_cppm(cN, cS, trials, seed, out, format);
        if (pipeline->parsed()) {
            cfg.seed = seed;
            return run_pipeline_cmd(cfg, out, format);
        }
        if (report->parsed()) return run_report(rn, rinfo, rlambda, out, format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
