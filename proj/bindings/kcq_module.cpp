#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kcq/coherent.hpp"
#include "kcq/cpd.hpp"
#include "kcq/cppm.hpp"
#include "kcq/keystream.hpp"
#include "kcq/pipeline.hpp"
#include "kcq/qubit.hpp"
#include "kcq/rng.hpp"

namespace py = pybind11;

namespace {

kcq::BitString to_bits(const std::vector<int>& v) {
    kcq::BitString b;
    b.reserve(v.size());
    for (int x : v) b.push_back(x ? 1 : 0);
    return b;
}

std::vector<int> from_bits(const kcq::BitString& b) {
    return std::vector<int>(b.begin(), b.end());
}

}  // namespace

PYBIND11_MODULE(_kcq, m) {
    m.doc() = "Keyed communication in quantum noise: security measures and protocol simulators";

    using kcq::measures::Cpd;
    py::class_<Cpd>(m, "Cpd")
        .def_static("dense", &Cpd::dense, py::arg("n"), py::arg("probs"))
        .def_static("uniform", &Cpd::uniform_dense, py::arg("n"))
        .def_static("spike_uniform", &Cpd::spike_uniform, py::arg("n"), py::arg("p1"))
        .def_static("equal_spikes", &Cpd::equal_spikes, py::arg("n"), py::arg("count"))
        .def_static("product_bernoulli", &Cpd::product_bernoulli, py::arg("n"), py::arg("p0"))
        .def_static("subset_model",
                    py::overload_cast<int, int, double>(&Cpd::subset_model), py::arg("n"),
                    py::arg("m"), py::arg("p"))
        .def_property_readonly("n", &Cpd::n)
        .def("probabilities", &Cpd::probabilities)
        .def("to_dense", &Cpd::to_dense);

    using kcq::measures::MeasureReport;
    py::class_<MeasureReport>(m, "MeasureReport")
        .def_readonly("p1", &MeasureReport::p1)
        .def_readonly("shannon_entropy_bits", &MeasureReport::shannon_entropy_bits)
        .def_readonly("mutual_info_bits", &MeasureReport::mutual_info_bits)
        .def_readonly("variational_distance", &MeasureReport::variational_distance)
        .def_readonly("trial_complexity", &MeasureReport::trial_complexity)
        .def_readonly("epsilon_uniform", &MeasureReport::epsilon_uniform);

    m.def("measure_all", &kcq::measures::measure_all, py::arg("cpd"));
    m.def("max_entropy_given_p1", &kcq::measures::max_entropy_given_p1, py::arg("n"),
          py::arg("p1"));
    m.def("worst_case_p1_bound", &kcq::measures::worst_case_p1_bound, py::arg("n"), py::arg("l"));
    m.def("min_entropy_given_p1", &kcq::measures::min_entropy_given_p1, py::arg("l"));
    m.def("min_trials_given_p1", &kcq::measures::min_trials_given_p1, py::arg("l"));
    m.def(
        "subset_breach",
        [](int n, int mm, double p1) {
            auto b = kcq::measures::subset_breach(n, mm, p1);
            return py::make_tuple(b.probability, b.regime_ok);
        },
        py::arg("n"), py::arg("m"), py::arg("p1"));
    m.def("delta_subset_bound", &kcq::measures::delta_subset_bound, py::arg("delta"),
          py::arg("m"));
    m.def("markov_tail_bound", &kcq::measures::markov_tail_bound, py::arg("mean"),
          py::arg("threshold"));
    m.def(
        "coupling_demo",
        [](const Cpd& p, const Cpd& q) {
            auto r = kcq::measures::coupling_demo(p, q);
            return py::make_tuple(r.delta, r.pr_neq_independent, r.pr_neq_optimal);
        },
        py::arg("P"), py::arg("Q"));
    m.def("privacy_distill", &kcq::measures::privacy_distill, py::arg("input"), py::arg("m"),
          py::arg("map_table"));

    m.def(
        "lfsr_stream",
        [](const std::vector<int>& seed, std::uint64_t poly, std::size_t count) {
            return from_bits(kcq::keystream::lfsr_stream(to_bits(seed), poly, count));
        },
        py::arg("seed"), py::arg("poly"), py::arg("count"));
    m.def(
        "repeat_expand",
        [](const std::vector<int>& key, std::size_t n) {
            auto e = kcq::keystream::repeat_expand(to_bits(key), n);
            return py::make_tuple(from_bits(e.stream), e.block_len);
        },
        py::arg("key"), py::arg("n"));

    m.def("eve_collective_error",
          py::overload_cast<int, double>(&kcq::qubit::eve_collective_error), py::arg("M"),
          py::arg("theta"));
    m.def("eve_keyed_ml_error", py::overload_cast<int, double>(&kcq::qubit::eve_keyed_ml_error),
          py::arg("M"), py::arg("theta"));
    m.def(
        "optimize_eve_basis",
        [](int M) {
            auto o = kcq::qubit::optimize_eve_basis(M);
            return py::make_tuple(o.theta, o.error, o.mirrored_theta);
        },
        py::arg("M"));
    m.def(
        "simulate_qubit_protocol",
        [](std::size_t n, int M, double pc, double theta, std::uint64_t seed) {
            kcq::qubit::KeyMaterial key;
            key.seed = kcq::bits_from_uint(kcq::mix64(seed | 1), 63);
            if (kcq::all_zero(key.seed)) key.seed[0] = 1;
            auto rep = kcq::qubit::simulate_protocol(n, M, key, pc,
                                                     kcq::qubit::EveMeasurement{theta}, seed);
            py::dict d;
            d["bob_error_rate"] = rep.bob_error_rate;
            d["eve_error_rate"] = rep.eve_error_rate;
            d["eve_keyed_error_rate"] = rep.eve_keyed_error_rate;
            d["eve_error_analytic"] = rep.eve_error_analytic;
            return d;
        },
        py::arg("n"), py::arg("M"), py::arg("pc"), py::arg("theta"), py::arg("seed"));
    m.def(
        "code_rate_window",
        [](double pc) {
            auto w = kcq::qubit::code_rate_window(pc);
            return py::make_tuple(w.r_low, w.r_high, w.empty);
        },
        py::arg("pc"));

    m.def("optimal_binary_error", &kcq::coherent::optimal_binary_error, py::arg("S"));
    m.def("heterodyne_binary_error", &kcq::coherent::heterodyne_binary_error, py::arg("S"));
    m.def("phase_measurement_error", &kcq::coherent::phase_measurement_error, py::arg("S"),
          py::arg("n_max") = 0);

    m.def("direct_detection_error", &kcq::cppm::direct_detection_error, py::arg("N"),
          py::arg("S"));
    m.def("eve_heterodyne_error_analytic", &kcq::cppm::eve_heterodyne_error_analytic,
          py::arg("N"), py::arg("S"));
    m.def("heterodyne_error_lower_bound", &kcq::cppm::heterodyne_error_lower_bound, py::arg("n"),
          py::arg("S"), py::arg("y"));

    m.def(
        "run_pipeline",
        [](const std::string& backend, std::uint64_t seed) {
            kcq::pipeline::PipelineConfig cfg;
            cfg.backend = backend;
            cfg.seed = seed;
            auto run = kcq::pipeline::run_pipeline(cfg);
            return kcq::pipeline::report_json(run, cfg);
        },
        py::arg("backend") = "qubit", py::arg("seed") = 1);

    m.attr("__version__") = "0.1.0";
}
