#include "pinlab/annealed.hpp"
#include "pinlab/disorder.hpp"
#include "pinlab/fracmom.hpp"
#include "pinlab/kernels.hpp"
#include "pinlab/pam_polymer.hpp"
#include "pinlab/quenched.hpp"
#include "pinlab/renewal.hpp"
#include "pinlab/runner.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pinlab;

namespace {

Mode parse_mode(const std::string& m) {
    if (m == "discrete") return Mode::discrete;
    if (m == "continuous") return Mode::continuous;
    throw InvalidArgument("mode must be 'discrete' or 'continuous'");
}

py::dict estimate(const McEstimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["stderr"] = e.stderr_;
    d["replicas"] = e.replicas;
    return d;
}

quenched::ModelParams model(int d, double beta, const std::string& mode, double rho) {
    quenched::ModelParams p;
    p.mode = parse_mode(mode);
    p.d = d;
    p.beta = beta;
    p.rho = rho;
    return p;
}

} // namespace

PYBIND11_MODULE(_pinlab, m) {
    m.doc() = "Random-walk pinning model: kernels, partition functions and estimators";

    auto base = py::register_exception<Error>(m, "PinlabError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    m.def("set_threads", &set_worker_threads, py::arg("n"));
    m.def("set_cache_dir", &kernels::set_cache_dir, py::arg("path"));

    m.def(
        "kernel",
        [](int d, int n, std::vector<int> x) {
            auto tab = kernels::kernel_table(d, n);
            if (static_cast<int>(x.size()) != d) throw InvalidArgument("kernel: x must have d coordinates");
            return tab->p(n, x);
        },
        py::arg("d"), py::arg("n"), py::arg("x"), "p_n(x) for the simple random walk");

    m.def(
        "green_pair",
        [](int d, double eps) {
            auto g = kernels::green_pair(d, eps);
            py::dict r;
            r["divergent"] = g.divergent;
            r["value"] = g.g_pair;
            r["series"] = g.g_pair_series;
            r["quadrature"] = g.g_pair_quad;
            r["error"] = g.error;
            return r;
        },
        py::arg("d"), py::arg("eps") = 1e-8);
    m.def("green_ct_value", &kernels::green_ct_value, py::arg("d"), py::arg("rho") = 0.0);

    m.def(
        "critical_point",
        [](const std::string& mode, int d, double rho) { return annealed::critical_point(parse_mode(mode), d, rho); },
        py::arg("mode"), py::arg("d"), py::arg("rho") = 0.0);
    m.def(
        "annealed_free_energy",
        [](double z, int d, long n_max) { return annealed::annealed_free_energy(z, annealed::renewal_law_discrete(d, n_max)); },
        py::arg("z"), py::arg("d"), py::arg("n_max") = 4000);
    m.def(
        "annealed_log_partition",
        [](double z, int d, long N) { return annealed::annealed_partition(z, annealed::renewal_law_discrete(d, N), N); },
        py::arg("z"), py::arg("d"), py::arg("N"));

    m.def(
        "sample_walk",
        [](int d, long N, std::uint64_t seed, std::uint64_t replica) {
            return disorder::sample_discrete(d, N, seed, replica).positions();
        },
        py::arg("d"), py::arg("N"), py::arg("seed"), py::arg("replica") = 0,
        "flat list of positions Y_0..Y_N, d integers each");

    m.def(
        "quenched_partition",
        [](int d, double beta, long N, std::uint64_t seed, bool constrained, const std::string& route) {
            auto p = model(d, beta, "discrete", 0.0);
            auto path = disorder::sample_discrete(d, N, seed);
            quenched::PartitionValue v;
            if (route == "enumeration")
                v = quenched::enumerate_partition(p, path, N, constrained);
            else if (route == "field")
                v = quenched::field_dp_partition(p, path, N, constrained);
            else if (route == "renewal")
                v = quenched::renewal_dp_partition(p, path, N, constrained);
            else
                throw InvalidArgument("route must be 'enumeration', 'field' or 'renewal'");
            return v.log_value;
        },
        py::arg("d"), py::arg("beta"), py::arg("N"), py::arg("seed"), py::arg("constrained") = true,
        py::arg("route") = "renewal", "log Z for the walk Y drawn from `seed`");

    m.def(
        "free_energy_estimate",
        [](int d, double beta, double horizon, std::size_t replicas, std::uint64_t seed, const std::string& mode,
           double rho) {
            auto r = quenched::free_energy_estimate(model(d, beta, mode, rho), horizon, replicas, seed);
            py::dict out;
            out["at_N"] = estimate(r.at_N);
            out["at_2N"] = estimate(r.at_2N);
            out["superadditive_ok"] = r.superadditive_ok;
            return out;
        },
        py::arg("d"), py::arg("beta"), py::arg("horizon"), py::arg("replicas"), py::arg("seed"),
        py::arg("mode") = "discrete", py::arg("rho") = 0.0);

    m.def(
        "renewal_gf",
        [](int d, long N, double s) { return renewal::exact_gf_dp(annealed::renewal_law_discrete(d, N), N, s); },
        py::arg("d"), py::arg("N"), py::arg("s"));

    m.def("shrink_factor", &fracmom::shrink_factor, py::arg("d"), py::arg("z"));

    m.def(
        "lyapunov_estimate",
        [](int d, double beta, double rho, double t, std::size_t replicas, std::uint64_t seed) {
            return estimate(pam::lyapunov_estimate(d, beta, rho, t, replicas, seed));
        },
        py::arg("d"), py::arg("beta"), py::arg("rho"), py::arg("t"), py::arg("replicas"), py::arg("seed"));

    m.def(
        "size_bias_check",
        [](double lambda, long N, int d, const std::function<double(double)>& f) {
            auto r = polymer::size_bias_check(lambda, N, d, f);
            return py::make_tuple(r.lhs, r.rhs);
        },
        py::arg("lam"), py::arg("N"), py::arg("d"), py::arg("f"), "(E f(Z~), E Z f(Z)) for Bernoulli disorder");

    m.def(
        "run",
        [](const std::string& config_json, std::optional<std::string> out, std::optional<unsigned> threads,
           std::optional<std::uint64_t> seed) {
            io::Json j;
            try {
                j = io::Json::parse(config_json);
            } catch (const io::Json::parse_error& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
            auto cfg = runner::parse_config(j);
            runner::Overrides ov;
            ov.out = out;
            ov.threads = threads;
            ov.seed = seed;
            auto man = runner::run(cfg, ov);
            py::dict files;
            for (const auto& f : man.files) files[py::str(f.name)] = f.sha256;
            return files;
        },
        py::arg("config_json"), py::arg("out") = py::none(), py::arg("threads") = py::none(),
        py::arg("seed") = py::none(), "run an experiment config; returns {file name: sha256}");
    m.def("sha256_hex", &io::sha256_hex, py::arg("data"));
}
