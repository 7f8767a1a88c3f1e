// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "pinlab/annealed.hpp"
#include "pinlab/disorder.hpp"
#include "pinlab/fracmom.hpp"
#include "pinlab/kernels.hpp"
#include "pinlab/pam_polymer.hpp"
#include "pinlab/quenched.hpp"
#include "pinlab/renewal.hpp"
#include "pinlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace pinlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_s) {
        o.pass = false;
        o.detail += "; runtime over budget " + fmt("%.0f s", budget_s);
    }
    if (!o.pass) ++failures;
    std::printf("%s [%2d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

Outcome triple_route() {
    std::mt19937_64 g(20240501);
    double worst = 0.0;
    int instances = 0;
    for (; instances < 50; ++instances) {
        const int d = 1 + static_cast<int>(g() % 3);
        const long N = 1 + static_cast<long>(g() % 8);
        quenched::ModelParams p;
        p.d = d;
        p.beta = std::uniform_real_distribution<double>(-1.5, 1.5)(g);
        const bool constrained = g() % 2;
        auto path = disorder::sample_discrete(d, N, g(), 0);
        const double e = quenched::enumerate_partition(p, path, N, constrained).value();
        const double f = quenched::field_dp_partition(p, path, N, constrained).value();
        const double r = quenched::renewal_dp_partition(p, path, N, constrained).value();
        if (e == 0.0) {
            if (f != 0.0 || r != 0.0) worst = INFINITY;
            continue;
        }
        worst = std::max({worst, std::fabs(f / e - 1), std::fabs(r / e - 1)});
    }
    return {worst <= 1e-10, std::to_string(instances) + " instances, max relative gap " + fmt("%.2e", worst)};
}

Outcome green_dual() {
    std::ostringstream os;
    bool ok = true;
    for (int d : {4, 5}) {
        auto g = kernels::green_pair(d, 1e-8);
        const double rel = std::fabs(g.g_pair_series - g.g_pair_quad) / g.g_pair;
        ok = ok && rel <= 1e-6;
        os << "d=" << d << " G=" << fmt("%.10f", g.g_pair) << " rel " << fmt("%.1e", rel) << "; ";
    }
    auto c = kernels::green_ct(3, 0.0, 1e-8);
    const double relc = std::fabs(c.g_ct_time - c.g_ct_quad) / c.g_ct;
    ok = ok && relc <= 1e-6;
    os << "continuous d=3 G_1=" << fmt("%.10f", c.g_ct) << " rel " << fmt("%.1e", relc);
    return {ok, os.str()};
}

Outcome critical_points() {
    bool ok = annealed::critical_point(Mode::discrete, 1) == 0.0 && annealed::critical_point(Mode::discrete, 2) == 0.0;
    std::ostringstream os;
    os << "d=1,2 -> 0; ";
    for (int d : {4, 5}) {
        const double bc = annealed::critical_point(Mode::discrete, d);
        const double ref = std::log1p(1.0 / kernels::green_pair_value(d));
        ok = ok && bc > 0.0 && std::fabs(bc - ref) <= 1e-6;
        os << "d=" << d << " beta_c=" << fmt("%.8f", bc) << "; ";
    }
    double worst = 0.0;
    for (double rho : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
        const double bc = annealed::critical_point(Mode::continuous, 3, rho);
        worst = std::max(worst, std::fabs(bc * kernels::green_ct_value(3, rho) - 1.0));
    }
    ok = ok && worst <= 1e-10;
    os << "continuous max |beta_c G - 1| " << fmt("%.1e", worst);
    return {ok, os.str()};
}

Outcome annealed_slope() {
    auto law = annealed::renewal_law_discrete(5, 20000);
    std::vector<double> r;
    std::ostringstream os;
    for (double z : {1.02, 1.01, 1.005}) {
        r.push_back(annealed::annealed_free_energy(z, law) / (z - 1));
        os << "z=" << z << ": " << fmt("%.5f", r.back()) << "; ";
    }
    const double lo = *std::min_element(r.begin(), r.end()), hi = *std::max_element(r.begin(), r.end());
    const double spread = (hi - lo) / lo;
    os << "spread " << fmt("%.2f%%", 100 * spread);
    return {spread < 0.1, os.str()};
}

Outcome localization_d1() {
    quenched::ModelParams p;
    p.d = 1;
    p.beta = 0.2;
    auto r = quenched::free_energy_estimate(p, 512, 200, 1);
    const double z = r.at_N.mean / r.at_N.stderr_;
    return {r.at_N.mean > 3 * r.at_N.stderr_,
            "F_512 = " + fmt("%.5f", r.at_N.mean) + " +- " + fmt("%.5f", r.at_N.stderr_) + " (" + fmt("%.1f", z) + " sigma)"};
}

Outcome holder_pipeline() {
    auto cfg = fracmom::default_config(Mode::discrete, 4);
    cfg.z = 1.0 + 1.0 / 64;
    cfg.gamma = 0.96;
    cfg.replicas = 400;
    cfg.seed = 11;
    auto A = fracmom::frac_moment_table(cfg, 64, fracmom::Variant::pin);
    auto H = fracmom::holder_split_table(cfg, 64);
    bool ok = true;
    std::ostringstream os;
    for (long N : {56L, 64L}) {
        ok = ok && A[N].mean <= H[N].product + 3 * A[N].stderr_;
        os << "N=" << N << " A=" << fmt("%.4e", A[N].mean) << " +- " << fmt("%.1e", A[N].stderr_) << " <= "
           << fmt("%.4e", H[N].product) << "; ";
    }
    os << "h=" << fmt("%.4f", cfg.tilt());
    return {ok, os.str()};
}

Outcome shrink() {
    bool ok = true;
    std::ostringstream os;
    for (int d : {4, 5}) {
        auto rep = fracmom::shrink_fit(d, {1.01, 1.02, 1.04});
        os << "d=" << d << " s=";
        for (const auto& pt : rep.points) {
            ok = ok && pt.value < 1.0;
            os << fmt("%.5f", pt.value) << (&pt == &rep.points.back() ? "" : ",");
        }
        const bool slope_ok = rep.fitted_c > 0.0 && rep.relative_error <= 0.1;
        ok = ok && slope_ok;
        os << " slope -" << fmt("%.4f", rep.fitted_c) << " vs predicted -" << fmt("%.4f", rep.predicted_c) << " ("
           << fmt("%.1f%%", 100 * rep.relative_error) << "); ";
    }
    return {ok, os.str()};
}

Outcome criterion_trend() {
    std::ostringstream os;
    bool ok = true;
    auto c5 = fracmom::default_config(Mode::discrete, 5);
    c5.gamma = 0.9;
    c5.R = 8;
    c5.replicas = 2000;
    c5.seed = 3;
    auto r5 = fracmom::gap_scan(c5, {1.25, 1.125, 1.0625});
    os << "d=5 A:";
    for (const auto& sp : r5.points) os << " " << fmt("%.4e", sp.window_max);
    os << " rho:";
    for (const auto& sp : r5.points) os << " " << fmt("%.3f", sp.rho.value);
    ok = ok && r5.A_decreasing && r5.rho_decreasing;
    for (std::size_t i = 1; i < r5.points.size(); ++i) ok = ok && r5.points[i].rho.value < r5.points[i - 1].rho.value;
    auto c4 = fracmom::default_config(Mode::discrete, 4);
    c4.replicas = 2000;
    c4.seed = 3;
    auto r4 = fracmom::gap_scan(c4, {1.25, 1.125, 1.0625});
    os << "; d=4 scaled:";
    for (const auto& sp : r4.points) os << " " << fmt("%.4e", sp.scaled);
    os << " rho:";
    for (const auto& sp : r4.points) os << " " << fmt("%.3f", sp.rho.value);
    ok = ok && r4.scaled_decreasing;
    for (std::size_t i = 1; i < r4.points.size(); ++i) ok = ok && r4.points[i].rho.value < r4.points[i - 1].rho.value;
    return {ok, os.str()};
}

Outcome gap_probability() {
    auto law = annealed::renewal_law_discrete(4, 4096);
    renewal::AppendixAParams prm;
    prm.N_grid = {256, 512, 1024, 2048, 4096};
    prm.mc_replicas = 2000;
    prm.seed = 9;
    auto t = renewal::appendixA_scan(prm, law);
    bool mc_ok = true;
    double worst_sigma = 0.0;
    for (const auto& r : t.rows) {
        const double dev = std::fabs(r.mc_value - r.prefactored_value) / r.mc_stderr;
        worst_sigma = std::max(worst_sigma, dev);
        mc_ok = mc_ok && dev <= 3.0;
    }
    std::ostringstream os;
    os << "values";
    for (const auto& r : t.rows) os << " " << fmt("%.5f", r.prefactored_value);
    os << "; max decade ratio " << fmt("%.3f", t.max_decade_ratio) << "; MC worst " << fmt("%.2f", worst_sigma) << " sigma";
    return {t.strictly_decreasing && t.max_decade_ratio <= 0.7 && mc_ok, os.str()};
}

Outcome pam_identity() {
    auto c = pam::compare_lyapunov(1, 1.0, 1.0, 200.0, 100, 11);
    const double diff = c.lambda0.mean - c.free_energy.mean;
    std::ostringstream os;
    os << "lambda0=" << fmt("%.5f", c.lambda0.mean) << " F=" << fmt("%.5f", c.free_energy.mean) << " diff "
       << fmt("%.5f", diff) << " vs 3 sigma " << fmt("%.5f", 3 * c.combined_sigma) << " + band "
       << fmt("%.5f", c.drift_band);
    return {c.agree, os.str()};
}

Outcome size_bias() {
    std::mt19937_64 g(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = u(g), b = u(g), c = u(g), e = u(g);
    const std::vector<std::pair<std::string, std::function<double(double)>>> fs = {
        {"1", [](double) { return 1.0; }},
        {"x", [](double x) { return x; }},
        {"x^2", [](double x) { return x * x; }},
        {"cubic", [=](double x) { return a + x * (b + x * (c + x * e)); }}};
    double worst = 0.0;
    for (long N = 1; N <= 3; ++N)
        for (double lambda : {0.3, 0.7, 1.2})
            for (const auto& [name, f] : fs) worst = std::max(worst, std::fabs(polymer::size_bias_check(lambda, N, 1, f).diff));
    return {worst <= 1e-12, "max |E f(Z~) - E Z f(Z)| = " + fmt("%.2e", worst) + " over N=1..3, 3 couplings, 4 functions"};
}

std::map<std::string, std::string> digests(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.json")
            out[e.path().filename().string()] = io::sha256_hex(io::read_file(e.path()));
    return out;
}

Outcome determinism(const fs::path& configs) {
    const auto root = fs::temp_directory_path() / "pinlab_acceptance_threads";
    fs::remove_all(root);
    std::vector<runner::ExperimentConfig> runs;
    for (const char* name : {"green", "annealed", "quenched", "renewal", "pam", "polymer"})
        runs.push_back(runner::load_config(configs / (std::string(name) + ".json")));
    // the fracmom scan at reduced size
    auto fm = runner::load_config(configs / "fracmom.json");
    fm.params["replicas"] = 200;
    runs.push_back(fm);
    std::size_t files = 0;
    std::vector<std::string> differing;
    for (const auto& cfg : runs) {
        std::map<std::string, std::string> first;
        for (unsigned th : {1u, 4u, 8u}) {
            const auto out = root / (cfg.command + "_t" + std::to_string(th));
            runner::Overrides ov;
            ov.out = out.string();
            ov.threads = th;
            ov.cache_dir = (root / "cache").string();
            runner::run(cfg, ov);
            auto d = digests(out);
            if (th == 1) {
                first = d;
                files += d.size();
            } else if (d != first) {
                differing.push_back(cfg.command + "@" + std::to_string(th));
            }
        }
    }
    fs::remove_all(root);
    std::string detail = std::to_string(runs.size()) + " commands, " + std::to_string(files) + " result files, threads 1/4/8";
    if (!differing.empty()) {
        detail += "; differing:";
        for (const auto& s : differing) detail += " " + s;
    }
    return {differing.empty() && files > 0, detail};
}

} // namespace

int main(int argc, char** argv) {
    fs::path configs = argc > 1 ? fs::path(argv[1]) : fs::path(PINLAB_SOURCE_DIR) / "configs";
    kernels::set_cache_dir((fs::temp_directory_path() / "pinlab_acceptance_cache").string());

    criterion(1, "triple-route quenched equality", 60, triple_route);
    criterion(2, "Green function dual route", 60, green_dual);
    criterion(3, "annealed critical points", 60, critical_points);
    criterion(4, "annealed slope in d=5", 60, annealed_slope);
    criterion(5, "d=1 localization", 300, localization_d1);
    criterion(6, "Hölder pipeline", 600, holder_pipeline);
    criterion(7, "shrink factor", 600, shrink);
    criterion(8, "criterion trend", 1200, criterion_trend);
    criterion(9, "renewal gap probability", 60, gap_probability);
    criterion(10, "PAM identity", 600, pam_identity);
    criterion(11, "size-bias identity", 60, size_bias);
    criterion(12, "determinism across threads", 1200, [&] { return determinism(configs); });

    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
