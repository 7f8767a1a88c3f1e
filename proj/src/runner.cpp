#include "pinlab/runner.hpp"

#include "pinlab/annealed.hpp"
#include "pinlab/common.hpp"
#include "pinlab/fracmom.hpp"
#include "pinlab/kernels.hpp"
#include "pinlab/pam_polymer.hpp"
#include "pinlab/quenched.hpp"
#include "pinlab/renewal.hpp"
#include "pinlab/rng.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#ifndef PINLAB_VERSION
#define PINLAB_VERSION "0.0.0"
#endif

namespace pinlab::runner {

namespace fs = std::filesystem;
using io::Cell;
using io::Table;

const std::vector<std::string> kCommands = {"green", "annealed", "quenched", "fracmom", "renewal", "pam", "polymer"};

namespace {

enum class T { Int, Num, Str, Bool, Ints, Nums, Mode };

struct Key {
    const char* name;
    T type;
    bool required = false;
};

const std::map<std::string, std::vector<Key>>& schemas() {
    static const std::map<std::string, std::vector<Key>> s = {
        {"green", {{"d", T::Ints, true}, {"mode", T::Mode}, {"rho", T::Nums}, {"h", T::Nums}, {"eps", T::Num}}},
        {"annealed",
         {{"d", T::Ints, true},
          {"mode", T::Mode},
          {"rho", T::Nums},
          {"z_grid", T::Nums},
          {"beta_grid", T::Nums},
          {"n_max", T::Int},
          {"N", T::Int}}},
        {"quenched",
         {{"d", T::Int, true},
          {"beta", T::Num, true},
          {"mode", T::Mode},
          {"rho", T::Num},
          {"N", T::Int},
          {"t", T::Num},
          {"replicas", T::Int},
          {"seed", T::Int},
          {"eps", T::Num}}},
        {"fracmom",
         {{"d", T::Int, true},
          {"grid", T::Nums, true},
          {"mode", T::Mode},
          {"gamma", T::Num},
          {"R", T::Int},
          {"epsilon", T::Num},
          {"rho", T::Num},
          {"replicas", T::Int},
          {"seed", T::Int},
          {"dt", T::Num},
          {"h", T::Num},
          {"shrink_grid", T::Nums}}},
        {"renewal",
         {{"d", T::Int},
          {"n_max", T::Int},
          {"c", T::Num},
          {"delta1", T::Num},
          {"delta2", T::Num},
          {"N_grid", T::Ints},
          {"replicas", T::Int},
          {"seed", T::Int},
          {"h", T::Nums}}},
        {"pam",
         {{"d", T::Int},
          {"beta", T::Num, true},
          {"rho", T::Num, true},
          {"t", T::Nums, true},
          {"replicas", T::Int},
          {"seed", T::Int},
          {"eps", T::Num}}},
        {"polymer", {{"d", T::Int}, {"N", T::Int}, {"lambda", T::Nums, true}, {"seed", T::Int}, {"size_bias", T::Bool}}},
    };
    return s;
}

[[noreturn]] void key_error(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what);
}

bool is_int(const Json& v) { return v.is_number_integer() || v.is_number_unsigned(); }

void check_type(const std::string& key, const Json& v, T t) {
    auto all = [&](auto pred) {
        if (!v.is_array()) return pred(v);
        if (v.empty()) return false;
        for (const auto& e : v)
            if (!pred(e)) return false;
        return true;
    };
    bool ok = false;
    switch (t) {
    case T::Int: ok = is_int(v); break;
    case T::Num: ok = v.is_number(); break;
    case T::Str: ok = v.is_string(); break;
    case T::Bool: ok = v.is_boolean(); break;
    case T::Ints: ok = all(is_int); break;
    case T::Nums: ok = all([](const Json& e) { return e.is_number(); }); break;
    case T::Mode: ok = v.is_string() && (v == "discrete" || v == "continuous"); break;
    }
    if (ok) return;
    static const char* names[] = {"an integer",
                                  "a number",
                                  "a string",
                                  "a boolean",
                                  "an integer or a non-empty array of integers",
                                  "a number or a non-empty array of numbers",
                                  "\"discrete\" or \"continuous\""};
    key_error("params." + key, std::string("must be ") + names[static_cast<int>(t)]);
}

// Typed access to validated params.
struct Params {
    const Json& j;

    bool has(const char* k) const { return j.contains(k); }
    long integer(const char* k, long def) const { return has(k) ? j.at(k).get<long>() : def; }
    double number(const char* k, double def) const { return has(k) ? j.at(k).get<double>() : def; }
    bool boolean(const char* k, bool def) const { return has(k) ? j.at(k).get<bool>() : def; }
    Mode mode() const { return has("mode") && j.at("mode") == "continuous" ? Mode::continuous : Mode::discrete; }
    std::vector<double> numbers(const char* k, std::vector<double> def = {}) const {
        if (!has(k)) return def;
        const Json& v = j.at(k);
        if (!v.is_array()) return {v.get<double>()};
        return v.get<std::vector<double>>();
    }
    std::vector<long> integers(const char* k, std::vector<long> def = {}) const {
        if (!has(k)) return def;
        const Json& v = j.at(k);
        if (!v.is_array()) return {v.get<long>()};
        return v.get<std::vector<long>>();
    }
};

void require_range(const char* key, bool ok, const std::string& what) {
    if (!ok) key_error(std::string("params.") + key, what);
}

void check_dim(const char* key, long d) { require_range(key, d >= 1 && d <= 6, "must be in [1, 6]"); }

struct Context {
    fs::path out;
    std::uint64_t seed = 1;
    std::vector<OutputFile> files;

    void emit(const std::string& name, const std::string& bytes) {
        io::write_atomic(out / name, bytes);
        files.push_back({name, io::sha256_hex(bytes), bytes.size()});
    }
    void csv(const std::string& name, const Table& t) { emit(name, io::to_csv(t)); }
    void json(const std::string& name, const Json& j) { emit(name, io::dump_json(j)); }
};

Cell num(double v) { return Cell{v}; }
Cell integer(long v) { return Cell{static_cast<std::int64_t>(v)}; }
Cell text(std::string s) { return Cell{std::move(s)}; }
Cell flag(bool b) { return Cell{b}; }

// ---------------------------------------------------------------------------

void cmd_green(const Params& p, Context& ctx) {
    const Mode mode = p.mode();
    const double eps = p.number("eps", 1e-6);
    require_range("eps", eps > 0.0, "must be > 0");
    Table t{{"mode", "d", "rho", "h", "divergent", "series", "quadrature", "time_integral", "rel_diff", "g_even",
             "g_odd", "gap", "gap_direct", "method"},
            {}};
    for (long d : p.integers("d")) check_dim("d", d);
    for (long d : p.integers("d")) {
        if (mode == Mode::discrete) {
            auto g = kernels::green_pair(static_cast<int>(d), eps);
            const double rel = g.divergent ? NAN : std::fabs(g.g_pair_series - g.g_pair_quad) / g.g_pair;
            t.add({text("discrete"), integer(d), num(0.0), num(0.0), flag(g.divergent), num(g.g_pair_series),
                   num(g.g_pair_quad), num(NAN), num(rel), num(NAN), num(NAN), num(NAN), num(NAN), text(g.method)});
            if (!g.divergent)
                for (double h : p.numbers("h")) {
                    require_range("h", h >= 0.0 && h < 1.0, "must be in [0, 1)");
                    auto tg = kernels::tilted_greens(static_cast<int>(d), h, eps);
                    t.add({text("discrete"), integer(d), num(0.0), num(h), flag(false), num(tg.g_pair),
                           num(tg.g_pair_quad), num(NAN), num(NAN), num(tg.g_even), num(tg.g_odd), num(tg.gap),
                           num(tg.gap_direct), text(tg.method)});
                }
        } else {
            for (double rho : p.numbers("rho", {0.0})) {
                require_range("rho", rho >= 0.0, "must be >= 0");
                auto g = kernels::green_ct(static_cast<int>(d), rho, eps);
                const double rel = g.divergent ? NAN : std::fabs(g.g_ct_quad - g.g_ct_time) / g.g_ct_time;
                t.add({text("continuous"), integer(d), num(rho), num(0.0), flag(g.divergent), num(g.g_ct),
                       num(g.g_ct_quad), num(g.g_ct_time), num(rel), num(NAN), num(NAN), num(NAN), num(NAN),
                       text(g.method)});
            }
        }
    }
    ctx.csv("greens.csv", t);
}

void cmd_annealed(const Params& p, Context& ctx) {
    const Mode mode = p.mode();
    const long n_max = p.integer("n_max", 2000);
    require_range("n_max", n_max >= 16, "must be >= 16");
    const auto ds = p.integers("d");
    for (long d : ds) check_dim("d", d);
    const auto rhos = mode == Mode::continuous ? p.numbers("rho", {0.0}) : std::vector<double>{0.0};
    for (double r : rhos) require_range("rho", r >= 0.0, "must be >= 0");

    Table crit{{"mode", "d", "rho", "beta_c", "G"}, {}};
    for (long d : ds)
        for (double rho : rhos) {
            const double bc = annealed::critical_point(mode, static_cast<int>(d), rho);
            double G = INFINITY;
            if (d >= 3)
                G = mode == Mode::discrete ? kernels::green_pair_value(static_cast<int>(d))
                                           : kernels::green_ct_value(static_cast<int>(d), rho);
            crit.add({text(to_string(mode)), integer(d), num(rho), num(bc), num(G)});
        }
    ctx.csv("critical.csv", crit);

    if (mode == Mode::discrete && p.has("z_grid")) {
        const auto zs = p.numbers("z_grid");
        for (double z : zs) require_range("z_grid", z > 0.0, "values must be > 0");
        const long N = p.integer("N", 0);
        require_range("N", N >= 0 && N <= n_max, "must be in [0, n_max]");
        Table t{{"d", "z", "beta", "F", "F_over_z_minus_1", "L", "log_pin_N", "log_free_N"}, {}};
        for (long d : ds) {
            if (d < 3) continue; // z is undefined when G is infinite
            const auto law = annealed::renewal_law_discrete(static_cast<int>(d), n_max);
            const double G = kernels::green_pair_value(static_cast<int>(d));
            for (double z : zs) {
                const double F = annealed::annealed_free_energy(z, law);
                const long L = z > 1.0 ? annealed::correlation_length(z).L : 0;
                t.add({integer(d), num(z), num(std::log1p(z / G)), num(F), num(z > 1.0 ? F / (z - 1.0) : NAN),
                       integer(L), num(N > 0 ? annealed::annealed_partition(z, law, N, true) : NAN),
                       num(N > 0 ? annealed::annealed_partition(z, law, N, false) : NAN)});
            }
        }
        ctx.csv("annealed.csv", t);
    }
    if (mode == Mode::continuous && p.has("beta_grid")) {
        Table t{{"d", "rho", "beta_bar", "F"}, {}};
        for (long d : ds) {
            if (d < 3) continue;
            for (double rho : rhos)
                for (double bb : p.numbers("beta_grid")) {
                    require_range("beta_grid", bb > 0.0, "values must be > 0");
                    t.add({integer(d), num(rho), num(bb), num(annealed::annealed_free_energy_ct(bb, static_cast<int>(d), rho))});
                }
        }
        ctx.csv("annealed.csv", t);
    }
}

void cmd_quenched(const Params& p, Context& ctx) {
    quenched::ModelParams mp;
    mp.mode = p.mode();
    mp.d = static_cast<int>(p.integer("d", 1));
    check_dim("d", mp.d);
    mp.beta = p.number("beta", 0.0);
    mp.rho = p.number("rho", mp.mode == Mode::continuous ? 1.0 : 0.0);
    require_range("rho", mp.rho >= 0.0, "must be >= 0");
    double H;
    if (mp.mode == Mode::discrete) {
        if (!p.has("N")) key_error("params.N", "required for mode=discrete");
        H = static_cast<double>(p.integer("N", 0));
        require_range("N", H >= 1, "must be >= 1");
    } else {
        if (!p.has("t")) key_error("params.t", "required for mode=continuous");
        H = p.number("t", 0.0);
        require_range("t", H > 0.0, "must be > 0");
    }
    const long reps = p.integer("replicas", 100);
    require_range("replicas", reps >= 2, "must be >= 2");
    const double eps = p.number("eps", 1e-8);
    require_range("eps", eps > 0.0 && eps < 1.0, "must be in (0, 1)");
    auto r = quenched::free_energy_estimate(mp, H, static_cast<std::size_t>(reps), ctx.seed, eps);
    Table t{{"mode", "d", "beta", "rho", "horizon", "replicas", "seed", "F_N", "F_N_stderr", "F_2N", "F_2N_stderr",
             "log_Z_N", "log_Z_N_stderr", "log_Z_2N", "log_Z_2N_stderr", "superadditive_ok"},
            {}};
    t.add({text(to_string(mp.mode)), integer(mp.d), num(mp.beta), num(mp.rho), num(H), integer(reps),
           integer(static_cast<long>(ctx.seed)), num(r.at_N.mean), num(r.at_N.stderr_), num(r.at_2N.mean),
           num(r.at_2N.stderr_), num(r.log_at_N.mean), num(r.log_at_N.stderr_), num(r.log_at_2N.mean),
           num(r.log_at_2N.stderr_), flag(r.superadditive_ok)});
    ctx.csv("free_energy.csv", t);
}

void cmd_fracmom(const Params& p, Context& ctx) {
    const Mode mode = p.mode();
    const int d = static_cast<int>(p.integer("d", 5));
    require_range("d", d >= 4 && d <= 6, "must be in [4, 6]");
    auto cfg = fracmom::default_config(mode, d);
    cfg.gamma = p.number("gamma", cfg.gamma);
    cfg.R = static_cast<int>(p.integer("R", cfg.R));
    require_range("R", cfg.R >= 1, "must be >= 1");
    cfg.epsilon = p.number("epsilon", cfg.epsilon);
    cfg.rho = p.number("rho", cfg.rho);
    if (mode == Mode::continuous) require_range("rho", cfg.rho > 0.0, "must be > 0 in continuous mode");
    const long reps = p.integer("replicas", static_cast<long>(cfg.replicas));
    require_range("replicas", reps >= 2, "must be >= 2");
    cfg.replicas = static_cast<std::size_t>(reps);
    cfg.seed = ctx.seed;
    cfg.dt = p.number("dt", cfg.dt);
    require_range("dt", cfg.dt > 0.0, "must be > 0");
    if (p.has("h")) {
        cfg.h = p.number("h", 0.0);
        require_range("h", cfg.h >= 0.0 && cfg.h < 1.0, "must be in [0, 1)");
    }
    const auto grid = p.numbers("grid");
    for (double c : grid) require_range("grid", c > 1.0, "couplings must be > 1");
    auto rep = fracmom::gap_scan(cfg, grid);

    Table scan{{"coupling", "L", "h", "window_lo", "window_hi", "prefactor", "window_max", "window_max_stderr",
                "scaled", "holder_max", "rho_hat", "rho_head", "rho_window"},
               {}};
    Table A{{"coupling", "n", "A", "A_stderr", "replicas"}, {}};
    Json points = Json::array();
    for (const auto& sp : rep.points) {
        scan.add({num(sp.coupling), integer(sp.L), num(sp.h), integer(sp.window_lo), integer(sp.window_hi),
                  num(sp.prefactor), num(sp.window_max), num(sp.window_max_stderr), num(sp.scaled),
                  num(sp.holder_max), num(sp.rho.value), num(sp.rho.head_block), num(sp.rho.window_block)});
        for (std::size_t i = 0; i < sp.A.size(); ++i)
            A.add({num(sp.coupling), num(sp.A_times[i]), num(sp.A[i].mean), num(sp.A[i].stderr_),
                   integer(static_cast<long>(sp.A[i].replicas))});
        Json terms = Json::array();
        for (const auto& term : sp.rho.terms)
            terms.push_back({{"i", term.i}, {"A", term.A}, {"B", term.B}, {"contribution", term.contribution}});
        points.push_back({{"coupling", sp.coupling},
                          {"L", sp.L},
                          {"rho_hat", sp.rho.value},
                          {"split", sp.rho.split},
                          {"head_block", sp.rho.head_block},
                          {"window_block", sp.rho.window_block},
                          {"terms", terms}});
    }
    ctx.csv("fracmom_scan.csv", scan);
    ctx.csv("fracmom_A.csv", A);
    Json report = {{"mode", to_string(mode)},
                   {"d", d},
                   {"gamma", cfg.gamma},
                   {"R", cfg.R},
                   {"epsilon", cfg.epsilon},
                   {"flags",
                    {{"A_decreasing", rep.A_decreasing},
                     {"scaled_decreasing", rep.scaled_decreasing},
                     {"rho_decreasing", rep.rho_decreasing},
                     {"rho_below_one", rep.rho_below_one}}},
                   {"points", points}};
    if (mode == Mode::discrete && p.has("shrink_grid")) {
        const auto zs = p.numbers("shrink_grid");
        for (double z : zs) require_range("shrink_grid", z >= 1.0 && z < 2.0, "values must be in [1, 2)");
        auto sr = fracmom::shrink_fit(d, zs);
        Table st{{"z", "h", "shrink"}, {}};
        for (const auto& pt : sr.points) st.add({num(pt.z), num(pt.h), num(pt.value)});
        ctx.csv("shrink.csv", st);
        report["shrink"] = {{"fitted_c", sr.fitted_c},
                            {"fitted_b", sr.fitted_b},
                            {"predicted_c", sr.predicted_c},
                            {"relative_error", sr.relative_error}};
    }
    ctx.json("fracmom.json", report);
}

void cmd_renewal(const Params& p, Context& ctx) {
    const int d = static_cast<int>(p.integer("d", 4));
    require_range("d", d >= 3 && d <= 6, "must be in [3, 6]");
    const long n_max = p.integer("n_max", 4096);
    renewal::AppendixAParams ap;
    ap.c = p.number("c", ap.c);
    ap.delta1 = p.number("delta1", ap.delta1);
    ap.delta2 = p.number("delta2", ap.delta2);
    require_range("c", ap.c > 0.0, "must be > 0");
    if (p.has("N_grid")) ap.N_grid = p.integers("N_grid");
    for (long N : ap.N_grid) require_range("N_grid", N >= 1 && N <= n_max, "values must be in [1, n_max]");
    ap.mc_replicas = static_cast<int>(p.integer("replicas", 0));
    require_range("replicas", ap.mc_replicas == 0 || ap.mc_replicas >= 2, "must be 0 or >= 2");
    ap.seed = ctx.seed;
    const auto law = annealed::renewal_law_discrete(d, n_max);
    auto tab = renewal::appendixA_scan(ap, law);
    Table t{{"N", "s", "value", "prefactored_value", "mc_value", "mc_stderr", "ratio", "decade_ratio"}, {}};
    for (const auto& r : tab.rows)
        t.add({integer(r.N), num(r.s), num(r.value), num(r.prefactored_value), num(r.mc_value), num(r.mc_stderr),
               num(r.ratio), num(r.decade_ratio)});
    ctx.csv("appendixA.csv", t);
    Json rep = {{"d", d},
                {"c", ap.c},
                {"delta1", ap.delta1},
                {"delta2", ap.delta2},
                {"strictly_decreasing", tab.strictly_decreasing},
                {"max_ratio", tab.max_ratio},
                {"max_decade_ratio", tab.max_decade_ratio},
                {"decay_flag", tab.decay_flag}};
    if (p.has("h")) {
        Table pt{{"h", "G_even", "G_odd", "G_pair", "cross_check_error", "cross_check_n"}, {}};
        std::vector<annealed::RenewalLaw> laws;
        const int pn = static_cast<int>(std::min<long>(n_max, 512));
        for (double h : p.numbers("h")) {
            require_range("h", h >= 0.0 && h < 1.0, "must be in [0, 1)");
            auto pl = renewal::parity_law(d, h, pn);
            pt.add({num(h), num(pl.G_even), num(pl.G_odd), num(pl.G_pair), num(pl.cross_check_error),
                    integer(pl.cross_check_n)});
            laws.push_back(pl.K_even);
            laws.push_back(pl.K_odd);
        }
        ctx.csv("parity.csv", pt);
        auto dom = renewal::dominating_law(laws, pn);
        rep["domination"] = {{"holds", dom.certificate.holds},
                             {"min_margin", dom.certificate.min_margin},
                             {"raw_mass", dom.raw_mass}};
    }
    ctx.json("renewal.json", rep);
}

void cmd_pam(const Params& p, Context& ctx) {
    const int d = static_cast<int>(p.integer("d", 1));
    check_dim("d", d);
    const double beta = p.number("beta", 0.0);
    const double rho = p.number("rho", 1.0);
    require_range("rho", rho >= 0.0, "must be >= 0");
    const long reps = p.integer("replicas", 100);
    require_range("replicas", reps >= 2, "must be >= 2");
    const double eps = p.number("eps", 1e-8);
    require_range("eps", eps > 0.0 && eps < 1.0, "must be in (0, 1)");
    const auto ts = p.numbers("t");
    for (double t : ts) require_range("t", t > 0.0, "values must be > 0");
    Table out{{"t", "lambda0_hat", "lambda0_stderr", "F_hat", "F_stderr", "paired_difference", "paired_stderr",
               "drift_band", "agree"},
              {}};
    for (double t : ts) {
        auto c = pam::compare_lyapunov(d, beta, rho, t, static_cast<std::size_t>(reps), ctx.seed, eps);
        out.add({num(t), num(c.lambda0.mean), num(c.lambda0.stderr_), num(c.free_energy.mean),
                 num(c.free_energy.stderr_), num(c.paired_difference.mean), num(c.paired_difference.stderr_),
                 num(c.drift_band), flag(c.agree)});
    }
    ctx.csv("lyapunov.csv", out);
}

void cmd_polymer(const Params& p, Context& ctx) {
    const int d = static_cast<int>(p.integer("d", 1));
    check_dim("d", d);
    const long N = p.integer("N", 3);
    require_range("N", N >= 1, "must be >= 1");
    const auto law = polymer::DisorderLaw::bernoulli_pm1();
    const auto lams = p.numbers("lambda");
    for (double l : lams) require_range("lambda", l >= 0.0, "values must be >= 0");
    const bool small = d == 1 && N <= 3;
    const bool do_sb = p.boolean("size_bias", small);
    if (do_sb && !small) key_error("params.size_bias", "exhaustive check needs d = 1 and N <= 3");

    const double l2 = polymer::lambda2(d, law);
    auto omega = polymer::OmegaField::sample(d, N, law, ctx.seed);
    Table t{{"lambda", "M", "beta_hat", "lambda2", "Z_sample", "route", "exact", "mean_Z", "second_moment",
             "martingale_gap"},
            {}};
    for (double l : lams) {
        auto z = polymer::polymer_partition(l, N, d, omega, law);
        polymer::ExactMoments em;
        bool exact = false;
        if (d == 1 && N <= 3) {
            em = polymer::exact_moments(l, N, d, law);
            exact = true;
        }
        t.add({num(l), num(law.log_mgf(l)), num(polymer::beta_hat(l, law)), num(l2), num(z.value), text(z.route),
               flag(exact), num(exact ? em.mean : NAN), num(exact ? em.second : NAN),
               num(exact ? em.martingale_gap : NAN)});
    }
    ctx.csv("polymer.csv", t);

    if (do_sb) {
        Rng rng(ctx.seed, Stream::polymer, 1u << 20);
        double a[4];
        for (double& c : a) c = 2.0 * rng.uniform() - 1.0;
        struct Fn {
            std::string name;
            std::function<double(double)> f;
        };
        const std::vector<Fn> fns = {
            {"one", [](double) { return 1.0; }},
            {"x", [](double x) { return x; }},
            {"x2", [](double x) { return x * x; }},
            {"cubic", [a](double x) { return a[0] + x * (a[1] + x * (a[2] + x * a[3])); }},
        };
        Table sb{{"lambda", "f", "lhs", "rhs", "diff"}, {}};
        for (double l : lams)
            for (const auto& fn : fns) {
                auto r = polymer::size_bias_check(l, N, d, fn.f, law);
                sb.add({num(l), text(fn.name), num(r.lhs), num(r.rhs), num(r.diff)});
            }
        ctx.csv("size_bias.csv", sb);
    }
}

} // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const Json& j, const std::string& cli_command) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "command" && it.key() != "params" && it.key() != "output")
            key_error(it.key(), "unknown key (allowed: command, params, output)");
    ExperimentConfig c;
    if (j.contains("command")) {
        if (!j["command"].is_string()) key_error("command", "must be a string");
        c.command = j["command"].get<std::string>();
    }
    if (!cli_command.empty()) {
        if (!c.command.empty() && c.command != cli_command)
            key_error("command", "'" + c.command + "' does not match the command line ('" + cli_command + "')");
        c.command = cli_command;
    }
    if (c.command.empty()) key_error("command", "required key missing");
    const auto& sch = schemas();
    auto sit = sch.find(c.command);
    if (sit == sch.end()) key_error("command", "unknown command '" + c.command + "'");
    if (j.contains("output")) {
        if (!j["output"].is_string()) key_error("output", "must be a string");
        c.output = j["output"].get<std::string>();
    }
    if (j.contains("params")) {
        if (!j["params"].is_object()) key_error("params", "must be an object");
        c.params = j["params"];
    }
    for (auto it = c.params.begin(); it != c.params.end(); ++it) {
        const Key* k = nullptr;
        for (const auto& key : sit->second)
            if (it.key() == key.name) k = &key;
        if (!k) key_error("params." + it.key(), "unknown key for command '" + c.command + "'");
        check_type(it.key(), it.value(), k->type);
    }
    for (const auto& key : sit->second)
        if (key.required && !c.params.contains(key.name)) key_error(std::string("params.") + key.name, "required key missing");
    return c;
}

ExperimentConfig load_config(const fs::path& path, const std::string& cli_command) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const Error& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    return parse_config(j, cli_command);
}

Json RunManifest::to_json() const {
    Json files_j = Json::array();
    for (const auto& f : files) files_j.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return {{"config", config},
            {"tool_version", tool_version},
            {"wall_time_seconds", wall_time},
            {"threads", threads},
            {"cache", {{"dir", cache_dir}, {"memory_hits", memory_hits}, {"disk_hits", disk_hits}, {"builds", builds}}},
            {"files", files_j}};
}

RunManifest run(const ExperimentConfig& cfg_in, const Overrides& ov) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = cfg_in;
    if (ov.out) cfg.output = *ov.out;
    if (cfg.output.empty()) key_error("output", "no output directory (set 'output' or pass --out)");
    if (ov.seed) cfg.params["seed"] = *ov.seed;
    // re-validate after overrides (seed is not a key of every command)
    if (ov.seed) {
        const auto& keys = schemas().at(cfg.command);
        const bool takes_seed = std::any_of(keys.begin(), keys.end(), [](const Key& k) { return std::string(k.name) == "seed"; });
        if (!takes_seed) cfg.params.erase("seed");
    }
    if (cfg.params.contains("seed") && !(cfg.params["seed"].is_number_unsigned() || cfg.params["seed"].get<long long>() >= 0))
        key_error("params.seed", "must be a non-negative integer");

    const unsigned threads = ov.threads.value_or(1);
    if (threads < 1) key_error("--threads", "must be >= 1");
    set_worker_threads(threads);

    Context ctx;
    ctx.out = cfg.output;
    ctx.seed = cfg.params.contains("seed") ? cfg.params["seed"].get<std::uint64_t>() : 1;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec || !fs::is_directory(ctx.out)) key_error("output", "cannot create directory " + ctx.out.string());
    kernels::set_cache_dir(ov.cache_dir ? *ov.cache_dir : (ctx.out / "cache").string());
    const auto before = kernels::cache_stats();

    Params p{cfg.params};
    if (cfg.command == "green") cmd_green(p, ctx);
    else if (cfg.command == "annealed") cmd_annealed(p, ctx);
    else if (cfg.command == "quenched") cmd_quenched(p, ctx);
    else if (cfg.command == "fracmom") cmd_fracmom(p, ctx);
    else if (cfg.command == "renewal") cmd_renewal(p, ctx);
    else if (cfg.command == "pam") cmd_pam(p, ctx);
    else if (cfg.command == "polymer") cmd_polymer(p, ctx);

    const auto after = kernels::cache_stats();
    RunManifest m;
    m.config = {{"command", cfg.command}, {"params", cfg.params}, {"output", cfg.output}};
    m.tool_version = PINLAB_VERSION;
    m.threads = threads;
    m.cache_dir = kernels::cache_dir();
    m.memory_hits = after.memory_hits - before.memory_hits;
    m.disk_hits = after.disk_hits - before.disk_hits;
    m.builds = after.builds - before.builds;
    m.files = ctx.files;
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    io::write_atomic(ctx.out / "manifest.json", io::dump_json(m.to_json()));
    return m;
}

bool verify_manifest(const fs::path& dir) {
    const Json m = Json::parse(io::read_file(dir / "manifest.json"));
    for (const auto& f : m.at("files")) {
        const std::string bytes = io::read_file(dir / f.at("name").get<std::string>());
        if (io::sha256_hex(bytes) != f.at("sha256").get<std::string>()) return false;
        if (bytes.size() != f.at("bytes").get<std::uint64_t>()) return false;
    }
    return true;
}

} // namespace pinlab::runner
