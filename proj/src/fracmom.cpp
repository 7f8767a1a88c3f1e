#include "pinlab/fracmom.hpp"
#include "pinlab/disorder.hpp"
#include "pinlab/kernels.hpp"
#include "pinlab/renewal.hpp"
#include "pinlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pinlab::fracmom {

double FracMomConfig::tilt() const {
    if (!std::isnan(h)) return h;
    if (mode == Mode::discrete) return z > 1.0 ? std::sqrt(z - 1.0) : 0.0;
    return beta_bar > 1.0 ? std::sqrt(rho * (beta_bar - 1.0)) : 0.0;
}

long FracMomConfig::correlation() const {
    if (L > 0) return L;
    return annealed::correlation_length(coupling()).L;
}

void FracMomConfig::validate() const {
    if (d < 4 || d > kernels::kMaxDim) throw InvalidArgument("fracmom: d must be in [4, 6]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("fracmom: gamma must lie in (0, 1]");
    if (d >= 5 && !(d * gamma / 2.0 > 2.0)) throw InvalidArgument("fracmom: gamma must satisfy d*gamma/2 > 2");
    if (d == 4) {
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("fracmom: epsilon must lie in (0, 1)");
        if (!(2.0 * gamma - 1.0 > 1.0 - epsilon))
            throw InvalidArgument("fracmom: gamma must satisfy 2*gamma - 1 > 1 - epsilon");
    }
    if (R < 1) throw InvalidArgument("fracmom: R must be >= 1");
    if (replicas < 2) throw InvalidArgument("fracmom: replicas must be >= 2");
    if (mode == Mode::discrete) {
        if (!(z > 0.0)) throw InvalidArgument("fracmom: z must be > 0");
    } else {
        if (!(beta_bar > 0.0)) throw InvalidArgument("fracmom: beta_bar must be > 0");
        if (!(rho > 0.0)) throw InvalidArgument("fracmom: rho must be > 0 in continuous mode");
        if (!(dt > 0.0)) throw InvalidArgument("fracmom: dt must be > 0");
    }
    const double t = tilt();
    if (!(t >= 0.0 && t < 1.0)) throw InvalidArgument("fracmom: h must lie in [0, 1)");
}

FracMomConfig default_config(Mode mode, int d) {
    FracMomConfig c;
    c.mode = mode;
    c.d = d;
    c.gamma = d == 4 ? 0.96 : 0.9;
    c.epsilon = 0.1;
    c.R = 8;
    if (mode == Mode::continuous) c.rho = 1.0;
    return c;
}

const char* to_string(Sampling s) {
    switch (s) {
    case Sampling::plain: return "plain";
    case Sampling::tilted: return "tilted";
    case Sampling::importance: return "importance";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::vector<McEstimate> frac_moment_table(const FracMomConfig& cfg, long N_max, Variant variant, Sampling sampling) {
    cfg.validate();
    if (cfg.mode != Mode::discrete) throw InvalidArgument("frac_moment_table: discrete mode only");
    if (variant != Variant::pin && variant != Variant::free)
        throw InvalidArgument("frac_moment_table: discrete variants are pin and free");
    if (N_max < 0) throw InvalidArgument("frac_moment_table: N must be >= 0");
    const int d = cfg.d;
    const double zp = cfg.z / kernels::green_pair_value(d);
    const double h = cfg.tilt();
    const double g = cfg.gamma;
    auto table = kernels::kernel_table(d, static_cast<int>(std::max<long>(N_max, 1)));
    const std::size_t R = cfg.replicas;
    std::vector<double> samples((N_max + 1) * R);
    parallel_for(R, [&](std::size_t r) {
        auto path = sampling == Sampling::plain ? disorder::sample_discrete(d, N_max, cfg.seed, r)
                                                : disorder::sample_tilted(d, N_max, h, cfg.seed, r);
        auto z = quenched::pinned_sequence(zp, path, N_max, *table);
        if (variant == Variant::free) {
            double acc = 1.0;
            for (long n = 1; n <= N_max; ++n) {
                acc += z[n];
                z[n] = acc;
            }
        }
        std::vector<double> f;
        if (sampling == Sampling::importance) f = disorder::rn_density_prefix(path, h);
        for (long n = 0; n <= N_max; ++n) {
            double v = std::pow(z[n], g);
            if (sampling == Sampling::importance) v /= f[n];
            samples[n * R + r] = v;
        }
    });
    std::vector<McEstimate> out(N_max + 1);
    for (long n = 0; n <= N_max; ++n)
        out[n] = summarize(std::span<const double>(samples.data() + n * R, R), cfg.seed);
    return out;
}

McEstimate frac_moment_mc(const FracMomConfig& cfg, double horizon, Variant variant, Sampling sampling) {
    cfg.validate();
    if (cfg.mode == Mode::discrete) {
        const long N = std::lround(horizon);
        if (N < 0 || std::fabs(N - horizon) > 1e-9) throw InvalidArgument("frac_moment_mc: N must be a nonnegative integer");
        return frac_moment_table(cfg, N, variant, sampling)[N];
    }
    if (!(horizon > 0.0)) throw InvalidArgument("frac_moment_mc: t must be > 0");
    const int d = cfg.d;
    const double h = cfg.tilt();
    quenched::ModelParams p;
    p.mode = Mode::continuous;
    p.d = d;
    p.rho = cfg.rho;
    p.beta = cfg.beta_bar / kernels::green_ct_value(d, cfg.rho);
    std::vector<double> v(cfg.replicas);
    parallel_for(cfg.replicas, [&](std::size_t r) {
        const double rate = sampling == Sampling::plain ? cfg.rho : cfg.rho + h;
        auto path = disorder::sample_ct(d, rate, horizon, cfg.seed, r);
        auto mp = quenched::ct_modified_partitions(p, path, horizon, cfg.dt);
        double x = 0.0;
        switch (variant) {
        case Variant::pin: x = p.beta * mp.pin_full.value(); break;
        case Variant::free: x = mp.free_full.value(); break;
        case Variant::pin1: x = mp.pin1.value(); break;
        case Variant::pin2: x = mp.pin2.value(); break;
        case Variant::z1: x = mp.z1.value(); break;
        }
        x = std::pow(x, cfg.gamma);
        if (sampling == Sampling::importance) x /= disorder::rn_density_ct(path, cfg.rho, h, horizon);
        v[r] = x;
    });
    return summarize(v, cfg.seed);
}

// ---------------------------------------------------------------------------
// Gap coefficients and ρ̌

namespace {

// Σ_{j > k} (j - k) j^{-s} for the fitted power form.
double weighted_tail(const kernels::PowerTail& t, long k) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.c.size(); ++i) {
        const double e = t.s + static_cast<double>(i);
        if (e <= 2.0) return INFINITY;
        s += t.c[i] * (special::hurwitz_zeta(e - 1.0, k + 1.0) - k * special::hurwitz_zeta(e, k + 1.0));
    }
    return s;
}

} // namespace

double GapCoefficients::b_at(long m) const {
    if (m < 1) return 0.0;
    if (m <= M()) return b[m];
    // discrete: b(2k-1) = b(2k) = q(k); continuous fits b directly
    return paired ? tail.at(static_cast<double>((m + 1) / 2)) : tail.at(static_cast<double>(m));
}

double GapCoefficients::B_at(long m) const {
    if (m < 1) m = 1;
    if (m <= M()) return B[m];
    if (!paired) return b_at(m) + tail.sum_beyond(m);
    const long k = (m + 1) / 2;
    // B(2k-1) = 2 Σ_{j >= k} q(j); B(2k) = q(k) + 2 Σ_{j > k} q(j)
    const double s = tail.sum_beyond(k);
    return m % 2 ? 2.0 * (tail.at(static_cast<double>(k)) + s) : tail.at(static_cast<double>(k)) + 2.0 * s;
}

double GapCoefficients::head_sum(long R) const {
    if (R < 1) R = 1;
    if (R > M()) throw InvalidArgument("head_sum: R beyond the tabulated range");
    std::vector<double> t;
    for (long m = R; m <= M(); ++m) t.push_back(B[m]);
    double s = pairwise_sum(t);
    if (paired) {
        // Σ_{m > M} B(m) = Σ_{k > K} [4 S(k) - q(k)], S(k) = Σ_{j >= k} q(j), M = 2K
        const long K = M() / 2;
        const double w = weighted_tail(tail, K); // Σ_{j > K} (j - K) q(j) = Σ_{k > K} S(k)
        s += 4.0 * w - tail.sum_beyond(K);
    } else {
        s += weighted_tail(tail, M()) + tail.sum_beyond(M());
    }
    return s;
}

GapCoefficients gap_coefficients(int d, double z, double gamma, long M) {
    if (d < 3 || d > kernels::kMaxDim) throw InvalidArgument("gap_coefficients: d must be in [3, 6]");
    if (M < 64) throw InvalidArgument("gap_coefficients: M must be >= 64");
    if (M % 2) ++M;
    const long K = M / 2;
    const double G = kernels::green_pair_value(d);
    auto P = kernels::pair_return_series(d, static_cast<int>(K)); // P[k] = p_{2k}(0)
    GapCoefficients gc;
    gc.d = d;
    gc.z = z;
    gc.gamma = gamma;
    gc.paired = true;
    std::vector<double> q(K + 1, 0.0);
    for (long k = 1; k <= K; ++k) q[k] = std::pow(z / G * P[k], gamma);
    // max_x p_m(x) is p_m(0) for even m and p_m(e_1) = p_{m+1}(0) for odd m
    gc.b.assign(M + 1, 0.0);
    for (long m = 1; m <= M; ++m) gc.b[m] = q[(m + 1) / 2];
    gc.tail = kernels::fit_power_tail(q, K / 2, K, d * gamma / 2.0, 3);
    gc.B.assign(M + 2, 0.0);
    gc.B[M + 1] = 2.0 * gc.tail.sum_beyond(K);
    for (long m = M; m >= 1; --m) gc.B[m] = gc.b[m] + gc.B[m + 1];
    gc.B.resize(M + 1);
    return gc;
}

GapCoefficients gap_coefficients_ct(int d, double rho, double beta_bar, double gamma, long M) {
    if (d < 3 || d > kernels::kMaxDim) throw InvalidArgument("gap_coefficients_ct: d must be in [3, 6]");
    if (M < 64) throw InvalidArgument("gap_coefficients_ct: M must be >= 64");
    const double G = kernels::green_ct_value(d, rho);
    GapCoefficients gc;
    gc.d = d;
    gc.z = beta_bar;
    gc.gamma = gamma;
    gc.paired = false;
    gc.b.assign(M + 1, 0.0);
    std::vector<int> zero(d, 0);
    for (long m = 1; m <= M; ++m) {
        const double p = m == 1 ? 1.0 : kernels::ct_kernel_fast(d, static_cast<double>(m - 1), zero.data());
        gc.b[m] = std::pow(beta_bar * p / G, gamma);
    }
    gc.tail = kernels::fit_power_tail(gc.b, M / 2, M, d * gamma / 2.0, 3);
    gc.B.assign(M + 2, 0.0);
    gc.B[M + 1] = gc.tail.sum_beyond(M);
    for (long m = M; m >= 1; --m) gc.B[m] = gc.b[m] + gc.B[m + 1];
    gc.B.resize(M + 1);
    return gc;
}

RhoHat rho_hat(const FracMomConfig& cfg, const std::vector<double>& A_pin, const GapCoefficients& gaps) {
    const long L = cfg.correlation();
    if (static_cast<long>(A_pin.size()) < L)
        throw InvalidArgument("rho_hat: A_pin must cover i = 0..L-1 (insufficient A coverage)");
    RhoHat r;
    r.L = L;
    r.split = 0;
    if (cfg.d == 4) {
        r.split = static_cast<long>(std::ceil(std::pow(static_cast<double>(L), 1.0 - cfg.epsilon)));
        r.prefactor = std::pow(static_cast<double>(L), 2.0 - 2.0 * cfg.gamma);
    } else {
        r.split = std::max<long>(0, L - cfg.R + 1);
    }
    std::vector<double> head, window;
    for (long i = 0; i < L; ++i) {
        if (!(A_pin[i] >= 0.0)) throw InvalidArgument("rho_hat: A values must be nonnegative");
        RhoHatTerm t;
        t.i = i;
        t.A = A_pin[i];
        t.B = gaps.B_at(L - i);
        t.contribution = t.A * t.B;
        (i < r.split ? head : window).push_back(t.contribution);
        r.terms.push_back(t);
    }
    r.head_block = pairwise_sum(head);
    r.window_block = pairwise_sum(window);
    r.value = r.head_block + r.window_block;
    return r;
}

RhoHat rho_hat(const FracMomConfig& cfg, const std::vector<double>& A_pin) {
    auto gaps = cfg.mode == Mode::discrete ? gap_coefficients(cfg.d, cfg.z, cfg.gamma)
                                           : gap_coefficients_ct(cfg.d, cfg.rho, cfg.beta_bar, cfg.gamma);
    return rho_hat(cfg, A_pin, gaps);
}

// ---------------------------------------------------------------------------
// Tilted annealed systems

TiltedAnnealed tilted_annealed_discrete(double z, double h, long N_max, int d) {
    if (d < 4) throw InvalidArgument("tilted_annealed_discrete: d must be >= 4");
    if (!(z >= 0.0)) throw InvalidArgument("tilted_annealed_discrete: z must be >= 0");
    if (N_max < 0) throw InvalidArgument("tilted_annealed_discrete: N must be >= 0");
    const int n = static_cast<int>(std::max<long>(N_max, 1));
    auto pl = renewal::parity_law(d, h, n);
    TiltedAnnealed out;
    out.G_even = pl.G_even;
    out.G_odd = pl.G_odd;
    out.G_pair = pl.G_pair;
    out.w = z * std::max(pl.G_even, pl.G_odd) / pl.G_pair;
    const double zg = z / pl.G_pair;
    out.value.assign(N_max + 1, 0.0);
    out.value[0] = 1.0;
    std::vector<double> t;
    for (long j = 1; j <= N_max; ++j) {
        t.clear();
        for (long i = 0; i < j; ++i) t.push_back(out.value[i] * zg * (i % 2 ? pl.E_odd[j - i] : pl.E_even[j - i]));
        out.value[j] = pairwise_sum(t);
    }
    // E^{K_h}[w^{|ι ∩ [1,N]|}] by a backward recursion per horizon
    const renewal::RenewalLaw* law[2] = {&pl.K_even, &pl.K_odd};
    std::vector<double> tails[2];
    for (int par = 0; par < 2; ++par) {
        tails[par].resize(N_max + 1);
        for (long m = 0; m <= N_max; ++m) tails[par][m] = law[par]->tail_mass(m);
    }
    out.dominating_bound.assign(N_max + 1, 1.0);
    std::vector<double> g;
    for (long N = 1; N <= N_max; ++N) {
        g.assign(N + 1, 0.0);
        for (long j = N; j >= 0; --j) {
            const auto& K = law[j % 2]->K;
            t.clear();
            for (long m = 1; m <= N - j; ++m) t.push_back(K[m] * g[j + m]);
            g[j] = out.w * pairwise_sum(t) + tails[j % 2][N - j];
        }
        out.dominating_bound[N] = g[0];
    }
    return out;
}

TiltedCt tilted_annealed_ct(int d, double beta_bar, double rho, double h, double t, double dt) {
    if (d < 3) throw InvalidArgument("tilted_annealed_ct: d must be >= 3");
    if (!(rho >= 0.0) || !(h >= 0.0)) throw InvalidArgument("tilted_annealed_ct: need rho >= 0 and h >= 0");
    if (!(t > 0.0) || !(dt > 0.0)) throw InvalidArgument("tilted_annealed_ct: need t > 0 and a grid step > 0");
    auto run = [&](long n) {
        TiltedCt o;
        const double step = t / n;
        const double G1 = kernels::green_ct_value(d, 0.0);
        const double Gr = G1 / (1.0 + rho);
        o.G = G1 / (1.0 + rho + h);
        o.beta_prime = (1.0 + rho) * beta_bar / (1.0 + rho + h);
        const double bp = o.beta_prime;
        std::vector<int> zero(d, 0);
        std::vector<double> Kp(n + 1), K(n + 1);
        for (long k = 0; k <= n; ++k) {
            const double s = k * step;
            o.times.push_back(s);
            Kp[k] = kernels::ct_kernel_fast(d, (1.0 + rho + h) * s, zero.data()) / o.G;
            K[k] = kernels::ct_kernel_fast(d, (1.0 + rho) * s, zero.data()) / Gr;
        }
        const double self = 1.0 - 0.5 * step * bp * Kp[0];
        // c: pinned density, a: first gap untilted, m: renewal mean of β̄'^{count}
        std::vector<double> c(n + 1), a(n + 1), pin2(n + 1), S(n + 1), m(n + 1), tc, ta, tm, t2;
        c[0] = bp * Kp[0];
        a[0] = K[0];
        pin2[0] = K[0];
        S[0] = 1.0;
        m[0] = 1.0;
        double cum = 0.0;
        for (long j = 1; j <= n; ++j) {
            cum += 0.5 * step * (Kp[j - 1] + Kp[j]);
            S[j] = std::max(0.0, 1.0 - cum);
            tc = {0.5 * c[0] * Kp[j]};
            ta = {0.5 * a[0] * Kp[j]};
            tm = {0.5 * Kp[j] * m[0]};
            for (long k = 1; k < j; ++k) {
                tc.push_back(c[k] * Kp[j - k]);
                ta.push_back(a[k] * Kp[j - k]);
                tm.push_back(Kp[k] * m[j - k]);
            }
            c[j] = (bp * Kp[j] + step * bp * pairwise_sum(tc)) / self;
            a[j] = (K[j] + step * bp * pairwise_sum(ta)) / self;
            m[j] = (S[j] + step * bp * pairwise_sum(tm)) / self;
            t2 = {0.5 * a[0] * K[j], 0.5 * a[j] * K[0]};
            for (long k = 1; k < j; ++k) t2.push_back(a[k] * K[j - k]);
            pin2[j] = K[j] + step * pairwise_sum(t2);
        }
        // C_{ρ+h} = sup_u K'(u)/K'(u+1); K' is decreasing so s = 1 is the worst shift
        double C = 1.0;
        for (double u = 0.0; u <= std::max(t, 50.0); u += 0.01) {
            const double r = kernels::ct_kernel_fast(d, (1.0 + rho + h) * u, zero.data()) /
                             kernels::ct_kernel_fast(d, (1.0 + rho + h) * (u + 1.0), zero.data());
            C = std::max(C, r);
        }
        o.C = C;
        o.value = c;
        o.renewal_mean = m;
        o.pin2 = pin2;
        o.bound.resize(n + 1);
        for (long j = 0; j <= n; ++j) o.bound[j] = C * bp * m[j];
        return o;
    };
    const long n = std::max<long>(2, std::lround(t / dt));
    auto fine = run(n);
    auto coarse = run(std::max<long>(1, n / 2));
    const double rel = std::fabs(fine.value.back() - coarse.value.back()) / fine.value.back();
    if (!(rel < 0.05)) {
        std::ostringstream os;
        os << "tilted_annealed_ct: grid step " << t / n << " not converged (halving changes the value by " << rel
           << ", tolerance 0.05)";
        throw ToleranceNotMet(os.str(), rel);
    }
    return fine;
}

// ---------------------------------------------------------------------------
// Hölder split

std::vector<HolderSplit> holder_split_table(const FracMomConfig& cfg, long N_max) {
    cfg.validate();
    if (cfg.mode != Mode::discrete) throw InvalidArgument("holder_split_table: discrete mode only");
    const double h = cfg.tilt();
    const double g = cfg.gamma;
    auto ta = tilted_annealed_discrete(cfg.z, h, N_max, cfg.d);
    std::vector<HolderSplit> out(N_max + 1);
    for (long N = 0; N <= N_max; ++N) {
        auto& s = out[N];
        s.density_moment = disorder::density_moment_discrete(cfg.d, h, g, N);
        s.density_bound = disorder::density_moment_discrete_bound(cfg.d, h, g, N);
        s.holder_factor = std::pow(s.density_moment, 1.0 - g);
        s.tilted_value = ta.value[N];
        s.tilted_bound = std::pow(s.tilted_value, g);
        s.product = s.holder_factor * s.tilted_bound;
    }
    return out;
}

HolderSplit holder_split(const FracMomConfig& cfg, double horizon) {
    cfg.validate();
    if (cfg.mode == Mode::discrete) {
        const long N = std::lround(horizon);
        if (N < 0) throw InvalidArgument("holder_split: N must be >= 0");
        return holder_split_table(cfg, N)[N];
    }
    const double h = cfg.tilt();
    const double g = cfg.gamma;
    HolderSplit s;
    s.density_moment = disorder::density_moment_ct(cfg.rho, h, g, horizon);
    s.density_bound = disorder::density_moment_ct_bound(cfg.rho, h, g, horizon);
    s.holder_factor = std::pow(s.density_moment, 1.0 - g);
    auto tc = tilted_annealed_ct(cfg.d, cfg.beta_bar, cfg.rho, h, horizon, cfg.dt);
    s.tilted_value = tc.pin2.back();
    s.tilted_bound = std::pow(s.tilted_value, g);
    s.product = s.holder_factor * s.tilted_bound;
    return s;
}

// ---------------------------------------------------------------------------
// Shrink factor

double shrink_factor(int d, double z) {
    if (d < 4) throw InvalidArgument("shrink_factor: d must be >= 4");
    if (!(z >= 1.0 && z < 2.0)) throw InvalidArgument("shrink_factor: z must lie in [1, 2)");
    if (z == 1.0) return 1.0;
    auto tg = kernels::tilted_greens(d, std::sqrt(z - 1.0));
    // ratio against the quadrature value so that the same rule is used top and bottom
    return z * std::max(tg.g_even, tg.g_odd) / tg.g_pair_quad;
}

ShrinkReport shrink_fit(int d, const std::vector<double>& z_grid) {
    ShrinkReport r;
    r.d = d;
    double s11 = 0, s12 = 0, s22 = 0, y1 = 0, y2 = 0;
    for (double z : z_grid) {
        ShrinkPoint p;
        p.z = z;
        p.h = std::sqrt(z - 1.0);
        p.value = shrink_factor(d, z);
        r.points.push_back(p);
        // value - 1 = -c h + b h²
        const double x1 = -p.h, x2 = p.h * p.h, y = p.value - 1.0;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        y1 += x1 * y;
        y2 += x2 * y;
    }
    const double det = s11 * s22 - s12 * s12;
    if (z_grid.size() < 2 || std::fabs(det) < 1e-300) throw InvalidArgument("shrink_fit: need two distinct z > 1");
    r.fitted_c = (y1 * s22 - y2 * s12) / det;
    r.fitted_b = (s11 * y2 - s12 * y1) / det;
    r.predicted_c = kernels::gap_slope_at_zero(d) / kernels::green_pair(d, 1e-6).g_pair_quad;
    r.relative_error = std::fabs(r.fitted_c - r.predicted_c) / r.predicted_c;
    return r;
}

// ---------------------------------------------------------------------------
// Scan

FracMomReport gap_scan(const FracMomConfig& cfg, const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidArgument("gap_scan: empty coupling grid");
    FracMomReport rep;
    rep.config = cfg;
    for (double c : grid) {
        FracMomConfig k = cfg;
        k.L = 0;
        if (cfg.mode == Mode::discrete)
            k.z = c;
        else
            k.beta_bar = c;
        if (!(c > 1.0)) throw InvalidArgument("gap_scan: couplings must be > 1");
        k.validate();
        ScanPoint sp;
        sp.coupling = c;
        sp.L = k.correlation();
        sp.h = k.tilt();
        const long L = sp.L;
        if (cfg.d == 4) {
            sp.window_lo = std::max<long>(1, static_cast<long>(std::ceil(std::pow(static_cast<double>(L), 1.0 - cfg.epsilon))));
            sp.prefactor = std::pow(static_cast<double>(L), 2.0 - 2.0 * cfg.gamma);
        } else {
            sp.window_lo = std::max<long>(1, L - cfg.R);
        }
        sp.window_hi = L;
        std::vector<double> Ameans;
        if (cfg.mode == Mode::discrete) {
            sp.A = frac_moment_table(k, L, Variant::pin, Sampling::plain);
            for (long n = 0; n <= L; ++n) sp.A_times.push_back(static_cast<double>(n));
            auto hs = holder_split_table(k, L);
            for (long n = sp.window_lo; n <= L; ++n) sp.holder_max = std::max(sp.holder_max, hs[n].product);
            for (auto& e : sp.A) Ameans.push_back(e.mean);
        } else {
            sp.A.push_back(McEstimate{1.0, 0.0, k.replicas, k.seed});
            sp.A_times.push_back(0.0);
            for (long n = 1; n <= L; ++n) {
                sp.A.push_back(frac_moment_mc(k, static_cast<double>(n), Variant::pin2, Sampling::plain));
                sp.A_times.push_back(static_cast<double>(n));
                if (n >= sp.window_lo) sp.holder_max = std::max(sp.holder_max, holder_split(k, n).product);
            }
            for (auto& e : sp.A) Ameans.push_back(e.mean);
        }
        for (long n = sp.window_lo; n <= L; ++n)
            if (sp.A[n].mean >= sp.window_max) {
                sp.window_max = sp.A[n].mean;
                sp.window_max_stderr = sp.A[n].stderr_;
            }
        sp.scaled = sp.prefactor * sp.window_max;
        sp.rho = rho_hat(k, Ameans);
        rep.points.push_back(std::move(sp));
    }
    // trends along the grid ordered toward the critical coupling
    std::vector<const ScanPoint*> ord;
    for (auto& p : rep.points) ord.push_back(&p);
    std::sort(ord.begin(), ord.end(), [](auto a, auto b) { return a->coupling > b->coupling; });
    rep.A_decreasing = rep.scaled_decreasing = ord.size() >= 2;
    for (std::size_t i = 1; i < ord.size(); ++i) {
        if (!(ord[i]->window_max < ord[i - 1]->window_max)) rep.A_decreasing = false;
        if (!(ord[i]->scaled < ord[i - 1]->scaled)) rep.scaled_decreasing = false;
    }
    rep.rho_decreasing = ord.size() >= 2 && ord.back()->rho.value < ord.front()->rho.value;
    for (auto p : ord)
        if (p->rho.value < 1.0) rep.rho_below_one = true;
    return rep;
}

} // namespace pinlab::fracmom
