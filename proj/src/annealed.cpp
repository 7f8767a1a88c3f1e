#include "pinlab/annealed.hpp"
#include "pinlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pinlab::annealed {

namespace {

// ∫_a^∞ x^{-s} e^{-F x} dx for s > 1.
double power_exp_integral(double s, double F, double a) {
    if (F <= 0.0) return std::pow(a, 1.0 - s) / (s - 1.0);
    double total = 0.0;
    double lo = a;
    auto q = special::gauss_legendre(24, 0.0, 1.0);
    for (int j = 0; j < 80; ++j) {
        const double hi = lo * 2.0;
        for (std::size_t i = 0; i < q.x.size(); ++i) {
            const double x = lo + (hi - lo) * q.x[i];
            total += (hi - lo) * q.w[i] * std::pow(x, -s) * std::exp(-F * x);
        }
        lo = hi;
        if (F * lo > 60.0) break;
    }
    // undamped remainder times the damping at lo: an upper bound, negligible
    return total + std::exp(-F * lo) * std::pow(lo, 1.0 - s) / (s - 1.0);
}

// Σ_{n > n0} n^{-s} e^{-F n} by Euler–Maclaurin from a = n0 + 1.
double power_exp_sum(double s, double F, long n0) {
    if (F <= 0.0) return special::hurwitz_zeta(s, n0 + 1.0);
    const double a = n0 + 1.0;
    const double f = std::pow(a, -s) * std::exp(-F * a);
    const double fp = -f * (s / a + F);
    const double fpp = f * ((s / a + F) * (s / a + F) + s / (a * a));
    const double fppp = -f * (std::pow(s / a + F, 3) + 3.0 * (s / a + F) * s / (a * a) + 2.0 * s / (a * a * a));
    return power_exp_integral(s, F, a) + 0.5 * f - fp / 12.0 + fppp / 720.0 + 0.0 * fpp;
}

} // namespace

double RenewalLaw::at(long n) const {
    if (n <= 0) return 0.0;
    if (n <= n_max()) return K[n];
    return tail.c.empty() ? 0.0 : tail.at(static_cast<double>(n));
}

double RenewalLaw::tail_mass(long n) const {
    double s = 0.0;
    if (n < n_max()) {
        std::vector<double> v(K.begin() + std::max<long>(n + 1, 1), K.end());
        s = pairwise_sum(v);
    }
    if (!tail.c.empty()) s += tail.sum_beyond(std::max(n, n_max()));
    return s;
}

double RenewalLaw::total_mass() const { return tail_mass(0); }

double RenewalLaw::laplace(double F) const {
    std::vector<double> terms(n_max());
    for (long n = 1; n <= n_max(); ++n) terms[n - 1] = K[n] * std::exp(-F * n);
    double s = pairwise_sum(terms);
    for (std::size_t k = 0; k < tail.c.size(); ++k) s += tail.c[k] * power_exp_sum(tail.s + k, F, n_max());
    return s;
}

RenewalLaw renewal_law_discrete(int d, long n_max) {
    if (d <= 2) throw InvalidArgument("renewal_law_discrete: recurrent dimension (d <= 2), G^{X-Y} is infinite");
    if (d > kernels::kMaxDim) throw InvalidArgument("renewal_law_discrete: d must be <= 6");
    if (n_max < 16) throw InvalidArgument("renewal_law_discrete: n_max must be >= 16");
    kernels::GreenOptions opt;
    opt.series_terms = std::max<long>(opt.series_terms, n_max);
    auto g = kernels::green_pair(d, 1e-6, opt);
    const double G = g.g_pair_series;
    auto P = kernels::pair_return_series(d, static_cast<int>(opt.series_terms));
    RenewalLaw law;
    law.mode = Mode::discrete;
    law.d = d;
    law.source = "pair_return";
    law.normalizer = G;
    law.K.assign(n_max + 1, 0.0);
    for (long n = 1; n <= n_max; ++n) law.K[n] = P[n] / G;
    // tail fitted on the exact series beyond n_max (same fit as the Green function)
    const long n0 = opt.series_terms;
    auto fit = kernels::fit_power_tail(P, n0 / 2, n0, d / 2.0, opt.tail_terms);
    if (n_max < n0) {
        // exact values between n_max and n0 are folded into the first tail coefficient
        // through a refit on [n_max/2, n_max] only when n_max is large enough
        const long lo = std::max<long>(8, n_max / 2);
        fit = kernels::fit_power_tail(P, lo, n_max, d / 2.0, std::min<int>(opt.tail_terms, static_cast<int>(n_max - lo + 1)));
    }
    for (auto& c : fit.c) c /= G;
    if (n_max < n0) {
        // pin the tail mass to the exact remainder so that ΣK = 1 holds exactly
        std::vector<double> head(P.begin() + 1, P.begin() + n_max + 1);
        const double want = (G - pairwise_sum(head)) / G;
        fit.c[0] += (want - fit.sum_beyond(n_max)) / special::hurwitz_zeta(fit.s, n_max + 1.0);
    }
    law.tail = fit;
    law.tail_index = d / 2.0 - 1.0;
    law.tail_constant = fit.c.empty() ? 0.0 : fit.c[0];
    law.defect = 1.0 - law.total_mass();
    if (d >= 5) {
        kernels::PowerTail mt = fit;
        mt.s -= 1.0;
        law.mean = partial_mean(law, n_max) + mt.sum_beyond(n_max);
        law.mean_finite = true;
    }
    return law;
}

RenewalLaw renewal_law_from_masses(std::vector<double> K, kernels::PowerTail tail, double tail_index,
                                   std::string source) {
    RenewalLaw law;
    law.K = std::move(K);
    if (law.K.empty()) law.K.push_back(0.0);
    law.K[0] = 0.0;
    law.tail = std::move(tail);
    law.tail_index = tail_index;
    law.tail_constant = law.tail.c.empty() ? 0.0 : law.tail.c[0];
    law.source = std::move(source);
    law.defect = 1.0 - law.total_mass();
    if (law.tail.c.empty() || law.tail.s > 2.0) {
        kernels::PowerTail mt = law.tail;
        mt.s -= 1.0;
        law.mean = partial_mean(law, law.n_max()) + (mt.c.empty() ? 0.0 : mt.sum_beyond(law.n_max()));
        law.mean_finite = true;
    }
    return law;
}

double fitted_tail_exponent(const RenewalLaw& law, long n_lo, long n_hi) {
    if (n_lo < 1 || n_hi > law.n_max() || n_hi - n_lo < 2) throw InvalidArgument("fitted_tail_exponent: bad window");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long m = 0;
    for (long n = n_lo; n <= n_hi; ++n) {
        if (law.K[n] <= 0.0) continue;
        const double x = std::log(static_cast<double>(n)), y = std::log(law.K[n]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double partial_mean(const RenewalLaw& law, long m) {
    std::vector<double> t;
    for (long n = 1; n <= std::min(m, law.n_max()); ++n) t.push_back(n * law.K[n]);
    return pairwise_sum(t);
}

std::vector<double> annealed_log_sequence(double z, const RenewalLaw& law, long N) {
    if (N > law.n_max()) throw InvalidArgument("annealed_partition: N exceeds the law's n_max");
    if (z < 0.0) throw InvalidArgument("annealed_partition: z must be >= 0");
    // tilted by e^{-a n} with a = log max(z, 1) so that values stay O(1)
    const double a = std::log(std::max(z, 1.0));
    std::vector<double> c(N + 1, 0.0), lc(N + 1, -INFINITY);
    c[0] = 1.0;
    lc[0] = 0.0;
    std::vector<double> zk(N + 1, 0.0);
    for (long n = 1; n <= N; ++n) zk[n] = z * law.K[n] * std::exp(-a * n);
    double log_scale = 0.0;
    std::vector<double> terms;
    for (long j = 1; j <= N; ++j) {
        terms.clear();
        for (long n = 1; n <= j; ++n) terms.push_back(zk[n] * c[j - n]);
        c[j] = pairwise_sum(terms);
        lc[j] = std::log(c[j]) + a * j + log_scale;
    }
    (void)log_scale;
    return lc;
}

double annealed_partition(double z, const RenewalLaw& law, long N, bool constrained) {
    auto lc = annealed_log_sequence(z, law, N);
    if (constrained) return lc[N];
    double m = 0.0;
    for (double v : lc) m = std::max(m, v);
    std::vector<double> t{std::exp(-m)};
    for (long j = 1; j <= N; ++j) t.push_back(std::exp(lc[j] - m));
    return m + std::log(pairwise_sum(t));
}

double annealed_free_energy(double z, const RenewalLaw& law, double tol) {
    if (!(z > 0.0)) throw InvalidArgument("annealed_free_energy: z must be > 0");
    const double mass = law.total_mass();
    if (z * mass <= 1.0) return 0.0;
    // z Σ K e^{-Fn} is decreasing in F; at F = log z it is at most z K(1) e^{-log z} ... < mass
    double lo = 0.0, hi = std::max(std::log(z), 1e-300);
    if (z * law.laplace(hi) > 1.0) throw NumericalError("annealed_free_energy: bracket failure");
    while (hi - lo > tol * std::max(hi, 1e-300)) {
        const double mid = 0.5 * (lo + hi);
        if (z * law.laplace(mid) > 1.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-300) break;
    }
    return 0.5 * (lo + hi);
}

double ct_kernel_laplace(int d, double rho, double F) {
    if (d < 3) return INFINITY;
    // ∫_0^∞ p_{(1+ρ)s}(0) e^{-Fs} ds / G_{1+ρ}; u = (1+ρ)s/d
    const double r1 = 1.0 + rho;
    const double a = F * d / r1;
    const double G1 = kernels::green_ct_time_integral(d);
    double total = 0.0;
    double lo = 0.0, hi = 0.5;
    const double U = a > 0.0 ? std::max(65536.0, 60.0 / a) : 65536.0;
    while (lo < U) {
        hi = std::min(hi, U);
        auto q = special::gauss_legendre(32, lo, hi);
        for (std::size_t i = 0; i < q.x.size(); ++i) {
            const double u = q.x[i];
            total += q.w[i] * std::pow(special::scaled_bessel_i(0, u), d) * std::exp(-a * u);
        }
        lo = hi;
        hi *= 2.0;
    }
    // remainder: (2πu)^{-d/2} (1 + d/(8u) + O(u^{-2})) e^{-au}, bounded by the undamped form
    const double hd = d / 2.0;
    const double rem = std::exp(-a * U) * std::pow(2.0 * std::numbers::pi, -hd) *
                       (std::pow(U, 1.0 - hd) / (hd - 1.0) + d / 8.0 * std::pow(U, -hd) / hd);
    total += rem;
    return d * total / G1;
}

double annealed_free_energy_ct(double beta_bar, int d, double rho, double tol) {
    if (!(beta_bar > 0.0)) throw InvalidArgument("annealed_free_energy_ct: beta_bar must be > 0");
    if (d < 3) throw InvalidArgument("annealed_free_energy_ct: needs d >= 3");
    if (beta_bar <= 1.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (beta_bar * ct_kernel_laplace(d, rho, hi) > 1.0) hi *= 2.0;
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (beta_bar * ct_kernel_laplace(d, rho, mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double critical_point(Mode mode, int d, double rho) {
    if (d < 1 || d > kernels::kMaxDim) throw InvalidArgument("critical_point: d must be in [1, 6]");
    if (!(rho >= 0.0)) throw InvalidArgument("critical_point: rho must be >= 0");
    if (d <= 2) return 0.0;
    if (mode == Mode::discrete) return std::log1p(1.0 / kernels::green_pair(d, 1e-6).g_pair);
    return (1.0 + rho) / kernels::green_ct_time_integral(d);
}

CorrelationLength correlation_length(double z) {
    if (!(z > 1.0)) throw InvalidArgument("correlation_length: z must be > 1");
    CorrelationLength c;
    c.exact = 1.0 / (z - 1.0);
    c.L = static_cast<long>(std::floor(c.exact * (1.0 + 1e-12)));
    return c;
}

AnnealedCurve annealed_curve(const RenewalLaw& law, const std::vector<double>& z_grid) {
    AnnealedCurve c;
    for (double z : z_grid) c.points.push_back({z, annealed_free_energy(z, law)});
    std::vector<CurvePoint> above;
    for (auto& p : c.points)
        if (p.z > 1.0) above.push_back(p);
    std::sort(above.begin(), above.end(), [](auto& a, auto& b) { return a.z < b.z; });
    if (above.size() > 3) above.resize(3);
    double num = 0.0, den = 0.0;
    for (auto& p : above) {
        num += p.F * (p.z - 1.0);
        den += (p.z - 1.0) * (p.z - 1.0);
    }
    c.slope_fit = den > 0.0 ? num / den : 0.0;
    return c;
}

} // namespace pinlab::annealed
