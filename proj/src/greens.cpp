#include "pinlab/fourier.hpp"
#include "pinlab/kernels.hpp"
#include "pinlab/special.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace pinlab::kernels {

namespace {

std::mutex g_series_mu;
std::map<std::pair<int, int>, std::vector<double>> g_series_cache;

fourier::Options fourier_options(int d, const GreenOptions& opt) {
    fourier::Options o;
    o.grid = opt.grid > 0 ? opt.grid : (d <= 3 ? 160 : (d == 4 ? 112 : 72));
    o.radial_nodes = opt.radial_nodes;
    o.angular_nodes = opt.angular_nodes > 0 ? opt.angular_nodes : (d <= 4 ? 16 : 12);
    o.r_inner = opt.r_inner;
    o.r_outer = opt.r_outer;
    return o;
}

// 1 - φ² computed without cancellation: 1 - φ = (2/d) Σ sin²(k_i/2).
inline double one_minus_phi(int d, const double* k) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double h = std::sin(0.5 * k[i]);
        s += h * h;
    }
    return 2.0 * s / d;
}

double g_pair_quadrature(int d, const GreenOptions& opt) {
    auto f = [d](const double* k) {
        const double a = one_minus_phi(d, k);
        const double phi = 1.0 - a;
        return phi * phi / (a * (1.0 + phi));
    };
    return fourier::torus_average(d, f, true, fourier_options(d, opt));
}

} // namespace

std::vector<double> pair_return_series(int d, int n_max) {
    if (d < 1 || d > kMaxDim) throw InvalidArgument("pair_return_series: d must be in [1, 6]");
    if (n_max < 0) throw InvalidArgument("pair_return_series: n_max must be >= 0");
    {
        std::lock_guard lk(g_series_mu);
        auto it = g_series_cache.lower_bound({d, n_max});
        if (it != g_series_cache.end() && it->first.first == d)
            return std::vector<double>(it->second.begin(), it->second.begin() + n_max + 1);
    }
    const int M = 2 * n_max; // walk length
    // q1[m] = P^{(1)}_m(0); q[m] for the current dimension; even m only.
    std::vector<double> q1(M + 1, 0.0);
    for (int m = 0; m <= M; m += 2) q1[m] = std::exp(special::log_choose(m, m / 2) - m * std::log(2.0));
    std::vector<double> q = q1;
    for (int k = 2; k <= d; ++k) {
        std::vector<double> nq(M + 1, 0.0);
        const double la = std::log(1.0 / k), lb = std::log1p(-1.0 / k);
        parallel_for(static_cast<std::size_t>(n_max + 1), [&](std::size_t mi) {
            const int m = static_cast<int>(2 * mi);
            std::vector<double> terms;
            terms.reserve(m / 2 + 1);
            for (int j = 0; j <= m; j += 2) {
                const double lw = special::log_choose(m, j) + j * la + (m - j) * lb;
                terms.push_back(std::exp(lw) * q1[j] * q[m - j]);
            }
            nq[m] = pairwise_sum(terms);
        });
        q.swap(nq);
    }
    std::vector<double> out(n_max + 1);
    for (int n = 0; n <= n_max; ++n) out[n] = q[2 * n];
    std::lock_guard lk(g_series_mu);
    g_series_cache[{d, n_max}] = out;
    return out;
}

double PowerTail::at(double n) const {
    double s2 = 0.0, x = 1.0 / n, p = 1.0;
    for (double ck : c) {
        s2 += ck * p;
        p *= x;
    }
    return std::pow(n, -s) * s2;
}

double PowerTail::sum_beyond(long n0) const {
    double tot = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) tot += c[k] * special::hurwitz_zeta(s + k, n0 + 1.0);
    return tot;
}

PowerTail fit_power_tail(std::span<const double> v, long n_lo, long n_hi, double s, int terms) {
    if (n_lo < 1 || n_hi >= static_cast<long>(v.size()) || n_hi - n_lo + 1 < terms)
        throw InvalidArgument("fit_power_tail: bad fitting window");
    const long rows = n_hi - n_lo + 1;
    Eigen::MatrixXd A(rows, terms);
    Eigen::VectorXd b(rows);
    for (long r = 0; r < rows; ++r) {
        const double n = static_cast<double>(n_lo + r);
        double p = 1.0;
        for (int k = 0; k < terms; ++k) {
            // scale columns by n_lo^k to keep the system well conditioned
            A(r, k) = p;
            p *= static_cast<double>(n_lo) / n;
        }
        b(r) = v[n_lo + r] * std::pow(n, s);
    }
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    PowerTail t;
    t.s = s;
    t.c.resize(terms);
    for (int k = 0; k < terms; ++k) t.c[k] = c(k) * std::pow(static_cast<double>(n_lo), k);
    return t;
}

GreenValues green_pair(int d, double eps, const GreenOptions& opt) {
    GreenValues g;
    if (d < 1 || d > kMaxDim) throw InvalidArgument("green_pair: d must be in [1, 6]");
    if (d <= 2) {
        g.divergent = true;
        g.g_pair = INFINITY;
        g.method = "divergent";
        return g;
    }
    const long n0 = opt.series_terms;
    auto P = pair_return_series(d, static_cast<int>(n0));
    std::vector<double> head(P.begin() + 1, P.end());
    const double partial = pairwise_sum(head);
    auto fit = fit_power_tail(P, n0 / 2, n0, d / 2.0, opt.tail_terms);
    auto fit_lo = fit_power_tail(P, n0 / 2, n0, d / 2.0, opt.tail_terms - 1);
    const double tail = fit.sum_beyond(n0);
    g.g_pair_series = partial + tail;
    g.g_pair_quad = g_pair_quadrature(d, opt);
    g.g_pair = g.g_pair_series;
    g.error = std::max(std::fabs(g.g_pair_series - g.g_pair_quad), std::fabs(fit_lo.sum_beyond(n0) - tail));
    g.method = "series+quadrature";
    if (std::fabs(g.g_pair_series - g.g_pair_quad) > eps * g.g_pair) {
        std::ostringstream os;
        os.precision(17);
        os << "green_pair(d=" << d << "): series " << g.g_pair_series << " and quadrature " << g.g_pair_quad
           << " differ by more than eps=" << eps << " (relative)";
        throw ToleranceNotMet(os.str(), std::fabs(g.g_pair_series - g.g_pair_quad) / g.g_pair);
    }
    return g;
}

double green_ct_time_integral(int d) {
    if (d < 3) return INFINITY;
    // d ∫_0^∞ (e^{-u} I_0(u))^d du, panels doubling up to U, asymptotic tail beyond.
    const double U = 512.0;
    double total = 0.0;
    double lo = 0.0, hi = 0.5;
    while (lo < U) {
        hi = std::min(hi, U);
        auto q = special::gauss_legendre(32, lo, hi);
        for (std::size_t i = 0; i < q.x.size(); ++i) {
            const double g = std::cyl_bessel_i(0.0, q.x[i]) * std::exp(-q.x[i]);
            total += q.w[i] * std::pow(g, d);
        }
        lo = hi;
        hi *= 2.0;
    }
    // e^{-u} I_0(u) = (2πu)^{-1/2} Σ a_k u^{-k}, a_k = ((2k-1)!!)^2 / (k! 8^k)
    const int K = 8;
    std::vector<double> a(K, 0.0);
    a[0] = 1.0;
    for (int k = 1; k < K; ++k) a[k] = a[k - 1] * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k);
    std::vector<double> b(K, 0.0);
    b[0] = 1.0;
    for (int p = 0; p < d; ++p) {
        std::vector<double> nb(K, 0.0);
        for (int i = 0; i < K; ++i)
            for (int j = 0; i + j < K; ++j) nb[i + j] += b[i] * a[j];
        b.swap(nb);
    }
    double tail = 0.0;
    for (int j = 0; j < K; ++j) {
        const double e = d / 2.0 + j;
        tail += b[j] * std::pow(U, 1.0 - e) / (e - 1.0);
    }
    tail *= std::pow(2.0 * std::numbers::pi, -d / 2.0);
    return d * (total + tail);
}

GreenValues green_ct(int d, double rho, double eps, const GreenOptions& opt) {
    if (rho < 0.0) throw InvalidArgument("green_ct: rho must be >= 0");
    if (d < 1 || d > kMaxDim) throw InvalidArgument("green_ct: d must be in [1, 6]");
    GreenValues g;
    if (d <= 2) {
        g.divergent = true;
        g.g_ct = INFINITY;
        g.method = "divergent";
        return g;
    }
    auto f = [d](const double* k) { return 1.0 / one_minus_phi(d, k); };
    g.g_ct_quad = fourier::torus_average(d, f, false, fourier_options(d, opt));
    g.g_ct_time = green_ct_time_integral(d);
    const double diff = std::fabs(g.g_ct_quad - g.g_ct_time);
    g.error = diff;
    g.method = "quadrature+time-integral";
    if (diff > eps * g.g_ct_time) {
        std::ostringstream os;
        os.precision(17);
        os << "green_ct(d=" << d << "): quadrature " << g.g_ct_quad << " and time integral " << g.g_ct_time
           << " differ by more than eps=" << eps << " (relative)";
        throw ToleranceNotMet(os.str(), diff / g.g_ct_time);
    }
    g.g_ct = g.g_ct_quad / (1.0 + rho);
    return g;
}

GreenValues tilted_greens(int d, double h, double eps, const GreenOptions& opt) {
    if (d < 3 || d > kMaxDim) throw InvalidArgument("tilted_greens: d must be in [3, 6]");
    if (!(h >= 0.0 && h < 1.0)) throw InvalidArgument("tilted_greens: need 0 <= h < 1");
    GreenValues g = green_pair(d, std::max(eps, 1e-6), opt);
    const double dd = static_cast<double>(d) * d;
    auto o = fourier_options(d, opt);
    // 1 - φ²ψ = (1 - φ⁴) + φ² (h/d²) Σ sin²
    auto denom = [d, h, dd](const double* k, double& phi, double& s2, double& a) {
        a = one_minus_phi(d, k);
        phi = 1.0 - a;
        s2 = 0.0;
        for (int i = 0; i < d; ++i) {
            const double s = std::sin(k[i]);
            s2 += s * s;
        }
        const double one_m_phi4 = a * (1.0 + phi) * (1.0 + phi * phi);
        return one_m_phi4 + phi * phi * h / dd * s2;
    };
    g.g_even = fourier::torus_average(
        d,
        [&](const double* k) {
            double phi, s2, a;
            const double den = denom(k, phi, s2, a);
            const double psi = phi * phi - h / dd * s2;
            return phi * phi * (1.0 + psi) / den;
        },
        true, o);
    g.g_odd = fourier::torus_average(
        d,
        [&](const double* k) {
            double phi, s2, a;
            const double den = denom(k, phi, s2, a);
            return phi * phi * (1.0 + phi * phi) / den;
        },
        true, o);
    g.gap = h / dd *
            fourier::torus_average(
                d,
                [&](const double* k) {
                    double phi, s2, a;
                    const double den = denom(k, phi, s2, a);
                    const double p2 = phi * phi;
                    return p2 * p2 * s2 / (a * (1.0 + phi) * den);
                },
                true, o);
    g.gap_direct = g.g_pair_quad - g.g_odd;
    g.method = "quadrature";
    const double diff = std::fabs(g.gap - g.gap_direct);
    if (diff > eps * g.g_pair) {
        std::ostringstream os;
        os.precision(17);
        os << "tilted_greens(d=" << d << ", h=" << h << "): gap integral " << g.gap << " and direct difference "
           << g.gap_direct << " differ by more than eps=" << eps;
        throw ToleranceNotMet(os.str(), diff / g.g_pair);
    }
    g.error = diff;
    return g;
}

double gap_slope_at_zero(int d, const GreenOptions& opt) {
    if (d < 3 || d > kMaxDim) throw InvalidArgument("gap_slope_at_zero: d must be in [3, 6]");
    const double dd = static_cast<double>(d) * d;
    return fourier::torus_average(
               d,
               [d](const double* k) {
                   const double a = one_minus_phi(d, k);
                   const double phi = 1.0 - a;
                   double s2 = 0.0;
                   for (int i = 0; i < d; ++i) {
                       const double s = std::sin(k[i]);
                       s2 += s * s;
                   }
                   const double om = a * (1.0 + phi);
                   const double p2 = phi * phi;
                   return p2 * p2 * s2 / (om * om * (1.0 + p2));
               },
               true, fourier_options(d, opt)) /
           dd;
}

} // namespace pinlab::kernels
