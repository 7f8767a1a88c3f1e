#include "pinlab/special.hpp"

#include "pinlab/common.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>

namespace pinlab::special {

double hurwitz_zeta(double s, double a) {
    if (!(s > 1.0) || !(a > 0.0)) throw InvalidArgument("hurwitz_zeta: need s > 1 and a > 0");
    // Euler–Maclaurin with the first N terms summed directly.
    const int N = 24;
    double sum = 0.0;
    for (int n = 0; n < N; ++n) sum += std::pow(n + a, -s);
    const double x = N + a;
    sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
    // Bernoulli numbers B_{2k}/(2k)!
    static const double b2k_over_fact[] = {
        1.0 / 12.0,           -1.0 / 720.0,           1.0 / 30240.0,
        -1.0 / 1209600.0,     1.0 / 47900160.0,       -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,  -3617.0 / 10670622842880000.0};
    double poch = s;                 // s (s+1) ... (s+2k-2)
    double xp = std::pow(x, -s - 1); // x^{-s-2k+1}
    for (int k = 0; k < 8; ++k) {
        sum += b2k_over_fact[k] * poch * xp;
        poch *= (s + 2 * k + 1) * (s + 2 * k + 2);
        xp /= x * x;
    }
    return sum;
}

double log_choose(long n, long k) {
    if (k < 0 || k > n) return -INFINITY;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

Quadrature gauss_legendre(int n, double a, double b) {
    if (n < 1) throw InvalidArgument("gauss_legendre: n must be >= 1");
    auto zeros = boost::math::legendre_p_zeros<double>(n); // nonnegative half
    Quadrature q;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    auto add = [&](double x) {
        double dp = boost::math::legendre_p_prime(n, x);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.x.push_back(c + h * x);
        q.w.push_back(h * w);
    };
    for (double z : zeros) {
        if (z == 0.0) {
            add(0.0);
        } else {
            add(-z);
            add(z);
        }
    }
    std::vector<std::size_t> idx(q.x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return q.x[i] < q.x[j]; });
    Quadrature out;
    for (auto i : idx) {
        out.x.push_back(q.x[i]);
        out.w.push_back(q.w[i]);
    }
    return out;
}

std::vector<double> log_scaled_bessel_i(double u, int m_max) {
    std::vector<double> out(static_cast<std::size_t>(m_max) + 1, -INFINITY);
    if (u < 0.0) throw InvalidArgument("log_scaled_bessel_i: negative argument");
    if (u == 0.0) {
        out[0] = 0.0;
        return out;
    }
    const int span = static_cast<int>(std::ceil(40.0 * std::sqrt(u) + 40.0));
    const int top = std::max(m_max, span) + 40;
    // r[n] = I_n / I_{n-1}
    std::vector<double> r(static_cast<std::size_t>(top) + 2, 0.0);
    double rn = 0.0;
    for (int n = top; n >= 1; --n) {
        rn = 1.0 / (2.0 * n / u + rn);
        r[n] = rn;
    }
    std::vector<double> cum(static_cast<std::size_t>(top) + 1, 0.0);
    for (int n = 1; n <= top; ++n) cum[n] = cum[n - 1] + std::log(r[n]);
    // normalisation: 1 = p0 (1 + 2 Σ_{n>=1} exp(cum_n))
    std::vector<double> terms;
    terms.reserve(top);
    for (int n = top; n >= 1; --n) terms.push_back(std::exp(cum[n]));
    double s = 0.0;
    for (double t : terms) s += t; // smallest first
    const double log_p0 = -std::log1p(2.0 * s);
    for (int m = 0; m <= m_max; ++m) out[m] = log_p0 + cum[m];
    return out;
}

double scaled_bessel_i(int m, double u) {
    m = std::abs(m);
    if (u == 0.0) return m == 0 ? 1.0 : 0.0;
    if (u < 500.0 && m < 400) {
        return std::cyl_bessel_i(static_cast<double>(m), u) * std::exp(-u);
    }
    return std::exp(log_scaled_bessel_i(u, m)[m]);
}

double log_poisson_sf(double mu, long k) {
    if (k < 0) return 0.0;
    if (mu <= 0.0) return -INFINITY;
    double p = boost::math::gamma_p(static_cast<double>(k + 1), mu);
    if (p > 0.0) return std::log(p);
    // deep tail: leading term of the series
    return (k + 1) * std::log(mu) - mu - std::lgamma(k + 2.0);
}

long poisson_upper(double mu, double tail) {
    if (mu <= 0.0) return 0;
    const double lt = std::log(tail);
    long k = static_cast<long>(std::floor(mu));
    long step = std::max<long>(1, static_cast<long>(std::sqrt(mu)));
    while (log_poisson_sf(mu, k) > lt) k += step;
    long lo = std::max<long>(0, k - step);
    while (lo < k) {
        long mid = (lo + k) / 2;
        if (log_poisson_sf(mu, mid) > lt)
            lo = mid + 1;
        else
            k = mid;
    }
    return k;
}

} // namespace pinlab::special
