#pragma once

#include <vector>

namespace pinlab::special {

// Hurwitz zeta ζ(s, a) = Σ_{n≥0} (n + a)^{-s} for s > 1, a > 0.
double hurwitz_zeta(double s, double a);

// log of the binomial coefficient C(n, k).
double log_choose(long n, long k);

// Gauss–Legendre rule on [a, b] with n nodes.
struct Quadrature {
    std::vector<double> x;
    std::vector<double> w;
};
Quadrature gauss_legendre(int n, double a, double b);

// log of e^{-u} I_m(u) for m = 0..m_max, i.e. the log of the 1-d rate-1
// continuous-time walk kernel at time u. Uses downward ratio recursion and
// normalizes against Σ_{m∈Z} e^{-u} I_m(u) = 1, so no Bessel overflow.
std::vector<double> log_scaled_bessel_i(double u, int m_max);

// e^{-u} I_m(u) for a single order; direct evaluation, u may be large.
double scaled_bessel_i(int m, double u);

// Upper quantile of Poisson(mu): smallest k with P(Poisson(mu) > k) <= tail.
long poisson_upper(double mu, double tail);

// log P(Poisson(mu) > k)
double log_poisson_sf(double mu, long k);

} // namespace pinlab::special
