#pragma once

#include "pinlab/common.hpp"
#include "pinlab/kernels.hpp"

#include <string>
#include <vector>

namespace pinlab::annealed {

// Inter-arrival law on {1, 2, ...}: exact masses up to n_max and a fitted
// power tail K(n) ≈ n^{-(1+α)} Σ_k c_k n^{-k} beyond.
struct RenewalLaw {
    Mode mode = Mode::discrete;
    int d = 0;
    double rho = 0.0;
    std::vector<double> K;        // K[0] = 0, K[n] for n = 1..n_max
    kernels::PowerTail tail;      // fitted form, already divided by the normalizer
    double tail_index = 0.0;      // α
    double tail_constant = 0.0;   // leading c_0
    double normalizer = 1.0;      // G used to normalize
    double mean = INFINITY;
    bool mean_finite = false;
    double defect = 0.0;
    std::string source;

    long n_max() const { return static_cast<long>(K.size()) - 1; }
    double at(long n) const;          // exact or fitted
    double tail_mass(long n) const;   // Σ_{m > n} K(m)
    double total_mass() const;        // Σ_{m >= 1} K(m)
    // Σ_{n >= 1} K(n) e^{-F n}
    double laplace(double F) const;
};

// K(n) = p^{X-Y}_n(0) / G^{X-Y}; requires d >= 3.
RenewalLaw renewal_law_discrete(int d, long n_max);

// Law from explicit masses K[1..n_max] and a tail; masses are not
// renormalized.
RenewalLaw renewal_law_from_masses(std::vector<double> K, kernels::PowerTail tail, double tail_index,
                                   std::string source);

// Least-squares slope of -log K(n) against log n on [n_lo, n_hi].
double fitted_tail_exponent(const RenewalLaw& law, long n_lo, long n_hi);
// Σ_{n <= m} n K(n)
double partial_mean(const RenewalLaw& law, long m);

// c_N = Σ_{n=1}^N z K(n) c_{N-n}, c_0 = 1. Returns log c_N (constrained) or
// log(1 + Σ_{j<=N} c_j) (free).
double annealed_partition(double z, const RenewalLaw& law, long N, bool constrained = true);
// All c_j for j = 0..N, log scale.
std::vector<double> annealed_log_sequence(double z, const RenewalLaw& law, long N);

// F solving z Σ K(n) e^{-F n} = 1 for z > 1, 0 otherwise.
double annealed_free_energy(double z, const RenewalLaw& law, double tol = 1e-13);

// Continuous time: β̄ ∫ K_{1+ρ}(s) e^{-F s} ds = 1.
double ct_kernel_laplace(int d, double rho, double F);
double annealed_free_energy_ct(double beta_bar, int d, double rho, double tol = 1e-13);

// β_c^ann: log(1 + 1/G^{X-Y}) (discrete) or 1/G_{1+ρ} (continuous); 0 for d <= 2.
double critical_point(Mode mode, int d, double rho = 0.0);

struct CorrelationLength {
    long L = 0;
    double exact = 0.0; // 1/(z-1)
};
CorrelationLength correlation_length(double z);

struct CurvePoint {
    double z = 0.0;
    double F = 0.0;
};
struct AnnealedCurve {
    std::vector<CurvePoint> points;
    double slope_fit = 0.0; // C in F ≈ C (z - 1), from the points closest to 1
};
AnnealedCurve annealed_curve(const RenewalLaw& law, const std::vector<double>& z_grid);

} // namespace pinlab::annealed
