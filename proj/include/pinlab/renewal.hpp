#pragma once

#include "pinlab/annealed.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace pinlab::renewal {

using annealed::RenewalLaw;

struct RenewalPath {
    std::vector<long> points; // 0 = ι_0 < ι_1 < ... <= horizon
    long horizon = 0;
    // |ι ∩ [1, horizon]|
    long count() const { return static_cast<long>(points.size()) - 1; }
};

// Draws i.i.d. gaps until the horizon is passed; points beyond it are dropped.
// A defective law (mass < 1) stops at an infinite gap.
RenewalPath sample_renewal(const RenewalLaw& law, long horizon, std::uint64_t seed, std::uint64_t replica = 0);

// E[s^{|ι ∩ [1,N]|}] by the backward recursion
// g(j) = Σ_{n <= N-j} K(n) s g(j+n) + Σ_{n > N-j} K(n).
double exact_gf_dp(const RenewalLaw& law, long N, double s);

// Monte Carlo estimate of the same expectation.
McEstimate gf_mc(const RenewalLaw& law, long N, double s, int replicas, std::uint64_t seed);

struct AppendixAParams {
    double c = 1.0;
    double delta1 = 0.55;
    double delta2 = 0.9;
    std::vector<long> N_grid = {256, 512, 1024, 2048, 4096};
    double alpha = 1.0; // stable index of the comparison subordinator, kept for the record
    int mc_replicas = 0;
    std::uint64_t seed = 1;
};

struct AppendixARow {
    long N = 0;
    double s = 0.0;
    double value = 0.0;            // E[s^{|ι∩[0,N]|}]
    double prefactored_value = 0.0; // N^{1-δ₂} value
    double mc_value = NAN;
    double mc_stderr = NAN;
    double ratio = NAN;        // prefactored value over the previous row's
    double decade_ratio = NAN; // the same shrink rate expressed per factor 10 in N
};

struct AppendixATable {
    std::vector<AppendixARow> rows;
    bool strictly_decreasing = false;
    double max_ratio = NAN;
    double max_decade_ratio = NAN;
    bool decay_flag = false; // every decade shrinks the prefactored value by at least 2x
};

AppendixATable appendixA_scan(const AppendixAParams& params, const RenewalLaw& law);

// Parity-dependent laws of the tilted walk Y^h.
struct ParityLaw {
    int d = 0;
    double h = 0.0;
    std::vector<double> E_even; // E^{Y^h}[p^X_n(Y^h_n)], n = 0..n_max (entry 0 unused)
    std::vector<double> E_odd;  // same, started after an odd step with Y^h_1 = e_1
    double G_even = 0.0;
    double G_odd = 0.0;
    double G_pair = 0.0;
    RenewalLaw K_even;
    RenewalLaw K_odd;
    double cross_check_error = 0.0; // max relative gap between Fourier and position-space routes
    int cross_check_n = 0;
};

ParityLaw parity_law(int d, double h, int n_max);

// E_even(n), E_odd(n) for n = 1..n_max from the torus average of φ^A ψ^B,
// evaluated exactly through the joint moments of (Σ cos k_i, Σ sin² k_i).
std::pair<std::vector<double>, std::vector<double>> parity_expectations_moments(int d, double h, int n_max);

// Position-space evaluation of E_even(n), E_odd(n) from the two-step law.
void parity_expectations_direct(int d, double h, int n_max, std::vector<double>& E_even, std::vector<double>& E_odd);

struct DominationCertificate {
    double min_margin = 0.0; // min over laws and n of tail_*(n) - tail_i(n)
    long worst_n = 0;
    int worst_law = -1;
    bool holds = false;
};

struct DominatingLaw {
    RenewalLaw law;
    double raw_mass = 0.0; // mass before renormalization
    DominationCertificate certificate;
};

DominatingLaw dominating_law(const std::vector<RenewalLaw>& laws, long n_max);

// Σ_{m >= n} K(m) for n = 1..n_max+1 (index n).
std::vector<double> tail_function(const RenewalLaw& law, long n_max);

} // namespace pinlab::renewal
