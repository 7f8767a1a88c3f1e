#pragma once

#include "pinlab/common.hpp"
#include "pinlab/disorder.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace pinlab::pam {

using disorder::DisorderPath;

// u(t, ·) on the cube [-radius, radius]^d. Values are stored scaled: the
// field is values[i] * exp(log_scale).
struct Field {
    int d = 1;
    int radius = 0;
    double time = 0.0;
    double log_scale = 0.0;
    std::vector<double> values;
    // Absolute bound on |u_computed - u| at every site with |x|_∞ <= valid_radius.
    double truncation_bound = 0.0;
    int valid_radius = 0;

    long index(const int* x) const;
    double at(const int* x) const;
    double log_at(const int* x) const;
};

// ∂u/∂t = Δu + β δ_{Y_t} u with u(0, ·) = 1, Δ the generator of the rate-1
// walk. The cube is sized so that a walk started within max|Y|_∞ of the
// origin leaves it before time t with probability small enough for a
// relative error eps at the origin; outside the cube u is frozen at 1.
Field pam_solve(int d, double beta, double rho, double t, const DisorderPath& path, double eps = 1e-8);

// Y reversed in time on [0, t] and shifted to start at 0: the path
// s ↦ Y_{t-s} - Y_t. With it, u(t, Y_t) equals the free partition function
// Z^β_{t,Ỹ}.
DisorderPath reverse_path(const DisorderPath& path, double t);

// (1/t) log u(t, 0) per replica, on the same Y streams as
// quenched::free_energy_samples.
std::vector<double> lyapunov_samples(int d, double beta, double rho, double t, std::size_t replicas,
                                     std::uint64_t seed, double eps = 1e-8);
McEstimate lyapunov_estimate(int d, double beta, double rho, double t, std::size_t replicas, std::uint64_t seed,
                             double eps = 1e-8);

struct LyapunovComparison {
    double t = 0.0;
    McEstimate lambda0;
    McEstimate free_energy;
    McEstimate paired_difference; // λ̂₀ - F̂ replica by replica
    double combined_sigma = 0.0;  // sqrt(σ_λ² + σ_F²)
    double drift_band = 0.0;
    bool agree = false; // |λ̂₀ - F̂| <= 3 combined_sigma + drift_band
};

// Declared drift band between (1/t) log u(t,0) and (1/t) log Z^{pin}_t: the
// pinned partition pays a polynomial price for X_t = Y_t, and u(t,0) starts
// X off the catalyst. Both are O(log t / t); the band is (1 + (d/2) log(1+t))/t.
double drift_band(int d, double t);

LyapunovComparison compare_lyapunov(int d, double beta, double rho, double t, std::size_t replicas,
                                    std::uint64_t seed, double eps = 1e-8);

} // namespace pinlab::pam

namespace pinlab::polymer {

// Finite-support disorder law.
struct DisorderLaw {
    std::vector<double> values;
    std::vector<double> probs;

    static DisorderLaw bernoulli_pm1(); // ±1 with probability 1/2
    void validate() const;              // probabilities sum to 1, mean 0
    double log_mgf(double lambda) const; // M(λ) = log E e^{λω}
    // Law of ω̃: P(ω̃ = ζ) = e^{λζ - M(λ)} P(ω = ζ).
    DisorderLaw tilted(double lambda) const;
};

struct PolymerSpec {
    double lambda = 0.0;
    DisorderLaw law = DisorderLaw::bernoulli_pm1();

    double log_mgf(double l) const { return law.log_mgf(l); }
    double beta_hat() const;
};

// β̂(λ) = M(2λ) - 2M(λ).
double beta_hat(double lambda, const DisorderLaw& law);
double beta_hat(double lambda, const std::function<double(double)>& log_mgf);

// λ₂: the solution of β̂(λ) = log(1 + 1/G^{X-Y}), the annealed pinning
// critical point of the discrete model. 0 for d <= 2, and +inf when β̂ never
// reaches the target (Bernoulli ±1 saturates at log 2).
double lambda2(int d, const DisorderLaw& law);

// ω(i, x) for i = 1..N on the cube [-N, N]^d.
struct OmegaField {
    int d = 1;
    long N = 0;
    std::vector<double> values;

    OmegaField() = default;
    OmegaField(int d, long N, double fill = 0.0);
    std::size_t sites_per_layer() const;
    std::size_t offset(long i, const int* x) const;
    double at(long i, const int* x) const { return values[offset(i, x)]; }
    double& at(long i, const int* x) { return values[offset(i, x)]; }

    static OmegaField sample(int d, long N, const DisorderLaw& law, std::uint64_t seed, std::uint64_t replica = 0);
};

struct PolymerValue {
    double value = 0.0;
    std::string route; // "enumeration" or "field-dp"
};

// Z^λ_{N,ω} = E^X[exp Σ_{i=1}^N (λ ω(i, X_i) - M(λ))], by enumeration when
// (2d)^N <= 1e7 and by a transfer over the cube otherwise.
PolymerValue polymer_partition(double lambda, long N, int d, const OmegaField& omega, const DisorderLaw& law);
double polymer_partition_enumerate(double lambda, long N, int d, const OmegaField& omega, const DisorderLaw& law);
double polymer_partition_dp(double lambda, long N, int d, const OmegaField& omega, const DisorderLaw& law);

// Sites (i, x) with 1 <= i <= N that a walk from 0 can visit: |x|_1 <= i with
// the parity of i.
std::vector<std::pair<long, std::vector<int>>> reachable_sites(int d, long N);

struct ExactMoments {
    double mean = 0.0;          // E_ω[Z_N]
    double second = 0.0;        // E_ω[Z_N²]
    double martingale_gap = 0.0; // max over ω of |E[Z_{N+1} | ω up to N] - Z_N|
    std::size_t configurations = 0;
};
// Exhaustive enumeration of ω on the reachable sites.
ExactMoments exact_moments(double lambda, long N, int d, const DisorderLaw& law);

struct SizeBiasResult {
    double lhs = 0.0; // E[f(Z̃)]
    double rhs = 0.0; // E[Z f(Z)]
    double diff = 0.0;
    std::size_t configurations = 0;
};

// Exhaustive check of E[f(Z̃^λ_{N,ω,ω̃,Y})] = E[Z^λ_{N,ω} f(Z^λ_{N,ω})] over
// X, Y, ω and ω̃ on the reachable sites.
SizeBiasResult size_bias_check(double lambda, long N, int d, const std::function<double(double)>& f,
                               const DisorderLaw& law = DisorderLaw::bernoulli_pm1());

} // namespace pinlab::polymer
