#pragma once

#include "pinlab/annealed.hpp"
#include "pinlab/common.hpp"
#include "pinlab/quenched.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pinlab::fracmom {

using quenched::Variant;

struct FracMomConfig {
    Mode mode = Mode::discrete;
    int d = 5;
    double gamma = 0.9;
    double z = 1.0;        // discrete coupling (e^β - 1) G^{X-Y}
    double beta_bar = 1.0; // continuous coupling β G_{1+ρ}
    long L = 0;            // correlation length; 0 = floor(1/(coupling - 1))
    int R = 8;
    double epsilon = 0.1;  // d = 4 window exponent
    double h = NAN;        // NaN = default tilt rule
    double rho = 0.0;
    std::size_t replicas = 1000;
    std::uint64_t seed = 1;
    double dt = 0.05;      // continuous Volterra grid

    double coupling() const { return mode == Mode::discrete ? z : beta_bar; }
    // √(z-1) (discrete) or √(ρ(β̄-1)) (continuous) unless h is set.
    double tilt() const;
    long correlation() const;
    // Throws InvalidArgument when the exponent constraints or ranges fail.
    void validate() const;
};

// Defaults per dimension: γ = 0.9 for d >= 5, γ = 0.96 and ε = 0.1 for d = 4.
FracMomConfig default_config(Mode mode, int d);

enum class Sampling {
    plain,      // E^Y[Z^γ]
    tilted,     // E^{Y^h}[Z^γ]
    importance, // E^{Y^h}[f^{-1} Z^γ], an unbiased estimate of the plain value
};
const char* to_string(Sampling s);

// Discrete mode: estimates for every N = 0..N_max from one set of replicas
// (entry 0 is exactly 1 for pin and free).
std::vector<McEstimate> frac_moment_table(const FracMomConfig& cfg, long N_max, Variant variant,
                                          Sampling sampling = Sampling::plain);
// Single horizon; continuous mode supports pin, free, pin1, pin2 and z1.
McEstimate frac_moment_mc(const FracMomConfig& cfg, double horizon, Variant variant,
                          Sampling sampling = Sampling::plain);

// b(m) = ((z/G^{X-Y}) max_x p^X_m(x))^γ and B(m) = Σ_{m' >= m} b(m').
struct GapCoefficients {
    int d = 0;
    double z = 0.0, gamma = 0.0;
    std::vector<double> b; // index m = 0..M (b[0] unused)
    std::vector<double> B;
    bool paired = true;      // discrete: b(2k-1) = b(2k) = q(k)
    kernels::PowerTail tail; // fitted q(k) (paired) or b(m) (continuous)
    long M() const { return static_cast<long>(b.size()) - 1; }
    double b_at(long m) const;
    double B_at(long m) const;
    // Σ_{m >= R} B(m): the head-sum bound with all A_i <= 1.
    double head_sum(long R) const;
};
GapCoefficients gap_coefficients(int d, double z, double gamma, long M = 4000);
// Continuous analogue: b(m) = (β̄ p_{m-1}(0)/G_{1+ρ})^γ, b(1) uses p_0(0) = 1.
GapCoefficients gap_coefficients_ct(int d, double rho, double beta_bar, double gamma, long M = 4000);

struct RhoHatTerm {
    long i = 0;
    double A = 0.0;
    double B = 0.0;
    double contribution = 0.0;
};

struct RhoHat {
    double value = 0.0;
    std::vector<RhoHatTerm> terms;
    long L = 0;
    // first window index: ceil(L^{1-ε}) in d = 4, L - R + 1 otherwise
    long split = 0;
    double head_block = 0.0;
    double window_block = 0.0;
    double prefactor = 1.0; // L^{2-2γ} in d = 4, 1 otherwise
};

RhoHat rho_hat(const FracMomConfig& cfg, const std::vector<double>& A_pin, const GapCoefficients& gaps);
RhoHat rho_hat(const FracMomConfig& cfg, const std::vector<double>& A_pin);

// Exact E^{Y^h}[Ž^{z,pin}_N] through the parity renewal, and the bound with
// the per-return factor w = z (G_even ∨ G_odd) / G^{X-Y}.
struct TiltedAnnealed {
    std::vector<double> value;            // N = 0..N_max
    std::vector<double> dominating_bound; // E^{K_h}[w^{|ι ∩ [1,N]|}]
    double w = 0.0;
    double G_even = 0.0, G_odd = 0.0, G_pair = 0.0;
};
TiltedAnnealed tilted_annealed_discrete(double z, double h, long N_max, int d);

struct HolderSplit {
    double density_moment = 0.0; // E^Y[f^{-γ/(1-γ)}]
    double holder_factor = 0.0;  // density_moment^{1-γ}
    double tilted_value = 0.0;   // E^{Y^h}[Z^{pin}]
    double tilted_bound = 0.0;   // tilted_value^γ
    double product = 0.0;
    double density_bound = 0.0;  // closed-form exponential bound on density_moment
};
HolderSplit holder_split(const FracMomConfig& cfg, double horizon);
// All N = 0..N_max at once (discrete).
std::vector<HolderSplit> holder_split_table(const FracMomConfig& cfg, long N_max);

struct ShrinkPoint {
    double z = 0.0, h = 0.0, value = 0.0;
};
struct ShrinkReport {
    int d = 0;
    std::vector<ShrinkPoint> points;
    double fitted_c = 0.0;    // value - 1 ≈ -c √(z-1) + b (z-1)
    double fitted_b = 0.0;
    double predicted_c = 0.0; // (d gap/dh at 0) / G^{X-Y}
    double relative_error = 0.0;
};
double shrink_factor(int d, double z);
ShrinkReport shrink_fit(int d, const std::vector<double>& z_grid);

struct TiltedCt {
    std::vector<double> times;
    std::vector<double> value;     // E^{Y^{ρ+h}}[Z̄^{β̄,pin}_t] on the grid
    std::vector<double> pin2;      // E^{Y^{ρ+h}}[Z̄^{β̄,pin2}_t]
    std::vector<double> renewal_mean; // E^{K'}[β̄'^{|σ ∩ (0,t]|}]
    std::vector<double> bound;     // C_{ρ+h} β̄' renewal_mean
    double beta_prime = 0.0;
    double C = 0.0;
    double G = 0.0; // G_{1+ρ+h}
};
TiltedCt tilted_annealed_ct(int d, double beta_bar, double rho, double h, double t, double dt);

struct ScanPoint {
    double coupling = 0.0;
    long L = 0;
    double h = 0.0;
    long window_lo = 0, window_hi = 0;
    double prefactor = 1.0;
    std::vector<McEstimate> A; // index N = 0..window_hi (discrete) or the window times (continuous)
    std::vector<double> A_times;
    double window_max = 0.0;
    double window_max_stderr = 0.0;
    double scaled = 0.0; // prefactor * window_max
    double holder_max = 0.0; // max over the window of the Hölder product
    RhoHat rho;
};

struct FracMomReport {
    FracMomConfig config;
    std::vector<ScanPoint> points;
    bool A_decreasing = false;
    bool scaled_decreasing = false;
    bool rho_decreasing = false; // ρ̌ at the coupling closest to 1 < ρ̌ at the farthest
    bool rho_below_one = false;  // achieved at some grid point
};

FracMomReport gap_scan(const FracMomConfig& cfg, const std::vector<double>& grid);

} // namespace pinlab::fracmom
